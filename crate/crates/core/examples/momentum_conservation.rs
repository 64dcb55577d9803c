//! A U(1) momentum map is conserved by the evolution flow, and its drift
//! follows the integrator tolerance.
use cosymplectic::dynamics::{integrate, IntegratorConfig};
use cosymplectic::quantum::{schrodinger_field, u1_action, Envelope, HermitianPath};
use cosymplectic::symmetry::{conservation_along_flow, verify_momentum_map};
use cosymplectic::FieldKind;

fn main() -> cosymplectic::Result<()> {
    let path = HermitianPath::two_level([0.3, 0.4, -0.2, 1.0], Envelope::Modulated { a: 0.5, b: 1.0 });
    let h = schrodinger_field(&path)?;
    let action = u1_action(2)?;
    let x0 = [0.0, 0.6, 0.0, 0.0, 0.8];

    let pts: Vec<Vec<f64>> = (0..50).map(|i| (0..5).map(|j| ((7 * i + j) as f64 * 0.61).sin()).collect()).collect();
    let check = verify_momentum_map(&action, h.as_ref(), &pts, 1e-10)?;
    println!("momentum map axioms: max residual {:.2e}", check.max_residual());

    for tol in [1e-8, 1e-9, 1e-10, 1e-11] {
        let traj = integrate(FieldKind::Evolution, h.as_ref(), &x0, 0.0, 10.0, &IntegratorConfig::rk45(tol))?;
        let drift = conservation_along_flow(&action, &traj)?;
        println!("tol {tol:.0e}: {:>4} steps, J drift {:.3e}", traj.s.len() - 1, drift.max());
    }
    Ok(())
}
