//! Two-level Schrödinger dynamics: U(1) momentum map, Hopf reduction to the
//! Bloch sphere and relative equilibria as common eigenvectors.
use std::sync::Arc;

use cosymplectic::dynamics::{integrate, IntegratorConfig};
use cosymplectic::equilibria::chebyshev_grid;
use cosymplectic::quantum::{
    pauli_fields, rep_eigenvector_certify, schrodinger_field, u1_action, Envelope, HermitianPath, HopfChart,
};
use cosymplectic::symmetry::{reduced_hamiltonian, verify_momentum_map, verify_reduction, ReductionChart};
use cosymplectic::{FieldKind, ScalarField};

fn main() -> cosymplectic::Result<()> {
    let path = HermitianPath::two_level([0.0, 0.0, 0.0, 1.0], Envelope::Modulated { a: 0.5, b: 1.0 });
    let h = schrodinger_field(&path)?;
    let action = u1_action(2)?;

    let pts: Vec<Vec<f64>> = (0..20)
        .map(|i| {
            let s = i as f64 * 0.37;
            vec![s, s.sin(), (1.3 * s).cos(), 0.5 - 0.1 * s, (0.7 * s).sin()]
        })
        .collect();
    let mm = verify_momentum_map(&action, h.as_ref(), &pts, 1e-9)?;
    println!("momentum map residual {:.2e} (passed: {})", mm.max_residual(), mm.passed);

    let mu = 0.5;
    let chart = Arc::new(HopfChart::new(mu)?);
    let level: Vec<Vec<f64>> = (0..20)
        .map(|i| {
            let s = i as f64 / 19.0;
            vec![s, 0.1 + s * (std::f64::consts::FRAC_PI_2 - 0.2), 2.0 * s, -s]
        })
        .collect();
    let red = verify_reduction(chart.as_ref(), &action, &level, 1e-9)?;
    println!(
        "Hopf reduction: omega {:.2e}, eta {:.2e}, level {:.2e}",
        red.omega_residual, red.eta_residual, red.level_residual
    );

    let [_, _, _, h3] = pauli_fields();
    let ysamples: Vec<Vec<f64>> = vec![vec![0.0, 0.4, 0.2], vec![1.0, 1.1, -2.0]];
    let k3 = reduced_hamiltonian(chart.clone(), h3, &ysamples)?;
    for y in &ysamples {
        let expect = -0.5 * mu * (2.0 * y[1]).cos();
        println!("k3{:?} = {:.15} (closed form {:.15})", y, k3.value(y)?, expect);
    }

    let times = chebyshev_grid(0.0, 10.0, 9);
    for ray in rep_eigenvector_certify(&path, &times, 1e-10)? {
        println!("certified ray {:?} (agreement {:.1e})", ray.vector, ray.agreement);
    }

    // a generic state precesses: the Bloch vector moves, theta drifts
    let x0 = vec![0.0, 0.6, 0.8, 0.0, 0.0];
    let traj = integrate(FieldKind::Evolution, h.as_ref(), &x0, 0.0, 10.0, &IntegratorConfig::rk45(1e-10))?;
    // J(x0) = mu, so the whole orbit stays on the level set
    let y_end = chart.reduced_coordinates(traj.last())?;
    println!("reduced coordinates at t = 10: {:?}", y_end);
    Ok(())
}
