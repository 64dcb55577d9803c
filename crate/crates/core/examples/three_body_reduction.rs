//! Restricted three-body problem: the gradient symmetry t + varpi p_phi, the
//! reduction to the rotating frame and the relative equilibria there.
use cosymplectic::dynamics::{integrate, IntegratorConfig};
use cosymplectic::threebody::{
    self, gradient_rep_residual, lagrange_points, project, reduction_trajectory_gap, verify_k_formula,
    ThreeBodyParams, CERTIFICATION_TIMES,
};
use cosymplectic::FieldKind;

fn main() -> cosymplectic::Result<()> {
    let params = ThreeBodyParams::new(0.99, 1.0)?;
    let pts: Vec<Vec<f64>> = (0..50)
        .map(|i| {
            let s = i as f64;
            vec![0.1 * s, 1.2 + 0.5 * (0.7 * s).sin(), 0.37 * s, 0.2 * (1.1 * s).cos(), 1.0 + 0.3 * s.sin()]
        })
        .collect();
    println!("k-formula residual at 50 points: {:.2e}", verify_k_formula(&params, &pts)?);
    let x0 = [0.0, 1.3, 0.4, 0.02, 1.2];
    println!("projected vs reduced trajectories on [0, 2]: {:.2e}", reduction_trajectory_gap(&params, &x0, 2.0, 1e-3)?);

    println!("label        r   |E_h - grad Y|   |grad h - grad Y|");
    for p in lagrange_points(&params)? {
        let res = gradient_rep_residual(&params, &p, &CERTIFICATION_TIMES)?;
        println!("{:<5} {:>10.6}   {:>12.2e}   {:>12.2e}", p.label, p.r, res.field, res.literal);
    }

    // a trajectory started near L4 stays near it in the rotating frame
    let l4 = &lagrange_points(&params)?[3];
    let mut start = l4.at(&params, 0.0);
    start[1] += 1e-3;
    let h = threebody::hamiltonian(&params);
    let cfg = IntegratorConfig::rk45(1e-11).with_guard(params.collision_guard());
    let traj = integrate(FieldKind::Evolution, h.as_ref(), &start, 0.0, 50.0, &cfg)?;
    let home = project(&params, &l4.at(&params, 0.0));
    let far = traj
        .states
        .iter()
        .map(|x| {
            let y = project(&params, x);
            ((y[1] - home[1]).powi(2) + (y[2] - home[2]).powi(2)).sqrt()
        })
        .fold(0.0, f64::max);
    println!("near-L4 orbit: max distance from L4 in the rotating frame over [0, 50]: {far:.2e}");
    Ok(())
}
