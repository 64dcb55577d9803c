//! Lagrange points of the Sun-Earth-like restricted problem, their
//! gradient-REP residuals and the convergence of the Hill approximations.
use cosymplectic::threebody::{
    approximations, convergence_diagnostics, gradient_rep_residual, lagrange_points, lagrange_table_csv,
    l3_minus_branch_sign_changes, ThreeBodyParams, CERTIFICATION_TIMES,
};

fn main() -> cosymplectic::Result<()> {
    let params = ThreeBodyParams::new(0.99, 1.0)?;
    let points = lagrange_points(&params)?;
    print!("{}", lagrange_table_csv(&points));

    println!("\nlabel  |E_h - grad U|  |grad h - grad U|  reduced");
    for p in &points {
        let r = gradient_rep_residual(&params, p, &CERTIFICATION_TIMES)?;
        println!("{:5}  {:.3e}      {:.3e}          {:.3e}", p.label, r.field, r.literal, r.reduced);
    }

    let a = approximations(params.mu);
    println!("\napproximations: L1 {:.6} L2 {:.6} L3 {:.6}", a.l1, a.l2, a.l3);
    println!("\ndelta     |L1-a|/d^2/3  |L2-a|/d^2/3  |L3-a|");
    for row in convergence_diagnostics(&[1e-2, 1e-3, 1e-4], 1.0)? {
        let (q1, q2) = row.hill_ratios();
        println!("{:.0e}    {:.4}        {:.4}        {:.3e}", row.delta, q1, q2, row.l3_error);
    }
    println!("\nminus-branch L3 sign changes: {}", l3_minus_branch_sign_changes(params.mu));
    Ok(())
}
