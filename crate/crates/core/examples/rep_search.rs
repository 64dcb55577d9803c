//! Newton search for relative equilibria and the checks that accompany it.
use cosymplectic::equilibria::{chebyshev_grid, find_rep, gauge_kernel_check, second_variation};
use cosymplectic::quantum::{schrodinger_field, u1_action, Envelope, HermitianPath};

fn main() -> cosymplectic::Result<()> {
    let path = HermitianPath::two_level([0.2, 0.6, 0.0, 0.8], Envelope::Decaying { a: 0.5, b: 0.4 });
    let h = schrodinger_field(&path)?;
    let action = u1_action(2)?;
    let grid = chebyshev_grid(0.0, 10.0, 9);

    let cand = find_rep(h.as_ref(), &action, &[0.93, 0.33, 0.05, 0.0], &grid, 1e-10)?;
    print!("{}", cand.to_text());
    let mu = action.momentum(&cand.point(0.0))?;
    for &t in &grid[..3] {
        let g = gauge_kernel_check(h.as_ref(), &action, &cand, &mu, t)?;
        let sv = second_variation(h.as_ref(), &action, &cand, t)?;
        println!("t = {t:.3}: gauge pairing {:.2e}, xi = {:.6}", g.max_pairing, sv.xi[0]);
    }

    // the search stays on the momentum level of the guess, so a generic start
    // still lands on an eigenvector ray of the same norm
    match find_rep(h.as_ref(), &action, &[0.3, 0.3, 0.3, 0.3], &[0.0, 1.0], 1e-10) {
        Ok(c) => println!("generic start converged to z_e = {:?}", c.z_e),
        Err(e) => println!("generic start: {e}"),
    }
    Ok(())
}
