//! Energy-momentum stability verdicts for three benchmark equilibria.
use cosymplectic::equilibria::{chebyshev_grid, find_rep};
use cosymplectic::quantum::{schrodinger_field, u1_action, Envelope, HermitianPath, QuadraticField};
use cosymplectic::stability::{classify, empirical_lpdf_check, spectral_scan, ScanOptions};
use cosymplectic::symmetry::SymmetryAction;
use cosymplectic::{DarbouxChart, Field};
use nalgebra::DMatrix;

fn oscillator(env: Envelope) -> cosymplectic::Result<Field> {
    Ok(QuadraticField::new(DarbouxChart::new(1)?, "h", vec![(env, DMatrix::identity(2, 2))])?.into_field())
}

fn main() -> cosymplectic::Result<()> {
    let grid = chebyshev_grid(0.0, 10.0, 9);
    let opts = ScanOptions::default();
    let trivial = SymmetryAction::trivial(DarbouxChart::new(1)?);

    for (name, env) in [
        ("harmonic", Envelope::Constant(1.0)),
        ("decaying", Envelope::Decaying { a: 0.5, b: 1.0 }),
        ("growing", Envelope::Modulated { a: 0.5, b: 1.0 }),
    ] {
        let h = oscillator(env)?;
        let cand = find_rep(h.as_ref(), &trivial, &[0.0, 0.0], &grid, 1e-10)?;
        let scan = spectral_scan(h.as_ref(), &trivial, &cand, &[], &grid, 1.0, &opts)?;
        println!("== {name}");
        print!("{}", classify(&scan).to_text());
    }

    let path = HermitianPath::two_level([0.0, 0.0, 0.0, 1.0], Envelope::Constant(1.0));
    let h = schrodinger_field(&path)?;
    let u1 = u1_action(2)?;
    let cand = find_rep(h.as_ref(), &u1, &[1.0, 0.0, 0.0, 0.0], &grid, 1e-10)?;
    let scan = spectral_scan(h.as_ref(), &u1, &cand, &[0.5], &grid, 0.1, &opts)?;
    println!("== two-level ray (1, 0)");
    print!("{}", classify(&scan).to_text());

    // Lyapunov-candidate check of h itself around the oscillator's origin
    let h = oscillator(Envelope::Decaying { a: 0.5, b: 1.0 })?;
    let m = |t: f64, x: &[f64]| h.value(&[t, x[0], x[1]]).unwrap_or(f64::NAN);
    let lpdf = empirical_lpdf_check(&m, &[0.0, 0.0], &[0.1, 0.2, 0.4, 0.8], &grid, 7);
    println!(
        "== decaying oscillator energy: positive definite {}, decrescent {}, alpha(0.8) = {:.3}",
        lpdf.lpdf_witness, lpdf.decrescent_witness, lpdf.alpha_envelope[3]
    );
    Ok(())
}
