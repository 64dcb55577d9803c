//! The Poisson bracket of a cosymplectic manifold: Jacobi identity, the
//! anti-morphism to vector fields, and the symplectization that realises it.
use cosymplectic::geometry::{field_closure, hamiltonian_field, lie_bracket_fd, poisson_bracket, symplectization_check};
use cosymplectic::polynomial::{bracket, parse, PolynomialField};
use cosymplectic::{DarbouxChart, FieldKind};

fn main() -> cosymplectic::Result<()> {
    let chart = DarbouxChart::new(2)?;
    let f = parse(&chart, "q1^2*p2 + t*q2 - 0.5*p1^3")?;
    let g = parse(&chart, "p1*p2 + q1*q2^2 + t^2*q1")?;
    let k = parse(&chart, "q1*p1 - 2*q2 + t*p2^2")?;
    let field = |p| PolynomialField::new(chart.clone(), "poly", p).map(|f| f.into_field());
    let (ff, gf, kf) = (field(f.clone())?, field(g.clone())?, field(k.clone())?);
    let fg = field(bracket(&chart, &f, &g))?;

    let x = [0.3, -0.7, 0.4, 1.1, -0.2];
    println!("{{f, g}}(x) = {:.12}", poisson_bracket(ff.as_ref(), gf.as_ref(), &x)?);

    let jacobi = poisson_bracket(ff.as_ref(), field(bracket(&chart, &g, &k))?.as_ref(), &x)?
        + poisson_bracket(gf.as_ref(), field(bracket(&chart, &k, &f))?.as_ref(), &x)?
        + poisson_bracket(kf.as_ref(), fg.as_ref(), &x)?;
    println!("Jacobi identity residual: {jacobi:.2e}");

    let comm = lie_bracket_fd(
        &field_closure(FieldKind::Hamiltonian, ff.as_ref()),
        &field_closure(FieldKind::Hamiltonian, gf.as_ref()),
        &x,
        1e-4,
    )?;
    let xfg = hamiltonian_field(fg.as_ref(), &x)?.components;
    println!("|X_{{f,g}} + [X_f, X_g]| = {:.2e}", (xfg + comm).amax());

    let lifted: Vec<Vec<f64>> = (0..10)
        .map(|i| {
            let s = 0.1 * i as f64;
            vec![s, s - 0.5, (2.0 * s).sin(), s * s, -s, 0.3]
        })
        .collect();
    let rep = symplectization_check(ff.as_ref(), gf.as_ref(), &lifted, 1e-10)?;
    println!(
        "symplectization: bracket residual {:.2e}, |det| {:.1}",
        rep.max_residual, rep.min_abs_det
    );
    Ok(())
}
