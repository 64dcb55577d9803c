//! The cosymplectic structure in Darboux coordinates: Reeb field, the three
//! vector fields a function induces, the Poisson bracket and bivector, and
//! the symplectization consistency check.
//!
//! Conventions: `iota_{X_f} omega = df - (Rf) eta`, which in coordinates gives
//! `X_f = (0, df/dp, -df/dq)`.

use nalgebra::{DMatrix, DVector};

use crate::chart::DarbouxChart;
use crate::error::{check_dim, Result};
use crate::field::ScalarField;

/// A tangent vector in chart order (t-component first).
#[derive(Clone, Debug, PartialEq)]
pub struct FieldValue {
    pub components: DVector<f64>,
}

impl FieldValue {
    pub fn t(&self) -> f64 {
        self.components[0]
    }

    pub fn norm(&self) -> f64 {
        self.components.norm()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.components.as_slice()
    }
}

impl From<DVector<f64>> for FieldValue {
    fn from(components: DVector<f64>) -> Self {
        FieldValue { components }
    }
}

/// Which of the three induced vector fields to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldKind {
    /// `X_f`: no motion in `t`.
    Hamiltonian,
    /// `grad f = X_f + (Rf) R`.
    Gradient,
    /// `E_f = R + X_f`.
    Evolution,
}

impl std::str::FromStr for FieldKind {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hamiltonian" => Ok(FieldKind::Hamiltonian),
            "gradient" => Ok(FieldKind::Gradient),
            "evolution" => Ok(FieldKind::Evolution),
            _ => Err(crate::error::Error::InvalidInput(format!("unknown field kind `{s}`"))),
        }
    }
}

pub fn reeb(chart: &DarbouxChart, point: &[f64]) -> Result<FieldValue> {
    chart.check_point(point)?;
    let mut v = DVector::zeros(chart.dim());
    v[0] = 1.0;
    Ok(v.into())
}

/// `Lambda^sharp(alpha)` for a covector in chart order; the `dt` component is
/// annihilated.
pub fn bivector_apply(chart: &DarbouxChart, covector: &[f64]) -> Result<FieldValue> {
    check_dim(chart.dim(), covector.len())?;
    let n = chart.n();
    let mut v = DVector::zeros(chart.dim());
    for i in 0..n {
        v[chart.q(i)] = covector[chart.p(i)];
        v[chart.p(i)] = -covector[chart.q(i)];
    }
    Ok(v.into())
}

/// Matrix of the Poisson bivector: `Lambda^sharp(alpha) = B alpha`.
pub fn bivector_matrix(chart: &DarbouxChart) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(chart.dim(), chart.dim());
    for i in 0..chart.n() {
        b[(chart.q(i), chart.p(i))] = 1.0;
        b[(chart.p(i), chart.q(i))] = -1.0;
    }
    b
}

/// Matrix of `omega`: `omega(u, v) = u^T W v`.
pub fn omega_matrix(chart: &DarbouxChart) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(chart.dim(), chart.dim());
    for i in 0..chart.n() {
        w[(chart.q(i), chart.p(i))] = 1.0;
        w[(chart.p(i), chart.q(i))] = -1.0;
    }
    w
}

pub fn hamiltonian_field(f: &dyn ScalarField, point: &[f64]) -> Result<FieldValue> {
    let j = f.jet(point)?;
    bivector_apply(f.chart(), &j.grad)
}

pub fn gradient_field(f: &dyn ScalarField, point: &[f64]) -> Result<FieldValue> {
    let j = f.jet(point)?;
    let mut v = bivector_apply(f.chart(), &j.grad)?;
    v.components[0] = j.grad[0];
    Ok(v)
}

pub fn evolution_field(f: &dyn ScalarField, point: &[f64]) -> Result<FieldValue> {
    let mut v = hamiltonian_field(f, point)?;
    v.components[0] = 1.0;
    Ok(v)
}

pub fn vector_field(kind: FieldKind, f: &dyn ScalarField, point: &[f64]) -> Result<FieldValue> {
    match kind {
        FieldKind::Hamiltonian => hamiltonian_field(f, point),
        FieldKind::Gradient => gradient_field(f, point),
        FieldKind::Evolution => evolution_field(f, point),
    }
}

/// `{f, g} = sum_i (df/dq^i dg/dp_i - df/dp_i dg/dq^i)`.
pub fn poisson_bracket(f: &dyn ScalarField, g: &dyn ScalarField, point: &[f64]) -> Result<f64> {
    check_dim(f.chart().dim(), g.chart().dim())?;
    let (a, b) = (f.jet(point)?, g.jet(point)?);
    Ok(bracket_of_gradients(f.chart(), &a.grad, &b.grad))
}

pub(crate) fn bracket_of_gradients(chart: &DarbouxChart, df: &[f64], dg: &[f64]) -> f64 {
    (0..chart.n())
        .map(|i| df[chart.q(i)] * dg[chart.p(i)] - df[chart.p(i)] * dg[chart.q(i)])
        .sum()
}

/// Outcome of [`symplectization_check`].
#[derive(Clone, Debug)]
pub struct SymplectizationReport {
    pub samples: usize,
    /// Largest `|{pr* f, pr* g}^ - pr*{f, g}|` over the samples.
    pub max_residual: f64,
    /// Smallest `|det omega^|` over the samples.
    pub min_abs_det: f64,
    pub passed: bool,
}

/// Checks that `pr: R x M -> M` is a Poisson morphism for the symplectic form
/// `omega^ = pr* omega + ds ^ pr* eta` on `(s, t, q, p)`.
///
/// Each sample point has length `2n + 2` with `s` first.
pub fn symplectization_check(
    f: &dyn ScalarField,
    g: &dyn ScalarField,
    sample_points: &[Vec<f64>],
    tol: f64,
) -> Result<SymplectizationReport> {
    let chart = f.chart();
    check_dim(chart.dim(), g.chart().dim())?;
    let m = chart.dim() + 1;
    // omega^ matrix in (s, t, q, p)
    let mut w = DMatrix::<f64>::zeros(m, m);
    w[(0, 1)] = 1.0;
    w[(1, 0)] = -1.0;
    w.view_mut((1, 1), (m - 1, m - 1)).copy_from(&omega_matrix(chart));
    let det = w.determinant();
    let w_inv = w.clone().try_inverse();

    let mut max_residual: f64 = 0.0;
    for x in sample_points {
        check_dim(m, x.len())?;
        let base = &x[1..];
        let (df, dg) = (f.jet(base)?, g.jet(base)?);
        let lift = |d: &[f64]| {
            let mut v = DVector::zeros(m);
            v.rows_mut(1, m - 1).copy_from_slice(d);
            v
        };
        let (dfh, dgh) = (lift(&df.grad), lift(&dg.grad));
        // X_F = -W^{-1} dF, {F, G} = omega^(X_F, X_G) = -dF^T W^{-1} dG
        let lifted = match &w_inv {
            Some(wi) => -(dfh.transpose() * wi * dgh)[(0, 0)],
            None => f64::NAN,
        };
        let base_bracket = bracket_of_gradients(chart, &df.grad, &dg.grad);
        let r = (lifted - base_bracket).abs();
        max_residual = if r.is_nan() { f64::INFINITY } else { max_residual.max(r) };
    }
    let min_abs_det = det.abs();
    Ok(SymplectizationReport {
        samples: sample_points.len(),
        max_residual,
        min_abs_det,
        passed: max_residual <= tol && min_abs_det > 0.0,
    })
}

/// Central-difference Jacobian of a vector map, step `h` per coordinate.
pub fn jacobian_fd(
    v: &dyn Fn(&[f64]) -> Result<DVector<f64>>,
    point: &[f64],
    h: f64,
) -> Result<DMatrix<f64>> {
    let n = point.len();
    let mut p = point.to_vec();
    let mut cols = Vec::with_capacity(n);
    for i in 0..n {
        p[i] = point[i] + h;
        let fp = v(&p)?;
        p[i] = point[i] - h;
        let fm = v(&p)?;
        p[i] = point[i];
        cols.push((fp - fm) / (2.0 * h));
    }
    let rows = cols.first().map_or(0, |c| c.len());
    Ok(DMatrix::from_fn(rows, n, |r, c| cols[c][r]))
}

/// Lie bracket `[X, Y] = DY X - DX Y` of vector fields by central differences.
pub fn lie_bracket_fd(
    x: &dyn Fn(&[f64]) -> Result<DVector<f64>>,
    y: &dyn Fn(&[f64]) -> Result<DVector<f64>>,
    point: &[f64],
    h: f64,
) -> Result<DVector<f64>> {
    let dx = jacobian_fd(x, point, h)?;
    let dy = jacobian_fd(y, point, h)?;
    Ok(&dy * x(point)? - &dx * y(point)?)
}

/// `L_V Lambda` for the constant Darboux bivector, by central differences:
/// `-(DV B + B DV^T)`.
pub fn bivector_lie_derivative_fd(
    chart: &DarbouxChart,
    v: &dyn Fn(&[f64]) -> Result<DVector<f64>>,
    point: &[f64],
    h: f64,
) -> Result<DMatrix<f64>> {
    let dv = jacobian_fd(v, point, h)?;
    let b = bivector_matrix(chart);
    Ok(-(&dv * &b + &b * dv.transpose()))
}

/// Closure form of one of the induced vector fields, for use with the FD
/// helpers above.
pub fn field_closure<'a>(
    kind: FieldKind,
    f: &'a dyn ScalarField,
) -> impl Fn(&[f64]) -> Result<DVector<f64>> + 'a {
    move |x| vector_field(kind, f, x).map(|v| v.components)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{coordinate, JetField};

    fn osc() -> JetField {
        let c = DarbouxChart::new(1).unwrap();
        JetField::new(c, "h", |x| (&x[1] * &x[1] + &x[2] * &x[2]) * 0.5)
    }

    #[test]
    fn oscillator_fields() {
        let h = osc();
        let x = [0.7, 1.0, 0.0];
        assert_eq!(hamiltonian_field(&h, &x).unwrap().as_slice(), &[0.0, 0.0, -1.0]);
        assert_eq!(evolution_field(&h, &x).unwrap().as_slice(), &[1.0, 0.0, -1.0]);
        assert_eq!(gradient_field(&h, &x).unwrap().as_slice(), &[0.0, 0.0, -1.0]);
    }

    #[test]
    fn time_function() {
        let c = DarbouxChart::new(2).unwrap();
        let t = coordinate(&c, 0);
        let x = [3.2, 1.0, 1.0, 1.0, 1.0];
        assert_eq!(hamiltonian_field(t.as_ref(), &x).unwrap().norm(), 0.0);
        assert_eq!(gradient_field(t.as_ref(), &x).unwrap().as_slice(), reeb(&c, &x).unwrap().as_slice());
    }

    #[test]
    fn bivector_on_basis_covectors() {
        let c = DarbouxChart::new(1).unwrap();
        assert_eq!(bivector_apply(&c, &[1.0, 0.0, 0.0]).unwrap().norm(), 0.0);
        assert_eq!(bivector_apply(&c, &[0.0, 1.0, 0.0]).unwrap().as_slice(), &[0.0, 0.0, -1.0]);
        let b = bivector_matrix(&c);
        assert_eq!(b, omega_matrix(&c));
    }

    #[test]
    fn canonical_pair_bracket() {
        let c = DarbouxChart::new(1).unwrap();
        let (q, p) = (coordinate(&c, 1), coordinate(&c, 2));
        assert_eq!(poisson_bracket(q.as_ref(), p.as_ref(), &[0.1, 0.2, 0.3]).unwrap(), 1.0);
        let pts = vec![vec![0.5, 0.1, 0.2, 0.3]];
        let r = symplectization_check(q.as_ref(), p.as_ref(), &pts, 1e-14).unwrap();
        assert!(r.passed && r.max_residual == 0.0);
    }
}
