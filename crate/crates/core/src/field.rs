//! Scalar fields on a Darboux chart.
//!
//! A field is evaluated over [`Jet2`] inputs, so the same definition yields
//! values, exact gradients and Hessians, and can be composed with chart maps
//! (pullbacks) without finite differences.

use std::fmt;
use std::sync::Arc;

use crate::chart::DarbouxChart;
use crate::error::{Error, Result};
use crate::jet::Jet2;

/// A smooth function `(t, q, p) -> R` on a Darboux chart.
///
/// Implementations must be deterministic and side-effect free.
pub trait ScalarField: Send + Sync {
    fn chart(&self) -> &DarbouxChart;

    fn name(&self) -> &str;

    /// Evaluates on jet inputs (one per chart coordinate). The derivatives of
    /// the result are taken w.r.t. whatever variables the inputs carry.
    fn eval_jet(&self, x: &[Jet2]) -> Result<Jet2>;

    /// Value, gradient and Hessian w.r.t. the chart coordinates at `point`.
    fn jet(&self, point: &[f64]) -> Result<Jet2> {
        self.chart().check_point(point)?;
        let j = self.eval_jet(&Jet2::variables(point))?;
        if !j.is_finite() {
            return Err(domain(point, format!("non-finite derivative of {}", self.name())));
        }
        Ok(j)
    }

    fn value(&self, point: &[f64]) -> Result<f64> {
        self.chart().check_point(point)?;
        let x: Vec<Jet2> = point.iter().map(|&v| Jet2::constant(0, v)).collect();
        let v = self.eval_jet(&x)?.value;
        if !v.is_finite() {
            return Err(domain(point, format!("non-finite value of {}", self.name())));
        }
        Ok(v)
    }
}

/// Shared, thread-safe field handle.
pub type Field = Arc<dyn ScalarField>;

impl fmt::Debug for dyn ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({})", self.name())
    }
}

pub(crate) fn domain(point: &[f64], reason: impl Into<String>) -> Error {
    Error::Domain {
        point: point.to_vec(),
        reason: reason.into(),
    }
}

type JetFn = dyn Fn(&[Jet2]) -> Result<Jet2> + Send + Sync;

/// A field given by a closure over jet arithmetic.
#[derive(Clone)]
pub struct JetField {
    chart: DarbouxChart,
    name: String,
    f: Arc<JetFn>,
}

impl JetField {
    pub fn new(
        chart: DarbouxChart,
        name: impl Into<String>,
        f: impl Fn(&[Jet2]) -> Jet2 + Send + Sync + 'static,
    ) -> Self {
        Self::fallible(chart, name, move |x| Ok(f(x)))
    }

    /// A field whose closure may report a domain error itself.
    pub fn fallible(
        chart: DarbouxChart,
        name: impl Into<String>,
        f: impl Fn(&[Jet2]) -> Result<Jet2> + Send + Sync + 'static,
    ) -> Self {
        JetField {
            chart,
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn into_field(self) -> Field {
        Arc::new(self)
    }
}

impl ScalarField for JetField {
    fn chart(&self) -> &DarbouxChart {
        &self.chart
    }
    fn name(&self) -> &str {
        &self.name
    }
    fn eval_jet(&self, x: &[Jet2]) -> Result<Jet2> {
        crate::error::check_dim(self.chart.dim(), x.len())?;
        (self.f)(x)
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Adapter for black-box functions: derivatives by central differences with
/// step `cbrt(eps) * max(1, |x_i|)`.
#[derive(Clone)]
pub struct FdField {
    chart: DarbouxChart,
    name: String,
    f: Arc<ValueFn>,
}

impl FdField {
    pub fn new(
        chart: DarbouxChart,
        name: impl Into<String>,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        FdField {
            chart,
            name: name.into(),
            f: Arc::new(f),
        }
    }

    fn fd_jet(&self, x: &[f64]) -> Jet2 {
        let n = x.len();
        let f = |p: &[f64]| (self.f)(p);
        let f0 = f(x);
        let h: Vec<f64> = x
            .iter()
            .map(|v| f64::EPSILON.cbrt() * v.abs().max(1.0))
            .collect();
        let mut jet = Jet2::constant(n, f0);
        let mut p = x.to_vec();
        for i in 0..n {
            p[i] = x[i] + h[i];
            let fp = f(&p);
            p[i] = x[i] - h[i];
            let fm = f(&p);
            p[i] = x[i];
            jet.grad[i] = (fp - fm) / (2.0 * h[i]);
            jet.hess[i * n + i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let mut eval = |si: f64, sj: f64| {
                    p[i] = x[i] + si * h[i];
                    p[j] = x[j] + sj * h[j];
                    let v = f(&p);
                    p[i] = x[i];
                    p[j] = x[j];
                    v
                };
                let d = (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0))
                    / (4.0 * h[i] * h[j]);
                jet.hess[i * n + j] = d;
                jet.hess[j * n + i] = d;
            }
        }
        jet
    }

    pub fn into_field(self) -> Field {
        Arc::new(self)
    }
}

impl ScalarField for FdField {
    fn chart(&self) -> &DarbouxChart {
        &self.chart
    }
    fn name(&self) -> &str {
        &self.name
    }
    fn eval_jet(&self, x: &[Jet2]) -> Result<Jet2> {
        crate::error::check_dim(self.chart.dim(), x.len())?;
        let vals: Vec<f64> = x.iter().map(|j| j.value).collect();
        if x.first().is_some_and(|j| j.dim() == 0) {
            return Ok(Jet2::constant(0, (self.f)(&vals)));
        }
        Ok(Jet2::compose(&self.fd_jet(&vals), x))
    }
}

/// `constant + sum_k c_k f_k`; used for `h - sum xi^i J_i` and shifted fields.
#[derive(Clone)]
pub struct LinearCombination {
    chart: DarbouxChart,
    name: String,
    pub terms: Vec<(f64, Field)>,
    pub constant: f64,
}

impl LinearCombination {
    pub fn new(terms: Vec<(f64, Field)>, constant: f64) -> Result<Self> {
        let chart = terms
            .first()
            .map(|(_, f)| f.chart().clone())
            .ok_or_else(|| Error::InvalidInput("empty linear combination".into()))?;
        for (_, f) in &terms {
            if f.chart() != &chart {
                return Err(Error::InvalidInput(format!(
                    "field {} lives on a different chart",
                    f.name()
                )));
            }
        }
        let mut name = terms
            .iter()
            .map(|(c, f)| format!("{c}*{}", f.name()))
            .collect::<Vec<_>>()
            .join(" + ");
        if constant != 0.0 {
            name.push_str(&format!(" + {constant}"));
        }
        Ok(LinearCombination {
            chart,
            name,
            terms,
            constant,
        })
    }

    pub fn into_field(self) -> Field {
        Arc::new(self)
    }
}

impl ScalarField for LinearCombination {
    fn chart(&self) -> &DarbouxChart {
        &self.chart
    }
    fn name(&self) -> &str {
        &self.name
    }
    fn eval_jet(&self, x: &[Jet2]) -> Result<Jet2> {
        let dim = x.first().map_or(0, Jet2::dim);
        let mut acc = Jet2::constant(dim, self.constant);
        for (c, f) in &self.terms {
            acc += &f.eval_jet(x)?.scale(*c);
        }
        Ok(acc)
    }
}

/// `f + c`.
pub fn shifted(f: &Field, c: f64) -> Field {
    LinearCombination::new(vec![(1.0, f.clone())], c)
        .expect("single-term combination")
        .into_field()
}

/// The coordinate function `x_index`.
pub fn coordinate(chart: &DarbouxChart, index: usize) -> Field {
    let name = chart.labels()[index].clone();
    JetField::new(chart.clone(), name, move |x| x[index].clone()).into_field()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_field_matches_jet_field() {
        let chart = DarbouxChart::new(1).unwrap();
        let exact = JetField::new(chart.clone(), "f", |x| (&x[1] * &x[2]).sin() + &x[0] * &x[1]);
        let fd = FdField::new(chart, "f", |x| (x[1] * x[2]).sin() + x[0] * x[1]);
        let p = [0.3, 0.7, -1.1];
        let a = exact.jet(&p).unwrap();
        let b = fd.jet(&p).unwrap();
        assert!((a.value - b.value).abs() < 1e-15);
        for (x, y) in a.grad.iter().zip(&b.grad) {
            assert!((x - y).abs() < 1e-9);
        }
        for (x, y) in a.hess.iter().zip(&b.hess) {
            assert!((x - y).abs() < 1e-5);
        }
    }

    #[test]
    fn non_finite_values_are_domain_errors() {
        let chart = DarbouxChart::new(1).unwrap();
        let f = JetField::new(chart, "1/q", |x| x[1].recip());
        match f.jet(&[0.0, 0.0, 1.0]) {
            Err(Error::Domain { point, .. }) => assert_eq!(point, vec![0.0, 0.0, 1.0]),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn linear_combination_and_shift() {
        let chart = DarbouxChart::new(1).unwrap();
        let q = coordinate(&chart, 1);
        let p = coordinate(&chart, 2);
        let f = LinearCombination::new(vec![(2.0, q), (-1.0, p)], 0.5).unwrap();
        let j = f.jet(&[0.0, 1.0, 3.0]).unwrap();
        assert_eq!(j.value, 2.0 - 3.0 + 0.5);
        assert_eq!(j.grad, vec![0.0, 2.0, -1.0]);
        let g = shifted(&f.into_field(), 1.0);
        assert_eq!(g.value(&[0.0, 1.0, 3.0]).unwrap(), 0.5);
    }
}
