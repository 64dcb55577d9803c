//! Finite-level Schrödinger dynamics in the real chart `psi_j = q_j + i p_j`,
//! the U(1) phase symmetry, the Hopf reduction of the two-level system and
//! relative equilibria as common eigenvectors.
//!
//! Conventions: `i dpsi/dt = H(t) psi`, realised as the evolution field of
//! `h(t, psi) = 1/2 <psi, H(t) psi>` with `dq/dt = dh/dp`, `dp/dt = -dh/dq`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::chart::DarbouxChart;
use crate::equilibria::{find_rep, RepCandidate};
use crate::error::{check_dim, Error, Result};
use crate::field::{Field, ScalarField};
use crate::jet::Jet2;
use crate::linalg::jacobi_eigen;
use crate::symmetry::{LieAlgebraSpec, ReductionChart, SymmetryAction};

/// Scalar time profiles `B(t)` with two derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Envelope {
    Constant(f64),
    /// `1 + a sin(b t)`.
    Modulated { a: f64, b: f64 },
    /// `1 + a exp(-b t)`.
    Decaying { a: f64, b: f64 },
    /// `amplitude * sin(frequency t + phase)`.
    Sinusoid { amplitude: f64, frequency: f64, phase: f64 },
}

impl Envelope {
    /// `(B, B', B'')` at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        match *self {
            Envelope::Constant(c) => (c, 0.0, 0.0),
            Envelope::Modulated { a, b } => {
                let (s, c) = (b * t).sin_cos();
                (1.0 + a * s, a * b * c, -a * b * b * s)
            }
            Envelope::Decaying { a, b } => {
                let e = (-b * t).exp();
                (1.0 + a * e, -a * b * e, a * b * b * e)
            }
            Envelope::Sinusoid { amplitude, frequency, phase } => {
                let (s, c) = (frequency * t + phase).sin_cos();
                (amplitude * s, amplitude * frequency * c, -amplitude * frequency * frequency * s)
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    /// Jet of `B(t(u))` for a jet `t`.
    pub fn jet(&self, t: &Jet2) -> Jet2 {
        let (v, d1, d2) = self.eval(t.value);
        t.chain(v, d1, d2)
    }
}

/// `H(t) = sum_k f_k(t) A_k` with Hermitian `A_k`.
#[derive(Clone, Debug)]
pub struct HermitianPath {
    n: usize,
    pub terms: Vec<(Envelope, DMatrix<Complex64>)>,
}

pub fn is_hermitian(a: &DMatrix<Complex64>, tol: f64) -> bool {
    a.is_square() && (a - a.adjoint()).iter().all(|z| z.norm() <= tol)
}

impl HermitianPath {
    pub fn new(terms: Vec<(Envelope, DMatrix<Complex64>)>) -> Result<Self> {
        let n = terms
            .first()
            .map(|(_, a)| a.nrows())
            .ok_or_else(|| Error::InvalidInput("empty Hamiltonian path".into()))?;
        if n == 0 {
            return Err(Error::InvalidInput("need at least one level".into()));
        }
        for (_, a) in &terms {
            check_dim(n, a.nrows())?;
            if !is_hermitian(a, 1e-12) {
                return Err(Error::InvalidInput("non-Hermitian coefficient matrix".into()));
            }
        }
        Ok(HermitianPath { n, terms })
    }

    pub fn levels(&self) -> usize {
        self.n
    }

    pub fn at(&self, t: f64) -> DMatrix<Complex64> {
        let mut h = DMatrix::zeros(self.n, self.n);
        for (e, a) in &self.terms {
            h += a * Complex64::new(e.value(t), 0.0);
        }
        h
    }

    /// `B(t) (B0 I + B1 S1 + B2 S2 + B3 S3)` with `S_j = sigma_j / 2`.
    pub fn two_level(b: [f64; 4], envelope: Envelope) -> Self {
        let basis = pauli_basis();
        let mut a = DMatrix::zeros(2, 2);
        for (bk, m) in b.iter().zip(&basis) {
            a += m * Complex64::new(*bk, 0.0);
        }
        HermitianPath::new(vec![(envelope, a)]).expect("Pauli combination is Hermitian")
    }
}

/// `[I, S1, S2, S3]` with `S_j = sigma_j / 2`.
pub fn pauli_basis() -> [DMatrix<Complex64>; 4] {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    [
        DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]),
        DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0)]),
        DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -0.5), c(0.0, 0.5), c(0.0, 0.0)]),
        DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]),
    ]
}

pub fn quantum_chart(n: usize) -> Result<DarbouxChart> {
    DarbouxChart::new(n)
}

/// Real `2n x 2n` matrix `[[Re A, -Im A], [Im A, Re A]]`: the action of `A`
/// on `(Re psi, Im psi)`, and the Hessian of `1/2 <psi, A psi>`.
pub fn realify(a: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = a[(i, j)];
            m[(i, j)] = z.re;
            m[(i, n + j)] = -z.im;
            m[(n + i, j)] = z.im;
            m[(n + i, n + j)] = z.re;
        }
    }
    m
}

/// `h(t, x) = sum_k f_k(t) 1/2 x^T Q_k x` over the spatial coordinates, with
/// exact jets including the time derivatives.
#[derive(Clone, Debug)]
pub struct QuadraticField {
    chart: DarbouxChart,
    name: String,
    terms: Vec<(Envelope, DMatrix<f64>)>,
}

impl QuadraticField {
    pub fn new(chart: DarbouxChart, name: impl Into<String>, terms: Vec<(Envelope, DMatrix<f64>)>) -> Result<Self> {
        for (_, q) in &terms {
            check_dim(chart.dim() - 1, q.nrows())?;
            check_dim(chart.dim() - 1, q.ncols())?;
        }
        Ok(QuadraticField {
            chart,
            name: name.into(),
            terms,
        })
    }

    pub fn into_field(self) -> Field {
        Arc::new(self)
    }

    /// Exact jet w.r.t. the chart coordinates at plain values.
    fn outer_jet(&self, x: &[f64]) -> Jet2 {
        let m = x.len() - 1;
        let z = DVector::from_column_slice(&x[1..]);
        let mut jet = Jet2::constant(m + 1, 0.0);
        for (e, q) in &self.terms {
            let (f, f1, f2) = e.eval(x[0]);
            let qz = q * &z;
            let val = 0.5 * z.dot(&qz);
            jet.value += f * val;
            jet.grad[0] += f1 * val;
            jet.hess[0] += f2 * val;
            for i in 0..m {
                jet.grad[1 + i] += f * qz[i];
                jet.hess[(1 + i) * (m + 1)] += f1 * qz[i];
                jet.hess[1 + i] += f1 * qz[i];
                for j in 0..m {
                    jet.hess[(1 + i) * (m + 1) + 1 + j] += f * q[(i, j)];
                }
            }
        }
        jet
    }
}

impl ScalarField for QuadraticField {
    fn chart(&self) -> &DarbouxChart {
        &self.chart
    }
    fn name(&self) -> &str {
        &self.name
    }
    fn eval_jet(&self, x: &[Jet2]) -> Result<Jet2> {
        check_dim(self.chart.dim(), x.len())?;
        let vals: Vec<f64> = x.iter().map(|j| j.value).collect();
        let outer = self.outer_jet(&vals);
        if x[0].dim() == 0 {
            return Ok(Jet2::constant(0, outer.value));
        }
        Ok(Jet2::compose(&outer, x))
    }
}

/// `f_A(psi) = 1/2 <psi, A psi>` as a field on the quantum chart.
pub fn observable_field(a: &DMatrix<Complex64>, name: &str) -> Result<Field> {
    if !is_hermitian(a, 1e-12) {
        return Err(Error::InvalidInput("observable must be Hermitian".into()));
    }
    let chart = quantum_chart(a.nrows())?;
    Ok(QuadraticField::new(chart, name, vec![(Envelope::Constant(1.0), realify(a))])?.into_field())
}

/// The Pauli observables `h_0..h_3` of the two-level system.
pub fn pauli_fields() -> [Field; 4] {
    let b = pauli_basis();
    let f = |k: usize| observable_field(&b[k], &format!("h{k}")).expect("Pauli matrices are Hermitian");
    [f(0), f(1), f(2), f(3)]
}

/// `h(t, psi) = f_{H(t)}(psi)`.
pub fn schrodinger_field(path: &HermitianPath) -> Result<Field> {
    let chart = quantum_chart(path.levels())?;
    let terms = path.terms.iter().map(|(e, a)| (*e, realify(a))).collect();
    Ok(QuadraticField::new(chart, "h", terms)?.into_field())
}

/// Phase rotations with momentum map `J = 1/2 sum (q_j^2 + p_j^2)`.
pub fn u1_action(n: usize) -> Result<SymmetryAction> {
    let id = DMatrix::<Complex64>::identity(n, n);
    let j = observable_field(&id, "J")?;
    SymmetryAction::new(LieAlgebraSpec::abelian(1), vec![j], quantum_chart(n)?)
}

/// Spatial chart point of a complex state.
pub fn state_to_point(t: f64, psi: &[Complex64]) -> Vec<f64> {
    let mut x = vec![t];
    x.extend(psi.iter().map(|z| z.re));
    x.extend(psi.iter().map(|z| z.im));
    x
}

pub fn point_to_state(x: &[f64]) -> Vec<Complex64> {
    let n = (x.len() - 1) / 2;
    (0..n).map(|j| Complex64::new(x[1 + j], x[1 + n + j])).collect()
}

/// Normalises and rotates the phase so that the first non-negligible
/// component is real and positive.
pub fn canonical_ray(v: &[Complex64]) -> Vec<Complex64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let scale = norm.max(f64::MIN_POSITIVE);
    let pivot = v.iter().find(|z| z.norm() > 1e-8 * scale).copied().unwrap_or(Complex64::new(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm();
    v.iter().map(|z| z * phase / norm).collect()
}

/// The Hopf parametrisation of the two-level level set `J = mu`:
/// level coordinates `(t, phi, theta1, theta2)`, reduced `(t, phi, theta)`
/// with `theta = theta1 - theta2`.
#[derive(Clone, Debug)]
pub struct HopfChart {
    mu: [f64; 1],
    ambient: DarbouxChart,
    reduced: DarbouxChart,
}

impl HopfChart {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidInput(format!("Hopf chart needs mu > 0 (got {mu})")));
        }
        Ok(HopfChart {
            mu: [mu],
            ambient: quantum_chart(2)?,
            reduced: DarbouxChart::with_labels(&["phi"], &["theta"])?,
        })
    }

    /// Unit Bloch vector `2 (h1, h2, h3) / h0`, well defined on the whole
    /// level set including the chart poles.
    pub fn bloch_vector(x: &[f64]) -> [f64; 3] {
        let (q1, q2, p1, p2) = (x[1], x[2], x[3], x[4]);
        let h0 = 0.5 * (q1 * q1 + q2 * q2 + p1 * p1 + p2 * p2);
        let h1 = 0.5 * (p1 * p2 + q1 * q2);
        let h2 = 0.5 * (q1 * p2 - q2 * p1);
        let h3 = 0.25 * (p1 * p1 + q1 * q1 - p2 * p2 - q2 * q2);
        [2.0 * h1 / h0, 2.0 * h2 / h0, 2.0 * h3 / h0]
    }
}

impl ReductionChart for HopfChart {
    fn mu(&self) -> &[f64] {
        &self.mu
    }
    fn ambient_chart(&self) -> &DarbouxChart {
        &self.ambient
    }
    fn reduced_chart(&self) -> &DarbouxChart {
        &self.reduced
    }
    fn level_dim(&self) -> usize {
        4
    }
    fn embed(&self, u: &[Jet2]) -> Vec<Jet2> {
        let r = (2.0 * self.mu[0]).sqrt();
        let (s, c) = (u[1].sin() * r, u[1].cos() * r);
        vec![
            u[0].clone(),
            &s * &u[2].cos(),
            &c * &u[3].cos(),
            &s * &u[2].sin(),
            &c * &u[3].sin(),
        ]
    }
    fn project(&self, u: &[Jet2]) -> Vec<Jet2> {
        vec![u[0].clone(), u[1].clone(), &u[2] - &u[3]]
    }
    fn section(&self, y: &[Jet2]) -> Vec<Jet2> {
        let dim = y[0].dim();
        vec![y[0].clone(), y[1].clone(), y[2].clone(), Jet2::constant(dim, 0.0)]
    }
    fn shift_along_fiber(&self, u: &[f64], amount: f64) -> Vec<f64> {
        vec![u[0], u[1], u[2] + amount, u[3] + amount]
    }
    fn reduced_omega(&self, y: &[f64]) -> DMatrix<f64> {
        let w = self.mu[0] * (2.0 * y[1]).sin();
        let mut m = DMatrix::zeros(3, 3);
        m[(1, 2)] = w;
        m[(2, 1)] = -w;
        m
    }
    fn reduced_eta(&self, _y: &[f64]) -> DVector<f64> {
        DVector::from_vec(vec![1.0, 0.0, 0.0])
    }
    fn degeneracy(&self, u: &[f64]) -> Option<String> {
        let s = (2.0 * u[1]).sin();
        (s.abs() <= 1e-8).then(|| format!("phi = {} lies on a pole of the (phi, theta) chart", u[1]))
    }
    fn reduced_coordinates(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(5, x.len())?;
        let (z1, z2) = (Complex64::new(x[1], x[3]), Complex64::new(x[2], x[4]));
        let j = 0.5 * (z1.norm_sqr() + z2.norm_sqr());
        if (j - self.mu[0]).abs() > 1e-8 * self.mu[0].max(1.0) {
            return Err(Error::InvalidInput(format!("point is off the level set (J = {j})")));
        }
        let phi = z1.norm().atan2(z2.norm());
        let mut theta = z1.arg() - z2.arg();
        theta = (theta + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI;
        Ok(vec![x[0], phi, theta])
    }
}

/// A ray that is an eigenvector of `H(t_k)` at every grid time.
#[derive(Clone, Debug)]
pub struct CertifiedRay {
    /// Unit vector, phase fixed.
    pub vector: Vec<Complex64>,
    /// Rayleigh quotients per grid time.
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Grid times at which the spectrum of `H(t)` was degenerate.
    pub degenerate_times: Vec<f64>,
    /// The matching relative equilibrium from the Newton search.
    pub rep: RepCandidate,
    /// Distance between the Newton point and the ray, up to phase and norm.
    pub agreement: f64,
}

fn spectrum_pairs(h: &DMatrix<Complex64>) -> (Vec<f64>, Vec<Vec<Complex64>>, f64) {
    let n = h.nrows();
    let (vals, vecs) = jacobi_eigen(&realify(h));
    let mut evs = Vec::with_capacity(n);
    let mut rays = Vec::with_capacity(n);
    for k in 0..n {
        evs.push(0.5 * (vals[2 * k] + vals[2 * k + 1]));
        let col = vecs.column(2 * k);
        rays.push(canonical_ray(&(0..n).map(|j| Complex64::new(col[j], col[n + j])).collect::<Vec<_>>()));
    }
    let gap = evs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    (evs, rays, gap)
}

/// Eigenvector rays of `H(times[0])` that remain eigenvectors at every grid
/// time within `tol`, each cross-checked against [`find_rep`].
pub fn rep_eigenvector_certify(path: &HermitianPath, times: &[f64], tol: f64) -> Result<Vec<CertifiedRay>> {
    const GAP: f64 = 1e-10;
    let t0 = *times.first().ok_or_else(|| Error::InvalidInput("empty time grid".into()))?;
    let (_, rays, gap0) = spectrum_pairs(&path.at(t0));
    if gap0 < GAP {
        return Err(Error::DegenerateSpectrum { t: t0, gap: gap0 });
    }
    let degenerate_times: Vec<f64> = times
        .iter()
        .copied()
        .filter(|&t| spectrum_pairs(&path.at(t)).2 < GAP)
        .collect();
    let h = schrodinger_field(path)?;
    let action = u1_action(path.levels())?;
    let mut out = Vec::new();
    for v in rays {
        let vv = DVector::from_column_slice(&v);
        let mut eigenvalues = Vec::with_capacity(times.len());
        let mut residuals = Vec::with_capacity(times.len());
        for &t in times {
            let ht = path.at(t);
            let hv = &ht * &vv;
            let lam = vv.dotc(&hv).re;
            eigenvalues.push(lam);
            residuals.push((hv - &vv * Complex64::new(lam, 0.0)).norm());
        }
        if residuals.iter().any(|r| !(*r <= tol)) {
            continue;
        }
        // Newton cross-check from a slightly perturbed start
        let mut z0: Vec<f64> = state_to_point(0.0, &v)[1..].to_vec();
        for (i, z) in z0.iter_mut().enumerate() {
            *z += 1e-6 * ((i as f64 + 1.0) * 0.7).sin();
        }
        let rep = find_rep(h.as_ref(), &action, &z0, times, tol)?;
        let w = canonical_ray(&point_to_state(&rep.point(t0)));
        let agreement = w.iter().zip(&v).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        if agreement > 1e-8 {
            return Err(Error::NotCertified { residual: agreement, tol: 1e-8 });
        }
        out.push(CertifiedRay {
            vector: v,
            eigenvalues,
            residuals,
            degenerate_times: degenerate_times.clone(),
            rep,
            agreement,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_derivatives() {
        for e in [
            Envelope::Modulated { a: 0.5, b: 1.3 },
            Envelope::Decaying { a: 0.5, b: 0.7 },
            Envelope::Sinusoid { amplitude: 2.0, frequency: 0.4, phase: 0.1 },
        ] {
            let t = 0.37;
            let h = 1e-5;
            let (_, d1, d2) = e.eval(t);
            let fd1 = (e.value(t + h) - e.value(t - h)) / (2.0 * h);
            let fd2 = (e.value(t + h) - 2.0 * e.value(t) + e.value(t - h)) / (h * h);
            assert!((d1 - fd1).abs() < 1e-8);
            assert!((d2 - fd2).abs() < 1e-4);
        }
    }

    #[test]
    fn pauli_observables_match_closed_forms() {
        let [h0, h1, h2, h3] = pauli_fields();
        let x = [0.0, 0.3, -0.7, 1.1, 0.4]; // (t, q1, q2, p1, p2)
        let (q1, q2, p1, p2) = (x[1], x[2], x[3], x[4]);
        let close = |a: f64, b: f64| (a - b).abs() < 1e-15;
        assert!(close(h0.value(&x).unwrap(), 0.5 * (q1 * q1 + q2 * q2 + p1 * p1 + p2 * p2)));
        assert!(close(h1.value(&x).unwrap(), 0.5 * (p1 * p2 + q1 * q2)));
        assert!(close(h2.value(&x).unwrap(), 0.5 * (q1 * p2 - q2 * p1)));
        assert!(close(h3.value(&x).unwrap(), 0.25 * (p1 * p1 + q1 * q1 - p2 * p2 - q2 * q2)));
    }

    #[test]
    fn quadratic_jet_time_derivatives() {
        let path = HermitianPath::two_level([0.2, 0.3, -0.1, 1.0], Envelope::Decaying { a: 0.5, b: 1.0 });
        let h = schrodinger_field(&path).unwrap();
        let x = [0.4, 0.3, -0.7, 1.1, 0.4];
        let j = h.jet(&x).unwrap();
        let eps = 1e-5;
        let mut xp = x;
        let mut xm = x;
        xp[0] += eps;
        xm[0] -= eps;
        let fd = (h.value(&xp).unwrap() - h.value(&xm).unwrap()) / (2.0 * eps);
        assert!((fd - j.grad[0]).abs() < 1e-9);
        let fd_tq = (h.jet(&xp).unwrap().grad[1] - h.jet(&xm).unwrap().grad[1]) / (2.0 * eps);
        assert!((fd_tq - j.hess_at(0, 1)).abs() < 1e-8);
        assert!((j.hess_at(0, 1) - j.hess_at(1, 0)).abs() == 0.0);
    }

    #[test]
    fn hopf_chart_rejects_nonpositive_mu() {
        assert!(HopfChart::new(0.0).is_err());
        assert!(HopfChart::new(-1.0).is_err());
    }
}
