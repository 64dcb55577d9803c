//! Lie algebra actions with momentum maps, the infinitesimal cocycle, the
//! tangency identities along level sets, and numerical verification of
//! reduced structures against user-supplied reduction charts.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::chart::DarbouxChart;
use crate::dynamics::{monitor, Trajectory};
use crate::error::{check_dim, Error, Result};
use crate::field::{Field, LinearCombination, ScalarField};
use crate::geometry::{bracket_of_gradients, hamiltonian_field, omega_matrix, FieldValue};
use crate::jet::Jet2;
use crate::linalg::{self, max_principal_angle, null_space, orthonormal_span};

/// Structure constants `[xi_i, xi_j] = sum_k c^k_ij xi_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebraSpec {
    d: usize,
    /// Flattened `c[k][i][j]`.
    c: Vec<f64>,
}

impl LieAlgebraSpec {
    /// Validates antisymmetry and the Jacobi identity (to `1e-12`).
    pub fn new(d: usize, c: Vec<f64>) -> Result<Self> {
        check_dim(d * d * d, c.len())?;
        let alg = LieAlgebraSpec { d, c };
        let scale = alg.c.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    if (alg.constant(k, i, j) + alg.constant(k, j, i)).abs() > 1e-12 * scale {
                        return Err(Error::InvalidInput(format!(
                            "structure constants not antisymmetric at (k,i,j) = ({k},{i},{j})"
                        )));
                    }
                }
            }
        }
        let jac = alg.jacobi_residual();
        if jac > 1e-12 * scale * scale {
            return Err(Error::InvalidInput(format!("Jacobi identity violated by {jac:e}")));
        }
        Ok(alg)
    }

    pub fn abelian(d: usize) -> Self {
        LieAlgebraSpec { d, c: vec![0.0; d * d * d] }
    }

    /// `su(2)`-type algebra `[xi_1, xi_2] = xi_3` and cyclic permutations.
    pub fn su2() -> Self {
        let mut c = vec![0.0; 27];
        let idx = |k: usize, i: usize, j: usize| (k * 3 + i) * 3 + j;
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            c[idx(k, i, j)] = 1.0;
            c[idx(k, j, i)] = -1.0;
        }
        LieAlgebraSpec { d: 3, c }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn constant(&self, k: usize, i: usize, j: usize) -> f64 {
        self.c[(k * self.d + i) * self.d + j]
    }

    /// `[a, b]` in basis coordinates.
    pub fn bracket(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let d = self.d;
        (0..d)
            .map(|k| {
                let mut s = 0.0;
                for i in 0..d {
                    for j in 0..d {
                        s += self.constant(k, i, j) * a[i] * b[j];
                    }
                }
                s
            })
            .collect()
    }

    /// Largest violation of the Jacobi identity on basis triples.
    pub fn jacobi_residual(&self) -> f64 {
        let d = self.d;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let mut s = 0.0;
                        for m in 0..d {
                            s += self.constant(m, i, j) * self.constant(l, m, k)
                                + self.constant(m, j, k) * self.constant(l, m, i)
                                + self.constant(m, k, i) * self.constant(l, m, j);
                        }
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }
}

/// An action by Hamiltonian fundamental fields `xi_M = X_{J_xi}`.
#[derive(Clone)]
pub struct SymmetryAction {
    pub algebra: LieAlgebraSpec,
    pub components: Vec<Field>,
    chart: DarbouxChart,
}

impl std::fmt::Debug for SymmetryAction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let names: Vec<&str> = self.components.iter().map(|c| c.name()).collect();
        f.debug_struct("SymmetryAction")
            .field("algebra", &self.algebra)
            .field("components", &names)
            .finish()
    }
}

impl SymmetryAction {
    pub fn new(algebra: LieAlgebraSpec, components: Vec<Field>, chart: DarbouxChart) -> Result<Self> {
        check_dim(algebra.dim(), components.len())?;
        for c in &components {
            if c.chart() != &chart {
                return Err(Error::InvalidInput(format!("{} is on a different chart", c.name())));
            }
        }
        Ok(SymmetryAction {
            algebra,
            components,
            chart,
        })
    }

    /// The zero-dimensional action.
    pub fn trivial(chart: DarbouxChart) -> Self {
        SymmetryAction {
            algebra: LieAlgebraSpec::abelian(0),
            components: Vec::new(),
            chart,
        }
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn chart(&self) -> &DarbouxChart {
        &self.chart
    }

    /// `J_xi = sum a^i J_i`.
    pub fn j_xi(&self, a: &[f64]) -> Result<Field> {
        check_dim(self.dim(), a.len())?;
        let terms = a.iter().copied().zip(self.components.iter().cloned()).collect();
        Ok(LinearCombination::new(terms, 0.0)?.into_field())
    }

    pub fn momentum(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.components.iter().map(|c| c.value(point)).collect()
    }

    /// `d x (2n+1)` matrix whose rows are `dJ_i`.
    pub fn momentum_jacobian(&self, point: &[f64]) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(self.dim(), self.chart.dim());
        for (i, c) in self.components.iter().enumerate() {
            let j = c.jet(point)?;
            m.set_row(i, &DVector::from_vec(j.grad).transpose());
        }
        Ok(m)
    }

    /// `xi_M` at `point` for `xi = sum a^i xi_i`.
    pub fn fundamental_field(&self, a: &[f64], point: &[f64]) -> Result<FieldValue> {
        check_dim(self.dim(), a.len())?;
        let mut v = DVector::zeros(self.chart.dim());
        for (ai, c) in a.iter().zip(&self.components) {
            if *ai != 0.0 {
                v += hamiltonian_field(c.as_ref(), point)?.components * *ai;
            }
        }
        Ok(v.into())
    }

    /// Columns are the basis fundamental fields `(xi_i)_M` at `point`.
    pub fn fundamental_matrix(&self, point: &[f64]) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(self.chart.dim(), self.dim());
        for (i, c) in self.components.iter().enumerate() {
            m.set_column(i, &hamiltonian_field(c.as_ref(), point)?.components);
        }
        Ok(m)
    }
}

/// Per-basis-element worst residuals of the momentum-map axioms.
#[derive(Clone, Debug)]
pub struct MomentumMapReport {
    pub samples: usize,
    /// `|iota_{xi_M} omega - dJ_xi|` on `ker eta`.
    pub contraction: Vec<f64>,
    /// `|R J_xi|`.
    pub time_independence: Vec<f64>,
    /// `|eta(xi_M)|`.
    pub eta: Vec<f64>,
    /// `|xi_M h|`.
    pub invariance: Vec<f64>,
    pub tol: f64,
    pub passed: bool,
}

impl MomentumMapReport {
    pub fn max_residual(&self) -> f64 {
        self.contraction
            .iter()
            .chain(&self.time_independence)
            .chain(&self.eta)
            .chain(&self.invariance)
            .fold(0.0, |m, v| m.max(*v))
    }
}

pub fn verify_momentum_map(
    action: &SymmetryAction,
    h: &dyn ScalarField,
    sample_points: &[Vec<f64>],
    tol: f64,
) -> Result<MomentumMapReport> {
    let d = action.dim();
    let chart = action.chart();
    check_dim(chart.dim(), h.chart().dim())?;
    let w = omega_matrix(chart);
    let mut rep = MomentumMapReport {
        samples: sample_points.len(),
        contraction: vec![0.0; d],
        time_independence: vec![0.0; d],
        eta: vec![0.0; d],
        invariance: vec![0.0; d],
        tol,
        passed: true,
    };
    for x in sample_points {
        let dh = DVector::from_vec(h.jet(x)?.grad);
        for (i, c) in action.components.iter().enumerate() {
            let dj = DVector::from_vec(c.jet(x)?.grad);
            let xm = hamiltonian_field(c.as_ref(), x)?.components;
            // iota_X omega = W^T X as a covector; restrict to ker eta by
            // dropping the dt slot
            let contr = w.transpose() * &xm - &dj;
            let a = contr.rows(1, chart.dim() - 1).amax();
            rep.contraction[i] = rep.contraction[i].max(a);
            rep.time_independence[i] = rep.time_independence[i].max(dj[0].abs());
            rep.eta[i] = rep.eta[i].max(xm[0].abs());
            rep.invariance[i] = rep.invariance[i].max(xm.dot(&dh).abs());
        }
    }
    rep.passed = rep.max_residual() <= tol;
    Ok(rep)
}

/// Drift of each momentum component along a trajectory.
#[derive(Clone, Debug)]
pub struct ConservationReport {
    pub max_drift: Vec<f64>,
}

impl ConservationReport {
    pub fn max(&self) -> f64 {
        self.max_drift.iter().fold(0.0, |m, v| m.max(*v))
    }
}

pub fn conservation_along_flow(action: &SymmetryAction, traj: &Trajectory) -> Result<ConservationReport> {
    if let Some(x) = traj.states.first() {
        check_dim(action.chart().dim(), x.len())?;
    }
    let fields: Vec<&dyn ScalarField> = action.components.iter().map(|c| c.as_ref()).collect();
    let m = monitor(traj, &fields)?;
    Ok(ConservationReport { max_drift: m.max_drift })
}

/// The infinitesimal cocycle `Sigma(xi_i, xi_j) = {J_j, J_i} - J_{[xi_j, xi_i]}`.
#[derive(Clone, Debug)]
pub struct CocycleReport {
    pub mean: DMatrix<f64>,
    /// Largest deviation of any sample from the mean (constancy).
    pub max_deviation: f64,
    /// `max |Sigma + Sigma^T|`.
    pub antisymmetry: f64,
    /// Largest residual of the cyclic identity on basis triples.
    pub cyclic_residual: f64,
}

pub fn cocycle_form(action: &SymmetryAction, sample_points: &[Vec<f64>]) -> Result<CocycleReport> {
    if sample_points.len() < 2 {
        return Err(Error::InvalidInput("cocycle_form needs at least two samples".into()));
    }
    let d = action.dim();
    let chart = action.chart();
    let mut mats = Vec::with_capacity(sample_points.len());
    for x in sample_points {
        let jets: Vec<Jet2> = action.components.iter().map(|c| c.jet(x)).collect::<Result<_>>()?;
        let mut s = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let br = bracket_of_gradients(chart, &jets[j].grad, &jets[i].grad);
                let jb: f64 = (0..d).map(|k| action.algebra.constant(k, j, i) * jets[k].value).sum();
                s[(i, j)] = br - jb;
            }
        }
        mats.push(s);
    }
    let mean = mats.iter().fold(DMatrix::zeros(d, d), |a, m| a + m) / mats.len() as f64;
    let max_deviation = mats.iter().map(|m| (m - &mean).amax()).fold(0.0, f64::max);
    let antisymmetry = if d == 0 { 0.0 } else { (&mean + mean.transpose()).amax() };
    let mut cyclic: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let term = |a: usize, b: usize, c: usize| -> f64 {
                    (0..d).map(|m| action.algebra.constant(m, a, b) * mean[(m, c)]).sum()
                };
                cyclic = cyclic.max((term(i, j, k) + term(j, k, i) + term(k, i, j)).abs());
            }
        }
    }
    Ok(CocycleReport {
        mean,
        max_deviation,
        antisymmetry,
        cyclic_residual: cyclic,
    })
}

/// Subspace identities along a level set at a regular point.
#[derive(Clone, Debug)]
pub struct TangencyReport {
    pub kernel_dim: usize,
    /// Largest principal angle between `ker DJ` and `(T Gx)^{perp omega}`.
    pub angle_level_orthogonal: f64,
    /// Largest principal angle between `(ker DJ)^{perp omega}` and
    /// `T Gx + <R>`.
    pub angle_orthogonal_orbit: f64,
    pub passed: bool,
}

pub fn tangency_check(action: &SymmetryAction, mu: &[f64], point: &[f64]) -> Result<TangencyReport> {
    let chart = action.chart();
    chart.check_point(point)?;
    check_dim(action.dim(), mu.len())?;
    let jval = action.momentum(point)?;
    let off = jval.iter().zip(mu).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if off > 1e-10 {
        return Err(Error::InvalidInput(format!("point is off the level set by {off:e}")));
    }
    let dj = action.momentum_jacobian(point)?;
    let rank = linalg::rank(&dj, None);
    if rank < action.dim() {
        return Err(Error::NotRegular {
            rank,
            expected: action.dim(),
        });
    }
    let w = omega_matrix(chart);
    let kernel = null_space(&dj, None);
    let xi = action.fundamental_matrix(point)?;
    // (T Gx)^{perp omega} = { v : omega(xi_M, v) = 0 }
    let orth_orbit = null_space(&(xi.transpose() * &w), None);
    // (ker DJ)^{perp omega} = { v : omega(u, v) = 0 for u in ker DJ }
    let orth_level = null_space(&(kernel.transpose() * &w), None);
    let mut orbit_r = DMatrix::zeros(chart.dim(), action.dim() + 1);
    orbit_r.view_mut((0, 0), (chart.dim(), action.dim())).copy_from(&xi);
    orbit_r[(0, action.dim())] = 1.0;
    let orbit_r = orthonormal_span(&orbit_r, None);

    let a2 = max_principal_angle(&kernel, &orth_orbit);
    let a3 = max_principal_angle(&orth_level, &orbit_r);
    Ok(TangencyReport {
        kernel_dim: kernel.ncols(),
        angle_level_orthogonal: a2,
        angle_orthogonal_orbit: a3,
        passed: a2 <= 1e-9 && a3 <= 1e-9,
    })
}

/// A user-supplied parametrisation of a momentum level set and its quotient.
///
/// Three coordinate systems are involved, each with time first:
/// *level* coordinates `u` on `J^{-1}(mu)`, *reduced* coordinates `y` on the
/// quotient, and ambient Darboux coordinates `x`.
pub trait ReductionChart: Send + Sync {
    fn mu(&self) -> &[f64];

    fn ambient_chart(&self) -> &DarbouxChart;

    /// Labels of the reduced coordinates (time first); the length is the
    /// reduced dimension.
    fn reduced_chart(&self) -> &DarbouxChart;

    fn level_dim(&self) -> usize;

    /// `sigma: u -> x` on jets.
    fn embed(&self, u: &[Jet2]) -> Vec<Jet2>;

    /// `pi: u -> y` on jets.
    fn project(&self, u: &[Jet2]) -> Vec<Jet2>;

    /// A section `y -> u` of `pi`.
    fn section(&self, y: &[Jet2]) -> Vec<Jet2>;

    /// Another level point in the same fiber of `pi`.
    fn shift_along_fiber(&self, u: &[f64], amount: f64) -> Vec<f64>;

    /// Reduced two-form as a matrix in `y` coordinates.
    fn reduced_omega(&self, y: &[f64]) -> DMatrix<f64>;

    /// Reduced one-form in `y` coordinates.
    fn reduced_eta(&self, y: &[f64]) -> DVector<f64>;

    /// `Some(reason)` if `u` lies on a declared degeneracy locus.
    fn degeneracy(&self, u: &[f64]) -> Option<String>;

    /// Reduced coordinates of an ambient point on the level set.
    fn reduced_coordinates(&self, x: &[f64]) -> Result<Vec<f64>>;
}

fn jacobian_of(f: impl Fn(&[Jet2]) -> Vec<Jet2>, at: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let out = f(&Jet2::variables(at));
    let m = DMatrix::from_fn(out.len(), at.len(), |r, c| out[r].grad[c]);
    (out.iter().map(|j| j.value).collect(), m)
}

#[derive(Clone, Debug)]
pub struct ReductionReport {
    pub samples: usize,
    /// `max |sigma* omega - pi* omega_mu|` (entrywise).
    pub omega_residual: f64,
    /// `max |sigma* eta - pi* eta_mu|`.
    pub eta_residual: f64,
    /// `max |J(sigma(u)) - mu|`.
    pub level_residual: f64,
    pub passed: bool,
}

pub fn verify_reduction(
    chart: &dyn ReductionChart,
    action: &SymmetryAction,
    sample_level_points: &[Vec<f64>],
    tol: f64,
) -> Result<ReductionReport> {
    let amb = chart.ambient_chart();
    let w = omega_matrix(amb);
    let mut rep = ReductionReport {
        samples: sample_level_points.len(),
        omega_residual: 0.0,
        eta_residual: 0.0,
        level_residual: 0.0,
        passed: false,
    };
    for u in sample_level_points {
        check_dim(chart.level_dim(), u.len())?;
        if let Some(why) = chart.degeneracy(u) {
            return Err(Error::ChartDegeneracy(why));
        }
        let (x, ds) = jacobian_of(|v| chart.embed(v), u);
        let (y, dp) = jacobian_of(|v| chart.project(v), u);
        let pulled = ds.transpose() * &w * &ds;
        let reduced = dp.transpose() * chart.reduced_omega(&y) * &dp;
        rep.omega_residual = rep.omega_residual.max((pulled - reduced).amax());
        let eta_pull = ds.row(0).transpose();
        let eta_red = dp.transpose() * chart.reduced_eta(&y);
        rep.eta_residual = rep.eta_residual.max((eta_pull - eta_red).amax());
        let jm = action.momentum(&x)?;
        let off = jm.iter().zip(chart.mu()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        rep.level_residual = rep.level_residual.max(off);
    }
    rep.passed = rep.omega_residual <= tol && rep.eta_residual <= tol && rep.level_residual <= tol;
    Ok(rep)
}

/// `k(y) = h(sigma(section(y)))` as a field on the reduced coordinates.
pub struct ReducedHamiltonian {
    chart: Arc<dyn ReductionChart>,
    h: Field,
    name: String,
}

impl ScalarField for ReducedHamiltonian {
    fn chart(&self) -> &DarbouxChart {
        self.chart.reduced_chart()
    }
    fn name(&self) -> &str {
        &self.name
    }
    fn eval_jet(&self, y: &[Jet2]) -> Result<Jet2> {
        check_dim(self.chart.reduced_chart().dim(), y.len())?;
        let x = self.chart.embed(&self.chart.section(y));
        self.h.eval_jet(&x)
    }
}

/// Builds `k_mu` after checking at each reduced sample that `h` takes the same
/// value at two distinct preimages (tolerance `1e-10`).
pub fn reduced_hamiltonian(
    chart: Arc<dyn ReductionChart>,
    h: Field,
    reduced_samples: &[Vec<f64>],
) -> Result<ReducedHamiltonian> {
    const TOL: f64 = 1e-10;
    for y in reduced_samples {
        let u = chart.section(&Jet2::variables(y));
        let u: Vec<f64> = u.iter().map(|j| j.value).collect();
        let v = chart.shift_along_fiber(&u, 0.7318);
        let at = |w: &[f64]| -> Result<f64> {
            let x: Vec<f64> = chart
                .embed(&w.iter().map(|&a| Jet2::constant(0, a)).collect::<Vec<_>>())
                .iter()
                .map(|j| j.value)
                .collect();
            h.value(&x)
        };
        let gap = (at(&u)? - at(&v)?).abs();
        if gap > TOL {
            return Err(Error::NotCertified { residual: gap, tol: TOL });
        }
    }
    let name = format!("k[{}]", h.name());
    Ok(ReducedHamiltonian { chart, h, name })
}

/// Evolution field of `k` for the reduced cosymplectic structure
/// `(omega_mu, eta_mu)`: solves `iota_X omega_mu = dk - (R k) eta_mu`,
/// `eta_mu(X) = 1`.
pub fn reduced_evolution_field(chart: &dyn ReductionChart, k: &dyn ScalarField, y: &[f64]) -> Result<DVector<f64>> {
    let m = y.len();
    let om = chart.reduced_omega(y);
    let eta = chart.reduced_eta(y);
    let dk = DVector::from_vec(k.jet(y)?.grad);
    let mut a = DMatrix::zeros(m + 1, m);
    // Reeb field: omega(R, .) = 0, eta(R) = 1
    a.view_mut((0, 0), (m, m)).copy_from(&om.transpose());
    a.set_row(m, &eta.transpose());
    let mut rb = DVector::zeros(m + 1);
    rb[m] = 1.0;
    let reeb = linalg::lstsq(&a, &rb);
    if (&a * &reeb - &rb).amax() > 1e-9 {
        return Err(Error::ChartDegeneracy(format!("reduced structure degenerate at {y:?}")));
    }
    let rk = dk.dot(&reeb);
    let mut b = DVector::zeros(m + 1);
    b.rows_mut(0, m).copy_from(&(&dk - &eta * rk));
    b[m] = 1.0;
    let x = linalg::lstsq(&a, &b);
    let resid = (&a * &x - &b).amax();
    if resid > 1e-8 * (1.0 + dk.amax()) || linalg::rank(&om, None) + 1 < m {
        return Err(Error::ChartDegeneracy(format!("reduced structure degenerate at {y:?}")));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn su2_is_a_lie_algebra() {
        let a = LieAlgebraSpec::su2();
        assert_eq!(a.jacobi_residual(), 0.0);
        assert_eq!(a.bracket(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]), vec![0.0, 0.0, 1.0]);
        assert!(LieAlgebraSpec::new(3, a.c.clone()).is_ok());
    }

    #[test]
    fn non_antisymmetric_constants_rejected() {
        let mut c = vec![0.0; 8];
        c[1] = 1.0; // c^0_{01} without c^0_{10} = -1
        assert!(LieAlgebraSpec::new(2, c).is_err());
    }
}
