//! Relative equilibrium points: Lagrange-multiplier Newton search,
//! certification on a time grid, second variations and gauge directions.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::field::ScalarField;
use crate::geometry::hamiltonian_field;
use crate::linalg::{self, lstsq, null_space};
use crate::symmetry::SymmetryAction;

/// `m` Chebyshev–Lobatto points on `[a, b]`, ascending, endpoints included.
pub fn chebyshev_grid(a: f64, b: f64, m: usize) -> Vec<f64> {
    match m {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let mut g: Vec<f64> = (0..m)
                .map(|k| {
                    let c = (std::f64::consts::PI * k as f64 / (m - 1) as f64).cos();
                    0.5 * (a + b) - 0.5 * (b - a) * c
                })
                .collect();
            g[0] = a;
            g[m - 1] = b;
            g
        }
    }
}

/// A relative equilibrium certified on a finite time grid.
#[derive(Clone, Debug)]
pub struct RepCandidate {
    /// Spatial part `(q, p)`.
    pub z_e: Vec<f64>,
    pub times: Vec<f64>,
    /// `xi(t_k)` recovered by least squares.
    pub xi: Vec<Vec<f64>>,
    /// `|X_h - xi(t_k)_M|` at `(t_k, z_e)`.
    pub residuals: Vec<f64>,
    pub tol: f64,
    pub newton_iterations: usize,
}

impl RepCandidate {
    pub fn point(&self, t: f64) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.z_e.len() + 1);
        x.push(t);
        x.extend_from_slice(&self.z_e);
        x
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(*r))
    }

    /// Structured text export, 17 significant digits.
    pub fn to_text(&self) -> String {
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(", ");
        let mut s = String::new();
        let _ = writeln!(s, "z_e = [{}]", fmt(&self.z_e));
        let _ = writeln!(s, "tol = {:.16e}", self.tol);
        let _ = writeln!(s, "grid_points = {}", self.times.len());
        let _ = writeln!(s, "newton_iterations = {}", self.newton_iterations);
        for ((t, xi), r) in self.times.iter().zip(&self.xi).zip(&self.residuals) {
            let _ = writeln!(s, "t = {t:.16e}; xi = [{}]; residual = {r:.16e}", fmt(xi));
        }
        s
    }
}

fn spatial(v: &DVector<f64>) -> DVector<f64> {
    v.rows(1, v.len() - 1).into_owned()
}

/// Least-squares multipliers `xi` with `xi_M ~ X_h` at `x`, and the residual.
pub fn multipliers(h: &dyn ScalarField, action: &SymmetryAction, x: &[f64]) -> Result<(Vec<f64>, f64)> {
    let xh = hamiltonian_field(h, x)?.components;
    if action.dim() == 0 {
        return Ok((Vec::new(), xh.norm()));
    }
    let xm = action.fundamental_matrix(x)?;
    let xi = lstsq(&xm, &xh);
    let r = (&xh - &xm * &xi).norm();
    Ok((xi.iter().copied().collect(), r))
}

/// `max_k |X_h - sum xi^i(t_k) X_{J_i}|` at `(t_k, z)`.
pub fn rep_residual(
    h: &dyn ScalarField,
    action: &SymmetryAction,
    z: &[f64],
    xi_of_t: &dyn Fn(f64) -> Vec<f64>,
    times: &[f64],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &t in times {
        let mut x = vec![t];
        x.extend_from_slice(z);
        let xh = hamiltonian_field(h, &x)?.components;
        let xm = action.fundamental_field(&xi_of_t(t), &x)?.components;
        worst = worst.max((xh - xm).norm());
    }
    Ok(worst)
}

struct Kkt<'a> {
    h: &'a dyn ScalarField,
    action: &'a SymmetryAction,
    t0: f64,
    /// Momentum level of the initial guess, pinned by `d` extra rows.
    level: Vec<f64>,
}

impl Kkt<'_> {
    fn point(&self, z: &[f64]) -> Vec<f64> {
        let mut x = vec![self.t0];
        x.extend_from_slice(z);
        x
    }

    fn residual(&self, w: &DVector<f64>) -> Result<DVector<f64>> {
        let m = w.len() - self.action.dim();
        let (z, xi) = (w.rows(0, m), w.rows(m, self.action.dim()));
        let x = self.point(z.as_slice());
        let mut g = spatial(&DVector::from_vec(self.h.jet(&x)?.grad));
        for (i, c) in self.action.components.iter().enumerate() {
            g -= spatial(&DVector::from_vec(c.jet(&x)?.grad)) * xi[i];
        }
        let (xls, _) = multipliers(self.h, self.action, &x)?;
        let d = self.action.dim();
        let jv = self.action.momentum(&x)?;
        let mut f = DVector::zeros(m + 2 * d);
        f.rows_mut(0, m).copy_from(&g);
        for i in 0..d {
            f[m + i] = xi[i] - xls[i];
            f[m + d + i] = jv[i] - self.level[i];
        }
        Ok(f)
    }

    fn jacobian(&self, w: &DVector<f64>) -> Result<DMatrix<f64>> {
        let d = self.action.dim();
        let m = w.len() - d;
        let z = w.rows(0, m);
        let xi = w.rows(m, d);
        let x = self.point(z.as_slice());
        let mut jac = DMatrix::zeros(m + 2 * d, m + d);
        let hj = self.h.jet(&x)?;
        let mut hess = hj.hessian().view((1, 1), (m, m)).into_owned();
        for (i, c) in self.action.components.iter().enumerate() {
            let cj = c.jet(&x)?;
            hess -= cj.hessian().view((1, 1), (m, m)) * xi[i];
            let dj = spatial(&DVector::from_vec(cj.grad));
            jac.view_mut((0, m + i), (m, 1)).copy_from(&(-&dj));
            jac.view_mut((m + d + i, 0), (1, m)).copy_from(&dj.transpose());
        }
        jac.view_mut((0, 0), (m, m)).copy_from(&hess);
        // d xi_ls / dz by central differences
        let step = 1e-6;
        for j in 0..m {
            let mut zp = z.clone_owned();
            let mut zm = z.clone_owned();
            zp[j] += step;
            zm[j] -= step;
            let (a, _) = multipliers(self.h, self.action, &self.point(zp.as_slice()))?;
            let (b, _) = multipliers(self.h, self.action, &self.point(zm.as_slice()))?;
            for i in 0..d {
                jac[(m + i, j)] = -(a[i] - b[i]) / (2.0 * step);
            }
        }
        for i in 0..d {
            jac[(m + i, m + i)] = 1.0;
        }
        Ok(jac)
    }
}

/// Searches for a relative equilibrium near `z0` and certifies it on `times`.
///
/// At `times[0]`, Newton solves `grad_z (h - xi^i J_i) = 0` jointly with the
/// gauge-fixing rows `xi = xi_ls(z)` and the level rows `J(z) = J(z0)`,
/// using pseudo-inverse steps damped by halving. Pinning the level matters
/// for homogeneous problems (quadratic `h`, linear action): there the first
/// block scales with `|z|` and unconstrained steps drift into the origin. At each grid time `xi(t)` is then recovered by least squares and
/// the candidate is accepted iff every residual `|X_h - xi_M| <= tol`.
pub fn find_rep(
    h: &dyn ScalarField,
    action: &SymmetryAction,
    z0: &[f64],
    times: &[f64],
    tol: f64,
) -> Result<RepCandidate> {
    let chart = h.chart();
    check_dim(chart.dim() - 1, z0.len())?;
    if times.is_empty() {
        return Err(Error::InvalidInput("empty time grid".into()));
    }
    let d = action.dim();
    let m = z0.len();
    let mut x0 = vec![times[0]];
    x0.extend_from_slice(z0);
    let kkt = Kkt {
        h,
        action,
        t0: times[0],
        level: action.momentum(&x0)?,
    };
    let (xi0, _) = multipliers(h, action, &kkt.point(z0))?;
    let mut w = DVector::zeros(m + d);
    w.rows_mut(0, m).copy_from_slice(z0);
    w.rows_mut(m, d).copy_from_slice(&xi0);

    let target = (tol * 1e-2).min(1e-13);
    let mut f = kkt.residual(&w)?;
    let mut fnorm = f.norm();
    let mut iterations = 0;
    while fnorm > target {
        if iterations == 50 {
            return Err(Error::NewtonDiverged { iterations, residual: fnorm });
        }
        iterations += 1;
        let jac = kkt.jacobian(&w)?;
        let step = lstsq(&jac, &(-&f));
        let mut alpha = 1.0;
        let mut improved = None;
        for _ in 0..=30 {
            let trial = &w + &step * alpha;
            if let Ok(ft) = kkt.residual(&trial) {
                if ft.norm() < fnorm {
                    improved = Some((trial, ft));
                    break;
                }
            }
            alpha *= 0.5;
        }
        match improved {
            Some((wn, fnew)) => {
                w = wn;
                f = fnew;
                fnorm = f.norm();
            }
            None if fnorm <= tol => break, // stagnated at round-off level
            None => {
                let rank = linalg::rank(&jac, None);
                if rank < jac.ncols() {
                    return Err(Error::SingularJacobian { rank, size: jac.ncols() });
                }
                return Err(Error::NewtonDiverged { iterations, residual: fnorm });
            }
        }
    }

    let z_e: Vec<f64> = w.rows(0, m).iter().copied().collect();
    let mut xi = Vec::with_capacity(times.len());
    let mut residuals = Vec::with_capacity(times.len());
    for &t in times {
        let mut x = vec![t];
        x.extend_from_slice(&z_e);
        let (xk, r) = multipliers(h, action, &x)?;
        xi.push(xk);
        residuals.push(r);
    }
    let cand = RepCandidate {
        z_e,
        times: times.to_vec(),
        xi,
        residuals,
        tol,
        newton_iterations: iterations,
    };
    let worst = cand.max_residual();
    if !(worst <= tol) {
        return Err(Error::NotCertified { residual: worst, tol });
    }
    Ok(cand)
}

/// Spatial Hessian of `h_xi(t) = h - xi^i(t) (J_i - J_i(t, z_e))` at `(t, z_e)`.
#[derive(Clone, Debug)]
pub struct SecondVariation {
    pub t: f64,
    pub xi: Vec<f64>,
    pub matrix: DMatrix<f64>,
}

impl SecondVariation {
    /// `delta^2 h_xi (u, v)`.
    pub fn pairing(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        (u.transpose() * &self.matrix * v)[(0, 0)]
    }
}

pub fn second_variation(
    h: &dyn ScalarField,
    action: &SymmetryAction,
    candidate: &RepCandidate,
    t: f64,
) -> Result<SecondVariation> {
    let x = candidate.point(t);
    let (xi, _) = multipliers(h, action, &x)?;
    let m = candidate.z_e.len();
    let mut hess = h.jet(&x)?.hessian().view((1, 1), (m, m)).into_owned();
    for (c, a) in action.components.iter().zip(&xi) {
        hess -= c.jet(&x)?.hessian().view((1, 1), (m, m)) * *a;
    }
    let matrix = (&hess + hess.transpose()) * 0.5;
    Ok(SecondVariation { t, xi, matrix })
}

/// Spatial basis of `ker DJ` (which lies in `ker eta` after dropping `t`).
pub fn level_tangent_basis(action: &SymmetryAction, x: &[f64]) -> Result<DMatrix<f64>> {
    let dj = action.momentum_jacobian(x)?;
    let m = x.len() - 1;
    let djs = dj.view((0, 1), (action.dim(), m)).into_owned();
    let rank = linalg::rank(&djs, None);
    if rank < action.dim() {
        return Err(Error::NotRegular { rank, expected: action.dim() });
    }
    Ok(null_space(&djs, None))
}

/// Spatial parts of the basis fundamental fields as columns.
pub fn gauge_directions(action: &SymmetryAction, x: &[f64]) -> Result<DMatrix<f64>> {
    let f = action.fundamental_matrix(x)?;
    Ok(f.view((1, 0), (x.len() - 1, action.dim())).into_owned())
}

#[derive(Clone, Debug)]
pub struct GaugeReport {
    pub t: f64,
    pub max_pairing: f64,
    pub pairings: usize,
    pub passed: bool,
}

/// Checks that every gauge direction `zeta_M` lies in the kernel of the second
/// variation restricted to `ker DJ`.
pub fn gauge_kernel_check(
    h: &dyn ScalarField,
    action: &SymmetryAction,
    candidate: &RepCandidate,
    mu: &[f64],
    t: f64,
) -> Result<GaugeReport> {
    check_dim(action.dim(), mu.len())?;
    if action.dim() == 0 {
        return Ok(GaugeReport { t, max_pairing: 0.0, pairings: 0, passed: true });
    }
    let x = candidate.point(t);
    let jv = action.momentum(&x)?;
    let off = jv.iter().zip(mu).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if off > 1e-10 {
        return Err(Error::InvalidInput(format!("candidate is off the level mu by {off:e}")));
    }
    let sv = second_variation(h, action, candidate, t)?;
    let k = level_tangent_basis(action, &x)?;
    let g = gauge_directions(action, &x)?;
    let pair = g.transpose() * &sv.matrix * &k;
    let max_pairing = if pair.is_empty() { 0.0 } else { pair.amax() };
    Ok(GaugeReport {
        t,
        max_pairing,
        pairings: pair.len(),
        passed: max_pairing <= 1e-8,
    })
}
