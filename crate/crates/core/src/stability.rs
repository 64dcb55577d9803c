//! Energy-momentum stability classification on a slice transverse to the
//! gauge directions, plus empirical Lyapunov-function utilities.
//!
//! All verdicts are sufficient-condition certificates over a finite grid and
//! a sampled ball; nothing here ever claims instability.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::equilibria::{gauge_directions, level_tangent_basis, multipliers, RepCandidate};
use crate::error::{check_dim, Error, Result};
use crate::field::ScalarField;
use crate::linalg::{eigen_range, orthonormal_span, project_out};
use crate::symmetry::SymmetryAction;

/// Default seed for all sampling.
pub const DEFAULT_SEED: u64 = 0x5EED;

/// Orthonormal basis of a complement of the gauge directions inside
/// `ker DJ ∩ ker eta` at `(t, z_e)`, in spatial coordinates.
#[derive(Clone, Debug)]
pub struct SliceBasis {
    pub t: f64,
    pub z_e: Vec<f64>,
    /// Columns span the slice.
    pub basis: DMatrix<f64>,
}

impl SliceBasis {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// The same slice expressed in another (not necessarily orthonormal)
    /// basis `S A`.
    pub fn transformed(&self, a: &DMatrix<f64>) -> SliceBasis {
        SliceBasis {
            t: self.t,
            z_e: self.z_e.clone(),
            basis: &self.basis * a,
        }
    }
}

fn check_level(action: &SymmetryAction, x: &[f64], mu: &[f64]) -> Result<()> {
    check_dim(action.dim(), mu.len())?;
    let j = action.momentum(x)?;
    let off = j.iter().zip(mu).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if off > 1e-10 {
        return Err(Error::InvalidInput(format!("candidate is off the level mu by {off:e}")));
    }
    Ok(())
}

pub fn build_slice(action: &SymmetryAction, candidate: &RepCandidate, mu: &[f64], t: f64) -> Result<SliceBasis> {
    let x = candidate.point(t);
    let m = candidate.z_e.len();
    let basis = if action.dim() == 0 {
        DMatrix::identity(m, m)
    } else {
        check_level(action, &x, mu)?;
        let k = level_tangent_basis(action, &x)?;
        let g = orthonormal_span(&gauge_directions(action, &x)?, None);
        let mut proj = DMatrix::zeros(m, k.ncols());
        for c in 0..k.ncols() {
            proj.set_column(c, &project_out(&g, &k.column(c).into_owned()));
        }
        orthonormal_span(&proj, Some(1e-8))
    };
    Ok(SliceBasis {
        t,
        z_e: candidate.z_e.clone(),
        basis,
    })
}

/// Spatial Hessian of `h - xi^i J_i` at `x` with multipliers `xi`.
fn hessian_h_xi(h: &dyn ScalarField, action: &SymmetryAction, xi: &[f64], x: &[f64]) -> Result<DMatrix<f64>> {
    let m = x.len() - 1;
    let mut hess = h.jet(x)?.hessian().view((1, 1), (m, m)).into_owned();
    for (c, a) in action.components.iter().zip(xi) {
        hess -= c.jet(x)?.hessian().view((1, 1), (m, m)) * *a;
    }
    Ok((&hess + hess.transpose()) * 0.5)
}

/// `1/2 S^T Hess(h_xi(t)) S`.
pub fn reduced_hessian(
    h: &dyn ScalarField,
    action: &SymmetryAction,
    candidate: &RepCandidate,
    slice: &SliceBasis,
    t: f64,
) -> Result<DMatrix<f64>> {
    let x = candidate.point(t);
    let (xi, _) = multipliers(h, action, &x)?;
    let hess = hessian_h_xi(h, action, &xi, &x)?;
    let m = slice.basis.transpose() * hess * &slice.basis * 0.5;
    Ok((&m + m.transpose()) * 0.5)
}

#[derive(Clone, Debug)]
pub struct ScanOptions {
    pub samples: usize,
    pub fd_step: f64,
    pub seed: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            samples: 200,
            fd_step: 1e-3,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpectralScan {
    pub times: Vec<f64>,
    pub lambda_min: Vec<f64>,
    pub lambda_max: Vec<f64>,
    pub inf_lambda_min: f64,
    pub sup_lambda_max: f64,
    /// Sampled estimate of `(1/3!) max_{1<=|a|<=3} |D^a H|` over the ball.
    pub c: f64,
    /// Same estimate with twice the samples.
    pub c_refined: f64,
    /// Largest sampled `dH/dt` (multipliers frozen).
    pub dhdt_max: f64,
    /// Largest sampled `|dH/dt|`.
    pub dhdt_abs_max: f64,
    pub slice_dim: usize,
    pub radius: f64,
    pub samples: usize,
    pub seed: u64,
}

impl SpectralScan {
    /// CSV `t,lambda_min,lambda_max`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,lambda_min,lambda_max\n");
        for ((t, a), b) in self.times.iter().zip(&self.lambda_min).zip(&self.lambda_max) {
            let _ = writeln!(s, "{t:.16e},{a:.16e},{b:.16e}");
        }
        s
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

const PRIMES: [u64; 20] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71];

/// Quasi-random (Halton) points in the closed ball of radius `r` in `R^k`,
/// with the centre first. The seed offsets the sequence start.
pub fn ball_samples(k: usize, r: f64, count: usize, seed: u64) -> Vec<DVector<f64>> {
    assert!(k <= PRIMES.len(), "slice dimension too large for Halton sampling");
    let mut out = vec![DVector::zeros(k)];
    if k == 0 {
        return out;
    }
    let mut i = 1 + seed % 4096;
    while out.len() < count {
        let v = DVector::from_fn(k, |d, _| 2.0 * radical_inverse(i, PRIMES[d]) - 1.0);
        i += 1;
        if v.norm() <= 1.0 {
            out.push(v * r);
        }
    }
    out
}

struct SliceProbe<'a> {
    h: &'a dyn ScalarField,
    action: &'a SymmetryAction,
    xi: Vec<f64>,
    t: f64,
    z_e: &'a [f64],
    s: &'a DMatrix<f64>,
}

impl SliceProbe<'_> {
    fn point(&self, y: &DVector<f64>) -> Vec<f64> {
        let z = DVector::from_column_slice(self.z_e) + self.s * y;
        let mut x = vec![self.t];
        x.extend(z.iter());
        x
    }

    /// (gradient, Hessian, dt) of `H` in slice coordinates.
    fn derivatives(&self, y: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>, f64)> {
        let x = self.point(y);
        let m = x.len() - 1;
        let hj = self.h.jet(&x)?;
        let mut g = DVector::from_column_slice(&hj.grad[1..]);
        let mut dt = hj.grad[0];
        for (c, a) in self.action.components.iter().zip(&self.xi) {
            let cj = c.jet(&x)?;
            g -= DVector::from_column_slice(&cj.grad[1..]) * *a;
            dt -= cj.grad[0] * a;
        }
        let hess = hessian_h_xi(self.h, self.action, &self.xi, &x)?;
        debug_assert_eq!(hess.nrows(), m);
        Ok((self.s.transpose() * g, self.s.transpose() * hess * self.s, dt))
    }
}

fn derivative_bound(probe: &SliceProbe<'_>, pts: &[DVector<f64>], fd: f64) -> Result<(f64, f64, f64)> {
    let (_, _, dt0) = probe.derivatives(&DVector::zeros(probe.s.ncols()))?;
    let k = probe.s.ncols();
    let mut worst: f64 = 0.0;
    let mut dt_max = f64::NEG_INFINITY;
    let mut dt_abs: f64 = 0.0;
    for y in pts {
        let (g, hs, dt) = probe.derivatives(y)?;
        worst = worst.max(g.amax()).max(hs.amax());
        for i in 0..k {
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[i] += fd;
            ym[i] -= fd;
            let (_, hp, _) = probe.derivatives(&yp)?;
            let (_, hm, _) = probe.derivatives(&ym)?;
            worst = worst.max(((hp - hm) / (2.0 * fd)).amax());
        }
        let d = dt - dt0;
        dt_max = dt_max.max(d);
        dt_abs = dt_abs.max(d.abs());
    }
    Ok((worst / 6.0, dt_max, dt_abs))
}

/// Eigenvalue bounds of the reduced Hessian over `time_grid`, plus the
/// sampled derivative constant `c` and the sign of `dH/dt` on the ball of
/// radius `radius` in slice coordinates.
pub fn spectral_scan(
    h: &dyn ScalarField,
    action: &SymmetryAction,
    candidate: &RepCandidate,
    mu: &[f64],
    time_grid: &[f64],
    radius: f64,
    opts: &ScanOptions,
) -> Result<SpectralScan> {
    if time_grid.is_empty() {
        return Err(Error::InvalidInput("empty time grid".into()));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidInput("neighbourhood radius must be > 0".into()));
    }
    let mut scan = SpectralScan {
        times: time_grid.to_vec(),
        lambda_min: Vec::new(),
        lambda_max: Vec::new(),
        inf_lambda_min: f64::INFINITY,
        sup_lambda_max: f64::NEG_INFINITY,
        c: 0.0,
        c_refined: 0.0,
        dhdt_max: f64::NEG_INFINITY,
        dhdt_abs_max: 0.0,
        slice_dim: 0,
        radius,
        samples: opts.samples,
        seed: opts.seed,
    };
    for &t in time_grid {
        let slice = build_slice(action, candidate, mu, t)?;
        scan.slice_dim = slice.dim();
        let m = reduced_hessian(h, action, candidate, &slice, t)?;
        let (lo, hi) = eigen_range(&m);
        scan.lambda_min.push(lo);
        scan.lambda_max.push(hi);
        scan.inf_lambda_min = scan.inf_lambda_min.min(lo);
        scan.sup_lambda_max = scan.sup_lambda_max.max(hi);

        let (xi, _) = multipliers(h, action, &candidate.point(t))?;
        let probe = SliceProbe {
            h,
            action,
            xi,
            t,
            z_e: &candidate.z_e,
            s: &slice.basis,
        };
        let coarse = ball_samples(slice.dim(), radius, opts.samples, opts.seed);
        let fine = ball_samples(slice.dim(), radius, 2 * opts.samples, opts.seed);
        let (c1, dmax, dabs) = derivative_bound(&probe, &coarse, opts.fd_step)?;
        let (c2, dmax2, dabs2) = derivative_bound(&probe, &fine, opts.fd_step)?;
        scan.c = scan.c.max(c1);
        scan.c_refined = scan.c_refined.max(c2);
        scan.dhdt_max = scan.dhdt_max.max(dmax).max(dmax2);
        scan.dhdt_abs_max = scan.dhdt_abs_max.max(dabs).max(dabs2);
    }
    Ok(scan)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerdictKind {
    StableFromT0,
    UniformlyStableFromT0,
    Indeterminate,
}

impl std::fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VerdictKind::StableFromT0 => "stable_from_t0",
            VerdictKind::UniformlyStableFromT0 => "uniformly_stable_from_t0",
            VerdictKind::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Clone, Debug)]
pub struct StabilityVerdict {
    pub kind: VerdictKind,
    pub t0: f64,
    /// `lambda` with `0 < lambda < inf lambda_min` (half the infimum).
    pub lambda: Option<f64>,
    /// `Lambda > sup lambda_max` (twice the supremum).
    pub big_lambda: Option<f64>,
    pub c: f64,
    /// The derived bound `6 c n^2` on `max spec M(t)`.
    pub derived_bound: f64,
    /// Human-readable record of every condition checked.
    pub notes: Vec<String>,
}

impl StabilityVerdict {
    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("none".to_string(), |x| format!("{x:.16e}"));
        let mut s = String::new();
        let _ = writeln!(s, "verdict = {}", self.kind);
        let _ = writeln!(s, "t0 = {:.16e}", self.t0);
        let _ = writeln!(s, "lambda = {}", opt(self.lambda));
        let _ = writeln!(s, "Lambda = {}", opt(self.big_lambda));
        let _ = writeln!(s, "c_estimate = {:.16e}", self.c);
        let _ = writeln!(s, "bound_6cn2 = {:.16e}", self.derived_bound);
        for n in &self.notes {
            let _ = writeln!(s, "note = {n}");
        }
        s
    }
}

/// Tolerance for treating a sampled time derivative as non-positive / zero.
pub const DHDT_TOL: f64 = 1e-12;

/// Classifies a scan.
///
/// * `stable_from_t0`: `inf lambda_min > 0`, `c` finite and stable under 2x
///   sample refinement (within 20%), and `dH/dt <= 0` at every sample.
/// * `uniformly_stable_from_t0`: additionally the sampled energy is
///   autonomous (`|dH/dt| <= 1e-12`), so the grid supremum of `lambda_max`
///   is a bound for all later times, and it respects `6 c n^2`.
/// * `indeterminate` otherwise.
pub fn classify(scan: &SpectralScan) -> StabilityVerdict {
    let n = scan.slice_dim as f64;
    let t0 = scan.times.first().copied().unwrap_or(f64::NAN);
    let mut notes = Vec::new();
    let bound = 6.0 * scan.c * n * n;

    let positive = scan.inf_lambda_min > 0.0 && scan.inf_lambda_min.is_finite();
    notes.push(format!("inf lambda_min = {:.6e} ({})", scan.inf_lambda_min, if positive { "positive" } else { "not positive" }));
    let c_ok = scan.c.is_finite()
        && scan.c_refined.is_finite()
        && (scan.c_refined - scan.c).abs() <= 0.2 * scan.c.abs().max(scan.c_refined.abs()).max(f64::MIN_POSITIVE);
    notes.push(format!(
        "c = {:.6e}, refined = {:.6e} ({})",
        scan.c,
        scan.c_refined,
        if c_ok { "stable estimate" } else { "unstable estimate" }
    ));
    let dec = scan.dhdt_max <= DHDT_TOL;
    notes.push(format!("max dH/dt = {:.6e} ({})", scan.dhdt_max, if dec { "non-increasing" } else { "increasing somewhere" }));
    notes.push(format!("sampled ball radius = {}, samples = {}, seed = {}", scan.radius, scan.samples, scan.seed));

    if !(positive && c_ok && dec) {
        return StabilityVerdict {
            kind: VerdictKind::Indeterminate,
            t0,
            lambda: positive.then(|| 0.5 * scan.inf_lambda_min),
            big_lambda: None,
            c: scan.c,
            derived_bound: bound,
            notes,
        };
    }
    let lambda = Some(0.5 * scan.inf_lambda_min);
    let autonomous = scan.dhdt_abs_max <= DHDT_TOL;
    let sup_ok = scan.sup_lambda_max.is_finite() && scan.sup_lambda_max <= bound * (1.0 + 1e-9);
    notes.push(format!(
        "sup lambda_max = {:.6e}, 6cn^2 = {:.6e}, autonomous = {autonomous}",
        scan.sup_lambda_max, bound
    ));
    let kind = if autonomous && sup_ok {
        VerdictKind::UniformlyStableFromT0
    } else {
        VerdictKind::StableFromT0
    };
    StabilityVerdict {
        kind,
        t0,
        lambda,
        big_lambda: (kind == VerdictKind::UniformlyStableFromT0).then(|| 2.0 * scan.sup_lambda_max),
        c: scan.c,
        derived_bound: bound,
        notes,
    }
}

/// `dM/dt + sum_{i>=1} dM/dx^i X^i` at `point`; `x` returns a full chart
/// vector whose t-slot is ignored.
pub fn mdot(m: &dyn ScalarField, x: &dyn Fn(&[f64]) -> Result<DVector<f64>>, point: &[f64]) -> Result<f64> {
    let j = m.jet(point)?;
    let v = x(point)?;
    check_dim(point.len(), v.len())?;
    Ok(j.grad[0] + (1..point.len()).map(|i| j.grad[i] * v[i]).sum::<f64>())
}

#[derive(Clone, Debug)]
pub struct LpdfReport {
    pub radii: Vec<f64>,
    /// `inf_{t, |x - x_e| = r} M` per radius.
    pub alpha_envelope: Vec<f64>,
    /// `sup_{t, |x - x_e| = r} M` per radius.
    pub beta_envelope: Vec<f64>,
    /// `max_t |M(t, x_e)|`.
    pub centre_value: f64,
    pub lpdf_witness: bool,
    pub decrescent_witness: bool,
}

/// Samples `M` on spheres around `x_e` (coordinate axes plus seeded random
/// directions) and looks for radial comparison envelopes.
pub fn empirical_lpdf_check(
    m: &dyn Fn(f64, &[f64]) -> f64,
    x_e: &[f64],
    radii: &[f64],
    time_grid: &[f64],
    seed: u64,
) -> LpdfReport {
    let k = x_e.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..k {
        for s in [1.0, -1.0] {
            let mut d = vec![0.0; k];
            d[i] = s;
            dirs.push(d);
        }
    }
    for _ in 0..32 {
        let d: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 1e-3 {
            dirs.push(d.iter().map(|v| v / n).collect());
        }
    }
    let centre_value = time_grid.iter().map(|&t| m(t, x_e).abs()).fold(0.0, f64::max);
    let mut alpha = Vec::with_capacity(radii.len());
    let mut beta = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for d in &dirs {
            let x: Vec<f64> = x_e.iter().zip(d).map(|(a, b)| a + r * b).collect();
            for &t in time_grid {
                let v = m(t, &x);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        alpha.push(lo);
        beta.push(hi);
    }
    let centred = centre_value <= 1e-12;
    let nondecreasing = |v: &[f64]| v.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12));
    let lpdf = centred && alpha.iter().all(|a| *a > 1e-12) && nondecreasing(&alpha);
    let decrescent = centred && beta.iter().all(|b| b.is_finite()) && nondecreasing(&beta);
    LpdfReport {
        radii: radii.to_vec(),
        alpha_envelope: alpha,
        beta_envelope: beta,
        centre_value,
        lpdf_witness: lpdf,
        decrescent_witness: decrescent,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_points_lie_in_the_ball() {
        let pts = ball_samples(3, 0.5, 50, 7);
        assert_eq!(pts.len(), 50);
        assert!(pts.iter().all(|p| p.norm() <= 0.5 + 1e-15));
        assert_eq!(pts[0].norm(), 0.0);
        assert_eq!(pts, ball_samples(3, 0.5, 50, 7));
    }

    #[test]
    fn lpdf_envelopes() {
        let r = [0.1, 0.2, 0.4];
        let sq = |_t: f64, x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let rep = empirical_lpdf_check(&sq, &[0.0, 0.0], &r, &[0.0, 1.0], 1);
        assert!(rep.lpdf_witness && rep.decrescent_witness);
        let decay = |t: f64, x: &[f64]| (-t).exp() * x.iter().map(|v| v * v).sum::<f64>();
        let rep = empirical_lpdf_check(&decay, &[0.0, 0.0], &r, &[0.0, 10.0, 100.0, 1000.0], 1);
        assert!(!rep.lpdf_witness && rep.decrescent_witness);
        let quartic = |_t: f64, x: &[f64]| (x[0] - 1.0).powi(4);
        let rep = empirical_lpdf_check(&quartic, &[1.0], &r, &[0.0, 5.0], 1);
        assert!(rep.lpdf_witness);
        for (a, rr) in rep.alpha_envelope.iter().zip(&r) {
            assert!((a - rr.powi(4)).abs() < 1e-15);
        }
    }
}
