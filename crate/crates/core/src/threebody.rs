//! The circular restricted three-body problem in polar coordinates
//! `(t, r, phi, p_r, p_phi)` about the centre of mass.
//!
//! The heavy primary `mu` sits at distance `r1 = 1 - mu` on the ray
//! `phi = varpi t + pi`, the light primary `1 - mu` at distance `r2 = mu` on
//! the ray `phi = varpi t`. The rotating-frame symmetry is generated by the
//! gradient field of `Upsilon = t + varpi p_phi`, which is not Hamiltonian;
//! quotienting by its orbits yields the autonomous rotating-frame
//! Hamiltonian `k` on `(r, phi', p_r, p_phi)` with `phi' = phi - varpi t`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DVector;

use crate::chart::DarbouxChart;
use crate::dynamics::{integrate, Guard, IntegratorConfig};
use crate::error::{Error, Result};
use crate::field::{domain, Field, JetField};
use crate::geometry::{evolution_field, gradient_field, hamiltonian_field, FieldKind};
use crate::jet::Jet2;
use crate::roots::{root_near, sign_changes, RootScan, UPoly};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThreeBodyParams {
    pub mu: f64,
    pub varpi: f64,
    /// Minimum admissible distance to either primary.
    pub guard: f64,
}

impl ThreeBodyParams {
    pub fn new(mu: f64, varpi: f64) -> Result<Self> {
        if !(mu > 0.5 && mu < 1.0) {
            return Err(Error::InvalidInput(format!("mu must lie in (1/2, 1), got {mu}")));
        }
        if varpi != 1.0 && varpi != -1.0 {
            return Err(Error::InvalidInput(format!("varpi must be +1 or -1, got {varpi}")));
        }
        Ok(ThreeBodyParams { mu, varpi, guard: 1e-6 })
    }

    pub fn with_guard(mut self, guard: f64) -> Self {
        self.guard = guard;
        self
    }

    /// Distance of the heavy primary from the centre of mass.
    pub fn r1(&self) -> f64 {
        1.0 - self.mu
    }

    /// Distance of the light primary from the centre of mass.
    pub fn r2(&self) -> f64 {
        self.mu
    }

    /// Distances `(d1, d2)` to the heavy and light primaries.
    pub fn distances(&self, x: &[f64]) -> (f64, f64) {
        let (r, c) = (x[1], (x[2] - self.varpi * x[0]).cos());
        let (r1, r2) = (self.r1(), self.r2());
        (
            (r * r + r1 * r1 + 2.0 * r * r1 * c).max(0.0).sqrt(),
            (r * r + r2 * r2 - 2.0 * r * r2 * c).max(0.0).sqrt(),
        )
    }

    /// Integration guard: false once the body comes within `guard` of a
    /// primary or of the polar origin.
    pub fn collision_guard(&self) -> Guard {
        let p = *self;
        Arc::new(move |x: &[f64]| {
            let (d1, d2) = p.distances(x);
            d1 > p.guard && d2 > p.guard && x[1] > p.guard
        })
    }
}

pub fn chart() -> DarbouxChart {
    DarbouxChart::with_labels(&["r", "phi"], &["p_r", "p_phi"]).expect("two degrees of freedom")
}

/// Rotating-frame chart `(dummy t, r, phi', p_r, p_phi)`.
pub fn reduced_chart() -> DarbouxChart {
    DarbouxChart::with_labels(&["r", "phi'"], &["p_r", "p_phi"]).expect("two degrees of freedom")
}

/// Kinetic plus gravitational energy with angle argument `psi`.
fn energy(p: &ThreeBodyParams, r: &Jet2, psi: &Jet2, pr: &Jet2, pphi: &Jet2, at: &[f64]) -> Result<Jet2> {
    let (r1, r2) = (p.r1(), p.r2());
    let c = psi.cos();
    let rr = r * r;
    let d1sq = &(&rr + r1 * r1) + &(&(r * &c) * (2.0 * r1));
    let d2sq = &(&rr + r2 * r2) - &(&(r * &c) * (2.0 * r2));
    let g2 = p.guard * p.guard;
    if !(r.value > p.guard) {
        return Err(domain(at, "polar origin"));
    }
    if !(d1sq.value > g2) {
        return Err(domain(at, "collision with the heavy primary"));
    }
    if !(d2sq.value > g2) {
        return Err(domain(at, "collision with the light primary"));
    }
    let kinetic = &(pr * pr) * 0.5 + &(&(pphi * pphi) / &rr) * 0.5;
    Ok(&(&kinetic - &(d1sq.powf(-0.5) * p.mu)) - &(d2sq.powf(-0.5) * (1.0 - p.mu)))
}

/// `h = p_r^2/2 + p_phi^2/(2 r^2) - mu/d1 - (1 - mu)/d2`.
pub fn hamiltonian(params: &ThreeBodyParams) -> Field {
    let p = *params;
    JetField::fallible(chart(), "h", move |x| {
        let at: Vec<f64> = x.iter().map(|j| j.value).collect();
        let psi = &x[2] - &(&x[0] * p.varpi);
        energy(&p, &x[1], &psi, &x[3], &x[4], &at)
    })
    .into_field()
}

/// `Upsilon = t + varpi p_phi`.
pub fn upsilon(params: &ThreeBodyParams) -> Field {
    let w = params.varpi;
    JetField::new(chart(), "Upsilon", move |x| &x[0] + &(&x[4] * w)).into_field()
}

/// `k = -varpi p_phi + h` with `phi - varpi t` replaced by `phi'`; the time
/// slot of the chart is ignored.
pub fn reduced_hamiltonian(params: &ThreeBodyParams) -> Field {
    let p = *params;
    JetField::fallible(reduced_chart(), "k", move |y| {
        let at: Vec<f64> = y.iter().map(|j| j.value).collect();
        let e = energy(&p, &y[1], &y[2], &y[3], &y[4], &at)?;
        Ok(&e - &(&y[4] * p.varpi))
    })
    .into_field()
}

/// `pi(t, r, phi, p_r, p_phi) = (0, r, phi - varpi t, p_r, p_phi)`.
pub fn project(params: &ThreeBodyParams, x: &[f64]) -> Vec<f64> {
    vec![0.0, x[1], x[2] - params.varpi * x[0], x[3], x[4]]
}

/// `D pi` applied to an ambient tangent vector.
pub fn pushforward(params: &ThreeBodyParams, v: &[f64]) -> Vec<f64> {
    vec![0.0, v[1], v[2] - params.varpi * v[0], v[3], v[4]]
}

/// Closed form of the rotating-frame field `pi_*(R + X_h)` at `y`.
pub fn reduced_field_closed_form(params: &ThreeBodyParams, y: &[f64]) -> Vec<f64> {
    let (mu, w) = (params.mu, params.varpi);
    let (r1, r2) = (params.r1(), params.r2());
    let (r, ph, pr, pp) = (y[1], y[2], y[3], y[4]);
    let (s, c) = ph.sin_cos();
    let d1c = (r * r + 2.0 * r * r1 * c + r1 * r1).powf(1.5);
    let d2c = (r * r - 2.0 * r * r2 * c + r2 * r2).powf(1.5);
    vec![
        0.0,
        pr,
        -w + pp / (r * r),
        -(mu * (r + r1 * c) / d1c + (1.0 - mu) * (r - r2 * c) / d2c - pp * pp / (r * r * r)),
        r1 * r2 * r * s * (1.0 / d1c - 1.0 / d2c),
    ]
}

const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Largest discrepancy of `pi* k = h - Upsilon/c - int_0^t (grad Upsilon)(h - Upsilon/c) ds`
/// over `points`, with `c = R Upsilon` and the integral taken along the time
/// axis by composite Gauss-Legendre quadrature.
pub fn verify_k_formula(params: &ThreeBodyParams, points: &[Vec<f64>]) -> Result<f64> {
    let h = hamiltonian(params);
    let ups = upsilon(params);
    let k = reduced_hamiltonian(params);
    let mut worst: f64 = 0.0;
    for x in points {
        let c = ups.jet(x)?.grad[0];
        if c == 0.0 {
            return Err(Error::InvalidInput("R Upsilon vanishes".into()));
        }
        let integrand = |s: f64| -> Result<f64> {
            let mut y = x.clone();
            y[0] = s;
            let g = gradient_field(ups.as_ref(), &y)?;
            let dh = h.jet(&y)?.grad;
            let du = ups.jet(&y)?.grad;
            Ok((0..y.len()).map(|i| g.components[i] * (dh[i] - du[i] / c)).sum())
        };
        let t = x[0];
        let pieces = 4;
        let mut integral = 0.0;
        for m in 0..pieces {
            let (a, b) = (t * m as f64 / pieces as f64, t * (m + 1) as f64 / pieces as f64);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for (node, weight) in GL5 {
                integral += half * weight * integrand(mid + half * node)?;
            }
        }
        let rhs = h.value(x)? - ups.value(x)? / c - integral;
        let lhs = k.value(&project(params, x))?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// Integrates `E_h` ambiently and the Hamiltonian field of `k` from the
/// projected start with fixed-step RK4, returning the supremum gap between
/// the projected ambient states and the reduced states.
pub fn reduction_trajectory_gap(params: &ThreeBodyParams, x0: &[f64], span: f64, step: f64) -> Result<f64> {
    let cfg = IntegratorConfig::rk4(step).with_guard(params.collision_guard());
    let h = hamiltonian(params);
    let k = reduced_hamiltonian(params);
    let amb = integrate(FieldKind::Evolution, h.as_ref(), x0, x0[0], x0[0] + span, &cfg)?;
    let red = integrate(FieldKind::Hamiltonian, k.as_ref(), &project(params, x0), 0.0, span, &cfg)?;
    if !amb.completed() || !red.completed() {
        return Err(Error::Domain {
            point: amb.last().to_vec(),
            reason: "trajectory terminated before the end of the window".into(),
        });
    }
    let mut gap: f64 = 0.0;
    for (xa, yr) in amb.states.iter().zip(&red.states) {
        let y = project(params, xa);
        for i in 1..5 {
            gap = gap.max((y[i] - yr[i]).abs());
        }
    }
    Ok(gap)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    fn s(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Coefficients of `P_+-(r, mu)`, highest degree first.
pub fn quintic_coefficients(mu: f64, branch: Branch) -> [f64; 6] {
    let s = branch.s();
    let m2 = mu * mu;
    let m3 = m2 * mu;
    [
        1.0,
        2.0 - 4.0 * mu,
        6.0 * m2 - 6.0 * mu + 1.0,
        -4.0 * m3 + 6.0 * m2 - (3.0 + s) * mu + s,
        m3 * mu - 2.0 * m3 + (3.0 + 2.0 * s) * m2 - s * (4.0 * mu - 2.0),
        -m3 + s * (1.0 - mu).powi(3),
    ]
}

pub fn quintic(mu: f64, branch: Branch) -> UPoly {
    UPoly::from_descending(&quintic_coefficients(mu, branch))
}

/// `r (r + 1 - mu)^2 (mu - r)^2 - mu (mu - r)^2 +- (1 - mu)(r + 1 - mu)^2`:
/// the force balance on the ray towards the light primary, denominators
/// cleared.
pub fn cleared_collinear(mu: f64, branch: Branch) -> UPoly {
    let a = UPoly::linear(mu - 1.0).powi(2); // (r + 1 - mu)^2
    let b = UPoly::linear(mu).powi(2); // (mu - r)^2
    let r = UPoly::new(vec![0.0, 1.0]);
    &(&(&r * &(&a * &b)) - &b.scale(mu)) + &a.scale(branch.s() * (1.0 - mu))
}

/// `r (r - 1 + mu)^2 (r + mu)^2 -+ mu (r + mu)^2 - (1 - mu)(r - 1 + mu)^2`:
/// the force balance on the ray opposite the light primary.
pub fn l3_polynomial(mu: f64, branch: Branch) -> UPoly {
    let a = UPoly::linear(1.0 - mu).powi(2);
    let b = UPoly::linear(-mu).powi(2);
    let r = UPoly::new(vec![0.0, 1.0]);
    &(&(&r * &(&a * &b)) - &b.scale(branch.s() * mu)) - &a.scale(1.0 - mu)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AngleMode {
    /// `phi = varpi t + k pi`.
    Collinear { k: u8 },
    /// `phi = varpi t + delta`.
    Triangular { delta: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LagrangePoint {
    pub label: String,
    pub r: f64,
    pub mode: AngleMode,
    pub p_r: f64,
    pub p_phi: f64,
    /// Polynomial residual (collinear) or radial force residual (triangular).
    pub residual_polynomial: f64,
    /// `max |E_h - grad Upsilon|` over the certification times.
    pub residual_field: f64,
}

impl LagrangePoint {
    pub fn offset(&self) -> f64 {
        match self.mode {
            AngleMode::Collinear { k } => k as f64 * PI,
            AngleMode::Triangular { delta } => delta,
        }
    }

    pub fn delta_or_k(&self) -> f64 {
        match self.mode {
            AngleMode::Collinear { k } => k as f64,
            AngleMode::Triangular { delta } => delta,
        }
    }

    /// `(t, r, varpi t + offset, 0, varpi r^2)`.
    pub fn at(&self, params: &ThreeBodyParams, t: f64) -> Vec<f64> {
        vec![t, self.r, params.varpi * t + self.offset(), self.p_r, self.p_phi]
    }
}

/// Times used when the solvers fill in `residual_field`.
pub const CERTIFICATION_TIMES: [f64; 3] = [0.0, 1.0, 2.5];

fn make_point(params: &ThreeBodyParams, label: &str, r: f64, mode: AngleMode, res: f64) -> Result<LagrangePoint> {
    let mut p = LagrangePoint {
        label: label.into(),
        r,
        mode,
        p_r: 0.0,
        p_phi: params.varpi * r * r,
        residual_polynomial: res,
        residual_field: f64::NAN,
    };
    p.residual_field = gradient_rep_residual(params, &p, &CERTIFICATION_TIMES)?.field;
    Ok(p)
}

/// Hill-sphere and L3 approximations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Approximations {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
}

pub fn approximations(mu: f64) -> Approximations {
    let hill = ((1.0 - mu) / 3.0).cbrt();
    Approximations {
        l1: 1.0 - hill,
        l2: 1.0 + hill,
        l3: 1.0 + 5.0 * (1.0 - mu) / 12.0,
    }
}

/// `L1` (from `P_+`, between the centre of mass and the light primary),
/// `L2` (from `P_-`, beyond the light primary) and `L3` (opposite side).
pub fn solve_collinear(params: &ThreeBodyParams) -> Result<[LagrangePoint; 3]> {
    let scan = RootScan::default();
    let approx = approximations(params.mu);
    let p1 = quintic(params.mu, Branch::Plus);
    let p2 = quintic(params.mu, Branch::Minus);
    let p3 = l3_polynomial(params.mu, Branch::Plus);
    let l1 = root_near(&p1, &scan, approx.l1)?;
    let l2 = root_near(&p2, &scan, approx.l2)?;
    let l3 = root_near(&p3, &scan, approx.l3)?;
    Ok([
        make_point(params, "L1", l1.r, AngleMode::Collinear { k: 0 }, l1.residual)?,
        make_point(params, "L2", l2.r, AngleMode::Collinear { k: 0 }, l2.residual)?,
        make_point(params, "L3", l3.r, AngleMode::Collinear { k: 1 }, l3.residual)?,
    ])
}

/// Number of sign changes of the minus branch of the L3 balance on the
/// default scan interval (zero: no positive solution).
pub fn l3_minus_branch_sign_changes(mu: f64) -> usize {
    sign_changes(&l3_polynomial(mu, Branch::Minus), &RootScan::default()).len()
}

/// Radial force balance `p_phi^2/r^3 - F_r` at a co-rotating point with
/// angular offset `psi` and `p_phi = varpi r^2`.
pub fn radial_force_residual(params: &ThreeBodyParams, r: f64, psi: f64) -> f64 {
    let y = [0.0, r, psi, 0.0, params.varpi * r * r];
    reduced_field_closed_form(params, &y)[3]
}

/// The equilateral points `L4` (`delta > 0`) and `L5`.
pub fn solve_triangular(params: &ThreeBodyParams) -> Result<[LagrangePoint; 2]> {
    let mu = params.mu;
    let r = (1.0 - mu * (1.0 - mu)).sqrt();
    let delta = ((mu - 0.5) / r).acos();
    let mut out = Vec::with_capacity(2);
    for (label, d) in [("L4", delta), ("L5", -delta)] {
        let res = radial_force_residual(params, r, d).abs();
        if res > 1e-10 {
            return Err(Error::NotCertified { residual: res, tol: 1e-10 });
        }
        out.push(make_point(params, label, r, AngleMode::Triangular { delta: d }, res)?);
    }
    let [a, b]: [LagrangePoint; 2] = out.try_into().expect("two points");
    Ok([a, b])
}

/// All five points in label order.
pub fn lagrange_points(params: &ThreeBodyParams) -> Result<Vec<LagrangePoint>> {
    let mut v = solve_collinear(params)?.to_vec();
    v.extend(solve_triangular(params)?);
    Ok(v)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientRepResidual {
    /// `max |(R + X_h) - grad Upsilon|`.
    pub field: f64,
    /// `max |grad h - grad Upsilon|`, reported for comparison.
    pub literal: f64,
    /// `|pi_*(R + X_h)|` at the projected point.
    pub reduced: f64,
}

pub fn gradient_rep_residual(
    params: &ThreeBodyParams,
    point: &LagrangePoint,
    times: &[f64],
) -> Result<GradientRepResidual> {
    let h = hamiltonian(params);
    let ups = upsilon(params);
    let k = reduced_hamiltonian(params);
    let mut out = GradientRepResidual {
        field: 0.0,
        literal: 0.0,
        reduced: 0.0,
    };
    for &t in times {
        let x = point.at(params, t);
        let gu = gradient_field(ups.as_ref(), &x)?.components;
        let e = evolution_field(h.as_ref(), &x)?.components;
        let gh = gradient_field(h.as_ref(), &x)?.components;
        out.field = out.field.max((&e - &gu).norm());
        out.literal = out.literal.max((&gh - &gu).norm());
        let red = hamiltonian_field(k.as_ref(), &project(params, &x))?.components;
        out.reduced = out.reduced.max(red.norm());
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub delta: f64,
    pub l1_error: f64,
    pub l2_error: f64,
    pub l3_error: f64,
}

impl ConvergenceRow {
    /// `|root - approx| / delta^(2/3)` for L1 and L2.
    pub fn hill_ratios(&self) -> (f64, f64) {
        let s = self.delta.powf(2.0 / 3.0);
        (self.l1_error / s, self.l2_error / s)
    }
}

/// `|root - approximation|` for L1..L3 across `mu = 1 - delta`.
pub fn convergence_diagnostics(deltas: &[f64], varpi: f64) -> Result<Vec<ConvergenceRow>> {
    deltas
        .iter()
        .map(|&delta| {
            let p = ThreeBodyParams::new(1.0 - delta, varpi)?;
            let a = approximations(p.mu);
            let [l1, l2, l3] = solve_collinear(&p)?;
            Ok(ConvergenceRow {
                delta,
                l1_error: (l1.r - a.l1).abs(),
                l2_error: (l2.r - a.l2).abs(),
                l3_error: (l3.r - a.l3).abs(),
            })
        })
        .collect()
}

/// CSV table `label,r,delta_or_k,p_phi,residual_field,residual_quintic`.
pub fn lagrange_table_csv(points: &[LagrangePoint]) -> String {
    let mut s = String::from("label,r,delta_or_k,p_phi,residual_field,residual_quintic\n");
    for p in points {
        let _ = writeln!(
            s,
            "{},{:.16e},{:.16e},{:.16e},{:.6e},{:.6e}",
            p.label,
            p.r,
            p.delta_or_k(),
            p.p_phi,
            p.residual_field,
            p.residual_polynomial
        );
    }
    s
}

/// The reduced field at `y` as the Hamiltonian field of `k`.
pub fn reduced_field(params: &ThreeBodyParams, y: &[f64]) -> Result<DVector<f64>> {
    Ok(hamiltonian_field(reduced_hamiltonian(params).as_ref(), y)?.components)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_params() {
        assert!(ThreeBodyParams::new(0.4, 1.0).is_err());
        assert!(ThreeBodyParams::new(1.0, 1.0).is_err());
        assert!(ThreeBodyParams::new(0.9, 0.5).is_err());
    }

    #[test]
    fn collision_is_a_domain_error() {
        let p = ThreeBodyParams::new(0.99, 1.0).unwrap();
        let h = hamiltonian(&p);
        // the light primary sits at r = mu, phi = 0 at t = 0
        let err = h.value(&[0.0, 0.99, 0.0, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::Domain { .. }));
    }

    #[test]
    fn quintic_constant_term() {
        let c = quintic_coefficients(0.9, Branch::Plus);
        assert!((c[5] - (-0.729 + 0.001)).abs() < 1e-15);
    }
}
