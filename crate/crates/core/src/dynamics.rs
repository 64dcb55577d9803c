//! Integration of the induced vector fields and first-integral monitoring.
//!
//! Two explicit methods: classical fixed-step RK4 and the Dormand–Prince
//! 5(4) embedded pair with PI step-size control. Coefficients (Dormand &
//! Prince 1980, FSAL form):
//!
//! ```text
//! c  = [0, 1/5, 3/10, 4/5, 8/9, 1, 1]
//! a2 = [1/5]
//! a3 = [3/40, 9/40]
//! a4 = [44/45, -56/15, 32/9]
//! a5 = [19372/6561, -25360/2187, 64448/6561, -212/729]
//! a6 = [9017/3168, -355/33, 46732/5247, 49/176, -5103/18656]
//! b5 = [35/384, 0, 500/1113, 125/192, -2187/6784, 11/84, 0]
//! b4 = [5179/57600, 0, 7571/16695, 393/640, -92097/339200, 187/2100, 1/40]
//! ```

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::{vector_field, FieldKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Rk4,
    Rk45,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Method::Rk4),
            "rk45" => Ok(Method::Rk45),
            _ => Err(Error::InvalidInput(format!("unknown integrator `{s}`"))),
        }
    }
}

/// Returns `false` when a state must terminate the run (e.g. too close to a
/// collision).
pub type Guard = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

#[derive(Clone)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step for RK4, initial step guess for RK45 (0 = automatic).
    pub step: f64,
    pub atol: f64,
    pub rtol: f64,
    pub max_step: f64,
    pub max_steps: usize,
    pub guard: Option<Guard>,
}

impl std::fmt::Debug for IntegratorConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IntegratorConfig")
            .field("method", &self.method)
            .field("step", &self.step)
            .field("atol", &self.atol)
            .field("rtol", &self.rtol)
            .field("max_step", &self.max_step)
            .field("max_steps", &self.max_steps)
            .field("guard", &self.guard.is_some())
            .finish()
    }
}

impl IntegratorConfig {
    pub fn rk4(step: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk4,
            step,
            atol: 1e-10,
            rtol: 1e-10,
            max_step: f64::INFINITY,
            max_steps: 10_000_000,
            guard: None,
        }
    }

    pub fn rk45(tol: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk45,
            step: 0.0,
            atol: tol,
            rtol: tol,
            max_step: f64::INFINITY,
            max_steps: 10_000_000,
            guard: None,
        }
    }

    pub fn with_guard(mut self, guard: Guard) -> Self {
        self.guard = Some(guard);
        self
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = h;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(m.to_string()));
        match self.method {
            Method::Rk4 if !(self.step > 0.0 && self.step.is_finite()) => bad("rk4 step must be > 0"),
            Method::Rk45 if !(self.atol > 0.0 && self.rtol > 0.0) => bad("tolerances must be > 0"),
            _ if !(self.max_step > 0.0) => bad("max_step must be > 0"),
            _ if self.step < 0.0 => bad("step must be >= 0"),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    Completed,
    /// The field (or the guard) failed at this state.
    DomainError(Vec<f64>),
    /// The adaptive step dropped below `1e-14`.
    StepUnderflow,
    /// `max_steps` was exhausted before reaching the end.
    StepLimit,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub kind: Option<FieldKind>,
    /// Curve parameter at each accepted step (equals `t` for evolution runs).
    pub s: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub termination: Termination,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectory has the initial state")
    }

    pub fn completed(&self) -> bool {
        self.termination == Termination::Completed
    }

    /// CSV with header `s,<labels...>`, 17 significant digits.
    pub fn to_csv(&self, labels: &[String]) -> String {
        let mut out = String::from("s");
        for l in labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (s, x) in self.s.iter().zip(&self.states) {
            let _ = write!(out, "{s:.16e}");
            for v in x {
                let _ = write!(out, ",{v:.16e}");
            }
            out.push('\n');
        }
        out
    }
}

type Rhs<'a> = dyn Fn(f64, &[f64]) -> Result<DVector<f64>> + 'a;

/// Integrates `dx/ds = field(x)` for one of the vector fields induced by `f`.
///
/// For the evolution kind the time coordinate is the curve parameter, so
/// `x0[0]` must equal `s0`; the t-component is then pinned to `s` exactly.
pub fn integrate(
    kind: FieldKind,
    f: &dyn ScalarField,
    x0: &[f64],
    s0: f64,
    s1: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    f.chart().check_point(x0)?;
    if kind == FieldKind::Evolution && (x0[0] - s0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "evolution run must start at t = s0 (t = {}, s0 = {s0})",
            x0[0]
        )));
    }
    let rhs = |_s: f64, x: &[f64]| vector_field(kind, f, x).map(|v| v.components);
    let pin = kind == FieldKind::Evolution;
    let mut traj = run(&rhs, x0, s0, s1, cfg, pin)?;
    traj.kind = Some(kind);
    Ok(traj)
}

/// Integrates an arbitrary autonomous-in-`s` system `dx/ds = rhs(s, x)`.
///
/// Domain errors raised by `rhs` terminate the run; other errors propagate.
pub fn integrate_ode(
    rhs: &dyn Fn(f64, &[f64]) -> Result<DVector<f64>>,
    x0: &[f64],
    s0: f64,
    s1: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    run(rhs, x0, s0, s1, cfg, false)
}

fn run(rhs: &Rhs<'_>, x0: &[f64], s0: f64, s1: f64, cfg: &IntegratorConfig, pin_t: bool) -> Result<Trajectory> {
    cfg.validate()?;
    if !(s1 > s0) {
        return Err(Error::InvalidInput(format!("need s1 > s0 (got {s0}, {s1})")));
    }
    let mut traj = Trajectory {
        kind: None,
        s: vec![s0],
        states: vec![x0.to_vec()],
        termination: Termination::Completed,
        rejected_steps: 0,
    };
    if let Some(g) = &cfg.guard {
        if !g(x0) {
            traj.termination = Termination::DomainError(x0.to_vec());
            return Ok(traj);
        }
    }
    let outcome = match cfg.method {
        Method::Rk4 => rk4_loop(rhs, s1, cfg, pin_t, &mut traj),
        Method::Rk45 => dopri_loop(rhs, s1, cfg, pin_t, &mut traj),
    };
    match outcome {
        Ok(()) => Ok(traj),
        Err(Error::Domain { point, .. }) => {
            traj.termination = Termination::DomainError(point);
            Ok(traj)
        }
        Err(e) => Err(e),
    }
}

fn axpy(x: &[f64], terms: &[(f64, &DVector<f64>)]) -> Vec<f64> {
    let mut out = x.to_vec();
    for (c, k) in terms {
        for (o, v) in out.iter_mut().zip(k.iter()) {
            *o += c * v;
        }
    }
    out
}

fn accept(traj: &mut Trajectory, s: f64, mut x: Vec<f64>, pin_t: bool, cfg: &IntegratorConfig) -> bool {
    if pin_t {
        x[0] = s;
    }
    if let Some(g) = &cfg.guard {
        if !g(&x) {
            traj.s.push(s);
            traj.states.push(x.clone());
            traj.termination = Termination::DomainError(x);
            return false;
        }
    }
    traj.s.push(s);
    traj.states.push(x);
    true
}

fn rk4_loop(rhs: &Rhs<'_>, s1: f64, cfg: &IntegratorConfig, pin_t: bool, traj: &mut Trajectory) -> Result<()> {
    let s0 = traj.s[0];
    let span = s1 - s0;
    let nsteps = ((span / cfg.step) - 1e-9).ceil().max(1.0) as usize;
    if nsteps > cfg.max_steps {
        traj.termination = Termination::StepLimit;
        return Ok(());
    }
    let h = span / nsteps as f64;
    let mut x = traj.states[0].clone();
    for k in 0..nsteps {
        let s = s0 + k as f64 * h;
        let k1 = rhs(s, &x)?;
        let k2 = rhs(s + h / 2.0, &axpy(&x, &[(h / 2.0, &k1)]))?;
        let k3 = rhs(s + h / 2.0, &axpy(&x, &[(h / 2.0, &k2)]))?;
        let k4 = rhs(s + h, &axpy(&x, &[(h, &k3)]))?;
        x = axpy(&x, &[(h / 6.0, &k1), (h / 3.0, &k2), (h / 3.0, &k3), (h / 6.0, &k4)]);
        let s_next = if k + 1 == nsteps { s1 } else { s0 + (k + 1) as f64 * h };
        if !accept(traj, s_next, x.clone(), pin_t, cfg) {
            return Ok(());
        }
        x = traj.last().to_vec();
    }
    Ok(())
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [&[f64]; 7] = [
    &[],
    &[1.0 / 5.0],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
    &[9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
    &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn err_norm(err: &DVector<f64>, x: &[f64], xn: &[f64], cfg: &IntegratorConfig) -> f64 {
    let n = err.len() as f64;
    let sum: f64 = err
        .iter()
        .zip(x.iter().zip(xn))
        .map(|(e, (a, b))| {
            let sc = cfg.atol + cfg.rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

fn initial_step(rhs: &Rhs<'_>, s0: f64, x0: &[f64], f0: &DVector<f64>, cfg: &IntegratorConfig) -> Result<f64> {
    let scale = |v: &[f64]| -> Vec<f64> { v.iter().map(|a| cfg.atol + cfg.rtol * a.abs()).collect() };
    let sc = scale(x0);
    let rms = |v: &mut dyn Iterator<Item = f64>| {
        let items: Vec<f64> = v.collect();
        (items.iter().map(|a| a * a).sum::<f64>() / items.len().max(1) as f64).sqrt()
    };
    let d0 = rms(&mut x0.iter().zip(&sc).map(|(a, s)| a / s));
    let d1 = rms(&mut f0.iter().zip(&sc).map(|(a, s)| a / s));
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let x1 = axpy(x0, &[(h0, f0)]);
    let f1 = rhs(s0 + h0, &x1)?;
    let d2 = rms(&mut f1.iter().zip(f0.iter()).zip(&sc).map(|((a, b), s)| (a - b) / s)) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    Ok((100.0 * h0).min(h1).min(cfg.max_step))
}

fn dopri_loop(rhs: &Rhs<'_>, s1: f64, cfg: &IntegratorConfig, pin_t: bool, traj: &mut Trajectory) -> Result<()> {
    const ALPHA: f64 = 0.7 / 5.0;
    const BETA: f64 = 0.4 / 5.0;
    let mut s = traj.s[0];
    let mut x = traj.states[0].clone();
    let mut k0 = rhs(s, &x)?;
    let mut h = if cfg.step > 0.0 {
        cfg.step.min(cfg.max_step)
    } else {
        initial_step(rhs, s, &x, &k0, cfg)?
    };
    let mut err_prev: f64 = 1e-4;
    let mut steps = 0usize;
    let mut last_rejected = false;

    while s < s1 {
        if steps >= cfg.max_steps {
            traj.termination = Termination::StepLimit;
            return Ok(());
        }
        steps += 1;
        let mut final_step = false;
        if s + h >= s1 {
            h = s1 - s;
            final_step = true;
        }
        if h < 1e-14 {
            traj.termination = Termination::StepUnderflow;
            return Ok(());
        }
        let mut k: Vec<DVector<f64>> = Vec::with_capacity(7);
        k.push(k0.clone());
        for stage in 1..7 {
            let terms: Vec<(f64, &DVector<f64>)> =
                A[stage].iter().zip(&k).map(|(a, kk)| (h * a, kk)).collect();
            let xs = axpy(&x, &terms);
            k.push(rhs(s + C[stage] * h, &xs)?);
        }
        let x5 = axpy(&x, &B5.iter().zip(&k).map(|(b, kk)| (h * b, kk)).collect::<Vec<_>>());
        let mut errv = DVector::zeros(x.len());
        for (i, kk) in k.iter().enumerate() {
            errv += kk * (h * (B5[i] - B4[i]));
        }
        let err = err_norm(&errv, &x, &x5, cfg);
        if !err.is_finite() {
            h *= 0.2;
            traj.rejected_steps += 1;
            last_rejected = true;
            continue;
        }
        if err <= 1.0 {
            s = if final_step { s1 } else { s + h };
            if !accept(traj, s, x5, pin_t, cfg) {
                return Ok(());
            }
            x = traj.last().to_vec();
            k0 = k.pop().expect("seven stages");
            if pin_t {
                // FSAL stage was evaluated at the unpinned state; refresh.
                k0 = rhs(s, &x)?;
            }
            let e = err.max(1e-10);
            let mut fac = 0.9 * e.powf(-ALPHA) * err_prev.powf(BETA);
            fac = fac.clamp(0.2, 5.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            err_prev = e;
            h = (h * fac).min(cfg.max_step);
            last_rejected = false;
        } else {
            let fac = (0.9 * err.powf(-ALPHA)).max(0.2);
            h *= fac;
            traj.rejected_steps += 1;
            last_rejected = true;
        }
    }
    Ok(())
}

/// Values of each field along a trajectory and their maximal drift.
#[derive(Clone, Debug)]
pub struct MonitorReport {
    pub names: Vec<String>,
    /// `series[i][k] = f_i(x_k)`.
    pub series: Vec<Vec<f64>>,
    /// `max_k |f_i(x_k) - f_i(x_0)|`.
    pub max_drift: Vec<f64>,
}

impl MonitorReport {
    /// CSV with header `s,<field names>`.
    pub fn to_csv(&self, s: &[f64]) -> String {
        let mut out = String::from("s");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (k, sk) in s.iter().enumerate() {
            let _ = write!(out, "{sk:.16e}");
            for series in &self.series {
                let _ = write!(out, ",{:.16e}", series[k]);
            }
            out.push('\n');
        }
        out
    }
}

pub fn monitor(traj: &Trajectory, fields: &[&dyn ScalarField]) -> Result<MonitorReport> {
    let mut series = Vec::with_capacity(fields.len());
    let mut drift = Vec::with_capacity(fields.len());
    for f in fields {
        let vals: Vec<f64> = traj.states.iter().map(|x| f.value(x)).collect::<Result<_>>()?;
        let d = vals.iter().map(|v| (v - vals[0]).abs()).fold(0.0, f64::max);
        series.push(vals);
        drift.push(d);
    }
    Ok(MonitorReport {
        names: fields.iter().map(|f| f.name().to_string()).collect(),
        series,
        max_drift: drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::DarbouxChart;
    use crate::field::{coordinate, JetField};
    use std::f64::consts::PI;

    fn osc() -> JetField {
        JetField::new(DarbouxChart::new(1).unwrap(), "h", |x| (&x[1] * &x[1] + &x[2] * &x[2]) * 0.5)
    }

    #[test]
    fn rk4_closes_the_circle() {
        let h = osc();
        let tr = integrate(FieldKind::Evolution, &h, &[0.0, 1.0, 0.0], 0.0, 2.0 * PI, &IntegratorConfig::rk4(1e-3)).unwrap();
        let end = tr.last();
        assert_eq!(end[0], 2.0 * PI);
        assert!((end[1] - 1.0).abs() < 1e-9 && end[2].abs() < 1e-9, "{end:?}");
    }

    #[test]
    fn rk45_hits_tolerance() {
        let h = osc();
        let tol = 1e-9;
        let tr = integrate(FieldKind::Evolution, &h, &[0.0, 1.0, 0.0], 0.0, 2.0 * PI, &IntegratorConfig::rk45(tol)).unwrap();
        let end = tr.last();
        let err = ((end[1] - 1.0).powi(2) + end[2].powi(2)).sqrt();
        assert!(err < 100.0 * tol, "{err}");
    }

    #[test]
    fn hamiltonian_kind_freezes_time() {
        let c = DarbouxChart::new(1).unwrap();
        let h = JetField::new(c.clone(), "h", |x| &x[0].sin() * &(&x[1] * &x[1] + &x[2] * &x[2]));
        let tr = integrate(FieldKind::Hamiltonian, &h, &[0.4, 1.0, 0.5], 0.0, 3.0, &IntegratorConfig::rk45(1e-10)).unwrap();
        let t = coordinate(&c, 0);
        let m = monitor(&tr, &[t.as_ref()]).unwrap();
        assert_eq!(m.max_drift[0], 0.0);
    }

    #[test]
    fn domain_error_terminates() {
        let c = DarbouxChart::new(1).unwrap();
        // dq/ds = 1, blows up at q = 1 through 1/(1-q) in the momentum slot
        let h = JetField::new(c, "h", |x| &x[2] + (1.0 - &x[1]).ln() * 0.0 + (1.0 - &x[1]).recip() * 0.0);
        let tr = integrate(FieldKind::Hamiltonian, &h, &[0.0, 0.0, 0.0], 0.0, 2.0, &IntegratorConfig::rk4(0.01)).unwrap();
        assert!(matches!(tr.termination, Termination::DomainError(_)));
    }

    #[test]
    fn evolution_requires_consistent_start() {
        let h = osc();
        assert!(integrate(FieldKind::Evolution, &h, &[1.0, 1.0, 0.0], 0.0, 1.0, &IntegratorConfig::rk4(0.1)).is_err());
    }

    #[test]
    fn csv_header() {
        let h = osc();
        let tr = integrate(FieldKind::Evolution, &h, &[0.0, 1.0, 0.0], 0.0, 0.1, &IntegratorConfig::rk4(0.05)).unwrap();
        let csv = tr.to_csv(h.chart().labels());
        assert!(csv.starts_with("s,t,q1,p1\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}
