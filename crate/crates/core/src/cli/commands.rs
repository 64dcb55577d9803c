//! The four subcommands. Each returns a finished [`Report`]; configuration
//! problems surface as `Err(Error::Config)` and map to exit code 2.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::Config;
use super::report::{write_atomic, Report};
use super::system::{System, SystemKind};
use crate::dynamics::{integrate, monitor, IntegratorConfig, Method, Termination};
use crate::equilibria::find_rep;
use crate::error::{Error, Result};
use crate::field::{coordinate, ScalarField};
use crate::geometry::{bivector_lie_derivative_fd, evolution_field, field_closure, symplectization_check, FieldKind};
use crate::quantum::{rep_eigenvector_certify, HopfChart};
use crate::stability::{classify, spectral_scan, ScanOptions};
use crate::symmetry::{cocycle_form, tangency_check, verify_momentum_map, verify_reduction};
use crate::threebody::{self, lagrange_points, lagrange_table_csv, verify_k_formula};

fn random_points(sys: &System, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            let mut x = vec![rng.gen_range(sys.t0..=sys.t1)];
            x.extend((1..sys.chart.dim()).map(|_| rng.gen_range(-1.0..=1.0)));
            x
        })
        .collect()
}

/// Samples away from the polar origin and both primaries.
fn three_body_points(sys: &System, params: &threebody::ThreeBodyParams, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = vec![
            rng.gen_range(sys.t0..=sys.t1),
            rng.gen_range(0.3..1.8),
            rng.gen_range(-PI..PI),
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-1.5..1.5),
        ];
        let (d1, d2) = params.distances(&x);
        if d1 > 0.1 && d2 > 0.1 {
            out.push(x);
        }
    }
    out
}

pub fn verify(sys: &System, cfg: &Config, report: &mut Report) -> Result<()> {
    let count = cfg.usize_or("verify.samples", 20)?.max(2);
    let tol = cfg.f64_or("verify.tol", 1e-9)?;
    let mut rng = ChaCha8Rng::seed_from_u64(report.seed);
    let pts = match &sys.kind {
        SystemKind::ThreeBody { params } => three_body_points(sys, params, count, &mut rng),
        _ => random_points(sys, count, &mut rng),
    };
    report.add("samples", pts.len());

    match verify_momentum_map(&sys.action, sys.h.as_ref(), &pts, tol) {
        Ok(mm) => {
            let max = |v: &[f64]| v.iter().fold(0.0, |m: f64, x| m.max(*x));
            report.check("momentum_map.contraction", max(&mm.contraction), tol);
            report.check("momentum_map.time_independence", max(&mm.time_independence), tol);
            report.check("momentum_map.eta", max(&mm.eta), tol);
            report.check("momentum_map.invariance", max(&mm.invariance), tol);
        }
        Err(e) => report.fail("momentum_map", e),
    }

    if sys.action.dim() > 0 {
        match cocycle_form(&sys.action, &pts) {
            Ok(c) => {
                report.check("cocycle.max_deviation", c.max_deviation, tol);
                report.check("cocycle.antisymmetry", c.antisymmetry, tol);
            }
            Err(e) => report.fail("cocycle", e),
        }
        let mut worst: f64 = 0.0;
        let mut failure = None;
        for x in pts.iter().take(10) {
            let res = sys
                .action
                .momentum(x)
                .and_then(|mu| tangency_check(&sys.action, &mu, x));
            match res {
                Ok(r) => worst = worst.max(r.angle_level_orthogonal).max(r.angle_orthogonal_orbit),
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            }
        }
        match failure {
            None => {
                report.check("tangency.max_angle", worst, tol);
            }
            Some(e) => report.fail("tangency", e),
        }
    }

    let lifted: Vec<Vec<f64>> = pts
        .iter()
        .enumerate()
        .map(|(i, x)| std::iter::once(0.1 * i as f64).chain(x.iter().copied()).collect())
        .collect();
    let q1 = coordinate(&sys.chart, 1);
    match symplectization_check(sys.h.as_ref(), q1.as_ref(), &lifted, tol) {
        Ok(s) => {
            report.check("symplectization.bracket", s.max_residual, tol);
        }
        Err(e) => report.fail("symplectization", e),
    }

    match &sys.kind {
        SystemKind::TwoLevel { .. } => {
            let mu = cfg.f64_or("reduction.mu", 0.5)?;
            let chart = HopfChart::new(mu).map_err(|e| cfg.invalid("reduction.mu", e.to_string()))?;
            let level: Vec<Vec<f64>> = (0..count)
                .map(|_| {
                    vec![
                        rng.gen_range(sys.t0..=sys.t1),
                        rng.gen_range(0.1..=FRAC_PI_2 - 0.1),
                        rng.gen_range(-PI..PI),
                        rng.gen_range(-PI..PI),
                    ]
                })
                .collect();
            match verify_reduction(&chart, &sys.action, &level, tol) {
                Ok(r) => {
                    report.check("reduction.omega", r.omega_residual, tol);
                    report.check("reduction.eta", r.eta_residual, tol);
                    report.check("reduction.level", r.level_residual, tol);
                }
                Err(e) => report.fail("reduction", e),
            }
        }
        SystemKind::ThreeBody { params } => {
            match verify_k_formula(params, &pts) {
                Ok(r) => {
                    report.check("k_formula", r, 1e-10);
                }
                Err(e) => report.fail("k_formula", e),
            }
            let ups = threebody::upsilon(params);
            let grad = field_closure(FieldKind::Gradient, ups.as_ref());
            let k = threebody::reduced_hamiltonian(params);
            let mut lie: f64 = 0.0;
            let mut push: f64 = 0.0;
            for x in &pts {
                lie = lie.max(bivector_lie_derivative_fd(&sys.chart, &grad, x, 1e-5)?.amax());
                let e = evolution_field(sys.h.as_ref(), x)?;
                let pf = threebody::pushforward(params, e.as_slice());
                let kf = crate::geometry::hamiltonian_field(k.as_ref(), &threebody::project(params, x))?;
                for i in 0..5 {
                    push = push.max((pf[i] - kf.components[i]).abs());
                }
            }
            report.check("gradient_symmetry.lie_derivative_bivector", lie, 1e-6);
            report.check("reduced_field.pushforward", push, 1e-10);
        }
        _ => {}
    }
    Ok(())
}

fn integrator(cfg: &Config) -> Result<IntegratorConfig> {
    let method: Method = cfg
        .get("integrator.method")
        .unwrap_or("rk45")
        .parse()
        .map_err(|e: Error| cfg.invalid("integrator.method", e.to_string()))?;
    let mut ic = match method {
        Method::Rk4 => IntegratorConfig::rk4(cfg.f64_or("integrator.step", 1e-2)?),
        Method::Rk45 => {
            let mut c = IntegratorConfig::rk45(cfg.f64_or("integrator.tol", 1e-10)?);
            c.step = cfg.f64_or("integrator.step", 0.0)?;
            c
        }
    };
    ic.max_steps = cfg.usize_or("integrator.max_steps", ic.max_steps)?;
    ic.validate().map_err(|e| cfg.invalid("integrator.method", e.to_string()))?;
    Ok(ic)
}

pub fn integrate_cmd(sys: &System, cfg: &Config, out: &Path, report: &mut Report) -> Result<()> {
    let mut ic = integrator(cfg)?;
    if let SystemKind::ThreeBody { params } = &sys.kind {
        ic = ic.with_guard(params.collision_guard());
    }
    let mut x0 = vec![sys.t0];
    x0.extend_from_slice(&sys.initial);
    report.add("method", format!("{:?}", ic.method).to_lowercase());
    report.add(
        "initial",
        x0.iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(","),
    );
    let traj = match integrate(FieldKind::Evolution, sys.h.as_ref(), &x0, sys.t0, sys.t1, &ic) {
        Ok(t) => t,
        Err(e) => {
            report.fail("integration", e);
            return Ok(());
        }
    };
    report.add("steps", traj.states.len() - 1);
    report.add("rejected_steps", traj.rejected_steps);
    match &traj.termination {
        Termination::Completed => report.add("termination", "completed"),
        Termination::DomainError(p) => report.fail(
            "termination",
            format!(
                "domain error (collision guard) at [{}]",
                p.iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(", ")
            ),
        ),
        other => report.fail("termination", format!("{other:?}")),
    }

    let mut fields: Vec<&dyn ScalarField> = vec![sys.h.as_ref()];
    fields.extend(sys.action.components.iter().map(|f| f.as_ref()));
    fields.extend(sys.integrals.iter().map(|f| f.as_ref()));
    let mon = match monitor(&traj, &fields) {
        Ok(m) => m,
        Err(e) => {
            report.fail("monitor", e);
            return Ok(());
        }
    };
    for (name, d) in mon.names.iter().zip(&mon.max_drift) {
        report.num(format!("drift.{name}"), *d);
    }
    if let SystemKind::Harmonic { envelope: crate::quantum::Envelope::Constant(c) } = &sys.kind {
        let a = c * (sys.t1 - sys.t0);
        let (q0, p0) = (sys.initial[0], sys.initial[1]);
        let exact = [q0 * a.cos() + p0 * a.sin(), -q0 * a.sin() + p0 * a.cos()];
        let last = traj.last();
        let err = ((last[1] - exact[0]).powi(2) + (last[2] - exact[1]).powi(2)).sqrt();
        report.num("endpoint_error", err);
    }
    write_atomic(out, "trajectory.csv", &traj.to_csv(sys.chart.labels()))?;
    write_atomic(out, "drift.csv", &mon.to_csv(&traj.s))?;
    Ok(())
}

pub fn rep_cmd(sys: &System, cfg: &Config, out: &Path, report: &mut Report) -> Result<()> {
    let tol = cfg.f64_or("rep.tol", 1e-10)?;
    report.add("grid_points", sys.grid.len());
    match &sys.kind {
        SystemKind::TwoLevel { path } | SystemKind::NLevel { path } => {
            let rays = match rep_eigenvector_certify(path, &sys.grid, tol) {
                Ok(r) => r,
                Err(e) => {
                    report.fail("certification", e);
                    Vec::new()
                }
            };
            let n = path.levels();
            let mut csv = String::from("index,eigenvalue_t0,max_residual,newton_agreement");
            for j in 1..=n {
                csv.push_str(&format!(",re{j},im{j}"));
            }
            csv.push('\n');
            for (i, ray) in rays.iter().enumerate() {
                let max_res = ray.residuals.iter().fold(0.0, |m: f64, r| m.max(*r));
                csv.push_str(&format!(
                    "{i},{:.16e},{:.6e},{:.6e}",
                    ray.eigenvalues[0], max_res, ray.agreement
                ));
                for z in &ray.vector {
                    csv.push_str(&format!(",{:.16e},{:.16e}", z.re, z.im));
                }
                csv.push('\n');
                if !ray.degenerate_times.is_empty() {
                    report.add(format!("ray{i}.degenerate_times"), ray.degenerate_times.len());
                }
            }
            report.add("certified_rays", rays.len());
            if rays.is_empty() {
                report.fail("rays", "no eigenvector ray persists across the grid");
            }
            write_atomic(out, "rep.csv", &csv)?;
        }
        SystemKind::ThreeBody { params } => match lagrange_points(params) {
            Ok(pts) => {
                for p in &pts {
                    report.check(format!("{}.residual_field", p.label), p.residual_field, 1e-8);
                }
                write_atomic(out, "rep.csv", &lagrange_table_csv(&pts))?;
            }
            Err(e) => report.fail("lagrange_points", e),
        },
        SystemKind::Harmonic { .. } | SystemKind::Custom => {
            match find_rep(sys.h.as_ref(), &sys.action, &sys.guess, &sys.grid, tol) {
                Ok(c) => {
                    report.check("max_residual", c.max_residual(), tol);
                    write_atomic(out, "candidate.txt", &c.to_text())?;
                }
                Err(e) => report.fail("find_rep", e),
            }
        }
    }
    Ok(())
}

pub fn stability_cmd(sys: &System, cfg: &Config, out: &Path, report: &mut Report) -> Result<()> {
    if let SystemKind::ThreeBody { .. } = sys.kind {
        return Err(cfg.invalid("system", "stability scans are not available for three_body"));
    }
    let tol = cfg.f64_or("rep.tol", 1e-10)?;
    let radius = cfg.f64_or("stability.radius", 0.5)?;
    if !(radius > 0.0) {
        return Err(cfg.invalid("stability.radius", "must be > 0"));
    }
    let opts = ScanOptions {
        samples: cfg.usize_or("stability.samples", 200)?.max(1),
        fd_step: cfg.f64_or("stability.fd_step", 1e-3)?,
        seed: report.seed,
    };
    let cand = match find_rep(sys.h.as_ref(), &sys.action, &sys.guess, &sys.grid, tol) {
        Ok(c) => c,
        Err(e) => {
            report.fail("find_rep", e);
            return Ok(());
        }
    };
    report.check("rep.max_residual", cand.max_residual(), tol);
    let mu = sys.action.momentum(&cand.point(sys.grid[0]))?;
    let scan = match spectral_scan(sys.h.as_ref(), &sys.action, &cand, &mu, &sys.grid, radius, &opts) {
        Ok(s) => s,
        Err(e) => {
            report.fail("spectral_scan", e);
            return Ok(());
        }
    };
    let verdict = classify(&scan);
    report.add("verdict", verdict.kind);
    report.num("inf_lambda_min", scan.inf_lambda_min);
    report.num("sup_lambda_max", scan.sup_lambda_max);
    report.num("c", scan.c);
    report.add("slice_dim", scan.slice_dim);
    write_atomic(out, "candidate.txt", &cand.to_text())?;
    write_atomic(out, "scan.csv", &scan.to_csv())?;
    write_atomic(out, "verdict.txt", &verdict.to_text())?;
    Ok(())
}

