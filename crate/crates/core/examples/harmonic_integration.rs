//! Integrate a time-dependent oscillator, check the integrator orders and
//! monitor its energy.
use std::f64::consts::TAU;

use cosymplectic::dynamics::{integrate, monitor, IntegratorConfig};
use cosymplectic::quantum::{Envelope, QuadraticField};
use cosymplectic::{DarbouxChart, FieldKind};
use nalgebra::DMatrix;

fn main() -> cosymplectic::Result<()> {
    let chart = DarbouxChart::new(1)?;
    let osc = QuadraticField::new(chart.clone(), "h", vec![(Envelope::Constant(1.0), DMatrix::identity(2, 2))])?.into_field();

    println!("rk4 endpoint error after one period:");
    for step in [0.2, 0.1, 0.05] {
        let traj = integrate(FieldKind::Evolution, osc.as_ref(), &[0.0, 1.0, 0.0], 0.0, TAU, &IntegratorConfig::rk4(step))?;
        let x = traj.last();
        println!("  h = {step:<5} error {:.3e}", ((x[1] - 1.0).powi(2) + x[2].powi(2)).sqrt());
    }
    let traj = integrate(FieldKind::Evolution, osc.as_ref(), &[0.0, 1.0, 0.0], 0.0, TAU, &IntegratorConfig::rk45(1e-12))?;
    let x = traj.last();
    println!(
        "rk45 tol 1e-12: {} steps, error {:.3e}",
        traj.s.len() - 1,
        ((x[1] - 1.0).powi(2) + x[2].powi(2)).sqrt()
    );

    // with a modulated envelope the energy is no longer conserved
    let driven = QuadraticField::new(
        chart,
        "h",
        vec![(Envelope::Modulated { a: 0.3, b: 2.0 }, DMatrix::identity(2, 2))],
    )?
    .into_field();
    let traj = integrate(FieldKind::Evolution, driven.as_ref(), &[0.0, 1.0, 0.0], 0.0, 10.0, &IntegratorConfig::rk45(1e-10))?;
    let m = monitor(&traj, &[driven.as_ref()])?;
    println!("modulated oscillator: energy varies by {:.3} over [0, 10]", m.max_drift[0]);
    Ok(())
}
