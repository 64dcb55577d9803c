//! The registry of built-in systems.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::config::Config;
use crate::chart::DarbouxChart;
use crate::equilibria::chebyshev_grid;
use crate::error::Result;
use crate::field::{Field, JetField};
use crate::polynomial::{parse, PolynomialField};
use crate::quantum::{
    pauli_basis, quantum_chart, schrodinger_field, u1_action, Envelope, HermitianPath, QuadraticField,
};
use crate::symmetry::{LieAlgebraSpec, SymmetryAction};
use crate::threebody::{self, ThreeBodyParams};

#[derive(Clone, Debug)]
pub enum SystemKind {
    /// `h = 1/2 B(t) (q^2 + p^2)`, no symmetry.
    Harmonic { envelope: Envelope },
    TwoLevel { path: HermitianPath },
    NLevel { path: HermitianPath },
    ThreeBody { params: ThreeBodyParams },
    Custom,
}

impl SystemKind {
    pub fn name(&self) -> &'static str {
        match self {
            SystemKind::Harmonic { .. } => "harmonic",
            SystemKind::TwoLevel { .. } => "two_level",
            SystemKind::NLevel { .. } => "n_level",
            SystemKind::ThreeBody { .. } => "three_body",
            SystemKind::Custom => "custom_polynomial",
        }
    }

    pub fn path(&self) -> Option<&HermitianPath> {
        match self {
            SystemKind::TwoLevel { path } | SystemKind::NLevel { path } => Some(path),
            _ => None,
        }
    }
}

pub struct System {
    pub kind: SystemKind,
    pub chart: DarbouxChart,
    pub h: Field,
    pub action: SymmetryAction,
    /// Extra first integrals to monitor (besides `h` and `J`).
    pub integrals: Vec<Field>,
    pub t0: f64,
    pub t1: f64,
    pub grid: Vec<f64>,
    /// Spatial initial state / Newton guess defaults.
    pub initial: Vec<f64>,
    pub guess: Vec<f64>,
}

fn envelope(cfg: &Config) -> Result<Envelope> {
    let kind = cfg.get("envelope").unwrap_or("constant");
    Ok(match kind {
        "constant" => Envelope::Constant(cfg.f64_or("envelope.value", 1.0)?),
        "modulated" => Envelope::Modulated {
            a: cfg.f64_or("envelope.a", 0.5)?,
            b: cfg.f64_or("envelope.b", 1.0)?,
        },
        "decaying" => Envelope::Decaying {
            a: cfg.f64_or("envelope.a", 0.5)?,
            b: cfg.f64_or("envelope.b", 1.0)?,
        },
        "sinusoid" => Envelope::Sinusoid {
            amplitude: cfg.f64_or("envelope.amplitude", 1.0)?,
            frequency: cfg.f64_or("envelope.frequency", 1.0)?,
            phase: cfg.f64_or("envelope.phase", 0.0)?,
        },
        other => return Err(cfg.invalid("envelope", format!("unknown envelope `{other}`"))),
    })
}

fn pauli_combination(b: &[f64]) -> DMatrix<Complex64> {
    let basis = pauli_basis();
    let mut a = DMatrix::zeros(2, 2);
    for (bk, m) in b.iter().zip(&basis) {
        a += m * Complex64::new(*bk, 0.0);
    }
    a
}

fn four(cfg: &Config, key: &str, default: [f64; 4]) -> Result<[f64; 4]> {
    match cfg.list(key)? {
        None => Ok(default),
        Some(v) => v
            .try_into()
            .map_err(|v: Vec<f64>| cfg.invalid(key, format!("expected 4 entries, got {}", v.len()))),
    }
}

pub fn build(cfg: &Config) -> Result<System> {
    let name = cfg.require("system")?;
    let t0 = cfg.f64_or("time.start", 0.0)?;
    let t1 = cfg.f64_or("time.end", 10.0)?;
    if !(t1 > t0) {
        return Err(cfg.invalid("time.end", "must exceed time.start"));
    }
    let points = cfg.usize_or("grid.points", 9)?;
    if points == 0 {
        return Err(cfg.invalid("grid.points", "empty time grid"));
    }
    let grid = if points == 1 { vec![t0] } else { chebyshev_grid(t0, t1, points) };

    let (kind, chart, h, mut action, integrals, initial, guess): (_, _, Field, _, Vec<Field>, Vec<f64>, Vec<f64>) =
        match name {
            "harmonic" => {
                let env = envelope(cfg)?;
                let chart = DarbouxChart::new(1)?;
                let q = DMatrix::identity(2, 2);
                let h = QuadraticField::new(chart.clone(), "h", vec![(env, q)])?.into_field();
                let action = SymmetryAction::trivial(chart.clone());
                (SystemKind::Harmonic { envelope: env }, chart, h, action, vec![], vec![1.0, 0.0], vec![0.0, 0.0])
            }
            "two_level" => {
                let env = envelope(cfg)?;
                let b = four(cfg, "two_level.b", [0.0, 0.0, 0.0, 1.0])?;
                let mut terms = vec![(env, pauli_combination(&b))];
                if cfg.get("drive.b").is_some() {
                    let d = four(cfg, "drive.b", [0.0; 4])?;
                    let denv = Envelope::Sinusoid {
                        amplitude: cfg.f64_or("drive.amplitude", 1.0)?,
                        frequency: cfg.f64_or("drive.frequency", 1.0)?,
                        phase: cfg.f64_or("drive.phase", 0.0)?,
                    };
                    terms.push((denv, pauli_combination(&d)));
                }
                let path = HermitianPath::new(terms)?;
                let h = schrodinger_field(&path)?;
                let guess = vec![1.0, 0.0, 0.0, 0.0];
                let initial = vec![0.6, 0.8 * FRAC_1_SQRT_2, 0.0, 0.8 * FRAC_1_SQRT_2];
                (SystemKind::TwoLevel { path }, quantum_chart(2)?, h, u1_action(2)?, vec![], initial, guess)
            }
            "n_level" => {
                let env = envelope(cfg)?;
                let diag = cfg.list("n_level.diag")?.unwrap_or_else(|| vec![1.0, 2.0, 3.0]);
                let n = diag.len();
                let a = DMatrix::from_fn(n, n, |i, j| Complex64::new(if i == j { diag[i] } else { 0.0 }, 0.0));
                let path = HermitianPath::new(vec![(env, a)])?;
                let h = schrodinger_field(&path)?;
                let mut guess = vec![0.0; 2 * n];
                guess[0] = 1.0;
                let initial: Vec<f64> = (0..2 * n).map(|i| if i < n { (n as f64).sqrt().recip() } else { 0.0 }).collect();
                (SystemKind::NLevel { path }, quantum_chart(n)?, h, u1_action(n)?, vec![], initial, guess)
            }
            "three_body" => {
                let mu = cfg.f64_or("three_body.mu", 0.99)?;
                let varpi = cfg.f64_or("three_body.varpi", 1.0)?;
                let params = ThreeBodyParams::new(mu, varpi)
                    .map_err(|e| cfg.invalid("three_body.mu", e.to_string()))?
                    .with_guard(cfg.f64_or("three_body.guard", 1e-6)?);
                let chart = threebody::chart();
                let h = threebody::hamiltonian(&params);
                let action = SymmetryAction::trivial(chart.clone());
                // near L4: the equilateral point nudged outwards
                let r = (1.0 - mu * (1.0 - mu)).sqrt();
                let delta = ((mu - 0.5) / r).acos();
                let r0 = r + 1e-3;
                let initial = vec![r0, varpi * t0 + delta, 0.0, varpi * r0 * r0];
                let integrals = vec![jacobi_integral(&params)];
                (SystemKind::ThreeBody { params }, chart, h, action, integrals, initial, vec![])
            }
            "custom_polynomial" => {
                let n = cfg.usize_or("custom.n", 1)?;
                let chart = DarbouxChart::new(n).map_err(|e| cfg.invalid("custom.n", e.to_string()))?;
                let src = cfg.require("custom.h")?;
                let poly = parse(&chart, src).map_err(|e| cfg.invalid("custom.h", e.to_string()))?;
                let h = PolynomialField::new(chart.clone(), "h", poly)?.into_field();
                let action = SymmetryAction::trivial(chart.clone());
                let initial = cfg.list("initial")?.ok_or_else(|| cfg.invalid("initial", "required"))?;
                (SystemKind::Custom, chart.clone(), h, action, vec![], initial, vec![0.0; 2 * n])
            }
            other => return Err(cfg.invalid("system", format!("unknown system `{other}`"))),
        };

    if let Some(src) = cfg.get("symmetry.momentum") {
        let poly = parse(&chart, src).map_err(|e| cfg.invalid("symmetry.momentum", e.to_string()))?;
        let j = PolynomialField::new(chart.clone(), "J", poly)?.into_field();
        action = SymmetryAction::new(LieAlgebraSpec::abelian(1), vec![j], chart.clone())?;
    }
    let dim = chart.dim() - 1;
    let initial = match cfg.list("initial")? {
        Some(v) if v.len() != dim => {
            return Err(cfg.invalid("initial", format!("expected {dim} entries, got {}", v.len())))
        }
        Some(v) => v,
        None => initial,
    };
    let guess = match cfg.list("rep.guess")? {
        Some(v) if v.len() != dim => {
            return Err(cfg.invalid("rep.guess", format!("expected {dim} entries, got {}", v.len())))
        }
        Some(v) => v,
        None => guess,
    };
    Ok(System {
        kind,
        chart,
        h,
        action,
        integrals,
        t0,
        t1,
        grid,
        initial,
        guess,
    })
}

/// `pi* k = h - varpi p_phi`, the rotating-frame energy on the ambient chart.
pub fn jacobi_integral(params: &ThreeBodyParams) -> Field {
    let h = threebody::hamiltonian(params);
    let w = params.varpi;
    JetField::fallible(threebody::chart(), "k", move |x| Ok(&h.eval_jet(x)? - &(&x[4] * w))).into_field()
}
