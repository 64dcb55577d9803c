//! Exact multivariate polynomials over chart coordinates.
//!
//! Used for user-defined systems and as an exact oracle for bracket
//! identities: the Poisson bracket of two polynomials is again a polynomial,
//! computed symbolically.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;

use crate::chart::DarbouxChart;
use crate::error::{check_dim, Error, Result};
use crate::field::{Field, ScalarField};
use crate::jet::Jet2;

/// Sparse polynomial: exponent vector -> coefficient.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, 1.0);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &f64)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: f64) {
        assert_eq!(exps.len(), self.nvars);
        if c == 0.0 {
            return;
        }
        let e = self.terms.entry(exps.clone()).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.terms.remove(&exps);
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * k);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                out.add_term(e2, c * e[i] as f64);
            }
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(x).map(|(k, v)| v.powi(*k as i32)).product::<f64>())
            .sum()
    }

    pub fn eval_jet(&self, x: &[Jet2]) -> Jet2 {
        let dim = x.first().map_or(0, Jet2::dim);
        let mut acc = Jet2::constant(dim, 0.0);
        for (e, c) in &self.terms {
            let mut m = Jet2::constant(dim, *c);
            for (k, xi) in e.iter().zip(x) {
                if *k > 0 {
                    m = &m * &xi.powi(*k as i32);
                }
            }
            acc += &m;
        }
        acc
    }

    /// Largest absolute coefficient.
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Random polynomial with up to `nterms` monomials of total degree at most
    /// `max_degree`, coefficients uniform in `[-1, 1]`.
    pub fn random(nvars: usize, max_degree: u32, nterms: usize, rng: &mut impl Rng) -> Self {
        let mut p = Self::zero(nvars);
        for _ in 0..nterms {
            let deg = rng.gen_range(0..=max_degree);
            let mut e = vec![0u32; nvars];
            for _ in 0..deg {
                e[rng.gen_range(0..nvars)] += 1;
            }
            p.add_term(e, rng.gen_range(-1.0..1.0));
        }
        p
    }
}

/// Symbolic Poisson bracket `{f, g} = sum f_q g_p - f_p g_q` on a chart.
pub fn bracket(chart: &DarbouxChart, f: &Polynomial, g: &Polynomial) -> Polynomial {
    let mut out = Polynomial::zero(chart.dim());
    for i in 0..chart.n() {
        let (q, p) = (chart.q(i), chart.p(i));
        out = out
            .add(&f.derivative(q).mul(&g.derivative(p)))
            .sub(&f.derivative(p).mul(&g.derivative(q)));
    }
    out
}

/// A polynomial viewed as a scalar field.
#[derive(Clone, Debug)]
pub struct PolynomialField {
    chart: DarbouxChart,
    name: String,
    poly: Polynomial,
}

impl PolynomialField {
    pub fn new(chart: DarbouxChart, name: impl Into<String>, poly: Polynomial) -> Result<Self> {
        check_dim(chart.dim(), poly.nvars())?;
        if poly.terms.values().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite polynomial coefficient".into()));
        }
        Ok(PolynomialField {
            chart,
            name: name.into(),
            poly,
        })
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn into_field(self) -> Field {
        Arc::new(self)
    }
}

impl ScalarField for PolynomialField {
    fn chart(&self) -> &DarbouxChart {
        &self.chart
    }
    fn name(&self) -> &str {
        &self.name
    }
    fn eval_jet(&self, x: &[Jet2]) -> Result<Jet2> {
        check_dim(self.chart.dim(), x.len())?;
        Ok(self.poly.eval_jet(x))
    }
}

/// Parses a polynomial such as `0.5*q1^2 + 0.5*p1^2 - 2*t*q1` over the chart
/// labels. Terms are products of a numeric coefficient and `label^k` factors.
pub fn parse(chart: &DarbouxChart, src: &str) -> Result<Polynomial> {
    let nv = chart.dim();
    let mut poly = Polynomial::zero(nv);
    let cleaned: String = src.chars().filter(|c| !c.is_whitespace()).collect();
    if cleaned.is_empty() {
        return Err(Error::InvalidInput("empty polynomial".into()));
    }
    // split on top-level + / - while keeping exponent signs out (exponents are
    // non-negative integers, so every sign starts a new term unless it follows
    // an 'e' in scientific notation)
    let mut terms: Vec<String> = Vec::new();
    let mut cur = String::new();
    let chars: Vec<char> = cleaned.chars().collect();
    for (i, &ch) in chars.iter().enumerate() {
        let sci = i > 0 && matches!(chars[i - 1], 'e' | 'E') && i > 1 && chars[i - 2].is_ascii_digit();
        if (ch == '+' || ch == '-') && !cur.is_empty() && !sci {
            terms.push(std::mem::take(&mut cur));
        }
        cur.push(ch);
    }
    terms.push(cur);

    for term in terms {
        let (sign, body) = match term.strip_prefix('-') {
            Some(b) => (-1.0, b),
            None => (1.0, term.strip_prefix('+').unwrap_or(&term)),
        };
        let mut coeff = sign;
        let mut exps = vec![0u32; nv];
        for factor in body.split('*') {
            if factor.is_empty() {
                return Err(Error::InvalidInput(format!("malformed term `{term}`")));
            }
            if let Ok(v) = factor.parse::<f64>() {
                coeff *= v;
                continue;
            }
            let (name, pow) = match factor.split_once('^') {
                Some((n, k)) => (
                    n,
                    k.parse::<u32>()
                        .map_err(|_| Error::InvalidInput(format!("bad exponent in `{factor}`")))?,
                ),
                None => (factor, 1),
            };
            let idx = chart
                .labels()
                .iter()
                .position(|l| l == name)
                .ok_or_else(|| Error::InvalidInput(format!("unknown variable `{name}`")))?;
            exps[idx] += pow;
        }
        poly.add_term(exps, coeff);
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_evaluate() {
        let chart = DarbouxChart::new(1).unwrap();
        let p = parse(&chart, "0.5*q1^2 + 0.5*p1^2 - 2*t*q1 + 1e-3").unwrap();
        let v = p.eval(&[2.0, 1.0, 3.0]);
        assert!((v - (0.5 + 4.5 - 4.0 + 1e-3)).abs() < 1e-15);
        assert!(parse(&chart, "x^2").is_err());
    }

    #[test]
    fn jet_evaluation_matches_symbolic_derivatives() {
        let chart = DarbouxChart::new(2).unwrap();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        let p = Polynomial::random(5, 4, 8, &mut rng);
        let x = [0.3, -0.2, 0.9, 0.0, 1.4];
        let j = p.eval_jet(&Jet2::variables(&x));
        for i in 0..5 {
            assert!((j.grad[i] - p.derivative(i).eval(&x)).abs() < 1e-12);
            for k in 0..5 {
                let s = p.derivative(i).derivative(k).eval(&x);
                assert!((j.hess_at(i, k) - s).abs() < 1e-12);
            }
        }
        let _ = chart;
    }

    #[test]
    fn canonical_bracket() {
        let chart = DarbouxChart::new(1).unwrap();
        let b = bracket(&chart, &Polynomial::var(3, 1), &Polynomial::var(3, 2));
        assert_eq!(b, Polynomial::constant(3, 1.0));
    }
}
