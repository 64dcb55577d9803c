//! Real univariate polynomials and positive-root isolation by a uniform
//! sign-change scan, bisection and Newton polishing.

use std::fmt::Write as _;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// `sum_k c[k] r^k` (ascending coefficients).
#[derive(Clone, Debug, PartialEq)]
pub struct UPoly {
    pub coeffs: Vec<f64>,
}

impl UPoly {
    pub fn new(ascending: Vec<f64>) -> Self {
        let mut p = UPoly { coeffs: ascending };
        p.trim();
        p
    }

    /// From coefficients listed highest degree first.
    pub fn from_descending(c: &[f64]) -> Self {
        UPoly::new(c.iter().rev().copied().collect())
    }

    /// `(r - a)`.
    pub fn linear(a: f64) -> Self {
        UPoly::new(vec![-a, 1.0])
    }

    pub fn constant(c: f64) -> Self {
        UPoly::new(vec![c])
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && self.coeffs.last() == Some(&0.0) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(0.0);
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn descending(&self) -> Vec<f64> {
        self.coeffs.iter().rev().copied().collect()
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c)
    }

    pub fn derivative(&self) -> UPoly {
        if self.coeffs.len() <= 1 {
            return UPoly::constant(0.0);
        }
        UPoly::new(self.coeffs.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect())
    }

    pub fn scale(&self, k: f64) -> UPoly {
        UPoly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn powi(&self, k: u32) -> UPoly {
        (0..k).fold(UPoly::constant(1.0), |acc, _| &acc * self)
    }
}

impl Add for &UPoly {
    type Output = UPoly;
    fn add(self, o: &UPoly) -> UPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        UPoly::new(
            (0..n)
                .map(|k| self.coeffs.get(k).unwrap_or(&0.0) + o.coeffs.get(k).unwrap_or(&0.0))
                .collect(),
        )
    }
}

impl Sub for &UPoly {
    type Output = UPoly;
    fn sub(self, o: &UPoly) -> UPoly {
        self + &o.scale(-1.0)
    }
}

impl Mul for &UPoly {
    type Output = UPoly;
    fn mul(self, o: &UPoly) -> UPoly {
        let mut c = vec![0.0; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        UPoly::new(c)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RootScan {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    /// Bisection stops at this bracket width.
    pub width: f64,
}

impl Default for RootScan {
    fn default() -> Self {
        RootScan {
            lo: 1e-3,
            hi: 3.0,
            step: 1e-3,
            width: 1e-13,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub r: f64,
    /// `|P(r)|` after polishing.
    pub residual: f64,
    pub bracket: (f64, f64),
}

/// Grid points at which the scan detected sign changes.
pub fn sign_changes(p: &UPoly, scan: &RootScan) -> Vec<(f64, f64)> {
    let n = ((scan.hi - scan.lo) / scan.step).round() as usize;
    let mut out = Vec::new();
    let mut a = scan.lo;
    let mut fa = p.eval(a);
    for k in 1..=n {
        let b = scan.lo + k as f64 * scan.step;
        let fb = p.eval(b);
        if fa == 0.0 {
            out.push((a, a));
        } else if fa * fb < 0.0 {
            out.push((a, b));
        }
        a = b;
        fa = fb;
    }
    if fa == 0.0 {
        out.push((a, a));
    }
    out
}

fn bisect(p: &UPoly, mut a: f64, mut b: f64, width: f64) -> (f64, f64) {
    let mut fa = p.eval(a);
    while b - a > width {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = p.eval(m);
        if fm == 0.0 {
            return (m, m);
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    (a, b)
}

fn polish(p: &UPoly, dp: &UPoly, r0: f64, bracket: (f64, f64)) -> f64 {
    let mut r = r0;
    let mut best = p.eval(r).abs();
    for _ in 0..8 {
        let d = dp.eval(r);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = r - p.eval(r) / d;
        let f = p.eval(next).abs();
        if !(next >= bracket.0 - 1e-12 && next <= bracket.1 + 1e-12) || !(f < best) {
            break;
        }
        r = next;
        best = f;
    }
    r
}

/// All roots of `p` on `[scan.lo, scan.hi]` found by sign changes, in
/// ascending order. Roots of even multiplicity are not detected.
pub fn positive_roots(p: &UPoly, scan: &RootScan) -> Vec<Root> {
    let dp = p.derivative();
    sign_changes(p, scan)
        .into_iter()
        .map(|(a, b)| {
            let (lo, hi) = bisect(p, a, b, scan.width);
            let mid = 0.5 * (lo + hi);
            let r = polish(p, &dp, mid, (a, b));
            Root {
                r,
                residual: p.eval(r).abs(),
                bracket: (lo, hi),
            }
        })
        .collect()
}

/// The root closest to `target`, or [`Error::NoBracket`] with the scan trace.
pub fn root_near(p: &UPoly, scan: &RootScan, target: f64) -> Result<Root> {
    let roots = positive_roots(p, scan);
    roots
        .iter()
        .copied()
        .min_by(|a, b| (a.r - target).abs().total_cmp(&(b.r - target).abs()))
        .ok_or_else(|| Error::NoBracket { trace: scan_trace(p, scan) })
}

/// A compact description of the scan: endpoints, values and extremes.
pub fn scan_trace(p: &UPoly, scan: &RootScan) -> String {
    let n = ((scan.hi - scan.lo) / scan.step).round() as usize;
    let vals: Vec<f64> = (0..=n).map(|k| p.eval(scan.lo + k as f64 * scan.step)).collect();
    let (imin, vmin) = vals
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if *v < acc.1 { (i, *v) } else { acc });
    let (imax, vmax) = vals
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });
    let mut s = String::new();
    let _ = write!(
        s,
        "scan [{}, {}] step {} over {} points: P(lo) = {:e}, P(hi) = {:e}, min {:e} at r = {}, max {:e} at r = {}, no sign change",
        scan.lo,
        scan.hi,
        scan.step,
        n + 1,
        vals[0],
        vals[n],
        vmin,
        scan.lo + imin as f64 * scan.step,
        vmax,
        scan.lo + imax as f64 * scan.step
    );
    s
}
