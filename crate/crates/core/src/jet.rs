//! Second-order truncated Taylor arithmetic.
//!
//! A [`Jet2`] carries the value, gradient and Hessian of a scalar with respect
//! to a fixed set of independent variables. Arithmetic propagates all three
//! exactly (up to rounding), so Hessians of smooth closed-form fields come out
//! at machine precision instead of through finite differences.
//!
//! ```
//! use cosymplectic::jet::Jet2;
//! let x = Jet2::variable(2, 0, 3.0);
//! let y = Jet2::variable(2, 1, 2.0);
//! let f = &x * &x * &y; // x^2 y
//! assert_eq!(f.value, 18.0);
//! assert_eq!(f.grad, vec![12.0, 9.0]);
//! assert_eq!(f.hess_at(0, 0), 4.0);
//! assert_eq!(f.hess_at(0, 1), 6.0);
//! ```

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: Vec<f64>,
    /// Row-major `dim x dim` Hessian.
    pub hess: Vec<f64>,
}

impl Jet2 {
    pub fn constant(dim: usize, value: f64) -> Self {
        Jet2 {
            value,
            grad: vec![0.0; dim],
            hess: vec![0.0; dim * dim],
        }
    }

    /// The coordinate function `x_index` evaluated at `value`.
    pub fn variable(dim: usize, index: usize, value: f64) -> Self {
        let mut j = Self::constant(dim, value);
        j.grad[index] = 1.0;
        j
    }

    /// Independent variables seeded at `point`.
    pub fn variables(point: &[f64]) -> Vec<Jet2> {
        let n = point.len();
        point
            .iter()
            .enumerate()
            .map(|(i, &x)| Jet2::variable(n, i, x))
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    #[inline]
    pub fn hess_at(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim() + j]
    }

    pub fn gradient(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.grad)
    }

    pub fn hessian(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_row_slice(n, n, &self.hess)
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|g| g.is_finite())
            && self.hess.iter().all(|h| h.is_finite())
    }

    /// Applies a scalar function `g` given `g(a)`, `g'(a)`, `g''(a)`.
    pub fn chain(&self, g0: f64, g1: f64, g2: f64) -> Jet2 {
        let n = self.dim();
        let mut out = Jet2 {
            value: g0,
            grad: self.grad.iter().map(|d| g1 * d).collect(),
            hess: vec![0.0; n * n],
        };
        for i in 0..n {
            for j in 0..n {
                out.hess[i * n + j] =
                    g1 * self.hess[i * n + j] + g2 * self.grad[i] * self.grad[j];
            }
        }
        out
    }

    pub fn sqrt(&self) -> Jet2 {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.value))
    }

    pub fn recip(&self) -> Jet2 {
        let v = self.value;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    pub fn powi(&self, k: i32) -> Jet2 {
        match k {
            0 => return Jet2::constant(self.dim(), 1.0),
            1 => return self.clone(),
            _ => {}
        }
        let v = self.value;
        let kf = k as f64;
        self.chain(
            v.powi(k),
            kf * v.powi(k - 1),
            kf * (kf - 1.0) * v.powi(k - 2),
        )
    }

    pub fn powf(&self, k: f64) -> Jet2 {
        let v = self.value;
        self.chain(v.powf(k), k * v.powf(k - 1.0), k * (k - 1.0) * v.powf(k - 2.0))
    }

    pub fn sin(&self) -> Jet2 {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Jet2 {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn exp(&self) -> Jet2 {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Jet2 {
        let v = self.value;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    pub fn scale(&self, k: f64) -> Jet2 {
        Jet2 {
            value: k * self.value,
            grad: self.grad.iter().map(|g| k * g).collect(),
            hess: self.hess.iter().map(|h| k * h).collect(),
        }
    }

    /// Composes an outer jet (taken w.r.t. variables `y`) with inner jets
    /// `y_i(u)`, returning the jet of the composite w.r.t. `u`.
    pub fn compose(outer: &Jet2, inner: &[Jet2]) -> Jet2 {
        assert_eq!(outer.dim(), inner.len(), "compose: arity mismatch");
        let m = inner.first().map_or(0, Jet2::dim);
        let mut out = Jet2::constant(m, outer.value);
        for (i, yi) in inner.iter().enumerate() {
            let gi = outer.grad[i];
            for a in 0..m {
                out.grad[a] += gi * yi.grad[a];
                for b in 0..m {
                    out.hess[a * m + b] += gi * yi.hess[a * m + b];
                }
            }
        }
        let k = inner.len();
        for i in 0..k {
            for j in 0..k {
                let hij = outer.hess[i * k + j];
                if hij == 0.0 {
                    continue;
                }
                for a in 0..m {
                    let ga = inner[i].grad[a] * hij;
                    for b in 0..m {
                        out.hess[a * m + b] += ga * inner[j].grad[b];
                    }
                }
            }
        }
        out
    }

    fn mul_ref(&self, rhs: &Jet2) -> Jet2 {
        let n = self.dim();
        let (a, b) = (self.value, rhs.value);
        let mut out = Jet2 {
            value: a * b,
            grad: (0..n).map(|i| a * rhs.grad[i] + b * self.grad[i]).collect(),
            hess: vec![0.0; n * n],
        };
        for i in 0..n {
            for j in 0..n {
                out.hess[i * n + j] = a * rhs.hess[i * n + j]
                    + b * self.hess[i * n + j]
                    + self.grad[i] * rhs.grad[j]
                    + rhs.grad[i] * self.grad[j];
            }
        }
        out
    }

    fn zip(&self, rhs: &Jet2, f: impl Fn(f64, f64) -> f64) -> Jet2 {
        Jet2 {
            value: f(self.value, rhs.value),
            grad: self.grad.iter().zip(&rhs.grad).map(|(x, y)| f(*x, *y)).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(x, y)| f(*x, *y)).collect(),
        }
    }
}

impl Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Jet2> for &Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: &Jet2) -> Jet2 {
                let f: fn(&Jet2, &Jet2) -> Jet2 = $body;
                f(self, rhs)
            }
        }
        impl $trait<Jet2> for Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: Jet2) -> Jet2 {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Jet2> for Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: &Jet2) -> Jet2 {
                (&self).$method(rhs)
            }
        }
        impl $trait<Jet2> for &Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: Jet2) -> Jet2 {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| a.zip(b, |x, y| x + y));
binop!(Sub, sub, |a, b| a.zip(b, |x, y| x - y));
binop!(Mul, mul, |a, b| a.mul_ref(b));
binop!(Div, div, |a, b| a.mul_ref(&b.recip()));

macro_rules! scalar_op {
    ($trait:ident, $method:ident, $jet:ident, $k:ident, $body:expr) => {
        impl $trait<f64> for &Jet2 {
            type Output = Jet2;
            fn $method(self, $k: f64) -> Jet2 {
                let $jet = self;
                $body
            }
        }
        impl $trait<f64> for Jet2 {
            type Output = Jet2;
            fn $method(self, $k: f64) -> Jet2 {
                let $jet = &self;
                $body
            }
        }
    };
}

scalar_op!(Add, add, j, k, {
    let mut o = j.clone();
    o.value += k;
    o
});
scalar_op!(Sub, sub, j, k, {
    let mut o = j.clone();
    o.value -= k;
    o
});
scalar_op!(Mul, mul, j, k, j.scale(k));
scalar_op!(Div, div, j, k, j.scale(1.0 / k));

impl Mul<&Jet2> for f64 {
    type Output = Jet2;
    fn mul(self, rhs: &Jet2) -> Jet2 {
        rhs.scale(self)
    }
}

impl Mul<Jet2> for f64 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        rhs.scale(self)
    }
}

impl Sub<&Jet2> for f64 {
    type Output = Jet2;
    fn sub(self, rhs: &Jet2) -> Jet2 {
        -rhs + self
    }
}

impl AddAssign<&Jet2> for Jet2 {
    fn add_assign(&mut self, rhs: &Jet2) {
        self.value += rhs.value;
        for (a, b) in self.grad.iter_mut().zip(&rhs.grad) {
            *a += b;
        }
        for (a, b) in self.hess.iter_mut().zip(&rhs.hess) {
            *a += b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: impl Fn(&[Jet2]) -> Jet2, x: &[f64]) {
        let jet = f(&Jet2::variables(x));
        let val = |p: &[f64]| f(&Jet2::variables(p)).value;
        let h = 1e-4;
        for i in 0..x.len() {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            let g = (val(&xp) - val(&xm)) / (2.0 * h);
            assert!((g - jet.grad[i]).abs() <= 1e-6 * (1.0 + g.abs()), "grad {i}");
            for j in 0..x.len() {
                let gp = f(&Jet2::variables(&xp)).grad[j];
                let gm = f(&Jet2::variables(&xm)).grad[j];
                let hij = (gp - gm) / (2.0 * h);
                assert!(
                    (hij - jet.hess_at(i, j)).abs() <= 1e-6 * (1.0 + hij.abs()),
                    "hess {i}{j}: {hij} vs {}",
                    jet.hess_at(i, j)
                );
            }
        }
    }

    #[test]
    fn elementary_functions_match_finite_differences() {
        fd_check(
            |v| (&v[0] * &v[1]).sin() + v[2].exp() / (&v[0] * &v[0] + 1.0).sqrt(),
            &[0.3, -1.2, 0.4],
        );
        fd_check(|v| v[0].powi(3) * v[1].cos() - v[1].ln() * 2.0, &[1.1, 0.7]);
        fd_check(|v| (&v[0] + &v[1]).powf(-1.5), &[0.6, 0.9]);
    }

    #[test]
    fn hessian_is_symmetric() {
        let v = Jet2::variables(&[0.2, 0.5, -0.3]);
        let f = (&v[0] * &v[1] * &v[2]).exp() / (&v[1] + 2.0);
        let h = f.hessian();
        assert!((&h - h.transpose()).amax() <= 1e-12 * h.amax());
    }

    #[test]
    fn composition_matches_direct_evaluation() {
        // outer g(y0, y1) = y0^2 y1, inner y = (sin u, u v)
        let u = [0.4, 1.3];
        let uv = Jet2::variables(&u);
        let inner = vec![uv[0].sin(), &uv[0] * &uv[1]];
        let yv: Vec<f64> = inner.iter().map(|j| j.value).collect();
        let y = Jet2::variables(&yv);
        let outer = &y[0] * &y[0] * &y[1];
        let composed = Jet2::compose(&outer, &inner);
        let direct = &inner[0] * &inner[0] * &inner[1];
        assert!((composed.value - direct.value).abs() < 1e-15);
        for (a, b) in composed.hess.iter().zip(&direct.hess) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
