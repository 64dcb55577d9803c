use crate::error::{check_dim, Error, Result};

/// Cosymplectic Darboux chart on `R x R^{2n}` with layout
/// `(t, q^1..q^n, p_1..p_n)`; `omega = sum dq^i ^ dp_i`, `eta = dt`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DarbouxChart {
    n: usize,
    labels: Vec<String>,
}

impl DarbouxChart {
    /// Chart with default labels `t, q1.., p1..`.
    pub fn new(n: usize) -> Result<Self> {
        let q: Vec<String> = (1..=n).map(|i| format!("q{i}")).collect();
        let p: Vec<String> = (1..=n).map(|i| format!("p{i}")).collect();
        Self::with_labels(&q, &p)
    }

    /// Chart with custom position/momentum labels, e.g. `(r, phi)` and
    /// `(p_r, p_phi)`.
    pub fn with_labels<S: AsRef<str>>(q: &[S], p: &[S]) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::InvalidInput("chart needs n >= 1".into()));
        }
        check_dim(q.len(), p.len())?;
        let mut labels = vec!["t".to_string()];
        labels.extend(q.iter().map(|s| s.as_ref().to_string()));
        labels.extend(p.iter().map(|s| s.as_ref().to_string()));
        Ok(DarbouxChart { n: q.len(), labels })
    }

    /// Degrees of freedom.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total dimension `2n + 1`.
    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub const T: usize = 0;

    pub fn q(&self, i: usize) -> usize {
        1 + i
    }

    pub fn p(&self, i: usize) -> usize {
        1 + self.n + i
    }

    pub fn check_point(&self, point: &[f64]) -> Result<()> {
        check_dim(self.dim(), point.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let c = DarbouxChart::new(2).unwrap();
        assert_eq!(c.dim(), 5);
        assert_eq!(c.labels(), &["t", "q1", "q2", "p1", "p2"]);
        assert_eq!((c.q(1), c.p(0)), (2, 3));
        assert!(DarbouxChart::new(0).is_err());
        assert!(c.check_point(&[0.0; 4]).is_err());
    }
}
