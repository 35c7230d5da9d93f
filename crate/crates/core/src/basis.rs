use std::fmt;

/// Polynomial `sum c xi1^p xi2^q` in intrinsic coordinates, used as the
/// density multiplying a kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    terms: Vec<(f64, u32, u32)>,
}

impl Polynomial {
    pub fn new(terms: Vec<(f64, u32, u32)>) -> Self {
        Polynomial { terms }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![(c, 0, 0)])
    }

    pub fn monomial(p: u32, q: u32) -> Self {
        Polynomial::new(vec![(1.0, p, q)])
    }

    /// The six monomials of total degree at most two, ordered
    /// `1, xi1, xi2, xi1^2, xi1 xi2, xi2^2`.
    pub fn quadratic_monomials() -> [Polynomial; 6] {
        [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)].map(|(p, q)| Polynomial::monomial(p, q))
    }

    pub fn terms(&self) -> &[(f64, u32, u32)] {
        &self.terms
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Polynomial, b: f64) -> Polynomial {
        let mut terms: Vec<_> = self.terms.iter().map(|&(c, p, q)| (a * c, p, q)).collect();
        terms.extend(other.terms.iter().map(|&(c, p, q)| (b * c, p, q)));
        Polynomial { terms }
    }

    pub fn value(&self, xi: [f64; 2]) -> f64 {
        self.terms
            .iter()
            .map(|&(c, p, q)| c * xi[0].powi(p as i32) * xi[1].powi(q as i32))
            .sum()
    }

    pub fn gradient(&self, xi: [f64; 2]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for &(c, p, q) in &self.terms {
            if p > 0 {
                g[0] += c * p as f64 * xi[0].powi(p as i32 - 1) * xi[1].powi(q as i32);
            }
            if q > 0 {
                g[1] += c * q as f64 * xi[0].powi(p as i32) * xi[1].powi(q as i32 - 1);
            }
        }
        g
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|&(c, p, q)| format!("{c}*xi1^{p}*xi2^{q}"))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}
