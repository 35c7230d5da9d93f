//! Gauss-Legendre rules on intervals and the fixed triangle rules used by the
//! Nystrom discretization and the adaptive near-field integrator.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Gauss-Legendre rule on [-1, 1], generated by Newton iteration on the
/// three-term Legendre recurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = n.div_ceil(2);
        for i in 0..half {
            // Tricomi's initial guess for the i-th largest root.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Builds a rule from explicit tables (used to exercise the rule checks).
    pub fn from_tables(nodes: Vec<f64>, weights: Vec<f64>) -> Self {
        assert_eq!(nodes.len(), weights.len());
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped to [0, 1].
    pub fn unit_interval(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| (0.5 * (x + 1.0), 0.5 * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Checks that the rule integrates monomials up to degree `2n - 1` on
    /// [-1, 1]. Returns the first failing degree.
    pub fn check_exactness(&self, tol: f64) -> Result<(), String> {
        let n = self.len();
        for degree in 0..2 * n {
            let approx: f64 = self
                .nodes
                .iter()
                .zip(&self.weights)
                .map(|(&x, &w)| w * x.powi(degree as i32))
                .sum();
            let exact = if degree % 2 == 1 {
                0.0
            } else {
                2.0 / (degree as f64 + 1.0)
            };
            if (approx - exact).abs() > tol {
                return Err(format!("{n}-point rule fails on x^{degree}: {approx:e} vs {exact:e}"));
            }
        }
        Ok(())
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Shared, lazily generated Gauss-Legendre rule with `n` points.
pub fn gauss_legendre(n: usize) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(GaussLegendre::new(n)))
        .clone()
}

/// Quadrature rule on the reference triangle `xi1, xi2 >= 0, xi1 + xi2 <= 1`.
/// Weights sum to the reference area 1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Symmetric 6-point rule exact for polynomials of total degree 4; all
    /// points are strictly interior.
    pub fn six_point() -> Self {
        const A1: f64 = 0.445_948_490_915_965;
        const W1: f64 = 0.223_381_589_678_011_5;
        const A2: f64 = 0.091_576_213_509_770_74;
        const W2: f64 = 0.109_951_743_655_321_87;
        let points = vec![
            [A1, A1],
            [1.0 - 2.0 * A1, A1],
            [A1, 1.0 - 2.0 * A1],
            [A2, A2],
            [1.0 - 2.0 * A2, A2],
            [A2, 1.0 - 2.0 * A2],
        ];
        let weights = [W1, W1, W1, W2, W2, W2].iter().map(|w| 0.5 * w).collect();
        TriangleRule { points, weights }
    }

    /// Tensor Gauss rule collapsed onto the triangle: `xi1 = u`,
    /// `xi2 = v (1 - u)`, `n * n` points.
    pub fn collapsed_gauss(n: usize) -> Self {
        let g = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (u, wu) in g.unit_interval() {
            for (v, wv) in g.unit_interval() {
                points.push([u, v * (1.0 - u)]);
                weights.push(wu * wv * (1.0 - u));
            }
        }
        TriangleRule { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Exact integral of `xi1^p xi2^q` over the reference triangle:
/// `p! q! / (p + q + 2)!`.
pub fn monomial_triangle_integral(p: u32, q: u32) -> f64 {
    let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
    fact(p) * fact(q) / fact(p + q + 2)
}
