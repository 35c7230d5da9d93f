use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::quadrature::TriangleRule;

pub type Vec3 = Vector3<f64>;

/// Intrinsic coordinates of the six nodes: corners at (0,0), (0,1), (1,0),
/// then the mid-side nodes of edges 1-2, 2-3 and 3-1.
pub const NODE_COORDS: [[f64; 2]; 6] = [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, 0.5], [0.5, 0.5], [0.5, 0.0]];

/// Quadratic Lagrange basis in the node ordering of [`NODE_COORDS`].
pub fn shape_functions(xi: [f64; 2]) -> [f64; 6] {
    let l1 = 1.0 - xi[0] - xi[1];
    let l2 = xi[1];
    let l3 = xi[0];
    [
        l1 * (2.0 * l1 - 1.0),
        l2 * (2.0 * l2 - 1.0),
        l3 * (2.0 * l3 - 1.0),
        4.0 * l1 * l2,
        4.0 * l2 * l3,
        4.0 * l3 * l1,
    ]
}

/// `[dN/dxi1, dN/dxi2]` for each of the six basis functions.
pub fn shape_derivatives(xi: [f64; 2]) -> [[f64; 2]; 6] {
    let l1 = 1.0 - xi[0] - xi[1];
    let l2 = xi[1];
    let l3 = xi[0];
    [
        [1.0 - 4.0 * l1, 1.0 - 4.0 * l1],
        [0.0, 4.0 * l2 - 1.0],
        [4.0 * l3 - 1.0, 0.0],
        [-4.0 * l2, 4.0 * (l1 - l2)],
        [4.0 * l2, 4.0 * l3],
        [4.0 * (l1 - l3), -4.0 * l3],
    ]
}

// Rows: d2/dxi1^2, d2/dxi1dxi2, d2/dxi2^2 (constant for quadratic elements).
const SHAPE_SECOND: [[f64; 6]; 3] = [
    [4.0, 0.0, 4.0, 0.0, 0.0, -8.0],
    [4.0, 0.0, 0.0, -4.0, 4.0, -4.0],
    [4.0, 4.0, 0.0, -8.0, 0.0, 0.0],
];

/// Six-node curved triangle in 3-space.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvedElement {
    nodes: [Vec3; 6],
}

impl CurvedElement {
    pub fn new(nodes: [Vec3; 6]) -> Self {
        CurvedElement { nodes }
    }

    /// Builds the element and checks that its Jacobian does not vanish or
    /// flip anywhere on a sampling grid.
    pub fn try_new(nodes: [Vec3; 6]) -> Result<Self> {
        let e = CurvedElement { nodes };
        e.validate()?;
        Ok(e)
    }

    /// Straight-sided element on the plane z = 0 whose corners coincide with
    /// the reference triangle, so that `Y(xi) = (xi1, xi2, 0)`.
    pub fn flat_reference() -> Self {
        let nodes = NODE_COORDS.map(|c| Vec3::new(c[0], c[1], 0.0));
        CurvedElement { nodes }
    }

    /// Straight-sided element through three corner points, in node order.
    pub fn flat(p1: Vec3, p2: Vec3, p3: Vec3) -> Self {
        CurvedElement {
            nodes: [p1, p2, p3, 0.5 * (p1 + p2), 0.5 * (p2 + p3), 0.5 * (p3 + p1)],
        }
    }

    pub fn nodes(&self) -> &[Vec3; 6] {
        &self.nodes
    }

    pub fn map_to_physical(&self, xi: [f64; 2]) -> Vec3 {
        let n = shape_functions(xi);
        self.nodes.iter().zip(n).fold(Vec3::zeros(), |acc, (p, w)| acc + p * w)
    }

    /// `(dY/dxi1, dY/dxi2)`.
    pub fn jacobian_columns(&self, xi: [f64; 2]) -> (Vec3, Vec3) {
        let d = shape_derivatives(xi);
        let mut u1 = Vec3::zeros();
        let mut u2 = Vec3::zeros();
        for (p, dn) in self.nodes.iter().zip(d) {
            u1 += p * dn[0];
            u2 += p * dn[1];
        }
        (u1, u2)
    }

    /// `(d2Y/dxi1^2, d2Y/dxi1 dxi2, d2Y/dxi2^2)`; independent of `xi`.
    pub fn second_derivatives(&self) -> (Vec3, Vec3, Vec3) {
        let comb = |row: &[f64; 6]| {
            self.nodes
                .iter()
                .zip(row)
                .fold(Vec3::zeros(), |acc, (p, w)| acc + p * *w)
        };
        (comb(&SHAPE_SECOND[0]), comb(&SHAPE_SECOND[1]), comb(&SHAPE_SECOND[2]))
    }

    /// Unnormalized normal `U1 x U2`.
    pub fn area_vector(&self, xi: [f64; 2]) -> Vec3 {
        let (u1, u2) = self.jacobian_columns(xi);
        u1.cross(&u2)
    }

    pub fn jacobian_norm(&self, xi: [f64; 2]) -> f64 {
        self.area_vector(xi).norm()
    }

    pub fn unit_normal(&self, xi: [f64; 2]) -> Result<Vec3> {
        let j = self.area_vector(xi);
        let norm = j.norm();
        if norm <= 1e-14 * self.scale().powi(2) || !norm.is_finite() {
            return Err(Error::DegenerateElement(format!(
                "vanishing Jacobian at xi = ({}, {})",
                xi[0], xi[1]
            )));
        }
        Ok(j / norm)
    }

    /// `Y(xi_s + delta) - Y(xi_s)` evaluated from the exact second-order
    /// expansion, which keeps full relative precision as `delta -> 0`.
    pub fn offset(&self, xi_s: [f64; 2], delta: [f64; 2]) -> Vec3 {
        let (u1, u2) = self.jacobian_columns(xi_s);
        let (y11, y12, y22) = self.second_derivatives();
        let (a, b) = (delta[0], delta[1]);
        u1 * a + u2 * b + (y11 * (a * a) + y12 * (2.0 * a * b) + y22 * (b * b)) * 0.5
    }

    pub fn centroid(&self) -> Vec3 {
        self.map_to_physical([1.0 / 3.0, 1.0 / 3.0])
    }

    /// Longest corner-to-corner chord.
    pub fn diameter(&self) -> f64 {
        let [a, b, c, ..] = &self.nodes;
        (a - b).norm().max((b - c).norm()).max((c - a).norm())
    }

    fn scale(&self) -> f64 {
        self.diameter().max(f64::MIN_POSITIVE)
    }

    /// Surface area from a 64-point collapsed Gauss rule.
    pub fn area(&self) -> f64 {
        let rule = TriangleRule::collapsed_gauss(8);
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * self.jacobian_norm(*x))
            .sum()
    }

    /// Rejects elements whose Jacobian vanishes or changes orientation on a
    /// sampling grid of the reference triangle.
    pub fn validate(&self) -> Result<()> {
        let reference = self.area_vector([1.0 / 3.0, 1.0 / 3.0]);
        let tol = 1e-12 * self.scale().powi(2);
        if reference.norm() <= tol {
            return Err(Error::DegenerateElement("vanishing Jacobian at the centroid".into()));
        }
        const STEPS: usize = 8;
        for i in 0..=STEPS {
            for j in 0..=(STEPS - i) {
                let xi = [i as f64 / STEPS as f64, j as f64 / STEPS as f64];
                let jv = self.area_vector(xi);
                if jv.dot(&reference) <= tol * reference.norm() {
                    return Err(Error::DegenerateElement(format!(
                        "Jacobian vanishes or flips near xi = ({:.3}, {:.3})",
                        xi[0], xi[1]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Same element with corners 2 and 3 exchanged, which reverses the
    /// orientation of the normal.
    pub fn reversed(&self) -> Self {
        let n = &self.nodes;
        CurvedElement {
            nodes: [n[0], n[2], n[1], n[5], n[4], n[3]],
        }
    }
}
