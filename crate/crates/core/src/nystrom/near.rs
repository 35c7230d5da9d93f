use num_complex::Complex64;

use crate::basis::Polynomial;
use crate::error::{Error, Result};
use crate::geometry::{CurvedElement, Vec3};
use crate::kernels::{layer_kernels, LayerOperator};
use crate::quadrature::TriangleRule;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearConfig {
    /// Relative tolerance on the change between a cell and its children.
    pub tol: f64,
    pub max_depth: u32,
    /// Cells are split while `size > size_ratio * distance`.
    pub size_ratio: f64,
    /// Points per direction of the collapsed Gauss rule on each cell.
    pub order: usize,
}

impl Default for NearConfig {
    fn default() -> Self {
        NearConfig {
            tol: 1e-10,
            max_depth: 12,
            size_ratio: 0.2,
            order: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NearResult {
    /// `values[o * bases.len() + b]`.
    pub values: Vec<Complex64>,
    /// Set when some cell hit the depth cap before converging.
    pub depth_capped: bool,
    pub cells: usize,
}

struct Integrator<'a> {
    x: &'a Vec3,
    nx: &'a Vec3,
    element: &'a CurvedElement,
    k: f64,
    ops: &'a [LayerOperator],
    bases: &'a [Polynomial],
    rule: TriangleRule,
    cfg: &'a NearConfig,
    scale: Vec<f64>,
    cells: usize,
    capped: bool,
}

type Cell = [[f64; 2]; 3];

fn split(c: &Cell) -> [Cell; 4] {
    let mid = |a: [f64; 2], b: [f64; 2]| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    let (ab, bc, ca) = (mid(c[0], c[1]), mid(c[1], c[2]), mid(c[2], c[0]));
    [[c[0], ab, ca], [ab, c[1], bc], [ca, bc, c[2]], [bc, ca, ab]]
}

impl Integrator<'_> {
    fn estimate(&mut self, cell: &Cell) -> Result<Vec<Complex64>> {
        self.cells += 1;
        let nb = self.bases.len();
        let mut out = vec![Complex64::new(0.0, 0.0); self.ops.len() * nb];
        let e1 = [cell[1][0] - cell[0][0], cell[1][1] - cell[0][1]];
        let e2 = [cell[2][0] - cell[0][0], cell[2][1] - cell[0][1]];
        let det = (e1[0] * e2[1] - e1[1] * e2[0]).abs();
        let mut phi = vec![0.0; nb];
        for (p, w) in self.rule.points.iter().zip(&self.rule.weights) {
            let xi = [
                cell[0][0] + e1[0] * p[0] + e2[0] * p[1],
                cell[0][1] + e1[1] * p[0] + e2[1] * p[1],
            ];
            let y = self.element.map_to_physical(xi);
            let d = y - self.x;
            let r = d.norm();
            if r <= 1e-14 * self.element.diameter() {
                return Err(Error::SingularEvaluation(r));
            }
            let jy = self.element.area_vector(xi);
            let jn = jy.norm();
            let kernels = layer_kernels(&d, self.nx, &(jy / jn), self.k);
            for (b, basis) in self.bases.iter().enumerate() {
                phi[b] = basis.value(xi);
            }
            let wt = w * det * jn;
            for (o, op) in self.ops.iter().enumerate() {
                let kv = kernels[op.index()] * wt;
                for b in 0..nb {
                    out[o * nb + b] += kv * phi[b];
                }
            }
        }
        Ok(out)
    }

    fn acceptable(&self, cell: &Cell) -> bool {
        let y = cell.map(|c| self.element.map_to_physical(c));
        let size = (y[0] - y[1]).norm().max((y[1] - y[2]).norm()).max((y[2] - y[0]).norm());
        let centroid = self.element.map_to_physical([
            (cell[0][0] + cell[1][0] + cell[2][0]) / 3.0,
            (cell[0][1] + cell[1][1] + cell[2][1]) / 3.0,
        ]);
        size <= self.cfg.size_ratio * (centroid - self.x).norm()
    }

    fn converged(&self, parent: &[Complex64], children: &[Complex64]) -> bool {
        let nb = self.bases.len();
        (0..self.ops.len()).all(|o| {
            (0..nb).all(|b| {
                let i = o * nb + b;
                (parent[i] - children[i]).norm() <= self.cfg.tol * self.scale[o]
            })
        })
    }

    fn refine(&mut self, cell: &Cell, parent: Vec<Complex64>, depth: u32) -> Result<Vec<Complex64>> {
        let kids = split(cell);
        let mut estimates = Vec::with_capacity(4);
        let mut sum = vec![Complex64::new(0.0, 0.0); parent.len()];
        for kid in &kids {
            let q = self.estimate(kid)?;
            for (s, v) in sum.iter_mut().zip(&q) {
                *s += v;
            }
            estimates.push(q);
        }
        if self.acceptable(cell) && self.converged(&parent, &sum) {
            return Ok(sum);
        }
        if depth + 1 >= self.cfg.max_depth {
            self.capped = true;
            return Ok(sum);
        }
        let mut total = vec![Complex64::new(0.0, 0.0); parent.len()];
        for (kid, q) in kids.iter().zip(estimates) {
            let v = self.refine(kid, q, depth + 1)?;
            for (t, x) in total.iter_mut().zip(&v) {
                *t += x;
            }
        }
        Ok(total)
    }
}

/// `int_e K(x, y) phi_b |J| dxi` for a target `x` (with normal `nx`) that
/// does not lie on `e`, by adaptive 4-way subdivision of the reference
/// triangle with a collapsed Gauss rule on each cell.
pub fn nearly_singular_integral(
    x: &Vec3,
    nx: &Vec3,
    element: &CurvedElement,
    k: f64,
    ops: &[LayerOperator],
    bases: &[Polynomial],
    cfg: &NearConfig,
) -> Result<NearResult> {
    let mut it = Integrator {
        x,
        nx,
        element,
        k,
        ops,
        bases,
        rule: TriangleRule::collapsed_gauss(cfg.order),
        cfg,
        scale: vec![0.0; ops.len()],
        cells: 0,
        capped: false,
    };
    let root: Cell = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let first = it.estimate(&root)?;
    let nb = bases.len();
    for o in 0..ops.len() {
        it.scale[o] = (0..nb)
            .map(|b| first[o * nb + b].norm())
            .fold(f64::MIN_POSITIVE, f64::max);
    }
    let values = it.refine(&root, first, 0)?;
    Ok(NearResult {
        values,
        depth_capped: it.capped,
        cells: it.cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_cylinder_element;
    use crate::kernels::{kernel_value, KernelSpec};

    fn plain(x: &Vec3, nx: &Vec3, e: &CurvedElement, op: LayerOperator, basis: &Polynomial, n: usize) -> Complex64 {
        let rule = TriangleRule::collapsed_gauss(n);
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| {
                let y = e.map_to_physical(*p);
                let ny = e.unit_normal(*p).unwrap();
                kernel_value(KernelSpec::new(op, 1.5), x, &y, nx, &ny).unwrap()
                    * (w * e.jacobian_norm(*p) * basis.value(*p))
            })
            .sum()
    }

    fn setup(dist: f64) -> (CurvedElement, Vec3, Vec3) {
        let e = make_cylinder_element(0.5);
        let xi = [0.3, 0.4];
        let n = e.unit_normal(xi).unwrap();
        let x = e.map_to_physical(xi) + n * (dist * e.diameter());
        (e, x, n)
    }

    #[test]
    fn far_target_matches_single_level_gauss() {
        let (e, x, n) = setup(10.0);
        let bases = Polynomial::quadratic_monomials();
        let cfg = NearConfig::default();
        let r = nearly_singular_integral(&x, &n, &e, 1.5, &LayerOperator::ALL, &bases, &cfg).unwrap();
        assert!(!r.depth_capped);
        for (o, op) in LayerOperator::ALL.iter().enumerate() {
            for (b, basis) in bases.iter().enumerate() {
                let p = plain(&x, &n, &e, *op, basis, 16);
                assert!(
                    (r.values[o * 6 + b] - p).norm() <= 1e-12 * p.norm().max(1e-300),
                    "{op} {b} {} {}",
                    r.values[o * 6 + b],
                    p
                );
            }
        }
    }

    #[test]
    fn close_target_matches_brute_force() {
        let (e, x, n) = setup(0.1);
        let bases = [Polynomial::constant(1.0), Polynomial::monomial(0, 2)];
        let r = nearly_singular_integral(&x, &n, &e, 1.5, &LayerOperator::ALL, &bases, &NearConfig::default()).unwrap();
        assert!(!r.depth_capped);
        // Brute force: uniform subdivision down to the depth cap.
        let cfg = NearConfig {
            tol: 0.0,
            max_depth: 6,
            size_ratio: 0.0,
            order: 4,
        };
        let brute = nearly_singular_integral(&x, &n, &e, 1.5, &LayerOperator::ALL, &bases, &cfg).unwrap();
        assert!(brute.depth_capped);
        for i in 0..r.values.len() {
            assert!(
                (r.values[i] - brute.values[i]).norm() <= 1e-9 * brute.values[i].norm(),
                "{i}"
            );
        }
    }

    #[test]
    fn orientation_preserving_renumbering_is_invariant() {
        let (e, x, n) = setup(0.2);
        let v = e.nodes();
        // Rotate corners 1 -> 2 -> 3 and the mid-side nodes with them.
        let rotated = CurvedElement::new([v[1], v[2], v[0], v[4], v[5], v[3]]);
        let ops = [LayerOperator::Single, LayerOperator::Hyper];
        let c = [Polynomial::constant(1.0)];
        let a = nearly_singular_integral(&x, &n, &e, 1.5, &ops, &c, &NearConfig::default()).unwrap();
        let b = nearly_singular_integral(&x, &n, &rotated, 1.5, &ops, &c, &NearConfig::default()).unwrap();
        for i in 0..2 {
            assert!((a.values[i] - b.values[i]).norm() <= 1e-9 * a.values[i].norm());
        }
    }

    #[test]
    fn target_at_corner_hits_depth_cap() {
        let e = make_cylinder_element(0.5);
        let x = e.map_to_physical([0.0, 0.0]);
        let n = e.unit_normal([0.0, 0.0]).unwrap();
        let r = nearly_singular_integral(
            &x,
            &n,
            &e,
            0.0,
            &[LayerOperator::Single],
            &[Polynomial::constant(1.0)],
            &NearConfig {
                max_depth: 3,
                ..Default::default()
            },
        );
        assert!(r.unwrap().depth_capped);
    }
}
