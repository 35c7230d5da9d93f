use nalgebra::{Matrix6, Vector6};
use num_complex::Complex64;

use crate::basis::Polynomial;
use crate::error::{Error, Result};
use crate::quadrature::TriangleRule;

/// Moment matrix `V[b][j] = phi_b(xi_j)` of the six correction monomials at
/// the six Nyström points, with its inverse. The same for every element.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionBasis {
    pub bases: [Polynomial; 6],
    pub points: [[f64; 2]; 6],
    pub inverse: Matrix6<f64>,
}

impl CorrectionBasis {
    pub fn new() -> Result<Self> {
        let rule = TriangleRule::six_point();
        let points: [[f64; 2]; 6] = std::array::from_fn(|j| rule.points[j]);
        CorrectionBasis::with_points(points)
    }

    pub fn with_points(points: [[f64; 2]; 6]) -> Result<Self> {
        let bases = Polynomial::quadratic_monomials();
        let v = Matrix6::from_fn(|b, j| bases[b].value(points[j]));
        let svd = v.svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if smin <= 1e-12 * smax {
            return Err(Error::IllConditionedCorrection(smin / smax));
        }
        let inverse = v.try_inverse().ok_or(Error::IllConditionedCorrection(smin / smax))?;
        Ok(CorrectionBasis { bases, points, inverse })
    }

    /// Weights `w` with `sum_j w_j phi_b(xi_j) = moments[b]`.
    pub fn weights(&self, moments: &[Complex64; 6]) -> [Complex64; 6] {
        let re = self.inverse * Vector6::from_fn(|i, _| moments[i].re);
        let im = self.inverse * Vector6::from_fn(|i, _| moments[i].im);
        std::array::from_fn(|j| Complex64::new(re[j], im[j]))
    }
}

/// Corrected weights for one (target, element, kernel) triple from the
/// kernel moments `int K phi_b |J| dxi`.
pub fn local_correction_weights(basis: &CorrectionBasis, moments: &[Complex64; 6]) -> [Complex64; 6] {
    basis.weights(moments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_cylinder_element;
    use crate::kernels::{KernelSpec, LayerOperator};
    use crate::quadrature::monomial_triangle_integral;
    use crate::singular_quad::{integrate_singular, QuadConfig, Variant};
    use approx::assert_abs_diff_eq;

    fn exact_moments() -> [Complex64; 6] {
        [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
            .map(|(p, q)| Complex64::new(monomial_triangle_integral(p, q), 0.0))
    }

    #[test]
    fn constant_kernel_reproduces_monomial_integrals() {
        let basis = CorrectionBasis::new().unwrap();
        let moments = exact_moments();
        let w = local_correction_weights(&basis, &moments);
        assert_abs_diff_eq!(moments[0].re, 0.5);
        assert_abs_diff_eq!(moments[1].re, 1.0 / 6.0, epsilon = 1e-16);
        for (b, phi) in basis.bases.iter().enumerate() {
            let s: Complex64 = (0..6).map(|j| w[j] * phi.value(basis.points[j])).sum();
            assert!((s - moments[b]).norm() <= 1e-15);
        }
        // The degree-4 rule already integrates quadratics, so the corrected
        // weights are the rule weights.
        let rule = TriangleRule::six_point();
        for (wj, rj) in w.iter().zip(&rule.weights) {
            assert_abs_diff_eq!(wj.re, rj, epsilon = 1e-15);
        }
    }

    #[test]
    fn self_correction_matches_singular_integral_for_constant_density() {
        let e = make_cylinder_element(0.5);
        let cb = CorrectionBasis::new().unwrap();
        let xi_s = cb.points[0];
        let cfg = QuadConfig::new(Variant::Present, 16, 6);
        let spec = KernelSpec::new(LayerOperator::Single, 1.0);
        let moments: [Complex64; 6] =
            std::array::from_fn(|b| integrate_singular(&e, xi_s, spec, &cb.bases[b], &cfg).unwrap().value);
        let w = local_correction_weights(&cb, &moments);
        let sum: Complex64 = w.iter().sum();
        assert!((sum - moments[0]).norm() < 1e-13 * moments[0].norm());
    }

    #[test]
    fn permuting_nodes_permutes_weights() {
        let cb = CorrectionBasis::new().unwrap();
        let perm = [3, 0, 5, 1, 4, 2];
        let permuted = CorrectionBasis::with_points(perm.map(|j| cb.points[j])).unwrap();
        let moments: [Complex64; 6] = std::array::from_fn(|i| Complex64::new(0.1 * i as f64 + 0.3, -0.2 * i as f64));
        let w = cb.weights(&moments);
        let wp = permuted.weights(&moments);
        for (k, &j) in perm.iter().enumerate() {
            assert!((wp[k] - w[j]).norm() < 1e-13);
        }
    }

    #[test]
    fn collinear_points_are_rejected() {
        let pts = [[0.1, 0.1], [0.2, 0.2], [0.3, 0.3], [0.4, 0.4], [0.1, 0.2], [0.2, 0.1]];
        assert!(matches!(
            CorrectionBasis::with_points(pts),
            Err(Error::IllConditionedCorrection(_))
        ));
    }
}
