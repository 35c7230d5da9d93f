//! Laurent expansion of the polar-coordinate integrand
//! `F(rho, theta_bar) = K phi |J| det(M) rho` around the field point.
//!
//! Local coordinates are `zeta = rho (cos theta_bar, sin theta_bar)` with
//! `xi = xi_s + M zeta`. Writing `Y_a = dY/dzeta_a`, `Y_ab` for the second
//! derivatives, `u = Y_1 cos + Y_2 sin`, `w = Y_11 cos^2 + 2 Y_12 cos sin +
//! Y_22 sin^2` and `A = |u|`,
//!
//! ```text
//! r^2 = rho^2 A^2 + rho^3 (u . w) + O(rho^4)
//! ```
//!
//! so `r^-3 = rho^-3 (A^-3 - 3/2 (u . w) A^-5 rho + ...)`. Only the
//! `n_x . n_y / (4 pi r^3)` part of the hypersingular kernel reaches the
//! orders `rho^-2` and `rho^-1`, which makes both coefficients real and
//! independent of the wavenumber.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::basis::Polynomial;
use crate::error::{Error, Result};
use crate::geometry::{CurvedElement, Vec3};
use crate::kernels::{layer_kernels, KernelSpec, LayerOperator};

const FOUR_PI_INV: f64 = 1.0 / (4.0 * PI);

/// Element derivatives at the field point, expressed in the local
/// coordinates `zeta` of one sub-triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalGeometry {
    pub m: Matrix2<f64>,
    pub det_m: f64,
    pub y: [Vec3; 2],
    pub yy: [[Vec3; 2]; 2],
    pub normal: Vec3,
    /// `Y_1 x Y_2` at the field point; `|J0| = det(M) |J_xi|`.
    pub jac: Vec3,
    /// `d(Y_1 x Y_2)/dzeta_a`.
    pub djac: [Vec3; 2],
}

impl LocalGeometry {
    pub fn new(element: &CurvedElement, xi_s: [f64; 2], m: Matrix2<f64>) -> Result<Self> {
        let (u1, u2) = element.jacobian_columns(xi_s);
        let (y11, y12, y22) = element.second_derivatives();
        let yxi = [u1, u2];
        let yyxi = [[y11, y12], [y12, y22]];
        let y = [0, 1].map(|a| yxi[0] * m[(0, a)] + yxi[1] * m[(1, a)]);
        let mut yy = [[Vec3::zeros(); 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        yy[a][b] += yyxi[c][d] * (m[(c, a)] * m[(d, b)]);
                    }
                }
            }
        }
        let normal = element.unit_normal(xi_s)?;
        let jac = y[0].cross(&y[1]);
        let djac = [0, 1].map(|a| yy[0][a].cross(&y[1]) + y[0].cross(&yy[1][a]));
        Ok(LocalGeometry {
            m,
            det_m: m.determinant(),
            y,
            yy,
            normal,
            jac,
            djac,
        })
    }

    pub fn u(&self, theta_bar: f64) -> Vec3 {
        let (s, c) = theta_bar.sin_cos();
        self.y[0] * c + self.y[1] * s
    }

    pub fn w(&self, theta_bar: f64) -> Vec3 {
        let (s, c) = theta_bar.sin_cos();
        self.yy[0][0] * (c * c) + self.yy[0][1] * (2.0 * c * s) + self.yy[1][1] * (s * s)
    }

    pub fn a(&self, theta_bar: f64) -> f64 {
        self.u(theta_bar).norm()
    }

    /// `n_x . J0`, the scaled Jacobian at the field point.
    pub fn jac_norm(&self) -> f64 {
        self.normal.dot(&self.jac)
    }

    /// Gradient of a basis function with respect to `zeta`.
    pub fn basis_gradient(&self, basis: &Polynomial, xi_s: [f64; 2]) -> [f64; 2] {
        let g = basis.gradient(xi_s);
        let gz = self.m.transpose() * Vector2::new(g[0], g[1]);
        [gz[0], gz[1]]
    }
}

/// Singular coefficients of one (sub-triangle, kernel, basis) combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionTerms {
    pub geometry: LocalGeometry,
    pub operator: LayerOperator,
    pub phi0: f64,
    pub grad_phi: [f64; 2],
}

/// `f_-1 = c1 cos^3 + c2 cos^2 sin + c3 cos sin^2 + c4 sin^3 + d1 cos + d2 sin`
/// with constant `f_-2`; valid when `A` does not depend on the angle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrigCoefficients {
    pub f_minus2: f64,
    pub c: [f64; 4],
    pub d: [f64; 2],
}

impl TrigCoefficients {
    pub fn f_minus1(&self, theta_bar: f64) -> f64 {
        let (s, c) = theta_bar.sin_cos();
        self.c[0] * c * c * c
            + self.c[1] * c * c * s
            + self.c[2] * c * s * s
            + self.c[3] * s * s * s
            + self.d[0] * c
            + self.d[1] * s
    }
}

impl ExpansionTerms {
    pub fn new(geometry: LocalGeometry, operator: LayerOperator, basis: &Polynomial, xi_s: [f64; 2]) -> Self {
        ExpansionTerms {
            geometry,
            operator,
            phi0: basis.value(xi_s),
            grad_phi: geometry.basis_gradient(basis, xi_s),
        }
    }

    pub fn f_minus2(&self, theta_bar: f64) -> f64 {
        match self.operator {
            LayerOperator::Hyper => {
                let a = self.geometry.a(theta_bar);
                self.geometry.jac_norm() * self.phi0 * FOUR_PI_INV / (a * a * a)
            }
            _ => 0.0,
        }
    }

    pub fn f_minus1(&self, theta_bar: f64) -> f64 {
        let g = &self.geometry;
        let (s, c) = theta_bar.sin_cos();
        let u = g.u(theta_bar);
        let a = u.norm();
        let a3 = a * a * a;
        match self.operator {
            LayerOperator::Single => 0.0,
            LayerOperator::Double => -u.dot(&g.normal) * g.jac_norm() * self.phi0 * FOUR_PI_INV / a3,
            LayerOperator::Adjoint => u.dot(&g.normal) * g.jac_norm() * self.phi0 * FOUR_PI_INV / a3,
            LayerOperator::Hyper => {
                let j0 = g.jac_norm();
                let uw = u.dot(&g.w(theta_bar));
                let nj1 = g.normal.dot(&(g.djac[0] * c + g.djac[1] * s));
                let phi1 = self.grad_phi[0] * c + self.grad_phi[1] * s;
                FOUR_PI_INV * (-1.5 * uw * j0 * self.phi0 / (a3 * a * a) + (nj1 * self.phi0 + j0 * phi1) / a3)
            }
        }
    }

    /// Trigonometric form of the coefficients. Fails unless the tangents of
    /// the local frame are orthogonal and of equal length.
    pub fn coefficients(&self) -> Result<TrigCoefficients> {
        let g = &self.geometry;
        let a2 = g.y[0].norm_squared();
        let defect = ((a2 - g.y[1].norm_squared()).abs() + 2.0 * g.y[0].dot(&g.y[1]).abs()) / a2;
        if defect > 1e-10 {
            return Err(Error::NonConformalFrame(defect));
        }
        let a = a2.sqrt();
        let a3 = a2 * a;
        let j0 = g.jac_norm();
        let mut out = TrigCoefficients::default();
        match self.operator {
            LayerOperator::Single => {}
            LayerOperator::Double | LayerOperator::Adjoint => {
                let sign = if self.operator == LayerOperator::Double {
                    -1.0
                } else {
                    1.0
                };
                for i in 0..2 {
                    out.d[i] = sign * g.y[i].dot(&g.normal) * j0 * self.phi0 * FOUR_PI_INV / a3;
                }
            }
            LayerOperator::Hyper => {
                out.f_minus2 = j0 * self.phi0 * FOUR_PI_INV / a3;
                let q = -1.5 * j0 * self.phi0 * FOUR_PI_INV / (a3 * a2);
                let [y1, y2] = g.y;
                let [[y11, y12], [_, y22]] = g.yy;
                out.c = [
                    q * y1.dot(&y11),
                    q * (2.0 * y1.dot(&y12) + y2.dot(&y11)),
                    q * (y1.dot(&y22) + 2.0 * y2.dot(&y12)),
                    q * y2.dot(&y22),
                ];
                for i in 0..2 {
                    out.d[i] = FOUR_PI_INV * (g.normal.dot(&g.djac[i]) * self.phi0 + j0 * self.grad_phi[i]) / a3;
                }
            }
        }
        Ok(out)
    }
}

/// Kernel values and the factor `|J_xi| det(M) rho` at one polar point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PolarSample {
    pub xi: [f64; 2],
    pub kernels: [Complex64; 4],
    pub measure: f64,
}

pub(crate) fn polar_sample(
    element: &CurvedElement,
    xi_s: [f64; 2],
    geometry: &LocalGeometry,
    k: f64,
    rho: f64,
    theta_bar: f64,
) -> PolarSample {
    let (s, c) = theta_bar.sin_cos();
    let delta = geometry.m * Vector2::new(rho * c, rho * s);
    let delta = [delta[0], delta[1]];
    let xi = [xi_s[0] + delta[0], xi_s[1] + delta[1]];
    let d = element.offset(xi_s, delta);
    let jy = element.area_vector(xi);
    let jn = jy.norm();
    let kernels = layer_kernels(&d, &geometry.normal, &(jy / jn), k);
    PolarSample {
        xi,
        kernels,
        measure: jn * geometry.det_m * rho,
    }
}

/// `F(rho, theta_bar)` for the frame `xi = xi_s + M zeta`.
pub fn integrand_f(
    element: &CurvedElement,
    xi_s: [f64; 2],
    m: Matrix2<f64>,
    spec: KernelSpec,
    basis: &Polynomial,
    rho: f64,
    theta_bar: f64,
) -> Result<Complex64> {
    if rho <= 0.0 {
        return Err(Error::SingularEvaluation(rho));
    }
    let geometry = LocalGeometry::new(element, xi_s, m)?;
    let p = polar_sample(element, xi_s, &geometry, spec.k, rho, theta_bar);
    Ok(p.kernels[spec.operator.index()] * (p.measure * basis.value(p.xi)))
}

/// `|rho^2 F - f_-2 - rho f_-1|` along the ray `theta_bar`; `O(rho^2)` when
/// the expansion is right.
pub fn subtraction_residual(
    element: &CurvedElement,
    xi_s: [f64; 2],
    terms: &ExpansionTerms,
    basis: &Polynomial,
    k: f64,
    rho: f64,
    theta_bar: f64,
) -> Result<f64> {
    let spec = KernelSpec::new(terms.operator, k);
    let f = integrand_f(element, xi_s, terms.geometry.m, spec, basis, rho, theta_bar)?;
    Ok((f * rho * rho - terms.f_minus2(theta_bar) - rho * terms.f_minus1(theta_bar)).norm())
}
