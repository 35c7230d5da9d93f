//! Laplace / Helmholtz fundamental solution and its layer-operator kernels.
//!
//! With `d = y - x`, `r = |d|` and `G(r) = e^{ikr} / (4 pi r)`:
//!
//! ```text
//! G'  = e^{ikr} (ikr - 1) / (4 pi r^2)
//! G'' = e^{ikr} (2 - 2ikr - k^2 r^2) / (4 pi r^3)
//!
//! single  G
//! double  dG/dn(y)          =  G' (d . n_y) / r
//! adjoint dG/dn(x)          = -G' (d . n_x) / r
//! hyper   d2G/dn(x)dn(y)    = -[ G'' (n_x . d^)(n_y . d^) + G'/r (n_x . n_y - (n_x . d^)(n_y . d^)) ]
//! ```
//!
//! `k = 0` goes through the same expressions and yields the Laplace kernels
//! with zero imaginary part.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LayerOperator {
    Single,
    Double,
    Adjoint,
    Hyper,
}

impl LayerOperator {
    pub const ALL: [LayerOperator; 4] = [
        LayerOperator::Single,
        LayerOperator::Double,
        LayerOperator::Adjoint,
        LayerOperator::Hyper,
    ];

    /// Power of `1/r` in the kernel: 1 for S, D, M and 3 for H.
    pub fn singularity_order(self) -> u32 {
        match self {
            LayerOperator::Hyper => 3,
            _ => 1,
        }
    }

    /// Lowest power of `rho` in the polar expansion of the integrand.
    pub fn expansion_index(self) -> i32 {
        match self {
            LayerOperator::Single => 0,
            LayerOperator::Double | LayerOperator::Adjoint => -1,
            LayerOperator::Hyper => -2,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            LayerOperator::Single => "single",
            LayerOperator::Double => "double",
            LayerOperator::Adjoint => "adjoint",
            LayerOperator::Hyper => "hyper",
        }
    }
}

impl fmt::Display for LayerOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LayerOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "single" | "s" => Ok(LayerOperator::Single),
            "double" | "d" => Ok(LayerOperator::Double),
            "adjoint" | "m" => Ok(LayerOperator::Adjoint),
            "hyper" | "h" => Ok(LayerOperator::Hyper),
            other => Err(Error::Parameter(format!("unknown kernel `{other}`"))),
        }
    }
}

/// Layer operator plus wavenumber (`k = 0` is the Laplace case).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub operator: LayerOperator,
    pub k: f64,
}

impl KernelSpec {
    pub fn new(operator: LayerOperator, k: f64) -> Self {
        assert!(k >= 0.0, "wavenumber must be non-negative");
        KernelSpec { operator, k }
    }

    pub fn laplace(operator: LayerOperator) -> Self {
        KernelSpec { operator, k: 0.0 }
    }
}

/// Wavenumber and Burton-Miller coupling constant `alpha = i / k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveContext {
    pub k: f64,
    pub alpha: Complex64,
}

impl WaveContext {
    pub fn new(k: f64) -> Self {
        let alpha = if k > 0.0 {
            Complex64::new(0.0, 1.0 / k)
        } else {
            Complex64::new(0.0, 0.0)
        };
        WaveContext { k, alpha }
    }
}

const FOUR_PI_INV: f64 = 1.0 / (4.0 * PI);

fn check_distance(x: &Vec3, y: &Vec3) -> Result<f64> {
    let r = (y - x).norm();
    if r <= f64::EPSILON * x.norm().max(y.norm()).max(1.0) {
        return Err(Error::SingularEvaluation(r));
    }
    Ok(r)
}

pub fn green(x: &Vec3, y: &Vec3, k: f64) -> Result<Complex64> {
    let r = check_distance(x, y)?;
    Ok(Complex64::from_polar(FOUR_PI_INV / r, k * r))
}

pub fn kernel_value(spec: KernelSpec, x: &Vec3, y: &Vec3, nx: &Vec3, ny: &Vec3) -> Result<Complex64> {
    check_distance(x, y)?;
    let all = layer_kernels(&(y - x), nx, ny, spec.k);
    Ok(all[spec.operator.index()])
}

/// All four kernels for the offset `d = y - x` (must be nonzero), indexed
/// by [`LayerOperator::index`].
#[inline]
pub fn layer_kernels(d: &Vec3, nx: &Vec3, ny: &Vec3, k: f64) -> [Complex64; 4] {
    let r2 = d.norm_squared();
    let r = r2.sqrt();
    let inv_r = 1.0 / r;
    let phase = Complex64::from_polar(FOUR_PI_INV, k * r);
    let kr = k * r;

    let g = phase * inv_r;
    // G' r^2 and G'' r^3 with the e^{ikr}/(4 pi) factor stripped.
    let g1 = Complex64::new(-1.0, kr);
    let g2 = Complex64::new(2.0 - kr * kr, -2.0 * kr);

    let dnx = d.dot(nx) * inv_r;
    let dny = d.dot(ny) * inv_r;
    let nxny = nx.dot(ny);
    let inv_r2 = inv_r * inv_r;
    let inv_r3 = inv_r2 * inv_r;

    let double = phase * g1 * (dny * inv_r2);
    let adjoint = -phase * g1 * (dnx * inv_r2);
    let hyper = -phase * inv_r3 * (g2 * (dnx * dny) + g1 * (nxny - dnx * dny));
    [g, double, adjoint, hyper]
}
