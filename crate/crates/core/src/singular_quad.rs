//! Singular and hypersingular integrals over a curved element with the
//! field point on it:
//!
//! ```text
//! I  = I1 + I2
//! I1 = sum_j int int [F - f_-2 / rho^2 - f_-1 / rho] drho dtheta
//! I2 = sum_j int [f_-1 ln rho_hat - f_-2 / rho_hat] dtheta
//! ```
//!
//! The variants differ in the plane used for the polar coordinates and in
//! the angular quadrature.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::basis::Polynomial;
use crate::error::{Error, Result};
use crate::expansion::{polar_sample, ExpansionTerms, LocalGeometry, TrigCoefficients};
use crate::geometry::CurvedElement;
use crate::kernels::{KernelSpec, LayerOperator};
use crate::polar_frame::{AngularMap, ConformalMap, PolarFrame, SubTriangle};
use crate::quadrature::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Intrinsic plane, Gauss points affine in the angle.
    Guiggiani,
    /// Intrinsic plane, sigmoidal angular map.
    GuiSig,
    /// Conformal plane, sigmoidal angular map, `I2` by quadrature.
    Present,
    /// As `Present` with `I2` in closed form.
    PresentA,
    /// Conformal plane with the sigmoid applied to each normalized angular
    /// interval, for comparison.
    PresentNaive,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Guiggiani,
        Variant::GuiSig,
        Variant::Present,
        Variant::PresentA,
        Variant::PresentNaive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Guiggiani => "guiggiani",
            Variant::GuiSig => "guisig",
            Variant::Present => "present",
            Variant::PresentA => "present-a",
            Variant::PresentNaive => "present-naive",
        }
    }

    pub fn conformal(self) -> bool {
        !matches!(self, Variant::Guiggiani | Variant::GuiSig)
    }

    pub fn angular_map(self, m: f64) -> AngularMap {
        match self {
            Variant::Guiggiani => AngularMap::Affine,
            Variant::PresentNaive => AngularMap::NaiveSigmoid { m },
            _ => AngularMap::Sigmoid { m },
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Parameter(format!("unknown variant '{s}'")))
    }
}

/// Sigmoid exponent shared by all kernels when one configuration serves a
/// whole matrix.
pub const COMMON_M: f64 = 2.5;

pub fn default_m(operator: LayerOperator) -> f64 {
    match operator {
        LayerOperator::Hyper => 2.0,
        _ => 3.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub variant: Variant,
    pub n_angular: usize,
    pub n_radial: usize,
    /// `None` selects [`default_m`] per kernel.
    pub m: Option<f64>,
}

impl QuadConfig {
    pub fn new(variant: Variant, n_angular: usize, n_radial: usize) -> Self {
        QuadConfig {
            variant,
            n_angular,
            n_radial,
            m: None,
        }
    }

    pub fn with_m(mut self, m: f64) -> Self {
        self.m = Some(m);
        self
    }

    pub fn m_for(&self, operator: LayerOperator) -> f64 {
        self.m.unwrap_or_else(|| default_m(operator))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_angular == 0 || self.n_radial == 0 {
            return Err(Error::Parameter("point counts must be positive".into()));
        }
        if let Some(m) = self.m {
            if !(m >= 1.0 && m.is_finite()) {
                return Err(Error::Parameter(format!("sigmoid exponent {m} < 1")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularResult {
    pub value: Complex64,
    pub i1: Complex64,
    pub i2: Complex64,
    pub points_used: usize,
}

pub fn build_frame(element: &CurvedElement, xi_s: [f64; 2], conformal: bool) -> Result<PolarFrame> {
    let map = if conformal {
        let (u1, u2) = element.jacobian_columns(xi_s);
        ConformalMap::build(&u1, &u2)?
    } else {
        ConformalMap::identity()
    };
    PolarFrame::new(map, xi_s)
}

pub fn integrate_singular(
    element: &CurvedElement,
    xi_s: [f64; 2],
    spec: KernelSpec,
    basis: &Polynomial,
    config: &QuadConfig,
) -> Result<SingularResult> {
    let out = integrate_singular_batch(
        element,
        xi_s,
        spec.k,
        &[spec.operator],
        std::slice::from_ref(basis),
        config,
    )?;
    Ok(out[0][0])
}

/// All combinations of `operators` and `bases`, indexed `[operator][basis]`.
/// Kernel evaluations are shared between combinations with the same `m`.
pub fn integrate_singular_batch(
    element: &CurvedElement,
    xi_s: [f64; 2],
    k: f64,
    operators: &[LayerOperator],
    bases: &[Polynomial],
    config: &QuadConfig,
) -> Result<Vec<Vec<SingularResult>>> {
    config.validate()?;
    let frame = build_frame(element, xi_s, config.variant.conformal())?;
    let zero = SingularResult {
        value: Complex64::new(0.0, 0.0),
        i1: Complex64::new(0.0, 0.0),
        i2: Complex64::new(0.0, 0.0),
        points_used: 0,
    };
    let mut out = vec![vec![zero; bases.len()]; operators.len()];
    let mut done = vec![false; operators.len()];
    for first in 0..operators.len() {
        if done[first] {
            continue;
        }
        let m = config.m_for(operators[first]);
        let group: Vec<usize> = (first..operators.len())
            .filter(|&i| !done[i] && config.m_for(operators[i]) == m)
            .collect();
        for &i in &group {
            done[i] = true;
        }
        let ops: Vec<LayerOperator> = group.iter().map(|&i| operators[i]).collect();
        let res = integrate_group(element, xi_s, k, &ops, bases, config, &frame, m)?;
        for (slot, r) in group.into_iter().zip(res) {
            out[slot] = r;
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn integrate_group(
    element: &CurvedElement,
    xi_s: [f64; 2],
    k: f64,
    ops: &[LayerOperator],
    bases: &[Polynomial],
    config: &QuadConfig,
    frame: &PolarFrame,
    m: f64,
) -> Result<Vec<Vec<SingularResult>>> {
    let angular = config.variant.angular_map(m);
    let ga = gauss_legendre(config.n_angular);
    let gr = gauss_legendre(config.n_radial);
    let nb = bases.len();
    let mut i1 = vec![Complex64::new(0.0, 0.0); ops.len() * nb];
    let mut i2 = vec![0.0; ops.len() * nb];
    let mut phi = vec![0.0; nb];

    for sub in &frame.subs {
        let geometry = LocalGeometry::new(element, xi_s, frame.local_matrix(sub))?;
        let terms: Vec<ExpansionTerms> = ops
            .iter()
            .flat_map(|&op| bases.iter().map(move |b| (op, b)))
            .map(|(op, b)| ExpansionTerms::new(geometry, op, b, xi_s))
            .collect();
        if config.variant == Variant::PresentA {
            for (slot, t) in terms.iter().enumerate() {
                i2[slot] += i2_sub_analytic(sub, &t.coefficients()?);
            }
        }
        for (w, ww) in ga.unit_interval() {
            let (theta, dtheta) = angular.apply(sub, w);
            let rho_hat = sub.rho_hat(theta)?;
            let singular: Vec<(f64, f64)> = terms.iter().map(|t| (t.f_minus2(theta), t.f_minus1(theta))).collect();
            if config.variant != Variant::PresentA {
                for (slot, &(f2, f1)) in singular.iter().enumerate() {
                    i2[slot] += ww * dtheta * (f1 * rho_hat.ln() - f2 / rho_hat);
                }
            }
            for (s, ws) in gr.unit_interval() {
                let rho = s * rho_hat;
                let p = polar_sample(element, xi_s, &geometry, k, rho, theta);
                for (b, basis) in bases.iter().enumerate() {
                    phi[b] = basis.value(p.xi);
                }
                let weight = ww * dtheta * ws * rho_hat;
                for (o, op) in ops.iter().enumerate() {
                    let kv = p.kernels[op.index()] * p.measure;
                    for (b, &phi_b) in phi.iter().enumerate() {
                        let slot = o * nb + b;
                        let (f2, f1) = singular[slot];
                        let g = kv * phi_b - (f2 / (rho * rho) + f1 / rho);
                        i1[slot] += g * weight;
                    }
                }
            }
        }
    }
    let points_used = 3 * config.n_angular * config.n_radial;
    Ok((0..ops.len())
        .map(|o| {
            (0..nb)
                .map(|b| {
                    let slot = o * nb + b;
                    let i2c = Complex64::new(i2[slot], 0.0);
                    SingularResult {
                        value: i1[slot] + i2c,
                        i1: i1[slot],
                        i2: i2c,
                        points_used,
                    }
                })
                .collect()
        })
        .collect())
}

/// Expansion terms of `operator` and `basis` for each sub-triangle of `frame`.
pub fn frame_expansion_terms(
    element: &CurvedElement,
    frame: &PolarFrame,
    operator: LayerOperator,
    basis: &Polynomial,
) -> Result<[ExpansionTerms; 3]> {
    let mut out = Vec::with_capacity(3);
    for sub in &frame.subs {
        let geometry = LocalGeometry::new(element, frame.xi_s, frame.local_matrix(sub))?;
        out.push(ExpansionTerms::new(geometry, operator, basis, frame.xi_s));
    }
    Ok([out[0], out[1], out[2]])
}

/// `I2` by quadrature over the frame's sub-triangles; `terms[j]` belongs to
/// `frame.subs[j]`.
pub fn i2_numeric(frame: &PolarFrame, terms: &[ExpansionTerms; 3], angular: AngularMap, n: usize) -> Result<f64> {
    let g = gauss_legendre(n);
    let mut total = 0.0;
    for (sub, t) in frame.subs.iter().zip(terms) {
        for (w, ww) in g.unit_interval() {
            let (theta, dtheta) = angular.apply(sub, w);
            let rho_hat = sub.rho_hat(theta)?;
            total += ww * dtheta * (t.f_minus1(theta) * rho_hat.ln() - t.f_minus2(theta) / rho_hat);
        }
    }
    Ok(total)
}

pub fn i2_analytic(frame: &PolarFrame, terms: &[ExpansionTerms; 3]) -> Result<f64> {
    let mut total = 0.0;
    for (sub, t) in frame.subs.iter().zip(terms) {
        total += i2_sub_analytic(sub, &t.coefficients()?);
    }
    Ok(total)
}

/// Antiderivatives in `t = sin(theta)` of the logarithmic integrals
/// `int ln(cos) ...` (`l = ln sqrt(1 - t^2)`).
fn log_antiderivatives(t: f64) -> [f64; 4] {
    let c = (1.0 - t * t).sqrt();
    let l = c.ln();
    [
        t * (l - 1.0) + ((1.0 + t) / c).ln(),
        c * (1.0 - l),
        t * t * t * (3.0 * l - 1.0) / 9.0 - t / 3.0 + ((1.0 + t) / (1.0 - t)).ln() / 6.0,
        c * ((8.0 + t * t) / 9.0 - (2.0 + t * t) * l / 3.0),
    ]
}

/// Closed-form `I2` over one sub-triangle, with `rho_hat = h / cos(theta)`.
pub fn i2_sub_analytic(sub: &SubTriangle, coeffs: &TrigCoefficients) -> f64 {
    let (a, b) = (sub.theta_lo, sub.theta_hi);
    if a == b {
        return 0.0;
    }
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    // Trig monomials cos^3, cos^2 sin, cos sin^2, sin^3, cos, sin.
    let plain = [
        (sb - sb.powi(3) / 3.0) - (sa - sa.powi(3) / 3.0),
        -(cb.powi(3) - ca.powi(3)) / 3.0,
        (sb.powi(3) - sa.powi(3)) / 3.0,
        (-cb + cb.powi(3) / 3.0) - (-ca + ca.powi(3) / 3.0),
        sb - sa,
        -(cb - ca),
    ];
    let lo = log_antiderivatives(sa);
    let hi = log_antiderivatives(sb);
    let it: [f64; 4] = std::array::from_fn(|i| hi[i] - lo[i]);
    let logs = [it[0] - it[2], it[1] - it[3], it[2], it[3], it[0], it[1]];
    let coef = [
        coeffs.c[0],
        coeffs.c[1],
        coeffs.c[2],
        coeffs.c[3],
        coeffs.d[0],
        coeffs.d[1],
    ];
    let ln_h = sub.h.ln();
    let f1_part: f64 = (0..6).map(|i| coef[i] * (ln_h * plain[i] - logs[i])).sum();
    f1_part - coeffs.f_minus2 / sub.h * (sb - sa)
}

/// Oracle: Guiggiani's variant with 256 angular and 32 radial points.
pub fn reference_value(
    element: &CurvedElement,
    xi_s: [f64; 2],
    spec: KernelSpec,
    basis: &Polynomial,
) -> Result<Complex64> {
    Ok(integrate_singular(
        element,
        xi_s,
        spec,
        basis,
        &QuadConfig::new(Variant::Guiggiani, 256, 32),
    )?
    .value)
}

/// The oracle next to the same rule with doubled point counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceCheck {
    pub base: Complex64,
    /// 512 x 32.
    pub angular_doubled: Complex64,
    /// 512 x 64. Extra radial points near the field point amplify the
    /// rounding of `F - f_-2 / rho^2`, so this differs from the base at the
    /// 1e-12 level even though both are converged.
    pub fully_doubled: Complex64,
}

impl ReferenceCheck {
    pub fn angular_change(&self) -> f64 {
        (self.angular_doubled - self.base).norm() / self.base.norm()
    }

    pub fn full_change(&self) -> f64 {
        (self.fully_doubled - self.base).norm() / self.base.norm()
    }
}

pub fn reference_self_check(
    element: &CurvedElement,
    xi_s: [f64; 2],
    spec: KernelSpec,
    basis: &Polynomial,
) -> Result<ReferenceCheck> {
    let run = |na, nr| {
        integrate_singular(element, xi_s, spec, basis, &QuadConfig::new(Variant::Guiggiani, na, nr)).map(|r| r.value)
    };
    Ok(ReferenceCheck {
        base: run(256, 32)?,
        angular_doubled: run(512, 32)?,
        fully_doubled: run(512, 64)?,
    })
}
