//! Geometry of the polar-coordinate integration: element shape parameters,
//! the conformal xi -> eta map that makes `A(theta)` constant, the split of
//! the integration triangle into three sub-triangles around the field point,
//! and the sigmoidal angular transformations.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Tangent-plane shape of an element at a point: `lambda = |U1| / |U2|`,
/// `gamma` the angle between the tangents, and `mu`, which approaches 1 as
/// `A(theta)` develops near-zeros.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeParams {
    pub lambda: f64,
    pub gamma: f64,
    pub mu: f64,
}

pub fn shape_params(u1: &Vec3, u2: &Vec3) -> Result<ShapeParams> {
    let n1 = u1.norm();
    let n2 = u2.norm();
    let cross = u1.cross(u2).norm();
    if n1 == 0.0 || n2 == 0.0 || cross <= 1e-14 * n1 * n2 {
        return Err(Error::DegenerateTangent(cross));
    }
    let lambda = n1 / n2;
    let gamma = cross.atan2(u1.dot(u2));
    let s = lambda + 1.0 / lambda;
    let sin_g = gamma.sin();
    let mu = (1.0 - 4.0 * sin_g * sin_g / (s * s)).max(0.0).sqrt();
    Ok(ShapeParams { lambda, gamma, mu })
}

/// `A(theta) = |U1 cos(theta) + U2 sin(theta)|`, written out in the
/// quadratic form of the tangent metric.
pub fn a_of_theta(u1: &Vec3, u2: &Vec3, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    (u1.norm_squared() * c * c + u1.dot(u2) * (2.0 * theta).sin() + u2.norm_squared() * s * s).sqrt()
}

/// Linear map `eta = T xi` onto the triangle `(0,0), apex, (1,0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalMap {
    pub t: Matrix2<f64>,
    pub t_inv: Matrix2<f64>,
    pub det_t_inv: f64,
    pub apex: [f64; 2],
}

impl ConformalMap {
    /// The identity map, i.e. integration directly on the intrinsic triangle.
    pub fn identity() -> Self {
        ConformalMap::from_apex([0.0, 1.0])
    }

    fn from_apex(apex: [f64; 2]) -> Self {
        let t = Matrix2::new(1.0, apex[0], 0.0, apex[1]);
        let t_inv = Matrix2::new(1.0, -apex[0] / apex[1], 0.0, 1.0 / apex[1]);
        ConformalMap {
            t,
            t_inv,
            det_t_inv: 1.0 / apex[1],
            apex,
        }
    }

    /// Chooses the apex `(cos(gamma) / lambda, sin(gamma) / lambda)` so the
    /// transformed tangents are orthogonal and of equal length.
    pub fn build(u1: &Vec3, u2: &Vec3) -> Result<Self> {
        let p = shape_params(u1, u2)?;
        let apex = [p.gamma.cos() / p.lambda, p.gamma.sin() / p.lambda];
        Ok(ConformalMap::from_apex(apex))
    }

    pub fn to_eta(&self, xi: [f64; 2]) -> [f64; 2] {
        [xi[0] + self.apex[0] * xi[1], self.apex[1] * xi[1]]
    }

    pub fn to_xi(&self, eta: [f64; 2]) -> [f64; 2] {
        let xi2 = eta[1] / self.apex[1];
        [eta[0] - self.apex[0] * xi2, xi2]
    }

    /// `[U1 U2] T^-1`.
    pub fn transformed_columns(&self, u1: &Vec3, u2: &Vec3) -> (Vec3, Vec3) {
        let m = &self.t_inv;
        (u1 * m[(0, 0)] + u2 * m[(1, 0)], u1 * m[(0, 1)] + u2 * m[(1, 1)])
    }

    /// Triangle vertices in the eta plane, counter-clockwise.
    pub fn triangle(&self) -> [[f64; 2]; 3] {
        [[0.0, 0.0], [1.0, 0.0], self.apex]
    }
}

/// One of the three triangles formed by the field point and an edge of the
/// integration triangle. Angles `theta_bar` are measured from the
/// perpendicular dropped onto the edge, whose direction is `phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubTriangle {
    pub index: usize,
    pub h: f64,
    pub phi: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
}

impl SubTriangle {
    pub fn rho_hat(&self, theta_bar: f64) -> Result<f64> {
        if theta_bar.abs() >= FRAC_PI_2 {
            return Err(Error::OutOfDomain(theta_bar));
        }
        Ok(self.h / theta_bar.cos())
    }

    pub fn span(&self) -> f64 {
        self.theta_hi - self.theta_lo
    }

    /// `int int rho drho dtheta` over the sub-triangle.
    pub fn area(&self) -> f64 {
        0.5 * self.h * self.h * (self.theta_hi.tan() - self.theta_lo.tan())
    }

    /// Interval in the unrotated polar angle `theta = theta_bar + phi`.
    pub fn theta_interval(&self) -> (f64, f64) {
        (self.theta_lo + self.phi, self.theta_hi + self.phi)
    }
}

fn wrap_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

/// Splits a counter-clockwise triangle around an interior point. Edges run
/// from vertex `j` to vertex `j + 1`, so consecutive sub-triangles are also
/// ordered counter-clockwise around the point.
pub fn decompose_triangle(vertices: &[[f64; 2]; 3], point: [f64; 2]) -> Result<[SubTriangle; 3]> {
    let size = (0..3)
        .map(|j| {
            let a = vertices[j];
            let b = vertices[(j + 1) % 3];
            (b[0] - a[0]).hypot(b[1] - a[1])
        })
        .fold(0.0, f64::max);
    let mut subs = [SubTriangle {
        index: 0,
        h: 0.0,
        phi: 0.0,
        theta_lo: 0.0,
        theta_hi: 0.0,
    }; 3];
    for (j, sub) in subs.iter_mut().enumerate() {
        let a = vertices[j];
        let b = vertices[(j + 1) % 3];
        let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
        let len = ex.hypot(ey);
        let (nx, ny) = (ey / len, -ex / len);
        let h = (a[0] - point[0]) * nx + (a[1] - point[1]) * ny;
        if h <= 1e-12 * size {
            return Err(Error::DegenerateSubTriangle {
                edge: j + 1,
                distance: h,
            });
        }
        let phi = ny.atan2(nx);
        let angle_to = |v: [f64; 2]| wrap_angle((v[1] - point[1]).atan2(v[0] - point[0]) - phi);
        *sub = SubTriangle {
            index: j + 1,
            h,
            phi,
            theta_lo: angle_to(a),
            theta_hi: angle_to(b),
        };
    }
    Ok(subs)
}

/// Decomposition of the mapped triangle around `T xi_s`.
pub fn decompose(map: &ConformalMap, xi_s: [f64; 2]) -> Result<[SubTriangle; 3]> {
    decompose_triangle(&map.triangle(), map.to_eta(xi_s))
}

/// Conformal (or identity) map, field point and its three sub-triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarFrame {
    pub map: ConformalMap,
    pub xi_s: [f64; 2],
    pub subs: [SubTriangle; 3],
}

impl PolarFrame {
    pub fn new(map: ConformalMap, xi_s: [f64; 2]) -> Result<Self> {
        let subs = decompose(&map, xi_s)?;
        Ok(PolarFrame { map, xi_s, subs })
    }

    /// Linear map from the rotated local coordinates of `sub`,
    /// `(rho cos(theta_bar), rho sin(theta_bar))`, to an offset in xi.
    pub fn local_matrix(&self, sub: &SubTriangle) -> Matrix2<f64> {
        let (s, c) = sub.phi.sin_cos();
        self.map.t_inv * Matrix2::new(c, -s, s, c)
    }

    pub fn local_to_xi(&self, sub: &SubTriangle, rho: f64, theta_bar: f64) -> [f64; 2] {
        let m = self.local_matrix(sub);
        let (s, c) = theta_bar.sin_cos();
        let d = m * nalgebra::Vector2::new(rho * c, rho * s);
        [self.xi_s[0] + d[0], self.xi_s[1] + d[1]]
    }
}

/// `sigma(w) = w^m / (w^m + (1 - w)^m)`.
pub fn sigmoid(w: f64, m: f64) -> f64 {
    let a = w.powf(m);
    let b = (1.0 - w).powf(m);
    a / (a + b)
}

pub fn sigmoid_inverse(sigma: f64, m: f64) -> f64 {
    let a = sigma.powf(1.0 / m);
    let b = (1.0 - sigma).powf(1.0 / m);
    a / (a + b)
}

pub fn sigmoid_derivative(w: f64, m: f64) -> f64 {
    let a = w.powf(m);
    let b = (1.0 - w).powf(m);
    let denom = a + b;
    m * (w * (1.0 - w)).powf(m - 1.0) / (denom * denom)
}

/// How quadrature points on `w in [0, 1]` are distributed over a
/// sub-triangle's angular interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngularMap {
    /// Affine map onto `[theta_lo, theta_hi]`.
    Affine,
    /// Sigmoid applied to the normalized interval; clusters at both ends.
    NaiveSigmoid { m: f64 },
    /// Sigmoid on the full `(-pi/2, pi/2)` range restricted to the interval,
    /// so points cluster at whichever end lies closer to a right angle.
    Sigmoid { m: f64 },
}

impl AngularMap {
    pub fn apply(&self, sub: &SubTriangle, w: f64) -> (f64, f64) {
        match *self {
            AngularMap::Affine => (sub.theta_lo + sub.span() * w, sub.span()),
            AngularMap::NaiveSigmoid { m } => naive_angular_map(sub, m, w),
            AngularMap::Sigmoid { m } => angular_map(sub, m, w),
        }
    }
}

/// Endpoints `z_{j-1}, z_j` of the sigmoid parameter for a sub-triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmoidalParams {
    pub m: f64,
    pub z_lo: f64,
    pub z_hi: f64,
}

impl SigmoidalParams {
    pub fn new(sub: &SubTriangle, m: f64) -> Self {
        let to_z = |t: f64| sigmoid_inverse((t + FRAC_PI_2) / PI, m);
        SigmoidalParams {
            m,
            z_lo: to_z(sub.theta_lo),
            z_hi: to_z(sub.theta_hi),
        }
    }
}

/// `(theta_bar + pi/2) / pi = sigma(z)` with `z` affine in `w`. Returns
/// `(theta_bar, d theta_bar / dw)`.
pub fn angular_map(sub: &SubTriangle, m: f64, w: f64) -> (f64, f64) {
    let p = SigmoidalParams::new(sub, m);
    if w <= 0.0 {
        return (sub.theta_lo, PI * sigmoid_derivative(p.z_lo, m) * (p.z_hi - p.z_lo));
    }
    if w >= 1.0 {
        return (sub.theta_hi, PI * sigmoid_derivative(p.z_hi, m) * (p.z_hi - p.z_lo));
    }
    let dz = p.z_hi - p.z_lo;
    let z = p.z_lo + dz * w;
    (PI * sigmoid(z, m) - FRAC_PI_2, PI * sigmoid_derivative(z, m) * dz)
}

/// `(theta_bar - theta_lo) / (theta_hi - theta_lo) = sigma(w)`.
pub fn naive_angular_map(sub: &SubTriangle, m: f64, w: f64) -> (f64, f64) {
    let span = sub.span();
    (sub.theta_lo + span * sigmoid(w, m), span * sigmoid_derivative(w, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng) -> Vec3 {
        Vec3::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    }

    #[test]
    fn shape_params_examples() {
        let p = shape_params(&Vec3::new(1.0, 0.0, 0.0), &Vec3::new(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(p.lambda, 1.0);
        assert_abs_diff_eq!(p.gamma, FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(p.mu, 0.0, epsilon = 1e-15);
        let p = shape_params(&Vec3::new(2.0, 0.0, 0.0), &Vec3::new(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(p.lambda, 2.0);
        assert_abs_diff_eq!(p.mu, 0.6, epsilon = 1e-15);
        assert!(matches!(
            shape_params(&Vec3::new(1.0, 0.0, 0.0), &Vec3::new(2.0, 0.0, 0.0)),
            Err(Error::DegenerateTangent(_))
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let p = shape_params(&random_vec(&mut rng), &random_vec(&mut rng)).unwrap();
            assert!(p.mu < 1.0 && p.gamma > 0.0 && p.gamma < PI);
        }
    }

    #[test]
    fn a_of_theta_is_tangent_norm() {
        let e1 = Vec3::new(1.0, 0.0, 0.0);
        let e2 = Vec3::new(0.0, 1.0, 0.0);
        for t in [0.0, 0.3, 2.0, -1.0] {
            assert_abs_diff_eq!(a_of_theta(&e1, &e2, t), 1.0, epsilon = 1e-15);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let u1 = random_vec(&mut rng);
            let u2 = random_vec(&mut rng);
            let t: f64 = rng.gen::<f64>() * 2.0 * PI;
            assert_abs_diff_eq!(a_of_theta(&u1, &u2, 0.0), u1.norm(), epsilon = 1e-15);
            let direct = (u1 * t.cos() + u2 * t.sin()).norm();
            assert_abs_diff_eq!(a_of_theta(&u1, &u2, t), direct, epsilon = 1e-14);
        }
    }

    #[test]
    fn conformal_map_examples() {
        let m = ConformalMap::build(&Vec3::new(1.0, 0.0, 0.0), &Vec3::new(0.0, 1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(m.apex[0], 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(m.apex[1], 1.0, epsilon = 1e-16);
        assert!((m.t - Matrix2::identity()).norm() < 1e-16);

        let u1 = Vec3::new(2.0, 0.0, 0.0);
        let u2 = Vec3::new(0.0, 1.0, 0.0);
        let m = ConformalMap::build(&u1, &u2).unwrap();
        assert_abs_diff_eq!(m.apex[0], 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(m.apex[1], 0.5, epsilon = 1e-16);
        let (b1, b2) = m.transformed_columns(&u1, &u2);
        assert!((b2 - Vec3::new(0.0, 2.0, 0.0)).norm() < 1e-15);
        assert_abs_diff_eq!(b1.norm(), b2.norm(), epsilon = 1e-15);
    }

    #[test]
    fn conformal_map_makes_a_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let u1 = random_vec(&mut rng);
            let u2 = random_vec(&mut rng);
            let m = ConformalMap::build(&u1, &u2).unwrap();
            let (b1, b2) = m.transformed_columns(&u1, &u2);
            assert!(b1.dot(&b2).abs() <= 1e-12 * b1.norm_squared());
            assert!((b1.norm() - b2.norm()).abs() <= 1e-12 * b1.norm());
            let samples: Vec<f64> = (0..360).map(|i| a_of_theta(&b1, &b2, i as f64 * PI / 180.0)).collect();
            let max = samples.iter().cloned().fold(f64::MIN, f64::max);
            let min = samples.iter().cloned().fold(f64::MAX, f64::min);
            assert!(max / min - 1.0 <= 1e-12);
            // Round trip xi -> eta -> xi.
            let xi = [0.2, 0.3];
            let back = m.to_xi(m.to_eta(xi));
            assert_abs_diff_eq!(back[0], xi[0], epsilon = 1e-14);
            assert_abs_diff_eq!(back[1], xi[1], epsilon = 1e-14);
        }
    }

    #[test]
    fn decomposition_of_reference_triangle() {
        let map = ConformalMap::identity();
        let subs = decompose(&map, [0.25, 0.25]).unwrap();
        // Edge 1 is eta2 = 0.
        assert_abs_diff_eq!(subs[0].h, 0.25, epsilon = 1e-15);
        let total: f64 = subs.iter().map(|s| s.span()).sum();
        assert_abs_diff_eq!(total, 2.0 * PI, epsilon = 1e-14);
        let area: f64 = subs.iter().map(|s| s.area()).sum();
        assert_abs_diff_eq!(area, 0.5, epsilon = 1e-15);
        for s in &subs {
            assert!(s.h > 0.0 && s.theta_lo > -FRAC_PI_2 && s.theta_hi < FRAC_PI_2);
        }
        // Consecutive intervals meet.
        for j in 0..3 {
            let (_, hi) = subs[j].theta_interval();
            let (lo, _) = subs[(j + 1) % 3].theta_interval();
            assert_abs_diff_eq!(wrap_angle(hi - lo), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn decomposition_of_random_conformal_triangles() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let map = ConformalMap::build(&random_vec(&mut rng), &random_vec(&mut rng)).unwrap();
            let a: f64 = 0.05 + 0.9 * rng.gen::<f64>();
            let b: f64 = (0.02 + 0.96 * rng.gen::<f64>()) * (1.0 - a);
            let subs = decompose(&map, [a, b]).unwrap();
            let total: f64 = subs.iter().map(|s| s.span()).sum();
            assert_abs_diff_eq!(total, 2.0 * PI, epsilon = 1e-12);
            let area: f64 = subs.iter().map(|s| s.area()).sum();
            assert_abs_diff_eq!(area, 0.5 * map.apex[1], epsilon = 1e-12);
        }
    }

    #[test]
    fn identity_composition_matches_intrinsic_decomposition() {
        let u1 = Vec3::new(0.0, 3.0, 0.0);
        let u2 = Vec3::new(0.0, 0.0, 3.0);
        let conformal = PolarFrame::new(ConformalMap::build(&u1, &u2).unwrap(), [0.2, 0.5]).unwrap();
        let intrinsic = PolarFrame::new(ConformalMap::identity(), [0.2, 0.5]).unwrap();
        for (a, b) in conformal.subs.iter().zip(&intrinsic.subs) {
            assert_abs_diff_eq!(a.h, b.h, epsilon = 1e-15);
            assert_abs_diff_eq!(a.theta_lo, b.theta_lo, epsilon = 1e-15);
            assert_abs_diff_eq!(a.theta_hi, b.theta_hi, epsilon = 1e-15);
        }
    }

    #[test]
    fn field_point_on_edge_is_rejected() {
        let map = ConformalMap::identity();
        assert!(matches!(
            decompose(&map, [0.3, 0.0]),
            Err(Error::DegenerateSubTriangle { edge: 1, .. })
        ));
    }

    #[test]
    fn rho_hat_examples() {
        let sub = SubTriangle {
            index: 1,
            h: 0.5,
            phi: 0.0,
            theta_lo: -1.0,
            theta_hi: 1.2,
        };
        assert_eq!(sub.rho_hat(0.0).unwrap(), 0.5);
        assert_abs_diff_eq!(sub.rho_hat(PI / 3.0).unwrap(), 1.0, epsilon = 1e-15);
        assert!(sub.rho_hat(FRAC_PI_2).is_err());

        let map = ConformalMap::identity();
        let p = [0.2, 0.3];
        let subs = decompose(&map, p).unwrap();
        let verts = map.triangle();
        for s in &subs {
            let a = verts[s.index - 1];
            let b = verts[s.index % 3];
            let da = (a[0] - p[0]).hypot(a[1] - p[1]);
            let db = (b[0] - p[0]).hypot(b[1] - p[1]);
            assert_abs_diff_eq!(s.rho_hat(s.theta_lo).unwrap(), da, epsilon = 1e-14);
            assert_abs_diff_eq!(s.rho_hat(s.theta_hi).unwrap(), db, epsilon = 1e-14);
        }
    }

    #[test]
    fn sigmoid_examples() {
        for m in [1.0, 2.0, 3.0, 7.5] {
            assert_abs_diff_eq!(sigmoid(0.5, m), 0.5, epsilon = 1e-16);
            assert_eq!(sigmoid(0.0, m), 0.0);
            assert_eq!(sigmoid(1.0, m), 1.0);
            // Near w = 1 the forward map rounds 1 - sigma, so the grid covers
            // the lower half and symmetry covers the rest.
            for i in 0..=50 {
                let w = i as f64 / 100.0;
                assert_abs_diff_eq!(sigmoid_inverse(sigmoid(w, m), m), w, epsilon = 1e-14);
                assert_abs_diff_eq!(sigmoid(1.0 - w, m), 1.0 - sigmoid(w, m), epsilon = 1e-15);
            }
        }
        assert_abs_diff_eq!(sigmoid(0.25, 2.0), 0.1, epsilon = 1e-16);
        assert_eq!(sigmoid(0.37, 1.0), 0.37);
    }

    #[test]
    fn sigmoid_derivative_matches_differences() {
        for m in [1.0, 2.0, 2.5, 3.0] {
            for w in [0.1, 0.35, 0.5, 0.8] {
                let h = 1e-6;
                let fd = (sigmoid(w + h, m) - sigmoid(w - h, m)) / (2.0 * h);
                assert_abs_diff_eq!(sigmoid_derivative(w, m), fd, epsilon = 1e-8);
            }
        }
    }

    fn reference_interval_sub() -> SubTriangle {
        SubTriangle {
            index: 2,
            h: 0.1,
            phi: 0.0,
            theta_lo: -1.466,
            theta_hi: 1.005,
        }
    }

    #[test]
    fn angular_maps_hit_endpoints() {
        let sub = reference_interval_sub();
        for map in [
            AngularMap::Affine,
            AngularMap::NaiveSigmoid { m: 3.0 },
            AngularMap::Sigmoid { m: 3.0 },
        ] {
            let (a, _) = map.apply(&sub, 0.0);
            let (b, _) = map.apply(&sub, 1.0);
            assert_abs_diff_eq!(a, sub.theta_lo, epsilon = 1e-13);
            assert_abs_diff_eq!(b, sub.theta_hi, epsilon = 1e-13);
            let mut prev = a;
            for i in 1..200 {
                let (t, d) = map.apply(&sub, i as f64 / 200.0);
                assert!(t > prev && d > 0.0 && d.is_finite());
                prev = t;
            }
        }
        let (t, _) = naive_angular_map(&sub, 1.0, 0.3);
        assert_abs_diff_eq!(t, sub.theta_lo + 0.3 * sub.span(), epsilon = 1e-15);
    }

    #[test]
    fn symmetric_interval_maps_midpoint_to_zero() {
        let sub = SubTriangle {
            index: 1,
            h: 1.0,
            phi: 0.0,
            theta_lo: -1.2,
            theta_hi: 1.2,
        };
        let (t, _) = angular_map(&sub, 2.0, 0.5);
        assert_abs_diff_eq!(t, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn sigmoid_clusters_towards_the_nearer_right_angle() {
        let sub = reference_interval_sub();
        let g = gauss_legendre(10);
        let thetas: Vec<f64> = g.unit_interval().map(|(w, _)| angular_map(&sub, 3.0, w).0).collect();
        let gap_lo = thetas[1] - thetas[0];
        let gap_hi = thetas[9] - thetas[8];
        assert!(gap_lo < gap_hi, "{gap_lo} vs {gap_hi}");
        assert!(thetas[0] - sub.theta_lo < sub.theta_hi - thetas[9]);
    }

    #[test]
    fn angular_map_derivative_matches_differences() {
        let sub = reference_interval_sub();
        for w in [0.1, 0.4, 0.9] {
            let h = 1e-6;
            let fd = (angular_map(&sub, 2.5, w + h).0 - angular_map(&sub, 2.5, w - h).0) / (2.0 * h);
            assert_abs_diff_eq!(angular_map(&sub, 2.5, w).1, fd, epsilon = 1e-7);
        }
    }

    #[test]
    fn polar_substitution_reproduces_plane_integral() {
        // f(xi) = 1 + xi1 + xi2^2 over the reference triangle, integrated in
        // the conformal plane through (rho, theta_bar(w)).
        let f = |xi: [f64; 2]| 1.0 + xi[0] + xi[1] * xi[1];
        let exact = 0.5 + 1.0 / 6.0 + 1.0 / 12.0;
        let u1 = Vec3::new(1.3, 0.2, 0.0);
        let u2 = Vec3::new(0.4, 0.7, 0.3);
        let frame = PolarFrame::new(ConformalMap::build(&u1, &u2).unwrap(), [0.15, 0.7]).unwrap();
        let ga = gauss_legendre(40);
        let gr = gauss_legendre(8);
        let mut total = 0.0;
        for sub in &frame.subs {
            for (w, ww) in ga.unit_interval() {
                let (t, dt) = angular_map(sub, 2.0, w);
                let rh = sub.rho_hat(t).unwrap();
                for (s, ws) in gr.unit_interval() {
                    let rho = s * rh;
                    let xi = frame.local_to_xi(sub, rho, t);
                    total += ww * dt * ws * rh * rho * f(xi) * frame.map.det_t_inv;
                }
            }
        }
        assert_abs_diff_eq!(total, exact, epsilon = 1e-10);
    }
}
