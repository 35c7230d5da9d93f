use std::time::Instant;

use nalgebra::DVector;
use num_complex::Complex64;

use super::assemble::{assemble, AssemblyConfig};
use super::nodes::NystromNode;
use crate::error::{Error, Result};
use crate::geometry::{SurfaceMesh, Vec3};
use crate::kernels::green;

/// Field of a point source inside the body: `u = G(x, source)`, a radiating
/// exterior solution with Neumann data `q = G'(r) (x - source) . n / r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedSolution {
    pub source: Vec3,
    pub k: f64,
}

impl ManufacturedSolution {
    pub fn new(source: Vec3, k: f64) -> Self {
        ManufacturedSolution { source, k }
    }

    pub fn u(&self, x: &Vec3) -> Result<Complex64> {
        green(x, &self.source, self.k)
    }

    pub fn q(&self, x: &Vec3, n: &Vec3) -> Result<Complex64> {
        let d = x - self.source;
        let r = d.norm();
        let g1 = Complex64::new(-1.0, self.k * r)
            * Complex64::from_polar(1.0 / (4.0 * std::f64::consts::PI * r * r), self.k * r);
        Ok(g1 * (d.dot(n) / r))
    }

    pub fn boundary_data(&self, nodes: &[NystromNode]) -> Result<(DVector<Complex64>, DVector<Complex64>)> {
        let u: Result<Vec<_>> = nodes.iter().map(|n| self.u(&n.point)).collect();
        let q: Result<Vec<_>> = nodes.iter().map(|n| self.q(&n.point, &n.normal)).collect();
        Ok((DVector::from_vec(u?), DVector::from_vec(q?)))
    }
}

#[derive(Debug, Clone)]
pub struct RadiationSolution {
    pub nodes: Vec<NystromNode>,
    pub u: DVector<Complex64>,
    pub assembly_seconds: f64,
    pub solve_seconds: f64,
    pub capped_integrals: usize,
}

/// Surface pressure from Neumann data `q` given at the Nyström nodes of
/// `mesh` (node order as in [`super::nystrom_nodes`]).
pub fn solve_neumann_radiation(
    mesh: &SurfaceMesh,
    k: f64,
    q: &DVector<Complex64>,
    cfg: &AssemblyConfig,
) -> Result<RadiationSolution> {
    let system = assemble(mesh, k, cfg)?;
    if q.len() != system.dimension() {
        return Err(Error::Parameter(format!(
            "expected {} Neumann values, got {}",
            system.dimension(),
            q.len()
        )));
    }
    let start = Instant::now();
    let u = system.solve(q)?;
    Ok(RadiationSolution {
        u,
        solve_seconds: start.elapsed().as_secs_f64(),
        assembly_seconds: system.assembly_seconds,
        capped_integrals: system.capped_integrals,
        nodes: system.nodes,
    })
}

/// `sqrt(sum w |u - u_exact|^2) / sqrt(sum w |u_exact|^2)`.
pub fn l2_surface_error(u: &DVector<Complex64>, exact: &DVector<Complex64>, nodes: &[NystromNode]) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((a, b), n) in u.iter().zip(exact.iter()).zip(nodes) {
        num += n.weight * (a - b).norm_sqr();
        den += n.weight * b.norm_sqr();
    }
    if den == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((num / den).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::generate_sphere_mesh;
    use crate::kernels::{kernel_value, KernelSpec, LayerOperator};
    use crate::nystrom::nystrom_nodes;

    #[test]
    fn l2_error_examples() {
        let nodes = nystrom_nodes(&generate_sphere_mesh(0)).unwrap();
        let exact = DVector::from_fn(nodes.len(), |i, _| Complex64::new(1.0 + i as f64, -0.5));
        assert_eq!(l2_surface_error(&exact, &exact, &nodes).unwrap(), 0.0);
        let scaled = &exact * Complex64::new(1.01, 0.0);
        assert!((l2_surface_error(&scaled, &exact, &nodes).unwrap() - 0.01).abs() < 1e-14);
        let pert = DVector::from_fn(nodes.len(), |i, _| Complex64::new((i as f64).sin(), 0.3));
        let e1 = l2_surface_error(&(&exact + &pert * Complex64::new(1e-3, 0.0)), &exact, &nodes).unwrap();
        let e2 = l2_surface_error(&(&exact + &pert * Complex64::new(2e-3, 0.0)), &exact, &nodes).unwrap();
        assert!((e2 / e1 - 2.0).abs() < 1e-12);
        let zero = DVector::zeros(nodes.len());
        assert!(matches!(l2_surface_error(&exact, &zero, &nodes), Err(Error::ZeroNorm)));
    }

    #[test]
    fn neumann_data_is_normal_derivative_of_source_field() {
        let m = ManufacturedSolution::new(Vec3::new(0.1, -0.2, 0.05), 2.5);
        let x = Vec3::new(0.9, 0.3, -0.4);
        let n = Vec3::new(0.3, 0.8, -0.2).normalize();
        let h = 1e-5;
        let fd = (m.u(&(x + n * h)).unwrap() - m.u(&(x - n * h)).unwrap()) / (2.0 * h);
        assert!((m.q(&x, &n).unwrap() - fd).norm() < 1e-8);
        // Same as the adjoint kernel with the source as the integration point.
        let adj = kernel_value(KernelSpec::new(LayerOperator::Adjoint, 2.5), &x, &m.source, &n, &n).unwrap();
        assert!((m.q(&x, &n).unwrap() - adj).norm() < 1e-14);
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let mesh = generate_sphere_mesh(0);
        let q = DVector::zeros(120);
        let sol = solve_neumann_radiation(&mesh, 1.0, &q, &AssemblyConfig::default()).unwrap();
        assert!(sol.u.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn coarse_sphere_radiation_is_accurate() {
        let mesh = generate_sphere_mesh(1);
        let m = ManufacturedSolution::new(Vec3::new(0.1, 0.05, -0.1), 2.5);
        let nodes = nystrom_nodes(&mesh).unwrap();
        let (exact, q) = m.boundary_data(&nodes).unwrap();
        let sol = solve_neumann_radiation(&mesh, 2.5, &q, &AssemblyConfig::default()).unwrap();
        let err = l2_surface_error(&sol.u, &exact, &sol.nodes).unwrap();
        assert!(err < 5e-2, "{err}");
    }
}
