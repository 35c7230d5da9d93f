use crate::error::Result;
use crate::geometry::{SurfaceMesh, Vec3};
use crate::quadrature::TriangleRule;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NystromNode {
    pub element: usize,
    pub xi: [f64; 2],
    pub point: Vec3,
    pub normal: Vec3,
    /// Rule weight times `|J|`.
    pub weight: f64,
}

/// Six nodes per element from the symmetric degree-4 rule, numbered
/// element by element, so node `6 e + j` is rule point `j` on element `e`.
pub fn nystrom_nodes(mesh: &SurfaceMesh) -> Result<Vec<NystromNode>> {
    let rule = TriangleRule::six_point();
    let mut nodes = Vec::with_capacity(6 * mesh.elements().len());
    for (index, element) in mesh.curved_elements().enumerate() {
        for (xi, w) in rule.points.iter().zip(&rule.weights) {
            nodes.push(NystromNode {
                element: index,
                xi: *xi,
                point: element.map_to_physical(*xi),
                normal: element.unit_normal(*xi)?,
                weight: w * element.jacobian_norm(*xi),
            });
        }
    }
    Ok(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_sphere_mesh, CurvedElement};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn single_element_mesh(e: &CurvedElement) -> SurfaceMesh {
        SurfaceMesh::new(e.nodes().to_vec(), vec![[0, 1, 2, 3, 4, 5]]).unwrap()
    }

    #[test]
    fn flat_reference_weights_sum_to_area() {
        let nodes = nystrom_nodes(&single_element_mesh(&CurvedElement::flat_reference())).unwrap();
        assert_eq!(nodes.len(), 6);
        let total: f64 = nodes.iter().map(|n| n.weight).sum();
        assert_abs_diff_eq!(total, 0.5, epsilon = 1e-15);
        for n in &nodes {
            let min_bary = n.xi[0].min(n.xi[1]).min(1.0 - n.xi[0] - n.xi[1]);
            assert!(min_bary > 0.09 && n.weight > 0.0);
        }
    }

    #[test]
    fn sphere_weights_approximate_surface_area() {
        let nodes = nystrom_nodes(&generate_sphere_mesh(1)).unwrap();
        assert_eq!(nodes.len(), 6 * 80);
        let total: f64 = nodes.iter().map(|n| n.weight).sum();
        assert!((total / (4.0 * PI) - 1.0).abs() < 0.01);
        assert!(nodes.iter().all(|n| n.normal.dot(&n.point) > 0.0));
    }
}
