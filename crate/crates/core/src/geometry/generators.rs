use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{Rotation3, Unit};
use rand::Rng;

use super::element::{CurvedElement, Vec3};
use super::mesh::SurfaceMesh;

/// Patch of the unit-radius cylinder around the z-axis. Corners sit at
/// (angle, z) = (0, 0), (pi/3, 0), (0, s); mid-side nodes sit on the cylinder
/// at the parameter midpoints. `s` stretches the element axially.
pub fn make_cylinder_element(s: f64) -> CurvedElement {
    assert!(s > 0.0, "cylinder element length must be positive");
    let on_cylinder = |angle: f64, z: f64| Vec3::new(angle.cos(), angle.sin(), z);
    CurvedElement::new([
        on_cylinder(0.0, 0.0),
        on_cylinder(PI / 3.0, 0.0),
        on_cylinder(0.0, s),
        on_cylinder(PI / 6.0, 0.0),
        on_cylinder(PI / 6.0, 0.5 * s),
        on_cylinder(0.0, 0.5 * s),
    ])
}

/// Random, moderately curved and non-degenerate element with arbitrary
/// placement in space. Used by the property suites.
pub fn random_curved_element<R: Rng + ?Sized>(rng: &mut R) -> CurvedElement {
    loop {
        let mut jitter = |amp: f64| amp * (2.0 * rng.gen::<f64>() - 1.0);
        let p1 = Vec3::new(jitter(0.15), jitter(0.15), 0.0);
        let p2 = Vec3::new(jitter(0.15), 1.0 + jitter(0.15), 0.0);
        let p3 = Vec3::new(1.0 + jitter(0.15), jitter(0.15), 0.0);
        let mut mid = |a: Vec3, b: Vec3| 0.5 * (a + b) + Vec3::new(jitter(0.05), jitter(0.05), jitter(0.2));
        let nodes = [p1, p2, p3, mid(p1, p2), mid(p2, p3), mid(p3, p1)];

        let axis = Vec3::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        let rotation = match Unit::try_new(axis, 1e-6) {
            Some(axis) => Rotation3::from_axis_angle(&axis, rng.gen::<f64>() * 2.0 * PI),
            None => Rotation3::identity(),
        };
        let scale = 0.5 + 1.5 * rng.gen::<f64>();
        let shift = Vec3::new(rng.gen(), rng.gen(), rng.gen());
        let nodes = nodes.map(|p| rotation * p * scale + shift);
        let element = CurvedElement::new(nodes);
        if element.validate().is_ok() {
            return element;
        }
    }
}

// Unit icosahedron faces, counter-clockwise seen from outside.
fn icosahedron() -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let vertices = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|v| Vec3::new(v[0], v[1], v[2]).normalize())
    .collect::<Vec<_>>();
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let faces = faces
        .into_iter()
        .map(|[a, b, c]: [usize; 3]| {
            let (pa, pb, pc) = (vertices[a], vertices[b], vertices[c]);
            if (pb - pa).cross(&(pc - pa)).dot(&(pa + pb + pc)) > 0.0 {
                [a, b, c]
            } else {
                [a, c, b]
            }
        })
        .collect();
    (vertices, faces)
}

struct MidpointCache {
    map: HashMap<(usize, usize), usize>,
}

impl MidpointCache {
    fn get(&mut self, a: usize, b: usize, points: &mut Vec<Vec3>) -> usize {
        let key = (a.min(b), a.max(b));
        *self.map.entry(key).or_insert_with(|| {
            points.push((0.5 * (points[a] + points[b])).normalize());
            points.len() - 1
        })
    }
}

/// Unit sphere from a refined icosahedron with every node projected onto
/// the sphere. Level `L` has `20 * 4^L` quadratic elements with outward
/// normals.
pub fn generate_sphere_mesh(level: u32) -> SurfaceMesh {
    let (mut points, mut faces) = icosahedron();
    for _ in 0..level {
        let mut cache = MidpointCache { map: HashMap::new() };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = cache.get(a, b, &mut points);
            let bc = cache.get(b, c, &mut points);
            let ca = cache.get(c, a, &mut points);
            next.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        faces = next;
    }

    let mut cache = MidpointCache { map: HashMap::new() };
    let elements = faces
        .into_iter()
        .map(|[a, b, c]| {
            // U1 runs towards node 3 and U2 towards node 2, so an outward
            // face (a, b, c) becomes nodes (a, c, b).
            let m12 = cache.get(a, c, &mut points);
            let m23 = cache.get(c, b, &mut points);
            let m31 = cache.get(b, a, &mut points);
            [a, c, b, m12, m23, m31]
        })
        .collect();
    SurfaceMesh::new(points, elements).expect("generated sphere mesh is consistent")
}
