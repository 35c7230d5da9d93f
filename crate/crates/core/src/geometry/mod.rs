//! Curved 6-node triangles, surface meshes and the canonical test geometries.

mod element;
mod generators;
mod mesh;

pub use element::{shape_derivatives, shape_functions, CurvedElement, Vec3, NODE_COORDS};
pub use generators::{generate_sphere_mesh, make_cylinder_element, random_curved_element};
pub use mesh::{read_mesh, write_mesh, SurfaceMesh};
