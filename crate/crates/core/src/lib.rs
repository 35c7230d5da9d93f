//! Singular boundary-element quadrature on curved quadratic triangles and a
//! locally corrected Nyström solver for the Burton-Miller equation.

pub mod basis;
pub mod error;
pub mod expansion;
pub mod experiments;
pub mod geometry;
pub mod kernels;
pub mod nystrom;
pub mod polar_frame;
pub mod quadrature;
pub mod singular_quad;

pub use basis::Polynomial;
pub use error::{Error, Result};
pub use geometry::{CurvedElement, SurfaceMesh, Vec3};
pub use kernels::{KernelSpec, LayerOperator, WaveContext};
pub use singular_quad::{integrate_singular, reference_value, QuadConfig, SingularResult, Variant};
