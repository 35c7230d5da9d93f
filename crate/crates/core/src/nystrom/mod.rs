//! Second-order Nyström discretization of the layer operators with locally
//! corrected weights, and the Burton-Miller radiation solver built on it.

mod assemble;
mod correction;
mod near;
mod nodes;
mod solve;

pub use assemble::{
    assemble, assemble_burton_miller, assemble_cbie, operator_rows, AssemblyConfig, BemSystem, Formulation,
    OperatorCombination, NEAR_FIELD_FACTOR,
};
pub use correction::{local_correction_weights, CorrectionBasis};
pub use near::{nearly_singular_integral, NearConfig, NearResult};
pub use nodes::{nystrom_nodes, NystromNode};
pub use solve::{l2_surface_error, solve_neumann_radiation, ManufacturedSolution, RadiationSolution};
