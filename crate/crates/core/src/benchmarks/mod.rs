//! Benchmark objectives: base functions, shift/rotation transforms, hybrid and
//! composition constructors, and the named suite registry.

mod functions;
mod objective;
pub mod registry;
mod transform;

pub use functions::BaseFunction;
pub use objective::{
    composition_weight, error_value, hybrid_ranges, CompositionComponent, HybridGroup,
    ObjectiveKind, ObjectiveSpec, BELOW_OPTIMUM_SLACK, ERROR_FLOOR,
};
pub use transform::{TransformData, LOAD_ORTHOGONALITY_TOL};
