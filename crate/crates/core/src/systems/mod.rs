//! Model registry and numerical validators for the structural hypotheses.

pub mod hypotheses;
pub mod spec;

pub use hypotheses::*;
pub use spec::{
    builtin_system1j, builtin_three_wave, ConeFn, NonlinearityFn, PotentialFn, SupermodularPart,
    SystemSpec,
};
