//! Radial grids, discrete operators and the global functionals.

pub mod functionals;
pub mod grid;
pub mod operators;
pub mod state;

pub use functionals::{
    component_norms_sq, energy_e, kinetic_k, mass_q, potential_density, potential_p,
    weighted_mass_calq, Functionals,
};
pub use grid::{integrate, make_radial_grid, RadialGrid, SPHERE_AREA};
pub use operators::{dirichlet_form, radial_derivative, radial_laplacian};
pub use state::FieldState;
