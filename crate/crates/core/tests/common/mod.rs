#![allow(dead_code)]

use std::sync::{Arc, OnceLock};

use quadnls::fields::RadialGrid;
use quadnls::groundstate::{solve_ground_state, GroundStateResult, SolverOptions};
use quadnls::systems::{builtin_system1j, SystemSpec};

pub fn system() -> SystemSpec {
    builtin_system1j(0.5).unwrap()
}

/// Ground state at ω = 1 on a modest grid, shared across tests.
pub fn ground_state() -> &'static GroundStateResult {
    static GS: OnceLock<GroundStateResult> = OnceLock::new();
    GS.get_or_init(|| {
        let grid = Arc::new(RadialGrid::new(30.0, 2048).unwrap());
        solve_ground_state(&system(), 1.0, grid, &SolverOptions::default()).unwrap()
    })
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
