//! Threshold monitors against the ground state: coercivity on balls and
//! the classification of initial data.

use serde::Serialize;

use super::weight::CutoffChi;
use crate::error::{invalid, Result};
use crate::fields::functionals::check_compatible;
use crate::fields::operators::radial_derivative_into;
use crate::fields::{FieldState, Functionals, RadialGrid};
use crate::groundstate::GroundStateResult;
use crate::systems::SystemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoercivityRecord {
    /// `Q(χu) K(χu) / (Q(ψ) K(ψ))`
    pub threshold_ratio: f64,
    /// `K(χu) − (5/2) Re∫F(χu)`
    pub gap: f64,
    /// `∫ Σ|χu_k|³`
    pub cubic_mass: f64,
    /// `gap / cubic_mass`, absent when the cubic mass vanishes.
    pub gap_over_cubic: Option<f64>,
    /// `∫ χ² Σγ_k|∇u_k|²`
    pub identity_lhs: f64,
    /// `K(χu) + ∫ χΔχ Σγ_k|u_k|²`
    pub identity_rhs: f64,
}

fn ground_product(gs: &GroundStateResult) -> Result<f64> {
    if (gs.omega - 1.0).abs() > 1e-12 {
        return invalid(format!(
            "threshold comparisons need the ground state at omega = 1, got {}",
            gs.omega
        ));
    }
    let p = gs.q * gs.k;
    if !(p > 0.0) {
        return invalid("ground-state product Q K is not positive");
    }
    Ok(p)
}

pub fn coercivity_monitor(
    state: &FieldState,
    spec: &SystemSpec,
    gs: &GroundStateResult,
    chi: &CutoffChi,
) -> Result<CoercivityRecord> {
    check_compatible(state, spec)?;
    let product = ground_product(gs)?;
    let cut = state.multiplied_by(&chi.values);
    let fun = Functionals::evaluate(&cut, spec)?;
    let grid = state.grid();
    let cubic_mass = grid.integrate_unchecked((0..grid.len()).map(|i| {
        cut.components().iter().map(|c| c[i].norm().powi(3)).sum::<f64>()
    }));
    let gap = fun.k - 2.5 * fun.p;

    let h = grid.spacing();
    let mut du = vec![num_complex::Complex64::default(); grid.len()];
    let mut lhs = 0.0;
    let mut correction = 0.0;
    for (k, u) in state.components().iter().enumerate() {
        let g = spec.gamma()[k];
        radial_derivative_into(u, h, &mut du);
        lhs += g * grid.integrate_unchecked(
            du.iter().zip(&chi.values).map(|(d, c)| c * c * d.norm_sqr()),
        );
        correction += g * grid.integrate_unchecked(
            u.iter()
                .zip(chi.values.iter().zip(&chi.lap))
                .map(|(z, (c, l))| c * l * z.norm_sqr()),
        );
    }
    Ok(CoercivityRecord {
        threshold_ratio: fun.q * fun.k / product,
        gap,
        cubic_mass,
        gap_over_cubic: (cubic_mass > 0.0).then(|| gap / cubic_mass),
        identity_lhs: lhs,
        identity_rhs: fun.k + correction,
    })
}

/// `|∫ χ_R Δχ_R Σγ_k|u_k|²|`.
fn cutoff_error(state: &FieldState, spec: &SystemSpec, chi: &CutoffChi) -> f64 {
    let grid = state.grid();
    state
        .components()
        .iter()
        .enumerate()
        .map(|(k, u)| {
            spec.gamma()[k]
                * grid.integrate_unchecked(
                    u.iter()
                        .zip(chi.values.iter().zip(&chi.lap))
                        .map(|(z, (c, l))| c * l * z.norm_sqr()),
                )
        })
        .sum::<f64>()
        .abs()
}

/// Radius for the coercivity-on-balls monitor.
///
/// With `ρ₀ = Q(u₀)K(u₀)/(Q(ψ)K(ψ))` and `δ = (1 − ρ₀)/2`, the measured
/// constant `C(R) = |∫χ_RΔχ_R Σγ|u₀|²| R² / Q(u₀)` must satisfy
/// `C(R)/R² · Q(u₀)² < δ Q(ψ)K(ψ)`. Returns the smallest grid radius from
/// which the bound holds for every larger candidate (up to `r_max`), or
/// `r_max/4` when the bound holds everywhere.
pub fn choose_coercivity_radius(
    state0: &FieldState,
    spec: &SystemSpec,
    gs: &GroundStateResult,
) -> Result<f64> {
    check_compatible(state0, spec)?;
    let product = ground_product(gs)?;
    let grid: &RadialGrid = state0.grid();
    let fun = Functionals::evaluate(state0, spec)?;
    let rho0 = fun.q * fun.k / product;
    if !(rho0 < 1.0) {
        return invalid(format!("data is not below the kinetic threshold (ratio {rho0})"));
    }
    let default = grid.r_max() / 4.0;
    if fun.q == 0.0 {
        return Ok(default);
    }
    let delta = 0.5 * (1.0 - rho0);
    let stride = (grid.len() / 256).max(1);
    let mut last_violation = None;
    let mut candidates = Vec::new();
    for i in (stride..grid.len()).step_by(stride) {
        let radius = grid.radii()[i];
        let chi = CutoffChi::new(radius, grid)?;
        let c = cutoff_error(state0, spec, &chi) * radius * radius / fun.q;
        let bound = c / (radius * radius) * fun.q * fun.q;
        if !(bound < delta * product) {
            last_violation = Some(candidates.len());
        }
        candidates.push(radius);
    }
    Ok(match last_violation {
        None => default,
        Some(j) if j + 1 < candidates.len() => candidates[j + 1],
        Some(_) => grid.r_max(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdVerdict {
    BelowThreshold,
    AboveThreshold,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: ThresholdVerdict,
    /// `Q(u₀)E_β(u₀) / (Q(ψ)E₀(ψ))`
    #[serde(rename = "ratio_QE")]
    pub ratio_qe: f64,
    /// `Q(u₀)K(u₀) / (Q(ψ)K(ψ))`
    #[serde(rename = "ratio_QK")]
    pub ratio_qk: f64,
    pub tolerance: f64,
}

pub const BOUNDARY_TOL: f64 = 1e-6;

/// Compares the mass–energy and mass–kinetic products of `state0` with
/// those of the ground state at `ω = 1`, `β = 0`.
pub fn classify_threshold(
    state0: &FieldState,
    spec: &SystemSpec,
    gs: &GroundStateResult,
) -> Result<Classification> {
    check_compatible(state0, spec)?;
    let qk_gs = ground_product(gs)?;
    let qe_gs = gs.q * gs.e0;
    if !(qe_gs > 0.0) {
        return invalid("ground-state product Q E is not positive");
    }
    let fun = Functionals::evaluate(state0, spec)?;
    let ratio_qe = fun.q * fun.e / qe_gs;
    let ratio_qk = fun.q * fun.k / qk_gs;
    let verdict = if (ratio_qe - 1.0).abs() <= BOUNDARY_TOL || (ratio_qk - 1.0).abs() <= BOUNDARY_TOL {
        ThresholdVerdict::Boundary
    } else if ratio_qe < 1.0 && ratio_qk < 1.0 {
        ThresholdVerdict::BelowThreshold
    } else {
        ThresholdVerdict::AboveThreshold
    };
    Ok(Classification {
        verdict,
        ratio_qe,
        ratio_qk,
        tolerance: BOUNDARY_TOL,
    })
}
