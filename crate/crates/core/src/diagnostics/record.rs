use serde::Serialize;

use super::virial::{localized_l3, localized_mass, virial_m, virial_mprime, virial_mprime_discrete};
use super::weight::{CutoffChi, MorawetzWeight};
use crate::error::Result;
use crate::evolution::tail_fraction;
use crate::fields::{FieldState, Functionals, RadialGrid};
use crate::groundstate::GroundStateResult;
use crate::systems::SystemSpec;

/// One time sample of the monitored quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct DiagnosticsRecord {
    pub t: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "E")]
    pub e_beta: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "M")]
    pub m: f64,
    /// Continuum formula for `M'`.
    #[serde(rename = "Mprime")]
    pub m_prime: f64,
    /// Exact derivative of `M` along the semi-discrete flow.
    #[serde(rename = "Mprime_sd")]
    pub m_prime_sd: f64,
    /// Centered time difference of `M` (filled after the run).
    #[serde(rename = "Mprime_fd")]
    pub m_prime_fd: Option<f64>,
    pub loc_mass: f64,
    #[serde(rename = "loc_L3")]
    pub loc_l3: f64,
    /// `Q(u)K(u) / (Q(ψ)K(ψ))` when a ground state is known.
    pub coercivity_ratio: Option<f64>,
    /// Share of `Q` beyond `0.9 r_max`.
    pub tail_mass: f64,
}

impl DiagnosticsRecord {
    /// Record with only the time stamp set.
    pub fn at(t: f64) -> Self {
        Self {
            t,
            ..Default::default()
        }
    }
}

/// Radii used by [`Recorder`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticsRadii {
    pub r_weight: f64,
    pub r_cutoff: f64,
    pub r_loc: f64,
}

/// Computes a [`DiagnosticsRecord`] from a state snapshot.
#[derive(Debug, Clone)]
pub struct Recorder {
    spec: SystemSpec,
    weight: MorawetzWeight,
    chi: CutoffChi,
    r_loc: f64,
    gs_product: Option<f64>,
}

impl Recorder {
    pub fn new(
        spec: &SystemSpec,
        grid: &RadialGrid,
        radii: DiagnosticsRadii,
        gs: Option<&GroundStateResult>,
    ) -> Result<Self> {
        Ok(Self {
            spec: spec.clone(),
            weight: MorawetzWeight::new(radii.r_weight, grid)?,
            chi: CutoffChi::new(radii.r_cutoff, grid)?,
            r_loc: radii.r_loc,
            gs_product: gs.map(|g| g.q * g.k),
        })
    }

    pub fn weight(&self) -> &MorawetzWeight {
        &self.weight
    }

    pub fn record(&self, state: &FieldState) -> Result<DiagnosticsRecord> {
        let fun = Functionals::evaluate(state, &self.spec)?;
        Ok(DiagnosticsRecord {
            t: state.t,
            q: fun.q,
            e_beta: fun.e,
            k: fun.k,
            p: fun.p,
            m: virial_m(state, &self.spec, &self.weight)?,
            m_prime: virial_mprime(state, &self.spec, &self.weight)?,
            m_prime_sd: virial_mprime_discrete(state, &self.spec, &self.weight)?,
            m_prime_fd: None,
            loc_mass: localized_mass(state, &self.spec, &self.chi)?,
            loc_l3: localized_l3(state, self.r_loc),
            coercivity_ratio: self.gs_product.map(|p| fun.q * fun.k / p),
            tail_mass: tail_fraction(state, &self.spec),
        })
    }
}
