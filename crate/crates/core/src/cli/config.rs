//! Run configuration: one TOML file, every section optional except
//! `[system]`. Unknown keys are rejected.
//!
//! ```toml
//! rng_seed = 0
//! output_dir = "runs/kappa-half"
//!
//! [system]
//! name = "system1J"          # or "three-wave" with alpha = [..], gamma = [..]
//! kappa = 0.5
//!
//! [grid]
//! r_max = 40.0
//! n_points = 4096
//!
//! [initial]
//! family = "gaussian"        # "scaled-ground-state", "perturbed-ground-state", "csv"
//! amplitudes = [1.0, 1.0]
//! widths = [2.0, 2.0]
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::evolution::{BoundaryRule, EvolveOptions, Scheme};
use crate::groundstate::SolverOptions;
use crate::systems::{builtin_system1j, builtin_three_wave, SystemSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub groundstate: GroundStateConfig,
    #[serde(default)]
    pub evolve: EvolveConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub initial: InitialData,
    #[serde(default)]
    pub hypotheses: HypothesesConfig,
    #[serde(default)]
    pub morawetz: MorawetzConfig,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("quadnls-out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", deny_unknown_fields)]
pub enum SystemConfig {
    #[serde(rename = "system1J")]
    System1J {
        kappa: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<Vec<f64>>,
    },
    #[serde(rename = "three-wave")]
    ThreeWave {
        alpha: [f64; 3],
        gamma: [f64; 3],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<Vec<f64>>,
    },
}

impl SystemConfig {
    pub fn build(&self) -> crate::Result<SystemSpec> {
        let (spec, beta) = match self {
            SystemConfig::System1J { kappa, beta } => (builtin_system1j(*kappa)?, beta),
            SystemConfig::ThreeWave { alpha, gamma, beta } => (builtin_three_wave(*alpha, *gamma)?, beta),
        };
        match beta {
            Some(b) => spec.with_beta(b.clone()),
            None => Ok(spec),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub r_max: f64,
    pub n_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            r_max: 40.0,
            n_points: 4096,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroundStateConfig {
    pub omega: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GroundStateConfig {
    fn default() -> Self {
        let d = SolverOptions::default();
        Self {
            omega: 1.0,
            tol: d.tol,
            max_iter: d.max_iter,
        }
    }
}

impl GroundStateConfig {
    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpongeConfig {
    pub strength: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    pub kinetic_guard: f64,
    pub tail_guard: f64,
    pub scheme: Scheme,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sponge: Option<SpongeConfig>,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        let d = EvolveOptions::default();
        Self {
            dt: d.dt,
            t_end: d.t_end,
            record_every: d.record_every,
            kinetic_guard: d.kinetic_guard,
            tail_guard: d.tail_guard,
            scheme: d.scheme,
            sponge: None,
        }
    }
}

impl EvolveConfig {
    pub fn options(&self) -> EvolveOptions {
        EvolveOptions {
            dt: self.dt,
            t_end: self.t_end,
            record_every: self.record_every,
            boundary: match self.sponge {
                Some(s) => BoundaryRule::Sponge {
                    strength: s.strength,
                    width: s.width,
                },
                None => BoundaryRule::Dirichlet,
            },
            scheme: self.scheme,
            kinetic_guard: self.kinetic_guard,
            tail_guard: self.tail_guard,
            snapshot_every: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    /// Morawetz weight radius.
    pub r_weight: f64,
    /// Cutoff radius for the localized mass.
    pub r_cutoff: f64,
    /// Ball radius for the localized `L³` quantity.
    pub r_loc: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            r_weight: 5.0,
            r_cutoff: 10.0,
            r_loc: 5.0,
        }
    }
}

/// Initial data families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", deny_unknown_fields)]
pub enum InitialData {
    /// `u_k = a_k exp(−r²/w_k²)`.
    #[serde(rename = "gaussian")]
    Gaussian { amplitudes: Vec<f64>, widths: Vec<f64> },
    /// `u_k = λ ψ_k`.
    #[serde(rename = "scaled-ground-state")]
    ScaledGroundState { lambda: f64 },
    /// `u_k = ψ_k (1 + ε sin(mode · r))`.
    #[serde(rename = "perturbed-ground-state")]
    PerturbedGroundState { mode: f64, eps: f64 },
    /// Columns `r, u_1, …, u_l` (real) or `r, re u_1, im u_1, …` on the
    /// configured grid.
    #[serde(rename = "csv")]
    Csv { path: PathBuf },
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::ScaledGroundState { lambda: 0.5 }
    }
}

impl InitialData {
    pub fn needs_ground_state(&self) -> bool {
        matches!(
            self,
            InitialData::ScaledGroundState { .. } | InitialData::PerturbedGroundState { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HypothesesConfig {
    pub samples: usize,
    /// Weights for the weighted-resonance check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<f64>>,
}

impl Default for HypothesesConfig {
    fn default() -> Self {
        Self {
            samples: 1000,
            sigma: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct MorawetzConfig {
    /// `(R, T)` pairs for the averaged table; defaults to `R = T^{1/3}` at
    /// `T = t_end/4, t_end/2, t_end`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<[f64; 2]>>,
}

impl MorawetzConfig {
    pub fn resolved_pairs(&self, t_end: f64) -> Vec<[f64; 2]> {
        match &self.pairs {
            Some(p) => p.clone(),
            None => [0.25, 0.5, 1.0]
                .iter()
                .map(|f| {
                    let t = f * t_end;
                    [t.cbrt(), t]
                })
                .collect(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, String> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks that need more than one field.
    pub fn validate(&self) -> Result<(), String> {
        let spec = self.system.build().map_err(|e| format!("system: {e}"))?;
        let l = spec.l();
        if let InitialData::Gaussian { amplitudes, widths } = &self.initial {
            if amplitudes.len() != l || widths.len() != l {
                return Err(format!(
                    "initial: gaussian needs {l} amplitudes and {l} widths, got {} and {}",
                    amplitudes.len(),
                    widths.len()
                ));
            }
            if widths.iter().any(|w| !(*w > 0.0)) {
                return Err("initial: gaussian widths must be positive".into());
            }
        }
        if let Some(sigma) = &self.hypotheses.sigma {
            if sigma.len() != l {
                return Err(format!("hypotheses.sigma: expected {l} entries, got {}", sigma.len()));
            }
        }
        let e = &self.evolve;
        if !(e.dt > 0.0 && e.t_end > 0.0) {
            return Err("evolve: dt and t_end must be positive".into());
        }
        if e.record_every == 0 {
            return Err("evolve.record_every must be at least 1".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the parsed configuration
    /// (insensitive to comments, key order and formatting).
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}
