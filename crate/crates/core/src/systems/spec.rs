use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Pointwise map `z ↦ (f_1(z), …, f_l(z))`.
pub type NonlinearityFn = Arc<dyn Fn(&[Complex64], &mut [Complex64]) + Send + Sync>;
/// Pointwise potential `z ↦ F(z)`.
pub type PotentialFn = Arc<dyn Fn(&[Complex64]) -> Complex64 + Send + Sync>;
/// Summand of the potential restricted to the positive cone of its variables.
pub type ConeFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// One summand `F_s` of a decomposition `F = F_1 + … + F_m` acting on the
/// listed component indices.
#[derive(Clone)]
pub struct SupermodularPart {
    pub indices: Vec<usize>,
    pub eval: ConeFn,
}

/// The model `iα_k ∂_t u_k + γ_k Δu_k − β_k u_k = −f_k(u)`.
#[derive(Clone)]
pub struct SystemSpec {
    name: String,
    alpha: Vec<f64>,
    gamma: Vec<f64>,
    beta: Vec<f64>,
    f: NonlinearityFn,
    potential: Option<PotentialFn>,
    parts: Vec<SupermodularPart>,
}

impl fmt::Debug for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemSpec")
            .field("name", &self.name)
            .field("alpha", &self.alpha)
            .field("gamma", &self.gamma)
            .field("beta", &self.beta)
            .field("has_potential", &self.potential.is_some())
            .field("supermodular_parts", &self.parts.len())
            .finish()
    }
}

impl SystemSpec {
    pub fn new(
        name: impl Into<String>,
        alpha: Vec<f64>,
        gamma: Vec<f64>,
        beta: Vec<f64>,
        f: NonlinearityFn,
        potential: Option<PotentialFn>,
    ) -> Result<Self> {
        let l = alpha.len();
        if l == 0 {
            return invalid("a system needs at least one component");
        }
        if gamma.len() != l || beta.len() != l {
            return invalid(format!(
                "coefficient lengths differ: alpha {l}, gamma {}, beta {}",
                gamma.len(),
                beta.len()
            ));
        }
        if alpha.iter().chain(&gamma).any(|&c| !(c.is_finite() && c > 0.0)) {
            return invalid("alpha and gamma must be positive");
        }
        if beta.iter().any(|&b| !(b.is_finite() && b >= 0.0)) {
            return invalid("beta must be non-negative");
        }
        Ok(Self {
            name: name.into(),
            alpha,
            gamma,
            beta,
            f,
            potential,
            parts: Vec::new(),
        })
    }

    pub fn with_supermodular_parts(mut self, parts: Vec<SupermodularPart>) -> Self {
        self.parts = parts;
        self
    }

    pub fn with_beta(mut self, beta: Vec<f64>) -> Result<Self> {
        if beta.len() != self.l() || beta.iter().any(|&b| !(b.is_finite() && b >= 0.0)) {
            return invalid("beta must have one non-negative entry per component");
        }
        self.beta = beta;
        Ok(self)
    }

    pub fn without_potential(mut self) -> Self {
        self.potential = None;
        self
    }

    pub fn with_potential(mut self, potential: Option<PotentialFn>) -> Self {
        self.potential = potential;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn l(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn supermodular_parts(&self) -> &[SupermodularPart] {
        &self.parts
    }

    pub fn has_potential(&self) -> bool {
        self.potential.is_some()
    }

    /// `α_k² / γ_k`, the weight of component `k` in the mass.
    pub fn mass_weight(&self, k: usize) -> f64 {
        self.alpha[k] * self.alpha[k] / self.gamma[k]
    }

    /// `α_k² ω / γ_k + β_k`, the coefficient of the linear elliptic operator.
    pub fn linear_coefficient(&self, k: usize, omega: f64) -> f64 {
        self.mass_weight(k) * omega + self.beta[k]
    }

    /// Phase velocities `α_k / γ_k` of the gauge action.
    pub fn gauge_rates(&self) -> Vec<f64> {
        self.alpha
            .iter()
            .zip(&self.gamma)
            .map(|(a, g)| a / g)
            .collect()
    }

    pub fn eval_f(&self, z: &[Complex64], out: &mut [Complex64]) {
        (self.f)(z, out)
    }

    pub fn f_vec(&self, z: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); self.l()];
        self.eval_f(z, &mut out);
        out
    }

    pub fn eval_potential(&self, z: &[Complex64]) -> Option<Complex64> {
        self.potential.as_ref().map(|p| p(z))
    }

    /// Same model with every `β_k` set to zero (the reference problem for
    /// ground-state thresholds).
    pub fn without_beta(&self) -> Self {
        let mut s = self.clone();
        s.beta = vec![0.0; self.l()];
        s
    }
}

/// The two-component model with `f₁ = 2 z̄₁ z₂`, `f₂ = z₁²`,
/// `F = z̄₁² z₂`, `α = (1, 1)`, `γ = (1, κ)`, `β = 0`.
pub fn builtin_system1j(kappa: f64) -> Result<SystemSpec> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return invalid(format!("kappa must be positive, got {kappa}"));
    }
    let f: NonlinearityFn = Arc::new(|z: &[Complex64], out: &mut [Complex64]| {
        out[0] = 2.0 * z[0].conj() * z[1];
        out[1] = z[0] * z[0];
    });
    let potential: PotentialFn = Arc::new(|z: &[Complex64]| {
        let c = z[0].conj();
        c * c * z[1]
    });
    let parts = vec![SupermodularPart {
        indices: vec![0, 1],
        eval: Arc::new(|y: &[f64]| y[0] * y[0] * y[1]),
    }];
    Ok(SystemSpec::new(
        "system1J",
        vec![1.0, 1.0],
        vec![1.0, kappa],
        vec![0.0, 0.0],
        f,
        Some(potential),
    )?
    .with_supermodular_parts(parts))
}

/// Three-wave (sum-frequency) interaction `F = z̄₁ z̄₂ z₃`, so that
/// `f₁ = z̄₂ z₃`, `f₂ = z̄₁ z₃`, `f₃ = z₁ z₂`.
///
/// Gauge invariance holds exactly when `α₃/γ₃ = α₁/γ₁ + α₂/γ₂`.
pub fn builtin_three_wave(alpha: [f64; 3], gamma: [f64; 3]) -> Result<SystemSpec> {
    let f: NonlinearityFn = Arc::new(|z: &[Complex64], out: &mut [Complex64]| {
        out[0] = z[1].conj() * z[2];
        out[1] = z[0].conj() * z[2];
        out[2] = z[0] * z[1];
    });
    let potential: PotentialFn = Arc::new(|z: &[Complex64]| z[0].conj() * z[1].conj() * z[2]);
    let parts = vec![SupermodularPart {
        indices: vec![0, 1, 2],
        eval: Arc::new(|y: &[f64]| y[0] * y[1] * y[2]),
    }];
    Ok(SystemSpec::new(
        "three_wave",
        alpha.to_vec(),
        gamma.to_vec(),
        vec![0.0; 3],
        f,
        Some(potential),
    )?
    .with_supermodular_parts(parts))
}
