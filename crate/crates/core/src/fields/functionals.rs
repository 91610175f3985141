//! Global functionals `Q`, `K`, `P`, `𝒬_ω` and `E_β` of a field state.

use num_complex::Complex64;
use serde::Serialize;

use super::operators::dirichlet_form;
use super::state::FieldState;
use crate::error::{invalid, Result};
use crate::systems::SystemSpec;

pub(crate) fn check_compatible(state: &FieldState, spec: &SystemSpec) -> Result<()> {
    if state.l() != spec.l() {
        return invalid(format!(
            "state has {} components, system {} has {}",
            state.l(),
            spec.name(),
            spec.l()
        ));
    }
    Ok(())
}

/// `‖u_k‖²_{L²}` for every component.
pub fn component_norms_sq(state: &FieldState) -> Vec<f64> {
    let grid = state.grid();
    state
        .components()
        .iter()
        .map(|c| grid.integrate_unchecked(c.iter().map(|z| z.norm_sqr())))
        .collect()
}

/// `Q(u) = Σ α_k²/γ_k ‖u_k‖²`.
pub fn mass_q(state: &FieldState, spec: &SystemSpec) -> Result<f64> {
    check_compatible(state, spec)?;
    Ok(component_norms_sq(state)
        .iter()
        .enumerate()
        .map(|(k, n)| spec.mass_weight(k) * n)
        .sum())
}

/// `K(u) = Σ γ_k ‖∇u_k‖²` with the discrete Dirichlet form.
pub fn kinetic_k(state: &FieldState, spec: &SystemSpec) -> Result<f64> {
    check_compatible(state, spec)?;
    let grid = state.grid();
    Ok(state
        .components()
        .iter()
        .zip(spec.gamma())
        .map(|(c, g)| g * dirichlet_form(c, grid))
        .sum())
}

/// `F(u(r_i))` at every node.
pub fn potential_density(state: &FieldState, spec: &SystemSpec) -> Result<Vec<Complex64>> {
    check_compatible(state, spec)?;
    if !spec.has_potential() {
        return invalid(format!("system {} has no potential evaluator", spec.name()));
    }
    let mut z = vec![Complex64::default(); state.l()];
    Ok((0..state.grid().len())
        .map(|i| {
            state.point(i, &mut z);
            spec.eval_potential(&z).unwrap_or_default()
        })
        .collect())
}

/// `P(u) = Re ∫ F(u) dx`.
pub fn potential_p(state: &FieldState, spec: &SystemSpec) -> Result<f64> {
    let density = potential_density(state, spec)?;
    Ok(state
        .grid()
        .integrate_unchecked(density.iter().map(|f| f.re)))
}

/// `𝒬_ω(u) = Σ (α_k² ω / γ_k + β_k) ‖u_k‖²`.
pub fn weighted_mass_calq(state: &FieldState, spec: &SystemSpec, omega: f64) -> Result<f64> {
    check_compatible(state, spec)?;
    Ok(component_norms_sq(state)
        .iter()
        .enumerate()
        .map(|(k, n)| spec.linear_coefficient(k, omega) * n)
        .sum())
}

/// `E_β(u) = K(u) + Σ β_k ‖u_k‖² − 2 P(u)`.
pub fn energy_e(state: &FieldState, spec: &SystemSpec) -> Result<f64> {
    Ok(Functionals::evaluate(state, spec)?.e)
}

/// All conserved and scale-relevant functionals of one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Functionals {
    pub q: f64,
    pub k: f64,
    pub p: f64,
    /// `Σ β_k ‖u_k‖²`
    pub beta_mass: f64,
    pub e: f64,
}

impl Functionals {
    pub fn evaluate(state: &FieldState, spec: &SystemSpec) -> Result<Self> {
        let norms = component_norms_sq(state);
        let q = mass_q(state, spec)?;
        let k = kinetic_k(state, spec)?;
        let p = potential_p(state, spec)?;
        let beta_mass: f64 = norms.iter().zip(spec.beta()).map(|(n, b)| n * b).sum();
        Ok(Self {
            q,
            k,
            p,
            beta_mass,
            e: k + beta_mass - 2.0 * p,
        })
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use proptest::prelude::*;

    use super::*;
    use crate::fields::RadialGrid;
    use crate::systems::{builtin_system1j, NonlinearityFn, SystemSpec};

    fn single_cubic() -> SystemSpec {
        let f: NonlinearityFn = Arc::new(|z: &[Complex64], o: &mut [Complex64]| {
            o[0] = z[0] * (3.0 * z[0].norm());
        });
        SystemSpec::new(
            "scalar",
            vec![1.0],
            vec![1.0],
            vec![0.0],
            f,
            Some(Arc::new(|z: &[Complex64]| Complex64::new(z[0].norm().powi(3), 0.0))),
        )
        .unwrap()
    }

    fn gaussian_state(grid: &Arc<RadialGrid>, l: usize, which: &[usize]) -> FieldState {
        FieldState::from_fn(grid.clone(), l, 0.0, |k, r| {
            if which.contains(&k) {
                Complex64::new((-r * r).exp(), 0.0)
            } else {
                Complex64::default()
            }
        })
        .unwrap()
    }

    fn half_pi_52() -> f64 {
        (PI / 2.0).powf(2.5)
    }

    #[test]
    fn gaussian_mass_and_kinetic() {
        let grid = Arc::new(RadialGrid::new(12.0, 4096).unwrap());
        let s = gaussian_state(&grid, 1, &[0]);
        let spec = single_cubic();
        let q = mass_q(&s, &spec).unwrap();
        assert!((q - half_pi_52()).abs() / half_pi_52() < 1e-8);
        let k = kinetic_k(&s, &spec).unwrap();
        let exact = 5.0 * half_pi_52();
        assert!((exact - 15.462).abs() < 1e-3);
        assert!((k - exact).abs() / exact < 1e-5, "{k} vs {exact}");
    }

    #[test]
    fn system1j_mass_weights_second_component() {
        let grid = Arc::new(RadialGrid::new(12.0, 4096).unwrap());
        let spec = builtin_system1j(0.5).unwrap();
        let s = gaussian_state(&grid, 2, &[1]);
        let q = mass_q(&s, &spec).unwrap();
        assert!((q - 2.0 * half_pi_52()).abs() / q < 1e-8);
    }

    #[test]
    fn zero_state_has_zero_functionals() {
        let grid = Arc::new(RadialGrid::new(10.0, 128).unwrap());
        let spec = builtin_system1j(0.5).unwrap();
        let s = FieldState::zeros(grid, 2);
        let f = Functionals::evaluate(&s, &spec).unwrap();
        assert_eq!((f.q, f.k, f.p, f.e), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn component_count_mismatch() {
        let grid = Arc::new(RadialGrid::new(10.0, 128).unwrap());
        let spec = builtin_system1j(0.5).unwrap();
        let s = FieldState::zeros(grid, 3);
        assert!(mass_q(&s, &spec).is_err());
    }

    #[test]
    fn missing_potential_is_rejected() {
        let grid = Arc::new(RadialGrid::new(10.0, 128).unwrap());
        let spec = builtin_system1j(0.5).unwrap().without_potential();
        let s = FieldState::zeros(grid, 2);
        assert!(potential_p(&s, &spec).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn energy_identity_and_scaling(
            a in -2.0f64..2.0, b in -2.0f64..2.0, w in 0.5f64..2.0,
            lambda in 0.1f64..3.0, beta in 0.0f64..2.0,
        ) {
            let grid = Arc::new(RadialGrid::new(10.0, 256).unwrap());
            let spec = builtin_system1j(0.5).unwrap().with_beta(vec![beta, 0.5 * beta]).unwrap();
            let s = FieldState::from_fn(grid, 2, 0.0, |k, r| {
                let env = (-w * r * r).exp();
                if k == 0 { Complex64::new(a * env, b * r * env) } else { Complex64::new(b * env, a * env) }
            }).unwrap();
            let f = Functionals::evaluate(&s, &spec).unwrap();
            let norms = component_norms_sq(&s);
            let residual = f.e + 2.0 * f.p - f.k - (beta * norms[0] + 0.5 * beta * norms[1]);
            prop_assert!(residual.abs() <= 1e-12 * (f.k + f.p.abs() + f.beta_mass + 1.0));
            prop_assert!(f.q >= 0.0 && f.k >= 0.0);

            let g = Functionals::evaluate(&s.scaled(lambda), &spec).unwrap();
            let l2 = lambda * lambda;
            prop_assert!((g.q - l2 * f.q).abs() <= 1e-12 * (1.0 + g.q));
            prop_assert!((g.k - l2 * f.k).abs() <= 1e-12 * (1.0 + g.k));
            prop_assert!((g.p - l2 * lambda * f.p).abs() <= 1e-11 * (1.0 + g.p.abs()));
        }
    }
}
