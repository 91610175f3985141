//! Virial functional `M`, its time derivative, and localized norms.

use num_complex::Complex64;

use super::weight::{CutoffChi, MorawetzWeight};
use crate::error::{invalid, Result};
use crate::fields::functionals::check_compatible;
use crate::fields::operators::{laplacian_into, radial_derivative_into};
use crate::fields::state::regularize_origin;
use crate::fields::{potential_density, FieldState};
use crate::systems::SystemSpec;

fn derivatives(state: &FieldState) -> Vec<Vec<Complex64>> {
    let h = state.grid().spacing();
    state
        .components()
        .iter()
        .map(|c| {
            let mut d = vec![Complex64::default(); c.len()];
            radial_derivative_into(c, h, &mut d);
            d
        })
        .collect()
}

/// `M = Σ_k α_k Im ∫ a'(r) ∂_r u_k ū_k dx`.
pub fn virial_m(state: &FieldState, spec: &SystemSpec, weight: &MorawetzWeight) -> Result<f64> {
    check_compatible(state, spec)?;
    let grid = state.grid();
    let d = derivatives(state);
    Ok(state
        .components()
        .iter()
        .zip(&d)
        .zip(spec.alpha())
        .map(|((u, du), alpha)| {
            alpha
                * grid.integrate_unchecked(
                    u.iter()
                        .zip(du)
                        .zip(&weight.d1)
                        .map(|((z, dz), a1)| a1 * (dz * z.conj()).im),
                )
        })
        .sum())
}

/// `2∫a'' Σγ_k|∂_r u_k|² − ½∫Δ²a Σγ_k|u_k|² − Re∫Δa F(u)`.
///
/// `Δ²a` jumps at `R` and `2R`, so the middle term is evaluated in the
/// integrated-by-parts form `∫(Δa)' Σγ_k Re(ū_k ∂_r u_k)`, whose integrand
/// is continuous.
pub fn virial_mprime(state: &FieldState, spec: &SystemSpec, weight: &MorawetzWeight) -> Result<f64> {
    check_compatible(state, spec)?;
    let grid = state.grid();
    let d = derivatives(state);
    let density = potential_density(state, spec)?;
    let mut kinetic = 0.0;
    let mut mass = 0.0;
    for (k, (u, du)) in state.components().iter().zip(&d).enumerate() {
        let g = spec.gamma()[k];
        kinetic += g * grid.integrate_unchecked(du.iter().zip(&weight.d2).map(|(z, a2)| a2 * z.norm_sqr()));
        mass += g * grid.integrate_unchecked(
            u.iter()
                .zip(du)
                .zip(&weight.lap_d1)
                .map(|((z, dz), b)| b * (z.conj() * dz).re),
        );
    }
    let pot = grid.integrate_unchecked(density.iter().zip(&weight.lap).map(|(f, l)| l * f.re));
    Ok(2.0 * kinetic + mass - pot)
}

/// Exact time derivative of [`virial_m`] under the semi-discrete flow that
/// the time stepper integrates: `Σ_k Re∫ a' [(∂_r g_k) ū_k − (∂_r u_k) ḡ_k]`
/// with `g_k = γ_k Δ_h u_k − β_k u_k + f_k(u)`.
///
/// Agrees with [`virial_mprime`] up to `O(h²)`.
pub fn virial_mprime_discrete(
    state: &FieldState,
    spec: &SystemSpec,
    weight: &MorawetzWeight,
) -> Result<f64> {
    check_compatible(state, spec)?;
    let grid = state.grid();
    let n = grid.len();
    let l = state.l();
    let h = grid.spacing();
    let mut g: Vec<Vec<Complex64>> = vec![vec![Complex64::default(); n]; l];
    for (k, u) in state.components().iter().enumerate() {
        laplacian_into(u, grid, &mut g[k]);
        let (gamma, beta) = (spec.gamma()[k], spec.beta()[k]);
        for (gi, ui) in g[k].iter_mut().zip(u) {
            *gi = gamma * *gi - beta * ui;
        }
    }
    let mut z = vec![Complex64::default(); l];
    let mut f = vec![Complex64::default(); l];
    for i in 0..n {
        state.point(i, &mut z);
        spec.eval_f(&z, &mut f);
        for k in 0..l {
            g[k][i] += f[k];
        }
    }
    let mut total = 0.0;
    let mut dg = vec![Complex64::default(); n];
    let mut du = vec![Complex64::default(); n];
    for (k, u) in state.components().iter().enumerate() {
        regularize_origin(&mut g[k]);
        g[k][n - 1] = Complex64::default();
        radial_derivative_into(&g[k], h, &mut dg);
        radial_derivative_into(u, h, &mut du);
        total += grid.integrate_unchecked((0..n).map(|i| {
            weight.d1[i] * (dg[i] * u[i].conj() - du[i] * g[k][i].conj()).re
        }));
    }
    Ok(total)
}

/// `∫ χ_R Σ α_k²/γ_k |u_k|² dx`.
pub fn localized_mass(state: &FieldState, spec: &SystemSpec, chi: &CutoffChi) -> Result<f64> {
    check_compatible(state, spec)?;
    let grid = state.grid();
    Ok(state
        .components()
        .iter()
        .enumerate()
        .map(|(k, u)| {
            spec.mass_weight(k)
                * grid.integrate_unchecked(u.iter().zip(&chi.values).map(|(z, c)| c * z.norm_sqr()))
        })
        .sum())
}

/// `∫_{r ≤ R} Σ_k |u_k|³ dx` with the sharp indicator.
pub fn localized_l3(state: &FieldState, radius: f64) -> f64 {
    let comps = state.components();
    state.grid().integrate_ball(
        (0..state.grid().len()).map(|i| comps.iter().map(|c| c[i].norm().powi(3)).sum::<f64>()),
        radius,
    )
}

/// `(1/T) ∫_0^T q(t) dt` by the trapezoid rule over `(t, q)` samples with
/// `t ≤ T`. A zero-length window returns the first sample.
pub fn averaged_morawetz(samples: &[(f64, f64)], horizon: f64) -> Result<f64> {
    if samples.is_empty() {
        return invalid("no samples");
    }
    let t0 = samples[0].0;
    let tol = 1e-9 * horizon.abs().max(1.0);
    if horizon < 0.0 || samples.last().unwrap().0 < t0 + horizon - tol {
        return invalid(format!(
            "samples cover [{t0}, {}], shorter than the window {horizon}",
            samples.last().unwrap().0
        ));
    }
    if horizon <= tol {
        return Ok(samples[0].1);
    }
    let mut acc = 0.0;
    for w in samples.windows(2) {
        let ((ta, qa), (tb, qb)) = (w[0], w[1]);
        if ta >= t0 + horizon - tol {
            break;
        }
        acc += 0.5 * (qa + qb) * (tb - ta);
    }
    Ok(acc / horizon)
}

/// Localized `L³` mass of a sequence of states, averaged over `[t₀, t₀ + T]`.
pub fn averaged_morawetz_states(states: &[FieldState], radius: f64, horizon: f64) -> Result<f64> {
    let samples: Vec<(f64, f64)> = states.iter().map(|s| (s.t, localized_l3(s, radius))).collect();
    averaged_morawetz(&samples, horizon)
}

/// Empirical radial embedding constant per component:
/// `sup_{r≥R}|u| · R² / (‖u‖_{L²(r≥R)}^{1/2} ‖∂_r u‖_{L²(r≥R)}^{1/2})`.
/// Components with vanishing exterior norms give `None`.
pub fn strauss_ratio(state: &FieldState, radius: f64) -> Result<Vec<Option<f64>>> {
    let grid = state.grid();
    if !(radius > 0.0 && radius < grid.r_max()) {
        return invalid(format!("R = {radius} must lie inside (0, r_max)"));
    }
    let start = {
        let i = grid.index_at_or_below(radius);
        if grid.radii()[i] < radius - 1e-12 {
            i + 1
        } else {
            i
        }
    };
    let w = grid.weights();
    let d = derivatives(state);
    Ok(state
        .components()
        .iter()
        .zip(&d)
        .map(|(u, du)| {
            let sup = u[start..].iter().map(|z| z.norm()).fold(0.0, f64::max);
            let l2: f64 = (start..u.len()).map(|i| w[i] * u[i].norm_sqr()).sum();
            let dl2: f64 = (start..u.len()).map(|i| w[i] * du[i].norm_sqr()).sum();
            if l2 <= 0.0 || dl2 <= 0.0 || sup == 0.0 {
                None
            } else {
                Some(sup * radius * radius / (l2.sqrt().sqrt() * dl2.sqrt().sqrt()))
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::*;
    use crate::fields::{potential_p, kinetic_k, RadialGrid};
    use crate::systems::{builtin_system1j, NonlinearityFn};

    fn scalar() -> SystemSpec {
        let f: NonlinearityFn = Arc::new(|z: &[Complex64], o: &mut [Complex64]| {
            o[0] = 1.5 * z[0] * z[0].norm();
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

    #[test]
    fn real_and_zero_states_have_no_virial() {
        let grid = Arc::new(RadialGrid::new(20.0, 1024).unwrap());
        let spec = builtin_system1j(0.5).unwrap();
        let w = MorawetzWeight::new(3.0, &grid).unwrap();
        let real = FieldState::from_fn(grid.clone(), 2, 0.0, |_, r| Complex64::new((-r * r).exp(), 0.0)).unwrap();
        assert_eq!(virial_m(&real, &spec, &w).unwrap(), 0.0);
        let zero = FieldState::zeros(grid, 2);
        assert_eq!(virial_m(&zero, &spec, &w).unwrap(), 0.0);
        assert_eq!(virial_mprime(&zero, &spec, &w).unwrap(), 0.0);
    }

    #[test]
    fn chirped_gaussian_matches_closed_form() {
        // u = e^{ir} e^{-r²}, small R: M ≈ ∫ a' |u|² with a' = 2r inside R
        let grid = Arc::new(RadialGrid::new(10.0, 4096).unwrap());
        let spec = scalar();
        let w = MorawetzWeight::new(4.0, &grid).unwrap();
        let u = FieldState::from_fn(grid.clone(), 1, 0.0, |_, r| Complex64::from_polar((-r * r).exp(), r)).unwrap();
        let m = virial_m(&u, &spec, &w).unwrap();
        // independent oracle: Im(∂_r u ū) = |u|², so M = ω₄ ∫ a'(r) e^{-2r²} r⁴ dr
        let oracle = {
            let n = 200_000;
            let h = 10.0 / n as f64;
            let s: f64 = (0..n)
                .map(|i| {
                    let r = (i as f64 + 0.5) * h;
                    w.at(r).d1 * (-2.0 * r * r).exp() * r.powi(4)
                })
                .sum();
            8.0 * PI * PI / 3.0 * s * h
        };
        assert!((m - oracle).abs() / oracle < 1e-8, "{m} vs {oracle}");
    }

    #[test]
    fn inner_support_reduces_to_kinetic_minus_potential() {
        let grid = Arc::new(RadialGrid::new(30.0, 4096).unwrap());
        let spec = builtin_system1j(0.5).unwrap();
        let w = MorawetzWeight::new(10.0, &grid).unwrap();
        let u = FieldState::from_fn(grid.clone(), 2, 0.0, |k, r| {
            Complex64::from_polar((1.0 + k as f64) * (-r * r).exp(), 0.3 * r * r)
        })
        .unwrap();
        let mp = virial_mprime(&u, &spec, &w).unwrap();
        let expected = 4.0 * kinetic_k(&u, &spec).unwrap() - 10.0 * potential_p(&u, &spec).unwrap();
        assert!((mp - expected).abs() / expected.abs() < 1e-4, "{mp} vs {expected}");
    }

    #[test]
    fn discrete_and_continuum_mprime_agree_to_second_order() {
        let spec = builtin_system1j(0.5).unwrap();
        let gap = |n: usize| {
            let grid = Arc::new(RadialGrid::new(16.0, n).unwrap());
            let w = MorawetzWeight::new(1.5, &grid).unwrap();
            let u = FieldState::from_fn(grid, 2, 0.0, |k, r| {
                Complex64::from_polar((1.0 + k as f64) * (-(r - 1.0).powi(2)).exp(), 0.5 * r)
            })
            .unwrap();
            let a = virial_mprime(&u, &spec, &w).unwrap();
            let b = virial_mprime_discrete(&u, &spec, &w).unwrap();
            (a - b).abs()
        };
        let (e1, e2) = (gap(1024), gap(2048));
        let ratio = e1 / e2;
        assert!((3.0..5.0).contains(&ratio), "{e1} {e2} ratio {ratio}");
    }

    #[test]
    fn localized_mass_limits() {
        let grid = Arc::new(RadialGrid::new(12.0, 4096).unwrap());
        let spec = scalar();
        let u = FieldState::from_fn(grid.clone(), 1, 0.0, |_, r| Complex64::new((-r * r).exp(), 0.0)).unwrap();
        let q = crate::fields::mass_q(&u, &spec).unwrap();
        let huge = CutoffChi::new(100.0, &grid).unwrap();
        assert!((localized_mass(&u, &spec, &huge).unwrap() - q).abs() < 1e-14 * q);
        let chi = CutoffChi::new(1.0, &grid).unwrap();
        let v = localized_mass(&u, &spec, &chi).unwrap();
        assert!(v > 0.0 && v < (PI / 2.0).powf(2.5));
        let oracle = grid.integrate_unchecked(
            grid.radii().iter().map(|&r| super::super::weight::cutoff_at(1.0, r).0 * (-2.0 * r * r).exp()),
        );
        assert!((v - oracle).abs() < 1e-14);
        assert_eq!(localized_mass(&FieldState::zeros(grid, 1), &spec, &chi).unwrap(), 0.0);
    }

    #[test]
    fn averaged_morawetz_windows() {
        assert!(averaged_morawetz(&[(0.0, 1.0), (1.0, 3.0)], 2.0).is_err());
        assert_eq!(averaged_morawetz(&[(0.0, 5.0)], 0.0).unwrap(), 5.0);
        let v = averaged_morawetz(&[(0.0, 1.0), (1.0, 3.0), (2.0, 100.0)], 1.0).unwrap();
        assert_eq!(v, 2.0);
    }

    #[test]
    fn strauss_ratio_behaviour() {
        let grid = Arc::new(RadialGrid::new(12.0, 2048).unwrap());
        let u = FieldState::from_fn(grid.clone(), 1, 0.0, |_, r| Complex64::new((-r * r).exp(), 0.0)).unwrap();
        let s = strauss_ratio(&u, 1.0).unwrap()[0].unwrap();
        assert!(s.is_finite() && s > 0.0);
        let scaled = strauss_ratio(&u.scaled(3.0), 1.0).unwrap()[0].unwrap();
        assert!((scaled - s).abs() < 1e-12 * s);
        let fine_grid = Arc::new(RadialGrid::new(12.0, 4096).unwrap());
        let fine = FieldState::from_fn(fine_grid, 1, 0.0, |_, r| Complex64::new((-r * r).exp(), 0.0)).unwrap();
        let sf = strauss_ratio(&fine, 1.0).unwrap()[0].unwrap();
        // the sharp truncation at R converges only at first order in h
        assert!((sf - s).abs() / s < 1e-2);

        let inner = FieldState::from_fn(grid.clone(), 1, 0.0, |_, r| {
            Complex64::new(if r < 2.0 { 1.0 } else { 0.0 }, 0.0)
        })
        .unwrap();
        assert_eq!(strauss_ratio(&inner, 5.0).unwrap()[0], None);
        assert!(strauss_ratio(&u, 20.0).is_err());
    }

    #[test]
    fn localized_l3_of_zero() {
        let grid = Arc::new(RadialGrid::new(12.0, 256).unwrap());
        assert_eq!(localized_l3(&FieldState::zeros(grid, 2), 5.0), 0.0);
    }
}
