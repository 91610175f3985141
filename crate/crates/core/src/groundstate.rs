//! Standing-wave profiles by Petviashvili iteration, Pohozaev ratios and the
//! sharp Gagliardo–Nirenberg constant.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fields::functionals::check_compatible;
use crate::fields::operators::{dirichlet_form_real, laplacian_into, InteriorSolver};
use crate::fields::{Functionals, FieldState, RadialGrid};
use crate::systems::SystemSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Sup-norm of the change produced by one Petviashvili map (before
    /// averaging).
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 5000,
        }
    }
}

/// A converged solution of `-γ_k Δψ_k + (α_k² ω/γ_k + β_k) ψ_k = f_k(ψ)`.
#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub omega: f64,
    pub grid: Arc<RadialGrid>,
    pub profiles: Vec<Vec<f64>>,
    pub action_i: f64,
    pub k: f64,
    pub p: f64,
    pub calq: f64,
    pub q: f64,
    /// Energy with `β = 0`.
    pub e0: f64,
    pub iterations: usize,
    pub final_residual: f64,
    /// Petviashvili factor at the last iterate; tends to 1 at a fixed point.
    pub normalization_factor: f64,
    /// `max_k ‖L_k ψ_k − f_k(ψ)‖_∞ / ‖ψ_k‖_∞` over interior nodes.
    pub elliptic_residual: f64,
    /// Most negative profile value (0 when the profiles are non-negative).
    pub min_value: f64,
    /// Share of `Σ‖ψ_k‖²` carried by `r > 0.9 r_max`.
    pub tail_fraction: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundStateSummary {
    pub omega: f64,
    pub r_max: f64,
    pub n_points: usize,
    pub action_i: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "calQ")]
    pub calq: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "E0")]
    pub e0: f64,
    pub iterations: usize,
    pub final_residual: f64,
    pub normalization_factor: f64,
    pub elliptic_residual: f64,
    pub min_value: f64,
    pub negative_values: bool,
    pub tail_fraction: f64,
}

impl GroundStateResult {
    pub fn to_state(&self) -> FieldState {
        FieldState::from_real(self.grid.clone(), &self.profiles, 0.0).expect("finite profiles")
    }

    pub fn summary(&self) -> GroundStateSummary {
        GroundStateSummary {
            omega: self.omega,
            r_max: self.grid.r_max(),
            n_points: self.grid.len(),
            action_i: self.action_i,
            k: self.k,
            p: self.p,
            calq: self.calq,
            q: self.q,
            e0: self.e0,
            iterations: self.iterations,
            final_residual: self.final_residual,
            normalization_factor: self.normalization_factor,
            elliptic_residual: self.elliptic_residual,
            min_value: self.min_value,
            negative_values: self.min_value < 0.0,
            tail_fraction: self.tail_fraction,
        }
    }

    /// Rows `r, ψ_1, …, ψ_l` with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r");
        for k in 0..self.profiles.len() {
            out.push_str(&format!(",psi{}", k + 1));
        }
        out.push('\n');
        for (i, r) in self.grid.radii().iter().enumerate() {
            out.push_str(&format!("{r:.17e}"));
            for p in &self.profiles {
                out.push_str(&format!(",{:.17e}", p[i]));
            }
            out.push('\n');
        }
        out
    }
}

fn eval_f_real(spec: &SystemSpec, profiles: &[Vec<f64>], out: &mut [Vec<f64>]) {
    let l = profiles.len();
    let mut z = vec![Complex64::default(); l];
    let mut f = vec![Complex64::default(); l];
    for i in 0..profiles[0].len() {
        for k in 0..l {
            z[k] = Complex64::new(profiles[k][i], 0.0);
        }
        spec.eval_f(&z, &mut f);
        for k in 0..l {
            out[k][i] = f[k].re;
        }
    }
}

fn weighted_dot(grid: &RadialGrid, a: &[f64], b: &[f64]) -> f64 {
    grid.integrate_unchecked(a.iter().zip(b).map(|(x, y)| x * y))
}

fn regularize_real(p: &mut [f64]) {
    p[0] = (4.0 * p[1] - p[2]) / 3.0;
    let last = p.len() - 1;
    p[last] = 0.0;
}

/// Weight of the new Petviashvili iterate in the averaged update.
///
/// Quadratic couplings such as `(2ψ₁ψ₂, ψ₁²)` give the linearized map the
/// exact eigenvalue −1 along `(ψ₁, −2ψ₂)`; the plain iteration then locks
/// into a two-cycle. Averaging with the previous iterate maps that
/// eigenvalue to 0 and leaves the fixed points unchanged.
const MIXING: f64 = 0.5;

/// Petviashvili iteration `ψ ← m² L⁻¹ f(ψ)` with the joint factor
/// `m = Σ⟨L_k ψ_k, ψ_k⟩ / Σ⟨f_k(ψ), ψ_k⟩`, seeded with `e^{-r²}` and
/// averaged with the previous iterate (see [`MIXING`]).
pub fn solve_ground_state(
    spec: &SystemSpec,
    omega: f64,
    grid: Arc<RadialGrid>,
    opts: &SolverOptions,
) -> Result<GroundStateResult> {
    let l = spec.l();
    let coeffs: Vec<f64> = (0..l).map(|k| spec.linear_coefficient(k, omega)).collect();
    if coeffs.iter().any(|&c| !(c > 0.0)) || !omega.is_finite() {
        return invalid(format!(
            "linear coefficients must be positive, got {coeffs:?} at omega {omega}"
        ));
    }
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return invalid("solver needs tol > 0 and max_iter >= 1");
    }
    let n = grid.len();
    let solvers = (0..l)
        .map(|k| {
            InteriorSolver::new(
                &grid,
                Complex64::new(coeffs[k], 0.0),
                Complex64::new(-spec.gamma()[k], 0.0),
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let mut psi: Vec<Vec<f64>> = (0..l)
        .map(|_| grid.radii().iter().map(|r| (-r * r).exp()).collect())
        .collect();
    for p in &mut psi {
        regularize_real(p);
    }
    let mut f = vec![vec![0.0; n]; l];
    let mut rhs = vec![Complex64::default(); n];
    let mut change = f64::INFINITY;
    let mut m = f64::NAN;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        eval_f_real(spec, &psi, &mut f);
        let mut lin = 0.0;
        let mut non = 0.0;
        for k in 0..l {
            lin += spec.gamma()[k] * dirichlet_form_real(&psi[k], &grid)
                + coeffs[k] * weighted_dot(&grid, &psi[k], &psi[k]);
            non += weighted_dot(&grid, &f[k], &psi[k]);
        }
        if !(non > 0.0) || !lin.is_finite() {
            return Err(Error::DegenerateSolution(format!(
                "nonlinear pairing {non:e} is not positive at iteration {iterations}"
            )));
        }
        m = lin / non;
        let m2 = m * m;
        change = 0.0;
        for k in 0..l {
            for i in 0..n {
                rhs[i] = Complex64::new(grid.weights()[i] * f[k][i], 0.0);
            }
            solvers[k].solve_in_place(&mut rhs);
            let mut next: Vec<f64> = rhs.iter().map(|z| m2 * z.re).collect();
            regularize_real(&mut next);
            for (a, b) in next.iter_mut().zip(&psi[k]) {
                change = change.max((*a - b).abs());
                *a = MIXING * *a + (1.0 - MIXING) * b;
            }
            psi[k] = next;
        }
        if !change.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "iterate became non-finite at iteration {iterations}"
            )));
        }
        let size = psi.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        if size < 1e-12 {
            return Err(Error::DegenerateSolution(
                "iteration collapsed to the zero profile".into(),
            ));
        }
        if change < opts.tol {
            break;
        }
    }
    if !(change < opts.tol) {
        return Err(Error::ConvergenceFailure {
            iterations,
            residual: change,
        });
    }
    finish(spec, omega, grid, psi, iterations, change, m)
}

fn finish(
    spec: &SystemSpec,
    omega: f64,
    grid: Arc<RadialGrid>,
    psi: Vec<Vec<f64>>,
    iterations: usize,
    change: f64,
    m: f64,
) -> Result<GroundStateResult> {
    let l = spec.l();
    let n = grid.len();
    let state = FieldState::from_real(grid.clone(), &psi, 0.0)?;
    let fun = Functionals::evaluate(&state, &spec.without_beta())?;
    let calq = crate::fields::weighted_mass_calq(&state, spec, omega)?;
    let with_beta = Functionals::evaluate(&state, spec)?;

    let mut f = vec![vec![0.0; n]; l];
    eval_f_real(spec, &psi, &mut f);
    let mut lap = vec![0.0; n];
    let mut elliptic_residual = 0.0f64;
    for k in 0..l {
        laplacian_into(&psi[k], &grid, &mut lap);
        let c = spec.linear_coefficient(k, omega);
        let size = psi[k].iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if size == 0.0 {
            continue;
        }
        let worst = (1..n - 1)
            .map(|i| (-spec.gamma()[k] * lap[i] + c * psi[k][i] - f[k][i]).abs())
            .fold(0.0, f64::max);
        elliptic_residual = elliptic_residual.max(worst / size);
    }

    let total: f64 = psi.iter().map(|p| weighted_dot(&grid, p, p)).sum();
    let cut = grid.index_at_or_below(0.9 * grid.r_max());
    let tail: f64 = psi
        .iter()
        .map(|p| {
            grid.weights()[cut + 1..]
                .iter()
                .zip(&p[cut + 1..])
                .map(|(w, v)| w * v * v)
                .sum::<f64>()
        })
        .sum();
    let min_value = psi.iter().flatten().fold(0.0f64, |a, &v| a.min(v));

    Ok(GroundStateResult {
        omega,
        action_i: 0.5 * (with_beta.k + calq) - with_beta.p,
        k: with_beta.k,
        p: with_beta.p,
        calq,
        q: fun.q,
        e0: fun.e,
        grid,
        profiles: psi,
        iterations,
        final_residual: change,
        normalization_factor: m,
        elliptic_residual,
        min_value,
        tail_fraction: if total > 0.0 { tail / total } else { 0.0 },
        converged: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PohozaevReport {
    pub n: u32,
    pub p_over_i: f64,
    pub k_over_i: f64,
    pub calq_over_i: f64,
    /// Relative deviations from `(2, n, 6 − n)`.
    pub deviations: [f64; 3],
}

impl PohozaevReport {
    pub fn max_deviation(&self) -> f64 {
        self.deviations.iter().fold(0.0, |a, &d| a.max(d))
    }
}

fn rel(value: f64, target: f64) -> f64 {
    if target == 0.0 {
        value.abs()
    } else {
        (value - target).abs() / target.abs()
    }
}

pub fn pohozaev_report(gs: &GroundStateResult, n: u32) -> Result<PohozaevReport> {
    if !gs.converged {
        return Err(Error::DegenerateSolution("ground state is not converged".into()));
    }
    if !(gs.action_i > 0.0) {
        return Err(Error::DegenerateSolution(format!(
            "action {} is not positive",
            gs.action_i
        )));
    }
    let nf = n as f64;
    let ratios = [gs.p / gs.action_i, gs.k / gs.action_i, gs.calq / gs.action_i];
    let targets = [2.0, nf, 6.0 - nf];
    Ok(PohozaevReport {
        n,
        p_over_i: ratios[0],
        k_over_i: ratios[1],
        calq_over_i: ratios[2],
        deviations: [
            rel(ratios[0], targets[0]),
            rel(ratios[1], targets[1]),
            rel(ratios[2], targets[2]),
        ],
    })
}

/// `C_n = 2 (6−n)^{(n−4)/4} / n^{n/4} · 𝒬(ψ)^{−1/2}`.
pub fn optimal_gn_constant(gs: &GroundStateResult, n: u32) -> Result<f64> {
    if !gs.converged {
        return Err(Error::DegenerateSolution("ground state is not converged".into()));
    }
    if !(gs.calq > 0.0) {
        return Err(Error::DegenerateSolution(format!(
            "weighted mass {} is not positive",
            gs.calq
        )));
    }
    if n >= 6 || n == 0 {
        return invalid(format!("dimension {n} outside 1..=5"));
    }
    let nf = n as f64;
    Ok(2.0 * (6.0 - nf).powf((nf - 4.0) / 4.0) / nf.powf(nf / 4.0) / gs.calq.sqrt())
}

/// Five-dimensional form `(2/5) (Q K)^{−1/4}`, equal to the general formula
/// whenever `K = 5Q`.
pub fn gn_constant_from_mass_and_kinetic(gs: &GroundStateResult) -> Result<f64> {
    if !(gs.q > 0.0 && gs.k > 0.0) {
        return Err(Error::DegenerateSolution("Q or K vanishes".into()));
    }
    Ok(0.4 * (gs.q * gs.k).powf(-0.25))
}

/// Weinstein quotient `J(u) = P / (𝒬^{(6−n)/4} K^{n/4})`.
pub fn gn_functional(state: &FieldState, spec: &SystemSpec, omega: f64, n: u32) -> Result<f64> {
    check_compatible(state, spec)?;
    let fun = Functionals::evaluate(state, spec)?;
    let calq = crate::fields::weighted_mass_calq(state, spec, omega)?;
    if !(fun.p > 0.0) {
        return invalid(format!("P = {} is not positive", fun.p));
    }
    if !(fun.k > 0.0 && calq > 0.0) {
        return invalid("K and the weighted mass must be positive");
    }
    let nf = n as f64;
    Ok(fun.p / (calq.powf((6.0 - nf) / 4.0) * fun.k.powf(nf / 4.0)))
}

/// Largest Weinstein quotient found among random smooth perturbations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GnScan {
    pub samples: usize,
    pub seed: u64,
    /// `J(ψ)`
    pub ground_value: f64,
    /// `max J` over the perturbed states
    pub max_value: f64,
    pub worst_sample: usize,
}

/// Evaluates `J` on `count` states `ψ_k (1 + Σ_j c_kj cos(jπr/L))` with
/// `L = 4 r_peak` (`r_peak` the radius where `ψ_1` drops to half), four
/// modes per component and coefficients uniform in `[-amplitude, amplitude]`.
pub fn gn_perturbation_scan(
    gs: &GroundStateResult,
    spec: &SystemSpec,
    count: usize,
    amplitude: f64,
    seed: u64,
) -> Result<GnScan> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let psi = gs.to_state();
    let ground_value = gn_functional(&psi, spec, gs.omega, 5)?;
    let head = gs.profiles[0][0];
    let half = gs.grid.radii()[gs.profiles[0].iter().position(|&v| v < 0.5 * head).unwrap_or(1)];
    let length = 4.0 * half.max(gs.grid.spacing());
    let mut max_value = f64::NEG_INFINITY;
    let mut worst_sample = 0;
    for sample in 0..count {
        let coeffs: Vec<[f64; 4]> = (0..psi.l())
            .map(|_| std::array::from_fn(|_| rng.gen_range(-amplitude..=amplitude)))
            .collect();
        let mut v = psi.clone();
        for (c, ck) in v.components_mut().iter_mut().zip(&coeffs) {
            for (z, &r) in c.iter_mut().zip(gs.grid.radii()) {
                let bump: f64 = ck
                    .iter()
                    .enumerate()
                    .map(|(j, a)| a * ((j + 1) as f64 * std::f64::consts::PI * r / length).cos())
                    .sum();
                *z *= 1.0 + bump;
            }
        }
        let j = gn_functional(&v, spec, gs.omega, 5)?;
        if j > max_value {
            max_value = j;
            worst_sample = sample;
        }
    }
    Ok(GnScan {
        samples: count,
        seed,
        ground_value,
        max_value,
        worst_sample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::builtin_system1j;

    fn coarse(omega: f64) -> GroundStateResult {
        let grid = Arc::new(RadialGrid::new(20.0, 1024).unwrap());
        solve_ground_state(&builtin_system1j(0.5).unwrap(), omega, grid, &SolverOptions::default())
            .unwrap()
    }

    #[test]
    fn coarse_solution_satisfies_nehari_exactly() {
        let gs = coarse(1.0);
        // K + 𝒬 = 3P holds for any fixed point of the discrete problem
        let nehari = (gs.k + gs.calq - 3.0 * gs.p).abs() / gs.p;
        assert!(nehari < 1e-8, "{nehari}");
        assert!((gs.normalization_factor - 1.0).abs() < 1e-8);
        assert!(gs.elliptic_residual < 10.0 * SolverOptions::default().tol);
        assert!(gs.min_value >= 0.0);
        assert!(gs.tail_fraction < 1e-12);
    }

    #[test]
    fn perturbations_do_not_beat_the_ground_state() {
        let gs = coarse(1.0);
        let spec = builtin_system1j(0.5).unwrap();
        let scan = gn_perturbation_scan(&gs, &spec, 30, 0.2, 7).unwrap();
        assert!(scan.max_value < scan.ground_value, "{scan:?}");
        let again = gn_perturbation_scan(&gs, &spec, 30, 0.2, 7).unwrap();
        assert_eq!(scan, again);
    }

    #[test]
    fn non_positive_linear_coefficient_rejected() {
        let grid = Arc::new(RadialGrid::new(20.0, 256).unwrap());
        let spec = builtin_system1j(0.5).unwrap();
        let err = solve_ground_state(&spec, -1.0, grid.clone(), &SolverOptions::default());
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
        assert!(solve_ground_state(&spec, 0.0, grid, &SolverOptions::default()).is_err());
    }

    #[test]
    fn iteration_cap_reports_convergence_failure() {
        let grid = Arc::new(RadialGrid::new(20.0, 256).unwrap());
        let spec = builtin_system1j(0.5).unwrap();
        let opts = SolverOptions {
            tol: 1e-10,
            max_iter: 3,
        };
        match solve_ground_state(&spec, 1.0, grid, &opts) {
            Err(Error::ConvergenceFailure { iterations, residual }) => {
                assert_eq!(iterations, 3);
                assert!(residual > 1e-10);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pohozaev_targets_follow_dimension() {
        let gs = coarse(1.0);
        let r5 = pohozaev_report(&gs, 5).unwrap();
        assert!(r5.max_deviation() < 1e-2, "{r5:?}");
        let r4 = pohozaev_report(&gs, 4).unwrap();
        // same profiles, different targets (2, 4, 2)
        assert!((r4.deviations[1] - (r4.k_over_i - 4.0).abs() / 4.0).abs() < 1e-15);
        assert!((r4.deviations[2] - (r4.calq_over_i - 2.0).abs() / 2.0).abs() < 1e-15);

        let mut bad = gs.clone();
        bad.converged = false;
        assert!(pohozaev_report(&bad, 5).is_err());
        bad.converged = true;
        bad.action_i = 0.0;
        assert!(matches!(pohozaev_report(&bad, 5), Err(Error::DegenerateSolution(_))));
    }

    #[test]
    fn gn_constant_errors_on_zero_state() {
        let mut gs = coarse(1.0);
        gs.calq = 0.0;
        assert!(optimal_gn_constant(&gs, 5).is_err());
        gs.q = 0.0;
        assert!(gn_constant_from_mass_and_kinetic(&gs).is_err());
    }

    #[test]
    fn gn_functional_rejects_non_positive_potential() {
        let gs = coarse(1.0);
        let spec = builtin_system1j(0.5).unwrap();
        // flipping the sign of ψ₂ flips P
        let s = gs.to_state();
        let mut flipped = s.clone();
        for z in flipped.components_mut()[1].iter_mut() {
            *z = -*z;
        }
        assert!(gn_functional(&s, &spec, 1.0, 5).unwrap() > 0.0);
        assert!(matches!(
            gn_functional(&flipped, &spec, 1.0, 5),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let gs = coarse(1.0);
        let csv = gs.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("r,psi1,psi2"));
        assert_eq!(lines.count(), gs.grid.len());
    }
}
