//! Sampling validators for the structural assumptions on `f_k` and `F`.
//!
//! Every checker is deterministic given its seed. Complex samples are drawn
//! uniformly from `[-2, 2]` per real and imaginary part, cone samples from
//! `[0, 2]`. Residuals are raw maxima over the samples; the verdict compares
//! each sample against a tolerance scaled by the magnitude involved.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::spec::SystemSpec;
use crate::fields::{FieldState, RadialGrid};

/// Central-difference step for the gradient check.
pub const FD_STEP: f64 = 1e-5;
/// Relative tolerance of the finite-difference checks.
pub const FD_TOL: f64 = 1e-6;
/// Relative tolerance of checks that are exact in exact arithmetic.
pub const ALGEBRAIC_TOL: f64 = 1e-10;

const BOX: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Unchecked,
    /// An empirical constant was measured; nothing can be falsified.
    Informational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub hypothesis: String,
    pub verdict: Verdict,
    pub residual: f64,
    pub samples: usize,
    pub worst_point: Vec<f64>,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl HypothesisReport {
    fn unchecked(name: &str, note: impl Into<String>) -> Self {
        Self {
            hypothesis: name.to_string(),
            verdict: Verdict::Unchecked,
            residual: 0.0,
            samples: 0,
            worst_point: Vec::new(),
            tolerance: 0.0,
            note: Some(note.into()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Running maximum of a residual together with the pass/fail bookkeeping.
struct Tracker {
    name: &'static str,
    tolerance: f64,
    residual: f64,
    worst: Vec<f64>,
    samples: usize,
    failed: bool,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            tolerance,
            residual: 0.0,
            worst: Vec::new(),
            samples: 0,
            failed: false,
        }
    }

    /// Records a residual; the sample fails if `residual > tol * (1 + scale)`.
    fn record(&mut self, residual: f64, scale: f64, point: impl FnOnce() -> Vec<f64>) {
        self.samples += 1;
        if !(residual <= self.tolerance * (1.0 + scale.abs())) {
            self.failed = true;
        }
        let residual = if residual.is_nan() { f64::INFINITY } else { residual };
        if residual > self.residual || self.worst.is_empty() {
            self.residual = self.residual.max(residual);
            self.worst = point();
        }
    }

    fn finish(self) -> HypothesisReport {
        HypothesisReport {
            hypothesis: self.name.to_string(),
            verdict: if self.failed { Verdict::Fail } else { Verdict::Pass },
            residual: self.residual,
            samples: self.samples,
            worst_point: self.worst,
            tolerance: self.tolerance,
            note: None,
        }
    }

    fn informational(self, note: &str) -> HypothesisReport {
        let mut r = self.finish();
        r.verdict = Verdict::Informational;
        r.note = Some(note.to_string());
        r
    }
}

fn flatten(z: &[Complex64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

fn sample_box(rng: &mut ChaCha8Rng, l: usize) -> Vec<Complex64> {
    (0..l)
        .map(|_| Complex64::new(rng.gen_range(-BOX..=BOX), rng.gen_range(-BOX..=BOX)))
        .collect()
}

fn sample_cone(rng: &mut ChaCha8Rng, l: usize) -> Vec<f64> {
    (0..l).map(|_| rng.gen_range(0.0..=BOX)).collect()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Samples used by the pointwise checkers: the origin, then random points.
fn box_samples(seed: u64, l: usize, samples: usize) -> Vec<Vec<Complex64>> {
    let mut r = rng(seed);
    let mut out = vec![vec![Complex64::default(); l]];
    out.extend((1..samples.max(1)).map(|_| sample_box(&mut r, l)));
    out
}

/// `max_k |f_k(z) - (∂F/∂z̄_k + conj(∂F/∂z_k))(z)|` with central differences
/// of step `step` in the real coordinates, together with `max_k |f_k(z)|`.
pub fn gradient_residual(spec: &SystemSpec, z: &[Complex64], step: f64) -> Option<(f64, f64)> {
    spec.eval_potential(z)?;
    let f = spec.f_vec(z);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    let mut w = z.to_vec();
    for k in 0..z.len() {
        let partial = |w: &mut Vec<Complex64>, dir: Complex64| {
            w[k] = z[k] + dir * step;
            let plus = spec.eval_potential(w).unwrap();
            w[k] = z[k] - dir * step;
            let minus = spec.eval_potential(w).unwrap();
            w[k] = z[k];
            (plus - minus) / (2.0 * step)
        };
        let dx = partial(&mut w, Complex64::new(1.0, 0.0));
        let dy = partial(&mut w, Complex64::new(0.0, 1.0));
        let i = Complex64::i();
        let d_zbar = 0.5 * (dx + i * dy);
        let d_z = 0.5 * (dx - i * dy);
        let predicted = d_zbar + d_z.conj();
        worst = worst.max((f[k] - predicted).norm());
        scale = scale.max(f[k].norm());
    }
    Some((worst, scale))
}

/// `|Re F(e^{iθα_k/γ_k} z_k) - Re F(z)|` and `|F(z)|`.
pub fn gauge_residual(spec: &SystemSpec, z: &[Complex64], theta: f64) -> Option<(f64, f64)> {
    let base = spec.eval_potential(z)?;
    let rotated: Vec<Complex64> = z
        .iter()
        .zip(spec.gauge_rates())
        .map(|(c, rate)| c * Complex64::from_polar(1.0, rate * theta))
        .collect();
    let turned = spec.eval_potential(&rotated)?;
    Some(((turned.re - base.re).abs(), base.norm()))
}

/// `|Im Σ σ_k f_k(z) z̄_k|` and the size `Σ σ_k |f_k(z)||z_k|`.
pub fn resonance_residual(spec: &SystemSpec, z: &[Complex64], sigma: &[f64]) -> (f64, f64) {
    let f = spec.f_vec(z);
    let mut sum = Complex64::default();
    let mut scale = 0.0;
    for k in 0..z.len() {
        sum += sigma[k] * f[k] * z[k].conj();
        scale += sigma[k] * f[k].norm() * z[k].norm();
    }
    (sum.im.abs(), scale)
}

/// Default resonance weights `α_k / (2γ_k)`.
pub fn mass_resonance_weights(spec: &SystemSpec) -> Vec<f64> {
    spec.gauge_rates().iter().map(|r| 0.5 * r).collect()
}

/// `|F(λz) - λ³ F(z)|` and `|λ³ F(z)|`.
pub fn homogeneity_residual(spec: &SystemSpec, z: &[Complex64], lambda: f64) -> Option<(f64, f64)> {
    let base = spec.eval_potential(z)? * lambda.powi(3);
    let scaled: Vec<Complex64> = z.iter().map(|c| c * lambda).collect();
    let value = spec.eval_potential(&scaled)?;
    Some(((value - base).norm(), base.norm()))
}

/// Supermodularity defect `max(0, F(y+he_i) + F(y+ke_j) - F(y+he_i+ke_j) - F(y))`.
pub fn supermodularity_defect(
    eval: &dyn Fn(&[f64]) -> f64,
    y: &[f64],
    i: usize,
    j: usize,
    h: f64,
    k: f64,
) -> f64 {
    let mut yi = y.to_vec();
    yi[i] += h;
    let mut yj = y.to_vec();
    yj[j] += k;
    let mut yij = yi.clone();
    yij[j] += k;
    (eval(&yi) + eval(&yj) - eval(&yij) - eval(y)).max(0.0)
}

/// `f_k(0) = 0` for every `k` (and `F(0) = 0` when present).
pub fn check_vanishing_at_origin(spec: &SystemSpec) -> HypothesisReport {
    let zero = vec![Complex64::default(); spec.l()];
    let mut t = Tracker::new("vanishing_at_origin", ALGEBRAIC_TOL);
    let f = spec.f_vec(&zero);
    let mut residual = f.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if let Some(p) = spec.eval_potential(&zero) {
        residual = residual.max(p.norm());
    }
    t.record(residual, 0.0, || flatten(&zero));
    t.finish()
}

/// Empirical Lipschitz constant of the Wirtinger derivatives of `f_k`.
/// Reported only; the hypothesis is existential.
pub fn check_derivative_lipschitz(spec: &SystemSpec, samples: usize, seed: u64) -> HypothesisReport {
    let l = spec.l();
    let mut r = rng(seed);
    let mut t = Tracker::new("derivative_lipschitz", f64::INFINITY);
    let jac = |z: &[Complex64]| -> Vec<Complex64> {
        // for each (k, m): ∂f_k/∂z_m then ∂f_k/∂z̄_m
        let mut out = Vec::with_capacity(2 * l * l);
        let mut w = z.to_vec();
        for m in 0..l {
            w[m] = z[m] + FD_STEP;
            let fxp = spec.f_vec(&w);
            w[m] = z[m] - FD_STEP;
            let fxm = spec.f_vec(&w);
            w[m] = z[m] + Complex64::new(0.0, FD_STEP);
            let fyp = spec.f_vec(&w);
            w[m] = z[m] - Complex64::new(0.0, FD_STEP);
            let fym = spec.f_vec(&w);
            w[m] = z[m];
            for k in 0..l {
                let dx = (fxp[k] - fxm[k]) / (2.0 * FD_STEP);
                let dy = (fyp[k] - fym[k]) / (2.0 * FD_STEP);
                let i = Complex64::i();
                out.push(0.5 * (dx - i * dy));
                out.push(0.5 * (dx + i * dy));
            }
        }
        out
    };
    for _ in 0..samples.max(1) {
        let z = sample_box(&mut r, l);
        let w = sample_box(&mut r, l);
        let dist: f64 = z.iter().zip(&w).map(|(a, b)| (a - b).norm()).sum();
        if dist == 0.0 {
            continue;
        }
        let jz = jac(&z);
        let jw = jac(&w);
        let diff = jz.iter().zip(&jw).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        t.record(diff / dist, 0.0, || {
            let mut p = flatten(&z);
            p.extend(flatten(&w));
            p
        });
    }
    t.informational("empirical constant C in |∂f(z) - ∂f(z')| <= C Σ|z_j - z'_j|")
}

/// Empirical constant in `|f_k(z)| <= C Σ|z_j|²`. Reported only.
pub fn check_quadratic_bound(spec: &SystemSpec, samples: usize, seed: u64) -> HypothesisReport {
    let mut t = Tracker::new("quadratic_bound", f64::INFINITY);
    for z in box_samples(seed, spec.l(), samples).into_iter().skip(1) {
        let denom: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        if denom == 0.0 {
            continue;
        }
        let f = spec.f_vec(&z);
        let num = f.iter().map(|c| c.norm()).fold(0.0, f64::max);
        t.record(num / denom, 0.0, || flatten(&z));
    }
    t.informational("empirical constant C in |f_k(z)| <= C Σ|z_j|^2")
}

pub fn check_gradient_structure(spec: &SystemSpec, samples: usize, seed: u64) -> HypothesisReport {
    const NAME: &str = "gradient_structure";
    if !spec.has_potential() {
        return HypothesisReport::unchecked(NAME, "no potential evaluator");
    }
    let mut t = Tracker::new(NAME, FD_TOL);
    for z in box_samples(seed, spec.l(), samples) {
        let (res, scale) = gradient_residual(spec, &z, FD_STEP).unwrap();
        t.record(res, scale, || flatten(&z));
    }
    t.finish()
}

pub fn check_gauge_invariance(spec: &SystemSpec, samples: usize, seed: u64) -> HypothesisReport {
    const NAME: &str = "gauge_invariance";
    if !spec.has_potential() {
        return HypothesisReport::unchecked(NAME, "no potential evaluator");
    }
    let mut t = Tracker::new(NAME, ALGEBRAIC_TOL);
    let mut r = rng(seed ^ 0x9e37_79b9);
    for z in box_samples(seed, spec.l(), samples) {
        let theta = r.gen_range(0.0..2.0 * PI);
        let (res, scale) = gauge_residual(spec, &z, theta).unwrap();
        t.record(res, scale, || {
            let mut p = flatten(&z);
            p.push(theta);
            p
        });
    }
    t.finish()
}

fn resonance_check(
    name: &'static str,
    spec: &SystemSpec,
    sigma: &[f64],
    samples: usize,
    seed: u64,
) -> HypothesisReport {
    let mut t = Tracker::new(name, ALGEBRAIC_TOL);
    for z in box_samples(seed, spec.l(), samples) {
        let (res, scale) = resonance_residual(spec, &z, sigma);
        t.record(res, scale, || flatten(&z));
    }
    t.finish()
}

/// Mass-resonance condition with the weights `α_k / (2γ_k)`.
pub fn check_mass_resonance(spec: &SystemSpec, samples: usize, seed: u64) -> HypothesisReport {
    resonance_check("mass_resonance", spec, &mass_resonance_weights(spec), samples, seed)
}

/// Resonance with caller-supplied positive weights `σ_k`; unchecked without them.
pub fn check_weighted_resonance(
    spec: &SystemSpec,
    sigma: Option<&[f64]>,
    samples: usize,
    seed: u64,
) -> HypothesisReport {
    const NAME: &str = "weighted_resonance";
    match sigma {
        None => HypothesisReport::unchecked(NAME, "no weights supplied"),
        Some(s) if s.len() != spec.l() || s.iter().any(|&v| !(v > 0.0)) => {
            HypothesisReport::unchecked(NAME, "weights must be positive, one per component")
        }
        Some(s) => resonance_check(NAME, spec, s, samples, seed),
    }
}

pub fn check_homogeneity(spec: &SystemSpec, samples: usize, seed: u64) -> HypothesisReport {
    const NAME: &str = "homogeneity";
    if !spec.has_potential() {
        return HypothesisReport::unchecked(NAME, "no potential evaluator");
    }
    let mut t = Tracker::new(NAME, ALGEBRAIC_TOL);
    let mut r = rng(seed ^ 0x5bd1_e995);
    for z in box_samples(seed, spec.l(), samples) {
        let lambda = r.gen_range(0.1..3.0);
        let (res, scale) = homogeneity_residual(spec, &z, lambda).unwrap();
        t.record(res, scale, || {
            let mut p = flatten(&z);
            p.push(lambda);
            p
        });
    }
    t.finish()
}

/// `F` real on `ℝ^l` and `f_k ≥ 0` on the positive cone.
pub fn check_reality_positivity(spec: &SystemSpec, samples: usize, seed: u64) -> HypothesisReport {
    const NAME: &str = "reality_positivity";
    if !spec.has_potential() {
        return HypothesisReport::unchecked(NAME, "no potential evaluator");
    }
    let l = spec.l();
    let mut t = Tracker::new(NAME, ALGEBRAIC_TOL);
    let mut r = rng(seed);
    for _ in 0..samples.max(1) {
        let real: Vec<Complex64> = (0..l)
            .map(|_| Complex64::new(r.gen_range(-BOX..=BOX), 0.0))
            .collect();
        let p = spec.eval_potential(&real).unwrap();
        t.record(p.im.abs(), p.re, || real.iter().map(|c| c.re).collect());

        let y = sample_cone(&mut r, l);
        let z: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let f = spec.f_vec(&z);
        let res = f
            .iter()
            .map(|c| (-c.re).max(0.0).max(c.im.abs()))
            .fold(0.0, f64::max);
        let scale = f.iter().map(|c| c.norm()).fold(0.0, f64::max);
        t.record(res, scale, || y.clone());
    }
    t.finish()
}

/// Supermodularity and vanishing on coordinate hyperplanes of every
/// supplied summand of `F`.
pub fn check_supermodularity(spec: &SystemSpec, samples: usize, seed: u64) -> HypothesisReport {
    const NAME: &str = "supermodularity";
    let parts = spec.supermodular_parts();
    if parts.is_empty() {
        return HypothesisReport::unchecked(NAME, "no decomposition of F supplied");
    }
    let mut t = Tracker::new(NAME, ALGEBRAIC_TOL);
    let mut r = rng(seed);
    for _ in 0..samples.max(1) {
        for part in parts {
            let d = part.indices.len();
            let eval = part.eval.as_ref();
            let mut y = sample_cone(&mut r, d);
            if d >= 2 {
                let i = r.gen_range(0..d);
                let mut j = r.gen_range(0..d - 1);
                if j >= i {
                    j += 1;
                }
                let h = r.gen_range(1e-3..=BOX);
                let k = r.gen_range(1e-3..=BOX);
                let defect = supermodularity_defect(eval, &y, i, j, h, k);
                let scale = eval(&y).abs();
                t.record(defect, scale, || {
                    let mut p = y.clone();
                    p.extend([i as f64, j as f64, h, k]);
                    p
                });
            }
            let zero_at = r.gen_range(0..d);
            y[zero_at] = 0.0;
            t.record(eval(&y).abs(), 0.0, || y.clone());
        }
    }
    t.finish()
}

/// Random radial test states: sums of complex Gaussians with radial chirps.
fn random_radial_state(r: &mut ChaCha8Rng, grid: &Arc<RadialGrid>, l: usize) -> FieldState {
    let params: Vec<Vec<(Complex64, f64, f64, f64)>> = (0..l)
        .map(|_| {
            (0..3)
                .map(|_| {
                    let amp = Complex64::new(r.gen_range(-BOX..=BOX), r.gen_range(-BOX..=BOX));
                    (amp, r.gen_range(0.3..2.0), r.gen_range(0.0..3.0), r.gen_range(-2.0..2.0))
                })
                .collect()
        })
        .collect();
    FieldState::from_fn(grid.clone(), l, 0.0, |k, x| {
        params[k]
            .iter()
            .map(|&(amp, width, centre, chirp)| {
                let env = (-(x - centre).powi(2) / (width * width)).exp();
                amp * Complex64::from_polar(env, chirp * x)
            })
            .sum()
    })
    .expect("finite samples")
}

/// `|Re ∫F(u)| ≤ ∫F(|u_1|, …, |u_l|)` on random radial states. Meaningless
/// (reported unchecked) unless `F` is real on the positive cone.
pub fn check_integral_bound(spec: &SystemSpec, samples: usize, seed: u64) -> HypothesisReport {
    const NAME: &str = "integral_bound";
    if !spec.has_potential() {
        return HypothesisReport::unchecked(NAME, "no potential evaluator");
    }
    if check_reality_positivity(spec, samples.min(200), seed).verdict != Verdict::Pass {
        return HypothesisReport::unchecked(NAME, "F is not real and positive on the cone");
    }
    let grid = Arc::new(RadialGrid::new(10.0, 512).expect("valid grid"));
    let mut r = rng(seed);
    let mut t = Tracker::new(NAME, ALGEBRAIC_TOL);
    let l = spec.l();
    let mut z = vec![Complex64::default(); l];
    for _ in 0..samples.max(1) {
        let state = random_radial_state(&mut r, &grid, l);
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for (i, w) in grid.weights().iter().enumerate() {
            state.point(i, &mut z);
            lhs += w * spec.eval_potential(&z).unwrap().re;
            let moduli: Vec<Complex64> = z.iter().map(|c| Complex64::new(c.norm(), 0.0)).collect();
            rhs += w * spec.eval_potential(&moduli).unwrap().re;
        }
        let violation = (lhs.abs() - rhs).max(0.0);
        t.record(violation, rhs, || vec![lhs, rhs]);
    }
    t.finish()
}

/// Options for [`check_all`].
#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub samples: usize,
    pub seed: u64,
    pub sigma: Option<Vec<f64>>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            samples: 1000,
            seed: 0,
            sigma: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisSuite {
    pub system: String,
    pub seed: u64,
    pub reports: Vec<HypothesisReport>,
}

impl HypothesisSuite {
    /// True when no checked hypothesis failed.
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.verdict != Verdict::Fail)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.reports
            .iter()
            .filter(|r| r.verdict == Verdict::Fail)
            .map(|r| r.hypothesis.as_str())
            .collect()
    }

    pub fn get(&self, name: &str) -> Option<&HypothesisReport> {
        self.reports.iter().find(|r| r.hypothesis == name)
    }
}

pub fn check_all(spec: &SystemSpec, opts: &CheckOptions) -> HypothesisSuite {
    let (n, s) = (opts.samples, opts.seed);
    let reports = vec![
        check_vanishing_at_origin(spec),
        check_derivative_lipschitz(spec, n, s),
        check_gradient_structure(spec, n, s),
        check_gauge_invariance(spec, n, s),
        check_homogeneity(spec, n, s),
        check_integral_bound(spec, n.min(50), s),
        check_reality_positivity(spec, n, s),
        check_supermodularity(spec, n, s),
        check_mass_resonance(spec, n, s),
        check_weighted_resonance(spec, opts.sigma.as_deref(), n, s),
        check_quadratic_bound(spec, n, s),
    ];
    HypothesisSuite {
        system: spec.name().to_string(),
        seed: s,
        reports,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{builtin_system1j, builtin_three_wave, NonlinearityFn};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn system1j_gradient_structure() {
        let spec = builtin_system1j(0.5).unwrap();
        let r = check_gradient_structure(&spec, 500, 7);
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.residual < 1e-6, "{}", r.residual);
        let (at_zero, _) = gradient_residual(&spec, &[c(0.0, 0.0); 2], FD_STEP).unwrap();
        assert_eq!(at_zero, 0.0);
    }

    #[test]
    fn inconsistent_pair_fails_gradient_check() {
        let spec = builtin_system1j(0.5)
            .unwrap()
            .with_potential(Some(Arc::new(|_: &[Complex64]| c(0.0, 0.0))));
        assert_eq!(check_gradient_structure(&spec, 50, 1).verdict, Verdict::Fail);
        let none = builtin_system1j(0.5).unwrap().without_potential();
        assert_eq!(check_gradient_structure(&none, 50, 1).verdict, Verdict::Unchecked);
    }

    #[test]
    fn gauge_depends_on_kappa() {
        let half = builtin_system1j(0.5).unwrap();
        assert_eq!(check_gauge_invariance(&half, 500, 3).verdict, Verdict::Pass);
        let one = builtin_system1j(1.0).unwrap();
        let (res, _) = gauge_residual(&one, &[c(1.0, 0.0), c(1.0, 0.0)], PI / 2.0).unwrap();
        // Re F goes from 1 to Re(e^{-iθ}) = 0
        assert!((res - 1.0).abs() < 1e-14);
        assert_eq!(check_gauge_invariance(&one, 500, 3).verdict, Verdict::Fail);
        let (zero, _) = gauge_residual(&one, &[c(0.3, 1.0), c(-1.0, 0.2)], 0.0).unwrap();
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn mass_resonance_by_kappa() {
        let half = builtin_system1j(0.5).unwrap();
        assert_eq!(check_mass_resonance(&half, 500, 3).verdict, Verdict::Pass);
        let one = builtin_system1j(1.0).unwrap();
        let w = mass_resonance_weights(&one);
        let (res, _) = resonance_residual(&one, &[c(1.0, 0.0), c(0.0, 1.0)], &w);
        assert!((res - 0.5).abs() < 1e-14);
        let (zero, _) = resonance_residual(&one, &[c(0.0, 0.0); 2], &w);
        assert_eq!(zero, 0.0);
        assert_eq!(check_mass_resonance(&one, 500, 3).verdict, Verdict::Fail);
    }

    #[test]
    fn weighted_resonance_with_supplied_weights() {
        let one = builtin_system1j(1.0).unwrap();
        let r = check_weighted_resonance(&one, Some(&[1.0, 2.0]), 300, 5);
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(check_weighted_resonance(&one, None, 10, 5).verdict, Verdict::Unchecked);
        let bad = check_weighted_resonance(&one, Some(&[1.0, 1.0]), 300, 5);
        assert_eq!(bad.verdict, Verdict::Fail);
    }

    #[test]
    fn homogeneity_reality_supermodularity_values() {
        let spec = builtin_system1j(0.5).unwrap();
        let (res, scale) = homogeneity_residual(&spec, &[c(1.0, 0.0), c(1.0, 0.0)], 3.0).unwrap();
        assert_eq!(res, 0.0);
        assert_eq!(scale, 27.0);
        let f = spec.f_vec(&[c(1.0, 0.0), c(2.0, 0.0)]);
        assert_eq!((f[0].re, f[1].re), (4.0, 1.0));
        let part = &spec.supermodular_parts()[0];
        let lhs_minus_rhs = {
            let e = part.eval.as_ref();
            e(&[1.0, 1.0]) + e(&[0.0, 0.0]) - e(&[1.0, 0.0]) - e(&[0.0, 1.0])
        };
        assert_eq!(lhs_minus_rhs, 1.0);
        assert_eq!(supermodularity_defect(part.eval.as_ref(), &[0.0, 0.0], 0, 1, 1.0, 1.0), 0.0);

        for r in [
            check_homogeneity(&spec, 300, 2),
            check_reality_positivity(&spec, 300, 2),
            check_supermodularity(&spec, 300, 2),
            check_integral_bound(&spec, 20, 2),
        ] {
            assert_eq!(r.verdict, Verdict::Pass, "{}", r.hypothesis);
        }
    }

    #[test]
    fn suite_verdicts_for_both_kappas() {
        let half = check_all(&builtin_system1j(0.5).unwrap(), &CheckOptions::default());
        assert!(half.all_pass(), "{:?}", half.failing());
        let one = check_all(&builtin_system1j(1.0).unwrap(), &CheckOptions::default());
        assert_eq!(one.failing(), vec!["gauge_invariance", "mass_resonance"]);
        assert_eq!(
            one.get("derivative_lipschitz").unwrap().verdict,
            Verdict::Informational
        );
    }

    #[test]
    fn three_wave_gauge_condition() {
        let matched = builtin_three_wave([1.0, 1.0, 1.0], [1.0, 1.0, 0.5]).unwrap();
        assert!(check_all(&matched, &CheckOptions { samples: 300, ..Default::default() }).all_pass());
        let off = builtin_three_wave([1.0, 1.0, 1.0], [1.0, 1.0, 1.0]).unwrap();
        assert_eq!(check_gauge_invariance(&off, 300, 0).verdict, Verdict::Fail);
    }

    #[test]
    fn integral_bound_unchecked_without_positivity() {
        let f: NonlinearityFn = Arc::new(|z: &[Complex64], o: &mut [Complex64]| {
            o[0] = Complex64::new(0.0, 3.0) * z[0] * z[0];
        });
        let spec = SystemSpec::new(
            "imaginary",
            vec![1.0],
            vec![1.0],
            vec![0.0],
            f,
            Some(Arc::new(|z: &[Complex64]| Complex64::new(0.0, 1.0) * z[0] * z[0] * z[0])),
        )
        .unwrap();
        assert_eq!(check_integral_bound(&spec, 5, 0).verdict, Verdict::Unchecked);
    }

    #[test]
    fn report_json_fields() {
        let r = check_mass_resonance(&builtin_system1j(0.5).unwrap(), 10, 0);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["hypothesis", "verdict", "residual", "samples", "worst_point"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["verdict"], "pass");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn checkers_are_deterministic(seed in any::<u64>(), kappa in 0.2f64..2.0) {
            let spec = builtin_system1j(kappa).unwrap();
            prop_assert_eq!(check_gauge_invariance(&spec, 50, seed), check_gauge_invariance(&spec, 50, seed));
            prop_assert_eq!(check_gradient_structure(&spec, 50, seed), check_gradient_structure(&spec, 50, seed));
        }

        #[test]
        fn gradient_and_gauge_imply_resonance(kappa in 0.2f64..2.0, seed in any::<u64>()) {
            let spec = builtin_system1j(kappa).unwrap();
            let h3 = check_gradient_structure(&spec, 100, seed);
            let h4 = check_gauge_invariance(&spec, 100, seed);
            if h3.verdict == Verdict::Pass && h4.verdict == Verdict::Pass {
                let sigma = spec.gauge_rates();
                for z in box_samples(seed, 2, 100) {
                    let (res, scale) = resonance_residual(&spec, &z, &sigma);
                    prop_assert!(res <= ALGEBRAIC_TOL * (1.0 + scale));
                }
            }
        }

        #[test]
        fn homogeneity_exact_for_polynomial(
            a in -2.0f64..2.0, b in -2.0f64..2.0, c2 in -2.0f64..2.0, d in -2.0f64..2.0,
            lambda in 0.1f64..3.0,
        ) {
            let spec = builtin_system1j(0.5).unwrap();
            let (res, scale) = homogeneity_residual(&spec, &[c(a, b), c(c2, d)], lambda).unwrap();
            prop_assert!(res <= 1e-13 * (1.0 + scale));
        }
    }
}
