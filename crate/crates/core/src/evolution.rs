//! Strang-split time integration: Crank–Nicolson for the linear part,
//! pointwise RK4 for the nonlinear part. An optional fourth-order scheme
//! composes three Strang steps (Yoshida triple jump).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{invalid, Error, Result};
use crate::fields::functionals::check_compatible;
use crate::fields::operators::{apply_flux_matrix, dirichlet_form, InteriorSolver};
use crate::fields::{FieldState, RadialGrid};
use crate::systems::SystemSpec;

/// Closure at `r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryRule {
    Dirichlet,
    /// Dirichlet plus multiplicative damping `exp(-strength · dt · s²)` on the
    /// outer `width` of the grid, `s ∈ [0, 1]` the depth into the layer.
    /// Breaks conservation; off by default.
    Sponge { strength: f64, width: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolveOptions {
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    pub boundary: BoundaryRule,
    pub scheme: Scheme,
    /// Stop when `K(t) > kinetic_guard · K(0)`.
    pub kinetic_guard: f64,
    /// Stop when the mass fraction beyond `0.9 r_max` exceeds this.
    pub tail_guard: f64,
    /// Keep a copy of the state every this many records (`None`: never).
    pub snapshot_every: Option<usize>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 1.0,
            record_every: 10,
            boundary: BoundaryRule::Dirichlet,
            scheme: Scheme::Strang,
            kinetic_guard: 50.0,
            tail_guard: 1e-3,
            snapshot_every: None,
        }
    }
}

/// Largest tail fraction accepted in the initial data.
pub const INITIAL_TAIL_LIMIT: f64 = 1e-8;

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Second order: `L(dt/2) N(dt) L(dt/2)`.
    #[default]
    Strang,
    /// Fourth order: Strang steps of `w₁dt, w₀dt, w₁dt` with
    /// `w₁ = 1/(2 − 2^{1/3})`, `w₀ = 1 − 2w₁`. The middle step runs backwards
    /// in time, so it cannot be combined with a sponge.
    Fourth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "outcome")]
pub enum Outcome {
    #[serde(rename = "completed")]
    Completed,
    #[serde(rename = "guard:kinetic")]
    GuardKinetic { t: f64, ratio: f64 },
    #[serde(rename = "guard:tail")]
    GuardTail { t: f64, fraction: f64 },
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Completed => "completed",
            Outcome::GuardKinetic { .. } => "guard:kinetic",
            Outcome::GuardTail { .. } => "guard:tail",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<FieldState>,
    pub outcome: Outcome,
    pub steps: usize,
    pub final_state: FieldState,
}

impl Trajectory {
    /// Fills `m_prime_fd` with centered differences of `M` between
    /// neighbouring records (interior records only).
    pub fn fill_centered_mprime(&mut self) {
        let n = self.records.len();
        for i in 1..n.saturating_sub(1) {
            let (a, b) = (self.records[i - 1], self.records[i + 1]);
            self.records[i].m_prime_fd = Some((b.m - a.m) / (b.t - a.t));
        }
    }
}

/// `Σ_k α_k²/γ_k ∫_{r > 0.9 r_max} |u_k|²` divided by `Q` (0 for zero data).
pub fn tail_fraction(state: &FieldState, spec: &SystemSpec) -> f64 {
    let grid = state.grid();
    let cut = grid.index_at_or_below(0.9 * grid.r_max());
    let w = grid.weights();
    let mut tail = 0.0;
    let mut total = 0.0;
    for (k, c) in state.components().iter().enumerate() {
        let mw = spec.mass_weight(k);
        for (i, z) in c.iter().enumerate() {
            let v = mw * w[i] * z.norm_sqr();
            total += v;
            if i > cut {
                tail += v;
            }
        }
    }
    if total > 0.0 {
        tail / total
    } else {
        0.0
    }
}

/// Precomputed split-step propagator for one spec, grid and time step.
#[derive(Debug, Clone)]
pub struct Propagator {
    spec: SystemSpec,
    dt: f64,
    /// Crank–Nicolson solvers for a half step, per component.
    solvers: Vec<InteriorSolver>,
    /// Right-hand-side coefficients `(1 − iσβ, iσγ)` per component.
    rhs_coeffs: Vec<(Complex64, Complex64)>,
    sponge: Option<Vec<f64>>,
    scratch: Vec<Complex64>,
}

impl Propagator {
    pub fn new(spec: &SystemSpec, grid: &RadialGrid, dt: f64, boundary: BoundaryRule) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return invalid(format!("dt must be positive, got {dt}"));
        }
        Self::new_signed(spec, grid, dt, boundary)
    }

    /// As [`Propagator::new`] but also accepts negative steps.
    fn new_signed(spec: &SystemSpec, grid: &RadialGrid, dt: f64, boundary: BoundaryRule) -> Result<Self> {
        if !(dt.is_finite() && dt != 0.0) {
            return invalid(format!("dt must be finite and nonzero, got {dt}"));
        }
        let mut solvers = Vec::with_capacity(spec.l());
        let mut rhs_coeffs = Vec::with_capacity(spec.l());
        for k in 0..spec.l() {
            // half step of length dt/2: σ = (dt/2) / (2α)
            let sigma = dt / (4.0 * spec.alpha()[k]);
            let (b, g) = (spec.beta()[k], spec.gamma()[k]);
            let i = Complex64::i();
            solvers.push(InteriorSolver::new(grid, 1.0 + i * sigma * b, -i * sigma * g)?);
            rhs_coeffs.push((1.0 - i * sigma * b, i * sigma * g));
        }
        let sponge = match boundary {
            BoundaryRule::Dirichlet => None,
            BoundaryRule::Sponge { strength, width } => {
                if !(strength >= 0.0 && width > 0.0 && width < grid.r_max()) {
                    return invalid("sponge needs strength >= 0 and 0 < width < r_max");
                }
                let start = grid.r_max() - width;
                Some(
                    grid.radii()
                        .iter()
                        .map(|&r| {
                            let s = ((r - start) / width).max(0.0);
                            (-strength * dt * s * s).exp()
                        })
                        .collect(),
                )
            }
        };
        Ok(Self {
            spec: spec.clone(),
            dt,
            solvers,
            rhs_coeffs,
            sponge,
            scratch: vec![Complex64::default(); grid.len()],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Crank–Nicolson over `dt/2` for every component.
    pub fn linear_halfstep(&mut self, state: &mut FieldState) {
        let grid = state.shared_grid().clone();
        let w = grid.weights();
        for (k, c) in state.components_mut().iter_mut().enumerate() {
            let (a, b) = self.rhs_coeffs[k];
            apply_flux_matrix(c, &grid, &mut self.scratch);
            for i in 0..c.len() {
                self.scratch[i] = a * w[i] * c[i] + b * self.scratch[i];
            }
            self.solvers[k].solve_in_place(&mut self.scratch);
            c.copy_from_slice(&self.scratch);
        }
        state.enforce_boundary();
    }

    /// Classical RK4 on `∂_t u_k = (i/α_k) f_k(u)` at every node.
    pub fn nonlinear_substep(&self, state: &mut FieldState, dt: f64) {
        nonlinear_rk4(&self.spec, state, dt);
    }

    /// `linear_halfstep ∘ nonlinear_substep ∘ linear_halfstep`.
    pub fn step(&mut self, state: &mut FieldState) {
        self.linear_halfstep(state);
        nonlinear_rk4(&self.spec, state, self.dt);
        self.linear_halfstep(state);
        if let Some(s) = &self.sponge {
            for c in state.components_mut() {
                for (z, d) in c.iter_mut().zip(s) {
                    *z *= *d;
                }
            }
        }
        state.t += self.dt;
    }
}

/// Strang or triple-jump composition of [`Propagator`] steps.
enum Stepper {
    Strang(Propagator),
    Fourth([Propagator; 2]),
}

impl Stepper {
    fn new(spec: &SystemSpec, grid: &RadialGrid, opts: &EvolveOptions) -> Result<Self> {
        match opts.scheme {
            Scheme::Strang => Ok(Self::Strang(Propagator::new(spec, grid, opts.dt, opts.boundary)?)),
            Scheme::Fourth => {
                if opts.boundary != BoundaryRule::Dirichlet {
                    return invalid("the fourth-order scheme needs the Dirichlet boundary rule");
                }
                let w1 = 1.0 / (2.0 - 2f64.cbrt());
                let w0 = 1.0 - 2.0 * w1;
                Ok(Self::Fourth([
                    Propagator::new_signed(spec, grid, w1 * opts.dt, BoundaryRule::Dirichlet)?,
                    Propagator::new_signed(spec, grid, w0 * opts.dt, BoundaryRule::Dirichlet)?,
                ]))
            }
        }
    }

    fn step(&mut self, state: &mut FieldState) {
        match self {
            Self::Strang(p) => p.step(state),
            Self::Fourth([outer, inner]) => {
                outer.step(state);
                inner.step(state);
                outer.step(state);
            }
        }
    }
}

/// One RK4 step of the pointwise system `ż_k = (i/α_k) f_k(z)`.
pub fn rk4_point(spec: &SystemSpec, z: &mut [Complex64], dt: f64) {
    let l = z.len();
    let rates: Vec<Complex64> = spec
        .alpha()
        .iter()
        .map(|a| Complex64::new(0.0, 1.0 / a))
        .collect();
    let mut k1 = vec![Complex64::default(); l];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();
    rk4_into(spec, &rates, z, dt, [&mut k1, &mut k2, &mut k3, &mut k4], &mut tmp);
}

fn rk4_into(
    spec: &SystemSpec,
    rates: &[Complex64],
    z: &mut [Complex64],
    dt: f64,
    ks: [&mut Vec<Complex64>; 4],
    tmp: &mut [Complex64],
) {
    let l = z.len();
    let [k1, k2, k3, k4] = ks;
    let rhs = |x: &[Complex64], out: &mut [Complex64]| {
        spec.eval_f(x, out);
        for (o, r) in out.iter_mut().zip(rates) {
            *o *= r;
        }
    };
    rhs(z, k1);
    for j in 0..l {
        tmp[j] = z[j] + 0.5 * dt * k1[j];
    }
    rhs(tmp, k2);
    for j in 0..l {
        tmp[j] = z[j] + 0.5 * dt * k2[j];
    }
    rhs(tmp, k3);
    for j in 0..l {
        tmp[j] = z[j] + dt * k3[j];
    }
    rhs(tmp, k4);
    for j in 0..l {
        z[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
}

fn nonlinear_rk4(spec: &SystemSpec, state: &mut FieldState, dt: f64) {
    let l = state.l();
    let n = state.grid().len();
    let rates: Vec<Complex64> = spec
        .alpha()
        .iter()
        .map(|a| Complex64::new(0.0, 1.0 / a))
        .collect();
    let mut z = vec![Complex64::default(); l];
    let mut k1 = z.clone();
    let mut k2 = z.clone();
    let mut k3 = z.clone();
    let mut k4 = z.clone();
    let mut tmp = z.clone();
    let comps = state.components_mut();
    for i in 0..n {
        for k in 0..l {
            z[k] = comps[k][i];
        }
        rk4_into(spec, &rates, &mut z, dt, [&mut k1, &mut k2, &mut k3, &mut k4], &mut tmp);
        for k in 0..l {
            comps[k][i] = z[k];
        }
    }
}

pub fn linear_halfstep(state: &FieldState, spec: &SystemSpec, dt: f64) -> Result<FieldState> {
    check_compatible(state, spec)?;
    let mut p = Propagator::new(spec, state.grid(), dt, BoundaryRule::Dirichlet)?;
    let mut s = state.clone();
    p.linear_halfstep(&mut s);
    Ok(s)
}

pub fn nonlinear_substep(state: &FieldState, spec: &SystemSpec, dt: f64) -> Result<FieldState> {
    check_compatible(state, spec)?;
    let mut s = state.clone();
    nonlinear_rk4(spec, &mut s, dt);
    Ok(s)
}

pub fn step(state: &FieldState, spec: &SystemSpec, dt: f64) -> Result<FieldState> {
    check_compatible(state, spec)?;
    let mut p = Propagator::new(spec, state.grid(), dt, BoundaryRule::Dirichlet)?;
    let mut s = state.clone();
    p.step(&mut s);
    Ok(s)
}

fn kinetic(state: &FieldState, spec: &SystemSpec) -> f64 {
    state
        .components()
        .iter()
        .zip(spec.gamma())
        .map(|(c, g)| g * dirichlet_form(c, state.grid()))
        .sum()
}

fn is_finite(state: &FieldState) -> bool {
    state
        .components()
        .iter()
        .all(|c| c.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
}

/// Integrates from `state0` to `t_end`, calling `hook` at `t = 0`, every
/// `record_every` steps and at the final step. The step size is kept as
/// given, so the run takes `round(t_end / dt)` steps and stops within
/// `dt / 2` of `t_end`.
pub fn evolve<H>(
    state0: &FieldState,
    spec: &SystemSpec,
    opts: &EvolveOptions,
    mut hook: H,
) -> Result<Trajectory>
where
    H: FnMut(&FieldState) -> Result<DiagnosticsRecord>,
{
    check_compatible(state0, spec)?;
    if !(opts.t_end.is_finite() && opts.t_end > 0.0) {
        return invalid(format!("t_end must be positive, got {}", opts.t_end));
    }
    if opts.record_every == 0 {
        return invalid("record_every must be at least 1");
    }
    let tail0 = tail_fraction(state0, spec);
    if tail0 >= INITIAL_TAIL_LIMIT {
        return invalid(format!(
            "initial tail fraction {tail0:e} exceeds {INITIAL_TAIL_LIMIT:e}; enlarge r_max"
        ));
    }
    let mut prop = Stepper::new(spec, state0.grid(), opts)?;
    let steps = (opts.t_end / opts.dt).round().max(1.0) as usize;

    let mut state = state0.clone();
    state.enforce_boundary();
    let t0 = state.t;
    let k0 = kinetic(&state, spec);
    let mut records = vec![hook(&state)?];
    let mut snapshots = Vec::new();
    let snap = |records: usize, s: &FieldState, snaps: &mut Vec<FieldState>| {
        if let Some(every) = opts.snapshot_every {
            if every > 0 && (records - 1) % every == 0 {
                snaps.push(s.clone());
            }
        }
    };
    snap(records.len(), &state, &mut snapshots);
    let mut outcome = Outcome::Completed;
    let mut taken = 0;

    for n in 1..=steps {
        prop.step(&mut state);
        state.t = t0 + n as f64 * opts.dt;
        taken = n;
        if !is_finite(&state) {
            return Err(Error::NumericalFailure(format!(
                "non-finite field at t = {}",
                state.t
            )));
        }
        let k = kinetic(&state, spec);
        let tail = tail_fraction(&state, spec);
        if k0 > 0.0 && k > opts.kinetic_guard * k0 {
            outcome = Outcome::GuardKinetic {
                t: state.t,
                ratio: k / k0,
            };
        } else if tail > opts.tail_guard {
            outcome = Outcome::GuardTail {
                t: state.t,
                fraction: tail,
            };
        }
        let halted = outcome != Outcome::Completed;
        if n % opts.record_every == 0 || n == steps || halted {
            records.push(hook(&state)?);
            snap(records.len(), &state, &mut snapshots);
        }
        if halted {
            break;
        }
    }
    Ok(Trajectory {
        records,
        snapshots,
        outcome,
        steps: taken,
        final_state: state,
    })
}
