//! Discrete radial differential operators and the banded solver behind the
//! implicit steps.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use super::grid::RadialGrid;
use crate::error::{invalid, Error, Result};

/// Scalars the stencils operate on (`f64` and `Complex64`).
pub trait Field:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
}

impl Field for f64 {}
impl Field for Complex64 {}

/// Radial Laplacian `u'' + 4u'/r` in flux form.
///
/// Interior nodes use the symmetric conservative stencil, the origin uses
/// `Δu(0) = 5u''(0) ≈ 10 (u₁ - u₀) / h²`, and the Dirichlet node at `r_max`
/// carries no equation (its output is zero).
pub fn radial_laplacian<T: Field>(u: &[T], grid: &RadialGrid) -> Result<Vec<T>> {
    if u.len() != grid.len() {
        return invalid(format!(
            "profile length {} does not match grid length {}",
            u.len(),
            grid.len()
        ));
    }
    let mut out = vec![T::default(); u.len()];
    laplacian_into(u, grid, &mut out);
    Ok(out)
}

pub(crate) fn laplacian_into<T: Field>(u: &[T], grid: &RadialGrid, out: &mut [T]) {
    let n = grid.len();
    let e = grid.edges();
    let w = grid.weights();
    let h = grid.spacing();
    out[0] = (u[1] - u[0]) * (10.0 / (h * h));
    for i in 1..n - 1 {
        let flux_out = (u[i + 1] - u[i]) * e[i];
        let flux_in = (u[i] - u[i - 1]) * e[i - 1];
        out[i] = (flux_out - flux_in) * (1.0 / w[i]);
    }
    out[n - 1] = T::default();
}

/// `Σ_edges c |u_{i+1} - u_i|²`, equal to `∫|∇u|² dx` for the discrete
/// operator: `-⟨u, Δu⟩ = dirichlet_form(u)` whenever `u(r_max) = 0`.
pub fn dirichlet_form(u: &[Complex64], grid: &RadialGrid) -> f64 {
    grid.edges()
        .iter()
        .zip(u.windows(2))
        .map(|(c, pair)| c * (pair[1] - pair[0]).norm_sqr())
        .sum()
}

pub(crate) fn dirichlet_form_real(u: &[f64], grid: &RadialGrid) -> f64 {
    grid.edges()
        .iter()
        .zip(u.windows(2))
        .map(|(c, pair)| c * (pair[1] - pair[0]).powi(2))
        .sum()
}

/// Fourth-order centered radial derivative.
///
/// Ghost values use the even reflection `u(-r) = u(r)` at the origin and the
/// odd reflection about `r_max` consistent with the Dirichlet closure.
pub fn radial_derivative<T: Field>(u: &[T], grid: &RadialGrid) -> Vec<T> {
    let n = u.len();
    let mut out = vec![T::default(); n];
    radial_derivative_into(u, grid.spacing(), &mut out);
    out
}

pub(crate) fn radial_derivative_into<T: Field>(u: &[T], h: f64, out: &mut [T]) {
    let n = u.len();
    let last = n - 1;
    let at = |j: isize| -> T {
        if j < 0 {
            u[(-j) as usize]
        } else if j as usize > last {
            let mirror = 2 * last - j as usize;
            u[last] * 2.0 - u[mirror]
        } else {
            u[j as usize]
        }
    };
    let scale = 1.0 / (12.0 * h);
    for i in 0..n {
        let j = i as isize;
        let d = (at(j + 1) - at(j - 1)) * 8.0 - (at(j + 2) - at(j - 2));
        out[i] = d * scale;
    }
    out[0] = T::default();
}

/// Factorized tridiagonal system `(p W + q S) x = y` on the interior nodes
/// `1..n-1`, where `W` holds the quadrature weights and `S` the symmetric
/// flux matrix (`Δ = W⁻¹ S`). Solutions carry zero at both end nodes.
#[derive(Debug, Clone)]
pub(crate) struct InteriorSolver {
    sub: Vec<Complex64>,
    upper_mod: Vec<Complex64>,
    pivot_inv: Vec<Complex64>,
}

impl InteriorSolver {
    pub(crate) fn new(grid: &RadialGrid, p: Complex64, q: Complex64) -> Result<Self> {
        let n = grid.len();
        let m = n - 2;
        let e = grid.edges();
        let w = grid.weights();
        // interior index j ↔ node j + 1
        let diag = |j: usize| p * w[j + 1] - q * (e[j] + e[j + 1]);
        let off = |j: usize| q * e[j + 1]; // couples interior j and j + 1
        let mut sub = vec![Complex64::default(); m];
        let mut upper_mod = vec![Complex64::default(); m];
        let mut pivot_inv = vec![Complex64::default(); m];
        let mut prev_upper = Complex64::default();
        for j in 0..m {
            let a = if j > 0 { off(j - 1) } else { Complex64::default() };
            let pivot = diag(j) - a * prev_upper;
            if pivot.norm() < 1e-300 || !pivot.re.is_finite() || !pivot.im.is_finite() {
                return Err(Error::NumericalFailure(format!(
                    "zero pivot at interior node {j} in banded solve"
                )));
            }
            let inv = pivot.inv();
            let c = if j + 1 < m { off(j) } else { Complex64::default() };
            sub[j] = a;
            pivot_inv[j] = inv;
            upper_mod[j] = c * inv;
            prev_upper = upper_mod[j];
        }
        Ok(Self {
            sub,
            upper_mod,
            pivot_inv,
        })
    }

    /// Solves in place: `x` holds the full-grid right-hand side on entry
    /// (nodes `1..n-1` used) and the solution on exit.
    pub(crate) fn solve_in_place(&self, x: &mut [Complex64]) {
        let m = self.pivot_inv.len();
        let mut prev = Complex64::default();
        for j in 0..m {
            let v = (x[j + 1] - self.sub[j] * prev) * self.pivot_inv[j];
            x[j + 1] = v;
            prev = v;
        }
        for j in (0..m.saturating_sub(1)).rev() {
            let next = x[j + 2];
            x[j + 1] -= self.upper_mod[j] * next;
        }
        x[0] = Complex64::default();
        let last = x.len() - 1;
        x[last] = Complex64::default();
    }
}

/// `S u` on interior nodes (flux differences, without the `W⁻¹`).
pub(crate) fn apply_flux_matrix(u: &[Complex64], grid: &RadialGrid, out: &mut [Complex64]) {
    let n = grid.len();
    let e = grid.edges();
    out[0] = Complex64::default();
    for i in 1..n - 1 {
        out[i] = (u[i + 1] - u[i]) * e[i] - (u[i] - u[i - 1]) * e[i - 1];
    }
    out[n - 1] = Complex64::default();
}
