//! Uniform radial grid on `[0, r_max]` carrying the five-dimensional measure.
//!
//! Node `i` sits at `r_i = i h`. Quadrature weights follow the composite
//! trapezoid rule against `ω₄ r⁴ dr`, so the weight at the origin vanishes.
//! The weight of the outer (Dirichlet) node is fixed so that the constant
//! function integrates exactly over the whole ball; since every evolved
//! profile vanishes there, this never couples into the dynamics.
//!
//! The grid also owns the edge conductances of the discrete Laplacian. They
//! are chosen so that the operator is symmetric in the weighted inner
//! product (which makes Crank–Nicolson exactly unitary) and reproduces
//! `Δ r² = 10` at every interior node.

use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Area of the unit sphere `S⁴ ⊂ ℝ⁵`.
pub const SPHERE_AREA: f64 = 8.0 * PI * PI / 3.0;

/// Minimum number of nodes accepted by [`RadialGrid::new`].
pub const MIN_POINTS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    r_max: f64,
    h: f64,
    r: Vec<f64>,
    weights: Vec<f64>,
    /// `edges[i]` couples nodes `i` and `i + 1`; includes the sphere area.
    edges: Vec<f64>,
}

/// Conductance polynomial in half-integer edge coordinates `s = i + 1/2`.
///
/// The unique quartic with leading term `s⁴` for which the flux-form
/// operator with nodal masses `i⁴` is exact on `r²`; it vanishes at `s = 1/2`,
/// decoupling the origin node.
fn edge_polynomial(s: f64) -> f64 {
    let s2 = s * s;
    s2 * s2 - 5.0 / 6.0 * s2 + 7.0 / 48.0
}

impl RadialGrid {
    pub fn new(r_max: f64, n_points: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return invalid(format!("r_max must be positive, got {r_max}"));
        }
        if n_points < MIN_POINTS {
            return invalid(format!(
                "n_points must be at least {MIN_POINTS}, got {n_points}"
            ));
        }
        let last = n_points - 1;
        let h = r_max / last as f64;
        let r: Vec<f64> = (0..n_points).map(|i| i as f64 * h).collect();

        let mut weights: Vec<f64> = r.iter().map(|&ri| SPHERE_AREA * h * ri.powi(4)).collect();
        let interior: f64 = weights[..last].iter().sum();
        weights[last] = SPHERE_AREA * r_max.powi(5) / 5.0 - interior;

        let h3 = h * h * h;
        let edges = (0..last)
            .map(|i| SPHERE_AREA * h3 * edge_polynomial(i as f64 + 0.5))
            .collect();

        Ok(Self {
            r_max,
            h,
            r,
            weights,
            edges,
        })
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Index of the last node with `r_i <= radius` (clamped to the grid).
    pub fn index_at_or_below(&self, radius: f64) -> usize {
        if radius <= 0.0 {
            return 0;
        }
        let i = (radius / self.h + 1e-9).floor() as usize;
        i.min(self.len() - 1)
    }

    /// `Σ w_i f_i`, the quadrature of a real radial profile over the ball.
    pub fn integrate(&self, profile: &[f64]) -> Result<f64> {
        if profile.len() != self.len() {
            return invalid(format!(
                "profile length {} does not match grid length {}",
                profile.len(),
                self.len()
            ));
        }
        Ok(self.integrate_unchecked(profile.iter().copied()))
    }

    pub(crate) fn integrate_unchecked(&self, values: impl Iterator<Item = f64>) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Quadrature restricted to nodes with `r_i <= radius` (sharp indicator).
    pub(crate) fn integrate_ball(&self, values: impl Iterator<Item = f64>, radius: f64) -> f64 {
        let last = self.index_at_or_below(radius);
        self.weights[..=last]
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .sum()
    }
}

/// Convenience wrapper mirroring the free-function form of the grid API.
pub fn make_radial_grid(r_max: f64, n_points: usize) -> Result<RadialGrid> {
    RadialGrid::new(r_max, n_points)
}

pub fn integrate(profile: &[f64], grid: &RadialGrid) -> Result<f64> {
    grid.integrate(profile)
}
