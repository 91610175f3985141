use std::sync::Arc;

use num_complex::Complex64;

use super::grid::RadialGrid;
use crate::error::{invalid, Result};

/// `l` complex radial profiles sampled on one shared grid at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub t: f64,
    grid: Arc<RadialGrid>,
    components: Vec<Vec<Complex64>>,
}

impl FieldState {
    pub fn new(grid: Arc<RadialGrid>, components: Vec<Vec<Complex64>>, t: f64) -> Result<Self> {
        if components.is_empty() {
            return invalid("a field state needs at least one component");
        }
        for (k, c) in components.iter().enumerate() {
            if c.len() != grid.len() {
                return invalid(format!(
                    "component {k} has {} samples, grid has {}",
                    c.len(),
                    grid.len()
                ));
            }
            if c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return invalid(format!("component {k} contains non-finite values"));
            }
        }
        Ok(Self {
            t,
            grid,
            components,
        })
    }

    pub fn zeros(grid: Arc<RadialGrid>, l: usize) -> Self {
        let n = grid.len();
        Self {
            t: 0.0,
            grid,
            components: vec![vec![Complex64::new(0.0, 0.0); n]; l],
        }
    }

    pub fn from_real(grid: Arc<RadialGrid>, profiles: &[Vec<f64>], t: f64) -> Result<Self> {
        let components = profiles
            .iter()
            .map(|p| p.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::new(grid, components, t)
    }

    /// Builds a state by sampling `f(k, r)` for every component and node.
    pub fn from_fn(
        grid: Arc<RadialGrid>,
        l: usize,
        t: f64,
        mut f: impl FnMut(usize, f64) -> Complex64,
    ) -> Result<Self> {
        let components = (0..l)
            .map(|k| grid.radii().iter().map(|&r| f(k, r)).collect())
            .collect();
        Self::new(grid, components, t)
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn shared_grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn l(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.components
    }

    pub fn component(&self, k: usize) -> &[Complex64] {
        &self.components[k]
    }

    pub fn components_mut(&mut self) -> &mut [Vec<Complex64>] {
        &mut self.components
    }

    /// Values of all components at node `i`.
    pub fn point(&self, i: usize, out: &mut [Complex64]) {
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c[i];
        }
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        let mut s = self.clone();
        for c in &mut s.components {
            for z in c.iter_mut() {
                *z *= lambda;
            }
        }
        s
    }

    /// Componentwise product with a real radial profile (e.g. a cutoff).
    pub fn multiplied_by(&self, profile: &[f64]) -> Self {
        let mut s = self.clone();
        for c in &mut s.components {
            for (z, &p) in c.iter_mut().zip(profile) {
                *z *= p;
            }
        }
        s
    }

    /// Multiplies component `k` by `exp(i phases[k])`.
    pub fn rotated(&self, phases: &[f64]) -> Self {
        let mut s = self.clone();
        for (c, &phase) in s.components.iter_mut().zip(phases) {
            let rot = Complex64::from_polar(1.0, phase);
            for z in c.iter_mut() {
                *z *= rot;
            }
        }
        s
    }

    pub fn conjugated(&self) -> Self {
        let mut s = self.clone();
        for c in &mut s.components {
            for z in c.iter_mut() {
                *z = z.conj();
            }
        }
        s
    }

    /// Forces a vanishing one-sided radial derivative at the origin and the
    /// homogeneous Dirichlet value at `r_max`.
    pub fn enforce_boundary(&mut self) {
        for c in &mut self.components {
            regularize_origin(c);
            let last = c.len() - 1;
            c[last] = Complex64::new(0.0, 0.0);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.iter().map(|z| z.norm()))
            .fold(0.0, f64::max)
    }
}

/// Sets `u₀` so that the second-order one-sided derivative
/// `(-3u₀ + 4u₁ - u₂) / 2h` vanishes.
pub(crate) fn regularize_origin<T>(u: &mut [T])
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Sub<Output = T>,
{
    u[0] = (u[1] * 4.0 - u[2]) * (1.0 / 3.0);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<RadialGrid> {
        Arc::new(RadialGrid::new(4.0, 64).unwrap())
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let g = grid();
        let bad = vec![vec![Complex64::new(0.0, 0.0); 10]];
        assert!(FieldState::new(g, bad, 0.0).is_err());
    }

    #[test]
    fn origin_regularization_kills_derivative() {
        let g = grid();
        let mut s =
            FieldState::from_fn(g.clone(), 2, 0.0, |k, r| Complex64::new(r + k as f64, r * r))
                .unwrap();
        s.enforce_boundary();
        let h = g.spacing();
        for c in s.components() {
            let d = (c[0] * -3.0 + c[1] * 4.0 - c[2]) / (2.0 * h);
            assert!(d.norm() < 1e-12);
            assert_eq!(c[c.len() - 1], Complex64::new(0.0, 0.0));
        }
    }
}
