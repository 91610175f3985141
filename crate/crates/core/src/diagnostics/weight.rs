//! The Morawetz weight `a(r)` and the smooth cutoff `χ_R`.

use crate::error::{invalid, Error, Result};
use crate::fields::RadialGrid;

/// Values of the weight and its radial derivatives at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightPoint {
    pub a: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    /// `Δa = a'' + 4a'/r`
    pub lap: f64,
    /// `(Δa)' = a''' + 4a''/r − 4a'/r²`
    pub lap_d1: f64,
    /// `Δ²a = a'''' + 8a'''/r + 8a''/r² − 8a'/r³`
    pub bilap: f64,
}

/// `a = r²` on `[0, R]`, a quintic bridge on `(R, 2R]`, and slope `3R` beyond.
///
/// On the bridge `a'' = 2(1−s)²(1+2s)` with `s = (r−R)/R`, so `a` is `C³`,
/// convex and non-decreasing. Convexity caps `a(2R)` at `3.7R²`, so the
/// outer piece is `3Rr − 2.3R²`: it differs from `3Rr` by a constant, which
/// none of the virial quantities see.
#[derive(Debug, Clone, PartialEq)]
pub struct MorawetzWeight {
    radius: f64,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub lap: Vec<f64>,
    pub lap_d1: Vec<f64>,
    pub bilap: Vec<f64>,
}

pub fn weight_at(radius: f64, r: f64) -> WeightPoint {
    let big_r = radius;
    let (a, d1, d2, d3, d4) = if r <= big_r {
        (r * r, 2.0 * r, 2.0, 0.0, 0.0)
    } else if r <= 2.0 * big_r {
        let s = (r - big_r) / big_r;
        let s2 = s * s;
        let a = big_r * big_r * (1.0 + 2.0 * s + s2 - 0.5 * s2 * s2 + 0.2 * s2 * s2 * s);
        let d1 = big_r * (2.0 + 2.0 * s - 2.0 * s2 * s + s2 * s2);
        let d2 = 2.0 * (1.0 - s) * (1.0 - s) * (1.0 + 2.0 * s);
        let d3 = -12.0 * s * (1.0 - s) / big_r;
        let d4 = (24.0 * s - 12.0) / (big_r * big_r);
        (a, d1, d2, d3, d4)
    } else {
        (3.0 * big_r * r - 2.3 * big_r * big_r, 3.0 * big_r, 0.0, 0.0, 0.0)
    };
    let (lap, lap_d1, bilap) = if r <= big_r {
        (10.0, 0.0, 0.0)
    } else {
        (
            d2 + 4.0 * d1 / r,
            d3 + 4.0 * d2 / r - 4.0 * d1 / (r * r),
            d4 + 8.0 * d3 / r + 8.0 * d2 / (r * r) - 8.0 * d1 / (r * r * r),
        )
    };
    WeightPoint {
        a,
        d1,
        d2,
        d3,
        d4,
        lap,
        lap_d1,
        bilap,
    }
}

impl MorawetzWeight {
    pub fn new(radius: f64, grid: &RadialGrid) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return invalid(format!("weight radius must be positive, got {radius}"));
        }
        if 2.0 * radius >= grid.r_max() {
            return invalid(format!(
                "2R = {} must lie inside r_max = {}",
                2.0 * radius,
                grid.r_max()
            ));
        }
        for j in 0..=1000 {
            let r = radius * (1.0 + j as f64 / 1000.0);
            let p = weight_at(radius, r);
            if p.d1 < 0.0 || p.d2 < -1e-14 {
                return Err(Error::NumericalFailure(format!(
                    "bridge loses monotonicity or convexity at r = {r}"
                )));
            }
        }
        let pts: Vec<WeightPoint> = grid.radii().iter().map(|&r| weight_at(radius, r)).collect();
        Ok(Self {
            radius,
            d1: pts.iter().map(|p| p.d1).collect(),
            d2: pts.iter().map(|p| p.d2).collect(),
            lap: pts.iter().map(|p| p.lap).collect(),
            lap_d1: pts.iter().map(|p| p.lap_d1).collect(),
            bilap: pts.iter().map(|p| p.bilap).collect(),
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn at(&self, r: f64) -> WeightPoint {
        weight_at(self.radius, r)
    }
}

pub fn make_weight(radius: f64, grid: &RadialGrid) -> Result<MorawetzWeight> {
    MorawetzWeight::new(radius, grid)
}

/// `e^{-1/x}` and its first two derivatives, zero for `x ≤ 0`.
fn mollifier(x: f64) -> (f64, f64, f64) {
    if x <= 1.0 / 700.0 {
        return (0.0, 0.0, 0.0);
    }
    let g = (-1.0 / x).exp();
    let x2 = x * x;
    (g, g / x2, g * (1.0 / (x2 * x2) - 2.0 / (x2 * x)))
}

/// `χ_R(r) = χ(r/R)` with `χ = 1` on `[0, 1/2]`, `0` on `[1, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffChi {
    radius: f64,
    pub values: Vec<f64>,
    /// `χ_R'`
    pub d1: Vec<f64>,
    /// `Δχ_R`
    pub lap: Vec<f64>,
}

/// `(χ_R, χ_R', χ_R'')` at radius `r`.
pub fn cutoff_at(radius: f64, r: f64) -> (f64, f64, f64) {
    let rho = r / radius;
    if rho <= 0.5 {
        return (1.0, 0.0, 0.0);
    }
    if rho >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let t = 2.0 * rho - 1.0;
    let (a, ga1, ga2) = mollifier(1.0 - t);
    let (b, b1, b2) = mollifier(t);
    let (a1, a2) = (-ga1, ga2);
    let s = a + b;
    let s1 = a1 + b1;
    let num = a1 * b - a * b1;
    let num1 = a2 * b - a * b2;
    let chi = a / s;
    let chi_t = num / (s * s);
    let chi_tt = num1 / (s * s) - 2.0 * num * s1 / (s * s * s);
    let k = 2.0 / radius;
    (chi, chi_t * k, chi_tt * k * k)
}

impl CutoffChi {
    pub fn new(radius: f64, grid: &RadialGrid) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return invalid(format!("cutoff radius must be positive, got {radius}"));
        }
        let mut values = Vec::with_capacity(grid.len());
        let mut d1 = Vec::with_capacity(grid.len());
        let mut lap = Vec::with_capacity(grid.len());
        for &r in grid.radii() {
            let (c, c1, c2) = cutoff_at(radius, r);
            values.push(c);
            d1.push(c1);
            lap.push(if r > 0.0 { c2 + 4.0 * c1 / r } else { 0.0 });
        }
        Ok(Self {
            radius,
            values,
            d1,
            lap,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn plateau_identities() {
        let big_r = 2.0;
        let p = weight_at(big_r, big_r / 2.0);
        assert_eq!((p.d2, p.lap, p.bilap), (2.0, 10.0, 0.0));
        let p = weight_at(big_r, 3.0 * big_r);
        assert_eq!(p.d2, 0.0);
        assert!((p.lap - 4.0).abs() < 1e-14);
        let expected = -24.0 * big_r / (27.0 * big_r.powi(3));
        assert!((p.bilap - expected).abs() < 1e-15);
    }

    #[test]
    fn continuity_across_junctions() {
        let big_r = 1.5;
        for r0 in [big_r, 2.0 * big_r] {
            let below = weight_at(big_r, r0 * (1.0 - 1e-12));
            let above = weight_at(big_r, r0 * (1.0 + 1e-12));
            for (x, y) in [
                (below.a, above.a),
                (below.d1, above.d1),
                (below.d2, above.d2),
                (below.d3, above.d3),
            ] {
                assert!((x - y).abs() < 1e-9, "{r0}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn bridge_derivatives_match_finite_differences() {
        let big_r = 1.0;
        let h = 1e-5;
        for j in 1..20 {
            let r = big_r * (1.0 + j as f64 / 20.0);
            let p = weight_at(big_r, r);
            let (m, q) = (weight_at(big_r, r - h), weight_at(big_r, r + h));
            assert!(((q.a - m.a) / (2.0 * h) - p.d1).abs() < 1e-8);
            assert!(((q.d1 - m.d1) / (2.0 * h) - p.d2).abs() < 1e-8);
            assert!(((q.d2 - m.d2) / (2.0 * h) - p.d3).abs() < 1e-7);
            assert!(((q.d3 - m.d3) / (2.0 * h) - p.d4).abs() < 1e-6);
            assert!(((q.lap - m.lap) / (2.0 * h) - p.lap_d1).abs() < 1e-7);
            let expected = p.d4 + 8.0 * p.d3 / r + 8.0 * p.d2 / (r * r) - 8.0 * p.d1 / r.powi(3);
            assert!(((q.lap_d1 - m.lap_d1) / (2.0 * h) + 4.0 * p.lap_d1 / r - expected).abs() < 1e-6);
        }
    }

    #[test]
    fn constructor_checks_domain() {
        let grid = RadialGrid::new(10.0, 200).unwrap();
        assert!(MorawetzWeight::new(5.0, &grid).is_err());
        assert!(MorawetzWeight::new(0.0, &grid).is_err());
        let w = MorawetzWeight::new(2.0, &grid).unwrap();
        assert!(w.d2.iter().all(|&v| v >= 0.0) && w.d1.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn cutoff_plateaus_and_derivatives() {
        let big_r = 4.0;
        assert_eq!(cutoff_at(big_r, 1.0), (1.0, 0.0, 0.0));
        assert_eq!(cutoff_at(big_r, 2.0), (1.0, 0.0, 0.0));
        assert_eq!(cutoff_at(big_r, 4.0), (0.0, 0.0, 0.0));
        let h = 1e-6;
        for j in 1..40 {
            let r = big_r * (0.5 + j as f64 / 80.0);
            let (c, c1, c2) = cutoff_at(big_r, r);
            assert!((0.0..=1.0).contains(&c));
            let (m, _, _) = cutoff_at(big_r, r - h);
            let (p, _, _) = cutoff_at(big_r, r + h);
            assert!(((p - m) / (2.0 * h) - c1).abs() < 1e-6);
            let (_, m1, _) = cutoff_at(big_r, r - h);
            let (_, p1, _) = cutoff_at(big_r, r + h);
            assert!(((p1 - m1) / (2.0 * h) - c2).abs() < 1e-5);
        }
    }

    proptest! {
        #[test]
        fn cutoff_is_monotone(radius in 0.5f64..20.0, a in 0.0f64..1.5, b in 0.0f64..1.5) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let (x, _, _) = cutoff_at(radius, lo * radius);
            let (y, d, _) = cutoff_at(radius, hi * radius);
            prop_assert!(y <= x + 1e-15);
            prop_assert!(d <= 0.0);
        }

        #[test]
        fn bridge_is_convex_and_bounded(radius in 0.5f64..20.0, s in 0.0f64..=1.0) {
            let p = weight_at(radius, radius * (1.0 + s));
            prop_assert!(p.d1 >= 0.0 && p.d2 >= 0.0);
            // |∂a| ≤ C R, |∂²a| ≤ C R / r with C = 3
            let r = radius * (1.0 + s);
            prop_assert!(p.d1 <= 3.0 * radius + 1e-12);
            prop_assert!(p.d2 <= 3.0 * radius / r);
        }
    }
}
