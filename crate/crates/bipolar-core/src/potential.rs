//! Closed-form potential models for the benchmark systems, with analytic
//! spatial derivatives. No numerical differentiation enters the propagation
//! path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Overflow guard for sech; the benchmark grids never exceed |arg| ~ 90.
fn sech(z: f64) -> f64 {
    if z.abs() > 350.0 {
        0.0
    } else {
        2.0 / (z.exp() + (-z).exp())
    }
}

/// Diabatic potential matrix V_ij(x) for one or two surfaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialModel {
    /// V = 0 everywhere (free particle).
    Free,
    /// V(x) = v0 * sech(alpha x)^2
    Eckart { v0: f64, alpha: f64 },
    /// V(x) = v0 * sech(alpha x)^2 + (v_right - v_left)/2 * (tanh(beta x) + 1) + v_left
    BarrierRamp {
        v0: f64,
        alpha: f64,
        beta: f64,
        v_left: f64,
        v_right: f64,
    },
    /// V11 = V22 = v0 sech(alpha x)^2, V12 = V21 = d0 sech(alpha x)^2
    TwoSurface { v0: f64, d0: f64, alpha: f64 },
}

impl PotentialModel {
    pub fn free() -> Self {
        PotentialModel::Free
    }

    pub fn eckart(v0: f64, alpha: f64) -> Result<Self> {
        if !(v0 > 0.0) || !(alpha > 0.0) {
            return Err(Error::InvalidParameter(
                "eckart requires v0 > 0 and alpha > 0".into(),
            ));
        }
        Ok(PotentialModel::Eckart { v0, alpha })
    }

    pub fn barrier_ramp(v0: f64, alpha: f64, beta: f64, v_left: f64, v_right: f64) -> Result<Self> {
        if !(alpha > 0.0) || !(beta > 0.0) {
            return Err(Error::InvalidParameter(
                "barrier_ramp requires alpha > 0 and beta > 0".into(),
            ));
        }
        if !v0.is_finite() || !v_left.is_finite() || !v_right.is_finite() {
            return Err(Error::InvalidParameter(
                "barrier_ramp parameters must be finite".into(),
            ));
        }
        Ok(PotentialModel::BarrierRamp {
            v0,
            alpha,
            beta,
            v_left,
            v_right,
        })
    }

    pub fn two_surface(v0: f64, d0: f64, alpha: f64) -> Result<Self> {
        if !(v0 > 0.0) || !(d0 >= 0.0) || !(alpha > 0.0) {
            return Err(Error::InvalidParameter(
                "two_surface requires v0 > 0, d0 >= 0, alpha > 0".into(),
            ));
        }
        Ok(PotentialModel::TwoSurface { v0, d0, alpha })
    }

    pub fn n_surfaces(&self) -> usize {
        match self {
            PotentialModel::TwoSurface { .. } => 2,
            _ => 1,
        }
    }

    /// V_ij(x). Indices are zero-based and must be < n_surfaces.
    pub fn value(&self, i: usize, j: usize, x: f64) -> f64 {
        debug_assert!(i < self.n_surfaces() && j < self.n_surfaces());
        match *self {
            PotentialModel::Free => 0.0,
            PotentialModel::Eckart { v0, alpha } => {
                let s = sech(alpha * x);
                v0 * s * s
            }
            PotentialModel::BarrierRamp {
                v0,
                alpha,
                beta,
                v_left,
                v_right,
            } => {
                let s = sech(alpha * x);
                v0 * s * s + 0.5 * (v_right - v_left) * ((beta * x).tanh() + 1.0) + v_left
            }
            PotentialModel::TwoSurface { v0, d0, alpha } => {
                let s = sech(alpha * x);
                let amp = if i == j { v0 } else { d0 };
                amp * s * s
            }
        }
    }

    /// Analytic dV_ij/dx.
    pub fn derivative(&self, i: usize, j: usize, x: f64) -> f64 {
        debug_assert!(i < self.n_surfaces() && j < self.n_surfaces());
        match *self {
            PotentialModel::Free => 0.0,
            PotentialModel::Eckart { v0, alpha } => {
                let s = sech(alpha * x);
                -2.0 * v0 * alpha * s * s * (alpha * x).tanh()
            }
            PotentialModel::BarrierRamp {
                v0,
                alpha,
                beta,
                v_left,
                v_right,
            } => {
                let s = sech(alpha * x);
                let sb = sech(beta * x);
                -2.0 * v0 * alpha * s * s * (alpha * x).tanh()
                    + 0.5 * (v_right - v_left) * beta * sb * sb
            }
            PotentialModel::TwoSurface { v0, d0, alpha } => {
                let s = sech(alpha * x);
                let amp = if i == j { v0 } else { d0 };
                -2.0 * amp * alpha * s * s * (alpha * x).tanh()
            }
        }
    }

    /// Asymptotic value V_ii(x -> -inf).
    pub fn asymptotic_left(&self, i: usize) -> f64 {
        debug_assert!(i < self.n_surfaces());
        match *self {
            PotentialModel::BarrierRamp { v_left, .. } => v_left,
            _ => 0.0,
        }
    }

    /// Asymptotic value V_ii(x -> +inf).
    pub fn asymptotic_right(&self, i: usize) -> f64 {
        debug_assert!(i < self.n_surfaces());
        match *self {
            PotentialModel::BarrierRamp { v_right, .. } => v_right,
            _ => 0.0,
        }
    }
}

/// Potential matrix sampled on a grid once per run; the propagator reads
/// these rows every step.
#[derive(Debug, Clone)]
pub struct SampledPotential {
    grid: Grid,
    n_surfaces: usize,
    values: Vec<Vec<f64>>,
    derivatives: Vec<Vec<f64>>,
    active: Vec<bool>,
}

impl SampledPotential {
    pub fn new(model: &PotentialModel, grid: &Grid) -> Self {
        let f = model.n_surfaces();
        let mut values = Vec::with_capacity(f * f);
        let mut derivatives = Vec::with_capacity(f * f);
        let mut active = Vec::with_capacity(f * f);
        for i in 0..f {
            for j in 0..f {
                let v: Vec<f64> = grid.positions().map(|x| model.value(i, j, x)).collect();
                let d: Vec<f64> = grid
                    .positions()
                    .map(|x| model.derivative(i, j, x))
                    .collect();
                let is_active =
                    v.iter().any(|&a| a != 0.0) || d.iter().any(|&a| a != 0.0);
                values.push(v);
                derivatives.push(d);
                active.push(is_active);
            }
        }
        SampledPotential {
            grid: *grid,
            n_surfaces: f,
            values,
            derivatives,
            active,
        }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn n_surfaces(&self) -> usize {
        self.n_surfaces
    }

    #[inline]
    pub fn value_row(&self, i: usize, j: usize) -> &[f64] {
        &self.values[i * self.n_surfaces + j]
    }

    #[inline]
    pub fn derivative_row(&self, i: usize, j: usize) -> &[f64] {
        &self.derivatives[i * self.n_surfaces + j]
    }

    /// False when V_ij and V'_ij are identically zero on this grid; the
    /// propagator skips such pairs so decoupled surfaces evolve through the
    /// exact same arithmetic as a single-surface run.
    #[inline]
    pub fn pair_active(&self, i: usize, j: usize) -> bool {
        self.active[i * self.n_surfaces + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eckart_peak_and_decay() {
        let m = PotentialModel::eckart(0.0024, 2.5).unwrap();
        assert_abs_diff_eq!(m.value(0, 0, 0.0), 0.0024, epsilon = 1e-18);
        assert!(m.value(0, 0, 35.0) < 1e-70);
        assert!(m.value(0, 0, -35.0) < 1e-70);
    }

    #[test]
    fn eckart_reference_value() {
        // sech(1)^2 = 0.41997434161402614...
        let m = PotentialModel::eckart(1.0, 1.0).unwrap();
        let sech1 = 2.0 / (1f64.exp() + (-1f64).exp());
        assert_abs_diff_eq!(m.value(0, 0, 1.0), sech1 * sech1, epsilon = 1e-15);
        assert_abs_diff_eq!(m.value(0, 0, 1.0), 0.41997434161402614, epsilon = 1e-14);
    }

    #[test]
    fn barrier_ramp_limits_and_peak() {
        let m = PotentialModel::barrier_ramp(0.0020, 2.5, 2.5, 0.0, 0.0008).unwrap();
        assert_abs_diff_eq!(m.value(0, 0, 0.0), 0.0024, epsilon = 1e-12);
        assert_abs_diff_eq!(m.value(0, 0, -35.0), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.value(0, 0, 35.0), 0.0008, epsilon = 1e-12);
        assert_eq!(m.asymptotic_left(0), 0.0);
        assert_eq!(m.asymptotic_right(0), 0.0008);
    }

    #[test]
    fn barrier_ramp_with_offset_hits_left_value() {
        let m = PotentialModel::barrier_ramp(0.001, 2.0, 2.0, 0.5, 0.7).unwrap();
        assert_abs_diff_eq!(m.value(0, 0, -35.0), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(m.value(0, 0, 35.0), 0.7, epsilon = 1e-12);
    }

    #[test]
    fn flat_barrier_ramp_reduces_to_eckart() {
        let ramp = PotentialModel::barrier_ramp(0.0024, 2.5, 1.7, 0.0, 0.0).unwrap();
        let eck = PotentialModel::eckart(0.0024, 2.5).unwrap();
        for k in 0..=200 {
            let x = -35.0 + 0.35 * k as f64;
            assert_abs_diff_eq!(ramp.value(0, 0, x), eck.value(0, 0, x), epsilon = 1e-18);
            assert_abs_diff_eq!(
                ramp.derivative(0, 0, x),
                eck.derivative(0, 0, x),
                epsilon = 1e-18
            );
        }
    }

    #[test]
    fn two_surface_matrix_is_symmetric_with_vanishing_coupling_tails() {
        let m = PotentialModel::two_surface(0.0024, 0.00072, 2.5).unwrap();
        assert_abs_diff_eq!(m.value(0, 1, 0.0), 0.00072, epsilon = 1e-18);
        for k in 0..=70 {
            let x = -35.0 + k as f64;
            assert_eq!(m.value(0, 1, x), m.value(1, 0, x));
            assert_eq!(m.value(0, 0, x), m.value(1, 1, x));
        }
        assert!(m.value(0, 1, 35.0) / 0.00072 < 1e-70);
        assert!(m.value(0, 1, -35.0) / 0.00072 < 1e-70);
    }

    #[test]
    fn analytic_derivative_matches_central_difference_at_order_two() {
        let models = [
            PotentialModel::eckart(0.0024, 2.5).unwrap(),
            PotentialModel::barrier_ramp(0.0020, 2.5, 2.5, 0.0, 0.0008).unwrap(),
            PotentialModel::two_surface(0.0024, 0.00072, 2.5).unwrap(),
        ];
        for m in &models {
            let f = m.n_surfaces();
            let mut errs = Vec::new();
            for &n in &[351usize, 701, 1401] {
                let g = Grid::new(-7.0, 7.0, n).unwrap();
                let dx = g.dx();
                let mut worst: f64 = 0.0;
                for i in 0..f {
                    for j in 0..f {
                        for k in 1..n - 1 {
                            let x = g.x(k);
                            let fd = (m.value(i, j, x + dx) - m.value(i, j, x - dx)) / (2.0 * dx);
                            worst = worst.max((fd - m.derivative(i, j, x)).abs());
                        }
                    }
                }
                errs.push(worst);
            }
            // convergence order from successive halvings must be >= 1.9
            for w in errs.windows(2) {
                let order = (w[0] / w[1]).log2();
                assert!(order >= 1.9, "order {order} too low ({errs:?})");
            }
        }
    }

    #[test]
    fn sech_guard_underflows_to_zero() {
        let m = PotentialModel::eckart(1.0, 1.0).unwrap();
        assert_eq!(m.value(0, 0, 400.0), 0.0);
        assert_eq!(m.derivative(0, 0, 400.0), 0.0);
    }

    #[test]
    fn sampled_potential_marks_inactive_pairs() {
        let g = Grid::new(-35.0, 35.0, 101).unwrap();
        let coupled = SampledPotential::new(
            &PotentialModel::two_surface(0.0024, 0.00072, 2.5).unwrap(),
            &g,
        );
        assert!(coupled.pair_active(0, 1));
        let decoupled = SampledPotential::new(
            &PotentialModel::two_surface(0.0024, 0.0, 2.5).unwrap(),
            &g,
        );
        assert!(decoupled.pair_active(0, 0));
        assert!(!decoupled.pair_active(0, 1));
        let free = SampledPotential::new(&PotentialModel::free(), &g);
        assert!(!free.pair_active(0, 0));
    }

    #[test]
    fn constructors_reject_bad_parameters() {
        assert!(PotentialModel::eckart(0.0, 1.0).is_err());
        assert!(PotentialModel::eckart(1.0, -1.0).is_err());
        assert!(PotentialModel::barrier_ramp(1.0, 0.0, 1.0, 0.0, 0.0).is_err());
        assert!(PotentialModel::two_surface(1.0, -0.1, 1.0).is_err());
    }
}
