use crate::error::{Error, Result};

/// Uniform 1D spatial mesh with Dirichlet edges.
///
/// Node `k` sits at `x_left + k * dx` with `dx = (x_right - x_left) / (n_points - 1)`.
/// All wavefunction components and their spatial integrals are treated as zero
/// at the two edge nodes by the derivative operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_left: f64,
    x_right: f64,
    n_points: usize,
    dx: f64,
}

/// The cumulative Simpson rule needs at least three interior points.
pub const MIN_POINTS: usize = 5;

impl Grid {
    pub fn new(x_left: f64, x_right: f64, n_points: usize) -> Result<Self> {
        if !x_left.is_finite() || !x_right.is_finite() {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if x_right <= x_left {
            return Err(Error::InvalidGrid(format!(
                "x_right ({x_right}) must exceed x_left ({x_left})"
            )));
        }
        if n_points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "n_points ({n_points}) must be at least {MIN_POINTS}"
            )));
        }
        let dx = (x_right - x_left) / (n_points - 1) as f64;
        Ok(Grid {
            x_left,
            x_right,
            n_points,
            dx,
        })
    }

    #[inline]
    pub fn x_left(&self) -> f64 {
        self.x_left
    }

    #[inline]
    pub fn x_right(&self) -> f64 {
        self.x_right
    }

    #[inline]
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Position of node `k`.
    #[inline]
    pub fn x(&self, k: usize) -> f64 {
        self.x_left + k as f64 * self.dx
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|k| self.x(k))
    }

    /// Index of the node nearest to `x` (ties round down towards the left).
    pub fn nearest_node(&self, x: f64) -> usize {
        let k = ((x - self.x_left) / self.dx).round();
        (k.max(0.0) as usize).min(self.n_points - 1)
    }
}
