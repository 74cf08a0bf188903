//! Discrete momentum-space transform of a [`ComplexField`].
//!
//! Convention (hbar = 1): `amp(p_j) = dx / sqrt(2 pi) * sum_k f(x_k) exp(-i p_j x_k)`
//! with momenta `p_j = 2 pi j / (n dx)` for integer `j` in
//! `[-floor(n/2), ceil(n/2))`, stored ascending. Under this unitary convention
//! `sum_j |amp_j|^2 dp` equals the trapezoid integral of `|f|^2 dx` whenever the
//! field vanishes at the edges, and the inverse transform is exact.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use crate::field::ComplexField;
use crate::grid::Grid;

pub const CONVENTION: &str =
    "amp(p) = dx/sqrt(2*pi) * sum_k f(x_k) exp(-i*p*x_k); p_j = 2*pi*j/(n*dx), ascending";

/// Relative edge amplitude above which a field no longer satisfies the
/// localization precondition of the transform.
pub const EDGE_AMPLITUDE_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct MomentumSpectrum {
    momenta: Vec<f64>,
    amplitudes: Vec<Complex64>,
    dp: f64,
    grid: Grid,
    edge_ok: bool,
}

impl MomentumSpectrum {
    #[inline]
    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    #[inline]
    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    #[inline]
    pub fn dp(&self) -> f64 {
        self.dp
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// False when the source field had non-negligible edge amplitude; the
    /// transform is still returned but periodization artifacts are possible.
    #[inline]
    pub fn edge_ok(&self) -> bool {
        self.edge_ok
    }

    #[inline]
    pub fn convention(&self) -> &'static str {
        CONVENTION
    }

    /// `sum |amp|^2 dp`.
    pub fn total_power(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.dp
    }

    /// Power-weighted mean momentum.
    pub fn centroid(&self) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (p, a) in self.momenta.iter().zip(&self.amplitudes) {
            let w = a.norm_sqr();
            num += p * w;
            den += w;
        }
        num / den
    }
}

/// Signed frequency index of FFT bin `k` for length `n`.
#[inline]
fn freq_index(k: usize, n: usize) -> i64 {
    let half = (n + 1) / 2; // bins [0, half) are non-negative frequencies
    if k < half {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

pub fn momentum_spectrum(f: &ComplexField) -> MomentumSpectrum {
    let grid = f.grid();
    let n = grid.n_points();
    let dx = grid.dx();
    let dp = 2.0 * PI / (n as f64 * dx);

    let max_abs = f.max_abs();
    let vals = f.values();
    let edge = vals[0]
        .norm()
        .max(vals[1].norm())
        .max(vals[n - 1].norm())
        .max(vals[n - 2].norm());
    let edge_ok = max_abs == 0.0 || edge < EDGE_AMPLITUDE_LIMIT * max_abs;

    let mut buf = vals.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    // reorder ascending in momentum and attach the x_left phase and scale
    let scale = dx / (2.0 * PI).sqrt();
    let neg = n / 2; // number of negative-frequency bins
    let mut momenta = Vec::with_capacity(n);
    let mut amplitudes = Vec::with_capacity(n);
    for idx in 0..n {
        // ascending order: start from the most negative frequency bin
        let k = (idx + n - neg) % n;
        let p = freq_index(k, n) as f64 * dp;
        let phase = Complex64::from_polar(scale, -p * grid.x_left());
        momenta.push(p);
        amplitudes.push(phase * buf[k]);
    }

    MomentumSpectrum {
        momenta,
        amplitudes,
        dp,
        grid,
        edge_ok,
    }
}

/// Inverse of [`momentum_spectrum`]; reconstructs the field on the original grid.
pub fn inverse_spectrum(s: &MomentumSpectrum) -> ComplexField {
    let grid = s.grid;
    let n = grid.n_points();
    let dx = grid.dx();
    let neg = n / 2;
    let scale = (2.0 * PI).sqrt() / dx;

    let mut buf = vec![Complex64::ZERO; n];
    for idx in 0..n {
        let k = (idx + n - neg) % n;
        let p = s.momenta[idx];
        let phase = Complex64::from_polar(scale, p * grid.x_left());
        buf[k] = phase * s.amplitudes[idx];
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let inv_n = 1.0 / n as f64;
    for v in &mut buf {
        *v *= inv_n;
    }
    ComplexField::from_values(grid, buf).expect("length preserved")
}
