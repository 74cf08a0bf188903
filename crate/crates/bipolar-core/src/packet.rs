//! Initial wavepackets and their decompositions: Gaussian packets, the
//! low-momentum admissibility integral, and the asymptotic-value-dependent
//! right decomposition built in momentum space.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::evolve::BipolarState;
use crate::field::ComplexField;
use crate::grid::Grid;
use crate::spectrum::{inverse_spectrum, momentum_spectrum};

/// Relative amplitude allowed at the grid edges for a freshly built packet.
pub const EDGE_CLEARANCE_LIMIT: f64 = 1e-8;

/// Default bound on the low-momentum probability integral.
pub const DEFAULT_ADMISSIBILITY_TOLERANCE: f64 = 1e-6;

/// Gaussian wavepacket parameters (atomic units, hbar = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketSpec {
    /// Width parameter: |psi|^2 has variance 1/(4 gamma).
    pub gamma: f64,
    pub x0: f64,
    pub p0: f64,
    pub mass: f64,
    #[serde(default)]
    pub t0: f64,
}

impl PacketSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidParameter("gamma must be positive".into()));
        }
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(Error::InvalidParameter("mass must be positive".into()));
        }
        if !self.x0.is_finite() || !self.p0.is_finite() || !self.t0.is_finite() {
            return Err(Error::InvalidParameter(
                "packet parameters must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// psi0(x) = (2 gamma / pi)^(1/4) exp(-gamma (x - x0)^2) exp(i p0 x).
///
/// The analytic normalization already gives unit discrete norm on any grid
/// that resolves the packet; no renormalization is applied.
pub fn gaussian_packet(spec: &PacketSpec, grid: &Grid) -> Result<ComplexField> {
    spec.validate()?;
    let amp = (2.0 * spec.gamma / PI).powf(0.25);
    let f = ComplexField::from_fn(*grid, |x| {
        let envelope = amp * (-spec.gamma * (x - spec.x0) * (x - spec.x0)).exp();
        Complex64::from_polar(envelope, spec.p0 * x)
    });
    let peak = f.max_abs();
    let vals = f.values();
    let edge = vals[0].norm().max(vals[grid.n_points() - 1].norm());
    if edge >= EDGE_CLEARANCE_LIMIT * peak {
        return Err(Error::PacketOverlapsEdge {
            edge_fraction: edge / peak,
            limit: EDGE_CLEARANCE_LIMIT,
        });
    }
    Ok(f)
}

/// Minimum admissible left momentum for asymptotic values `v_left`, `v_right`.
pub fn p_min(v_left: f64, v_right: f64, mass: f64) -> f64 {
    if v_right > v_left {
        (2.0 * mass * (v_right - v_left)).sqrt()
    } else {
        0.0
    }
}

/// Probability carried by momentum components at or below `p_min`:
/// the spectral power integrated by trapezoid up to `p_min`, with linear
/// interpolation inside the cut bin, normalized by the total power.
pub fn negative_momentum_probability(f: &ComplexField, p_min: f64) -> f64 {
    let s = momentum_spectrum(f);
    let p = s.momenta();
    let g: Vec<f64> = s.amplitudes().iter().map(|a| a.norm_sqr()).collect();
    let n = p.len();

    let mut total = 0.0;
    for k in 0..n - 1 {
        total += 0.5 * (g[k] + g[k + 1]) * (p[k + 1] - p[k]);
    }
    if total == 0.0 {
        return 0.0;
    }
    if p_min <= p[0] {
        return 0.0;
    }
    if p_min >= p[n - 1] {
        return 1.0;
    }
    let mut acc = 0.0;
    let mut k = 0;
    while k + 1 < n && p[k + 1] <= p_min {
        acc += 0.5 * (g[k] + g[k + 1]) * (p[k + 1] - p[k]);
        k += 1;
    }
    // partial panel up to p_min
    let frac = (p_min - p[k]) / (p[k + 1] - p[k]);
    let g_cut = g[k] + (g[k + 1] - g[k]) * frac;
    acc += 0.5 * (g[k] + g_cut) * (p_min - p[k]);
    (acc / total).clamp(0.0, 1.0)
}

/// Output of [`right_decomposition`].
#[derive(Debug, Clone)]
pub struct RightDecomposition {
    pub plus: ComplexField,
    pub minus: ComplexField,
    /// Fraction of spectral power removed by the admissibility projection.
    pub discarded_probability: f64,
}

/// Decompose `f0` with respect to the right asymptotic potential value.
///
/// Every spectral component with left momentum `p > 0` and total energy
/// `E = v_left + p^2/2m` above `E_min = max(v_left, v_right)` is weighted by
/// `w± = (1 ± p/p_R)/2` with `p_R = sqrt(2m(E - v_right))`; all other
/// components are removed from both outputs, so `plus + minus` equals the
/// admissible projection of `f0` exactly.
///
/// Fails when the removed probability exceeds `100 * tolerance`.
pub fn right_decomposition(
    f0: &ComplexField,
    v_left: f64,
    v_right: f64,
    mass: f64,
    tolerance: f64,
) -> Result<RightDecomposition> {
    let spectrum = momentum_spectrum(f0);
    let e_min = v_left.max(v_right);

    let mut plus = spectrum.clone();
    let mut minus = spectrum.clone();
    let mut kept_power = 0.0;
    let mut total_power = 0.0;
    for (k, &p) in spectrum.momenta().iter().enumerate() {
        let a = spectrum.amplitudes()[k];
        total_power += a.norm_sqr();
        let energy = v_left + p * p / (2.0 * mass);
        if p > 0.0 && energy > e_min {
            let p_r = (2.0 * mass * (energy - v_right)).sqrt();
            let ratio = p / p_r;
            plus.amplitudes_mut()[k] = 0.5 * (1.0 + ratio) * a;
            minus.amplitudes_mut()[k] = 0.5 * (1.0 - ratio) * a;
            kept_power += a.norm_sqr();
        } else {
            plus.amplitudes_mut()[k] = Complex64::ZERO;
            minus.amplitudes_mut()[k] = Complex64::ZERO;
        }
    }
    let discarded = if total_power > 0.0 {
        1.0 - kept_power / total_power
    } else {
        0.0
    };
    let limit = 100.0 * tolerance;
    if discarded > limit {
        return Err(Error::InadmissiblePacket {
            discarded,
            limit,
        });
    }
    Ok(RightDecomposition {
        plus: inverse_spectrum(&plus),
        minus: inverse_spectrum(&minus),
        discarded_probability: discarded,
    })
}

/// Initial multisurface state: the packet is left-incident on
/// `incident_surface`; all other surfaces start empty.
///
/// With `v0_eff == v_incident_left` the incident pair is exactly
/// `(f0, 0)`; otherwise it comes from [`right_decomposition`] against
/// `v0_eff`.
pub fn multisurface_initial(
    f0: &ComplexField,
    n_surfaces: usize,
    incident_surface: usize,
    v_incident_left: f64,
    v0_eff: f64,
    mass: f64,
    tolerance: f64,
) -> Result<BipolarState> {
    if incident_surface >= n_surfaces {
        return Err(Error::InvalidParameter(format!(
            "incident surface {incident_surface} out of range for {n_surfaces} surfaces"
        )));
    }
    let grid = f0.grid();
    let (plus, minus) = if v0_eff == v_incident_left {
        (f0.clone(), ComplexField::zeros(grid))
    } else {
        let d = right_decomposition(f0, v_incident_left, v0_eff, mass, tolerance)?;
        (d.plus, d.minus)
    };
    let mut components = Vec::with_capacity(n_surfaces);
    for i in 0..n_surfaces {
        if i == incident_surface {
            components.push((plus.clone(), minus.clone()));
        } else {
            components.push((ComplexField::zeros(grid), ComplexField::zeros(grid)));
        }
    }
    BipolarState::new(components, 0.0, mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn standard_grid() -> Grid {
        Grid::new(-35.0, 35.0, 876).unwrap()
    }

    fn proton_spec() -> PacketSpec {
        PacketSpec {
            gamma: 0.35,
            x0: -7.0,
            p0: (2.0f64 * 2000.0 * 0.0027).sqrt(),
            mass: 2000.0,
            t0: 0.0,
        }
    }

    #[test]
    fn proton_packet_is_normalized() {
        let f = gaussian_packet(&proton_spec(), &standard_grid()).unwrap();
        assert_abs_diff_eq!(f.norm_squared(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn density_centroid_sits_at_x0() {
        let grid = standard_grid();
        let f = gaussian_packet(&proton_spec(), &grid).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for (k, v) in f.values().iter().enumerate() {
            let w = v.norm_sqr();
            num += grid.x(k) * w;
            den += w;
        }
        assert_abs_diff_eq!(num / den, -7.0, epsilon = 1e-9);
    }

    #[test]
    fn modulus_does_not_depend_on_p0() {
        let grid = standard_grid();
        let mut a = proton_spec();
        let mut b = proton_spec();
        a.p0 = 0.0;
        b.p0 = 4.0;
        let fa = gaussian_packet(&a, &grid).unwrap();
        let fb = gaussian_packet(&b, &grid).unwrap();
        for (x, y) in fa.values().iter().zip(fb.values()) {
            assert_abs_diff_eq!(x.norm(), y.norm(), epsilon = 1e-14);
        }
    }

    #[test]
    fn rejects_packet_on_grid_edge() {
        let mut spec = proton_spec();
        spec.x0 = -34.0;
        match gaussian_packet(&spec, &standard_grid()) {
            Err(Error::PacketOverlapsEdge { .. }) => {}
            other => panic!("expected edge rejection, got {other:?}"),
        }
    }

    #[test]
    fn proton_packet_is_admissible_below_1e6() {
        let f = gaussian_packet(&proton_spec(), &standard_grid()).unwrap();
        let prob = negative_momentum_probability(&f, 0.0);
        assert!(prob < 1e-6, "admissibility integral {prob}");
        // independent value: gaussian tail 0.5*erfc(p0/sqrt(2 gamma)) ~ 1.47e-8
        assert!((prob - 1.47e-8).abs() < 0.3e-8, "{prob}");
    }

    #[test]
    fn real_packet_has_half_negative_momentum() {
        let mut spec = proton_spec();
        spec.p0 = 0.0;
        let f = gaussian_packet(&spec, &standard_grid()).unwrap();
        assert_abs_diff_eq!(negative_momentum_probability(&f, 0.0), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn ramp_packet_subthreshold_probability_matches_gaussian_tail() {
        // gamma=.35, p0=4 against p_min = sqrt(2*2000*0.0008); the analytic
        // spectrum tail is 0.5*erfc((p0-p_min)/sqrt(2 gamma)) = 9.292e-5.
        let mut spec = proton_spec();
        spec.p0 = 4.0;
        let f = gaussian_packet(&spec, &standard_grid()).unwrap();
        let pm = p_min(0.0, 0.0008, 2000.0);
        assert_abs_diff_eq!(pm, 3.2f64.sqrt(), epsilon = 1e-15);
        let prob = negative_momentum_probability(&f, pm);
        let analytic = 9.292280069144788e-5;
        assert!(
            (prob - analytic).abs() / analytic < 0.05,
            "discrete {prob} vs analytic tail {analytic}"
        );
        // stays below the hard rejection gate used by right_decomposition
        assert!(prob < 1e-4);
    }

    #[test]
    fn p_min_is_zero_for_downhill_ramp() {
        assert_eq!(p_min(0.2, 0.1, 2000.0), 0.0);
        assert_eq!(p_min(0.0, 0.0, 2000.0), 0.0);
    }

    #[test]
    fn right_decomposition_with_equal_asymptotes_is_projection() {
        let grid = standard_grid();
        let f = gaussian_packet(&proton_spec(), &grid).unwrap();
        let d = right_decomposition(&f, 0.0, 0.0, 2000.0, 1e-6).unwrap();
        assert!(d.minus.norm_squared() < 1e-25);
        // plus equals f0 up to the (tiny) inadmissible content
        let worst = d
            .plus
            .values()
            .iter()
            .zip(f.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-4, "projection changed the field by {worst}");
        assert!(d.discarded_probability < 1e-6);
    }

    #[test]
    fn right_decomposition_outputs_sum_to_projection() {
        let grid = standard_grid();
        let mut spec = proton_spec();
        spec.p0 = 4.0;
        let f = gaussian_packet(&spec, &grid).unwrap();
        let d = right_decomposition(&f, 0.0, 0.0008, 2000.0, 1e-6).unwrap();
        // the projection is obtained by running the decomposition against a
        // flat ramp of the same E_min cut; here just check sum vs re-projected f0
        let sum = d.plus.add(&d.minus).unwrap();
        let again = right_decomposition(&sum, 0.0, 0.0008, 2000.0, 1e-6).unwrap();
        let rebuilt = again.plus.add(&again.minus).unwrap();
        let worst = sum
            .values()
            .iter()
            .zip(rebuilt.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-12, "projection not idempotent: {worst}");
    }

    #[test]
    fn right_decomposition_rejects_slow_packet() {
        let grid = standard_grid();
        let mut spec = proton_spec();
        spec.p0 = 1.0; // far below p_min = 1.789
        let f = gaussian_packet(&spec, &grid).unwrap();
        match right_decomposition(&f, 0.0, 0.0008, 2000.0, 1e-6) {
            Err(Error::InadmissiblePacket { .. }) => {}
            other => panic!("expected inadmissible packet, got {other:?}"),
        }
    }

    #[test]
    fn multisurface_initial_reduces_to_pure_plus_for_matching_v0() {
        let grid = standard_grid();
        let f = gaussian_packet(&proton_spec(), &grid).unwrap();
        let state = multisurface_initial(&f, 2, 0, 0.0, 0.0, 2000.0, 1e-6).unwrap();
        assert_eq!(state.plus(0).values(), f.values());
        assert!(state.minus(0).norm_squared() == 0.0);
        assert!(state.plus(1).norm_squared() == 0.0);
        assert!(state.minus(1).norm_squared() == 0.0);
        let total: f64 = state
            .component_norms_squared()
            .iter()
            .map(|(p, m)| p + m)
            .sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
    }
}
