//! Observables and verdicts: densities, fluxes, combined probability, the
//! three well-behavedness conditions, reflection/transmission, the density
//! rate residual, and the stage-transition (time-delay) detector.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{BipolarRhs, BipolarState};
use crate::field::ComplexField;
use crate::potential::SampledPotential;
use crate::splice::{probability_left_of, probability_right_of};

/// Amplitude-phase split psi = R exp(i S) with S unwrapped along the grid
/// wherever R exceeds `floor_rel` times its maximum; elsewhere S is NaN.
#[derive(Debug, Clone)]
pub struct AmplitudePhase {
    pub amplitude: Vec<f64>,
    pub action: Vec<f64>,
}

pub fn amplitude_phase(f: &ComplexField, floor_rel: f64) -> AmplitudePhase {
    let n = f.grid().n_points();
    let amplitude: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    let r_max = amplitude.iter().copied().fold(0.0, f64::max);
    let floor = floor_rel * r_max;
    let mut action = vec![f64::NAN; n];
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for k in 0..n {
        if amplitude[k] <= floor {
            prev = None;
            continue;
        }
        let raw = f.values()[k].arg();
        if let Some(p) = prev {
            // unwrap against the previous defined node
            let mut candidate = raw + offset;
            while candidate - p > std::f64::consts::PI {
                offset -= 2.0 * std::f64::consts::PI;
                candidate = raw + offset;
            }
            while candidate - p < -std::f64::consts::PI {
                offset += 2.0 * std::f64::consts::PI;
                candidate = raw + offset;
            }
            action[k] = candidate;
        } else {
            offset = 0.0;
            action[k] = raw;
        }
        prev = Some(action[k]);
    }
    AmplitudePhase { amplitude, action }
}

/// Per-surface densities rho_± = |psi_±|^2 and rho = |psi_+ + psi_-|^2.
#[derive(Debug, Clone)]
pub struct Densities {
    pub plus: Vec<Vec<f64>>,
    pub minus: Vec<Vec<f64>>,
    pub total: Vec<Vec<f64>>,
}

pub fn densities(state: &BipolarState) -> Densities {
    let f = state.n_surfaces();
    let mut out = Densities {
        plus: Vec::with_capacity(f),
        minus: Vec::with_capacity(f),
        total: Vec::with_capacity(f),
    };
    for i in 0..f {
        out.plus.push(state.plus(i).density());
        out.minus.push(state.minus(i).density());
        out.total.push(state.total(i).density());
    }
    out
}

/// Standard quantum flux j = (1/m) Im(psi* dpsi/dx) with a centered first
/// difference and Dirichlet ghost zeros at the edges.
pub fn component_flux(f: &ComplexField, mass: f64) -> Vec<f64> {
    let n = f.grid().n_points();
    let vals = f.values();
    let inv_2dx = 1.0 / (2.0 * f.grid().dx());
    let mut j = vec![0.0; n];
    for k in 0..n {
        let right = if k + 1 < n { vals[k + 1] } else { Complex64::ZERO };
        let left = if k > 0 { vals[k - 1] } else { Complex64::ZERO };
        let grad = (right - left) * inv_2dx;
        j[k] = (vals[k].conj() * grad).im / mass;
    }
    j
}

/// Integral of rho_+ + rho_- over all surfaces; not conserved mid-collision.
pub fn combined_probability(state: &BipolarState) -> f64 {
    state
        .component_norms_squared()
        .iter()
        .map(|(p, m)| p + m)
        .sum()
}

/// |d rho_±/dt - ( -j_±' ± V' Im[psi_±^* (Psi_+ - Psi_-)] )| per surface,
/// with d rho/dt = 2 Re(psi^* rhs). Vanishes with the discretization error.
pub fn density_rate_residual(
    state: &BipolarState,
    rhs: &BipolarRhs,
    potential: &SampledPotential,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    if state.n_surfaces() != potential.n_surfaces() || state.n_surfaces() != rhs.n_surfaces() {
        return Err(Error::ShapeMismatch {
            state_surfaces: state.n_surfaces(),
            potential_surfaces: potential.n_surfaces(),
        });
    }
    let grid = state.grid();
    let n = grid.n_points();
    let inv_2dx = 1.0 / (2.0 * grid.dx());
    let mut out = Vec::with_capacity(state.n_surfaces());
    for i in 0..state.n_surfaces() {
        let cap_diff: Vec<Complex64> = {
            let cp = state.plus(i).cumulative_integral();
            let cm = state.minus(i).cumulative_integral();
            cp.values()
                .iter()
                .zip(cm.values())
                .map(|(a, b)| a - b)
                .collect()
        };
        let vp = potential.derivative_row(i, i);
        let residual = |psi: &ComplexField, dpsi: &ComplexField, sign: f64| -> Vec<f64> {
            let j = component_flux(psi, state.mass());
            (0..n)
                .map(|k| {
                    let drho = 2.0 * (psi.values()[k].conj() * dpsi.values()[k]).re;
                    let jr = if k + 1 < n { j[k + 1] } else { 0.0 };
                    let jl = if k > 0 { j[k - 1] } else { 0.0 };
                    let jprime = (jr - jl) * inv_2dx;
                    let source = sign * vp[k] * (psi.values()[k].conj() * cap_diff[k]).im;
                    (drho - (-jprime + source)).abs()
                })
                .collect()
        };
        let plus = residual(state.plus(i), rhs.plus(i), 1.0);
        let minus = residual(state.minus(i), rhs.minus(i), -1.0);
        out.push((plus, minus));
    }
    Ok(out)
}

/// Thresholds for the three well-behavedness conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConditionThresholds {
    /// Condition 1: asymptotic-separation probability bound.
    pub theta1: f64,
    /// Condition 2: relative bound on the right-edge tail of |Psi_±|.
    pub theta2: f64,
    /// Condition 3: valley depth relative to the component density max.
    pub theta3_valley: f64,
    /// Condition 3: shoulder height relative to the component density max.
    pub theta3_shoulder: f64,
    /// Nodes searched on each side of a valley for shoulders (the envelope).
    pub theta3_window: usize,
    /// Components with squared norm below this are skipped by the detector.
    pub component_norm_floor: f64,
    /// Dividing point for the separation integrals.
    pub x_d: f64,
}

impl Default for ConditionThresholds {
    fn default() -> Self {
        ConditionThresholds {
            theta1: 1e-3,
            theta2: 1e-2,
            theta3_valley: 1e-4,
            theta3_shoulder: 1e-2,
            theta3_window: 32,
            component_norm_floor: 1e-6,
            x_d: 0.0,
        }
    }
}

/// One interior density valley flanked by shoulders on both sides.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeEvent {
    pub t: f64,
    pub x: f64,
    pub surface: usize,
    /// "+" or "-"
    pub sign: char,
    pub relative_depth: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Condition1Report {
    /// Total squared norm of the minus components at t0.
    pub t0_purity: f64,
    /// Worst separation integral at tf over surfaces and components.
    pub tf_separation: f64,
    pub per_surface_tf_minus_right: Vec<f64>,
    pub per_surface_tf_plus_left: Vec<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Condition2Report {
    /// Largest |Psi_±| on the rightmost tenth of the grid, per snapshot.
    pub max_tail_magnitude: Vec<f64>,
    /// max over snapshots/components of tail / max over snapshots/components.
    pub worst_tail_ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Condition3Report {
    pub node_events: Vec<NodeEvent>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition1: Condition1Report,
    pub condition2: Condition2Report,
    pub condition3: Condition3Report,
    pub thresholds: ConditionThresholds,
    pub all_pass: bool,
}

/// Node detector: an event is an interior node below
/// `theta3_valley * rho_max` with nodes above `theta3_shoulder * rho_max`
/// within `theta3_window` nodes on both sides.
pub fn node_events(
    density: &[f64],
    thresholds: &ConditionThresholds,
) -> Vec<(usize, f64)> {
    let n = density.len();
    let rho_max = density.iter().copied().fold(0.0, f64::max);
    if rho_max <= 0.0 {
        return Vec::new();
    }
    let valley = thresholds.theta3_valley * rho_max;
    let shoulder = thresholds.theta3_shoulder * rho_max;
    let w = thresholds.theta3_window;
    let mut events = Vec::new();
    for j in 1..n - 1 {
        if density[j] >= valley {
            continue;
        }
        let lo = j.saturating_sub(w);
        let hi = (j + w + 1).min(n);
        let left_ok = density[lo..j].iter().any(|&d| d > shoulder);
        let right_ok = density[j + 1..hi].iter().any(|&d| d > shoulder);
        if left_ok && right_ok {
            events.push((j, density[j] / rho_max));
        }
    }
    events
}

/// Evaluate the three conditions over a snapshot sequence (must contain the
/// initial and final states).
pub fn check_conditions(
    snapshots: &[BipolarState],
    thresholds: &ConditionThresholds,
) -> Result<ConditionReport> {
    if snapshots.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least the t0 and tf snapshots".into(),
        ));
    }
    let first = &snapshots[0];
    let last = snapshots.last().unwrap();
    let f = first.n_surfaces();
    let grid = first.grid();

    // Condition 1
    let t0_purity: f64 = first
        .component_norms_squared()
        .iter()
        .map(|(_, m)| m)
        .sum();
    let mut per_minus_right = Vec::with_capacity(f);
    let mut per_plus_left = Vec::with_capacity(f);
    let mut tf_separation: f64 = 0.0;
    for i in 0..f {
        let mr = probability_right_of(last.minus(i), thresholds.x_d);
        let pl = probability_left_of(last.plus(i), thresholds.x_d);
        tf_separation = tf_separation.max(mr).max(pl);
        per_minus_right.push(mr);
        per_plus_left.push(pl);
    }
    let c1_pass = t0_purity < thresholds.theta1 && tf_separation < thresholds.theta1;
    let condition1 = Condition1Report {
        t0_purity,
        tf_separation,
        per_surface_tf_minus_right: per_minus_right,
        per_surface_tf_plus_left: per_plus_left,
        pass: c1_pass,
    };

    // Condition 2: running integrals, rightmost 10% of the grid
    let tail_start = (grid.n_points() as f64 * 0.9) as usize;
    let mut max_tail_magnitude = Vec::with_capacity(snapshots.len());
    let mut tail_worst: f64 = 0.0;
    let mut global_worst: f64 = 0.0;
    for s in snapshots {
        let mut snap_tail: f64 = 0.0;
        for i in 0..f {
            for fld in [s.plus(i), s.minus(i)] {
                let cap = fld.cumulative_integral();
                let tail = cap.values()[tail_start..]
                    .iter()
                    .map(|v| v.norm())
                    .fold(0.0, f64::max);
                let all = cap.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
                snap_tail = snap_tail.max(tail);
                tail_worst = tail_worst.max(tail);
                global_worst = global_worst.max(all);
            }
        }
        max_tail_magnitude.push(snap_tail);
    }
    let worst_tail_ratio = if global_worst > 0.0 {
        tail_worst / global_worst
    } else {
        0.0
    };
    let condition2 = Condition2Report {
        max_tail_magnitude,
        worst_tail_ratio,
        pass: worst_tail_ratio < thresholds.theta2,
    };

    // Condition 3: node detector over every component of every snapshot
    let mut events = Vec::new();
    for s in snapshots {
        for i in 0..f {
            for (sign, fld) in [('+', s.plus(i)), ('-', s.minus(i))] {
                if fld.norm_squared() < thresholds.component_norm_floor {
                    continue;
                }
                for (j, depth) in node_events(&fld.density(), thresholds) {
                    events.push(NodeEvent {
                        t: s.t(),
                        x: grid.x(j),
                        surface: i,
                        sign,
                        relative_depth: depth,
                    });
                }
            }
        }
    }
    let condition3 = Condition3Report {
        pass: events.is_empty(),
        node_events: events,
    };

    let all_pass = condition1.pass && condition2.pass && condition3.pass;
    Ok(ConditionReport {
        condition1,
        condition2,
        condition3,
        thresholds: *thresholds,
        all_pass,
    })
}

/// Reflection and transmission probabilities per surface: the minus and plus
/// component norms of the final state (the decomposition itself separates the
/// branches).
pub fn reflection_transmission(state: &BipolarState) -> Vec<(f64, f64)> {
    state.component_norms_squared()
        .iter()
        .map(|&(p, m)| (m, p))
        .collect()
}

/// Parameters of the stage-transition detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StageParams {
    /// Minimum squared norm before the component counts as materialized.
    pub norm_floor: f64,
    /// Fraction of the final-window mean drift speed that must be exceeded.
    pub speed_fraction: f64,
    /// Fraction of the eligible speed samples forming the final window.
    pub final_window_fraction: f64,
}

impl Default for StageParams {
    fn default() -> Self {
        StageParams {
            norm_floor: 0.01,
            speed_fraction: 0.5,
            final_window_fraction: 0.25,
        }
    }
}

fn density_centroid(f: &ComplexField) -> Option<f64> {
    let grid = f.grid();
    let mut num = 0.0;
    let mut den = 0.0;
    for (k, v) in f.values().iter().enumerate() {
        let w = v.norm_sqr();
        num += grid.x(k) * w;
        den += w;
    }
    (den > 0.0).then(|| num / den)
}

/// Earliest snapshot time at which the minus-component centroid drift speed
/// exceeds `speed_fraction` of its final-window average, with the component
/// norm above the floor. None when the component never materializes.
pub fn stage_transition_time(
    snapshots: &[BipolarState],
    surface: usize,
    params: &StageParams,
) -> Option<f64> {
    let mut speeds: Vec<(f64, f64)> = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for s in snapshots {
        let fld = s.minus(surface);
        if fld.norm_squared() <= params.norm_floor {
            prev = None;
            continue;
        }
        let c = density_centroid(fld)?;
        if let Some((t_prev, c_prev)) = prev {
            let dt = s.t() - t_prev;
            if dt > 0.0 {
                speeds.push((s.t(), ((c - c_prev) / dt).abs()));
            }
        }
        prev = Some((s.t(), c));
    }
    if speeds.len() < 2 {
        return None;
    }
    let w = ((speeds.len() as f64 * params.final_window_fraction).ceil() as usize).max(2);
    let tail = &speeds[speeds.len() - w.min(speeds.len())..];
    let v_final: f64 = tail.iter().map(|(_, v)| v).sum::<f64>() / tail.len() as f64;
    if v_final <= 0.0 {
        return None;
    }
    speeds
        .iter()
        .find(|(_, v)| *v > params.speed_fraction * v_final)
        .map(|(t, _)| *t)
}

/// Earliest snapshot time (with the minus component materialized) at which
/// the plus-density peak has caught up with the minus-density peak.
pub fn peak_coincidence_time(
    snapshots: &[BipolarState],
    surface: usize,
    norm_floor: f64,
) -> Option<f64> {
    for s in snapshots {
        if s.minus(surface).norm_squared() <= norm_floor {
            continue;
        }
        let grid = s.grid();
        let peak_of = |f: &ComplexField| -> usize {
            f.values()
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
                .map(|(k, _)| k)
                .unwrap_or(0)
        };
        if grid.x(peak_of(s.plus(surface))) >= grid.x(peak_of(s.minus(surface))) {
            return Some(s.t());
        }
    }
    None
}

/// Largest second difference of a density relative to its local scale; flags
/// grid-scale discontinuities such as a splice seam.
pub fn discontinuity_metric(density: &[f64], window: usize, floor_rel: f64) -> f64 {
    let n = density.len();
    let rho_max = density.iter().copied().fold(0.0, f64::max);
    if rho_max <= 0.0 {
        return 0.0;
    }
    let floor = floor_rel * rho_max;
    let mut worst: f64 = 0.0;
    for j in 1..n - 1 {
        let d2 = (density[j + 1] - 2.0 * density[j] + density[j - 1]).abs();
        let lo = j.saturating_sub(window);
        let hi = (j + window + 1).min(n);
        let local = density[lo..hi].iter().copied().fold(floor, f64::max);
        worst = worst.max(d2 / local);
    }
    worst
}

/// Same metric evaluated only at the nodes adjacent to `x_d`.
pub fn discontinuity_metric_at(
    density: &[f64],
    grid: &crate::grid::Grid,
    x_d: f64,
    window: usize,
    floor_rel: f64,
) -> f64 {
    let n = density.len();
    let rho_max = density.iter().copied().fold(0.0, f64::max);
    if rho_max <= 0.0 {
        return 0.0;
    }
    let floor = floor_rel * rho_max;
    let boundary = grid.positions().take_while(|&x| x <= x_d).count();
    let mut worst: f64 = 0.0;
    for j in boundary.saturating_sub(2)..(boundary + 2).min(n - 1) {
        if j == 0 {
            continue;
        }
        let d2 = (density[j + 1] - 2.0 * density[j] + density[j - 1]).abs();
        let lo = j.saturating_sub(window);
        let hi = (j + window + 1).min(n);
        let local = density[lo..hi].iter().copied().fold(floor, f64::max);
        worst = worst.max(d2 / local);
    }
    worst
}

/// Machine-readable results of one run.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryReport {
    pub mode: String,
    pub n_surfaces: usize,
    /// Reflection probability per surface (minus-component norm at tf).
    pub reflection: Vec<f64>,
    /// Transmission probability per surface (plus-component norm at tf).
    pub transmission: Vec<f64>,
    pub rt_sum: f64,
    pub rt_sum_within_tolerance: bool,
    pub combined_probability_initial: f64,
    pub combined_probability_min: f64,
    pub combined_probability_min_time: f64,
    pub combined_probability_final: f64,
    pub total_norm_squared_initial: f64,
    pub total_norm_squared_final: f64,
    /// |sqrt(final) - sqrt(initial)| of the coherent total norm.
    pub norm_drift: f64,
    pub admissibility_probability: f64,
    pub p_min: f64,
    /// Conditions of the run (of the spliced decomposition in splice mode).
    pub conditions: ConditionReport,
    /// Constituent-run conditions in splice mode.
    pub conditions_left: Option<ConditionReport>,
    pub conditions_right: Option<ConditionReport>,
    pub stage_transition_time: Option<f64>,
    pub peak_coincidence_time: Option<f64>,
    pub discarded_probability: Option<f64>,
    pub psi_r_minus_initial_norm_squared: Option<f64>,
    /// Max-node disagreement between the spliced total and the constituents.
    pub spliced_total_max_disagreement: Option<f64>,
    pub oracle_max_abs_diff: Option<f64>,
    pub oracle_diff_per_snapshot: Option<Vec<f64>>,
    pub schedule: ScheduleEcho,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScheduleEcho {
    pub dt: f64,
    pub t_max: f64,
    pub steps: usize,
    pub snapshot_times: Vec<f64>,
}
