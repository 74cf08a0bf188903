//! Workflow execution: build the initial state for the configured mode, run
//! the propagation(s) and the optional oracle, assemble the summary, and
//! evaluate result assertions.

use serde::Serialize;

use crate::config::{AssertOutcome, AssertSpec, ModeConfig, RunConfig};
use crate::diagnostics::{
    check_conditions, peak_coincidence_time, reflection_transmission, stage_transition_time,
    ConditionReport, ScheduleEcho, SummaryReport,
};
use crate::error::Result;
use crate::evolve::{propagate, BipolarState, PropagateOptions, StepDiagnostics};
use crate::field::ComplexField;
use crate::grid::Grid;
use crate::oracle::{max_abs_difference, unipolar_propagate, OracleOptions};
use crate::packet::{
    gaussian_packet, multisurface_initial, negative_momentum_probability, p_min,
};
use crate::splice::{propagate_spliced, total_disagreement};

/// Everything a run produces, ready for serialization.
#[derive(Debug)]
pub struct RunArtifacts {
    pub config: RunConfig,
    pub grid: Grid,
    pub summary: SummaryReport,
    /// The run's decomposition snapshots (the spliced one in splice mode).
    pub snapshots: Vec<BipolarState>,
    pub left_snapshots: Option<Vec<BipolarState>>,
    pub right_snapshots: Option<Vec<BipolarState>>,
    pub realized_times: Vec<f64>,
    pub diagnostics: StepDiagnostics,
    pub oracle_snapshots: Option<Vec<Vec<ComplexField>>>,
}

fn mode_name(mode: &ModeConfig) -> &'static str {
    match mode {
        ModeConfig::Single => "single",
        ModeConfig::Splice { .. } => "splice",
        ModeConfig::Multisurface { .. } => "multisurface",
    }
}

fn mode_p_min(config: &RunConfig) -> f64 {
    let pot = &config.potential;
    match config.mode {
        ModeConfig::Multisurface { v0_eff } => {
            p_min(pot.asymptotic_left(0), v0_eff, config.packet.mass)
        }
        _ => p_min(
            pot.asymptotic_left(0),
            pot.asymptotic_right(0),
            config.packet.mass,
        ),
    }
}

/// Execute the configured workflow.
pub fn execute(config: &RunConfig) -> Result<RunArtifacts> {
    config.validate()?;
    let grid = config.grid.build()?;
    let f0 = gaussian_packet(&config.packet, &grid)?;
    let schedule = config.time.schedule();

    let mut opts = PropagateOptions::new(config.time.dt, config.time.t_max, schedule);
    opts.stepper = config.stepper;
    opts.diagnostics_stride = config.diagnostics_stride;

    let admissibility = negative_momentum_probability(&f0, mode_p_min(config));

    let mut left_snapshots = None;
    let mut right_snapshots = None;
    let mut discarded_probability = None;
    let mut psi_r_minus_norm = None;
    let mut spliced_disagreement = None;
    let mut conditions_left = None;
    let mut conditions_right = None;

    let (snapshots, realized_times, diagnostics) = match config.mode {
        ModeConfig::Single => {
            let state = BipolarState::single_surface(
                f0.clone(),
                ComplexField::zeros(grid),
                config.packet.t0,
                config.packet.mass,
            )?;
            let out = propagate(&state, &config.potential, &opts)?;
            (out.snapshots, out.realized_times, out.diagnostics)
        }
        ModeConfig::Multisurface { v0_eff } => {
            let state = multisurface_initial(
                &f0,
                config.potential.n_surfaces(),
                0,
                config.potential.asymptotic_left(0),
                v0_eff,
                config.packet.mass,
                config.admissibility_tolerance,
            )?;
            let out = propagate(&state, &config.potential, &opts)?;
            (out.snapshots, out.realized_times, out.diagnostics)
        }
        ModeConfig::Splice { x_d } => {
            let run = propagate_spliced(
                &f0,
                &config.potential,
                config.packet.mass,
                x_d,
                &opts,
                config.admissibility_tolerance,
            )?;
            discarded_probability = Some(run.discarded_probability);
            psi_r_minus_norm = Some(run.psi_r_minus_initial_norm_squared);
            let mut worst: f64 = 0.0;
            for (idx, spliced) in run.spliced_snapshots.iter().enumerate() {
                worst = worst
                    .max(total_disagreement(spliced, &run.left_snapshots[idx]))
                    .max(total_disagreement(spliced, &run.right_snapshots[idx]));
            }
            spliced_disagreement = Some(worst);
            conditions_left = Some(check_conditions(&run.left_snapshots, &config.thresholds)?);
            conditions_right = Some(check_conditions(&run.right_snapshots, &config.thresholds)?);
            left_snapshots = Some(run.left_snapshots);
            right_snapshots = Some(run.right_snapshots);
            (run.spliced_snapshots, run.realized_times, run.diagnostics)
        }
    };

    // oracle comparison on the total wavefunction
    let mut oracle_snapshots = None;
    let mut oracle_diffs = None;
    if config.oracle.enabled {
        let initial = &snapshots[0];
        let totals: Vec<ComplexField> = (0..initial.n_surfaces())
            .map(|i| initial.total(i))
            .collect();
        let oracle_opts = OracleOptions::new(
            config.time.dt / config.oracle.dt_divisor as f64,
            config.time.t_max,
            realized_times.clone(),
        );
        let snaps = unipolar_propagate(
            &totals,
            &config.potential,
            config.packet.mass,
            &oracle_opts,
        )?;
        oracle_diffs = Some(max_abs_difference(&snapshots, &snaps));
        oracle_snapshots = Some(snaps);
    }

    let conditions = check_conditions(&snapshots, &config.thresholds)?;
    let final_state = snapshots.last().expect("at least one snapshot");
    let rt = reflection_transmission(final_state);
    let reflection: Vec<f64> = rt.iter().map(|&(r, _)| r).collect();
    let transmission: Vec<f64> = rt.iter().map(|&(_, t)| t).collect();
    let rt_sum: f64 = reflection.iter().sum::<f64>() + transmission.iter().sum::<f64>();

    let samples = &diagnostics.samples;
    let combined_initial = samples.first().map(|s| s.combined_probability).unwrap_or(f64::NAN);
    let combined_final = samples.last().map(|s| s.combined_probability).unwrap_or(f64::NAN);
    let (combined_min, combined_min_time) = samples
        .iter()
        .map(|s| (s.combined_probability, s.t))
        .fold((f64::INFINITY, 0.0), |acc, (v, t)| {
            if v < acc.0 {
                (v, t)
            } else {
                acc
            }
        });
    let total_sq_initial = samples.first().map(|s| s.total_norm_squared).unwrap_or(f64::NAN);
    let total_sq_final = samples.last().map(|s| s.total_norm_squared).unwrap_or(f64::NAN);
    let norm_drift = (total_sq_final.sqrt() - total_sq_initial.sqrt()).abs();

    let stage = stage_transition_time(&snapshots, 0, &config.stage);
    let peak = peak_coincidence_time(&snapshots, 0, config.stage.norm_floor);

    let n_steps = (config.time.t_max / config.time.dt).round() as usize;
    let summary = SummaryReport {
        mode: mode_name(&config.mode).to_string(),
        n_surfaces: config.potential.n_surfaces(),
        reflection,
        transmission,
        rt_sum,
        rt_sum_within_tolerance: (rt_sum - 1.0).abs() <= config.rt_tolerance,
        combined_probability_initial: combined_initial,
        combined_probability_min: combined_min,
        combined_probability_min_time: combined_min_time,
        combined_probability_final: combined_final,
        total_norm_squared_initial: total_sq_initial,
        total_norm_squared_final: total_sq_final,
        norm_drift,
        admissibility_probability: admissibility,
        p_min: mode_p_min(config),
        conditions,
        conditions_left,
        conditions_right,
        stage_transition_time: stage,
        peak_coincidence_time: peak,
        discarded_probability,
        psi_r_minus_initial_norm_squared: psi_r_minus_norm,
        spliced_total_max_disagreement: spliced_disagreement,
        oracle_max_abs_diff: oracle_diffs
            .as_ref()
            .map(|d| d.iter().copied().fold(0.0, f64::max)),
        oracle_diff_per_snapshot: oracle_diffs,
        schedule: ScheduleEcho {
            dt: config.time.dt,
            t_max: config.time.t_max,
            steps: n_steps,
            snapshot_times: realized_times.clone(),
        },
    };

    Ok(RunArtifacts {
        config: config.clone(),
        grid,
        summary,
        snapshots,
        left_snapshots,
        right_snapshots,
        realized_times,
        diagnostics,
        oracle_snapshots,
    })
}

fn condition_pass(
    which: u8,
    report: &ConditionReport,
) -> bool {
    match which {
        1 => report.condition1.pass,
        2 => report.condition2.pass,
        _ => report.condition3.pass,
    }
}

/// Evaluate the config's assertion list against finished artifacts.
pub fn evaluate_asserts(artifacts: &RunArtifacts) -> Vec<AssertOutcome> {
    let s = &artifacts.summary;
    let mut out = Vec::new();
    let mut push = |name: &str, pass: bool, detail: String| {
        out.push(AssertOutcome {
            name: name.to_string(),
            pass,
            detail,
        });
    };
    for spec in &artifacts.config.asserts {
        match spec {
            AssertSpec::CombinedMin { min, max } => push(
                "combined-min",
                (*min..=*max).contains(&s.combined_probability_min),
                format!(
                    "combined probability minimum {:.6} in [{min}, {max}]",
                    s.combined_probability_min
                ),
            ),
            AssertSpec::CombinedFinal { min, max } => push(
                "combined-final",
                (*min..=*max).contains(&s.combined_probability_final),
                format!(
                    "final combined probability {:.6} in [{min}, {max}]",
                    s.combined_probability_final
                ),
            ),
            AssertSpec::RtSum { min, max } => push(
                "rt-sum",
                (*min..=*max).contains(&s.rt_sum),
                format!("R + T = {:.6} in [{min}, {max}]", s.rt_sum),
            ),
            AssertSpec::NormFinal { min, max } => {
                let norm = s.total_norm_squared_final.sqrt();
                push(
                    "norm-final",
                    (*min..=*max).contains(&norm),
                    format!("final total norm {norm:.6} in [{min}, {max}]"),
                )
            }
            AssertSpec::Condition1Pass
            | AssertSpec::Condition2Pass
            | AssertSpec::Condition3Pass => {
                let which = match spec {
                    AssertSpec::Condition1Pass => 1,
                    AssertSpec::Condition2Pass => 2,
                    _ => 3,
                };
                let mut pass = condition_pass(which, &s.conditions);
                let mut scope = "run".to_string();
                if let (Some(l), Some(r)) = (&s.conditions_left, &s.conditions_right) {
                    pass = condition_pass(which, l) && condition_pass(which, r);
                    scope = "both constituent runs".to_string();
                }
                push(
                    &format!("condition-{which}"),
                    pass,
                    format!("condition {which} on {scope}"),
                )
            }
            AssertSpec::BranchProbabilitiesAbove { min } => {
                let worst = s
                    .reflection
                    .iter()
                    .chain(s.transmission.iter())
                    .copied()
                    .fold(f64::INFINITY, f64::min);
                push(
                    "branch-probabilities",
                    worst > *min,
                    format!("smallest branch probability {worst:.4} > {min}"),
                )
            }
            AssertSpec::MinusNormZero => {
                let worst = artifacts
                    .snapshots
                    .iter()
                    .flat_map(|st| st.component_norms_squared())
                    .map(|(_, m)| m)
                    .fold(0.0, f64::max);
                push(
                    "minus-norm-zero",
                    worst == 0.0,
                    format!("max ||psi_-||^2 over snapshots = {worst:e}"),
                )
            }
            AssertSpec::StageAfterPeak => {
                let pass = match (s.stage_transition_time, s.peak_coincidence_time) {
                    (Some(st), Some(pk)) => st > pk,
                    _ => false,
                };
                push(
                    "stage-after-peak",
                    pass,
                    format!(
                        "stage transition {:?} after peak coincidence {:?}",
                        s.stage_transition_time, s.peak_coincidence_time
                    ),
                )
            }
            AssertSpec::SplicedTotalAgrees { limit } => {
                let worst = s.spliced_total_max_disagreement.unwrap_or(f64::NAN);
                push(
                    "spliced-total",
                    worst <= *limit,
                    format!("spliced/constituent total disagreement {worst:.3e} <= {limit:e}"),
                )
            }
            AssertSpec::PsiRMinusNonzero => {
                let v = s.psi_r_minus_initial_norm_squared.unwrap_or(0.0);
                push(
                    "psi-r-minus-nonzero",
                    v > 0.0,
                    format!("||psi_R-(0)||^2 = {v:.6e} > 0"),
                )
            }
            AssertSpec::OracleMaxDiffBelow { limit } => {
                let v = s.oracle_max_abs_diff.unwrap_or(f64::NAN);
                push(
                    "oracle-max-diff",
                    v <= *limit,
                    format!("max |psi_+ + psi_- - psi_oracle| = {v:.3e} <= {limit:e}"),
                )
            }
            AssertSpec::MinusProbabilityRightOfDividerAbove { min } => {
                let v = s
                    .conditions
                    .condition1
                    .per_surface_tf_minus_right
                    .first()
                    .copied()
                    .unwrap_or(0.0);
                push(
                    "minus-beyond-divider",
                    v > *min,
                    format!("final minus probability right of divider {v:.3e} > {min:e}"),
                )
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Severity {
    Info,
    Warning,
}

/// One pre-run check result from [`validate`].
#[derive(Debug, Clone, Serialize)]
pub struct Finding {
    pub severity: Severity,
    pub code: String,
    pub message: String,
    pub value: f64,
}

/// Pre-flight checks: admissibility probability, packet edge clearance, and
/// an explicit-stepping stability heuristic. Never mutates anything.
pub fn validate(config: &RunConfig) -> Result<Vec<Finding>> {
    config.validate()?;
    let grid = config.grid.build()?;
    let mut findings = Vec::new();

    // packet edge clearance, computed directly so a bad packet still reports
    let amp = (2.0 * config.packet.gamma / std::f64::consts::PI).powf(0.25);
    let envelope = |x: f64| amp * (-config.packet.gamma * (x - config.packet.x0).powi(2)).exp();
    let edge = envelope(grid.x_left()).max(envelope(grid.x_right()));
    let clearance = edge / amp;
    if clearance >= crate::packet::EDGE_CLEARANCE_LIMIT {
        findings.push(Finding {
            severity: Severity::Warning,
            code: "edge-clearance".into(),
            message: format!(
                "packet edge amplitude is {clearance:.2e} of peak (limit {:.0e})",
                crate::packet::EDGE_CLEARANCE_LIMIT
            ),
            value: clearance,
        });
        return Ok(findings); // the admissibility integral is meaningless here
    }

    let f0 = gaussian_packet(&config.packet, &grid)?;
    let admissibility = negative_momentum_probability(&f0, mode_p_min(config));
    if admissibility > config.admissibility_tolerance {
        findings.push(Finding {
            severity: Severity::Warning,
            code: "admissibility".into(),
            message: format!(
                "low-momentum probability {admissibility:.3e} exceeds tolerance {:.0e}",
                config.admissibility_tolerance
            ),
            value: admissibility,
        });
    }

    // forward-Euler resolution heuristic: dt * lambda_max with the kinetic
    // top eigenvalue 2/(m dx^2) plus the potential scale
    let mut v_max: f64 = 0.0;
    for i in 0..config.potential.n_surfaces() {
        for x in grid.positions() {
            v_max = v_max.max(config.potential.value(i, i, x).abs());
        }
    }
    let lambda = 2.0 / (config.packet.mass * grid.dx() * grid.dx()) + v_max;
    let dt_lambda = config.time.dt * lambda;
    if dt_lambda >= 1.0 {
        findings.push(Finding {
            severity: Severity::Warning,
            code: "stability".into(),
            message: format!(
                "dt * lambda_max = {dt_lambda:.2} >= 1; explicit stepping will not resolve the fastest mode"
            ),
            value: dt_lambda,
        });
    }
    Ok(findings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::presets::preset;

    #[test]
    fn validate_proton_preset_reports_zero_findings() {
        let cfg = preset("eckart-proton").unwrap();
        let findings = validate(&cfg).unwrap();
        assert!(findings.is_empty(), "{findings:?}");
    }

    #[test]
    fn validate_flags_resting_packet() {
        let mut cfg = preset("eckart-proton").unwrap();
        cfg.packet.p0 = 0.0;
        let findings = validate(&cfg).unwrap();
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0].code, "admissibility");
        assert!((findings[0].value - 0.5).abs() < 1e-6);
    }

    #[test]
    fn validate_flags_packet_on_edge() {
        let mut cfg = preset("eckart-proton").unwrap();
        cfg.packet.x0 = -34.5;
        let findings = validate(&cfg).unwrap();
        assert!(findings.iter().any(|f| f.code == "edge-clearance"));
    }

    #[test]
    fn short_single_run_produces_consistent_summary() {
        let mut cfg = preset("eckart-proton").unwrap();
        cfg.time.t_max = 50.0;
        cfg.time.snapshot_count = 3;
        cfg.oracle.enabled = true;
        cfg.oracle.dt_divisor = 5;
        let artifacts = execute(&cfg).unwrap();
        let s = &artifacts.summary;
        assert_eq!(artifacts.snapshots.len(), 3);
        assert!((s.combined_probability_initial - 1.0).abs() < 1e-9);
        assert!((s.rt_sum - 1.0).abs() < 1e-3);
        assert!(s.oracle_max_abs_diff.unwrap() < 1e-3);
        assert_eq!(s.schedule.steps, 500);
    }

    #[test]
    fn instability_surfaces_as_unstable_error() {
        let mut cfg = preset("eckart-proton").unwrap();
        cfg.packet.mass = 0.01;
        cfg.packet.gamma = 1.0;
        cfg.time.dt = 1.0;
        cfg.time.t_max = 2000.0;
        cfg.oracle.enabled = false;
        match execute(&cfg) {
            Err(Error::Unstable { .. }) => {}
            other => panic!("expected instability, got {other:?}"),
        }
    }
}
