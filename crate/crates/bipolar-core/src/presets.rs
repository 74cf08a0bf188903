//! Built-in benchmark configurations. Every preset expands to a plain
//! [`RunConfig`] that reruns identically when serialized and loaded back.

use crate::config::{
    AssertSpec, GridConfig, ModeConfig, OracleConfig, RunConfig, TimeConfig,
};
use crate::diagnostics::{ConditionThresholds, StageParams};
use crate::evolve::TimeStepper;
use crate::packet::PacketSpec;
use crate::potential::PotentialModel;

pub const PRESETS: &[(&str, &str)] = &[
    (
        "eckart-proton",
        "proton-mass scattering off a symmetric Eckart barrier (m=2000, E=1.125 V0)",
    ),
    (
        "eckart-electron",
        "electron-mass Eckart barrier at the stated benchmark step size (documented-unstable Euler regime)",
    ),
    (
        "barrier-ramp-spliced",
        "asymmetric barrier ramp solved with both decompositions and glued at x_d = 0",
    ),
    (
        "barrier-ramp-left",
        "asymmetric barrier ramp propagated with the left decomposition only",
    ),
    (
        "two-surface",
        "two coupled diabatic surfaces with Eckart diagonal and coupling curves",
    ),
    (
        "free-particle",
        "dispersing free Gaussian against the closed-form solution",
    ),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(name, _)| *name).collect()
}

fn standard_grid() -> GridConfig {
    GridConfig {
        x_left: -35.0,
        x_right: 35.0,
        n_points: 876,
    }
}

fn base(name: &str) -> RunConfig {
    RunConfig {
        preset: Some(name.to_string()),
        grid: standard_grid(),
        packet: PacketSpec {
            gamma: 0.35,
            x0: -7.0,
            p0: 0.0,
            mass: 2000.0,
            t0: 0.0,
        },
        potential: PotentialModel::Free,
        time: TimeConfig {
            dt: 0.1,
            t_max: 0.0,
            snapshot_times: None,
            snapshot_count: 30,
        },
        mode: ModeConfig::Single,
        thresholds: ConditionThresholds::default(),
        stage: StageParams::default(),
        oracle: OracleConfig::default(),
        stepper: TimeStepper::Euler,
        diagnostics_stride: 10,
        rt_tolerance: 0.01,
        admissibility_tolerance: 1e-6,
        asserts: Vec::new(),
    }
}

pub fn preset(name: &str) -> Option<RunConfig> {
    let mut cfg = base(name);
    match name {
        "eckart-proton" => {
            // incident kinetic energy 0.0027 a.u., slightly above the barrier
            cfg.packet.p0 = (2.0 * 2000.0 * 0.0027_f64).sqrt();
            cfg.potential = PotentialModel::Eckart {
                v0: 0.0024,
                alpha: 2.5,
            };
            cfg.time.dt = 0.1;
            cfg.time.t_max = 11600.0;
            cfg.oracle.enabled = true;
            cfg.asserts = vec![
                AssertSpec::CombinedMin {
                    min: 0.84,
                    max: 0.88,
                },
                AssertSpec::CombinedFinal {
                    min: 0.99,
                    max: 1.01,
                },
                AssertSpec::RtSum {
                    min: 0.99,
                    max: 1.01,
                },
                AssertSpec::Condition1Pass,
                AssertSpec::Condition3Pass,
                AssertSpec::StageAfterPeak,
            ];
        }
        "eckart-electron" => {
            // incident kinetic energy 30 a.u. against a barrier of 20
            cfg.packet = PacketSpec {
                gamma: 1.0,
                x0: -7.5,
                p0: 60.0_f64.sqrt(),
                mass: 1.0,
                t0: 0.0,
            };
            cfg.potential = PotentialModel::Eckart { v0: 20.0, alpha: 1.0 };
            cfg.time.dt = 2.5e-4;
            cfg.time.t_max = 2.5;
            cfg.oracle.enabled = true;
        }
        "barrier-ramp-spliced" => {
            // incident kinetic energy 0.004 a.u., above the ~0.0024 peak;
            // dt below the paper-typical 0.1: at dt = 0.1 the forward-Euler
            // amplification of the right-decomposition edge tail blows up the
            // component pair before t_max (the total stays finite far longer)
            cfg.packet.p0 = 4.0;
            cfg.potential = PotentialModel::BarrierRamp {
                v0: 0.0020,
                alpha: 2.5,
                beta: 2.5,
                v_left: 0.0,
                v_right: 0.0008,
            };
            cfg.time.dt = 0.02;
            cfg.time.t_max = 9570.0;
            cfg.mode = ModeConfig::Splice { x_d: 0.0 };
            cfg.asserts = vec![
                AssertSpec::SplicedTotalAgrees { limit: 1e-10 },
                AssertSpec::RtSum {
                    min: 0.99,
                    max: 1.01,
                },
                AssertSpec::Condition3Pass,
                AssertSpec::PsiRMinusNonzero,
            ];
        }
        "barrier-ramp-left" => {
            cfg.packet.p0 = (2.0 * 2000.0 * 0.0027_f64).sqrt();
            cfg.potential = PotentialModel::BarrierRamp {
                v0: 0.0020,
                alpha: 2.5,
                beta: 2.5,
                v_left: 0.0,
                v_right: 0.0008,
            };
            cfg.time.dt = 0.1;
            cfg.time.t_max = 11600.0;
            cfg.asserts = vec![
                AssertSpec::Condition3Pass,
                AssertSpec::MinusProbabilityRightOfDividerAbove { min: 1e-4 },
            ];
        }
        "two-surface" => {
            cfg.packet.p0 = (2.0 * 2000.0 * 0.0027_f64).sqrt();
            cfg.potential = PotentialModel::TwoSurface {
                v0: 0.0024,
                d0: 0.00072,
                alpha: 2.5,
            };
            cfg.time.dt = 0.1;
            cfg.time.t_max = 11600.0;
            cfg.mode = ModeConfig::Multisurface { v0_eff: 0.0 };
            cfg.asserts = vec![
                AssertSpec::Condition3Pass,
                AssertSpec::NormFinal {
                    min: 0.99,
                    max: 1.01,
                },
                AssertSpec::BranchProbabilitiesAbove { min: 0.02 },
            ];
        }
        "free-particle" => {
            cfg.grid = GridConfig {
                x_left: -35.0,
                x_right: 35.0,
                n_points: 2501,
            };
            cfg.packet = PacketSpec {
                gamma: 0.05,
                x0: -7.0,
                p0: 0.25,
                mass: 2000.0,
                t0: 0.0,
            };
            cfg.potential = PotentialModel::Free;
            cfg.time.dt = 0.01;
            cfg.time.t_max = 500.0;
            cfg.time.snapshot_count = 11;
            cfg.asserts = vec![AssertSpec::MinusNormZero];
        }
        _ => return None,
    }
    Some(cfg)
}
