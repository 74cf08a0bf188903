//! Independent unipolar TDSE propagator used to cross-validate the engine:
//! second-order Strang splitting with a periodic spectral kinetic step on the
//! same grid. Its error structure (spectral in space, O(dt^2) in time,
//! periodic boundaries) shares nothing with the finite-difference Euler
//! engine it checks.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::potential::PotentialModel;

/// Default relative edge-density bound; beyond it the periodic transform is
/// contaminated by wraparound and the run aborts.
pub const EDGE_DENSITY_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct OracleOptions {
    pub dt: f64,
    pub t_max: f64,
    /// Snapshot times, sorted ascending (normally the engine's realized times).
    pub snapshot_times: Vec<f64>,
    pub edge_density_limit: f64,
}

impl OracleOptions {
    pub fn new(dt: f64, t_max: f64, snapshot_times: Vec<f64>) -> Self {
        OracleOptions {
            dt,
            t_max,
            snapshot_times,
            edge_density_limit: EDGE_DENSITY_LIMIT,
        }
    }
}

/// Per-node half-step propagator for the (possibly matrix-valued) potential.
enum PotentialStep {
    Single(Vec<Complex64>),
    /// Symmetric 2x2 exponential per node: (m11, m12, m22).
    Two(Vec<(Complex64, Complex64, Complex64)>),
}

/// exp(-i tau [[a, b], [b, c]]) for a real symmetric matrix, via its
/// eigendecomposition.
fn symmetric_exp(a: f64, b: f64, c: f64, tau: f64) -> (Complex64, Complex64, Complex64) {
    let mean = 0.5 * (a + c);
    let delta = 0.5 * (a - c);
    let r = (delta * delta + b * b).sqrt();
    let phase = Complex64::from_polar(1.0, -mean * tau);
    if r == 0.0 {
        return (phase, Complex64::ZERO, phase);
    }
    let cos = (r * tau).cos();
    let sinc = (r * tau).sin() / r;
    let m11 = phase * Complex64::new(cos, -delta * sinc);
    let m12 = phase * Complex64::new(0.0, -b * sinc);
    let m22 = phase * Complex64::new(cos, delta * sinc);
    (m11, m12, m22)
}

/// Direct split-step propagation of the total wavefunction (one field per
/// surface). Returns one snapshot set per requested time.
pub fn unipolar_propagate(
    psi0: &[ComplexField],
    model: &PotentialModel,
    mass: f64,
    opts: &OracleOptions,
) -> Result<Vec<Vec<ComplexField>>> {
    let f = model.n_surfaces();
    if psi0.len() != f {
        return Err(Error::ShapeMismatch {
            state_surfaces: psi0.len(),
            potential_surfaces: f,
        });
    }
    let grid = psi0[0].grid();
    let n = grid.n_points();
    if psi0.iter().any(|p| p.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    if !(opts.dt > 0.0) || !opts.dt.is_finite() {
        return Err(Error::InvalidParameter("oracle dt must be positive".into()));
    }

    let n_steps = (opts.t_max / opts.dt).round() as usize;
    let mut targets: Vec<usize> = Vec::with_capacity(opts.snapshot_times.len());
    for &t in &opts.snapshot_times {
        if t < 0.0 || t > opts.t_max + 0.5 * opts.dt {
            return Err(Error::InvalidParameter(format!(
                "oracle snapshot time {t} outside schedule"
            )));
        }
        targets.push(((t / opts.dt).round() as usize).min(n_steps));
    }

    // kinetic full-step phase in momentum space, with the unnormalized-FFT
    // 1/n factor folded in
    let dp = 2.0 * PI / (n as f64 * grid.dx());
    let inv_n = 1.0 / n as f64;
    let kinetic: Vec<Complex64> = (0..n)
        .map(|k| {
            let j = if k < (n + 1) / 2 {
                k as i64
            } else {
                k as i64 - n as i64
            };
            let p = j as f64 * dp;
            Complex64::from_polar(inv_n, -p * p * opts.dt / (2.0 * mass))
        })
        .collect();

    let half = match model {
        PotentialModel::TwoSurface { .. } => PotentialStep::Two(
            grid.positions()
                .map(|x| {
                    symmetric_exp(
                        model.value(0, 0, x),
                        model.value(0, 1, x),
                        model.value(1, 1, x),
                        0.5 * opts.dt,
                    )
                })
                .collect(),
        ),
        _ => PotentialStep::Single(
            grid.positions()
                .map(|x| Complex64::from_polar(1.0, -model.value(0, 0, x) * 0.5 * opts.dt))
                .collect(),
        ),
    };

    let mut planner = FftPlanner::new();
    let fwd: Arc<dyn rustfft::Fft<f64>> = planner.plan_fft_forward(n);
    let inv: Arc<dyn rustfft::Fft<f64>> = planner.plan_fft_inverse(n);
    let mut scratch = vec![Complex64::ZERO; fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];

    let mut fields: Vec<Vec<Complex64>> = psi0.iter().map(|p| p.values().to_vec()).collect();
    let apply_half = |fields: &mut Vec<Vec<Complex64>>, half: &PotentialStep| match half {
        PotentialStep::Single(phases) => {
            for (v, ph) in fields[0].iter_mut().zip(phases) {
                *v *= ph;
            }
        }
        PotentialStep::Two(mats) => {
            let (a, b) = fields.split_at_mut(1);
            for k in 0..mats.len() {
                let (m11, m12, m22) = mats[k];
                let x1 = a[0][k];
                let x2 = b[0][k];
                a[0][k] = m11 * x1 + m12 * x2;
                b[0][k] = m12 * x1 + m22 * x2;
            }
        }
    };

    let mut snapshots: Vec<Vec<ComplexField>> = Vec::with_capacity(targets.len());
    let mut target_idx = 0;
    for step in 0..=n_steps {
        while target_idx < targets.len() && targets[target_idx] == step {
            snapshots.push(
                fields
                    .iter()
                    .map(|v| ComplexField::from_values(grid, v.clone()).expect("shape"))
                    .collect(),
            );
            target_idx += 1;
        }
        // wraparound guard
        let mut rho_max: f64 = 0.0;
        let mut rho_edge: f64 = 0.0;
        for fvec in &fields {
            for v in fvec {
                rho_max = rho_max.max(v.norm_sqr());
            }
            rho_edge = rho_edge
                .max(fvec[0].norm_sqr())
                .max(fvec[n - 1].norm_sqr());
        }
        if rho_max > 0.0 && rho_edge > opts.edge_density_limit * rho_max {
            return Err(Error::OracleEdgeContamination {
                t: step as f64 * opts.dt,
                edge_fraction: rho_edge / rho_max,
            });
        }
        if step == n_steps {
            break;
        }
        apply_half(&mut fields, &half);
        for fvec in &mut fields {
            fwd.process_with_scratch(fvec, &mut scratch);
            for (v, ph) in fvec.iter_mut().zip(&kinetic) {
                *v *= ph;
            }
            inv.process_with_scratch(fvec, &mut scratch);
        }
        apply_half(&mut fields, &half);
    }
    Ok(snapshots)
}

/// Reflection/transmission by spatial branch split at `x_d` (independent of
/// the component decomposition).
pub fn branch_split(field: &ComplexField, x_d: f64) -> (f64, f64) {
    (
        crate::splice::probability_left_of(field, x_d),
        crate::splice::probability_right_of(field, x_d),
    )
}

/// Max-node |sum of engine components - oracle field| per snapshot.
pub fn max_abs_difference(
    engine_snapshots: &[crate::evolve::BipolarState],
    oracle_snapshots: &[Vec<ComplexField>],
) -> Vec<f64> {
    engine_snapshots
        .iter()
        .zip(oracle_snapshots)
        .map(|(state, oracle)| {
            let mut worst: f64 = 0.0;
            for i in 0..state.n_surfaces() {
                let total = state.total(i);
                for (a, b) in total.values().iter().zip(oracle[i].values()) {
                    worst = worst.max((a - b).norm());
                }
            }
            worst
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::packet::{gaussian_packet, PacketSpec};

    fn free_packet() -> (ComplexField, PacketSpec) {
        let grid = Grid::new(-35.0, 35.0, 876).unwrap();
        let spec = PacketSpec {
            gamma: 0.35,
            x0: -7.0,
            p0: 1.0,
            mass: 2000.0,
            t0: 0.0,
        };
        (gaussian_packet(&spec, &grid).unwrap(), spec)
    }

    fn analytic_free(spec: &PacketSpec, grid: Grid, t: f64) -> ComplexField {
        let a = Complex64::new(1.0, 2.0 * spec.gamma * t / spec.mass);
        ComplexField::from_fn(grid, |x| {
            let amp = (2.0 * spec.gamma / PI).powf(0.25);
            let shift = x - spec.x0 - spec.p0 * t / spec.mass;
            let phase = Complex64::new(
                0.0,
                spec.p0 * x - spec.p0 * spec.p0 * t / (2.0 * spec.mass),
            );
            amp / a.sqrt()
                * (Complex64::new(-spec.gamma * shift * shift, 0.0) / a + phase).exp()
        })
    }

    #[test]
    fn free_propagation_matches_analytic_gaussian() {
        let (psi0, spec) = free_packet();
        let grid = psi0.grid();
        let opts = OracleOptions::new(0.01, 100.0, vec![100.0]);
        let snaps =
            unipolar_propagate(&[psi0], &PotentialModel::free(), spec.mass, &opts).unwrap();
        let exact = analytic_free(&spec, grid, 100.0);
        let worst = snaps[0][0]
            .values()
            .iter()
            .zip(exact.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "free-particle error {worst}");
    }

    #[test]
    fn norm_is_conserved_to_machine_precision() {
        let (psi0, spec) = free_packet();
        let model = PotentialModel::eckart(0.0024, 2.5).unwrap();
        let opts = OracleOptions::new(0.1, 50.0, vec![50.0]);
        let snaps = unipolar_propagate(&[psi0.clone()], &model, spec.mass, &opts).unwrap();
        let drift = (snaps[0][0].norm_squared() - psi0.norm_squared()).abs();
        // 500 unitary steps; allow 1e-12 per step of roundoff
        assert!(drift < 500.0 * 1e-12, "norm drift {drift}");
    }

    #[test]
    fn dt_self_convergence_is_second_order() {
        // light fast system: the splitting error must sit far above roundoff
        let grid = Grid::new(-35.0, 35.0, 876).unwrap();
        let spec = PacketSpec {
            gamma: 1.0,
            x0: -7.5,
            p0: 60.0f64.sqrt(),
            mass: 1.0,
            t0: 0.0,
        };
        let psi0 = gaussian_packet(&spec, &grid).unwrap();
        let model = PotentialModel::eckart(20.0, 1.0).unwrap();
        let run = |dt: f64| -> ComplexField {
            let opts = OracleOptions::new(dt, 2.0, vec![2.0]);
            unipolar_propagate(&[psi0.clone()], &model, spec.mass, &opts)
                .unwrap()
                .remove(0)
                .remove(0)
        };
        let a = run(0.02);
        let b = run(0.01);
        let c = run(0.005);
        let diff = |x: &ComplexField, y: &ComplexField| {
            x.values()
                .iter()
                .zip(y.values())
                .map(|(u, v)| (u - v).norm())
                .fold(0.0, f64::max)
        };
        let e1 = diff(&a, &b);
        let e2 = diff(&b, &c);
        let order = (e1 / e2).log2();
        assert!(order >= 1.9, "oracle order {order} (e1={e1:.3e}, e2={e2:.3e})");
    }

    #[test]
    fn decoupled_two_surface_oracle_propagates_surfaces_independently() {
        let grid = Grid::new(-35.0, 35.0, 876).unwrap();
        let spec = PacketSpec {
            gamma: 0.35,
            x0: -7.0,
            p0: 3.0,
            mass: 2000.0,
            t0: 0.0,
        };
        let psi0 = gaussian_packet(&spec, &grid).unwrap();
        let coupled_model = PotentialModel::two_surface(0.0024, 0.0, 2.5).unwrap();
        let single_model = PotentialModel::eckart(0.0024, 2.5).unwrap();
        let opts = OracleOptions::new(0.1, 100.0, vec![100.0]);
        let two = unipolar_propagate(
            &[psi0.clone(), ComplexField::zeros(grid)],
            &coupled_model,
            spec.mass,
            &opts,
        )
        .unwrap();
        let one = unipolar_propagate(&[psi0], &single_model, spec.mass, &opts).unwrap();
        let worst = two[0][0]
            .values()
            .iter()
            .zip(one[0][0].values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-12, "decoupled oracle mismatch {worst}");
        assert!(two[0][1].values().iter().all(|v| v.norm() < 1e-300));
    }

    #[test]
    fn aborts_on_wraparound_contamination() {
        let grid = Grid::new(-10.0, 10.0, 128).unwrap();
        let spec = PacketSpec {
            gamma: 1.0,
            x0: -3.0,
            p0: 5.0,
            mass: 1.0,
            t0: 0.0,
        };
        let psi0 = gaussian_packet(&spec, &grid).unwrap();
        // fast light packet reaches the right edge well before t = 10
        let opts = OracleOptions::new(0.001, 10.0, vec![10.0]);
        match unipolar_propagate(&[psi0], &PotentialModel::free(), spec.mass, &opts) {
            Err(Error::OracleEdgeContamination { .. }) => {}
            other => panic!("expected wraparound abort, got {other:?}"),
        }
    }

    #[test]
    fn symmetric_exp_is_unitary_and_matches_diagonal_case() {
        let (m11, m12, m22) = symmetric_exp(0.3, 0.0, 0.7, 0.5);
        assert!((m11 - Complex64::from_polar(1.0, -0.15)).norm() < 1e-15);
        assert!((m22 - Complex64::from_polar(1.0, -0.35)).norm() < 1e-15);
        assert_eq!(m12, Complex64::ZERO);

        let (m11, m12, m22) = symmetric_exp(0.4, 0.2, 0.1, 0.8);
        // unitarity of [[m11, m12], [m12, m22]]
        let col1 = m11.norm_sqr() + m12.norm_sqr();
        let col2 = m12.norm_sqr() + m22.norm_sqr();
        let cross = (m11 * m12.conj() + m12 * m22.conj()).norm();
        assert!((col1 - 1.0).abs() < 1e-14);
        assert!((col2 - 1.0).abs() < 1e-14);
        assert!(cross < 1e-14);
    }
}
