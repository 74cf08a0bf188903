//! Asymmetric-potential workflow: combine the V0 = V_L and V0 = V_R
//! propagations of one problem into a single decomposition by joining them at
//! a dividing point.
//!
//! Both runs evolve the same total wavefunction. To keep their totals
//! identical to round-off, the splice propagation integrates three fields in
//! one loop: the shared total T, the left-run minus component and the
//! right-run minus component; the plus components are reconstructed as
//! T - psi_-. Substituting psi_+ = T - psi_- into the pair equations turns
//! the coupling integral Psi_+ - Psi_- into Psi_T - 2 Psi_-, so this is an
//! exact algebraic rearrangement of propagating each pair separately.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolve::{
    integrate, neg_i_times, validate_schedule, BipolarState, DiagSample, PropagateOptions, StepDiagnostics,
};
use crate::field::{
    cumulative_integral_into, density_integral, second_derivative_into, ComplexField,
};
use crate::packet::right_decomposition;
use crate::potential::{PotentialModel, SampledPotential};

/// Default tolerance on the shared-total check when splicing two runs.
pub const SHARED_TOTAL_LIMIT: f64 = 1e-6;

/// Two same-schedule propagations of one problem plus the dividing point.
#[derive(Debug)]
pub struct SplicePlan<'a> {
    pub x_d: f64,
    pub left: &'a [BipolarState],
    pub right: &'a [BipolarState],
    /// Hard limit on the max-node disagreement of the two run totals.
    pub shared_total_limit: f64,
}

impl<'a> SplicePlan<'a> {
    pub fn new(x_d: f64, left: &'a [BipolarState], right: &'a [BipolarState]) -> Self {
        SplicePlan {
            x_d,
            left,
            right,
            shared_total_limit: SHARED_TOTAL_LIMIT,
        }
    }
}

/// Glue the two decompositions at the dividing point: left-run values at
/// nodes with x <= x_d, right-run values beyond. Fails when the two runs do
/// not share their total wavefunction at this snapshot.
pub fn splice(plan: &SplicePlan<'_>, snapshot_index: usize) -> Result<BipolarState> {
    let left = plan
        .left
        .get(snapshot_index)
        .ok_or_else(|| Error::InvalidParameter("snapshot index out of range".into()))?;
    let right = plan
        .right
        .get(snapshot_index)
        .ok_or_else(|| Error::InvalidParameter("snapshot index out of range".into()))?;
    if left.grid() != right.grid() || left.n_surfaces() != right.n_surfaces() {
        return Err(Error::GridMismatch);
    }
    if left.t() != right.t() {
        return Err(Error::InvalidParameter(
            "snapshots are not from the same schedule".into(),
        ));
    }
    let grid = left.grid();
    let n = grid.n_points();

    let mut max_diff: f64 = 0.0;
    for i in 0..left.n_surfaces() {
        let lt = left.total(i);
        let rt = right.total(i);
        for k in 0..n {
            max_diff = max_diff.max((lt.values()[k] - rt.values()[k]).norm());
        }
    }
    if max_diff > plan.shared_total_limit {
        return Err(Error::SpliceMismatch {
            snapshot: snapshot_index,
            max_diff,
            limit: plan.shared_total_limit,
        });
    }

    let mut components = Vec::with_capacity(left.n_surfaces());
    for i in 0..left.n_surfaces() {
        let mut plus = Vec::with_capacity(n);
        let mut minus = Vec::with_capacity(n);
        for k in 0..n {
            // tie-break: the node exactly at x_d takes the left value
            if grid.x(k) <= plan.x_d {
                plus.push(left.plus(i).values()[k]);
                minus.push(left.minus(i).values()[k]);
            } else {
                plus.push(right.plus(i).values()[k]);
                minus.push(right.minus(i).values()[k]);
            }
        }
        components.push((
            ComplexField::from_values(grid, plus)?,
            ComplexField::from_values(grid, minus)?,
        ));
    }
    BipolarState::new(components, left.t(), left.mass())
}

/// Everything produced by one spliced propagation.
#[derive(Debug)]
pub struct SpliceRun {
    pub left_snapshots: Vec<BipolarState>,
    pub right_snapshots: Vec<BipolarState>,
    pub spliced_snapshots: Vec<BipolarState>,
    pub realized_times: Vec<f64>,
    pub diagnostics: StepDiagnostics,
    /// Admissibility projection loss of the initial packet.
    pub discarded_probability: f64,
    /// || psi_R- (t=0) ||^2
    pub psi_r_minus_initial_norm_squared: f64,
}

/// Run the two-decomposition workflow for an asymmetric potential.
///
/// The left run starts from (T, 0) and the right run from the
/// momentum-space decomposition against the right asymptote, where T is the
/// admissible projection of `f0`. Snapshots of both runs plus their splice at
/// `x_d` are captured on the shared schedule.
pub fn propagate_spliced(
    f0: &ComplexField,
    model: &PotentialModel,
    mass: f64,
    x_d: f64,
    opts: &PropagateOptions,
    admissibility_tolerance: f64,
) -> Result<SpliceRun> {
    if model.n_surfaces() != 1 {
        return Err(Error::ShapeMismatch {
            state_surfaces: 1,
            potential_surfaces: model.n_surfaces(),
        });
    }
    let (n_steps, snapshot_steps) = validate_schedule(opts)?;
    let grid = f0.grid();
    let n = grid.n_points();
    let dx = grid.dx();
    let sampled = SampledPotential::new(model, &grid);
    let v_left = model.asymptotic_left(0);
    let v_right = model.asymptotic_right(0);

    let decomp = right_decomposition(f0, v_left, v_right, mass, admissibility_tolerance)?;
    let psi_r_minus_initial_norm_squared = decomp.minus.norm_squared();

    // shared total; also the left run's initial plus component
    let total0: Vec<Complex64> = decomp
        .plus
        .values()
        .iter()
        .zip(decomp.minus.values())
        .map(|(a, b)| a + b)
        .collect();
    let fields = vec![
        total0,
        vec![Complex64::ZERO; n],      // left-run minus
        decomp.minus.values().to_vec(), // right-run minus
    ];

    let kin = -1.0 / (2.0 * mass);
    let v = sampled.value_row(0, 0).to_vec();
    let vp = sampled.derivative_row(0, 0).to_vec();
    let mut cap_t = vec![Complex64::ZERO; n];
    let mut cap_m = vec![Complex64::ZERO; n];
    let mut d2 = vec![Complex64::ZERO; n];
    let mut scratch = vec![Complex64::ZERO; n];
    // first node assigned to the right run
    let boundary = grid.positions().take_while(|&x| x <= x_d).count();

    let result = integrate(
        fields,
        dx,
        opts.dt,
        n_steps,
        &snapshot_steps,
        opts.diagnostics_stride,
        opts.instability_norm_limit,
        opts.stepper,
        |fields, out| {
            cumulative_integral_into(&fields[0], dx, &mut cap_t);
            // total: plain discrete TDSE
            second_derivative_into(&fields[0], dx, &mut d2);
            for k in 0..n {
                out[0][k] = neg_i_times(kin * d2[k] + v[k] * fields[0][k]);
            }
            // each minus component: coupling (V'/2)(Psi_T - 2 Psi_-)
            for idx in 1..3 {
                cumulative_integral_into(&fields[idx], dx, &mut cap_m);
                second_derivative_into(&fields[idx], dx, &mut d2);
                for k in 0..n {
                    let coupling = 0.5 * vp[k] * (cap_t[k] - 2.0 * cap_m[k]);
                    out[idx][k] =
                        neg_i_times(kin * d2[k] + v[k] * fields[idx][k] - coupling);
                }
            }
        },
        |fields, diag| {
            // reconstructed plus norms per run plus the spliced-state combined
            // probability for the summary time series
            for slot in 1..3 {
                for k in 0..n {
                    scratch[k] = fields[0][k] - fields[slot][k];
                }
                diag.push(density_integral(&scratch, dx));
            }
            for k in 0..n {
                let slot = if k < boundary { 1 } else { 2 };
                scratch[k] = fields[0][k] - fields[slot][k];
            }
            diag.push(density_integral(&scratch, dx));
            for k in 0..n {
                let slot = if k < boundary { 1 } else { 2 };
                scratch[k] = fields[slot][k];
            }
            diag.push(density_integral(&scratch, dx));
        },
    )?;

    let reconstruct = |total: &[Complex64], minus: &[Complex64], t: f64| -> Result<BipolarState> {
        let plus: Vec<Complex64> = total
            .iter()
            .zip(minus)
            .map(|(tv, mv)| tv - mv)
            .collect();
        BipolarState::single_surface(
            ComplexField::from_values(grid, plus)?,
            ComplexField::from_values(grid, minus.to_vec())?,
            t,
            mass,
        )
    };

    let mut left_snapshots = Vec::with_capacity(result.snapshots.len());
    let mut right_snapshots = Vec::with_capacity(result.snapshots.len());
    let mut realized_times = Vec::with_capacity(result.snapshots.len());
    for (step, fields) in &result.snapshots {
        let t = *step as f64 * opts.dt;
        left_snapshots.push(reconstruct(&fields[0], &fields[1], t)?);
        right_snapshots.push(reconstruct(&fields[0], &fields[2], t)?);
        realized_times.push(t);
    }
    let mut spliced_snapshots = Vec::with_capacity(left_snapshots.len());
    {
        let plan = SplicePlan::new(x_d, &left_snapshots, &right_snapshots);
        for idx in 0..left_snapshots.len() {
            spliced_snapshots.push(splice(&plan, idx)?);
        }
    }

    let samples = result
        .diag_steps
        .iter()
        .map(|(step, norms)| {
            let t = *step as f64 * opts.dt;
            // pairs are (plus, minus) of the left and right runs; the combined
            // probability tracks the spliced state
            DiagSample {
                t,
                component_norms_squared: vec![(norms[3], norms[1]), (norms[4], norms[2])],
                total_norm_squared: norms[0],
                combined_probability: norms[5] + norms[6],
            }
        })
        .collect();

    Ok(SpliceRun {
        left_snapshots,
        right_snapshots,
        spliced_snapshots,
        realized_times,
        diagnostics: StepDiagnostics { samples },
        discarded_probability: decomp.discarded_probability,
        psi_r_minus_initial_norm_squared,
    })
}

/// Max-node disagreement between the spliced total and a constituent total.
pub fn total_disagreement(spliced: &BipolarState, constituent: &BipolarState) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..spliced.n_surfaces() {
        let a = spliced.total(i);
        let b = constituent.total(i);
        for (x, y) in a.values().iter().zip(b.values()) {
            worst = worst.max((x - y).norm());
        }
    }
    worst
}

/// Trapezoid integral of |psi|^2 restricted to nodes with x > x_d (used for
/// the asymptotic-separation checks).
pub fn probability_right_of(field: &ComplexField, x_d: f64) -> f64 {
    let grid = field.grid();
    let dens: Vec<f64> = field
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| if grid.x(k) > x_d { v.norm_sqr() } else { 0.0 })
        .collect();
    crate::field::real_integral(&dens, grid.dx())
}

/// Same restricted to x < x_d.
pub fn probability_left_of(field: &ComplexField, x_d: f64) -> f64 {
    let grid = field.grid();
    let dens: Vec<f64> = field
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| if grid.x(k) < x_d { v.norm_sqr() } else { 0.0 })
        .collect();
    crate::field::real_integral(&dens, grid.dx())
}
