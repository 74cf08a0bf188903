//! The propagation engine: bipolar right-hand sides (single and
//! multisurface) and fixed-step time integration.
//!
//! Every surface i carries a pair (psi_i+, psi_i-); with hbar = 1 the pair
//! evolves as
//!
//!   d psi_i±/dt = -i [ sum_j H_ij psi_j±  ±  1/2 sum_j V'_ij (Psi_j+ - Psi_j-) ]
//!
//! where H_ij = -delta_ij (1/2m) d^2/dx^2 + V_ij(x) and Psi_j± is the running
//! integral of psi_j± from the left edge. The two coupling terms are equal
//! and opposite, so the per-surface sums satisfy the ordinary discrete TDSE.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{
    cumulative_integral_into, density_integral, second_derivative_into, ComplexField,
};
use crate::grid::Grid;
use crate::potential::{PotentialModel, SampledPotential};

/// (-i) * z without going through a complex multiply.
#[inline]
pub(crate) fn neg_i_times(z: Complex64) -> Complex64 {
    Complex64::new(z.im, -z.re)
}

/// Per-surface (psi_plus, psi_minus) pairs plus the current time.
#[derive(Debug, Clone, PartialEq)]
pub struct BipolarState {
    components: Vec<(ComplexField, ComplexField)>,
    t: f64,
    mass: f64,
}

impl BipolarState {
    pub fn new(components: Vec<(ComplexField, ComplexField)>, t: f64, mass: f64) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("state needs at least one surface".into()));
        }
        if !(mass > 0.0) {
            return Err(Error::InvalidParameter("mass must be positive".into()));
        }
        let grid = components[0].0.grid();
        for (p, m) in &components {
            if p.grid() != grid || m.grid() != grid {
                return Err(Error::GridMismatch);
            }
        }
        Ok(BipolarState {
            components,
            t,
            mass,
        })
    }

    pub fn single_surface(plus: ComplexField, minus: ComplexField, t: f64, mass: f64) -> Result<Self> {
        Self::new(vec![(plus, minus)], t, mass)
    }

    #[inline]
    pub fn n_surfaces(&self) -> usize {
        self.components.len()
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.components[0].0.grid()
    }

    #[inline]
    pub fn t(&self) -> f64 {
        self.t
    }

    #[inline]
    pub fn mass(&self) -> f64 {
        self.mass
    }

    #[inline]
    pub fn plus(&self, surface: usize) -> &ComplexField {
        &self.components[surface].0
    }

    #[inline]
    pub fn minus(&self, surface: usize) -> &ComplexField {
        &self.components[surface].1
    }

    /// psi_i = psi_i+ + psi_i-.
    pub fn total(&self, surface: usize) -> ComplexField {
        self.components[surface]
            .0
            .add(&self.components[surface].1)
            .expect("components share a grid")
    }

    pub fn component_norms_squared(&self) -> Vec<(f64, f64)> {
        self.components
            .iter()
            .map(|(p, m)| (p.norm_squared(), m.norm_squared()))
            .collect()
    }

    /// sum_i || psi_i+ + psi_i- ||^2.
    pub fn total_norm_squared(&self) -> f64 {
        (0..self.n_surfaces())
            .map(|i| self.total(i).norm_squared())
            .sum()
    }

    fn to_raw(&self) -> Vec<Vec<Complex64>> {
        let mut raw = Vec::with_capacity(2 * self.n_surfaces());
        for (p, m) in &self.components {
            raw.push(p.values().to_vec());
            raw.push(m.values().to_vec());
        }
        raw
    }

    fn from_raw(raw: &[Vec<Complex64>], grid: Grid, t: f64, mass: f64) -> Self {
        let components = raw
            .chunks(2)
            .map(|pair| {
                (
                    ComplexField::from_values(grid, pair[0].clone()).expect("raw shape"),
                    ComplexField::from_values(grid, pair[1].clone()).expect("raw shape"),
                )
            })
            .collect();
        BipolarState {
            components,
            t,
            mass,
        }
    }
}

/// Time derivative of every component of a [`BipolarState`].
#[derive(Debug, Clone)]
pub struct BipolarRhs {
    components: Vec<(ComplexField, ComplexField)>,
}

impl BipolarRhs {
    #[inline]
    pub fn plus(&self, surface: usize) -> &ComplexField {
        &self.components[surface].0
    }

    #[inline]
    pub fn minus(&self, surface: usize) -> &ComplexField {
        &self.components[surface].1
    }

    #[inline]
    pub fn n_surfaces(&self) -> usize {
        self.components.len()
    }
}

/// Scratch buffers for the multisurface right-hand side; reused every step.
struct RhsCore {
    n_surfaces: usize,
    n: usize,
    dx: f64,
    kin: f64,
    caps_diff: Vec<Vec<Complex64>>, // Psi_j+ - Psi_j- per surface
    cap_plus: Vec<Complex64>,
    cap_minus: Vec<Complex64>,
    d2: Vec<Complex64>,
    coupling: Vec<Complex64>,
    acc: Vec<Complex64>,
}

impl RhsCore {
    fn new(n_surfaces: usize, n: usize, dx: f64, mass: f64) -> Self {
        RhsCore {
            n_surfaces,
            n,
            dx,
            kin: -1.0 / (2.0 * mass),
            caps_diff: vec![vec![Complex64::ZERO; n]; n_surfaces],
            cap_plus: vec![Complex64::ZERO; n],
            cap_minus: vec![Complex64::ZERO; n],
            d2: vec![Complex64::ZERO; n],
            coupling: vec![Complex64::ZERO; n],
            acc: vec![Complex64::ZERO; n],
        }
    }

    /// fields layout: [plus_0, minus_0, plus_1, minus_1, ...]
    fn compute(
        &mut self,
        pot: &SampledPotential,
        fields: &[Vec<Complex64>],
        out: &mut [Vec<Complex64>],
    ) {
        let f = self.n_surfaces;
        let n = self.n;
        for j in 0..f {
            cumulative_integral_into(&fields[2 * j], self.dx, &mut self.cap_plus);
            cumulative_integral_into(&fields[2 * j + 1], self.dx, &mut self.cap_minus);
            let diff = &mut self.caps_diff[j];
            for k in 0..n {
                diff[k] = self.cap_plus[k] - self.cap_minus[k];
            }
        }
        for i in 0..f {
            // coupling field for surface i: 1/2 sum_j V'_ij (Psi_j+ - Psi_j-)
            self.coupling.iter_mut().for_each(|c| *c = Complex64::ZERO);
            for j in 0..f {
                if !pot.pair_active(i, j) {
                    continue;
                }
                let vp = pot.derivative_row(i, j);
                let diff = &self.caps_diff[j];
                for k in 0..n {
                    self.coupling[k] += vp[k] * diff[k];
                }
            }
            for c in self.coupling.iter_mut() {
                *c *= 0.5;
            }
            for sign in 0..2 {
                second_derivative_into(&fields[2 * i + sign], self.dx, &mut self.d2);
                for k in 0..n {
                    self.acc[k] = self.kin * self.d2[k];
                }
                for j in 0..f {
                    if !pot.pair_active(i, j) {
                        continue;
                    }
                    let v = pot.value_row(i, j);
                    let fld = &fields[2 * j + sign];
                    for k in 0..n {
                        self.acc[k] += v[k] * fld[k];
                    }
                }
                let dst = &mut out[2 * i + sign];
                if sign == 0 {
                    for k in 0..n {
                        dst[k] = neg_i_times(self.acc[k] + self.coupling[k]);
                    }
                } else {
                    for k in 0..n {
                        dst[k] = neg_i_times(self.acc[k] - self.coupling[k]);
                    }
                }
            }
        }
    }
}

fn rhs_impl(state: &BipolarState, potential: &SampledPotential) -> Result<BipolarRhs> {
    if state.n_surfaces() != potential.n_surfaces() {
        return Err(Error::ShapeMismatch {
            state_surfaces: state.n_surfaces(),
            potential_surfaces: potential.n_surfaces(),
        });
    }
    if state.grid() != potential.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = state.grid();
    let fields = state.to_raw();
    let mut out = vec![vec![Complex64::ZERO; grid.n_points()]; fields.len()];
    let mut core = RhsCore::new(
        state.n_surfaces(),
        grid.n_points(),
        grid.dx(),
        state.mass(),
    );
    core.compute(potential, &fields, &mut out);
    let components = out
        .chunks(2)
        .map(|pair| {
            (
                ComplexField::from_values(grid, pair[0].clone()).expect("shape"),
                ComplexField::from_values(grid, pair[1].clone()).expect("shape"),
            )
        })
        .collect();
    Ok(BipolarRhs { components })
}

/// Single-surface right-hand side of the coupled evolution equations.
pub fn bipolar_rhs(state: &BipolarState, potential: &SampledPotential) -> Result<BipolarRhs> {
    if state.n_surfaces() != 1 {
        return Err(Error::ShapeMismatch {
            state_surfaces: state.n_surfaces(),
            potential_surfaces: 1,
        });
    }
    rhs_impl(state, potential)
}

/// Multisurface right-hand side; reduces exactly to [`bipolar_rhs`] for one
/// surface, and block-decouples bitwise when the coupling rows are zero.
pub fn multisurface_rhs(state: &BipolarState, potential: &SampledPotential) -> Result<BipolarRhs> {
    rhs_impl(state, potential)
}

/// One forward-Euler step; edge nodes are re-clamped to zero and t advances.
pub fn euler_step(state: &BipolarState, rhs: &BipolarRhs, dt: f64) -> BipolarState {
    let n = state.grid().n_points();
    let components = state
        .components
        .iter()
        .zip(&rhs.components)
        .map(|((p, m), (rp, rm))| {
            let mut pv = p.values().to_vec();
            let mut mv = m.values().to_vec();
            for k in 0..n {
                pv[k] += dt * rp.values()[k];
                mv[k] += dt * rm.values()[k];
            }
            pv[0] = Complex64::ZERO;
            pv[n - 1] = Complex64::ZERO;
            mv[0] = Complex64::ZERO;
            mv[n - 1] = Complex64::ZERO;
            (
                ComplexField::from_values(state.grid(), pv).expect("shape"),
                ComplexField::from_values(state.grid(), mv).expect("shape"),
            )
        })
        .collect();
    BipolarState {
        components,
        t: state.t + dt,
        mass: state.mass,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TimeStepper {
    /// First-order forward Euler (the reference integrator).
    #[default]
    Euler,
    /// Classical four-stage Runge-Kutta, for convergence studies.
    Rk4,
}

#[derive(Debug, Clone)]
pub struct PropagateOptions {
    pub dt: f64,
    pub t_max: f64,
    /// Requested snapshot times, sorted ascending, within [0, t_max].
    pub snapshot_times: Vec<f64>,
    pub stepper: TimeStepper,
    /// Steps between diagnostic samples (norm recording + stability guard).
    pub diagnostics_stride: usize,
    /// Abort when any component norm exceeds this.
    pub instability_norm_limit: f64,
}

impl PropagateOptions {
    pub fn new(dt: f64, t_max: f64, snapshot_times: Vec<f64>) -> Self {
        PropagateOptions {
            dt,
            t_max,
            snapshot_times,
            stepper: TimeStepper::Euler,
            diagnostics_stride: 10,
            instability_norm_limit: 10.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagSample {
    pub t: f64,
    /// ||psi_i+||^2 and ||psi_i-||^2 per surface.
    pub component_norms_squared: Vec<(f64, f64)>,
    /// sum_i ||psi_i+ + psi_i-||^2
    pub total_norm_squared: f64,
    /// sum over all components of ||.||^2 (the combined probability)
    pub combined_probability: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct StepDiagnostics {
    pub samples: Vec<DiagSample>,
}

#[derive(Debug, Clone)]
pub struct PropagationResult {
    pub snapshots: Vec<BipolarState>,
    /// Times actually captured (nearest step to each request).
    pub realized_times: Vec<f64>,
    pub diagnostics: StepDiagnostics,
}

pub(crate) fn validate_schedule(opts: &PropagateOptions) -> Result<(usize, Vec<usize>)> {
    if !(opts.dt > 0.0) || !opts.dt.is_finite() {
        return Err(Error::InvalidParameter("dt must be positive".into()));
    }
    if !(opts.t_max >= 0.0) || !opts.t_max.is_finite() {
        return Err(Error::InvalidParameter("t_max must be non-negative".into()));
    }
    if opts.diagnostics_stride == 0 {
        return Err(Error::InvalidParameter(
            "diagnostics stride must be positive".into(),
        ));
    }
    let n_steps = (opts.t_max / opts.dt).round() as usize;
    let mut targets = Vec::with_capacity(opts.snapshot_times.len());
    let mut last = f64::NEG_INFINITY;
    for &t in &opts.snapshot_times {
        if t < 0.0 || t > opts.t_max {
            return Err(Error::InvalidParameter(format!(
                "snapshot time {t} outside [0, {}]",
                opts.t_max
            )));
        }
        if t < last {
            return Err(Error::InvalidParameter(
                "snapshot times must be sorted ascending".into(),
            ));
        }
        last = t;
        targets.push(((t / opts.dt).round() as usize).min(n_steps));
    }
    Ok((n_steps, targets))
}

/// Generic fixed-step driver over raw field vectors.
pub(crate) struct IntegrationOutput {
    pub snapshots: Vec<(usize, Vec<Vec<Complex64>>)>,
    pub diag_steps: Vec<(usize, Vec<f64>)>, // per-field ||.||^2
}

pub(crate) fn integrate<F, D>(
    mut fields: Vec<Vec<Complex64>>,
    dx: f64,
    dt: f64,
    n_steps: usize,
    snapshot_steps: &[usize],
    stride: usize,
    norm_limit: f64,
    stepper: TimeStepper,
    mut rhs: F,
    mut extra_diag: D,
) -> Result<IntegrationOutput>
where
    F: FnMut(&[Vec<Complex64>], &mut [Vec<Complex64>]),
    D: FnMut(&[Vec<Complex64>], &mut Vec<f64>),
{
    let n_fields = fields.len();
    let n = fields[0].len();
    let mut out = IntegrationOutput {
        snapshots: Vec::new(),
        diag_steps: Vec::new(),
    };
    let zeros = || vec![vec![Complex64::ZERO; n]; n_fields];
    let mut k1 = zeros();
    // rk4 stage buffers allocated lazily
    let (mut k2, mut k3, mut k4, mut stage) = match stepper {
        TimeStepper::Euler => (Vec::new(), Vec::new(), Vec::new(), Vec::new()),
        TimeStepper::Rk4 => (zeros(), zeros(), zeros(), zeros()),
    };

    let clamp = |fs: &mut [Vec<Complex64>]| {
        for f in fs.iter_mut() {
            f[0] = Complex64::ZERO;
            f[n - 1] = Complex64::ZERO;
        }
    };

    let mut target_idx = 0;
    for step in 0..=n_steps {
        while target_idx < snapshot_steps.len() && snapshot_steps[target_idx] == step {
            out.snapshots.push((step, fields.clone()));
            target_idx += 1;
        }
        if step % stride == 0 || step == n_steps {
            let mut norms: Vec<f64> = fields.iter().map(|f| density_integral(f, dx)).collect();
            for &nsq in &norms {
                let norm = nsq.sqrt();
                if !(norm <= norm_limit) {
                    return Err(Error::Unstable {
                        t: step as f64 * dt,
                        norm,
                        limit: norm_limit,
                    });
                }
            }
            extra_diag(&fields, &mut norms);
            out.diag_steps.push((step, norms));
        }
        if step == n_steps {
            break;
        }
        match stepper {
            TimeStepper::Euler => {
                rhs(&fields, &mut k1);
                for (f, k) in fields.iter_mut().zip(&k1) {
                    for j in 0..n {
                        f[j] += dt * k[j];
                    }
                }
                clamp(&mut fields);
            }
            TimeStepper::Rk4 => {
                let axpy = |base: &[Vec<Complex64>], k: &[Vec<Complex64>], c: f64, dst: &mut [Vec<Complex64>]| {
                    for i in 0..n_fields {
                        for j in 0..n {
                            dst[i][j] = base[i][j] + c * k[i][j];
                        }
                    }
                };
                rhs(&fields, &mut k1);
                axpy(&fields, &k1, 0.5 * dt, &mut stage);
                clamp(&mut stage);
                rhs(&stage, &mut k2);
                axpy(&fields, &k2, 0.5 * dt, &mut stage);
                clamp(&mut stage);
                rhs(&stage, &mut k3);
                axpy(&fields, &k3, dt, &mut stage);
                clamp(&mut stage);
                rhs(&stage, &mut k4);
                let c = dt / 6.0;
                for i in 0..n_fields {
                    for j in 0..n {
                        fields[i][j] +=
                            c * (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j]);
                    }
                }
                clamp(&mut fields);
            }
        }
    }
    Ok(out)
}

/// Fixed-step propagation with snapshot capture at the step nearest each
/// requested time and norm diagnostics at a configurable stride.
pub fn propagate(
    initial: &BipolarState,
    model: &PotentialModel,
    opts: &PropagateOptions,
) -> Result<PropagationResult> {
    let (n_steps, snapshot_steps) = validate_schedule(opts)?;
    let grid = initial.grid();
    let sampled = SampledPotential::new(model, &grid);
    if initial.n_surfaces() != sampled.n_surfaces() {
        return Err(Error::ShapeMismatch {
            state_surfaces: initial.n_surfaces(),
            potential_surfaces: sampled.n_surfaces(),
        });
    }
    let f = initial.n_surfaces();
    let mut core = RhsCore::new(f, grid.n_points(), grid.dx(), initial.mass());
    let raw = initial.to_raw();
    let mut total_buf = vec![Complex64::ZERO; grid.n_points()];
    let dx = grid.dx();
    let result = integrate(
        raw,
        dx,
        opts.dt,
        n_steps,
        &snapshot_steps,
        opts.diagnostics_stride,
        opts.instability_norm_limit,
        opts.stepper,
        |fields, out| core.compute(&sampled, fields, out),
        |fields, diag| {
            // coherent total norm: sum_i || psi_i+ + psi_i- ||^2
            let mut total = 0.0;
            for i in 0..f {
                for (k, slot) in total_buf.iter_mut().enumerate() {
                    *slot = fields[2 * i][k] + fields[2 * i + 1][k];
                }
                total += density_integral(&total_buf, dx);
            }
            diag.push(total);
        },
    )?;

    let snapshots: Vec<BipolarState> = result
        .snapshots
        .iter()
        .map(|(step, fields)| {
            BipolarState::from_raw(fields, grid, initial.t() + *step as f64 * opts.dt, initial.mass())
        })
        .collect();
    let realized_times: Vec<f64> = snapshots.iter().map(|s| s.t()).collect();
    let samples = result
        .diag_steps
        .iter()
        .map(|(step, norms)| {
            let t = initial.t() + *step as f64 * opts.dt;
            let component_norms_squared: Vec<(f64, f64)> = norms[..2 * f]
                .chunks(2)
                .map(|pair| (pair[0], pair[1]))
                .collect();
            let combined_probability: f64 = norms[..2 * f].iter().sum();
            DiagSample {
                t,
                component_norms_squared,
                total_norm_squared: norms[2 * f],
                combined_probability,
            }
        })
        .collect();

    Ok(PropagationResult {
        snapshots,
        realized_times,
        diagnostics: StepDiagnostics { samples },
    })
}
