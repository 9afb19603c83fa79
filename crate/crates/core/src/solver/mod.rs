//! One-dimensional solver of the dimensionless coupled equations
//!
//! ```text
//! c_m* ∂u/∂τ = Fo^m ∂χ(k_m* ∂χu + δ k_mq* ∂χv) + η c_mq* ∂v/∂τ
//! c_q* ∂v/∂τ = Fo^q ∂χ(k_q* ∂χv) + γ Fo^q r₁₂* ∂χ(k_qm* ∂χu)
//! ```
//!
//! on `χ ∈ [0, 1]`. The face `χ = 0` exchanges heat and moisture with a
//! periodic climate through Robin conditions; `χ = 1` is adiabatic and
//! impermeable.
//!
//! Discretisation: vertex-centred finite volumes (half cells at both ends),
//! harmonic-mean face coefficients, implicit Euler in time. The nonlinear
//! coefficients are handled by Picard iteration with step halving on
//! failure. Mass storage is written in conservative form: each iterate
//! solves `wᵏ + ∂w/∂u·(u − uᵏ) + ∂w/∂v·(v − vᵏ) − wⁿ = Δτ·(fluxes)` with
//! `w = ω/(c_mʳᵉᶠ δP)`, so the converged step conserves moisture exactly.
//! Here `∂w/∂u = c_m*` and `∂w/∂v` is the exact temperature derivative of
//! the sorption curve at fixed vapour pressure, which `−η c_mq*` approximates
//! through the Clausius–Clapeyron slope of `Psat`. With the frozen model
//! `w = u − η v`.

mod block_tridiag;

pub use block_tridiag::solve as solve_block_tridiagonal;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::dimensionless::{
    self, relative_difference, DimensionlessNumbers, ReferenceFrame, StarredCoefficients,
};
use crate::error::{Error, Result};
use crate::material_db::{MaterialDb, MaterialProperties};
use crate::similarity::{self, Design};
use crate::thermo::{self, CoefficientSet, PhysicalConstants};
use crate::units::DurationValue;

/// `mean + amplitude·sin(2π τ/period + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sinusoid {
    pub mean: f64,
    pub amplitude: f64,
    /// Dimensionless period.
    pub period: f64,
    /// Radians.
    pub phase: f64,
}

impl Sinusoid {
    pub fn constant(value: f64) -> Self {
        Sinusoid {
            mean: value,
            amplitude: 0.0,
            period: 1.0,
            phase: 0.0,
        }
    }

    pub fn value(&self, tau: f64) -> f64 {
        if self.amplitude == 0.0 {
            return self.mean;
        }
        self.mean + self.amplitude * (std::f64::consts::TAU * tau / self.period + self.phase).sin()
    }
}

/// Ambient fields on the exposed face.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Forcing {
    pub u: Sinusoid,
    pub v: Sinusoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Uniform {
        u: f64,
        v: f64,
    },
    /// Node values, `N` entries each.
    Profile {
        u: Vec<f64>,
        v: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepControl {
    /// First dimensionless time step.
    pub initial_step: f64,
    /// Largest step; `None` lets the problem pick a fraction of the
    /// forcing period.
    pub max_step: Option<f64>,
    /// Max-norm change between Picard iterates.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Consecutive halvings allowed before giving up.
    pub max_halvings: usize,
    /// Under-relaxation of the Picard update, in `(0, 1]`.
    pub relaxation: f64,
    /// Step growth after an easy step.
    pub growth: f64,
    /// Upper bound on accepted steps.
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            initial_step: 1e-4,
            max_step: None,
            tolerance: 1e-8,
            max_iterations: 50,
            max_halvings: 20,
            relaxation: 1.0,
            growth: 1.5,
            max_steps: 2_000_000,
        }
    }
}

impl StepControl {
    /// Constant step `dt`.
    pub fn fixed(dt: f64) -> Self {
        StepControl {
            initial_step: dt,
            max_step: Some(dt),
            growth: 1.0,
            ..StepControl::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.initial_step > 0.0
            && self.max_step.is_none_or(|m| m > 0.0)
            && self.tolerance > 0.0
            && self.max_iterations > 0
            && self.relaxation > 0.0
            && self.relaxation <= 1.0
            && self.growth >= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "invalid step control {self:?}"
            )))
        }
    }
}

/// Affine map between `(u, v)` and `(T, P₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldScaling {
    pub t_ref: f64,
    pub delta_t: f64,
    pub p1_ref: f64,
    pub delta_p: f64,
}

impl FieldScaling {
    pub fn of(frame: &ReferenceFrame) -> Self {
        FieldScaling {
            t_ref: frame.t_ref,
            delta_t: frame.delta_t,
            p1_ref: frame.p1_ref,
            delta_p: frame.delta_p,
        }
    }

    pub fn unscale(&self, u: f64, v: f64) -> (f64, f64) {
        (
            self.t_ref + v * self.delta_t,
            self.p1_ref + u * self.delta_p,
        )
    }
}

/// How the starred coefficients depend on the state.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(clippy::large_enum_variant)]
pub enum CoefficientModel {
    /// All starred coefficients equal to one: a linear problem.
    Frozen,
    /// Starred coefficients of a material, evaluated node by node.
    Material {
        material: MaterialProperties,
        constants: PhysicalConstants,
        scaling: FieldScaling,
        reference: CoefficientSet,
    },
}

/// Everything the stepper sees. Two designs are dynamically similar exactly
/// when their problems coincide.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionlessProblem {
    pub numbers: DimensionlessNumbers,
    pub model: CoefficientModel,
    pub grid_points: usize,
    pub end_time: f64,
    pub forcing: Forcing,
    pub initial: InitialState,
    pub step: StepControl,
    /// Sorted times at which the fields are stored, in `[0, end_time]`.
    pub output_times: Vec<f64>,
}

impl DimensionlessProblem {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 3 {
            return Err(Error::InvalidInput(format!(
                "need at least 3 grid points, got {}",
                self.grid_points
            )));
        }
        if !(self.end_time > 0.0 && self.end_time.is_finite()) {
            return Err(Error::InvalidInput("end time must be positive".into()));
        }
        for s in [self.forcing.u, self.forcing.v] {
            if !(s.period > 0.0) {
                return Err(Error::InvalidInput(
                    "forcing period must be positive".into(),
                ));
            }
        }
        if let InitialState::Profile { u, v } = &self.initial {
            if u.len() != self.grid_points || v.len() != self.grid_points {
                return Err(Error::InvalidInput(format!(
                    "initial profile must have {} values",
                    self.grid_points
                )));
            }
        }
        let n = &self.numbers;
        for (name, x) in [("fo_m", n.fo_m), ("fo_q", n.fo_q)] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive")));
            }
        }
        for x in n.values() {
            if !x.is_finite() {
                return Err(Error::InvalidInput(
                    "non-finite dimensionless number".into(),
                ));
            }
        }
        self.step.validate()
    }

    /// Same problem up to `tol` relative differences in the numbers and
    /// forcing, and exactly the same model, grid and controls.
    pub fn matches(&self, other: &DimensionlessProblem, tol: f64) -> bool {
        let close = |a: f64, b: f64| relative_difference(a, b) <= tol;
        let sin_close = |a: &Sinusoid, b: &Sinusoid| {
            close(a.mean, b.mean)
                && close(a.amplitude, b.amplitude)
                && close(a.period, b.period)
                && close(a.phase, b.phase)
        };
        self.model == other.model
            && self.grid_points == other.grid_points
            && self.initial == other.initial
            && self.step == other.step
            && close(self.end_time, other.end_time)
            && self.output_times.len() == other.output_times.len()
            && self
                .output_times
                .iter()
                .zip(&other.output_times)
                .all(|(a, b)| close(*a, *b))
            && self.numbers.max_relative_difference(&other.numbers) <= tol
            && sin_close(&self.forcing.u, &other.forcing.u)
            && sin_close(&self.forcing.v, &other.forcing.v)
    }

    /// Node positions `χᵢ = i/(N−1)`.
    pub fn grid(&self) -> Vec<f64> {
        grid(self.grid_points)
    }

    fn max_step(&self) -> f64 {
        self.step
            .max_step
            .unwrap_or_else(|| self.forcing.u.period.min(self.forcing.v.period) / 48.0)
    }
}

pub fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// Control-volume widths: `h` inside, `h/2` at both ends.
pub fn cell_volumes(n: usize) -> Vec<f64> {
    let h = 1.0 / (n - 1) as f64;
    (0..n)
        .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
        .collect()
}

/// Coefficients of one Picard iterate.
struct NodeCoefficients {
    starred: Vec<StarredCoefficients>,
    /// Storage function `w` and its partial derivatives.
    w: Vec<f64>,
    dw_du: Vec<f64>,
    dw_dv: Vec<f64>,
    clamped: usize,
}

impl CoefficientModel {
    fn evaluate(&self, eta: f64, u: &[f64], v: &[f64]) -> Result<NodeCoefficients> {
        match self {
            CoefficientModel::Frozen => Ok(NodeCoefficients {
                starred: vec![StarredCoefficients::UNIT; u.len()],
                w: u.iter().zip(v).map(|(u, v)| u - eta * v).collect(),
                dw_du: vec![1.0; u.len()],
                dw_dv: vec![-eta; u.len()],
                clamped: 0,
            }),
            CoefficientModel::Material {
                material,
                constants,
                scaling,
                reference,
            } => {
                let n = u.len();
                let mut starred = Vec::with_capacity(n);
                let mut w = Vec::with_capacity(n);
                let mut dw_du = Vec::with_capacity(n);
                let mut dw_dv = Vec::with_capacity(n);
                let mut clamped = 0;
                let w_scale = 1.0 / (reference.cm * scaling.delta_p);
                for (&ui, &vi) in u.iter().zip(v) {
                    let (t, p1) = scaling.unscale(ui, vi);
                    let (c, phi, was_clamped) =
                        thermo::coefficients_clamped(constants, material, t, p1)?;
                    let omega = material.omega1 * (phi / (1.0 - phi)).powf(material.alpha1);
                    let slope = material.alpha1 * omega / ((1.0 - phi) * phi);
                    // ∂ω/∂T at fixed P₁ through φ = P₁/Psat(T)
                    let dw_dt = -slope * phi * constants.alpha / (t - constants.ta);
                    starred.push(StarredCoefficients::from_ratio(&c, reference));
                    w.push(omega * w_scale);
                    dw_du.push(c.cm / reference.cm);
                    dw_dv.push(dw_dt * scaling.delta_t * w_scale);
                    clamped += was_clamped as usize;
                }
                Ok(NodeCoefficients {
                    starred,
                    w,
                    dw_du,
                    dw_dv,
                    clamped,
                })
            }
        }
    }

    fn is_linear(&self) -> bool {
        matches!(self, CoefficientModel::Frozen)
    }
}

fn harmonic(a: f64, b: f64) -> f64 {
    if a + b == 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

/// One linear solve of the implicit step with coefficients frozen at the
/// iterate `(uk, vk)`.
#[allow(clippy::too_many_arguments)]
fn linear_step(
    p: &DimensionlessProblem,
    coef: &NodeCoefficients,
    volumes: &[f64],
    uk: &[f64],
    vk: &[f64],
    w_old: &[f64],
    v_old: &[f64],
    dt: f64,
    tau_new: f64,
) -> Option<Vec<Vector2<f64>>> {
    let n = p.grid_points;
    let h = 1.0 / (n - 1) as f64;
    let nb = &p.numbers;
    let s = &coef.starred;
    let mut lower = vec![Matrix2::zeros(); n];
    let mut diag = vec![Matrix2::zeros(); n];
    let mut upper = vec![Matrix2::zeros(); n];
    let mut rhs = vec![Vector2::zeros(); n];

    for i in 0..n {
        let a = volumes[i] / dt;
        let si = &s[i];
        let (wu, wv) = (coef.dw_du[i], coef.dw_dv[i]);
        diag[i][(0, 0)] += a * wu;
        diag[i][(0, 1)] += a * wv;
        diag[i][(1, 1)] += a * si.cq;
        rhs[i][0] = a * (w_old[i] - coef.w[i] + wu * uk[i] + wv * vk[i]);
        rhs[i][1] = a * si.cq * v_old[i];
    }
    for i in 0..n - 1 {
        let j = i + 1;
        let km = nb.fo_m * harmonic(s[i].km, s[j].km) / h;
        let kmq = nb.fo_m * nb.delta * harmonic(s[i].kmq, s[j].kmq) / h;
        let kq = nb.fo_q * harmonic(s[i].kq, s[j].kq) / h;
        let kqm = nb.fo_q * nb.gamma * harmonic(s[i].kqm, s[j].kqm) / h;
        // row i, neighbour j
        let (ri, rj) = (s[i].r12, s[j].r12);
        diag[i] += Matrix2::new(km, kmq, ri * kqm, kq);
        upper[i] -= Matrix2::new(km, kmq, ri * kqm, kq);
        // row j, neighbour i
        diag[j] += Matrix2::new(km, kmq, rj * kqm, kq);
        lower[j] -= Matrix2::new(km, kmq, rj * kqm, kq);
    }
    let u_inf = p.forcing.u.value(tau_new);
    let v_inf = p.forcing.v.value(tau_new);
    let bm = nb.fo_m * nb.bi_m;
    let bq = nb.fo_q * nb.bi_q;
    let bqm = nb.fo_q * nb.gamma * s[0].r12 * nb.bi_qm;
    diag[0] += Matrix2::new(bm, 0.0, bqm, bq);
    rhs[0] += Vector2::new(bm * u_inf, bq * v_inf + bqm * u_inf);

    block_tridiag::solve(&lower, &diag, &upper, &rhs)
}

/// Outcome of a single attempted step.
enum StepOutcome {
    Accepted {
        u: Vec<f64>,
        v: Vec<f64>,
        w: Vec<f64>,
        iterations: usize,
        clamped: usize,
    },
    Rejected,
}

fn attempt_step(
    p: &DimensionlessProblem,
    volumes: &[f64],
    u_old: &[f64],
    v_old: &[f64],
    w_old: &[f64],
    dt: f64,
    tau_new: f64,
) -> StepOutcome {
    let ctl = &p.step;
    let mut u = u_old.to_vec();
    let mut v = v_old.to_vec();
    for iteration in 1..=ctl.max_iterations {
        let coef = match p.model.evaluate(p.numbers.eta, &u, &v) {
            Ok(c) => c,
            Err(_) => return StepOutcome::Rejected,
        };
        let Some(x) = linear_step(p, &coef, volumes, &u, &v, w_old, v_old, dt, tau_new) else {
            return StepOutcome::Rejected;
        };
        let mut change = 0.0_f64;
        for (i, xi) in x.iter().enumerate() {
            let du = ctl.relaxation * (xi[0] - u[i]);
            let dv = ctl.relaxation * (xi[1] - v[i]);
            change = change.max(du.abs()).max(dv.abs());
            u[i] += du;
            v[i] += dv;
        }
        if !change.is_finite() {
            return StepOutcome::Rejected;
        }
        if p.model.is_linear() && ctl.relaxation == 1.0 {
            let coef = p
                .model
                .evaluate(p.numbers.eta, &u, &v)
                .expect("frozen model");
            return StepOutcome::Accepted {
                u,
                v,
                w: coef.w,
                iterations: 1,
                clamped: 0,
            };
        }
        if change < ctl.tolerance {
            return match p.model.evaluate(p.numbers.eta, &u, &v) {
                Ok(coef) => StepOutcome::Accepted {
                    u,
                    v,
                    w: coef.w,
                    iterations: iteration,
                    clamped: coef.clamped,
                },
                Err(_) => StepOutcome::Rejected,
            };
        }
    }
    StepOutcome::Rejected
}

/// Counters of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SolverStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub picard_iterations: usize,
    /// Node evaluations at accepted states where `φ` had to be clamped.
    pub clamp_events: usize,
}

/// Dimensionless fields at the output times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionlessSolution {
    pub chi: Vec<f64>,
    pub times: Vec<f64>,
    /// `u[k][i]` at `times[k]`, `chi[i]`.
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub stats: SolverStats,
}

impl DimensionlessSolution {
    /// Linear interpolation of a stored field in space.
    pub fn probe(field: &[f64], chi: f64) -> f64 {
        let n = field.len();
        let x = chi.clamp(0.0, 1.0) * (n - 1) as f64;
        let i = (x.floor() as usize).min(n - 2);
        let f = x - i as f64;
        field[i] * (1.0 - f) + field[i + 1] * f
    }

    /// Index of the stored time closest to `tau`.
    pub fn time_index(&self, tau: f64) -> usize {
        let mut best = 0;
        for (k, t) in self.times.iter().enumerate() {
            if (t - tau).abs() < (self.times[best] - tau).abs() {
                best = k;
            }
        }
        best
    }

    /// Largest absolute difference between the fields of two solutions
    /// with the same layout.
    pub fn max_difference(&self, other: &DimensionlessSolution) -> f64 {
        let mut d = 0.0_f64;
        for (a, b) in self.u.iter().flatten().zip(other.u.iter().flatten()) {
            d = d.max((a - b).abs());
        }
        for (a, b) in self.v.iter().flatten().zip(other.v.iter().flatten()) {
            d = d.max((a - b).abs());
        }
        if self.times.len() != other.times.len() {
            d = f64::INFINITY;
        }
        d
    }
}

/// Runs the problem, calling `observer(τ, u, v, w)` after the initial state
/// and after every accepted step.
pub fn solve_with_observer(
    p: &DimensionlessProblem,
    mut observer: impl FnMut(f64, &[f64], &[f64], &[f64]),
) -> Result<SolverStats> {
    p.validate()?;
    let n = p.grid_points;
    let volumes = cell_volumes(n);
    let (mut u, mut v) = match &p.initial {
        InitialState::Uniform { u, v } => (vec![*u; n], vec![*v; n]),
        InitialState::Profile { u, v } => (u.clone(), v.clone()),
    };
    let init = p
        .model
        .evaluate(p.numbers.eta, &u, &v)
        .map_err(|e| Error::NumericalFailure {
            time: 0.0,
            message: format!("initial state: {e}"),
        })?;
    let mut w = init.w;
    let mut stats = SolverStats {
        clamp_events: init.clamped,
        ..SolverStats::default()
    };
    observer(0.0, &u, &v, &w);

    let max_step = p.max_step();
    let mut step = p.step.initial_step.min(max_step);
    let mut tau = 0.0;
    let mut targets = p
        .output_times
        .iter()
        .copied()
        .filter(|t| *t > 0.0 && *t < p.end_time)
        .chain(std::iter::once(p.end_time))
        .peekable();
    while let Some(&target) = targets.peek() {
        if tau >= target {
            targets.next();
            continue;
        }
        let mut halvings = 0;
        loop {
            let mut dt = step.min(target - tau);
            let mut tau_new = tau + dt;
            if target - tau_new <= 1e-12 * target.abs().max(1.0) {
                tau_new = target;
                dt = target - tau;
            }
            match attempt_step(p, &volumes, &u, &v, &w, dt, tau_new) {
                StepOutcome::Accepted {
                    u: un,
                    v: vn,
                    w: wn,
                    iterations,
                    clamped,
                } => {
                    if un.iter().chain(&vn).any(|x| !x.is_finite()) {
                        return Err(Error::NumericalFailure {
                            time: tau_new,
                            message: "non-finite field".into(),
                        });
                    }
                    if stats.accepted_steps >= p.step.max_steps {
                        return Err(Error::NumericalFailure {
                            time: tau,
                            message: format!("step limit of {} reached", p.step.max_steps),
                        });
                    }
                    u = un;
                    v = vn;
                    w = wn;
                    tau = tau_new;
                    stats.accepted_steps += 1;
                    stats.picard_iterations += iterations;
                    stats.clamp_events += clamped;
                    if iterations * 4 <= p.step.max_iterations && dt >= step {
                        step = (step * p.step.growth).min(max_step);
                    }
                    observer(tau, &u, &v, &w);
                    break;
                }
                StepOutcome::Rejected => {
                    stats.rejected_steps += 1;
                    halvings += 1;
                    if halvings > p.step.max_halvings {
                        return Err(Error::NonConvergence {
                            time: tau,
                            halvings: p.step.max_halvings,
                        });
                    }
                    step = 0.5 * dt;
                }
            }
        }
    }
    Ok(stats)
}

/// Runs the problem and stores the fields at the output times (plus the
/// initial and final states).
pub fn solve(p: &DimensionlessProblem) -> Result<DimensionlessSolution> {
    let mut wanted: Vec<f64> = p
        .output_times
        .iter()
        .copied()
        .filter(|t| *t >= 0.0 && *t <= p.end_time)
        .collect();
    wanted.push(0.0);
    wanted.push(p.end_time);
    wanted.sort_by(f64::total_cmp);
    wanted.dedup();
    let mut times = Vec::new();
    let mut us = Vec::new();
    let mut vs = Vec::new();
    let mut next = 0;
    let stats = solve_with_observer(p, |tau, u, v, _| {
        while next < wanted.len() && wanted[next] <= tau {
            if wanted[next] == tau {
                times.push(tau);
                us.push(u.to_vec());
                vs.push(v.to_vec());
            }
            next += 1;
        }
    })?;
    Ok(DimensionlessSolution {
        chi: p.grid(),
        times,
        u: us,
        v: vs,
        stats,
    })
}

/// Sinusoidal climate in dimensionless fields; the period comes from the
/// design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForcingSpec {
    pub u_mean: f64,
    pub u_amplitude: f64,
    pub v_mean: f64,
    pub v_amplitude: f64,
    /// Phase of `u∞` relative to `v∞`, radians.
    pub u_phase: f64,
}

impl Default for ForcingSpec {
    fn default() -> Self {
        ForcingSpec {
            u_mean: 0.2,
            u_amplitude: 0.08,
            v_mean: 0.5,
            v_amplitude: 0.2,
            u_phase: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Material,
    Frozen,
}

/// A physical simulation: a design, a climate and numerical controls.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub design: Design,
    /// Field scaling and evaluation state; its length, time and surface
    /// are replaced by the design's.
    pub frame: ReferenceFrame,
    pub grid_points: usize,
    /// Dimensionless end time.
    pub end_time: f64,
    pub forcing: ForcingSpec,
    pub initial: InitialState,
    pub step: StepControl,
    /// Dimensionless spacing of stored outputs.
    pub output_interval: f64,
    /// Extra dimensionless output times.
    pub extra_outputs: Vec<f64>,
    /// Probe positions for the series output.
    pub probes: Vec<f64>,
    pub model: ModelKind,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialFile {
    u: f64,
    v: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulationFile {
    material: String,
    length: f64,
    time: DurationValue,
    period: DurationValue,
    hq: f64,
    hm: f64,
    grid_points: Option<usize>,
    periods: Option<f64>,
    end_time: Option<f64>,
    outputs_per_period: Option<f64>,
    probes: Option<Vec<f64>>,
    model: Option<ModelKind>,
    forcing: Option<ForcingSpec>,
    initial: Option<InitialFile>,
    step: Option<StepControl>,
}

impl SimulationConfig {
    pub const DEFAULT_PERIODS: f64 = 10.0;
    pub const DEFAULT_OUTPUTS_PER_PERIOD: f64 = 24.0;

    /// Default climate and controls for a design, run for ten periods.
    pub fn for_design(design: Design) -> Self {
        let period = design.dimensionless_period();
        let forcing = ForcingSpec::default();
        SimulationConfig {
            design,
            frame: ReferenceFrame::default(),
            grid_points: 101,
            end_time: Self::DEFAULT_PERIODS * period,
            initial: InitialState::Uniform {
                u: forcing.u_mean,
                v: forcing.v_mean,
            },
            forcing,
            step: StepControl::default(),
            output_interval: period / Self::DEFAULT_OUTPUTS_PER_PERIOD,
            extra_outputs: Vec::new(),
            probes: vec![0.0, 0.1, 0.5, 1.0],
            model: ModelKind::Material,
        }
    }

    /// Parses a TOML simulation file.
    ///
    /// ```toml
    /// material = "Wood Fiber 1"
    /// length = 0.2
    /// time = "365d"
    /// period = "24h"
    /// hq = 5.0
    /// hm = 5e-9
    /// periods = 10
    /// [forcing]
    /// v_mean = 0.5
    /// v_amplitude = 0.5
    /// ```
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: SimulationFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let design = Design {
            material: raw.material,
            length: raw.length,
            time: raw.time.seconds()?,
            period: raw.period.seconds()?,
            surface: dimensionless::SurfaceCoefficients::new(raw.hq, raw.hm),
        };
        design.validate()?;
        let mut cfg = SimulationConfig::for_design(design);
        let period = cfg.design.dimensionless_period();
        if let Some(n) = raw.grid_points {
            cfg.grid_points = n;
        }
        match (raw.end_time, raw.periods) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give either end_time or periods, not both".into(),
                ))
            }
            (Some(t), None) => cfg.end_time = t,
            (None, Some(k)) => cfg.end_time = k * period,
            (None, None) => {}
        }
        if let Some(k) = raw.outputs_per_period {
            cfg.output_interval = period / k;
        }
        if let Some(p) = raw.probes {
            cfg.probes = p;
        }
        if let Some(m) = raw.model {
            cfg.model = m;
        }
        if let Some(f) = raw.forcing {
            cfg.forcing = f;
            cfg.initial = InitialState::Uniform {
                u: f.u_mean,
                v: f.v_mean,
            };
        }
        if let Some(i) = raw.initial {
            cfg.initial = InitialState::Uniform { u: i.u, v: i.v };
        }
        if let Some(s) = raw.step {
            cfg.step = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.design.validate()?;
        if self.grid_points < 3 {
            return Err(Error::InvalidInput("need at least 3 grid points".into()));
        }
        if !(self.end_time > 0.0 && self.end_time.is_finite()) {
            return Err(Error::InvalidInput("end time must be positive".into()));
        }
        if !(self.output_interval > 0.0) {
            return Err(Error::InvalidInput(
                "output interval must be positive".into(),
            ));
        }
        if self.probes.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::InvalidInput("probes must lie in [0, 1]".into()));
        }
        self.step.validate()
    }

    /// Frame of the design.
    pub fn design_frame(&self) -> ReferenceFrame {
        self.design.frame(&self.frame)
    }

    /// Copy with the design scaled by `pi`; dimensionless settings kept.
    pub fn scaled(&self, pi: f64) -> Result<Self> {
        let mut c = self.clone();
        c.design = similarity::dynamic_scale(&self.design, pi)?.design;
        Ok(c)
    }

    pub fn problem(
        &self,
        pc: &PhysicalConstants,
        mat: &MaterialProperties,
    ) -> Result<DimensionlessProblem> {
        self.validate()?;
        let frame = self.design_frame();
        let reference = dimensionless::reference_coefficients(pc, mat, &frame)?;
        let numbers = dimensionless::numbers_from(&reference, &frame);
        let period = self.design.dimensionless_period();
        let f = &self.forcing;
        let mut output_times: Vec<f64> = Vec::new();
        let count = (self.end_time / self.output_interval + 1e-9).floor() as usize;
        for k in 0..=count {
            output_times.push(k as f64 * self.output_interval);
        }
        output_times.extend(self.extra_outputs.iter().copied());
        output_times.push(self.end_time);
        output_times.retain(|t| *t >= 0.0 && *t <= self.end_time);
        output_times.sort_by(f64::total_cmp);
        output_times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1e-300));
        let model = match self.model {
            ModelKind::Frozen => CoefficientModel::Frozen,
            ModelKind::Material => CoefficientModel::Material {
                material: mat.clone(),
                constants: *pc,
                scaling: FieldScaling::of(&frame),
                reference,
            },
        };
        let numbers = match self.model {
            ModelKind::Frozen => DimensionlessNumbers {
                delta: 0.0,
                gamma: 0.0,
                eta: 0.0,
                ..numbers
            },
            ModelKind::Material => numbers,
        };
        let problem = DimensionlessProblem {
            numbers,
            model,
            grid_points: self.grid_points,
            end_time: self.end_time,
            forcing: Forcing {
                u: Sinusoid {
                    mean: f.u_mean,
                    amplitude: f.u_amplitude,
                    period,
                    phase: f.u_phase,
                },
                v: Sinusoid {
                    mean: f.v_mean,
                    amplitude: f.v_amplitude,
                    period,
                    phase: 0.0,
                },
            },
            initial: self.initial.clone(),
            step: self.step,
            output_times,
        };
        problem.validate()?;
        Ok(problem)
    }
}

/// Fields of a run in dimensionless and physical form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSolution {
    pub problem: DimensionlessProblem,
    pub dimensionless: DimensionlessSolution,
    /// Physical times, s.
    pub seconds: Vec<f64>,
    /// Physical positions, m.
    pub positions: Vec<f64>,
    /// K, per time and node.
    pub temperature: Vec<Vec<f64>>,
    /// Pa.
    pub vapor_pressure: Vec<Vec<f64>>,
    /// Clamped into the open unit interval.
    pub relative_humidity: Vec<Vec<f64>>,
    /// kg/m³.
    pub moisture_content: Vec<Vec<f64>>,
    /// Mean volumetric internal energy `(ρ₀c₀ + c₂ω)(T − Tc)`, J/m³.
    pub energy: Vec<f64>,
    /// Mean moisture content, kg/m³.
    pub moisture: Vec<f64>,
}

impl FieldSolution {
    pub fn clamp_events(&self) -> usize {
        self.dimensionless.stats.clamp_events
    }
}

/// Energy and moisture series recomputed from stored fields.
pub fn derived_outputs(
    pc: &PhysicalConstants,
    mat: &MaterialProperties,
    frame: &ReferenceFrame,
    sol: &DimensionlessSolution,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let volumes = cell_volumes(sol.chi.len());
    let mut energy = Vec::with_capacity(sol.times.len());
    let mut moisture = Vec::with_capacity(sol.times.len());
    for (u, v) in sol.u.iter().zip(&sol.v) {
        let (mut e, mut m) = (0.0, 0.0);
        for ((ui, vi), vol) in u.iter().zip(v).zip(&volumes) {
            let (t, p1) = frame.unscale_fields(*ui, *vi);
            let (omega, _, _) = thermo::moisture_content_clamped(pc, mat, t, p1)?;
            e += vol * (mat.rho0 * mat.c0 + pc.c2 * omega) * (t - pc.tc);
            m += vol * omega;
        }
        energy.push(e);
        moisture.push(m);
    }
    Ok((energy, moisture))
}

/// Builds the problem of `cfg`, runs it and attaches physical fields.
pub fn simulate(
    pc: &PhysicalConstants,
    db: &MaterialDb,
    cfg: &SimulationConfig,
) -> Result<FieldSolution> {
    let mat = db.resolve(&cfg.design.material)?;
    let problem = cfg.problem(pc, mat)?;
    let sol = solve(&problem)?;
    let frame = cfg.design_frame();
    let (energy, moisture) = derived_outputs(pc, mat, &frame, &sol)?;
    let mut temperature = Vec::new();
    let mut vapor_pressure = Vec::new();
    let mut relative_humidity = Vec::new();
    let mut moisture_content = Vec::new();
    for (u, v) in sol.u.iter().zip(&sol.v) {
        let mut tr = Vec::with_capacity(u.len());
        let mut pr = Vec::with_capacity(u.len());
        let mut fr = Vec::with_capacity(u.len());
        let mut wr = Vec::with_capacity(u.len());
        for (ui, vi) in u.iter().zip(v) {
            let (t, p1) = frame.unscale_fields(*ui, *vi);
            let (omega, phi, _) = thermo::moisture_content_clamped(pc, mat, t, p1)?;
            tr.push(t);
            pr.push(p1);
            fr.push(phi);
            wr.push(omega);
        }
        temperature.push(tr);
        vapor_pressure.push(pr);
        relative_humidity.push(fr);
        moisture_content.push(wr);
    }
    Ok(FieldSolution {
        seconds: sol.times.iter().map(|t| t * frame.time).collect(),
        positions: sol.chi.iter().map(|x| x * frame.length).collect(),
        problem,
        dimensionless: sol,
        temperature,
        vapor_pressure,
        relative_humidity,
        moisture_content,
        energy,
        moisture,
    })
}

/// One observation point of the similarity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeComparison {
    pub chi: f64,
    pub tau: f64,
    /// Position in the original and scaled designs, m.
    pub x: (f64, f64),
    /// Time in the original and scaled designs, s.
    pub t: (f64, f64),
    pub temperature: (f64, f64),
    pub vapor_pressure: (f64, f64),
    /// Largest relative difference of temperature and vapour pressure.
    pub relative_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityVerification {
    pub pi: f64,
    /// The two dimensionless problems coincide (model, grid, controls
    /// exactly; numbers and forcing to 1e−12).
    pub problems_match: bool,
    /// Max-norm difference of the dimensionless fields over all outputs.
    pub field_difference: f64,
    pub probes: Vec<ProbeComparison>,
    pub max_probe_difference: f64,
    pub original: FieldSolution,
    pub scaled: FieldSolution,
}

/// Observation positions and fractions of the end time.
pub const PROBE_POSITIONS: [f64; 2] = [0.1, 0.5];
pub const PROBE_TIME_FRACTIONS: [f64; 2] = [0.75, 0.9];

/// Runs `cfg` and its `Π`-scaled copy and compares both solutions.
pub fn verify_dynamic_similarity(
    pc: &PhysicalConstants,
    db: &MaterialDb,
    cfg: &SimulationConfig,
    pi: f64,
) -> Result<SimilarityVerification> {
    let mut cfg = cfg.clone();
    cfg.extra_outputs
        .extend(PROBE_TIME_FRACTIONS.iter().map(|f| f * cfg.end_time));
    let scaled_cfg = cfg.scaled(pi)?;
    let original = simulate(pc, db, &cfg)?;
    let scaled = simulate(pc, db, &scaled_cfg)?;
    let problems_match = original.problem.matches(&scaled.problem, 1e-12);
    let field_difference = original.dimensionless.max_difference(&scaled.dimensionless);
    let (fa, fb) = (cfg.design_frame(), scaled_cfg.design_frame());
    let mut probes = Vec::new();
    for &frac in &PROBE_TIME_FRACTIONS {
        let tau = frac * cfg.end_time;
        let ka = original.dimensionless.time_index(tau);
        let kb = scaled.dimensionless.time_index(tau);
        for &chi in &PROBE_POSITIONS {
            let at = |s: &DimensionlessSolution, k: usize, frame: &ReferenceFrame| {
                let u = DimensionlessSolution::probe(&s.u[k], chi);
                let v = DimensionlessSolution::probe(&s.v[k], chi);
                frame.unscale_fields(u, v)
            };
            let (ta, pa) = at(&original.dimensionless, ka, &fa);
            let (tb, pb) = at(&scaled.dimensionless, kb, &fb);
            probes.push(ProbeComparison {
                chi,
                tau,
                x: (chi * fa.length, chi * fb.length),
                t: (
                    original.dimensionless.times[ka] * fa.time,
                    scaled.dimensionless.times[kb] * fb.time,
                ),
                temperature: (ta, tb),
                vapor_pressure: (pa, pb),
                relative_difference: relative_difference(ta, tb).max(relative_difference(pa, pb)),
            });
        }
    }
    let max_probe_difference = probes
        .iter()
        .map(|p| p.relative_difference)
        .fold(0.0, f64::max);
    Ok(SimilarityVerification {
        pi,
        problems_match,
        field_difference,
        probes,
        max_probe_difference,
        original,
        scaled,
    })
}
