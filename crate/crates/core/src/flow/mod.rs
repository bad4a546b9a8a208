//! Reaction ODEs of the Ricci and Kähler–Ricci flows on curvature-tensor
//! space, `dT/dt = reaction(T)`, with tracked functionals and the
//! invariance and differential-inequality experiments built on them.

mod experiments;
mod rk;

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value};

pub use experiments::{
    differential_inequality_check, invariance_experiment, invariance_from_states, DiffIneqReport, Inequality, InvarianceConfig,
    InvarianceReport, TrajectoryOutcome, CROSSING_GAP,
};

use crate::cones::{self, ConeId, ConeReport, OptimizerConfig, WarmStart};
use crate::error::{Error, Result};
use crate::tensor::{riemann_reaction_raw, Kind, RiemannTensor, Tensor};
use rk::{dopri_step, error_norm, PiController};

/// Smallest step before the integrator declares blow-up.
pub const MIN_STEP: f64 = 1e-14;
/// Largest allowed invariant drift, relative to the tensor norm.
pub const INTEGRITY_TOL: f64 = 1e-6;

/// Quantities recorded along a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FunctionalId {
    Scal,
    /// Smallest Ricci eigenvalue λ₁.
    RicMin,
    /// λ₁ + λ₂.
    RicMin2,
    Defect(ConeId),
    /// `ℓ = −defect(NOB)`, Kähler only.
    NobShift,
}

impl FunctionalId {
    pub fn column(&self) -> String {
        match self {
            FunctionalId::Scal => "scal".into(),
            FunctionalId::RicMin => "ric_min".into(),
            FunctionalId::RicMin2 => "ric_min2".into(),
            FunctionalId::Defect(c) => format!("defect_{}", c.to_string().to_lowercase()),
            FunctionalId::NobShift => "nob_shift".into(),
        }
    }
}

impl fmt::Display for FunctionalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.column())
    }
}

/// Accepts `scal`, `ric-min`, `ric-min2`, `nob-shift` (or `ell`), a cone name
/// (its defect) and `defect(<cone>)`; `-` and `_` are interchangeable.
impl FromStr for FunctionalId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase().replace('-', "_");
        Ok(match t.as_str() {
            "scal" => FunctionalId::Scal,
            "ric_min" | "lambda1" => FunctionalId::RicMin,
            "ric_min2" => FunctionalId::RicMin2,
            "nob_shift" | "ell" => FunctionalId::NobShift,
            _ => {
                let inner = t
                    .strip_prefix("defect(")
                    .and_then(|r| r.strip_suffix(')'))
                    .or_else(|| t.strip_prefix("defect_"))
                    .unwrap_or(&t);
                FunctionalId::Defect(inner.parse()?)
            }
        })
    }
}

/// Step-size control and stopping rules.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    pub dt_init: f64,
    /// Upper bound on the step (keeps the saved grid fine enough for finite
    /// differences).
    pub dt_max: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub t_end: f64,
    /// Stop once `scal ≥ stop_factor · max(scal(0), stop_floor)`.
    pub stop_factor: f64,
    pub stop_floor: f64,
    /// Keep a full tensor snapshot every this many accepted steps.
    pub snapshot_every: usize,
    /// Optimizer for tracked cone defects (warm-started step to step).
    pub optimizer: OptimizerConfig,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            dt_init: 1e-3,
            dt_max: f64::INFINITY,
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 100_000,
            t_end: f64::INFINITY,
            stop_factor: 10.0,
            stop_floor: 1.0,
            snapshot_every: 10,
            optimizer: OptimizerConfig { restarts: 8, oracle_samples: 0, ..Default::default() },
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if !(self.dt_init > 0.0 && self.dt_init.is_finite()) {
            return bad(format!("dt_init must be positive, got {}", self.dt_init));
        }
        if !(self.dt_max > 0.0) {
            return bad(format!("dt_max must be positive, got {}", self.dt_max));
        }
        if !(self.rtol > 0.0 && self.rtol < 1.0 && self.atol > 0.0 && self.atol < 1.0) {
            return bad(format!("rtol and atol must lie in (0, 1), got {} and {}", self.rtol, self.atol));
        }
        if self.max_steps == 0 || self.snapshot_every == 0 {
            return bad("max_steps and snapshot_every must be positive".into());
        }
        if !(self.t_end > 0.0) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.stop_factor > 1.0) {
            return bad(format!("stop_factor must exceed 1, got {}", self.stop_factor));
        }
        Ok(())
    }

    /// Scalar-curvature threshold for a trajectory starting at `scal0`, or
    /// `None` when the guard is inactive.
    fn threshold(&self, scal0: f64) -> Option<f64> {
        let t = self.stop_factor * scal0.max(self.stop_floor);
        (t > 0.0).then_some(t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// Reached `t_end`.
    EndTime,
    /// Scalar curvature crossed the guard.
    ScalGuard,
    MaxSteps,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::EndTime => "t_end",
            StopReason::ScalGuard => "scal_guard",
            StopReason::MaxSteps => "max_steps",
        }
    }
}

/// A recorded trajectory.
#[derive(Clone, Debug, Default)]
pub struct FlowTrace {
    pub tracked: Vec<FunctionalId>,
    pub times: Vec<f64>,
    /// `values[i][j]` is functional `tracked[j]` at `times[i]`.
    pub values: Vec<Vec<f64>>,
    /// Ricci eigenvalues at every saved time (for gap tests).
    pub ricci_spectra: Vec<Vec<f64>>,
    /// Scale (norm) at every saved time.
    pub norms: Vec<f64>,
    /// `(index into times, state)`; always contains the first and last state.
    pub snapshots: Vec<(usize, Tensor)>,
    pub accepted: usize,
    pub rejected: usize,
    /// Largest first-Bianchi (Riemannian) or symmetry (Kähler) residual of an
    /// accepted state before projection, relative to its norm.
    pub max_invariant_drift: f64,
    pub stop: Option<StopReason>,
}

impl FlowTrace {
    pub fn column(&self, id: FunctionalId) -> Option<Vec<f64>> {
        let j = self.tracked.iter().position(|t| *t == id)?;
        Some(self.values.iter().map(|row| row[j]).collect())
    }

    pub fn final_state(&self) -> Option<&Tensor> {
        self.snapshots.last().map(|(_, t)| t)
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn csv_header(&self) -> String {
        let mut h = vec!["t".to_string()];
        h.extend(self.tracked.iter().map(|f| f.column()));
        h.join(",")
    }

    /// CSV with one row per accepted step, full precision.
    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header();
        out.push('\n');
        for (t, row) in self.times.iter().zip(&self.values) {
            out.push_str(&format!("{t:.16e}"));
            for v in row {
                out.push_str(&format!(",{v:.16e}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn summary_json(&self) -> Value {
        json!({
            "tracked": self.tracked.iter().map(|f| f.column()).collect::<Vec<_>>(),
            "rows": self.times.len(),
            "final_time": self.final_time(),
            "accepted": self.accepted,
            "rejected": self.rejected,
            "max_invariant_drift": self.max_invariant_drift,
            "stop": self.stop.map(|s| s.as_str()),
        })
    }
}

/// Right-hand side on flattened states.
fn rhs(kind: Kind, dim: usize, y: &[f64]) -> Vec<f64> {
    match kind {
        // the raw reaction keeps the Bianchi identity by itself; projection
        // happens once per accepted step so the drift stays observable
        Kind::Riemann => riemann_reaction_raw(&RiemannTensor::from_raw_unchecked(dim, y.to_vec())),
        Kind::Kahler => Tensor::from_flat_unchecked(kind, dim, y).reaction().to_flat(),
    }
}

/// Tracks functionals, carrying warm starts for the cone defects.
struct Tracker {
    tracked: Vec<FunctionalId>,
    opt: OptimizerConfig,
    warm: Vec<Option<ConeReport>>,
}

impl Tracker {
    fn new(tracked: &[FunctionalId], t0: &Tensor, opt: OptimizerConfig) -> Result<Self> {
        for f in tracked {
            match f {
                FunctionalId::Defect(c) if !c.accepts(t0.kind()) => {
                    return Err(Error::InvalidInput(format!(
                        "cone {c} does not apply to {} tensors",
                        t0.kind().as_str()
                    )))
                }
                FunctionalId::Defect(c) if t0.dim() < c.min_dim() => {
                    return Err(Error::InvalidInput(format!("cone {c} needs dimension ≥ {}", c.min_dim())))
                }
                FunctionalId::NobShift if t0.kind() != Kind::Kahler => {
                    return Err(Error::InvalidInput("nob_shift needs a Kähler tensor".into()))
                }
                FunctionalId::NobShift if t0.dim() < 2 => {
                    return Err(Error::InvalidInput("nob_shift needs complex dimension ≥ 2".into()))
                }
                _ => {}
            }
        }
        Ok(Self { tracked: tracked.to_vec(), opt, warm: vec![None; tracked.len()] })
    }

    fn eval(&mut self, t: &Tensor, spectrum: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.tracked.len());
        for (j, f) in self.tracked.iter().enumerate() {
            let v = match f {
                FunctionalId::Scal => t.scalar(),
                FunctionalId::RicMin => spectrum.first().copied().unwrap_or(0.0),
                FunctionalId::RicMin2 => spectrum.iter().take(2).sum(),
                FunctionalId::Defect(_) | FunctionalId::NobShift => {
                    let cone = match f {
                        FunctionalId::Defect(c) => *c,
                        _ => ConeId::Nob,
                    };
                    let warm = WarmStart { reports: self.warm[j].iter().collect() };
                    let r = cones::defect_warm(t, cone, &self.opt, &warm)?;
                    let d = r.defect;
                    self.warm[j] = Some(r);
                    if *f == FunctionalId::NobShift {
                        -d
                    } else {
                        d
                    }
                }
            };
            out.push(v);
        }
        Ok(out)
    }
}

fn record(trace: &mut FlowTrace, tracker: &mut Tracker, t: f64, state: &Tensor) -> Result<()> {
    let spectrum = state.ricci_eigenvalues();
    let row = tracker.eval(state, &spectrum)?;
    trace.times.push(t);
    trace.values.push(row);
    trace.ricci_spectra.push(spectrum);
    trace.norms.push(state.norm());
    Ok(())
}

/// Integrates `dT/dt = reaction(T)` from `t0` with an adaptive Dormand–Prince
/// 5(4) pair, recording `tracked` at every accepted step.
///
/// Riemannian states are projected back onto the Bianchi subspace after each
/// accepted step. Fails with [`Error::Blowup`] (carrying the partial trace)
/// when the step size underflows and with [`Error::Integrity`] when the
/// invariants drift beyond [`INTEGRITY_TOL`].
pub fn integrate(t0: &Tensor, ctrl: &StepControl, tracked: &[FunctionalId]) -> Result<FlowTrace> {
    ctrl.validate()?;
    let (kind, dim) = (t0.kind(), t0.dim());
    let mut tracker = Tracker::new(tracked, t0, ctrl.optimizer)?;
    let mut trace = FlowTrace { tracked: tracked.to_vec(), ..Default::default() };
    let mut state = t0.clone();
    record(&mut trace, &mut tracker, 0.0, &state)?;
    trace.snapshots.push((0, state.clone()));
    let guard = ctrl.threshold(t0.scalar());

    let f = |y: &[f64]| rhs(kind, dim, y);
    let mut y = state.to_flat();
    let mut k1 = f(&y);
    let mut t = 0.0;
    let mut h = ctrl.dt_init.min(ctrl.dt_max);
    let mut pi = PiController::new();
    let mut last_snapshot = 0;
    loop {
        if t >= ctrl.t_end {
            trace.stop = Some(StopReason::EndTime);
            break;
        }
        if guard.is_some_and(|g| state.scalar() >= g) {
            trace.stop = Some(StopReason::ScalGuard);
            break;
        }
        if trace.accepted >= ctrl.max_steps {
            trace.stop = Some(StopReason::MaxSteps);
            break;
        }
        if h < MIN_STEP || !h.is_finite() {
            if trace.snapshots.last().map(|s| s.0) != Some(trace.times.len() - 1) {
                trace.snapshots.push((trace.times.len() - 1, state.clone()));
            }
            return Err(Error::Blowup { t, dt: h, partial: Box::new(trace) });
        }
        let h_try = h.min(ctrl.dt_max).min(ctrl.t_end - t);
        let (y_new, k_new, err) = dopri_step(&f, &y, &k1, h_try);
        let e = error_norm(&err, &y, &y_new, ctrl.rtol, ctrl.atol);
        if !e.is_finite() || e > 1.0 {
            h = h_try * if e.is_finite() { pi.reject(e) } else { 0.2 };
            trace.rejected += 1;
            continue;
        }
        t = if h_try == ctrl.t_end - t { ctrl.t_end } else { t + h_try };
        h = h_try * pi.accept(e);
        trace.accepted += 1;

        let raw = Tensor::from_flat_unchecked(kind, dim, &y_new);
        let scale = raw.norm().max(f64::MIN_POSITIVE);
        let drift = raw.symmetry_residual() / scale;
        trace.max_invariant_drift = trace.max_invariant_drift.max(drift);
        if drift > INTEGRITY_TOL {
            return Err(Error::Integrity(format!(
                "invariant drift {drift:.3e} (relative) at t = {t:.6e} exceeds {INTEGRITY_TOL:e}"
            )));
        }
        state = match kind {
            Kind::Riemann => {
                let p = Tensor::from_flat_projected(kind, dim, &y_new)?;
                y = p.to_flat();
                k1 = f(&y);
                p
            }
            Kind::Kahler => {
                y = y_new;
                k1 = k_new;
                raw
            }
        };
        record(&mut trace, &mut tracker, t, &state)?;
        let idx = trace.times.len() - 1;
        if idx - last_snapshot >= ctrl.snapshot_every {
            trace.snapshots.push((idx, state.clone()));
            last_snapshot = idx;
        }
    }
    let last = trace.times.len() - 1;
    if trace.snapshots.last().map(|s| s.0) != Some(last) {
        trace.snapshots.push((last, state));
    }
    Ok(trace)
}

/// Ray constant κ with `reaction(T) = κ T` for a tensor on a ray, or `None`
/// when `reaction(T)` is not parallel to `T` (to `tol` relative).
pub fn ray_constant(t: &Tensor, tol: f64) -> Option<f64> {
    let n2 = t.norm().powi(2);
    if n2 == 0.0 {
        return None;
    }
    let q = t.reaction();
    let a = t.to_flat();
    let b = q.to_flat();
    let k = a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() / n2;
    let off = q.add_scaled(t, -k).norm();
    (off <= tol * q.norm().max(n2)).then_some(k)
}
