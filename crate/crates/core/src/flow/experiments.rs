//! Cone-invariance ensembles and discrete checks of the differential
//! inequalities along reaction trajectories.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde_json::{json, Value};

use super::{integrate, FlowTrace, FunctionalId, StepControl};
use crate::cones::{self, ConeId, OptimizerConfig};
use crate::error::{Error, Result};
use crate::rng;
use crate::sampling::{random_tensor, shift_into_cone, SamplerConfig};
use crate::tensor::{Kind, Tensor};

/// Ricci eigenvalue gap (relative) below which a time is treated as a
/// crossing and skipped.
pub const CROSSING_GAP: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvarianceConfig {
    pub cone: ConeId,
    pub kind: Kind,
    pub dim: usize,
    pub count: usize,
    /// Initial defect relative to the norm; 0 samples the boundary.
    pub margin: f64,
    /// Second cone the samples are shifted into as well (on its boundary if
    /// the first shift left them outside).
    pub also: Option<ConeId>,
    pub ctrl: StepControl,
    /// Optimizer used by the sampler.
    pub sampler: OptimizerConfig,
    pub seed: u64,
}

impl InvarianceConfig {
    /// Boundary samples, flowed until the scalar curvature doubles.
    pub fn new(cone: ConeId, kind: Kind, dim: usize, count: usize, seed: u64) -> Self {
        Self {
            cone,
            kind,
            dim,
            count,
            margin: 0.0,
            also: None,
            ctrl: StepControl { stop_factor: 2.0, stop_floor: 0.0, t_end: 100.0, rtol: 1e-9, ..Default::default() },
            sampler: OptimizerConfig { restarts: 32, oracle_samples: 0, ..Default::default() },
            seed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrajectoryOutcome {
    pub index: usize,
    pub seed: u64,
    /// Sampled initial defect, relative to the norm.
    pub initial_defect: f64,
    /// Minimum over saved times of `defect / |T(t)|`.
    pub worst_defect: f64,
    pub worst_time: f64,
    /// Minimum of `λ₁ / |T|` and `(λ₁ + λ₂) / |T|`.
    pub worst_ric_min: f64,
    pub worst_ric_min2: f64,
    pub steps: usize,
    pub final_time: f64,
    pub blowup: bool,
    pub error: Option<String>,
}

impl TrajectoryOutcome {
    pub fn to_json(&self) -> Value {
        json!({
            "index": self.index,
            "seed": self.seed,
            "initial_defect": self.initial_defect,
            "worst_defect": self.worst_defect,
            "worst_time": self.worst_time,
            "worst_ric_min": self.worst_ric_min,
            "worst_ric_min2": self.worst_ric_min2,
            "steps": self.steps,
            "final_time": self.final_time,
            "blowup": self.blowup,
            "error": self.error,
        })
    }
}

#[derive(Clone, Debug)]
pub struct InvarianceReport {
    pub cone: ConeId,
    pub kind: Kind,
    pub dim: usize,
    pub trajectories: Vec<TrajectoryOutcome>,
}

impl InvarianceReport {
    fn worst(&self, f: impl Fn(&TrajectoryOutcome) -> f64) -> f64 {
        self.trajectories.iter().map(f).fold(f64::INFINITY, f64::min)
    }

    /// Most negative relative defect over all trajectories and times.
    pub fn worst_excursion(&self) -> f64 {
        self.worst(|t| t.worst_defect)
    }

    pub fn worst_ric_min(&self) -> f64 {
        self.worst(|t| t.worst_ric_min)
    }

    pub fn worst_ric_min2(&self) -> f64 {
        self.worst(|t| t.worst_ric_min2)
    }

    pub fn blowups(&self) -> usize {
        self.trajectories.iter().filter(|t| t.blowup).count()
    }

    pub fn failures(&self) -> usize {
        self.trajectories.iter().filter(|t| t.error.is_some()).count()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "cone": self.cone.to_string(),
            "kind": self.kind.as_str(),
            "dim": self.dim,
            "count": self.trajectories.len(),
            "worst_excursion": self.worst_excursion(),
            "worst_ric_min": self.worst_ric_min(),
            "worst_ric_min2": self.worst_ric_min2(),
            "blowups": self.blowups(),
            "failures": self.failures(),
            "trajectories": self.trajectories.iter().map(|t| t.to_json()).collect::<Vec<_>>(),
        })
    }

    pub const CSV_HEADER: &'static str =
        "index,seed,initial_defect,worst_defect,worst_time,worst_ric_min,worst_ric_min2,steps,final_time,blowup";

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for t in &self.trajectories {
            out.push_str(&format!(
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e},{}\n",
                t.index,
                t.seed,
                t.initial_defect,
                t.worst_defect,
                t.worst_time,
                t.worst_ric_min,
                t.worst_ric_min2,
                t.steps,
                t.final_time,
                t.blowup
            ));
        }
        out
    }
}

/// Unit-norm member of `cone` with relative defect `margin`.
pub(crate) fn unit_cone_sample(
    cone: ConeId,
    also: Option<ConeId>,
    kind: Kind,
    dim: usize,
    margin: f64,
    opt: &OptimizerConfig,
    seed: u64,
) -> Result<(Tensor, f64)> {
    let opt = opt.with_seed(seed);
    let raw = random_tensor(kind, &SamplerConfig::new(dim, seed))?;
    let mut s = shift_into_cone(&raw, cone, margin * raw.norm(), &opt)?;
    if let Some(c2) = also {
        // shifting along the identity only raises the first defect
        if cones::defect(&s.tensor, c2, &opt)?.defect < 0.0 {
            let t = shift_into_cone(&s.tensor, c2, 0.0, &opt)?.tensor;
            s.report = cones::defect(&t, cone, &opt)?;
            s.tensor = t;
        }
    }
    let scale = s.tensor.norm();
    if scale == 0.0 {
        return Err(Error::Sampler("sampled the zero tensor".into()));
    }
    Ok((s.tensor.scaled(1.0 / scale), s.report.defect / scale))
}

fn summarize(index: usize, seed: u64, initial: f64, trace: &FlowTrace, cone: ConeId) -> TrajectoryOutcome {
    let d = trace.column(FunctionalId::Defect(cone)).unwrap_or_default();
    let r1 = trace.column(FunctionalId::RicMin).unwrap_or_default();
    let r2 = trace.column(FunctionalId::RicMin2).unwrap_or_default();
    let mut out = TrajectoryOutcome {
        index,
        seed,
        initial_defect: initial,
        worst_defect: f64::INFINITY,
        worst_time: 0.0,
        worst_ric_min: f64::INFINITY,
        worst_ric_min2: f64::INFINITY,
        steps: trace.accepted,
        final_time: trace.final_time(),
        blowup: false,
        error: None,
    };
    for i in 0..trace.times.len() {
        let s = trace.norms[i].max(f64::MIN_POSITIVE);
        if d[i] / s < out.worst_defect {
            out.worst_defect = d[i] / s;
            out.worst_time = trace.times[i];
        }
        out.worst_ric_min = out.worst_ric_min.min(r1[i] / s);
        out.worst_ric_min2 = out.worst_ric_min2.min(r2[i] / s);
    }
    out
}

/// Samples `count` unit-norm members of the cone (on the boundary unless a
/// margin is set), integrates each, and records the worst relative defect,
/// λ₁ and λ₁ + λ₂ along the way. Blow-ups and integrity failures are recorded
/// per trajectory.
pub fn invariance_experiment(cfg: &InvarianceConfig) -> Result<InvarianceReport> {
    if !cfg.cone.accepts(cfg.kind) {
        return Err(Error::InvalidInput(format!("cone {} does not apply to {} tensors", cfg.cone, cfg.kind.as_str())));
    }
    if cfg.count == 0 {
        return Err(Error::InvalidInput("count must be at least 1".into()));
    }
    if cfg.dim < cfg.cone.min_dim() {
        return Err(Error::InvalidInput(format!("cone {} needs dimension ≥ {}", cfg.cone, cfg.cone.min_dim())));
    }
    cfg.ctrl.validate()?;
    let trajectories = (0..cfg.count)
        .into_par_iter()
        .map(|i| {
            let seed = rng::derive_seed(cfg.seed, i as u64);
            let (t0, initial) = unit_cone_sample(cfg.cone, cfg.also, cfg.kind, cfg.dim, cfg.margin, &cfg.sampler, seed)?;
            run_trajectory(i, seed, initial, &t0, cfg.cone, &cfg.ctrl)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InvarianceReport { cone: cfg.cone, kind: cfg.kind, dim: cfg.dim, trajectories })
}

fn run_trajectory(
    index: usize,
    seed: u64,
    initial: f64,
    t0: &Tensor,
    cone: ConeId,
    ctrl: &StepControl,
) -> Result<TrajectoryOutcome> {
    let tracked = [FunctionalId::Defect(cone), FunctionalId::RicMin, FunctionalId::RicMin2, FunctionalId::Scal];
    let ctrl = StepControl { optimizer: ctrl.optimizer.with_seed(seed), ..*ctrl };
    Ok(match integrate(t0, &ctrl, &tracked) {
        Ok(trace) => summarize(index, seed, initial, &trace, cone),
        Err(Error::Blowup { partial, .. }) => {
            let mut o = summarize(index, seed, initial, &partial, cone);
            o.blowup = true;
            o
        }
        Err(Error::Integrity(msg)) => {
            let mut o = summarize(index, seed, initial, &FlowTrace::default(), cone);
            o.error = Some(msg);
            o
        }
        Err(e) => return Err(e),
    })
}

/// Invariance bookkeeping for given initial states (all of one kind and
/// dimension) instead of sampled ones. States are flowed as given.
pub fn invariance_from_states(cone: ConeId, states: &[Tensor], ctrl: &StepControl, seed: u64) -> Result<InvarianceReport> {
    let first = states.first().ok_or_else(|| Error::InvalidInput("no initial states".into()))?;
    let (kind, dim) = (first.kind(), first.dim());
    if states.iter().any(|t| t.kind() != kind || t.dim() != dim) {
        return Err(Error::InvalidInput("initial states must share kind and dimension".into()));
    }
    if !cone.accepts(kind) || dim < cone.min_dim() {
        return Err(Error::InvalidInput(format!("cone {cone} does not apply to these states")));
    }
    ctrl.validate()?;
    let trajectories = states
        .par_iter()
        .enumerate()
        .map(|(i, t0)| {
            let s = rng::derive_seed(seed, i as u64);
            let scale = t0.norm().max(f64::MIN_POSITIVE);
            let initial = cones::defect(t0, cone, &ctrl.optimizer.with_seed(s))?.defect / scale;
            run_trajectory(i, s, initial, t0, cone, ctrl)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InvarianceReport { cone, kind, dim, trajectories })
}

/// Reaction-level differential inequalities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Inequality {
    /// `dλ₁/dt ≥ λ₁²` for the smallest Kähler Ricci eigenvalue under NOB.
    MinRicci,
    /// `d(λ₁+λ₂)/dt ≥ ½(λ₁+λ₂)²` where `λ₁ + λ₂ ≤ 0`, for weakly PIC
    /// Riemannian tensors. The ½ is the ODE normalization `dR/dt = R² + R#`.
    TwoPlaneRicci,
    /// `dℓ/dt ≤ Scal·ℓ + C ℓ²` wherever `ℓ ≥ 0`, for Kähler tensors.
    SixKey { c: f64 },
}

impl Inequality {
    pub fn tag(&self) -> &'static str {
        match self {
            Inequality::MinRicci => "EQ53",
            Inequality::TwoPlaneRicci => "EQ59",
            Inequality::SixKey { .. } => "SIXKEY",
        }
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Parses `eq53`, `eq59` and `sixkey` (with `C = 0`; set it afterwards).
impl FromStr for Inequality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_', '.'], "").as_str() {
            "eq53" | "minricci" => Ok(Inequality::MinRicci),
            "eq59" | "twoplane" => Ok(Inequality::TwoPlaneRicci),
            "sixkey" | "eq6key" => Ok(Inequality::SixKey { c: 0.0 }),
            _ => Err(Error::InvalidInput(format!("unknown inequality {s:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DiffIneqReport {
    pub which: Inequality,
    /// Interior times where the bound was checked.
    pub checked: usize,
    /// Interior times skipped at eigenvalue crossings.
    pub skipped: usize,
    /// Interior times outside the inequality's domain (e.g. `ℓ < 0`).
    pub not_applicable: usize,
    /// Smallest `(rhs − lhs)/|T|²` over checked times (∞ if none).
    pub worst_margin: f64,
    pub worst_time: f64,
    pub trace: FlowTrace,
}

impl DiffIneqReport {
    pub fn skipped_fraction(&self) -> f64 {
        let total = self.checked + self.skipped;
        if total == 0 {
            0.0
        } else {
            self.skipped as f64 / total as f64
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "inequality": self.which.tag(),
            "c": match self.which { Inequality::SixKey { c } => Some(c), _ => None },
            "checked": self.checked,
            "skipped": self.skipped,
            "not_applicable": self.not_applicable,
            "skipped_fraction": self.skipped_fraction(),
            "worst_margin": if self.worst_margin.is_finite() { json!(self.worst_margin) } else { Value::Null },
            "worst_time": self.worst_time,
            "trace": self.trace.summary_json(),
        })
    }
}

/// Second-order derivative at the middle of three non-uniform points.
fn central_difference(t: [f64; 3], f: [f64; 3]) -> f64 {
    let (h1, h2) = (t[1] - t[0], t[2] - t[1]);
    -h2 / (h1 * (h1 + h2)) * f[0] + (h2 - h1) / (h1 * h2) * f[1] + h1 / (h2 * (h1 + h2)) * f[2]
}

/// Integrates from `t0` and compares central differences of the relevant
/// functional against the claimed bound at every interior saved time.
pub fn differential_inequality_check(t0: &Tensor, which: Inequality, ctrl: &StepControl) -> Result<DiffIneqReport> {
    let scale0 = t0.norm();
    let opt = ctrl.optimizer.with_restarts(ctrl.optimizer.restarts.max(32));
    let require = |cone: ConeId, kind: Kind| -> Result<()> {
        if t0.kind() != kind {
            return Err(Error::InvalidInput(format!("{which} needs a {} tensor", kind.as_str())));
        }
        if t0.dim() < cone.min_dim() {
            return Err(Error::InvalidInput(format!("{which} needs dimension ≥ {}", cone.min_dim())));
        }
        let d = cones::defect(t0, cone, &opt)?.defect;
        if d < -1e-9 * scale0.max(f64::MIN_POSITIVE) {
            return Err(Error::Precondition(format!("initial tensor is outside {cone} (defect {d:.3e})")));
        }
        Ok(())
    };
    let tracked: Vec<FunctionalId> = match which {
        Inequality::MinRicci => {
            require(ConeId::Nob, Kind::Kahler)?;
            vec![FunctionalId::RicMin]
        }
        Inequality::TwoPlaneRicci => {
            require(ConeId::Pic, Kind::Riemann)?;
            vec![FunctionalId::RicMin2]
        }
        Inequality::SixKey { .. } => {
            if t0.kind() != Kind::Kahler || t0.dim() < 2 {
                return Err(Error::InvalidInput("SIXKEY needs a Kähler tensor of complex dimension ≥ 2".into()));
            }
            vec![FunctionalId::NobShift, FunctionalId::Scal]
        }
    };
    let trace = integrate(t0, ctrl, &tracked)?;
    let f = trace.column(tracked[0]).expect("tracked");
    let mut rep = DiffIneqReport {
        which,
        checked: 0,
        skipped: 0,
        not_applicable: 0,
        worst_margin: f64::INFINITY,
        worst_time: 0.0,
        trace: FlowTrace::default(),
    };
    let tm = &trace.times;
    for i in 1..tm.len().saturating_sub(1) {
        let s = trace.norms[i];
        if s == 0.0 {
            // the zero tensor: both sides vanish
            rep.checked += 1;
            rep.worst_margin = rep.worst_margin.min(0.0);
            continue;
        }
        let gap_ok = |lo: usize| {
            (i - 1..=i + 1).all(|j| {
                let sp = &trace.ricci_spectra[j];
                sp.len() <= lo + 1 || sp[lo + 1] - sp[lo] >= CROSSING_GAP * trace.norms[j]
            })
        };
        let d = central_difference([tm[i - 1], tm[i], tm[i + 1]], [f[i - 1], f[i], f[i + 1]]);
        let margin = match which {
            Inequality::MinRicci => {
                if !gap_ok(0) {
                    rep.skipped += 1;
                    continue;
                }
                d - f[i] * f[i]
            }
            Inequality::TwoPlaneRicci => {
                if f[i] > 0.0 {
                    rep.not_applicable += 1;
                    continue;
                }
                if !gap_ok(1) {
                    rep.skipped += 1;
                    continue;
                }
                d - 0.5 * f[i] * f[i]
            }
            Inequality::SixKey { c } => {
                if f[i] < -1e-7 * s {
                    rep.not_applicable += 1;
                    continue;
                }
                let scal = trace.values[i][1];
                scal * f[i] + c * f[i] * f[i] - d
            }
        } / (s * s);
        rep.checked += 1;
        if margin < rep.worst_margin {
            rep.worst_margin = margin;
            rep.worst_time = tm[i];
        }
    }
    rep.trace = trace;
    Ok(rep)
}
