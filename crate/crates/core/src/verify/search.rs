//! Constrained sampling and adversarial counterexample search.
//!
//! Search runs a (1+1) evolution strategy on unit-norm tensors, maximizing
//! the claim's violation minus an exterior L1 penalty on the hypothesis
//! defects and the stratum condition. A single hypothesis cone is also
//! restored after every mutation by a shift along the identity. The penalty weight grows geometrically
//! over the stages. Only feasible points are ever reported, and the final
//! candidate of every restart is re-verified (and repaired onto the cone if
//! needed) with the full optimizer.

use rand::Rng;
use rayon::prelude::*;

use super::claims::{claim_frame, evaluate_in_frame, ClaimId, Stratum};
use crate::cones::{self, ConeId, ConeReport, OptimizerConfig, WarmStart};
use crate::error::Result;
use crate::rng;
use crate::sampling::{random_tensor, shift_into_cone, SamplerConfig};
use crate::tensor::{product, Frame, Kind, RiemannTensor, Tensor};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchConfig {
    pub restarts: usize,
    pub stages: usize,
    pub iters_per_stage: usize,
    /// Initial relative mutation size.
    pub sigma: f64,
    pub penalty: f64,
    /// Penalty growth per stage.
    pub ramp: f64,
    /// Feasibility tolerance on normalized defects and stratum excess.
    pub feasibility_tol: f64,
    /// Cheap optimizer used inside the search loop (warm-started).
    pub inner: OptimizerConfig,
    /// Optimizer used for sampling and for the final re-verification.
    pub verify: OptimizerConfig,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            stages: 5,
            iters_per_stage: 20,
            sigma: 0.3,
            penalty: 1.0,
            ramp: 10.0,
            feasibility_tol: 1e-7,
            inner: OptimizerConfig { restarts: 2, oracle_samples: 0, ..Default::default() },
            verify: OptimizerConfig { restarts: 32, oracle_samples: 0, ..Default::default() },
        }
    }
}

/// A claim together with the space searched over.
#[derive(Clone, Debug)]
pub(crate) struct Problem {
    pub claim: ClaimId,
    pub dim: usize,
    /// Dimension of the flat factor prepended to the parameter (kernel claim).
    pub flat_dim: usize,
    pub hypotheses: Vec<ConeId>,
    pub stratum: Option<Stratum>,
}

impl Problem {
    pub fn new(claim: ClaimId, dim: usize, flat_dim: usize) -> Self {
        Self { claim, dim, flat_dim, hypotheses: claim.hypotheses(dim), stratum: claim.stratum() }
    }

    /// The claim with its hypotheses dropped: any tensor is admissible.
    pub fn relaxed(claim: ClaimId, dim: usize) -> Self {
        Self { claim, dim, flat_dim: 0, hypotheses: vec![], stratum: None }
    }

    pub fn param_dim(&self) -> usize {
        self.dim - self.flat_dim
    }

    pub fn kind(&self) -> Kind {
        self.claim.kind()
    }

    pub fn assemble(&self, p: &Tensor) -> Tensor {
        if self.flat_dim == 0 {
            p.clone()
        } else {
            product(&Tensor::zero(self.kind(), self.flat_dim), p).expect("same kind")
        }
    }
}

/// One evaluated point.
#[derive(Clone, Debug)]
pub(crate) struct Eval {
    pub param: Tensor,
    pub tensor: Tensor,
    pub violation: f64,
    pub frame: Option<Frame>,
    /// Normalized hypothesis defects and their reports (for warm starts).
    pub defects: Vec<f64>,
    pub reports: Vec<ConeReport>,
    /// Normalized amount by which the stratum condition fails (≤ 0 inside).
    pub stratum_excess: f64,
}

impl Eval {
    pub fn infeasibility(&self) -> f64 {
        let d: f64 = self.defects.iter().map(|d| (-d).max(0.0)).sum();
        d + self.stratum_excess.max(0.0)
    }

    pub fn feasible(&self, tol: f64) -> bool {
        self.defects.iter().all(|d| *d >= -tol) && self.stratum_excess <= tol
    }

    fn penalized(&self, rho: f64) -> f64 {
        self.violation - rho * self.infeasibility()
    }
}

pub(crate) fn stratum_excess(stratum: Option<Stratum>, t: &Tensor) -> f64 {
    match stratum {
        None => f64::NEG_INFINITY,
        Some(Stratum::RicciTwoNonpositive) => {
            let s = t.norm();
            if s == 0.0 {
                return 0.0;
            }
            let ev = t.ricci_eigenvalues();
            (ev[0] + ev[1]) / s
        }
    }
}

pub(crate) fn evaluate(
    pb: &Problem,
    param: Tensor,
    opt: &OptimizerConfig,
    warm: Option<&Eval>,
) -> Result<Eval> {
    let mut param = param;
    let mut defects = Vec::with_capacity(pb.hypotheses.len());
    let mut reports = Vec::with_capacity(pb.hypotheses.len());
    for (h, cone) in pb.hypotheses.iter().enumerate() {
        let w = WarmStart { reports: warm.and_then(|e| e.reports.get(h)).into_iter().collect() };
        let mut r = cones::defect_warm(&param, *cone, opt, &w)?;
        if pb.hypotheses.len() == 1 && r.defect < 0.0 {
            // a single hypothesis is restored exactly (affine) or with overshoot
            // by shifting along the identity; the penalty then only sees the stratum
            let gain = cone.affine_gain(param.kind(), param.dim()).unwrap_or(cone.gain_range(param.kind(), param.dim()).0);
            param = unit(&param.shifted(-r.defect / gain));
            r = cones::defect_warm(&param, *cone, opt, &WarmStart { reports: vec![&r] })?;
        }
        defects.push(r.defect);
        reports.push(r);
    }
    let scale = param.norm().max(f64::MIN_POSITIVE);
    for d in &mut defects {
        *d /= scale;
    }
    let tensor = pb.assemble(&param);
    let stratum_excess = stratum_excess(pb.stratum, &tensor);
    let frame = claim_frame(pb.claim, &tensor, opt)?;
    let violation = match &frame {
        Some(f) => evaluate_in_frame(pb.claim, &tensor, f)?,
        None => f64::NEG_INFINITY,
    };
    let violation = if violation.is_nan() { f64::NEG_INFINITY } else { violation };
    Ok(Eval { param, tensor, violation, frame, defects, reports, stratum_excess })
}

fn unit(t: &Tensor) -> Tensor {
    let s = t.norm();
    if s == 0.0 {
        t.clone()
    } else {
        t.scaled(1.0 / s)
    }
}

fn random_unit<R: Rng>(kind: Kind, dim: usize, g: &mut R) -> Tensor {
    let t = random_tensor(kind, &SamplerConfig::new(dim, g.random())).expect("valid config");
    unit(&t)
}

/// Brings a candidate onto its hypothesis cones with the full optimizer and
/// re-evaluates it. Returns `None` when the repaired point is infeasible.
pub(crate) fn certify(pb: &Problem, e: &Eval, cfg: &SearchConfig) -> Result<Option<Eval>> {
    let mut param = e.param.clone();
    for cone in &pb.hypotheses {
        let r = cones::defect_warm(&param, *cone, &cfg.verify, &WarmStart { reports: e.reports.iter().collect() })?;
        if r.defect < 0.0 {
            param = shift_into_cone(&param, *cone, 0.0, &cfg.verify)?.tensor;
        }
    }
    let out = evaluate(pb, param, &cfg.verify, Some(e))?;
    Ok(out.feasible(cfg.feasibility_tol).then_some(out))
}

/// Outcome of one restart.
#[derive(Clone, Debug)]
pub(crate) struct RestartResult {
    pub best: Option<Eval>,
    pub evaluations: usize,
}

pub(crate) fn search_restart(
    pb: &Problem,
    start: Option<&Tensor>,
    cfg: &SearchConfig,
    seed: u64,
) -> Result<RestartResult> {
    let mut g = rng::seeded(seed);
    let x0 = match start {
        Some(t) => unit(t),
        None => random_unit(pb.kind(), pb.param_dim(), &mut g),
    };
    let mut cur = evaluate(pb, x0, &cfg.inner, None)?;
    let mut evaluations = 1;
    let mut best: Option<Eval> = cur.feasible(cfg.feasibility_tol).then(|| cur.clone());
    let mut sigma = cfg.sigma;
    for stage in 0..cfg.stages {
        let rho = cfg.penalty * cfg.ramp.powi(stage as i32);
        let mut fcur = cur.penalized(rho);
        for _ in 0..cfg.iters_per_stage {
            let step = random_unit(pb.kind(), pb.param_dim(), &mut g);
            let y = unit(&cur.param.add_scaled(&step, sigma));
            let ey = evaluate(pb, y, &cfg.inner, Some(&cur))?;
            evaluations += 1;
            if ey.feasible(cfg.feasibility_tol)
                && best.as_ref().is_none_or(|b| ey.violation > b.violation)
            {
                best = Some(ey.clone());
            }
            let fy = ey.penalized(rho);
            if fy >= fcur {
                cur = ey;
                fcur = fy;
                sigma *= 1.5;
            } else {
                sigma *= 0.9;
            }
            sigma = sigma.clamp(1e-4, 1.0);
        }
    }
    let best = match best {
        Some(b) => certify(pb, &b, cfg)?,
        None => None,
    };
    Ok(RestartResult { best, evaluations })
}

/// Runs `cfg.restarts` independent searches (in parallel, each with its own
/// derived seed), cycling through `starts` for initial points.
pub(crate) fn search(
    pb: &Problem,
    starts: &[Tensor],
    cfg: &SearchConfig,
    seed: u64,
) -> Result<Vec<RestartResult>> {
    (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let start = if starts.is_empty() { None } else { Some(&starts[i % starts.len()]) };
            // every other restart starts from scratch
            let start = if i % 2 == 0 { start } else { None };
            search_restart(pb, start, cfg, rng::derive_seed(seed, i as u64))
        })
        .collect()
}

/// Draws a weakly PIC member with `λ₁ + λ₂ ≤ −τ` (normalized). Starts from a
/// blend of a random tensor and the boundary fixture flat(2) × sphere(n−2),
/// keeps every iterate on the PIC boundary by the exact identity shift, and
/// descends `λ₁ + λ₂` with a (1+1) evolution strategy.
pub fn stratum_member(dim: usize, seed: u64, opt: &OptimizerConfig, budget: usize) -> Result<Option<Tensor>> {
    let mut g = rng::seeded(seed);
    let gain = ConeId::Pic.affine_gain(Kind::Riemann, dim).expect("affine");
    let fixture = stratum_fixture(dim, &mut g);
    let w: f64 = g.random();
    let r = random_unit(Kind::Riemann, dim, &mut g);
    let tau = 0.05 * g.random::<f64>();
    let on_boundary = |t: &Tensor, warm: Option<&ConeReport>| -> Result<(Tensor, f64, ConeReport)> {
        let rep = cones::defect_warm(t, ConeId::Pic, opt, &WarmStart { reports: warm.into_iter().collect() })?;
        let b = unit(&t.shifted(-rep.defect / gain));
        let s = stratum_excess(Some(Stratum::RicciTwoNonpositive), &b);
        Ok((b, s, rep))
    };
    let mut x = unit(&fixture.scaled(w).add_scaled(&r, 1.0 - w));
    let (mut bx, mut fx, mut rep) = on_boundary(&x, None)?;
    let mut sigma = 0.2;
    for _ in 0..budget {
        if fx <= -tau {
            return Ok(Some(bx));
        }
        let y = unit(&x.add_scaled(&random_unit(Kind::Riemann, dim, &mut g), sigma));
        let (by, fy, ry) = on_boundary(&y, Some(&rep))?;
        if fy <= fx {
            (x, bx, fx, rep) = (y, by, fy, ry);
            sigma *= 1.5;
        } else {
            sigma *= 0.9;
        }
        sigma = sigma.clamp(1e-4, 1.0);
    }
    Ok((fx <= 0.0).then_some(bx))
}

/// flat(2) × sphere(n−2, 1) in a random orthonormal frame, normalized: a
/// weakly PIC boundary member with `λ₁ = λ₂ = 0`.
pub fn stratum_fixture<R: Rng>(dim: usize, g: &mut R) -> Tensor {
    let f: Tensor = RiemannTensor::zero(2).direct_sum(&RiemannTensor::sphere(dim - 2, 1.0)).into();
    unit(&f.random_gauge(g))
}
