//! Numerical verification of curvature identities and conditional
//! inequalities.
//!
//! Identities are evaluated on unconstrained random tensors in random frames.
//! Conditional claims run two phases: sampling of hypothesis members (on the
//! cone boundary by default) and an adversarial search for counterexamples.

mod claims;
mod search;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde_json::{json, Value};

pub use claims::{
    claim_frame, evaluate_in_frame, first_variation_residuals, nob_witness_frame, ricci_eigenframe,
    six_key_constant, ClaimId, Stratum, ALL_CLAIMS, CONDITIONAL_TOL, IDENTITY_TOL,
};
pub use search::{stratum_fixture, stratum_member, SearchConfig};

use crate::cones::{self, ConeId, OptimizerConfig};
use crate::error::{Error, Result};
use crate::linalg;
use crate::rng;
use crate::sampling::{random_tensor, shift_into_cone, SamplerConfig};
use crate::tensor::{Frame, Kind, Tensor};
use claims::ComplexView;
use search::{Eval, Problem};

/// Evaluations per stratum sample before giving up on it.
const STRATUM_BUDGET: usize = 300;

/// Stream offsets keeping the sampling and search phases independent.
const SAMPLE_STREAM: u64 = 0x5341_4d50;
const SEARCH_STREAM: u64 = 0x5345_4152;

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub tensor: Tensor,
    pub frame: Frame,
}

#[derive(Clone, Debug)]
pub struct VerifierReport {
    pub claim: ClaimId,
    pub dim: usize,
    pub samples_tested: usize,
    /// Largest normalized violation over both phases; ≤ 0 means none.
    pub max_violation: f64,
    pub witness: Option<Witness>,
    pub search_restarts: usize,
    pub sampling_max: f64,
    pub search_max: f64,
    /// No sample of the required stratum was found and the boundary fixture
    /// was used instead.
    pub stratum_empty: bool,
    /// False where the claim is only probed (complex dimension 3 for the NOB
    /// claims).
    pub asserted: bool,
    pub tolerance: f64,
    pub seed: u64,
    /// Claim-specific diagnostics.
    pub diagnostics: BTreeMap<String, f64>,
}

impl VerifierReport {
    pub fn passed(&self) -> bool {
        !self.asserted || self.max_violation <= self.tolerance
    }

    /// Re-evaluates the witness; reproduces `max_violation` exactly.
    pub fn reevaluate(&self) -> Result<Option<f64>> {
        self.witness
            .as_ref()
            .map(|w| evaluate_in_frame(self.claim, &w.tensor, &w.frame))
            .transpose()
    }

    pub fn to_json(&self) -> Value {
        let finite = |x: f64| if x.is_finite() { json!(x) } else { Value::Null };
        json!({
            "claim": self.claim.tag(),
            "dim": self.dim,
            "samples_tested": self.samples_tested,
            "max_violation": finite(self.max_violation),
            "sampling_max": finite(self.sampling_max),
            "search_max": finite(self.search_max),
            "search_restarts": self.search_restarts,
            "stratum_empty": self.stratum_empty,
            "asserted": self.asserted,
            "tolerance": self.tolerance,
            "passed": self.passed(),
            "seed": self.seed,
            "diagnostics": self.diagnostics,
            "witness": self.witness.as_ref().map(|w| json!({
                "tensor": crate::tensor::io::to_json_value(&w.tensor),
                "frame": frame_json(&w.frame),
            })),
        })
    }

    pub const CSV_HEADER: &'static str = "claim,dim,samples,max_violation,tolerance,asserted,pass";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.16e},{:.3e},{},{}",
            self.claim.tag(),
            self.dim,
            self.samples_tested,
            self.max_violation,
            self.tolerance,
            self.asserted,
            if self.passed() { "pass" } else { "fail" }
        )
    }
}

fn frame_json(f: &Frame) -> Value {
    match f {
        Frame::Real(m) => json!((0..m.ncols()).map(|c| m.column(c).iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>()),
        Frame::Complex(m) => json!((0..m.ncols())
            .map(|c| m.column(c).iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
            .collect::<Vec<_>>()),
    }
}

fn check_dim(claim: ClaimId, dim: usize) -> Result<()> {
    if dim < claim.min_dim() {
        return Err(Error::Precondition(format!(
            "{} is stated for dimension ≥ {}, got {dim}",
            claim.cli_name(),
            claim.min_dim()
        )));
    }
    Ok(())
}

fn empty_report(claim: ClaimId, dim: usize, seed: u64) -> VerifierReport {
    VerifierReport {
        claim,
        dim,
        samples_tested: 0,
        max_violation: f64::NEG_INFINITY,
        witness: None,
        search_restarts: 0,
        sampling_max: f64::NEG_INFINITY,
        search_max: f64::NEG_INFINITY,
        stratum_empty: false,
        asserted: claim.asserted_at(dim),
        tolerance: claim.tolerance(),
        seed,
        diagnostics: BTreeMap::new(),
    }
}

/// Checks an exact identity on `samples` random tensors in random frames.
pub fn verify_identity(claim: ClaimId, dim: usize, samples: usize, seed: u64) -> Result<VerifierReport> {
    if !claim.is_identity() {
        return Err(Error::InvalidInput(format!("{claim} is not an identity")));
    }
    check_dim(claim, dim)?;
    let results: Vec<(f64, Witness)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut g = rng::task_rng(seed, i as u64);
            let t = random_tensor(claim.kind(), &SamplerConfig::new(dim, rng::derive_seed(seed, i as u64)))?;
            let frame = match claim.kind() {
                Kind::Riemann => Frame::Real(linalg::haar_orthogonal(&mut g, dim, dim)),
                Kind::Kahler => Frame::Complex(linalg::haar_unitary(&mut g, dim, dim)),
            };
            let v = evaluate_in_frame(claim, &t, &frame)?;
            Ok((v, Witness { tensor: t, frame }))
        })
        .collect::<Result<_>>()?;
    let mut rep = empty_report(claim, dim, seed);
    rep.samples_tested = results.len();
    for (v, w) in results {
        if v > rep.max_violation {
            rep.max_violation = v;
            rep.witness = Some(w);
        }
    }
    rep.sampling_max = rep.max_violation;
    Ok(rep)
}

/// One hypothesis member for `claim`, or `None` if the stratum sampler gave
/// up on this draw. Returns the search parameter (the non-flat factor for the
/// kernel claim).
fn sample_member(pb: &Problem, seed: u64, cfg: &SearchConfig) -> Result<Option<Tensor>> {
    let kind = pb.kind();
    let pd = pb.param_dim();
    if pb.stratum.is_some() {
        let Some(t) = stratum_member(pd, seed, &cfg.verify.with_restarts(8), STRATUM_BUDGET)? else {
            return Ok(None);
        };
        // the inner optimizer may have missed the minimum; re-shift with the full one
        let fixed = shift_into_cone(&t, ConeId::Pic, 0.0, &cfg.verify)?.tensor;
        let s = search::stratum_excess(pb.stratum, &fixed);
        return Ok((s <= 0.0).then_some(fixed));
    }
    let t = random_tensor(kind, &SamplerConfig::new(pd, seed))?;
    Ok(Some(match pb.hypotheses.first() {
        None => t,
        Some(c) => shift_into_cone(&t, *c, pb.claim.sample_margin() * t.norm(), &cfg.verify)?.tensor,
    }))
}

/// Two-phase check of a conditional claim: `samples` hypothesis members,
/// then `cfg.restarts` adversarial searches.
pub fn verify_conditional(
    claim: ClaimId,
    dim: usize,
    samples: usize,
    cfg: &SearchConfig,
    seed: u64,
) -> Result<VerifierReport> {
    if claim.is_identity() {
        return Err(Error::InvalidInput(format!("{claim} is an identity; use verify_identity")));
    }
    check_dim(claim, dim)?;
    let mut rep = empty_report(claim, dim, seed);
    let problems: Vec<Problem> = if claim == ClaimId::RicciKernelReaction {
        // flat factors of every dimension leaving room for a PIC1 factor
        (1..=dim - 4).map(|j| Problem::new(claim, dim, j)).collect()
    } else {
        vec![Problem::new(claim, dim, 0)]
    };

    // phase (a): sampling
    let sampled: Vec<Option<Eval>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let pb = &problems[i % problems.len()];
            let s = rng::derive_seed(seed ^ SAMPLE_STREAM, i as u64);
            let Some(param) = sample_member(pb, s, cfg)? else {
                return Ok(None);
            };
            let mut g = rng::seeded(s);
            let param = if pb.flat_dim > 0 { param } else { param.random_gauge(&mut g) };
            let e = search::evaluate(pb, param, &cfg.verify, None)?;
            Ok(Some(e))
        })
        .collect::<Result<_>>()?;
    let failures = sampled.iter().filter(|e| e.is_none()).count();
    let mut starts: Vec<Vec<Tensor>> = vec![Vec::new(); problems.len()];
    let mut rng_fixture = rng::seeded(seed ^ SAMPLE_STREAM);
    let mut evals: Vec<Eval> = Vec::new();
    for (i, e) in sampled.into_iter().enumerate() {
        if let Some(e) = e {
            starts[i % problems.len()].push(e.param.clone());
            evals.push(e);
        }
    }
    if evals.is_empty() && claim.stratum().is_some() && samples > 0 {
        rep.stratum_empty = true;
        let pb = &problems[0];
        for _ in 0..samples.min(8) {
            let f = stratum_fixture(dim, &mut rng_fixture);
            starts[0].push(f.clone());
            evals.push(search::evaluate(pb, f, &cfg.verify, None)?);
        }
    }
    rep.diagnostics.insert("sampler_failures".into(), failures as f64);
    for e in &evals {
        if e.violation.is_finite() {
            rep.samples_tested += 1;
        }
        if e.violation > rep.sampling_max {
            rep.sampling_max = e.violation;
            if e.violation > rep.max_violation {
                rep.max_violation = e.violation;
                rep.witness = e.frame.clone().map(|frame| Witness { tensor: e.tensor.clone(), frame });
            }
        }
    }
    add_claim_diagnostics(claim, &evals, &mut rep, &cfg.verify)?;

    // phase (b): adversarial search
    for (pi, pb) in problems.iter().enumerate() {
        let per = cfg.restarts / problems.len() + usize::from(pi < cfg.restarts % problems.len());
        let sub = SearchConfig { restarts: per, ..*cfg };
        let results = search::search(pb, &starts[pi], &sub, rng::derive_seed(seed ^ SEARCH_STREAM, pi as u64))?;
        rep.search_restarts += results.len();
        let evaluations: usize = results.iter().map(|r| r.evaluations).sum();
        *rep.diagnostics.entry("search_evaluations".into()).or_insert(0.0) += evaluations as f64;
        for r in results {
            if let Some(e) = r.best {
                if e.violation > rep.search_max {
                    rep.search_max = e.violation;
                }
                if e.violation > rep.max_violation {
                    rep.max_violation = e.violation;
                    rep.witness = e.frame.clone().map(|frame| Witness { tensor: e.tensor.clone(), frame });
                }
            }
        }
    }
    Ok(rep)
}

fn add_claim_diagnostics(
    claim: ClaimId,
    evals: &[Eval],
    rep: &mut VerifierReport,
    opt: &OptimizerConfig,
) -> Result<()> {
    match claim {
        ClaimId::SixKeyFirst | ClaimId::SixKeySecond | ClaimId::SixKeyThird | ClaimId::SixKeyPinch => {
            let mut worst_fv: f64 = 0.0;
            let mut c_emp = f64::NEG_INFINITY;
            let mut shifted_third = f64::NEG_INFINITY;
            for e in evals {
                if let (Tensor::Kahler(k), Some(f @ Frame::Complex(u))) = (&e.tensor, &e.frame) {
                    // the third block for Rm − m·id, whose B⊥ minimum is 0 in the same frame
                    let m = ComplexView::new(k, u).r(0, 0, 1, 1).re;
                    let v = evaluate_in_frame(ClaimId::SixKeyThird, &e.tensor.shifted(-m), f)?;
                    shifted_third = shifted_third.max(v);
                    let r = first_variation_residuals(k, u);
                    worst_fv = worst_fv.max(r[0]).max(r[1]).max(r[2]);
                    if let Some(c) = six_key_constant(k, u) {
                        c_emp = c_emp.max(c);
                    }
                }
            }
            rep.diagnostics.insert("first_variation_max".into(), worst_fv);
            if shifted_third.is_finite() {
                rep.diagnostics.insert("third_block_shifted_max".into(), shifted_third);
            }
            if c_emp.is_finite() {
                rep.diagnostics.insert("empirical_c".into(), c_emp);
            }
        }
        ClaimId::MuBound => {
            let mut worst: f64 = 0.0;
            for e in evals {
                let r = cones::nob_rank1(&e.tensor, opt)?;
                if r.u.is_some() {
                    worst = worst.max(r.first_variation_residual / r.scale.max(f64::MIN_POSITIVE).powi(1));
                }
            }
            rep.diagnostics.insert("first_variation_max".into(), worst);
        }
        _ => {}
    }
    Ok(())
}

/// Dispatches to [`verify_identity`] or [`verify_conditional`].
pub fn verify(claim: ClaimId, dim: usize, samples: usize, cfg: &SearchConfig, seed: u64) -> Result<VerifierReport> {
    if claim.is_identity() {
        verify_identity(claim, dim, samples, seed)
    } else {
        verify_conditional(claim, dim, samples, cfg, seed)
    }
}

/// Search-power check: the two-plane weighted-sum inequality with its
/// hypotheses dropped must be refuted. Returns the largest violation found.
pub fn falsified_self_test(dim: usize, cfg: &SearchConfig, seed: u64) -> Result<VerifierReport> {
    let claim = ClaimId::TwoPlaneWeightedSum;
    let pb = Problem::relaxed(claim, dim);
    let mut rep = empty_report(claim, dim, seed);
    let results = search::search(&pb, &[], cfg, rng::derive_seed(seed ^ SEARCH_STREAM, 0))?;
    rep.search_restarts = results.len();
    for r in results {
        if let Some(e) = r.best {
            if e.violation > rep.max_violation {
                rep.max_violation = e.violation;
                rep.search_max = e.violation;
                rep.witness = e.frame.clone().map(|frame| Witness { tensor: e.tensor.clone(), frame });
            }
        }
    }
    rep.asserted = false;
    Ok(rep)
}

/// Result of a cone-implication check `A ⊂ B`.
#[derive(Clone, Debug)]
pub struct ImplicationReport {
    pub hypothesis: ConeId,
    pub conclusion: ConeId,
    pub dim: usize,
    pub samples: usize,
    /// Largest `−defect_B / |T|` over boundary members of `A`.
    pub max_violation: f64,
    /// Smallest re-measured `defect_A / |T|` (fresh optimizer seed).
    pub min_hypothesis_defect: f64,
    /// Samples whose hypothesis defect a stronger optimizer found negative,
    /// and which were shifted back onto the boundary of `A`.
    pub reshifted: usize,
    pub witness: Option<Tensor>,
}

/// Rounds of re-verification for a sample that appears to violate the
/// conclusion.
const IMPLICATION_ROUNDS: usize = 3;

/// Samples boundary members of `hypothesis` and measures their `conclusion`
/// defect. A sample that violates the conclusion is first re-checked against
/// the hypothesis with four times the restarts; if it turns out to lie outside
/// `A`, it is shifted back onto the boundary and measured again.
pub fn verify_implication(
    hypothesis: ConeId,
    conclusion: ConeId,
    kind: Kind,
    dim: usize,
    samples: usize,
    opt: &OptimizerConfig,
    seed: u64,
) -> Result<ImplicationReport> {
    let rows: Vec<(f64, f64, bool, Tensor)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let s = rng::derive_seed(seed, i as u64);
            let cfg = SamplerConfig::new(dim, s).with_cone(hypothesis, 0.0);
            let mut t = crate::sampling::sample_in_cone(kind, &cfg, &opt.with_seed(s))?.tensor;
            let mut reshifted = false;
            for round in 0..=IMPLICATION_ROUNDS {
                let scale = t.norm().max(f64::MIN_POSITIVE);
                let fresh = opt.with_seed(rng::derive_seed(s, 1 + round as u64));
                let hyp = cones::defect(&t, hypothesis, &fresh)?.defect / scale;
                let con = cones::defect(&t, conclusion, &fresh)?.defect / scale;
                if -con <= CONDITIONAL_TOL * 1e-1 || round == IMPLICATION_ROUNDS {
                    return Ok((-con, hyp, reshifted, t));
                }
                let strong = fresh.with_restarts(4 * opt.restarts.max(1));
                let check = cones::defect(&t, hypothesis, &strong)?.defect / scale;
                if check >= -1e-9 {
                    return Ok((-con, hyp.min(check), reshifted, t));
                }
                t = shift_into_cone(&t, hypothesis, 0.0, &strong)?.tensor;
                reshifted = true;
            }
            unreachable!("the last round returns")
        })
        .collect::<Result<_>>()?;
    let mut rep = ImplicationReport {
        hypothesis,
        conclusion,
        dim,
        samples,
        max_violation: f64::NEG_INFINITY,
        min_hypothesis_defect: f64::INFINITY,
        reshifted: 0,
        witness: None,
    };
    for (v, h, moved, t) in rows {
        rep.min_hypothesis_defect = rep.min_hypothesis_defect.min(h);
        rep.reshifted += usize::from(moved);
        if v > rep.max_violation {
            rep.max_violation = v;
            rep.witness = Some(t);
        }
    }
    Ok(rep)
}

/// Largest empirical six-key constant over `samples` random Kähler tensors
/// with a negative B⊥ minimum, with the number of such tensors.
pub fn empirical_six_key_constant(
    dim: usize,
    samples: usize,
    opt: &OptimizerConfig,
    seed: u64,
) -> Result<(f64, usize)> {
    let vals: Vec<Option<f64>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let t = random_tensor(Kind::Kahler, &SamplerConfig::new(dim, rng::derive_seed(seed, i as u64)))?;
            let k = t.as_kahler().expect("Kähler sample");
            let u = nob_witness_frame(k, opt)?;
            Ok(six_key_constant(k, &u))
        })
        .collect::<Result<_>>()?;
    let hits: Vec<f64> = vals.into_iter().flatten().collect();
    Ok((hits.iter().copied().fold(f64::NEG_INFINITY, f64::max), hits.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SearchConfig {
        SearchConfig { restarts: 2, iters_per_stage: 4, ..Default::default() }
    }

    #[test]
    fn identities_hold_and_witness_reproduces() {
        for (c, n) in [
            (ClaimId::ScalarSplitIdentity, 5),
            (ClaimId::PlaneSectionalIdentity, 4),
            (ClaimId::KahlerRicciReaction, 3),
        ] {
            let r = verify_identity(c, n, 20, 3).unwrap();
            assert!(r.passed(), "{c}: {}", r.max_violation);
            assert_eq!(r.reevaluate().unwrap().unwrap(), r.max_violation);
        }
    }

    #[test]
    fn dimension_below_range_is_a_precondition_error() {
        assert!(matches!(
            verify(ClaimId::TwoPlaneWeightedSum, 4, 1, &small(), 0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn stratum_sampler_finds_members() {
        let opt = OptimizerConfig { restarts: 4, oracle_samples: 0, ..Default::default() };
        let found = (0..4).filter(|&s| stratum_member(5, s, &opt, STRATUM_BUDGET).unwrap().is_some()).count();
        assert!(found >= 2, "{found}");
    }

    #[test]
    fn conditional_report_is_deterministic() {
        let a = verify_conditional(ClaimId::NobTwoNonnegRicci, 2, 4, &small(), 5).unwrap();
        let b = verify_conditional(ClaimId::NobTwoNonnegRicci, 2, 4, &small(), 5).unwrap();
        assert_eq!(a.max_violation, b.max_violation);
        assert!(a.passed(), "{}", a.max_violation);
        if a.witness.is_some() {
            assert_eq!(a.reevaluate().unwrap().unwrap(), a.max_violation);
        }
    }
}
