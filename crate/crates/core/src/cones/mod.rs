//! Curvature-cone defects: the minimum of a cone's defining functional over
//! admissible frames. Membership holds exactly when the defect is ≥ 0.

pub mod functional;
pub mod optim;
mod rank1;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde_json::{json, Value};

pub use rank1::{eigen_nilpotent_split, nob_rank1, q_form, rm_apply, Rank1Report, RANK1_CAP};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, C64};
use crate::rng;
use crate::tensor::{lambda2, Frame, Kind, Tensor};
use functional::{
    BisectionalObjective, ComplexSectionalObjective, RealFrameObjective, TraceObjective,
};
use optim::{LocalOptions, LocalResult, MultiStart, Objective, Point, SampleMin, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConeId {
    /// Nonnegative orthogonal bisectional curvature (Kähler).
    Nob,
    /// Nonnegative bisectional curvature (Kähler).
    Bisectional,
    /// Nonnegative complex sectional curvature (Riemannian).
    ComplexSectional,
    /// Nonnegative isotropic curvature.
    Pic,
    /// The λ-interpolated isotropic family, λ ∈ [0, 1].
    Pic1,
    /// `R_1313 + R_2323 ≥ 0` on orthonormal 3-frames.
    Wpic1ThreeFrame,
    /// `R_1313 + R_1414 + R_2323 + R_2424 ≥ 0` on orthonormal 4-frames.
    Sum4,
    /// Two-nonnegative curvature operator on Λ².
    Op2Nonneg,
    /// Sum of the k smallest Ricci eigenvalues is ≥ 0.
    RicciK(usize),
}

impl fmt::Display for ConeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConeId::Nob => write!(f, "NOB"),
            ConeId::Bisectional => write!(f, "BISECTIONAL"),
            ConeId::ComplexSectional => write!(f, "COMPLEX_SECTIONAL"),
            ConeId::Pic => write!(f, "PIC"),
            ConeId::Pic1 => write!(f, "PIC1"),
            ConeId::Wpic1ThreeFrame => write!(f, "WPIC1_3FRAME"),
            ConeId::Sum4 => write!(f, "SUM4"),
            ConeId::Op2Nonneg => write!(f, "OP_2NONNEG"),
            ConeId::RicciK(k) => write!(f, "RICCI_K({k})"),
        }
    }
}

impl FromStr for ConeId {
    type Err = Error;

    /// Accepts the report tags (`RICCI_K(2)`) and the command-line spellings
    /// (`nob`, `pic1`, `wpic1`, `op2`, `ricci2`, ...), case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        let cone = match t.as_str() {
            "nob" => ConeId::Nob,
            "bisectional" | "bisec" => ConeId::Bisectional,
            "complex_sectional" | "csc" => ConeId::ComplexSectional,
            "pic" => ConeId::Pic,
            "pic1" => ConeId::Pic1,
            "wpic1" | "wpic1_3frame" | "three_frame" => ConeId::Wpic1ThreeFrame,
            "sum4" => ConeId::Sum4,
            "op2" | "op_2nonneg" | "op2nonneg" => ConeId::Op2Nonneg,
            _ => {
                let digits = t
                    .strip_prefix("ricci_k(")
                    .and_then(|r| r.strip_suffix(')'))
                    .or_else(|| t.strip_prefix("ricci_k:"))
                    .or_else(|| t.strip_prefix("ricci_k"))
                    .or_else(|| t.strip_prefix("ricci"));
                match digits.and_then(|d| d.trim_start_matches('_').parse::<usize>().ok()) {
                    Some(k) if k >= 1 => ConeId::RicciK(k),
                    _ => return invalid(format!("unknown cone {s:?}")),
                }
            }
        };
        Ok(cone)
    }
}

impl ConeId {
    /// Every cone tag, with `RicciK` instantiated at `k`.
    pub fn all(k: usize) -> Vec<ConeId> {
        vec![
            ConeId::Nob,
            ConeId::Bisectional,
            ConeId::ComplexSectional,
            ConeId::Pic,
            ConeId::Pic1,
            ConeId::Wpic1ThreeFrame,
            ConeId::Sum4,
            ConeId::Op2Nonneg,
            ConeId::RicciK(k),
        ]
    }

    pub fn accepts(&self, kind: Kind) -> bool {
        match self {
            ConeId::Nob | ConeId::Bisectional => kind == Kind::Kahler,
            ConeId::RicciK(_) => true,
            _ => kind == Kind::Riemann,
        }
    }

    /// Smallest dimension in which the cone's admissible frames exist.
    pub fn min_dim(&self) -> usize {
        match self {
            ConeId::Nob | ConeId::ComplexSectional => 2,
            ConeId::Bisectional => 1,
            ConeId::Pic | ConeId::Pic1 | ConeId::Sum4 => 4,
            ConeId::Wpic1ThreeFrame | ConeId::Op2Nonneg => 3,
            ConeId::RicciK(k) => *k,
        }
    }

    /// Frame size used by the functional.
    pub fn frame_size(&self) -> usize {
        match self {
            ConeId::Nob | ConeId::Bisectional | ConeId::ComplexSectional | ConeId::Op2Nonneg => 2,
            ConeId::Wpic1ThreeFrame => 3,
            ConeId::Pic | ConeId::Pic1 | ConeId::Sum4 => 4,
            ConeId::RicciK(k) => *k,
        }
    }

    /// `defect(T + β·id) − defect(T)` when it is the same for every frame, so
    /// that shifting along the identity direction moves the defect by exactly
    /// `β · gain`. `None` for PIC1 and BISECTIONAL.
    pub fn affine_gain(&self, kind: Kind, dim: usize) -> Option<f64> {
        let n = dim as f64;
        match (self, kind) {
            (ConeId::Pic | ConeId::Sum4, _) => Some(4.0),
            (ConeId::Wpic1ThreeFrame | ConeId::Op2Nonneg, _) => Some(2.0),
            (ConeId::ComplexSectional | ConeId::Nob, _) => Some(1.0),
            (ConeId::RicciK(k), Kind::Riemann) => Some(*k as f64 * (n - 1.0)),
            (ConeId::RicciK(k), Kind::Kahler) => Some(*k as f64 * (n + 1.0)),
            (ConeId::Pic1 | ConeId::Bisectional, _) => None,
        }
    }

    /// Range `[lo, hi]` of the identity's contribution over admissible frames.
    pub fn gain_range(&self, kind: Kind, dim: usize) -> (f64, f64) {
        match self {
            ConeId::Pic1 => (2.0, 4.0),
            ConeId::Bisectional => (1.0, 2.0),
            c => {
                let g = c.affine_gain(kind, dim).expect("affine cone");
                (g, g)
            }
        }
    }

    fn uses_eigen(&self) -> bool {
        matches!(self, ConeId::Op2Nonneg | ConeId::RicciK(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Gradient-norm stopping threshold relative to the tensor norm.
    pub gtol: f64,
    /// Samples drawn for the report's `oracle_defect`.
    pub oracle_samples: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { restarts: 64, max_iters: 3000, gtol: 1e-10, oracle_samples: 1024, seed: 0 }
    }
}

impl OptimizerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_oracle_samples(mut self, samples: usize) -> Self {
        self.oracle_samples = samples;
        self
    }
}

/// Stream indices separating optimizer starts from oracle samples.
const ORACLE_STREAM: u64 = 0x6f72_6163_6c65;
const START_STREAM: u64 = 0x7374_6172_7473;

/// Result of a defect computation.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeReport {
    pub cone: ConeId,
    pub defect: f64,
    pub witness: Frame,
    pub lambda: Option<f64>,
    pub restarts: usize,
    pub converged: bool,
    pub oracle_defect: f64,
    /// Riemannian gradient norm at the witness.
    pub stationarity: f64,
    /// Norm of the tensor the report refers to.
    pub scale: f64,
}

fn frame_json(f: &Frame) -> Value {
    match f {
        Frame::Real(m) => Value::Array(
            (0..m.ncols()).map(|c| json!(m.column(c).iter().copied().collect::<Vec<f64>>())).collect(),
        ),
        Frame::Complex(m) => Value::Array(
            (0..m.ncols())
                .map(|c| json!(m.column(c).iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()))
                .collect(),
        ),
    }
}

impl ConeReport {
    pub fn to_json(&self) -> Value {
        json!({
            "cone": self.cone.to_string(),
            "defect": self.defect,
            "witness": {"vectors": frame_json(&self.witness), "lambda": self.lambda},
            "restarts": self.restarts,
            "converged": self.converged,
            "oracle_defect": self.oracle_defect,
            "stationarity": self.stationarity,
            "scale": self.scale,
        })
    }

    /// Whether the tensor is in the cone up to `tol` (absolute).
    pub fn member(&self, tol: f64) -> bool {
        self.defect >= -tol
    }
}

trait ToFrame: Scalar {
    fn to_frame(z: DMatrix<Self>) -> Frame;
    fn from_frame(f: &Frame) -> Option<DMatrix<Self>>;
}

impl ToFrame for f64 {
    fn to_frame(z: DMatrix<f64>) -> Frame {
        Frame::Real(z)
    }
    fn from_frame(f: &Frame) -> Option<DMatrix<f64>> {
        match f {
            Frame::Real(m) => Some(m.clone()),
            Frame::Complex(_) => None,
        }
    }
}

impl ToFrame for C64 {
    fn to_frame(z: DMatrix<C64>) -> Frame {
        Frame::Complex(z)
    }
    fn from_frame(f: &Frame) -> Option<DMatrix<C64>> {
        match f {
            Frame::Complex(m) => Some(m.clone()),
            Frame::Real(_) => None,
        }
    }
}

fn check_compatible(t: &Tensor, cone: ConeId) -> Result<()> {
    if !cone.accepts(t.kind()) {
        return invalid(format!("cone {cone} does not apply to {} tensors", t.kind().as_str()));
    }
    if let ConeId::RicciK(k) = cone {
        if k == 0 || k > t.dim() {
            return invalid(format!("RICCI_K({k}) needs 1 ≤ k ≤ dim = {}", t.dim()));
        }
    }
    if t.dim() < cone.min_dim() {
        return invalid(format!("cone {cone} needs dimension ≥ {}, got {}", cone.min_dim(), t.dim()));
    }
    Ok(())
}

/// Warm start taken from an earlier report (typically along a trajectory).
#[derive(Clone, Debug, Default)]
pub struct WarmStart<'a> {
    pub reports: Vec<&'a ConeReport>,
}

fn run_optimizer<T: ToFrame, O: Objective<T>>(
    obj: &O,
    cone: ConeId,
    cfg: &OptimizerConfig,
    scale: f64,
    warm: &[&ConeReport],
) -> ConeReport {
    let warm_points: Vec<Point<T>> = warm
        .iter()
        .filter(|r| r.cone == cone)
        .filter_map(|r| {
            let z = T::from_frame(&r.witness)?;
            (z.nrows() == obj.n() && z.ncols() == obj.k())
                .then(|| Point { z, lambda: r.lambda.unwrap_or(0.0) })
        })
        .collect();
    let opts = LocalOptions { gtol: cfg.gtol * scale, max_iters: cfg.max_iters, scale };
    let ms = MultiStart { restarts: cfg.restarts, seed: rng::derive_seed(cfg.seed, START_STREAM), opts };
    let mut best: LocalResult<T> = if warm_points.is_empty() && cfg.restarts == 0 {
        let mut r = rng::task_rng(ms.seed, 0);
        let p = optim::random_point(&mut r, obj.n(), obj.k(), obj.geometry(), obj.has_lambda());
        optim::local_minimize(obj, p, &opts)
    } else {
        optim::multistart(obj, &warm_points, &ms)
    };
    let oracle: SampleMin<T> =
        optim::sample_min(obj, cfg.oracle_samples, rng::derive_seed(cfg.seed, ORACLE_STREAM), None);
    if oracle.value < best.value {
        let polished = optim::local_minimize(obj, oracle.best.clone(), &opts);
        if polished.value < best.value {
            best = polished;
        }
    }
    let converged = best.stationarity <= 1e-8 * scale;
    ConeReport {
        cone,
        defect: best.value,
        witness: T::to_frame(best.point.z),
        lambda: obj.has_lambda().then_some(best.point.lambda),
        restarts: warm_points.len() + cfg.restarts,
        converged,
        oracle_defect: oracle.value.min(f64::MAX),
        stationarity: best.stationarity,
        scale,
    }
}

fn eigen_report(t: &Tensor, cone: ConeId, cfg: &OptimizerConfig, scale: f64) -> ConeReport {
    let (defect, witness, oracle) = match (cone, t) {
        (ConeId::Op2Nonneg, Tensor::Riemann(r)) => {
            let m = lambda2::operator_matrix(r);
            let (ev, vecs) = linalg::sym_eigen(&m);
            let obj = TraceObjective { a: m, k: 2 };
            let o = optim::sample_min(&obj, cfg.oracle_samples, rng::derive_seed(cfg.seed, ORACLE_STREAM), None);
            (ev[0] + ev[1], Frame::Real(vecs.columns(0, 2).into_owned()), o.value)
        }
        (ConeId::RicciK(k), Tensor::Riemann(r)) => {
            let m = r.ricci();
            let (ev, vecs) = linalg::sym_eigen(&m);
            let obj = TraceObjective { a: m, k };
            let o = optim::sample_min(&obj, cfg.oracle_samples, rng::derive_seed(cfg.seed, ORACLE_STREAM), None);
            (linalg::sum_smallest(&ev, k), Frame::Real(vecs.columns(0, k).into_owned()), o.value)
        }
        (ConeId::RicciK(k), Tensor::Kahler(kt)) => {
            let m = kt.ricci();
            let (ev, vecs) = linalg::herm_eigen(&m);
            let obj = TraceObjective { a: m, k };
            let o = optim::sample_min(&obj, cfg.oracle_samples, rng::derive_seed(cfg.seed, ORACLE_STREAM), None);
            (linalg::sum_smallest(&ev, k), Frame::Complex(vecs.columns(0, k).into_owned()), o.value)
        }
        _ => unreachable!("eigen cones are checked by the caller"),
    };
    ConeReport {
        cone,
        defect,
        witness,
        lambda: None,
        restarts: 0,
        converged: true,
        oracle_defect: if cfg.oracle_samples == 0 { f64::MAX } else { oracle },
        stationarity: 0.0,
        scale,
    }
}

/// Cone defect of `t` by multi-start frame optimization (or exactly, for the
/// eigenvalue cones).
pub fn defect(t: &Tensor, cone: ConeId, cfg: &OptimizerConfig) -> Result<ConeReport> {
    defect_warm(t, cone, cfg, &WarmStart::default())
}

/// [`defect`] with extra starting frames from earlier reports.
pub fn defect_warm(
    t: &Tensor,
    cone: ConeId,
    cfg: &OptimizerConfig,
    warm: &WarmStart<'_>,
) -> Result<ConeReport> {
    check_compatible(t, cone)?;
    let scale = t.norm();
    if scale == 0.0 {
        let n = if cone == ConeId::Op2Nonneg { lambda2::pair_count(t.dim()) } else { t.dim() };
        let k = cone.frame_size();
        let complex = matches!(cone, ConeId::Nob | ConeId::Bisectional | ConeId::ComplexSectional)
            || (t.kind() == Kind::Kahler);
        let witness =
            if complex { Frame::standard_complex(n, k) } else { Frame::standard_real(n, k) };
        return Ok(ConeReport {
            cone,
            defect: 0.0,
            witness,
            lambda: (cone == ConeId::Pic1).then_some(0.0),
            restarts: 0,
            converged: true,
            oracle_defect: 0.0,
            stationarity: 0.0,
            scale,
        });
    }
    if cone.uses_eigen() {
        return Ok(eigen_report(t, cone, cfg, scale));
    }
    let w = &warm.reports;
    Ok(match (cone, t) {
        (ConeId::Nob, Tensor::Kahler(k)) => {
            run_optimizer(&BisectionalObjective { k, orthogonal: true }, cone, cfg, scale, w)
        }
        (ConeId::Bisectional, Tensor::Kahler(k)) => {
            run_optimizer(&BisectionalObjective { k, orthogonal: false }, cone, cfg, scale, w)
        }
        (ConeId::ComplexSectional, Tensor::Riemann(r)) => {
            run_optimizer(&ComplexSectionalObjective { r }, cone, cfg, scale, w)
        }
        (ConeId::Pic1, Tensor::Riemann(r)) => run_optimizer(
            &RealFrameObjective { r, k: 4, terms: vec![], isotropic_lambda: true },
            cone,
            cfg,
            scale,
            w,
        ),
        (ConeId::Pic | ConeId::Sum4 | ConeId::Wpic1ThreeFrame, Tensor::Riemann(r)) => {
            let (k, terms) = real_terms(cone);
            run_optimizer(&RealFrameObjective { r, k, terms, isotropic_lambda: false }, cone, cfg, scale, w)
        }
        _ => unreachable!("compatibility checked above"),
    })
}

fn real_terms(cone: ConeId) -> (usize, crate::tensor::Terms) {
    use crate::tensor::Functional;
    let f = match cone {
        ConeId::Pic => Functional::Isotropic { lambda: 1.0 },
        ConeId::Sum4 => Functional::FourFrameSum,
        ConeId::Wpic1ThreeFrame => Functional::ThreeFrameSum,
        _ => unreachable!("not a fixed real-frame functional"),
    };
    (f.frame_size(), f.terms().expect("real functional"))
}

/// Outcome of the sampling oracle, with a rigorous upper bound on how far its
/// minimum can sit above the value at a reference witness.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    pub samples: usize,
    /// Distance from the nearest sample to the reference witness.
    pub nearest_distance: f64,
    /// Upper bound on `value − reference value` implied by that distance.
    pub discretization_bound: f64,
}

/// Minimum of the cone functional over `samples` Haar-random admissible
/// frames (and uniform λ for PIC1).
pub fn oracle_defect(t: &Tensor, cone: ConeId, samples: usize, seed: u64) -> Result<f64> {
    Ok(oracle_against(t, cone, samples, seed, None)?.value)
}

/// Sampling oracle; when `reference` is given, also computes the
/// discretization bound with respect to its witness.
pub fn oracle_against(
    t: &Tensor,
    cone: ConeId,
    samples: usize,
    seed: u64,
    reference: Option<&ConeReport>,
) -> Result<OracleResult> {
    check_compatible(t, cone)?;
    let scale = t.norm();
    if scale == 0.0 {
        return Ok(OracleResult { value: 0.0, samples, nearest_distance: 0.0, discretization_bound: 0.0 });
    }
    fn go<T: ToFrame, O: Objective<T>>(
        obj: &O,
        samples: usize,
        seed: u64,
        reference: Option<&ConeReport>,
        remainder: impl Fn(f64, f64) -> f64,
    ) -> OracleResult {
        let refp: Option<Point<T>> = reference.and_then(|r| {
            Some(Point { z: T::from_frame(&r.witness)?, lambda: r.lambda.unwrap_or(0.0) })
        });
        let s = optim::sample_min(obj, samples, seed, refp.as_ref());
        let bound = match &refp {
            Some(p) => {
                let (_, g, dl) = obj.value_grad(&p.z, p.lambda);
                let rg = optim::tangent(obj.geometry(), &p.z, &g);
                let normal = &g - &rg;
                let h = (p.z.adjoint() * &normal).map(|x| x.modulus());
                let hnorm = h.norm();
                let d = s.nearest_frame_distance;
                let dl_gap = s.nearest_lambda_gap;
                rg.norm() * d + 0.5 * hnorm * d * d + remainder(d, dl_gap) + dl.abs() * dl_gap
            }
            None => f64::INFINITY,
        };
        OracleResult {
            value: s.value,
            samples,
            nearest_distance: s.nearest_frame_distance,
            discretization_bound: bound,
        }
    }
    // multilinear remainder beyond first order for a degree-4 form with
    // coefficient mass `w1` and component bound `scale`
    let quartic = move |w1: f64| move |d: f64, _: f64| w1 * scale * ((1.0 + d).powi(4) - 1.0 - 4.0 * d);
    Ok(match (cone, t) {
        (ConeId::Op2Nonneg, Tensor::Riemann(r)) => {
            let m = lambda2::operator_matrix(r);
            let a2 = m.norm();
            go(&TraceObjective { a: m, k: 2 }, samples, seed, reference, move |d, _| a2 * d * d)
        }
        (ConeId::RicciK(k), Tensor::Riemann(r)) => {
            let m = r.ricci();
            let a2 = m.norm();
            go(&TraceObjective { a: m, k }, samples, seed, reference, move |d, _| a2 * d * d)
        }
        (ConeId::RicciK(k), Tensor::Kahler(kt)) => {
            let m = kt.ricci();
            let a2 = m.norm();
            go(&TraceObjective { a: m, k }, samples, seed, reference, move |d, _| a2 * d * d)
        }
        (ConeId::Nob, Tensor::Kahler(k)) => {
            go(&BisectionalObjective { k, orthogonal: true }, samples, seed, reference, quartic(1.0))
        }
        (ConeId::Bisectional, Tensor::Kahler(k)) => {
            go(&BisectionalObjective { k, orthogonal: false }, samples, seed, reference, quartic(1.0))
        }
        (ConeId::ComplexSectional, Tensor::Riemann(r)) => {
            go(&ComplexSectionalObjective { r }, samples, seed, reference, quartic(1.0))
        }
        (ConeId::Pic1, Tensor::Riemann(r)) => {
            let base = quartic(6.0);
            let lam_part = move |d: f64, g: f64| {
                // f(S, λ_s) − f(S, λ_w): λ-slope change plus curvature in λ
                base(d, g) + g * 6.0 * scale * ((1.0 + d).powi(4) - 1.0) + g * g * 2.0 * scale
            };
            go(
                &RealFrameObjective { r, k: 4, terms: vec![], isotropic_lambda: true },
                samples,
                seed,
                reference,
                lam_part,
            )
        }
        (ConeId::Pic | ConeId::Sum4 | ConeId::Wpic1ThreeFrame, Tensor::Riemann(r)) => {
            let (k, terms) = real_terms(cone);
            let w1: f64 = terms.iter().map(|(w, _)| w.abs()).sum();
            go(
                &RealFrameObjective { r, k, terms, isotropic_lambda: false },
                samples,
                seed,
                reference,
                quartic(w1),
            )
        }
        _ => unreachable!("compatibility checked above"),
    })
}

/// NOB defect `ℓ = −defect(K, NOB)`: the smallest α with `K + α·id` in NOB.
pub fn nob_shift(k: &Tensor, cfg: &OptimizerConfig) -> Result<f64> {
    Ok(-defect(k, ConeId::Nob, cfg)?.defect)
}

/// Value of the cone functional of `t` at a given frame (and λ for PIC1).
/// Re-evaluating a report's witness this way reproduces its defect.
pub fn evaluate_at(t: &Tensor, cone: ConeId, frame: &Frame, lambda: Option<f64>) -> Result<f64> {
    check_compatible(t, cone)?;
    fn val<T: ToFrame, O: Objective<T>>(obj: &O, frame: &Frame, lambda: f64) -> Result<f64> {
        let z = T::from_frame(frame)
            .ok_or_else(|| Error::InvalidInput("frame has the wrong scalar field".into()))?;
        if z.nrows() != obj.n() || z.ncols() != obj.k() {
            return invalid(format!(
                "frame is {}x{}, the functional needs {}x{}",
                z.nrows(),
                z.ncols(),
                obj.n(),
                obj.k()
            ));
        }
        Ok(obj.value(&z, lambda))
    }
    let l = lambda.unwrap_or(0.0);
    match (cone, t) {
        (ConeId::Op2Nonneg, Tensor::Riemann(r)) => {
            val(&TraceObjective { a: lambda2::operator_matrix(r), k: 2 }, frame, l)
        }
        (ConeId::RicciK(k), Tensor::Riemann(r)) => val(&TraceObjective { a: r.ricci(), k }, frame, l),
        (ConeId::RicciK(k), Tensor::Kahler(kt)) => val(&TraceObjective { a: kt.ricci(), k }, frame, l),
        (ConeId::Nob, Tensor::Kahler(k)) => val(&BisectionalObjective { k, orthogonal: true }, frame, l),
        (ConeId::Bisectional, Tensor::Kahler(k)) => {
            val(&BisectionalObjective { k, orthogonal: false }, frame, l)
        }
        (ConeId::ComplexSectional, Tensor::Riemann(r)) => val(&ComplexSectionalObjective { r }, frame, l),
        (ConeId::Pic1, Tensor::Riemann(r)) => {
            val(&RealFrameObjective { r, k: 4, terms: vec![], isotropic_lambda: true }, frame, l)
        }
        (ConeId::Pic | ConeId::Sum4 | ConeId::Wpic1ThreeFrame, Tensor::Riemann(r)) => {
            let (k, terms) = real_terms(cone);
            val(&RealFrameObjective { r, k, terms, isotropic_lambda: false }, frame, l)
        }
        _ => unreachable!("compatibility checked above"),
    }
}
