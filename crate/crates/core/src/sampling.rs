//! Seeded random curvature tensors, cone-conditioned samplers and fixtures.
//!
//! Cone members are produced by shifting a Gaussian tensor along the cone's
//! identity direction: the round sphere `sphere(n, 1)` for Riemannian cones
//! and `fubini_study(n, 1)` for Kähler ones.

use std::str::FromStr;

use serde_json::{json, Value};

use crate::cones::{self, ConeId, ConeReport, OptimizerConfig, WarmStart};
use crate::error::{invalid, Error, Result};
use crate::linalg::C64;
use crate::rng;
use crate::tensor::{KahlerTensor, Kind, RiemannTensor, Tensor};

pub use crate::tensor::{fixture, product, FixtureSpec};

/// Newton iterations allowed for non-affine cones.
pub const MAX_SHIFT_ITERS: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplerConfig {
    pub dim: usize,
    pub seed: u64,
    /// Standard deviation of the raw Gaussian components.
    pub scale: f64,
    pub cone: Option<ConeId>,
    /// Target defect for cone sampling (absolute).
    pub margin: f64,
}

impl SamplerConfig {
    pub fn new(dim: usize, seed: u64) -> Self {
        Self { dim, seed, scale: 1.0, cone: None, margin: 0.0 }
    }

    pub fn with_cone(mut self, cone: ConeId, margin: f64) -> Self {
        self.cone = Some(cone);
        self.margin = margin;
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return invalid("dimension must be positive");
        }
        if !(self.scale >= 0.0 && self.scale.is_finite()) {
            return invalid(format!("scale must be finite and ≥ 0, got {}", self.scale));
        }
        if self.cone.is_some() && !(self.margin >= 0.0 && self.margin.is_finite()) {
            return invalid(format!("margin must be finite and ≥ 0, got {}", self.margin));
        }
        Ok(())
    }
}

/// Gaussian 4-index array projected onto the curvature-tensor subspace.
pub fn random_tensor(kind: Kind, cfg: &SamplerConfig) -> Result<Tensor> {
    cfg.validate()?;
    let n = cfg.dim;
    let mut g = rng::seeded(cfg.seed);
    Ok(match kind {
        Kind::Riemann => {
            let raw: Vec<f64> = (0..n.pow(4)).map(|_| cfg.scale * rng::normal(&mut g)).collect();
            RiemannTensor::project(n, &raw)?.into()
        }
        Kind::Kahler => {
            let s = cfg.scale * std::f64::consts::FRAC_1_SQRT_2;
            let raw: Vec<C64> = (0..n.pow(4))
                .map(|_| C64::new(s * rng::normal(&mut g), s * rng::normal(&mut g)))
                .collect();
            KahlerTensor::project(n, &raw)?.into()
        }
    })
}

/// A cone member together with how it was produced.
#[derive(Clone, Debug)]
pub struct ConeSample {
    pub tensor: Tensor,
    pub cone: ConeId,
    /// Coefficient of the identity added to the Gaussian draw.
    pub shift: f64,
    /// Defect of the sample as measured by the sampler's last optimizer call.
    pub report: ConeReport,
    /// Defect of the unshifted draw.
    pub raw_defect: f64,
    pub iterations: usize,
}

impl ConeSample {
    pub fn to_json(&self) -> Value {
        json!({
            "cone": self.cone.to_string(),
            "shift": self.shift,
            "raw_defect": self.raw_defect,
            "defect": self.report.defect,
            "iterations": self.iterations,
        })
    }
}

/// Draws [`random_tensor`] and shifts it along the identity so that its
/// defect equals `cfg.margin`. Affine cones need one defect evaluation; PIC1
/// and BISECTIONAL use a cutting-plane Newton iteration on the (concave,
/// increasing) defect-versus-shift curve, finished by a step that guarantees
/// defect ≥ margin.
pub fn sample_in_cone(kind: Kind, cfg: &SamplerConfig, opt: &OptimizerConfig) -> Result<ConeSample> {
    let cone = cfg
        .cone
        .ok_or_else(|| Error::InvalidInput("sample_in_cone needs a cone".into()))?;
    if !cone.accepts(kind) {
        return invalid(format!("cone {cone} does not apply to {} tensors", kind.as_str()));
    }
    let t = random_tensor(kind, cfg)?;
    shift_into_cone(&t, cone, cfg.margin, opt)
}

/// Shifts an arbitrary tensor so that its `cone` defect equals `margin`.
pub fn shift_into_cone(
    t: &Tensor,
    cone: ConeId,
    margin: f64,
    opt: &OptimizerConfig,
) -> Result<ConeSample> {
    let (kind, n) = (t.kind(), t.dim());
    let base = cones::defect(t, cone, opt)?;
    let raw_defect = base.defect;
    if let Some(gain) = cone.affine_gain(kind, n) {
        let shift = (margin - raw_defect) / gain;
        let tensor = t.shifted(shift);
        let report = cones::defect_warm(&tensor, cone, opt, &WarmStart { reports: vec![&base] })?;
        return Ok(ConeSample { tensor, cone, shift, report, raw_defect, iterations: 1 });
    }

    let (g_lo, g_hi) = cone.gain_range(kind, n);
    let tol = 1e-12 * t.norm().max(1.0);
    let mut beta = if raw_defect > margin { (margin - raw_defect) / g_lo } else { 0.0 };
    let mut prev = base;
    let mut history: Vec<(f64, f64)> = Vec::new();
    for it in 0..MAX_SHIFT_ITERS {
        let cur = t.shifted(beta);
        let r = cones::defect_warm(&cur, cone, opt, &WarmStart { reports: vec![&prev] })?;
        history.push((beta, r.defect));
        let gap = margin - r.defect;
        if gap <= tol {
            // f(β + δ) ≥ f(β) + g_lo·δ, so one more step of gap/g_lo lands on
            // or above the margin
            let step = gap.max(0.0) / g_lo;
            let tensor = t.shifted(beta + step);
            let report = if step > 0.0 {
                cones::defect_warm(&tensor, cone, opt, &WarmStart { reports: vec![&r] })?
            } else {
                r
            };
            return Ok(ConeSample { tensor, cone, shift: beta + step, report, raw_defect, iterations: it + 1 });
        }
        let slope = identity_slope(&r, kind, n)?.clamp(g_lo, g_hi);
        beta += gap / slope;
        prev = r;
    }
    Err(Error::Sampler(format!(
        "shift iteration for {cone} did not reach margin {margin} in {MAX_SHIFT_ITERS} steps; \
         last (shift, defect) pairs: {:?}",
        &history[history.len().saturating_sub(3)..]
    )))
}

/// Contribution of the identity tensor to the functional at the witness: a
/// supergradient of the defect as a function of the shift.
fn identity_slope(r: &ConeReport, kind: Kind, n: usize) -> Result<f64> {
    cones::evaluate_at(&Tensor::identity(kind, n), r.cone, &r.witness, r.lambda)
}

fn parse_args(s: &str) -> Option<(&str, Vec<&str>)> {
    let s = s.trim();
    let open = s.find('(')?;
    if !s.ends_with(')') {
        return None;
    }
    let name = s[..open].trim();
    let inner = &s[open + 1..s.len() - 1];
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0usize, 0usize);
    for (i, ch) in inner.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.checked_sub(1)?,
            ',' if depth == 0 => {
                parts.push(inner[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(inner[start..].trim());
    Some((name, parts))
}

/// Parses `flat(riemann|kahler, n)`, `sphere(n, c)`, `fubini_study(n, c)`
/// (alias `fs`) and `product(A, B)`.
impl FromStr for FixtureSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("cannot parse fixture {s:?}"));
        let (name, args) = parse_args(s).ok_or_else(bad)?;
        let num = |a: &str| a.parse::<f64>().map_err(|_| bad());
        let dim = |a: &str| a.parse::<usize>().map_err(|_| bad());
        match (name, args.as_slice()) {
            ("flat", [k, n]) => {
                let kind = match *k {
                    "riemann" => Kind::Riemann,
                    "kahler" => Kind::Kahler,
                    _ => return Err(bad()),
                };
                Ok(FixtureSpec::Flat { kind, dim: dim(n)? })
            }
            ("sphere", [n, c]) => Ok(FixtureSpec::Sphere { dim: dim(n)?, c: num(c)? }),
            ("fubini_study" | "fs", [n, c]) => Ok(FixtureSpec::FubiniStudy { dim: dim(n)?, c: num(c)? }),
            ("product", [a, b]) => Ok(FixtureSpec::Product(Box::new(a.parse()?), Box::new(b.parse()?))),
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opt() -> OptimizerConfig {
        OptimizerConfig { restarts: 8, oracle_samples: 128, ..Default::default() }
    }

    #[test]
    fn same_seed_is_bit_identical_and_zero_scale_is_zero() {
        let c = SamplerConfig::new(4, 3);
        assert_eq!(random_tensor(Kind::Riemann, &c).unwrap(), random_tensor(Kind::Riemann, &c).unwrap());
        let z = random_tensor(Kind::Kahler, &c.with_scale(0.0)).unwrap();
        assert_eq!(z.norm(), 0.0);
    }

    #[test]
    fn nob_boundary_sample() {
        let c = SamplerConfig::new(2, 5).with_cone(ConeId::Nob, 0.0);
        let s = sample_in_cone(Kind::Kahler, &c, &opt()).unwrap();
        assert!(s.report.defect.abs() <= 1e-6 * s.tensor.norm());
    }

    #[test]
    fn bisectional_newton_reaches_margin() {
        let c = SamplerConfig::new(2, 6).with_cone(ConeId::Bisectional, 0.25);
        let s = sample_in_cone(Kind::Kahler, &c, &opt()).unwrap();
        assert!(s.report.defect >= 0.25 - 1e-9, "{}", s.report.defect);
        assert!(s.report.defect <= 0.25 + 1e-6);
    }

    #[test]
    fn fixture_strings_parse() {
        let f: FixtureSpec = "product(fs(1,1), flat(kahler,1))".parse().unwrap();
        let t = fixture(&f).unwrap();
        assert_eq!(t.dim(), 2);
        assert!("sphere(3)".parse::<FixtureSpec>().is_err());
        assert!("product(sphere(2,1), fs(1,1))".parse::<FixtureSpec>().map(|f| fixture(&f)).unwrap().is_err());
    }
}
