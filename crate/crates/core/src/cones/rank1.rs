//! Infimum of the Hermitian form `Q_K` over rank-one matrices whose nonzero
//! eigenvalue has modulus ≤ 1.
//!
//! For `v = x ⊗ ȳ` (entries `v_il = x_i conj(y_l)`) the form is
//! `Q_K(v) = Σ K_ijkl v_il conj(v_jk) = R(x, x̄, y, ȳ)` and the eigenvalue is
//! `⟨x, y⟩ = Σ x_i conj(y_i)`. Writing `c = |⟨x̂, ŷ⟩|` for the unit directions,
//! the constraint allows `|x||y| ≤ 1/c`, so
//!
//! * `u = −∞` when some orthogonal pair has negative bisectional curvature
//!   (scale the nilpotent `x̂ ⊗ ŷ̄` up without bound);
//! * otherwise `u = min(0, inf B(x̂, ŷ)/c²)`.
//!
//! The quotient is searched with `|v| = 1/c` capped at [`RANK1_CAP`]; a
//! minimizer sitting on the cap is reported as not attained.

use nalgebra::DMatrix;
use serde_json::{json, Value};

use super::functional::{contract_first, contract_second};
use super::optim::{self, Geometry, LocalOptions, MultiStart, Objective, Point};
use super::{defect, ConeId, OptimizerConfig};
use crate::error::{invalid, Result};
use crate::linalg::C64;
use crate::rng;
use crate::tensor::{KahlerTensor, Tensor};

pub const RANK1_CAP: f64 = 1e4;

struct Quotient<'a> {
    k: &'a KahlerTensor,
    cmin: f64,
}

fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

impl Objective<C64> for Quotient<'_> {
    fn n(&self) -> usize {
        self.k.dim()
    }
    fn k(&self) -> usize {
        2
    }
    fn geometry(&self) -> Geometry {
        Geometry::Spheres
    }
    fn value(&self, z: &DMatrix<C64>, _: f64) -> f64 {
        let x: Vec<C64> = z.column(0).iter().copied().collect();
        let y: Vec<C64> = z.column(1).iter().copied().collect();
        let c2 = inner(&x, &y).norm_sqr().max(self.cmin * self.cmin);
        self.k.bisectional(&x, &y) / c2
    }
    fn value_grad(&self, z: &DMatrix<C64>, _: f64) -> (f64, DMatrix<C64>, f64) {
        let n = self.k.dim();
        let x: Vec<C64> = z.column(0).iter().copied().collect();
        let y: Vec<C64> = z.column(1).iter().copied().collect();
        let a = contract_second(self.k, &y);
        let b = contract_first(self.k, &x);
        let bis = self.k.bisectional(&x, &y);
        let s = inner(&x, &y);
        let raw_c2 = s.norm_sqr();
        let capped = raw_c2 < self.cmin * self.cmin;
        let c2 = raw_c2.max(self.cmin * self.cmin);
        let mut g = DMatrix::from_element(n, 2, C64::new(0.0, 0.0));
        for j in 0..n {
            let mut gx = C64::new(0.0, 0.0);
            let mut gy = C64::new(0.0, 0.0);
            for i in 0..n {
                gx += a[(i, j)] * x[i];
                gy += b[(i, j)] * y[i];
            }
            let mut gxj = gx * 2.0 / c2;
            let mut gyj = gy * 2.0 / c2;
            if !capped {
                gxj -= y[j] * s * (2.0 * bis / (c2 * c2));
                gyj -= x[j] * s.conj() * (2.0 * bis / (c2 * c2));
            }
            g[(j, 0)] = gxj;
            g[(j, 1)] = gyj;
        }
        (bis / c2, g, 0.0)
    }
}

/// `(Rm a)_jk = Σ_il K_ijkl a_il`.
pub fn rm_apply(k: &KahlerTensor, a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = k.dim();
    DMatrix::from_fn(n, n, |j, kk| {
        let mut s = C64::new(0.0, 0.0);
        for i in 0..n {
            for l in 0..n {
                s += k.get(i, j, kk, l) * a[(i, l)];
            }
        }
        s
    })
}

/// Sesquilinear form `Q(a, b̄) = Σ K_ijkl a_il conj(b_jk)`.
pub fn q_form(k: &KahlerTensor, a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    let ra = rm_apply(k, a);
    ra.iter().zip(b.iter()).map(|(p, q)| p * q.conj()).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rank1Report {
    /// `None` encodes `u = −∞`.
    pub u: Option<f64>,
    pub attained: bool,
    pub diagnostic: String,
    /// Minimum of `Q` over unit-norm rank-one nilpotents (= NOB defect).
    pub nilpotent_min: f64,
    /// Witness `v = x ⊗ ȳ`, normalized so `|x| = 1` and `|⟨x, y⟩| = 1` on the
    /// semisimple stratum; `v = 0` when `u = 0`.
    pub x: Vec<C64>,
    pub y: Vec<C64>,
    /// `|Q(u, w̄) + Q(w, ū) + 2Q(w, w̄)|` for the split `v = u + w` into the
    /// eigen-part and the nilpotent part.
    pub first_variation_residual: f64,
    /// `μ = Re Q(v, ū)`.
    pub mu: f64,
    pub rm_v_norm_sqr: f64,
    pub rm_v_u_abs: f64,
    pub restarts: usize,
    pub converged: bool,
    pub scale: f64,
}

impl Rank1Report {
    pub fn witness_matrix(&self) -> DMatrix<C64> {
        let n = self.x.len();
        DMatrix::from_fn(n, n, |i, l| self.x[i] * self.y[l].conj())
    }

    pub fn to_json(&self) -> Value {
        let cvec = |v: &[C64]| v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>();
        json!({
            "cone": "NOB_RANK1",
            "u": self.u,
            "attained": self.attained,
            "diagnostic": self.diagnostic,
            "nilpotent_min": self.nilpotent_min,
            "witness": {"x": cvec(&self.x), "y": cvec(&self.y)},
            "first_variation_residual": self.first_variation_residual,
            "mu": self.mu,
            "rm_v_norm_sqr": self.rm_v_norm_sqr,
            "rm_v_u_abs": self.rm_v_u_abs,
            "restarts": self.restarts,
            "converged": self.converged,
            "scale": self.scale,
            "nilpotent_normalization": "unit norm",
        })
    }
}

/// Splits `v = x ⊗ ȳ` (`|x| = 1`) into `u = ᾱ x xᴴ` and `w = x y⊥ᴴ`, where
/// `y = α x + y⊥`.
pub fn eigen_nilpotent_split(x: &[C64], y: &[C64]) -> (DMatrix<C64>, DMatrix<C64>) {
    let n = x.len();
    let alpha: C64 = x.iter().zip(y).map(|(a, b)| a.conj() * b).sum();
    let yp: Vec<C64> = (0..n).map(|i| y[i] - x[i] * alpha).collect();
    let u = DMatrix::from_fn(n, n, |i, l| alpha.conj() * x[i] * x[l].conj());
    let w = DMatrix::from_fn(n, n, |i, l| x[i] * yp[l].conj());
    (u, w)
}

pub fn nob_rank1(t: &Tensor, cfg: &OptimizerConfig) -> Result<Rank1Report> {
    let Some(k) = t.as_kahler() else {
        return invalid("the rank-one characterization needs a Kähler tensor");
    };
    let n = k.dim();
    let scale = k.norm();
    let nob = defect(t, ConeId::Nob, cfg)?;
    let zeros = vec![C64::new(0.0, 0.0); n];
    let mut rep = Rank1Report {
        u: Some(0.0),
        attained: true,
        diagnostic: String::new(),
        nilpotent_min: nob.defect,
        x: zeros.clone(),
        y: zeros,
        first_variation_residual: 0.0,
        mu: 0.0,
        rm_v_norm_sqr: 0.0,
        rm_v_u_abs: 0.0,
        restarts: nob.restarts,
        converged: nob.converged,
        scale,
    };
    if scale == 0.0 {
        rep.diagnostic = "zero tensor: Q vanishes identically".into();
        return Ok(rep);
    }
    if nob.defect < -1e-9 * scale {
        rep.u = None;
        rep.attained = false;
        rep.diagnostic = format!(
            "unbounded below: orthogonal bisectional minimum {:.6e} < 0, Q decreases without bound along scaled nilpotents",
            nob.defect
        );
        return Ok(rep);
    }
    let obj = Quotient { k, cmin: 1.0 / RANK1_CAP };
    let opts = LocalOptions { gtol: cfg.gtol * scale, max_iters: cfg.max_iters, scale };
    let bis = defect(t, ConeId::Bisectional, cfg)?;
    let warm: Vec<Point<C64>> = match &bis.witness {
        crate::tensor::Frame::Complex(z) => vec![Point { z: z.clone(), lambda: 0.0 }],
        crate::tensor::Frame::Real(_) => vec![],
    };
    let ms = MultiStart { restarts: cfg.restarts, seed: rng::derive_seed(cfg.seed, 0x7261_6e6b), opts };
    let best = optim::multistart(&obj, &warm, &ms);
    rep.restarts += ms.restarts + warm.len();
    if best.value >= 0.0 {
        rep.diagnostic = "bisectional curvature nonnegative: infimum 0 attained at v = 0".into();
        return Ok(rep);
    }
    let x: Vec<C64> = best.point.z.column(0).iter().copied().collect();
    let yh: Vec<C64> = best.point.z.column(1).iter().copied().collect();
    let c = inner(&x, &yh).norm();
    let on_cap = c <= obj.cmin * 1.01;
    let y: Vec<C64> = yh.iter().map(|z| z / c.max(obj.cmin)).collect();
    rep.u = Some(best.value);
    rep.attained = !on_cap;
    rep.converged = rep.converged && best.stationarity <= 1e-8 * scale.max(best.value.abs());
    rep.diagnostic = if on_cap {
        format!("minimizing sequence reaches |v| = {RANK1_CAP:e}; infimum not attained")
    } else {
        "attained on the semisimple stratum".into()
    };
    let v = DMatrix::from_fn(n, n, |i, l| x[i] * y[l].conj());
    let (uu, ww) = eigen_nilpotent_split(&x, &y);
    let fv = q_form(k, &uu, &ww) + q_form(k, &ww, &uu) + q_form(k, &ww, &ww) * 2.0;
    rep.first_variation_residual = fv.norm();
    let rmv = rm_apply(k, &v);
    rep.rm_v_norm_sqr = rmv.iter().map(|z| z.norm_sqr()).sum();
    let qvu = q_form(k, &v, &uu);
    rep.rm_v_u_abs = qvu.norm();
    rep.mu = qvu.re;
    rep.x = x;
    rep.y = y;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> OptimizerConfig {
        OptimizerConfig { restarts: 8, oracle_samples: 128, ..Default::default() }
    }

    #[test]
    fn q_of_rank_one_is_bisectional() {
        let mut g = rng::seeded(3);
        let raw: Vec<C64> = (0..81).map(|_| C64::new(rng::normal(&mut g), rng::normal(&mut g))).collect();
        let k = KahlerTensor::project(3, &raw).unwrap();
        let x: Vec<C64> = (0..3).map(|_| C64::new(rng::normal(&mut g), rng::normal(&mut g))).collect();
        let y: Vec<C64> = (0..3).map(|_| C64::new(rng::normal(&mut g), rng::normal(&mut g))).collect();
        let v = DMatrix::from_fn(3, 3, |i, l| x[i] * y[l].conj());
        let q = q_form(&k, &v, &v);
        assert!((q.re - k.bisectional(&x, &y)).abs() < 1e-11);
        assert!(q.im.abs() < 1e-11);
    }

    #[test]
    fn fubini_study_has_zero_infimum_and_unit_nilpotent_minimum() {
        let t: Tensor = KahlerTensor::fubini_study(2, 1.0).into();
        let r = nob_rank1(&t, &cfg()).unwrap();
        assert_eq!(r.u, Some(0.0));
        assert!((r.nilpotent_min - 1.0).abs() < 1e-9);
    }

    #[test]
    fn negative_orthogonal_bisectional_is_unbounded() {
        let t = Tensor::from(KahlerTensor::fubini_study(2, 1.0)).shifted(-2.0);
        let r = nob_rank1(&t, &cfg()).unwrap();
        assert_eq!(r.u, None);
        assert!(!r.attained);
    }

    #[test]
    fn split_reassembles_and_w_is_nilpotent() {
        let mut g = rng::seeded(9);
        let mut x: Vec<C64> = (0..3).map(|_| C64::new(rng::normal(&mut g), rng::normal(&mut g))).collect();
        let nx = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        x.iter_mut().for_each(|z| *z /= nx);
        let y: Vec<C64> = (0..3).map(|_| C64::new(rng::normal(&mut g), rng::normal(&mut g))).collect();
        let (u, w) = eigen_nilpotent_split(&x, &y);
        let v = DMatrix::from_fn(3, 3, |i, l| x[i] * y[l].conj());
        assert!((&u + &w - v).norm() < 1e-14);
        assert!((&w * &w).norm() < 1e-14);
    }
}
