//! Multi-start Riemannian gradient descent on Stiefel manifolds and products
//! of unit spheres, real or complex, with an optional box variable in [0, 1].

use nalgebra::{ComplexField, DMatrix};
use rand::Rng;
use rayon::prelude::*;

use crate::linalg::{self, C64};
use crate::rng;

/// Real or complex scalar usable as frame entries.
pub trait Scalar: ComplexField<RealField = f64> + Copy + Send + Sync {
    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self;
    fn re_dot(a: &DMatrix<Self>, b: &DMatrix<Self>) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x.conjugate() * *y).real()).sum()
    }
}

impl Scalar for f64 {
    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng::normal(rng)
    }
}

impl Scalar for C64 {
    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        C64::new(s * rng::normal(rng), s * rng::normal(rng))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometry {
    /// Orthonormal (unitary) k-frames.
    Stiefel,
    /// Each column independently of unit length.
    Spheres,
}

/// Objective on frames `Z` (n×k) and an optional parameter `λ ∈ [0, 1]`.
pub trait Objective<T: Scalar>: Sync {
    fn n(&self) -> usize;
    fn k(&self) -> usize;
    fn geometry(&self) -> Geometry;
    fn has_lambda(&self) -> bool {
        false
    }
    fn value(&self, z: &DMatrix<T>, lambda: f64) -> f64;
    /// Value, Euclidean gradient for the real inner product `Re tr(AᴴB)`, and
    /// the λ-derivative (0 when unused).
    fn value_grad(&self, z: &DMatrix<T>, lambda: f64) -> (f64, DMatrix<T>, f64);
}

#[derive(Clone, Debug, PartialEq)]
pub struct Point<T: Scalar> {
    pub z: DMatrix<T>,
    pub lambda: f64,
}

#[derive(Clone, Debug)]
pub struct LocalResult<T: Scalar> {
    pub point: Point<T>,
    pub value: f64,
    /// Norm of the Riemannian (projected) gradient at `point`.
    pub stationarity: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct LocalOptions {
    pub gtol: f64,
    pub max_iters: usize,
    /// Typical objective magnitude, used for the first step length.
    pub scale: f64,
}

pub fn random_point<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    k: usize,
    geom: Geometry,
    with_lambda: bool,
) -> Point<T> {
    let g = DMatrix::from_fn(n, k, |_, _| T::gaussian(rng));
    let z = match geom {
        Geometry::Stiefel => linalg::qf(&g),
        Geometry::Spheres => normalize_columns(g),
    };
    let lambda = if with_lambda { rng::uniform(rng) } else { 0.0 };
    Point { z, lambda }
}

fn normalize_columns<T: Scalar>(mut z: DMatrix<T>) -> DMatrix<T> {
    for mut c in z.column_iter_mut() {
        let nrm = c.norm();
        if nrm > 0.0 {
            c /= T::from_real(nrm);
        }
    }
    z
}

pub fn retract<T: Scalar>(geom: Geometry, z: DMatrix<T>) -> DMatrix<T> {
    match geom {
        Geometry::Stiefel => linalg::qf(&z),
        Geometry::Spheres => normalize_columns(z),
    }
}

/// Projection of an ambient gradient onto the tangent space at `z`.
pub fn tangent<T: Scalar>(geom: Geometry, z: &DMatrix<T>, g: &DMatrix<T>) -> DMatrix<T> {
    match geom {
        Geometry::Stiefel => {
            let a = z.adjoint() * g;
            let h = (&a + a.adjoint()) * T::from_real(0.5);
            g - z * h
        }
        Geometry::Spheres => {
            let mut out = g.clone();
            for j in 0..z.ncols() {
                let zc = z.column(j);
                let gc = g.column(j);
                let r: f64 = zc.iter().zip(gc.iter()).map(|(a, b)| (a.conjugate() * *b).real()).sum();
                for i in 0..z.nrows() {
                    out[(i, j)] = gc[i] - zc[i] * T::from_real(r);
                }
            }
            out
        }
    }
}

/// Projected λ-gradient on the box [0, 1].
fn lambda_pg(lambda: f64, dl: f64) -> f64 {
    lambda - (lambda - dl).clamp(0.0, 1.0)
}

/// Riemannian gradient norm at a point (including the λ box component).
pub fn stationarity<T: Scalar, O: Objective<T> + ?Sized>(obj: &O, p: &Point<T>) -> f64 {
    let (_, g, dl) = obj.value_grad(&p.z, p.lambda);
    let rg = tangent(obj.geometry(), &p.z, &g);
    let pl = if obj.has_lambda() { lambda_pg(p.lambda, dl) } else { 0.0 };
    (rg.norm_squared() + pl * pl).sqrt()
}

/// Armijo-backtracking gradient descent with Barzilai–Borwein initial steps.
pub fn local_minimize<T: Scalar, O: Objective<T> + ?Sized>(
    obj: &O,
    start: Point<T>,
    opts: &LocalOptions,
) -> LocalResult<T> {
    let geom = obj.geometry();
    let with_l = obj.has_lambda();
    let mut p = start;
    let (mut f, g, mut dl) = obj.value_grad(&p.z, p.lambda);
    let mut rg = tangent(geom, &p.z, &g);
    let mut step = 1.0 / opts.scale.max(1e-300);
    let mut iters = 0;
    let gnorm = |rg: &DMatrix<T>, lam: f64, dl: f64| -> f64 {
        let pl = if with_l { lambda_pg(lam, dl) } else { 0.0 };
        (rg.norm_squared() + pl * pl).sqrt()
    };
    let mut gn = gnorm(&rg, p.lambda, dl);
    while iters < opts.max_iters && gn > opts.gtol {
        iters += 1;
        let mut t = step;
        let mut accepted = None;
        let mut first = None;
        for _ in 0..60 {
            let zt = retract(geom, &p.z - &rg * T::from_real(t));
            let lt = if with_l { (p.lambda - t * dl).clamp(0.0, 1.0) } else { p.lambda };
            let ft = obj.value(&zt, lt);
            // Armijo on the actual displacement
            let moved = (&zt - &p.z).norm_squared() + (lt - p.lambda).powi(2);
            if ft <= f - 1e-4 * moved / t {
                accepted = Some((zt, lt));
                break;
            }
            if first.is_none() {
                first = Some((zt, lt, ft));
            }
            t *= 0.5;
        }
        let mut next = None;
        if let Some((zn, ln)) = accepted {
            let (fv, gfull, dln) = obj.value_grad(&zn, ln);
            next = Some((zn, ln, fv, gfull, dln));
        } else if let Some((zt, lt, ft)) = first {
            // below round-off the values stop discriminating; take the step
            // if it does not increase f measurably and shrinks the gradient
            if ft - f <= 1e-14 * opts.scale.max(f.abs()) {
                let (fv, gfull, dln) = obj.value_grad(&zt, lt);
                let rgt = tangent(geom, &zt, &gfull);
                if gnorm(&rgt, lt, dln) < gn {
                    next = Some((zt, lt, fv, gfull, dln));
                }
            }
        }
        let Some((zn, ln, fn_, gn_full, dln)) = next else {
            break;
        };
        let rgn = tangent(geom, &zn, &gn_full);
        // Barzilai-Borwein step from ambient differences
        let s = &zn - &p.z;
        let y = &rgn - &rg;
        let sl = ln - p.lambda;
        let yl = if with_l { dln - dl } else { 0.0 };
        let ss = s.norm_squared() + sl * sl;
        let sy = (T::re_dot(&s, &y) + sl * yl).abs();
        step = if sy > 0.0 { (ss / sy).clamp(1e-12 / opts.scale.max(1e-300), 1e6) } else { t * 2.0 };
        let improvement = f - fn_;
        p = Point { z: zn, lambda: ln };
        f = fn_;
        rg = rgn;
        dl = dln;
        gn = gnorm(&rg, p.lambda, dl);
        if improvement.abs() <= 1e-17 * opts.scale.max(f.abs()) && gn <= 1e3 * opts.gtol {
            break;
        }
    }
    if with_l {
        // ties at the endpoints go to the endpoint
        for end in [0.0, 1.0] {
            if p.lambda != end && (p.lambda - end).abs() < 1e-6 {
                let fe = obj.value(&p.z, end);
                if fe <= f + 1e-14 * opts.scale {
                    p.lambda = end;
                    f = fe;
                }
            }
        }
    }
    let stat = stationarity(obj, &p);
    LocalResult { point: p, value: f, stationarity: stat, iterations: iters }
}

#[derive(Clone, Copy, Debug)]
pub struct MultiStart {
    pub restarts: usize,
    pub seed: u64,
    pub opts: LocalOptions,
}

/// Runs warm starts followed by `restarts` random starts in parallel and
/// returns the best result; ties are resolved by start index, so the outcome
/// does not depend on scheduling.
pub fn multistart<T: Scalar, O: Objective<T>>(
    obj: &O,
    warm: &[Point<T>],
    ms: &MultiStart,
) -> LocalResult<T> {
    let total = warm.len() + ms.restarts;
    assert!(total > 0, "multistart needs at least one start");
    let results: Vec<LocalResult<T>> = (0..total)
        .into_par_iter()
        .map(|i| {
            let start = if i < warm.len() {
                warm[i].clone()
            } else {
                let mut r = rng::task_rng(ms.seed, (i - warm.len()) as u64);
                random_point(&mut r, obj.n(), obj.k(), obj.geometry(), obj.has_lambda())
            };
            local_minimize(obj, start, &ms.opts)
        })
        .collect();
    best_of(results)
}

pub fn best_of<T: Scalar>(results: Vec<LocalResult<T>>) -> LocalResult<T> {
    let mut it = results.into_iter();
    let mut best = it.next().expect("non-empty");
    for r in it {
        if r.value < best.value {
            best = r;
        }
    }
    best
}

/// Minimum of the objective over `samples` independent random points; the
/// sampling oracle. When a reference point is given, also reports the frame
/// distance and λ gap of the sample nearest to it.
pub struct SampleMin<T: Scalar> {
    pub value: f64,
    pub best: Point<T>,
    pub nearest_frame_distance: f64,
    pub nearest_lambda_gap: f64,
}

pub fn sample_min<T: Scalar, O: Objective<T>>(
    obj: &O,
    samples: usize,
    seed: u64,
    reference: Option<&Point<T>>,
) -> SampleMin<T> {
    const CHUNK: usize = 512;
    let chunks = samples.div_ceil(CHUNK).max(1);
    let parts: Vec<(SampleMin<T>, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::task_rng(seed, c as u64);
            let count = CHUNK.min(samples.saturating_sub(c * CHUNK));
            let mut best: Option<(f64, Point<T>)> = None;
            let mut near = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
            for _ in 0..count {
                let p: Point<T> =
                    random_point(&mut r, obj.n(), obj.k(), obj.geometry(), obj.has_lambda());
                let v = obj.value(&p.z, p.lambda);
                if let Some(q) = reference {
                    let dz = (&p.z - &q.z).norm();
                    let dl = (p.lambda - q.lambda).abs();
                    let tot = dz * dz + dl * dl;
                    if tot < near.0 {
                        near = (tot, dz, dl);
                    }
                }
                if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                    best = Some((v, p));
                }
            }
            match best {
                Some((value, best)) => (SampleMin {
                    value,
                    best,
                    nearest_frame_distance: near.1,
                    nearest_lambda_gap: near.2,
                }, near.0),
                None => (SampleMin {
                    value: f64::INFINITY,
                    best: Point { z: DMatrix::zeros(obj.n(), obj.k()), lambda: 0.0 },
                    nearest_frame_distance: near.1,
                    nearest_lambda_gap: near.2,
                }, near.0),
            }
        })
        .collect();
    let mut it = parts.into_iter();
    let (mut acc, mut near) = it.next().expect("at least one chunk");
    for (p, d) in it {
        if d < near {
            near = d;
            acc.nearest_frame_distance = p.nearest_frame_distance;
            acc.nearest_lambda_gap = p.nearest_lambda_gap;
        }
        if p.value < acc.value {
            acc.value = p.value;
            acc.best = p.best;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Rayleigh quotient sum tr(Zᴴ A Z): minimum is the sum of the k smallest
    /// eigenvalues (Ky Fan).
    struct Trace {
        a: DMatrix<f64>,
        k: usize,
    }

    impl Objective<f64> for Trace {
        fn n(&self) -> usize {
            self.a.nrows()
        }
        fn k(&self) -> usize {
            self.k
        }
        fn geometry(&self) -> Geometry {
            Geometry::Stiefel
        }
        fn value(&self, z: &DMatrix<f64>, _: f64) -> f64 {
            (z.transpose() * &self.a * z).trace()
        }
        fn value_grad(&self, z: &DMatrix<f64>, l: f64) -> (f64, DMatrix<f64>, f64) {
            (self.value(z, l), &self.a * z * 2.0, 0.0)
        }
    }

    #[test]
    fn recovers_ky_fan_minimum() {
        let mut r = rng::seeded(4);
        let g = rng::gaussian_matrix(&mut r, 6, 6);
        let a = &g + g.transpose();
        let ev = linalg::sym_eigenvalues(&a);
        let obj = Trace { a, k: 2 };
        let ms = MultiStart {
            restarts: 4,
            seed: 1,
            opts: LocalOptions { gtol: 1e-10, max_iters: 5000, scale: 5.0 },
        };
        let best = multistart(&obj, &[], &ms);
        assert!((best.value - (ev[0] + ev[1])).abs() < 1e-9, "{} vs {}", best.value, ev[0] + ev[1]);
        assert!(best.stationarity < 1e-8);
        let s = sample_min(&obj, 2000, 3, Some(&best.point));
        assert!(s.value >= best.value - 1e-12);
        assert!(s.nearest_frame_distance.is_finite());
    }

    #[test]
    fn multistart_is_deterministic() {
        let mut r = rng::seeded(8);
        let g = rng::gaussian_matrix(&mut r, 5, 5);
        let obj = Trace { a: &g + g.transpose(), k: 3 };
        let ms = MultiStart {
            restarts: 6,
            seed: 9,
            opts: LocalOptions { gtol: 1e-10, max_iters: 3000, scale: 5.0 },
        };
        let a = multistart(&obj, &[], &ms);
        let b = multistart(&obj, &[], &ms);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.point, b.point);
    }
}
