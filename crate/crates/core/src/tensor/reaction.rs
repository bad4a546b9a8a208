//! Quadratic reaction terms of the curvature evolution under Ricci flow
//! (Riemannian `ℛ² + ℛ#`) and Kähler–Ricci flow in Uhlenbeck gauge.

use nalgebra::DMatrix;

use super::kahler::KahlerTensor;
use super::lambda2::{self, StructureConstants};
use super::riemann::{bianchi_residual, idx, remove_bianchi, RiemannTensor};
use crate::linalg::C64;

/// `ℛ² + ℛ#` as a 4-index array, before any Bianchi projection.
pub fn riemann_reaction_raw(r: &RiemannTensor) -> Vec<f64> {
    let n = r.dim();
    if n < 2 {
        return vec![0.0; n.pow(4)];
    }
    let m = lambda2::operator_matrix(r);
    let sc = StructureConstants::cached(n);
    let q = &m * &m + sc.sharp(&m);
    lambda2::components_from_operator(n, &q)
}

/// Riemannian reaction `ℛ² + ℛ#`, Bianchi-projected. On the unit sphere
/// `S(n)` this returns `(n − 1) S(n)`.
pub fn reaction_riemann(r: &RiemannTensor) -> RiemannTensor {
    let raw = riemann_reaction_raw(r);
    RiemannTensor::from_raw_unchecked(r.dim(), remove_bianchi(r.dim(), &raw))
}

/// Reaction plus the first-Bianchi residual of the unprojected result.
pub fn reaction_riemann_with_residual(r: &RiemannTensor) -> (RiemannTensor, f64) {
    let raw = riemann_reaction_raw(r);
    let res = bianchi_residual(r.dim(), &raw);
    (RiemannTensor::from_raw_unchecked(r.dim(), remove_bianchi(r.dim(), &raw)), res)
}

/// Kähler reaction
/// `Q_{ij̄kl̄} = Σ_{pq} R_{ij̄qp̄}R_{pq̄kl̄} + R_{il̄qp̄}R_{pq̄kj̄} − R_{ip̄kq̄}R_{pj̄ql̄}`.
/// No projection is applied; the formula preserves the Kähler symmetries.
pub fn reaction_kahler(k: &KahlerTensor) -> KahlerTensor {
    let n = k.dim();
    let nn = n * n;
    let c = k.components();
    // first term as a product over the pair (q, p)
    let a = DMatrix::from_fn(nn, nn, |r, s| c[idx(n, r / n, r % n, s / n, s % n)]);
    let b = DMatrix::from_fn(nn, nn, |r, s| {
        let (q, p) = (r / n, r % n);
        c[idx(n, p, q, s / n, s % n)]
    });
    let t1 = a * b;
    // third term indexed by (i, k) × (j, l)
    let cm = DMatrix::from_fn(nn, nn, |r, s| c[idx(n, r / n, s / n, r % n, s % n)]);
    let dm = DMatrix::from_fn(nn, nn, |r, s| c[idx(n, r / n, s / n, r % n, s % n)]);
    let t3 = cm * dm;
    let mut out = vec![C64::new(0.0, 0.0); n.pow(4)];
    for i in 0..n {
        for j in 0..n {
            for kk in 0..n {
                for l in 0..n {
                    out[idx(n, i, j, kk, l)] = t1[(i * n + j, kk * n + l)]
                        + t1[(i * n + l, kk * n + j)]
                        - t3[(i * n + kk, j * n + l)];
                }
            }
        }
    }
    KahlerTensor::from_raw_unchecked(n, out)
}

/// `Σ_{pq} R_{ij̄qp̄} Ric_{pq̄}`, the trace of the Kähler reaction.
pub fn kahler_ricci_reaction(k: &KahlerTensor) -> DMatrix<C64> {
    let n = k.dim();
    let ric = k.ricci();
    DMatrix::from_fn(n, n, |i, j| {
        let mut s = C64::new(0.0, 0.0);
        for p in 0..n {
            for q in 0..n {
                s += k.get(i, j, q, p) * ric[(p, q)];
            }
        }
        s
    })
}

/// `Σ_{kl} R_ikjl Ric_kl`, the Ricci contraction of the Riemannian reaction.
pub fn riemann_ricci_reaction(r: &RiemannTensor) -> DMatrix<f64> {
    let n = r.dim();
    let ric = r.ricci();
    DMatrix::from_fn(n, n, |i, j| {
        let mut s = 0.0;
        for k in 0..n {
            for l in 0..n {
                s += r.get(i, k, j, l) * ric[(k, l)];
            }
        }
        s
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn random_riemann(n: usize, seed: u64) -> RiemannTensor {
        let mut r = rng::seeded(seed);
        let raw: Vec<f64> = (0..n.pow(4)).map(|_| rng::normal(&mut r)).collect();
        RiemannTensor::project(n, &raw).unwrap()
    }

    fn random_kahler(n: usize, seed: u64) -> KahlerTensor {
        let mut r = rng::seeded(seed);
        let raw: Vec<C64> =
            (0..n.pow(4)).map(|_| C64::new(rng::normal(&mut r), rng::normal(&mut r))).collect();
        KahlerTensor::project(n, &raw).unwrap()
    }

    #[test]
    fn three_sphere_reaction_constant_is_two() {
        let out = reaction_riemann(&RiemannTensor::sphere(3, 1.0));
        let want = RiemannTensor::sphere(3, 2.0);
        assert!(out.max_abs_diff(&want) < 1e-12 * out.norm());
    }

    #[test]
    fn sphere_reaction_constant_is_n_minus_one() {
        for n in 2..8 {
            let c = 0.8;
            let out = reaction_riemann(&RiemannTensor::sphere(n, c));
            let want = RiemannTensor::sphere(n, (n as f64 - 1.0) * c * c);
            assert!(out.max_abs_diff(&want) < 1e-12 * want.norm().max(1.0));
        }
    }

    #[test]
    fn riemann_reaction_preserves_bianchi_before_projection() {
        for (n, seed) in [(3, 1), (4, 2), (5, 3)] {
            let r = random_riemann(n, seed);
            let (_, res) = reaction_riemann_with_residual(&r);
            assert!(res < 1e-10 * r.norm().powi(2), "n={n} residual {res}");
        }
    }

    #[test]
    fn riemann_reaction_ricci_contracts_against_ricci() {
        for (n, seed) in [(3, 5), (4, 6), (6, 7)] {
            let r = random_riemann(n, seed);
            let lhs = reaction_riemann(&r).ricci();
            let rhs = riemann_ricci_reaction(&r);
            assert!((lhs - rhs).abs().max() < 1e-10 * r.norm().powi(2));
        }
    }

    #[test]
    fn kahler_reaction_keeps_symmetries_and_traces() {
        for (n, seed) in [(1, 1), (2, 2), (3, 3)] {
            let k = random_kahler(n, seed);
            let q = reaction_kahler(&k);
            let s2 = k.norm().powi(2);
            assert!(q.symmetry_residual() < 1e-12 * s2);
            let diff = q.ricci() - kahler_ricci_reaction(&k);
            assert!(diff.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12 * s2);
        }
    }

    #[test]
    fn fubini_study_reaction_constant() {
        // hand-computed: Q(FS(n,1)) = (n+1) FS(n,1)
        let q = reaction_kahler(&KahlerTensor::fubini_study(2, 1.0));
        let want = KahlerTensor::fubini_study(2, 3.0);
        assert!(q.max_abs_diff(&want) < 1e-12 * q.norm());
    }

    #[test]
    fn zero_is_a_fixed_point() {
        assert_eq!(reaction_riemann(&RiemannTensor::zero(4)), RiemannTensor::zero(4));
        assert_eq!(reaction_kahler(&KahlerTensor::zero(3)), KahlerTensor::zero(3));
    }
}
