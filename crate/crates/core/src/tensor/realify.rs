//! Underlying real curvature tensor of a Kähler tensor.
//!
//! Real basis ordering: `x_k ↦ 2k`, `y_k = J x_k ↦ 2k + 1`. With
//! `E_k = (x_k − i y_k)/√2` the complexified tensor has
//! `Rm(E_i, Ē_j, Ē_l, E_k) = R_{ij̄kl̄}`, which makes holomorphic sectional
//! curvature equal to the sectional curvature of the J-invariant plane:
//! `realify(fubini_study(1, 1)) = sphere(2, 2)`.

use nalgebra::DMatrix;

use super::kahler::KahlerTensor;
use super::riemann::{idx, RiemannTensor};
use crate::linalg::C64;

/// Complex structure on ℝ²ⁿ in the interleaved basis.
pub fn complex_structure(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(2 * k + 1, 2 * k)] = 1.0;
        j[(2 * k, 2 * k + 1)] = -1.0;
    }
    j
}

pub fn realify(k: &KahlerTensor) -> RiemannTensor {
    let n = k.dim();
    let d = 2 * n;
    // complexified tensor in the basis (E_1..E_n, Ē_1..Ē_n)
    let mut z = vec![C64::new(0.0, 0.0); d.pow(4)];
    for i in 0..n {
        for j in 0..n {
            for kk in 0..n {
                for l in 0..n {
                    let v = k.get(i, j, kk, l);
                    let (ei, ebj, ek, ebl) = (i, n + j, kk, n + l);
                    z[idx(d, ei, ebj, ek, ebl)] -= v;
                    z[idx(d, ei, ebj, ebl, ek)] += v;
                    z[idx(d, ebj, ei, ek, ebl)] += v;
                    z[idx(d, ebj, ei, ebl, ek)] -= v;
                }
            }
        }
    }
    // coordinates of the real basis vectors in the complex basis
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut p = DMatrix::from_element(d, d, C64::new(0.0, 0.0));
    for m in 0..n {
        p[(m, 2 * m)] = C64::new(s, 0.0);
        p[(n + m, 2 * m)] = C64::new(s, 0.0);
        p[(m, 2 * m + 1)] = C64::new(0.0, s);
        p[(n + m, 2 * m + 1)] = C64::new(0.0, -s);
    }
    let mut cur = z;
    for _ in 0..4 {
        let rest = d * d * d;
        let mut next = vec![C64::new(0.0, 0.0); rest * d];
        for a in 0..d {
            for r in 0..rest {
                let v = cur[a * rest + r];
                if v.re == 0.0 && v.im == 0.0 {
                    continue;
                }
                for b in 0..d {
                    let w = p[(a, b)];
                    if w.re != 0.0 || w.im != 0.0 {
                        next[r * d + b] += v * w;
                    }
                }
            }
        }
        cur = next;
    }
    RiemannTensor::from_raw_unchecked(d, cur.into_iter().map(|c| c.re).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn random_kahler(n: usize, seed: u64) -> KahlerTensor {
        let mut r = rng::seeded(seed);
        let raw: Vec<C64> =
            (0..n.pow(4)).map(|_| C64::new(rng::normal(&mut r), rng::normal(&mut r))).collect();
        KahlerTensor::project(n, &raw).unwrap()
    }

    #[test]
    fn fubini_study_line_is_round_two_sphere_of_curvature_two() {
        let r = realify(&KahlerTensor::fubini_study(1, 1.0));
        assert!(r.max_abs_diff(&RiemannTensor::sphere(2, 2.0)) < 1e-15);
    }

    #[test]
    fn zero_maps_to_zero() {
        assert_eq!(realify(&KahlerTensor::zero(2)), RiemannTensor::zero(4));
    }

    #[test]
    fn realified_tensors_are_curvature_tensors_and_j_invariant() {
        for seed in 0..10 {
            let n = 1 + (seed as usize % 3);
            let k = random_kahler(n, seed);
            let r = realify(&k);
            let scale = r.norm();
            assert!(r.symmetry_residual() < 1e-12 * scale);
            assert!(r.bianchi_residual() < 1e-12 * scale);
            let j = complex_structure(n);
            let mut g = rng::seeded(100 + seed);
            let v: Vec<Vec<f64>> = (0..4)
                .map(|_| (0..2 * n).map(|_| rng::normal(&mut g)).collect())
                .collect();
            let jv = |x: &Vec<f64>| -> Vec<f64> {
                (0..2 * n).map(|a| (0..2 * n).map(|b| j[(a, b)] * x[b]).sum()).collect()
            };
            let lhs = r.eval(&jv(&v[0]), &jv(&v[1]), &v[2], &v[3]);
            let rhs = r.eval(&v[0], &v[1], &v[2], &v[3]);
            assert!((lhs - rhs).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn realified_scalar_is_twice_kahler_scalar() {
        let k = random_kahler(3, 44);
        let r = realify(&k);
        assert!((r.scalar() - 2.0 * k.scalar()).abs() < 1e-11 * k.norm());
    }
}
