//! The curvature operator on Λ²ℝⁿ in the basis `e_i ∧ e_j` (i < j), with
//! matrix entries `ℛ_{(ij),(kl)} = R_ijkl`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

use super::riemann::{idx, RiemannTensor};

/// Ordered list of index pairs `(i, j)` with `i < j`.
pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push((i, j));
        }
    }
    out
}

pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Position of `(i, j)` (`i < j`) in [`pairs`].
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

pub fn operator_matrix(r: &RiemannTensor) -> DMatrix<f64> {
    let n = r.dim();
    let ps = pairs(n);
    let m = ps.len();
    DMatrix::from_fn(m, m, |a, b| {
        let (i, j) = ps[a];
        let (k, l) = ps[b];
        r.get(i, j, k, l)
    })
}

/// Expands a symmetric operator on Λ² back to a 4-index array with the pair
/// symmetries. The result satisfies first Bianchi only if the operator does.
pub fn components_from_operator(n: usize, m: &DMatrix<f64>) -> Vec<f64> {
    let ps = pairs(n);
    let mut comp = vec![0.0; n.pow(4)];
    for (a, &(i, j)) in ps.iter().enumerate() {
        for (b, &(k, l)) in ps.iter().enumerate() {
            let v = m[(a, b)];
            comp[idx(n, i, j, k, l)] = v;
            comp[idx(n, j, i, k, l)] = -v;
            comp[idx(n, i, j, l, k)] = -v;
            comp[idx(n, j, i, l, k)] = v;
        }
    }
    comp
}

/// Nonzero structure constants `c_{αγδ} = ⟨[φ_γ, φ_δ], φ_α⟩` of so(n) in the
/// orthonormal basis `φ_(ij) = E_ij − E_ji`, grouped by `α`.
#[derive(Debug)]
pub struct StructureConstants {
    pub by_alpha: Vec<Vec<(usize, usize, f64)>>,
}

/// Signed pair lookup: `A_ab = sign · φ_(min,max)`.
fn signed_pair(n: usize, a: usize, b: usize) -> Option<(usize, f64)> {
    match a.cmp(&b) {
        std::cmp::Ordering::Less => Some((pair_index(n, a, b), 1.0)),
        std::cmp::Ordering::Greater => Some((pair_index(n, b, a), -1.0)),
        std::cmp::Ordering::Equal => None,
    }
}

impl StructureConstants {
    pub fn new(n: usize) -> Self {
        let ps = pairs(n);
        let mut by_alpha = vec![Vec::new(); ps.len()];
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        for (g, &(i, j)) in ps.iter().enumerate() {
            for (h, &(k, l)) in ps.iter().enumerate() {
                // [A_ij, A_kl] = δ_jk A_il − δ_ik A_jl − δ_jl A_ik + δ_il A_jk
                let mut acc: Vec<(usize, f64)> = Vec::new();
                for (coef, a, b) in
                    [(d(j, k), i, l), (-d(i, k), j, l), (-d(j, l), i, k), (d(i, l), j, k)]
                {
                    if coef == 0.0 {
                        continue;
                    }
                    if let Some((alpha, s)) = signed_pair(n, a, b) {
                        acc.push((alpha, coef * s));
                    }
                }
                for (alpha, c) in acc {
                    by_alpha[alpha].push((g, h, c));
                }
            }
        }
        for list in &mut by_alpha {
            list.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
            let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(list.len());
            for &(g, h, c) in list.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == g && last.1 == h => last.2 += c,
                    _ => merged.push((g, h, c)),
                }
            }
            merged.retain(|e| e.2 != 0.0);
            *list = merged;
        }
        Self { by_alpha }
    }

    /// Shared per-dimension cache.
    pub fn cached(n: usize) -> Arc<StructureConstants> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<StructureConstants>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("structure constant cache poisoned");
        guard.entry(n).or_insert_with(|| Arc::new(StructureConstants::new(n))).clone()
    }

    /// Hamilton's Lie-algebra square
    /// `(A#)_{αβ} = ½ Σ c_{αγδ} c_{βεζ} A_{γε} A_{δζ}`.
    pub fn sharp(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let m = self.by_alpha.len();
        let mut out = DMatrix::zeros(m, m);
        for alpha in 0..m {
            for beta in alpha..m {
                let mut s = 0.0;
                for &(g, d, c1) in &self.by_alpha[alpha] {
                    for &(e, z, c2) in &self.by_alpha[beta] {
                        s += c1 * c2 * a[(g, e)] * a[(d, z)];
                    }
                }
                out[(alpha, beta)] = 0.5 * s;
                out[(beta, alpha)] = 0.5 * s;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi(n: usize, i: usize, j: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        m[(i, j)] = 1.0;
        m[(j, i)] = -1.0;
        m
    }

    #[test]
    fn pair_index_matches_enumeration() {
        for n in 2..8 {
            for (a, &(i, j)) in pairs(n).iter().enumerate() {
                assert_eq!(pair_index(n, i, j), a);
            }
            assert_eq!(pairs(n).len(), pair_count(n));
        }
    }

    #[test]
    fn structure_constants_match_explicit_commutators() {
        for n in 3..6 {
            let ps = pairs(n);
            let sc = StructureConstants::new(n);
            for (alpha, &(a, b)) in ps.iter().enumerate() {
                let pa = phi(n, a, b);
                let mut dense = vec![vec![0.0; ps.len()]; ps.len()];
                for &(g, h, c) in &sc.by_alpha[alpha] {
                    dense[g][h] = c;
                }
                for (g, &(i, j)) in ps.iter().enumerate() {
                    for (h, &(k, l)) in ps.iter().enumerate() {
                        let pg = phi(n, i, j);
                        let ph = phi(n, k, l);
                        let comm = &pg * &ph - &ph * &pg;
                        let want = 0.5 * (pa.transpose() * comm).trace();
                        assert!((dense[g][h] - want).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn identity_sharp_is_dimension_multiple() {
        for n in 3..7 {
            let sc = StructureConstants::new(n);
            let m = pair_count(n);
            let s = sc.sharp(&DMatrix::identity(m, m));
            let want = DMatrix::identity(m, m) * (n as f64 - 2.0);
            assert!((s - want).abs().max() < 1e-14);
        }
    }

    #[test]
    fn sphere_operator_is_scalar() {
        let s = RiemannTensor::sphere(5, 0.7);
        let m = operator_matrix(&s);
        assert!((m - DMatrix::identity(10, 10) * 0.7).abs().max() < 1e-15);
        assert!((2.0 * operator_matrix(&s).trace() - s.scalar()).abs() < 1e-12);
    }
}
