use nalgebra::DMatrix;

use super::riemann::idx;
use crate::error::{invalid, Result};
use crate::linalg::{self, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Kähler curvature tensor on ℂⁿ, stored as `K[i][j][k][l] = R_{i j̄ k l̄}`.
///
/// Symmetries: `R_{ij̄kl̄} = R_{kj̄il̄} = R_{il̄kj̄}` and
/// `conj(R_{ij̄kl̄}) = R_{jīlk̄}`. The Fubini–Study fixture with `c = 1` has
/// holomorphic sectional curvature `R(X, X̄, X, X̄) = 2` for unit `X`.
#[derive(Clone, Debug, PartialEq)]
pub struct KahlerTensor {
    dim: usize,
    comp: Vec<C64>,
}

fn swap_ik(n: usize, c: &[C64], i: usize, j: usize, k: usize, l: usize) -> C64 {
    c[idx(n, k, j, i, l)]
}

/// Average over the order-8 group generated by `i ↔ k`, `j ↔ l` and
/// Hermitian conjugation.
pub(crate) fn kahler_symmetrize(n: usize, raw: &[C64]) -> Vec<C64> {
    let mut a = vec![ZERO; raw.len()];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    a[idx(n, i, j, k, l)] = (raw[idx(n, i, j, k, l)]
                        + swap_ik(n, raw, i, j, k, l)
                        + raw[idx(n, i, l, k, j)]
                        + raw[idx(n, k, l, i, j)])
                        * 0.25;
                }
            }
        }
    }
    let mut out = vec![ZERO; raw.len()];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    out[idx(n, i, j, k, l)] =
                        (a[idx(n, i, j, k, l)] + a[idx(n, j, i, l, k)].conj()) * 0.5;
                }
            }
        }
    }
    out
}

impl KahlerTensor {
    pub fn zero(dim: usize) -> Self {
        Self { dim, comp: vec![ZERO; dim.pow(4)] }
    }

    /// Projection of an arbitrary complex 4-index array onto Kähler tensors.
    pub fn project(dim: usize, raw: &[C64]) -> Result<Self> {
        if dim < 1 {
            return invalid("complex dimension must be positive");
        }
        if raw.len() != dim.pow(4) {
            return invalid(format!(
                "expected {} components for complex dimension {dim}, got {}",
                dim.pow(4),
                raw.len()
            ));
        }
        Ok(Self { dim, comp: kahler_symmetrize(dim, raw) })
    }

    /// Wraps components that already have the Kähler symmetries, rejecting
    /// residuals above `tol * max(1, |K|)`.
    pub fn from_components(dim: usize, comp: Vec<C64>, tol: f64) -> Result<Self> {
        if comp.len() != dim.pow(4) {
            return invalid(format!(
                "expected {} components for complex dimension {dim}, got {}",
                dim.pow(4),
                comp.len()
            ));
        }
        let t = Self { dim, comp };
        let res = t.symmetry_residual();
        let bound = tol * t.norm().max(1.0);
        if res > bound {
            return invalid(format!(
                "components violate Kähler symmetries: residual {res:.3e} > {bound:.3e}"
            ));
        }
        Ok(t)
    }

    pub(crate) fn from_raw_unchecked(dim: usize, comp: Vec<C64>) -> Self {
        debug_assert_eq!(comp.len(), dim.pow(4));
        Self { dim, comp }
    }

    /// Fubini–Study: `c (δ_ij δ_kl + δ_il δ_kj)`. This is the operator `id` used
    /// for NOB shifts when `c = 1`.
    pub fn fubini_study(dim: usize, c: f64) -> Self {
        let mut t = Self::zero(dim);
        for i in 0..dim {
            for k in 0..dim {
                t.comp[idx(dim, i, i, k, k)] += C64::new(c, 0.0);
                t.comp[idx(dim, i, k, k, i)] += C64::new(c, 0.0);
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[C64] {
        &self.comp
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.comp[idx(self.dim, i, j, k, l)]
    }

    pub fn norm(&self) -> f64 {
        self.comp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self { dim: self.dim, comp: self.comp.iter().map(|z| z * t).collect() }
    }

    pub fn add_scaled(&self, other: &Self, t: f64) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        Self {
            dim: self.dim,
            comp: self.comp.iter().zip(&other.comp).map(|(a, b)| a + b * t).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.comp.iter().zip(&other.comp).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn symmetry_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let r = self.get(i, j, k, l);
                        worst = worst
                            .max((r - self.get(k, j, i, l)).norm())
                            .max((r - self.get(i, l, k, j)).norm())
                            .max((r.conj() - self.get(j, i, l, k)).norm());
                    }
                }
            }
        }
        worst
    }

    /// Hermitian Ricci form `Ric_{ij̄} = Σ_k R_{ij̄kk̄}`.
    pub fn ricci(&self) -> DMatrix<C64> {
        let n = self.dim;
        DMatrix::from_fn(n, n, |i, j| (0..n).map(|k| self.get(i, j, k, k)).sum())
    }

    pub fn ricci_eigen(&self) -> (Vec<f64>, DMatrix<C64>) {
        linalg::herm_eigen(&self.ricci())
    }

    pub fn scalar(&self) -> f64 {
        let n = self.dim;
        let mut s = 0.0;
        for i in 0..n {
            for k in 0..n {
                s += self.get(i, i, k, k).re;
            }
        }
        s
    }

    /// `R(a, b̄, c, d̄) = Σ R_{ij̄kl̄} a_i conj(b_j) c_k conj(d_l)`.
    pub fn eval(&self, a: &[C64], b: &[C64], c: &[C64], d: &[C64]) -> C64 {
        let n = self.dim;
        let mut total = ZERO;
        for i in 0..n {
            for j in 0..n {
                let ab = a[i] * b[j].conj();
                if ab == ZERO {
                    continue;
                }
                let mut sj = ZERO;
                for k in 0..n {
                    if c[k] == ZERO {
                        continue;
                    }
                    let base = idx(n, i, j, k, 0);
                    let mut sk = ZERO;
                    for l in 0..n {
                        sk += self.comp[base + l] * d[l].conj();
                    }
                    sj += c[k] * sk;
                }
                total += ab * sj;
            }
        }
        total
    }

    /// Bisectional curvature `R(X, X̄, Y, Ȳ)`; real for any X, Y.
    pub fn bisectional(&self, x: &[C64], y: &[C64]) -> f64 {
        self.eval(x, x, y, y).re
    }

    /// Components in the unitary frame given by the columns of `u`:
    /// `K'_{abcd} = R(u_a, ū_b, u_c, ū_d)`.
    pub fn in_frame(&self, u: &DMatrix<C64>) -> Vec<C64> {
        let n = self.dim;
        let m = u.ncols();
        assert_eq!(u.nrows(), n);
        let mut cur = self.comp.clone();
        let mut shape = [n, n, n, n];
        for slot in 0..4 {
            let conj = slot % 2 == 1;
            let [a, b, c, d] = shape;
            let rest = b * c * d;
            let mut next = vec![ZERO; rest * m];
            for i in 0..a {
                for j in 0..rest {
                    let v = cur[i * rest + j];
                    if v == ZERO {
                        continue;
                    }
                    for p in 0..m {
                        let w = if conj { u[(i, p)].conj() } else { u[(i, p)] };
                        next[j * m + p] += v * w;
                    }
                }
            }
            cur = next;
            shape = [b, c, d, m];
        }
        cur
    }

    /// Gauge action by a unitary matrix.
    pub fn conjugate(&self, u: &DMatrix<C64>) -> Result<Self> {
        let n = self.dim;
        if u.nrows() != n || u.ncols() != n {
            return invalid(format!("conjugating matrix must be {n}x{n}"));
        }
        let defect = linalg::orthonormality_defect(u);
        if defect > 1e-11 * (n as f64).max(1.0) {
            return invalid(format!("matrix is not unitary (defect {defect:.3e})"));
        }
        Ok(Self { dim: n, comp: self.in_frame(u) })
    }

    /// Block sum on ℂ^{n+m} with vanishing mixed components.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        let d = n + m;
        let mut out = Self::zero(d);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        out.comp[idx(d, i, j, k, l)] = self.get(i, j, k, l);
                    }
                }
            }
        }
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        out.comp[idx(d, n + i, n + j, n + k, n + l)] = other.get(i, j, k, l);
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn random(n: usize, seed: u64) -> KahlerTensor {
        let mut r = rng::seeded(seed);
        let raw: Vec<C64> =
            (0..n.pow(4)).map(|_| C64::new(rng::normal(&mut r), rng::normal(&mut r))).collect();
        KahlerTensor::project(n, &raw).unwrap()
    }

    #[test]
    fn fubini_study_is_fixed_by_projection() {
        let fs = KahlerTensor::fubini_study(3, 1.0);
        let p = KahlerTensor::project(3, fs.components()).unwrap();
        assert!(p.max_abs_diff(&fs) < 1e-15);
        assert_eq!(fs.symmetry_residual(), 0.0);
    }

    #[test]
    fn projection_is_idempotent() {
        let t = random(3, 4);
        let again = KahlerTensor::project(3, t.components()).unwrap();
        assert!(again.max_abs_diff(&t) < 1e-15);
        assert!(t.symmetry_residual() < 1e-15);
        assert_eq!(KahlerTensor::project(2, &[ZERO; 16]).unwrap(), KahlerTensor::zero(2));
    }

    #[test]
    fn fubini_study_ricci_and_scalar() {
        for n in 1..5 {
            let fs = KahlerTensor::fubini_study(n, 1.0);
            let ric = fs.ricci();
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { (n + 1) as f64 } else { 0.0 };
                    assert_eq!(ric[(i, j)], C64::new(want, 0.0));
                }
            }
            assert_eq!(fs.scalar(), (n * (n + 1)) as f64);
        }
    }

    #[test]
    fn holomorphic_sectional_of_fubini_study_is_two() {
        let fs = KahlerTensor::fubini_study(3, 1.0);
        let mut r = rng::seeded(2);
        let u = linalg::haar_unitary(&mut r, 3, 2);
        let x: Vec<C64> = u.column(0).iter().copied().collect();
        let y: Vec<C64> = u.column(1).iter().copied().collect();
        assert!((fs.bisectional(&x, &x) - 2.0).abs() < 1e-14);
        // |X|²|Y|² + |Σ X_i conj(Y_i)|² on a unitary pair
        assert!((fs.bisectional(&x, &y) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unitary_conjugation_round_trip() {
        let t = random(3, 8);
        let mut r = rng::seeded(1);
        let u = linalg::haar_unitary(&mut r, 3, 3);
        let c = t.conjugate(&u).unwrap();
        assert!(c.symmetry_residual() < 1e-13);
        assert!((c.scalar() - t.scalar()).abs() < 1e-12 * t.norm());
        let back = c.conjugate(&u.adjoint()).unwrap();
        assert!(back.max_abs_diff(&t) < 1e-12);
        let ric = u.transpose() * t.ricci() * u.map(|z| z.conj());
        assert!((ric - c.ricci()).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
    }
}
