use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{invalid, Result};
use crate::linalg::{self, C64};

/// Real algebraic curvature tensor `R_ijkl` on ℝⁿ.
///
/// Components are stored densely in row-major `(i, j, k, l)` order. Sign
/// convention: `R_ijij` is the sectional curvature of the plane `e_i ∧ e_j`, so
/// the unit round sphere has `R_ijij = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct RiemannTensor {
    dim: usize,
    comp: Vec<f64>,
}

#[inline]
pub(crate) fn idx(n: usize, i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * n + j) * n + k) * n + l
}

/// Average over the order-8 group generated by the two antisymmetries and
/// the pair swap.
pub(crate) fn symmetrize_pairs(n: usize, raw: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; raw.len()];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let s = raw[idx(n, i, j, k, l)] - raw[idx(n, j, i, k, l)]
                        - raw[idx(n, i, j, l, k)]
                        + raw[idx(n, j, i, l, k)]
                        + raw[idx(n, k, l, i, j)]
                        - raw[idx(n, l, k, i, j)]
                        - raw[idx(n, k, l, j, i)]
                        + raw[idx(n, l, k, j, i)];
                    out[idx(n, i, j, k, l)] = s / 8.0;
                }
            }
        }
    }
    out
}

/// Removes the totally antisymmetric part of a pair-symmetric tensor. On that
/// space the cyclic average `(S_ijkl + S_jkil + S_kijl)/3` is exactly the
/// orthogonal projection onto 4-forms.
pub(crate) fn remove_bianchi(n: usize, s: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; s.len()];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let b = (s[idx(n, i, j, k, l)] + s[idx(n, j, k, i, l)] + s[idx(n, k, i, j, l)])
                        / 3.0;
                    out[idx(n, i, j, k, l)] = s[idx(n, i, j, k, l)] - b;
                }
            }
        }
    }
    out
}

impl RiemannTensor {
    pub fn zero(dim: usize) -> Self {
        Self { dim, comp: vec![0.0; dim.pow(4)] }
    }

    /// Orthogonal projection of an arbitrary 4-index array onto the space of
    /// algebraic curvature tensors.
    pub fn project(dim: usize, raw: &[f64]) -> Result<Self> {
        if dim < 1 {
            return invalid("dimension must be positive");
        }
        if raw.len() != dim.pow(4) {
            return invalid(format!(
                "expected {} components for dimension {dim}, got {}",
                dim.pow(4),
                raw.len()
            ));
        }
        let s = symmetrize_pairs(dim, raw);
        Ok(Self { dim, comp: remove_bianchi(dim, &s) })
    }

    /// Wraps components that are already a curvature tensor, rejecting them if
    /// any symmetry or Bianchi residual exceeds `tol * max(1, |R|)`.
    pub fn from_components(dim: usize, comp: Vec<f64>, tol: f64) -> Result<Self> {
        if comp.len() != dim.pow(4) {
            return invalid(format!(
                "expected {} components for dimension {dim}, got {}",
                dim.pow(4),
                comp.len()
            ));
        }
        let t = Self { dim, comp };
        let res = t.symmetry_residual().max(t.bianchi_residual());
        let bound = tol * t.norm().max(1.0);
        if res > bound {
            return invalid(format!(
                "components violate curvature symmetries: residual {res:.3e} > {bound:.3e}"
            ));
        }
        Ok(t)
    }

    /// Constant curvature `c`: `R_ijkl = c (δ_ik δ_jl − δ_il δ_jk)`.
    pub fn sphere(dim: usize, c: f64) -> Self {
        let mut t = Self::zero(dim);
        for i in 0..dim {
            for j in 0..dim {
                if i != j {
                    t.comp[idx(dim, i, j, i, j)] = c;
                    t.comp[idx(dim, i, j, j, i)] = -c;
                }
            }
        }
        t
    }

    pub(crate) fn from_raw_unchecked(dim: usize, comp: Vec<f64>) -> Self {
        debug_assert_eq!(comp.len(), dim.pow(4));
        Self { dim, comp }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[f64] {
        &self.comp
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.comp[idx(self.dim, i, j, k, l)]
    }

    /// Frobenius norm over all n⁴ components.
    pub fn norm(&self) -> f64 {
        self.comp.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self { dim: self.dim, comp: self.comp.iter().map(|x| x * t).collect() }
    }

    /// `self + t * other`.
    pub fn add_scaled(&self, other: &Self, t: f64) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        Self {
            dim: self.dim,
            comp: self.comp.iter().zip(&other.comp).map(|(a, b)| a + t * b).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.comp.iter().zip(&other.comp).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Largest deviation from antisymmetry in each pair and pair exchange.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let r = self.get(i, j, k, l);
                        worst = worst
                            .max((r + self.get(j, i, k, l)).abs())
                            .max((r + self.get(i, j, l, k)).abs())
                            .max((r - self.get(k, l, i, j)).abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest first-Bianchi sum `R_ijkl + R_iklj + R_iljk`.
    pub fn bianchi_residual(&self) -> f64 {
        bianchi_residual(self.dim, &self.comp)
    }

    pub fn ricci(&self) -> DMatrix<f64> {
        let n = self.dim;
        DMatrix::from_fn(n, n, |i, j| (0..n).map(|k| self.get(i, k, j, k)).sum())
    }

    /// Ricci eigenvalues ascending with orthonormal eigenvectors as columns.
    pub fn ricci_eigen(&self) -> (Vec<f64>, DMatrix<f64>) {
        linalg::sym_eigen(&self.ricci())
    }

    pub fn scalar(&self) -> f64 {
        let n = self.dim;
        (0..n).flat_map(|i| (0..n).map(move |k| (i, k))).map(|(i, k)| self.get(i, k, i, k)).sum()
    }

    /// Components in the orthonormal frame formed by the columns of `q`:
    /// `R'_abcd = R(q_a, q_b, q_c, q_d)`. Works for n×k frames as well as
    /// square orthogonal matrices.
    pub fn in_frame(&self, q: &DMatrix<f64>) -> Vec<f64> {
        let n = self.dim;
        let k = q.ncols();
        assert_eq!(q.nrows(), n);
        // contract one slot at a time, moving it to the back
        let mut cur = self.comp.clone();
        let mut shape = [n, n, n, n];
        for _ in 0..4 {
            let [a, b, c, d] = shape;
            let mut next = vec![0.0; b * c * d * k];
            for i in 0..a {
                for j in 0..b * c * d {
                    let v = cur[i * b * c * d + j];
                    if v == 0.0 {
                        continue;
                    }
                    for m in 0..k {
                        next[j * k + m] += v * q[(i, m)];
                    }
                }
            }
            cur = next;
            shape = [b, c, d, k];
        }
        cur
    }

    /// Gauge action by an orthogonal matrix.
    pub fn conjugate(&self, q: &DMatrix<f64>) -> Result<Self> {
        let n = self.dim;
        if q.nrows() != n || q.ncols() != n {
            return invalid(format!("conjugating matrix must be {n}x{n}"));
        }
        let defect = linalg::orthonormality_defect(q);
        if defect > 1e-12 * (n as f64).max(1.0) * 10.0 {
            return invalid(format!("matrix is not orthogonal (defect {defect:.3e})"));
        }
        Ok(Self { dim: n, comp: self.in_frame(q) })
    }

    /// `R(a, b, c, d)` for real vectors.
    pub fn eval(&self, a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> f64 {
        let n = self.dim;
        let mut total = 0.0;
        for i in 0..n {
            if a[i] == 0.0 {
                continue;
            }
            let mut si = 0.0;
            for j in 0..n {
                if b[j] == 0.0 {
                    continue;
                }
                let mut sj = 0.0;
                for k in 0..n {
                    if c[k] == 0.0 {
                        continue;
                    }
                    let base = idx(n, i, j, k, 0);
                    let row = &self.comp[base..base + n];
                    let sk: f64 = row.iter().zip(d).map(|(r, x)| r * x).sum();
                    sj += c[k] * sk;
                }
                si += b[j] * sj;
            }
            total += a[i] * si;
        }
        total
    }

    /// `R(a, b, c, d)` for the complex-multilinear extension.
    pub fn eval_complex(&self, a: &[C64], b: &[C64], c: &[C64], d: &[C64]) -> C64 {
        let n = self.dim;
        let mut total = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let ab = a[i] * b[j];
                if ab == Complex::new(0.0, 0.0) {
                    continue;
                }
                let mut sj = C64::new(0.0, 0.0);
                for k in 0..n {
                    let base = idx(n, i, j, k, 0);
                    let mut sk = C64::new(0.0, 0.0);
                    for l in 0..n {
                        sk += d[l] * self.comp[base + l];
                    }
                    sj += c[k] * sk;
                }
                total += ab * sj;
            }
        }
        total
    }

    /// Direct sum `self ⊕ other` on ℝ^{n+m}; mixed components vanish.
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

    pub fn unit_vector(n: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        v
    }
}

pub(crate) fn bianchi_residual(n: usize, comp: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let s = comp[idx(n, i, j, k, l)] + comp[idx(n, i, k, l, j)] + comp[idx(n, i, l, j, k)];
                    worst = worst.max(s.abs());
                }
            }
        }
    }
    worst
}
