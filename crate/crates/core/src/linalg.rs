//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{ComplexField, DMatrix, SymmetricEigen};
use rand::Rng;

use crate::rng;

pub type C64 = nalgebra::Complex<f64>;

/// Eigen-decomposition of a real symmetric matrix, eigenvalues ascending.
pub fn sym_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    sorted_eigen(m)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn herm_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    sorted_eigen(m)
}

fn sorted_eigen<T>(m: &DMatrix<T>) -> (Vec<f64>, DMatrix<T>)
where
    T: ComplexField<RealField = f64>,
{
    let n = m.nrows();
    // symmetrize first so round-off in the input cannot leak into the solver
    let h = DMatrix::from_fn(n, n, |i, j| {
        (m[(i, j)].clone() + m[(j, i)].clone().conjugate()) * T::from_real(0.5)
    });
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])].clone());
    (values, vectors)
}

pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    sym_eigen(m).0
}

/// Q factor of a thin QR decomposition with the diagonal of R made real
/// positive. This is the standard QR retraction onto the Stiefel manifold.
pub fn qf<T>(m: &DMatrix<T>) -> DMatrix<T>
where
    T: ComplexField<RealField = f64>,
{
    let k = m.ncols();
    let qr = m.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..k {
        let d = r[(j, j)].clone();
        let modulus = d.clone().modulus();
        if modulus > 0.0 {
            let phase = d / T::from_real(modulus);
            for i in 0..q.nrows() {
                q[(i, j)] = q[(i, j)].clone() * phase.clone();
            }
        }
    }
    q
}

/// Haar-distributed real n×k matrix with orthonormal columns.
pub fn haar_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> DMatrix<f64> {
    qf(&rng::gaussian_matrix(rng, n, k))
}

/// Haar-distributed complex n×k matrix with unitary columns.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> DMatrix<C64> {
    qf(&rng::complex_gaussian_matrix(rng, n, k))
}

/// Extends the orthonormal columns of `f` to a full orthonormal basis. Extra
/// columns come from Gram-Schmidt against the standard basis, so the result is
/// deterministic.
pub fn complete_basis<T>(f: &DMatrix<T>) -> DMatrix<T>
where
    T: ComplexField<RealField = f64>,
{
    let n = f.nrows();
    let mut cols: Vec<nalgebra::DVector<T>> = f.column_iter().map(|c| c.into_owned()).collect();
    for e in 0..n {
        if cols.len() == n {
            break;
        }
        let mut v = nalgebra::DVector::<T>::zeros(n);
        v[e] = T::one();
        for c in &cols {
            let proj = c.dotc(&v);
            v -= c * proj;
        }
        let norm = v.norm();
        if norm > 1e-6 {
            v /= T::from_real(norm);
            // second pass for numerical orthogonality
            for c in &cols {
                let proj = c.dotc(&v);
                v -= c * proj;
            }
            let norm = v.norm();
            v /= T::from_real(norm);
            cols.push(v);
        }
    }
    DMatrix::from_columns(&cols)
}

/// max |F^H F - I|.
pub fn orthonormality_defect<T>(f: &DMatrix<T>) -> f64
where
    T: ComplexField<RealField = f64>,
{
    let g = f.adjoint() * f;
    let mut worst: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { T::one() } else { T::zero() };
            worst = worst.max((g[(i, j)].clone() - target).modulus());
        }
    }
    worst
}

/// Sum of the k smallest entries of an ascending list.
pub fn sum_smallest(sorted: &[f64], k: usize) -> f64 {
    sorted.iter().take(k).sum()
}
