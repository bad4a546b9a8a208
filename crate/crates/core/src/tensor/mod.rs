//! Algebraic curvature tensors: storage, projections, contractions, gauge
//! action, fixtures and reaction terms.

mod frame;
pub mod io;
mod kahler;
pub mod lambda2;
mod reaction;
mod realify;
mod riemann;

pub use frame::{frame_value, isotropic_terms, Frame, Functional, Terms};
#[cfg(test)]
pub(crate) use frame::eval_terms;
pub use kahler::KahlerTensor;
pub use reaction::{
    kahler_ricci_reaction, reaction_kahler, reaction_riemann, reaction_riemann_with_residual,
    riemann_ricci_reaction, riemann_reaction_raw,
};
pub use realify::{complex_structure, realify};
pub use riemann::RiemannTensor;
pub(crate) use riemann::idx;

use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::linalg::{self, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Riemann,
    Kahler,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Riemann => "riemann",
            Kind::Kahler => "kahler",
        }
    }
}

/// Either kind of curvature tensor.
#[derive(Clone, Debug, PartialEq)]
pub enum Tensor {
    Riemann(RiemannTensor),
    Kahler(KahlerTensor),
}

impl From<RiemannTensor> for Tensor {
    fn from(r: RiemannTensor) -> Self {
        Tensor::Riemann(r)
    }
}

impl From<KahlerTensor> for Tensor {
    fn from(k: KahlerTensor) -> Self {
        Tensor::Kahler(k)
    }
}

impl Tensor {
    pub fn kind(&self) -> Kind {
        match self {
            Tensor::Riemann(_) => Kind::Riemann,
            Tensor::Kahler(_) => Kind::Kahler,
        }
    }

    /// Real dimension for Riemannian tensors, complex dimension for Kähler.
    pub fn dim(&self) -> usize {
        match self {
            Tensor::Riemann(r) => r.dim(),
            Tensor::Kahler(k) => k.dim(),
        }
    }

    pub fn zero(kind: Kind, dim: usize) -> Self {
        match kind {
            Kind::Riemann => RiemannTensor::zero(dim).into(),
            Kind::Kahler => KahlerTensor::zero(dim).into(),
        }
    }

    /// The shift direction: unit sphere or Fubini–Study `id`.
    pub fn identity(kind: Kind, dim: usize) -> Self {
        match kind {
            Kind::Riemann => RiemannTensor::sphere(dim, 1.0).into(),
            Kind::Kahler => KahlerTensor::fubini_study(dim, 1.0).into(),
        }
    }

    pub fn as_riemann(&self) -> Option<&RiemannTensor> {
        match self {
            Tensor::Riemann(r) => Some(r),
            Tensor::Kahler(_) => None,
        }
    }

    pub fn as_kahler(&self) -> Option<&KahlerTensor> {
        match self {
            Tensor::Kahler(k) => Some(k),
            Tensor::Riemann(_) => None,
        }
    }

    /// Frobenius norm, the `scale` used by all relative tolerances.
    pub fn norm(&self) -> f64 {
        match self {
            Tensor::Riemann(r) => r.norm(),
            Tensor::Kahler(k) => k.norm(),
        }
    }

    pub fn scalar(&self) -> f64 {
        match self {
            Tensor::Riemann(r) => r.scalar(),
            Tensor::Kahler(k) => k.scalar(),
        }
    }

    /// Ricci eigenvalues, ascending.
    pub fn ricci_eigenvalues(&self) -> Vec<f64> {
        match self {
            Tensor::Riemann(r) => r.ricci_eigen().0,
            Tensor::Kahler(k) => k.ricci_eigen().0,
        }
    }

    /// Squared Frobenius norm of the Ricci form.
    pub fn ricci_norm_sqr(&self) -> f64 {
        match self {
            Tensor::Riemann(r) => r.ricci().iter().map(|x| x * x).sum(),
            Tensor::Kahler(k) => k.ricci().iter().map(|z| z.norm_sqr()).sum(),
        }
    }

    pub fn scaled(&self, t: f64) -> Self {
        match self {
            Tensor::Riemann(r) => r.scaled(t).into(),
            Tensor::Kahler(k) => k.scaled(t).into(),
        }
    }

    /// `self + t * other`; panics on kind or dimension mismatch.
    pub fn add_scaled(&self, other: &Tensor, t: f64) -> Self {
        match (self, other) {
            (Tensor::Riemann(a), Tensor::Riemann(b)) => a.add_scaled(b, t).into(),
            (Tensor::Kahler(a), Tensor::Kahler(b)) => a.add_scaled(b, t).into(),
            _ => panic!("tensor kind mismatch"),
        }
    }

    /// `self + beta * identity`.
    pub fn shifted(&self, beta: f64) -> Self {
        self.add_scaled(&Tensor::identity(self.kind(), self.dim()), beta)
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        match (self, other) {
            (Tensor::Riemann(a), Tensor::Riemann(b)) => a.max_abs_diff(b),
            (Tensor::Kahler(a), Tensor::Kahler(b)) => a.max_abs_diff(b),
            _ => f64::INFINITY,
        }
    }

    /// Worst violation of the defining symmetries (including first Bianchi for
    /// Riemannian tensors).
    pub fn symmetry_residual(&self) -> f64 {
        match self {
            Tensor::Riemann(r) => r.symmetry_residual().max(r.bianchi_residual()),
            Tensor::Kahler(k) => k.symmetry_residual(),
        }
    }

    /// Quadratic reaction term of the matching flow.
    pub fn reaction(&self) -> Self {
        match self {
            Tensor::Riemann(r) => reaction_riemann(r).into(),
            Tensor::Kahler(k) => reaction_kahler(k).into(),
        }
    }

    /// Gauge action; `q` is real orthogonal for Riemannian tensors and unitary
    /// for Kähler ones.
    pub fn conjugate_real(&self, q: &DMatrix<f64>) -> Result<Self> {
        match self {
            Tensor::Riemann(r) => Ok(r.conjugate(q)?.into()),
            Tensor::Kahler(k) => {
                Ok(k.conjugate(&q.map(|x| C64::new(x, 0.0)))?.into())
            }
        }
    }

    pub fn conjugate_complex(&self, u: &DMatrix<C64>) -> Result<Self> {
        match self {
            Tensor::Kahler(k) => Ok(k.conjugate(u)?.into()),
            Tensor::Riemann(_) => invalid("Riemannian tensors take a real orthogonal matrix"),
        }
    }

    /// Random gauge transformation drawn from Haar measure.
    pub fn random_gauge<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Self {
        let n = self.dim();
        match self {
            Tensor::Riemann(r) => {
                r.conjugate(&linalg::haar_orthogonal(rng, n, n)).expect("Haar matrix").into()
            }
            Tensor::Kahler(k) => {
                k.conjugate(&linalg::haar_unitary(rng, n, n)).expect("Haar matrix").into()
            }
        }
    }

    /// Flattened real state vector (Kähler entries interleaved re, im).
    pub fn to_flat(&self) -> Vec<f64> {
        match self {
            Tensor::Riemann(r) => r.components().to_vec(),
            Tensor::Kahler(k) => k.components().iter().flat_map(|z| [z.re, z.im]).collect(),
        }
    }

    /// Inverse of [`Tensor::to_flat`] without any projection.
    pub fn from_flat_unchecked(kind: Kind, dim: usize, flat: &[f64]) -> Self {
        match kind {
            Kind::Riemann => RiemannTensor::from_raw_unchecked(dim, flat.to_vec()).into(),
            Kind::Kahler => KahlerTensor::from_raw_unchecked(
                dim,
                flat.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect(),
            )
            .into(),
        }
    }

    /// Projects a flattened state back onto the valid subspace.
    pub fn from_flat_projected(kind: Kind, dim: usize, flat: &[f64]) -> Result<Self> {
        match kind {
            Kind::Riemann => Ok(RiemannTensor::project(dim, flat)?.into()),
            Kind::Kahler => {
                let raw: Vec<C64> = flat.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect();
                Ok(KahlerTensor::project(dim, &raw)?.into())
            }
        }
    }
}

/// Fixture names accepted by [`fixture`].
#[derive(Clone, Debug, PartialEq)]
pub enum FixtureSpec {
    Flat { kind: Kind, dim: usize },
    Sphere { dim: usize, c: f64 },
    FubiniStudy { dim: usize, c: f64 },
    Product(Box<FixtureSpec>, Box<FixtureSpec>),
}

/// Closed-form fixtures. Products are block sums with all mixed-index
/// components zero.
pub fn fixture(spec: &FixtureSpec) -> Result<Tensor> {
    Ok(match spec {
        FixtureSpec::Flat { kind, dim } => Tensor::zero(*kind, *dim),
        FixtureSpec::Sphere { dim, c } => {
            if *dim < 2 {
                return invalid("sphere needs real dimension ≥ 2");
            }
            RiemannTensor::sphere(*dim, *c).into()
        }
        FixtureSpec::FubiniStudy { dim, c } => {
            if *dim < 1 {
                return invalid("complex dimension must be ≥ 1");
            }
            KahlerTensor::fubini_study(*dim, *c).into()
        }
        FixtureSpec::Product(a, b) => product(&fixture(a)?, &fixture(b)?)?,
    })
}

/// Direct sum of two tensors of the same kind.
pub fn product(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    match (a, b) {
        (Tensor::Riemann(x), Tensor::Riemann(y)) => Ok(x.direct_sum(y).into()),
        (Tensor::Kahler(x), Tensor::Kahler(y)) => Ok(x.direct_sum(y).into()),
        _ => invalid("product factors must both be Riemannian or both Kähler"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_of_mixed_kinds_is_rejected() {
        let a = Tensor::identity(Kind::Riemann, 2);
        let b = Tensor::identity(Kind::Kahler, 1);
        assert!(product(&a, &b).is_err());
    }

    #[test]
    fn projective_line_times_plane_ricci() {
        let t = fixture(&FixtureSpec::Product(
            Box::new(FixtureSpec::FubiniStudy { dim: 1, c: 1.0 }),
            Box::new(FixtureSpec::Flat { kind: Kind::Kahler, dim: 1 }),
        ))
        .unwrap();
        assert_eq!(t.ricci_eigenvalues(), vec![0.0, 2.0]);
    }

    #[test]
    fn flat_round_trip() {
        let k: Tensor = KahlerTensor::fubini_study(2, 0.5).into();
        let back = Tensor::from_flat_unchecked(Kind::Kahler, 2, &k.to_flat());
        assert_eq!(back, k);
    }
}
