use nalgebra::DMatrix;

use super::{RiemannTensor, Tensor};
use crate::error::{invalid, Result};
use crate::linalg::{self, C64};

/// A list of orthonormal (real) or unitary (complex) vectors stored as the
/// columns of a matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum Frame {
    Real(DMatrix<f64>),
    Complex(DMatrix<C64>),
}

const FRAME_TOL: f64 = 1e-12;

impl Frame {
    /// Builds a real frame, rejecting vectors that are not orthonormal.
    pub fn real(vectors: DMatrix<f64>) -> Result<Self> {
        let d = linalg::orthonormality_defect(&vectors);
        if d > FRAME_TOL {
            return invalid(format!("frame vectors are not orthonormal (defect {d:.3e})"));
        }
        Ok(Frame::Real(vectors))
    }

    pub fn complex(vectors: DMatrix<C64>) -> Result<Self> {
        let d = linalg::orthonormality_defect(&vectors);
        if d > FRAME_TOL {
            return invalid(format!("frame vectors are not unitary (defect {d:.3e})"));
        }
        Ok(Frame::Complex(vectors))
    }

    pub fn standard_real(n: usize, k: usize) -> Self {
        Frame::Real(DMatrix::identity(n, k))
    }

    pub fn standard_complex(n: usize, k: usize) -> Self {
        Frame::Complex(DMatrix::identity(n, k))
    }

    pub fn dim(&self) -> usize {
        match self {
            Frame::Real(m) => m.nrows(),
            Frame::Complex(m) => m.nrows(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Frame::Real(m) => m.ncols(),
            Frame::Complex(m) => m.ncols(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, Frame::Complex(_))
    }

    /// Column `i` as complex entries (real frames are promoted).
    pub fn vector(&self, i: usize) -> Vec<C64> {
        match self {
            Frame::Real(m) => m.column(i).iter().map(|&x| C64::new(x, 0.0)).collect(),
            Frame::Complex(m) => m.column(i).iter().copied().collect(),
        }
    }

    pub fn real_vector(&self, i: usize) -> Option<Vec<f64>> {
        match self {
            Frame::Real(m) => Some(m.column(i).iter().copied().collect()),
            Frame::Complex(_) => None,
        }
    }
}

/// Scalar curvature expressions evaluated on a frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Functional {
    /// `R_1212` on a real 2-frame.
    Sectional,
    /// `R_1313 + λ²R_1414 + R_2323 + λ²R_2424 − 2λR_1234` on a real 4-frame;
    /// `λ = 1` is the isotropic curvature expression.
    Isotropic { lambda: f64 },
    /// `R_1313 + R_2323` on a real 3-frame.
    ThreeFrameSum,
    /// `R_1313 + R_1414 + R_2323 + R_2424` on a real 4-frame.
    FourFrameSum,
    /// `Rm(v, w, v̄, w̄)` on a complex 2-frame, for a Riemannian tensor.
    ComplexSectional,
    /// `R(X, X̄, Y, Ȳ)` on a complex 2-frame, for a Kähler tensor.
    Bisectional,
}

/// Weighted component list `Σ coef · R_abcd(frame)` (0-based frame slots).
pub type Terms = Vec<(f64, [usize; 4])>;

impl Functional {
    pub fn frame_size(&self) -> usize {
        match self {
            Functional::Sectional | Functional::ComplexSectional | Functional::Bisectional => 2,
            Functional::ThreeFrameSum => 3,
            Functional::Isotropic { .. } | Functional::FourFrameSum => 4,
        }
    }

    /// Real-frame functionals as a list of frame components.
    pub fn terms(&self) -> Option<Terms> {
        Some(match *self {
            Functional::Sectional => vec![(1.0, [0, 1, 0, 1])],
            Functional::Isotropic { lambda } => isotropic_terms(lambda),
            Functional::ThreeFrameSum => vec![(1.0, [0, 2, 0, 2]), (1.0, [1, 2, 1, 2])],
            Functional::FourFrameSum => vec![
                (1.0, [0, 2, 0, 2]),
                (1.0, [0, 3, 0, 3]),
                (1.0, [1, 2, 1, 2]),
                (1.0, [1, 3, 1, 3]),
            ],
            Functional::ComplexSectional | Functional::Bisectional => return None,
        })
    }
}

pub fn isotropic_terms(lambda: f64) -> Terms {
    let l2 = lambda * lambda;
    vec![
        (1.0, [0, 2, 0, 2]),
        (l2, [0, 3, 0, 3]),
        (1.0, [1, 2, 1, 2]),
        (l2, [1, 3, 1, 3]),
        (-2.0 * lambda, [0, 1, 2, 3]),
    ]
}

pub(crate) fn eval_terms(r: &RiemannTensor, f: &DMatrix<f64>, terms: &Terms) -> f64 {
    let cols: Vec<Vec<f64>> = (0..f.ncols()).map(|c| f.column(c).iter().copied().collect()).collect();
    terms
        .iter()
        .map(|(w, [a, b, c, d])| w * r.eval(&cols[*a], &cols[*b], &cols[*c], &cols[*d]))
        .sum()
}

pub(crate) fn complex_sectional(r: &RiemannTensor, v: &[C64], w: &[C64]) -> f64 {
    let vb: Vec<C64> = v.iter().map(|z| z.conj()).collect();
    let wb: Vec<C64> = w.iter().map(|z| z.conj()).collect();
    r.eval_complex(v, w, &vb, &wb).re
}

/// Evaluates `functional` on `frame`. The frame must have exactly the number
/// of vectors the functional uses and match the tensor's dimension and kind.
pub fn frame_value(t: &Tensor, frame: &Frame, functional: Functional) -> Result<f64> {
    if frame.len() != functional.frame_size() {
        return invalid(format!(
            "{functional:?} needs {} frame vectors, got {}",
            functional.frame_size(),
            frame.len()
        ));
    }
    if frame.dim() != t.dim() {
        return invalid(format!(
            "frame dimension {} does not match tensor dimension {}",
            frame.dim(),
            t.dim()
        ));
    }
    match (t, frame, functional) {
        (Tensor::Riemann(r), Frame::Real(f), fun) if fun.terms().is_some() => {
            Ok(eval_terms(r, f, &fun.terms().expect("checked")))
        }
        (Tensor::Riemann(r), fr, Functional::ComplexSectional) => {
            Ok(complex_sectional(r, &fr.vector(0), &fr.vector(1)))
        }
        (Tensor::Kahler(k), Frame::Complex(_), Functional::Bisectional) => {
            Ok(k.bisectional(&frame.vector(0), &frame.vector(1)))
        }
        _ => invalid(format!("{functional:?} is not defined for this tensor/frame kind")),
    }
}
