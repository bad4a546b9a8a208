//! Cone functionals as optimizer objectives, with analytic gradients.

use nalgebra::DMatrix;

use super::optim::{Geometry, Objective};
use crate::linalg::C64;
use crate::tensor::{idx, isotropic_terms, KahlerTensor, RiemannTensor, Terms};

/// `T1[p,b,c,d] = Σ_jkl R_pjkl F_jb F_kc F_ld`, flattened as `((p*k+b)*k+c)*k+d`.
fn contract3(r: &RiemannTensor, f: &DMatrix<f64>) -> Vec<f64> {
    let n = r.dim();
    let k = f.ncols();
    let comp = r.components();
    // slot 4
    let mut a1 = vec![0.0; n * n * n * k];
    for pjk in 0..n * n * n {
        let row = &comp[pjk * n..pjk * n + n];
        for d in 0..k {
            let mut s = 0.0;
            for l in 0..n {
                s += row[l] * f[(l, d)];
            }
            a1[pjk * k + d] = s;
        }
    }
    // slot 3
    let mut a2 = vec![0.0; n * n * k * k];
    for pj in 0..n * n {
        for kk in 0..n {
            let base = (pj * n + kk) * k;
            for c in 0..k {
                let fk = f[(kk, c)];
                if fk == 0.0 {
                    continue;
                }
                for d in 0..k {
                    a2[(pj * k + c) * k + d] += fk * a1[base + d];
                }
            }
        }
    }
    // slot 2
    let mut t1 = vec![0.0; n * k * k * k];
    for p in 0..n {
        for j in 0..n {
            let src = &a2[(p * n + j) * k * k..(p * n + j + 1) * k * k];
            for b in 0..k {
                let fj = f[(j, b)];
                if fj == 0.0 {
                    continue;
                }
                let dst = &mut t1[(p * k + b) * k * k..(p * k + b + 1) * k * k];
                for (x, y) in dst.iter_mut().zip(src) {
                    *x += fj * y;
                }
            }
        }
    }
    t1
}

/// Linear combination of frame components `Σ w · R(F_a, F_b, F_c, F_d)`.
pub struct RealFrameObjective<'a> {
    pub r: &'a RiemannTensor,
    pub k: usize,
    pub terms: Terms,
    /// When set, the terms are the λ-interpolated isotropic expression and
    /// `terms` is ignored.
    pub isotropic_lambda: bool,
}

impl RealFrameObjective<'_> {
    fn terms_at(&self, lambda: f64) -> Terms {
        if self.isotropic_lambda {
            isotropic_terms(lambda)
        } else {
            self.terms.clone()
        }
    }

    fn component(t1: &[f64], f: &DMatrix<f64>, k: usize, [a, b, c, d]: [usize; 4]) -> f64 {
        (0..f.nrows()).map(|p| f[(p, a)] * t1[((p * k + b) * k + c) * k + d]).sum()
    }
}

impl Objective<f64> for RealFrameObjective<'_> {
    fn n(&self) -> usize {
        self.r.dim()
    }
    fn k(&self) -> usize {
        self.k
    }
    fn geometry(&self) -> Geometry {
        Geometry::Stiefel
    }
    fn has_lambda(&self) -> bool {
        self.isotropic_lambda
    }
    fn value(&self, z: &DMatrix<f64>, lambda: f64) -> f64 {
        let t1 = contract3(self.r, z);
        self.terms_at(lambda).iter().map(|(w, ix)| w * Self::component(&t1, z, self.k, *ix)).sum()
    }
    fn value_grad(&self, z: &DMatrix<f64>, lambda: f64) -> (f64, DMatrix<f64>, f64) {
        let n = self.r.dim();
        let k = self.k;
        let t1 = contract3(self.r, z);
        let at = |p: usize, b: usize, c: usize, d: usize| t1[((p * k + b) * k + c) * k + d];
        let mut g = DMatrix::zeros(n, k);
        let mut val = 0.0;
        for (w, [a, b, c, d]) in self.terms_at(lambda) {
            val += w * Self::component(&t1, z, k, [a, b, c, d]);
            for p in 0..n {
                g[(p, a)] += w * at(p, b, c, d);
                g[(p, b)] -= w * at(p, a, c, d);
                g[(p, c)] += w * at(p, d, a, b);
                g[(p, d)] -= w * at(p, c, a, b);
            }
        }
        let dl = if self.isotropic_lambda {
            let r1414 = Self::component(&t1, z, k, [0, 3, 0, 3]);
            let r2424 = Self::component(&t1, z, k, [1, 3, 1, 3]);
            let r1234 = Self::component(&t1, z, k, [0, 1, 2, 3]);
            2.0 * lambda * (r1414 + r2424) - 2.0 * r1234
        } else {
            0.0
        };
        (val, g, dl)
    }
}

/// `M_ik = Σ_jl R_ijkl w_j conj(w_l)` (Hermitian).
fn complex_sectional_matrix(r: &RiemannTensor, w: &[C64]) -> DMatrix<C64> {
    let n = r.dim();
    let comp = r.components();
    let mut m = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for i in 0..n {
        for j in 0..n {
            if w[j] == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..n {
                let base = idx(n, i, j, k, 0);
                let mut s = C64::new(0.0, 0.0);
                for l in 0..n {
                    s += w[l].conj() * comp[base + l];
                }
                m[(i, k)] += w[j] * s;
            }
        }
    }
    m
}

/// `Rm(v, w, v̄, w̄)` over unitary pairs in ℂⁿ.
pub struct ComplexSectionalObjective<'a> {
    pub r: &'a RiemannTensor,
}

fn quad(m: &DMatrix<C64>, v: &[C64]) -> f64 {
    let n = v.len();
    let mut s = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            s += v[i] * m[(i, k)] * v[k].conj();
        }
    }
    s.re
}

impl Objective<C64> for ComplexSectionalObjective<'_> {
    fn n(&self) -> usize {
        self.r.dim()
    }
    fn k(&self) -> usize {
        2
    }
    fn geometry(&self) -> Geometry {
        Geometry::Stiefel
    }
    fn value(&self, z: &DMatrix<C64>, _: f64) -> f64 {
        let v: Vec<C64> = z.column(0).iter().copied().collect();
        let w: Vec<C64> = z.column(1).iter().copied().collect();
        quad(&complex_sectional_matrix(self.r, &w), &v)
    }
    fn value_grad(&self, z: &DMatrix<C64>, _: f64) -> (f64, DMatrix<C64>, f64) {
        let n = self.r.dim();
        let v: Vec<C64> = z.column(0).iter().copied().collect();
        let w: Vec<C64> = z.column(1).iter().copied().collect();
        let mw = complex_sectional_matrix(self.r, &w);
        let mv = complex_sectional_matrix(self.r, &v);
        let val = quad(&mw, &v);
        let mut g = DMatrix::from_element(n, 2, C64::new(0.0, 0.0));
        for kk in 0..n {
            let mut gv = C64::new(0.0, 0.0);
            let mut gw = C64::new(0.0, 0.0);
            for i in 0..n {
                gv += mw[(i, kk)] * v[i];
                gw += mv[(i, kk)] * w[i];
            }
            g[(kk, 0)] = gv * 2.0;
            g[(kk, 1)] = gw * 2.0;
        }
        (val, g, 0.0)
    }
}

/// `A_ij = Σ_kl K_ijkl Y_k conj(Y_l)`.
pub(crate) fn contract_second(k: &KahlerTensor, y: &[C64]) -> DMatrix<C64> {
    let n = k.dim();
    let comp = k.components();
    let mut yy = vec![C64::new(0.0, 0.0); n * n];
    for a in 0..n {
        for b in 0..n {
            yy[a * n + b] = y[a] * y[b].conj();
        }
    }
    DMatrix::from_fn(n, n, |i, j| {
        let base = idx(n, i, j, 0, 0);
        comp[base..base + n * n].iter().zip(&yy).map(|(c, t)| c * t).sum()
    })
}

/// `B_kl = Σ_ij K_ijkl X_i conj(X_j)`.
pub(crate) fn contract_first(k: &KahlerTensor, x: &[C64]) -> DMatrix<C64> {
    let n = k.dim();
    let comp = k.components();
    let mut b = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for i in 0..n {
        for j in 0..n {
            let xx = x[i] * x[j].conj();
            if xx == C64::new(0.0, 0.0) {
                continue;
            }
            let base = idx(n, i, j, 0, 0);
            for kl in 0..n * n {
                b[(kl / n, kl % n)] += comp[base + kl] * xx;
            }
        }
    }
    b
}

/// `R(X, X̄, Y, Ȳ)` over unitary pairs (orthogonal bisectional) or pairs of
/// unit vectors (bisectional).
pub struct BisectionalObjective<'a> {
    pub k: &'a KahlerTensor,
    pub orthogonal: bool,
}

impl Objective<C64> for BisectionalObjective<'_> {
    fn n(&self) -> usize {
        self.k.dim()
    }
    fn k(&self) -> usize {
        2
    }
    fn geometry(&self) -> Geometry {
        if self.orthogonal {
            Geometry::Stiefel
        } else {
            Geometry::Spheres
        }
    }
    fn value(&self, z: &DMatrix<C64>, _: f64) -> f64 {
        let x: Vec<C64> = z.column(0).iter().copied().collect();
        let y: Vec<C64> = z.column(1).iter().copied().collect();
        self.k.bisectional(&x, &y)
    }
    fn value_grad(&self, z: &DMatrix<C64>, _: f64) -> (f64, DMatrix<C64>, f64) {
        let n = self.k.dim();
        let x: Vec<C64> = z.column(0).iter().copied().collect();
        let y: Vec<C64> = z.column(1).iter().copied().collect();
        let a = contract_second(self.k, &y);
        let b = contract_first(self.k, &x);
        let val = quad(&a, &x);
        let mut g = DMatrix::from_element(n, 2, C64::new(0.0, 0.0));
        for j in 0..n {
            let mut gx = C64::new(0.0, 0.0);
            let mut gy = C64::new(0.0, 0.0);
            for i in 0..n {
                gx += a[(i, j)] * x[i];
                gy += b[(i, j)] * y[i];
            }
            g[(j, 0)] = gx * 2.0;
            g[(j, 1)] = gy * 2.0;
        }
        (val, g, 0.0)
    }
}

/// `tr(Zᴴ A Z)` over k-frames; its minimum is the sum of the k smallest
/// eigenvalues of the Hermitian matrix `A`.
pub struct TraceObjective<T: nalgebra::Scalar> {
    pub a: DMatrix<T>,
    pub k: usize,
}

impl<T: super::optim::Scalar> Objective<T> for TraceObjective<T> {
    fn n(&self) -> usize {
        self.a.nrows()
    }
    fn k(&self) -> usize {
        self.k
    }
    fn geometry(&self) -> Geometry {
        Geometry::Stiefel
    }
    fn value(&self, z: &DMatrix<T>, _: f64) -> f64 {
        (z.adjoint() * &self.a * z).trace().real()
    }
    fn value_grad(&self, z: &DMatrix<T>, l: f64) -> (f64, DMatrix<T>, f64) {
        (self.value(z, l), &self.a * z * T::from_real(2.0), 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::optim::{random_point, Point};
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

    /// Central-difference check of the Euclidean gradient along a random
    /// ambient direction (the objectives are polynomials defined off the
    /// manifold too).
    fn check_gradient<T: super::super::optim::Scalar, O: Objective<T>>(obj: &O, seed: u64) {
        let mut r = rng::seeded(seed);
        let p: Point<T> = random_point(&mut r, obj.n(), obj.k(), obj.geometry(), obj.has_lambda());
        let dir = DMatrix::from_fn(obj.n(), obj.k(), |_, _| T::gaussian(&mut r));
        let h = 1e-6;
        let fp = obj.value(&(&p.z + &dir * T::from_real(h)), p.lambda);
        let fm = obj.value(&(&p.z - &dir * T::from_real(h)), p.lambda);
        let fd = (fp - fm) / (2.0 * h);
        let (_, g, dl) = obj.value_grad(&p.z, p.lambda);
        let an = T::re_dot(&g, &dir);
        assert!((fd - an).abs() < 1e-6 * (1.0 + an.abs()), "fd {fd} vs analytic {an}");
        if obj.has_lambda() {
            let fl = (obj.value(&p.z, p.lambda + h) - obj.value(&p.z, p.lambda - h)) / (2.0 * h);
            assert!((fl - dl).abs() < 1e-6 * (1.0 + dl.abs()));
        }
    }

    #[test]
    fn real_frame_gradients() {
        let r = random_riemann(5, 1);
        let pic1 = RealFrameObjective { r: &r, k: 4, terms: vec![], isotropic_lambda: true };
        check_gradient(&pic1, 2);
        let three = RealFrameObjective {
            r: &r,
            k: 3,
            terms: vec![(1.0, [0, 2, 0, 2]), (1.0, [1, 2, 1, 2])],
            isotropic_lambda: false,
        };
        check_gradient(&three, 3);
    }

    #[test]
    fn complex_gradients() {
        let r = random_riemann(4, 5);
        check_gradient(&ComplexSectionalObjective { r: &r }, 6);
        let k = random_kahler(3, 7);
        check_gradient(&BisectionalObjective { k: &k, orthogonal: true }, 8);
        check_gradient(&BisectionalObjective { k: &k, orthogonal: false }, 9);
    }

    #[test]
    fn frame_objective_matches_direct_evaluation() {
        let r = random_riemann(5, 11);
        let mut g = rng::seeded(12);
        let f = crate::linalg::haar_orthogonal(&mut g, 5, 4);
        let obj = RealFrameObjective { r: &r, k: 4, terms: vec![], isotropic_lambda: true };
        let direct = crate::tensor::eval_terms(&r, &f, &isotropic_terms(0.3));
        assert!((obj.value(&f, 0.3) - direct).abs() < 1e-12);
    }
}
