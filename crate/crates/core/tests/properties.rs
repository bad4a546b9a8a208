//! Property tests for tensor algebra, cone defects and the reaction.

use curvlab::cones::{self, ConeId, OptimizerConfig};
use curvlab::rng;
use curvlab::sampling::{random_tensor, SamplerConfig};
use curvlab::tensor::{io, realify, reaction_kahler, reaction_riemann, Kind, Tensor};
use proptest::prelude::*;

fn kind_dim() -> impl Strategy<Value = (Kind, usize)> {
    prop_oneof![(Just(Kind::Riemann), 2usize..=6), (Just(Kind::Kahler), 1usize..=4)]
}

fn tensor(kind: Kind, dim: usize, seed: u64) -> Tensor {
    random_tensor(kind, &SamplerConfig::new(dim, seed)).unwrap()
}

fn opt(seed: u64) -> OptimizerConfig {
    OptimizerConfig::default().with_restarts(16).with_oracle_samples(0).with_seed(seed)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn sampled_tensors_satisfy_the_symmetries((kind, n) in kind_dim(), seed in any::<u64>()) {
        let t = tensor(kind, n, seed);
        prop_assert!(t.symmetry_residual() <= 1e-12 * t.norm().max(1.0));
        let again = Tensor::from_flat_projected(kind, n, &t.to_flat()).unwrap();
        prop_assert!(again.max_abs_diff(&t) <= 1e-13 * t.norm().max(1.0));
    }

    #[test]
    fn json_round_trip_is_exact((kind, n) in kind_dim(), seed in any::<u64>()) {
        let t = tensor(kind, n, seed);
        let back = io::from_json_str(&io::to_json_string(&t), false).unwrap();
        prop_assert_eq!(back.to_flat(), t.to_flat());
    }

    #[test]
    fn reaction_is_quadratic((kind, n) in kind_dim(), seed in any::<u64>(), a in -3.0f64..3.0) {
        let t = tensor(kind, n, seed);
        let lhs = t.scaled(a).reaction();
        let rhs = t.reaction().scaled(a * a);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * rhs.norm().max(1.0));
    }

    #[test]
    fn reaction_commutes_with_gauge((kind, n) in kind_dim(), seed in any::<u64>()) {
        let t = tensor(kind, n, seed);
        let mut g = rng::seeded(seed);
        let mut g2 = rng::seeded(seed);
        let lhs = t.random_gauge(&mut g).reaction();
        let rhs = t.reaction().random_gauge(&mut g2);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-11 * rhs.norm().max(1.0));
    }

    #[test]
    fn realify_intertwines_the_reactions(n in 1usize..=3, seed in any::<u64>()) {
        let t = tensor(Kind::Kahler, n, seed);
        let k = t.as_kahler().unwrap();
        let a: Tensor = realify(&reaction_kahler(k)).into();
        let b: Tensor = reaction_riemann(&realify(k)).into();
        prop_assert!(a.max_abs_diff(&b) <= 1e-12 * b.norm().max(1.0));
    }

    #[test]
    fn scalar_curvature_of_realification_doubles(n in 1usize..=3, seed in any::<u64>()) {
        let t = tensor(Kind::Kahler, n, seed);
        let r: Tensor = realify(t.as_kahler().unwrap()).into();
        prop_assert!((r.scalar() - 2.0 * t.scalar()).abs() <= 1e-12 * t.norm().max(1.0));
    }

    #[test]
    fn identity_shift_moves_ricci_uniformly((kind, n) in kind_dim(), seed in any::<u64>(), beta in -2.0f64..2.0) {
        let t = tensor(kind, n, seed);
        let gain = match kind { Kind::Riemann => n as f64 - 1.0, Kind::Kahler => n as f64 + 1.0 };
        let before = t.ricci_eigenvalues();
        let after = t.shifted(beta).ricci_eigenvalues();
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((y - x - gain * beta).abs() <= 1e-11 * (1.0 + t.norm()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn affine_defects_follow_identity_shifts(seed in any::<u64>(), beta in -1.0f64..1.0, pick in 0usize..5) {
        let cases = [
            (ConeId::Pic, Kind::Riemann, 4),
            (ConeId::ComplexSectional, Kind::Riemann, 4),
            (ConeId::Sum4, Kind::Riemann, 5),
            (ConeId::Nob, Kind::Kahler, 2),
            (ConeId::RicciK(2), Kind::Kahler, 3),
        ];
        let (cone, kind, n) = cases[pick];
        let gain = cone.affine_gain(kind, n).unwrap();
        let t = tensor(kind, n, seed);
        let d0 = cones::defect(&t, cone, &opt(seed)).unwrap().defect;
        let d1 = cones::defect(&t.shifted(beta), cone, &opt(seed)).unwrap().defect;
        prop_assert!((d1 - d0 - gain * beta).abs() <= 1e-7 * t.norm().max(1.0), "{} {} {}", d0, d1, gain);
    }

    #[test]
    fn defects_are_positively_homogeneous_and_gauge_invariant(seed in any::<u64>(), a in 0.1f64..5.0, pick in 0usize..4) {
        let cases = [
            (ConeId::Pic1, Kind::Riemann, 4),
            (ConeId::Wpic1ThreeFrame, Kind::Riemann, 4),
            (ConeId::Op2Nonneg, Kind::Riemann, 4),
            (ConeId::Bisectional, Kind::Kahler, 2),
        ];
        let (cone, kind, n) = cases[pick];
        let t = tensor(kind, n, seed);
        let d = cones::defect(&t, cone, &opt(seed)).unwrap().defect;
        let scaled = cones::defect(&t.scaled(a), cone, &opt(seed)).unwrap().defect;
        prop_assert!((scaled - a * d).abs() <= 1e-7 * a * t.norm(), "{} vs {}", scaled, a * d);
        let g = t.random_gauge(&mut rng::seeded(seed ^ 1));
        let dg = cones::defect(&g, cone, &opt(seed)).unwrap().defect;
        prop_assert!((dg - d).abs() <= 1e-7 * t.norm(), "{} vs {}", dg, d);
    }

    #[test]
    fn optimizer_never_beats_its_own_witness(seed in any::<u64>(), pick in 0usize..3) {
        let cases = [(ConeId::Pic, Kind::Riemann, 5), (ConeId::Nob, Kind::Kahler, 3), (ConeId::Pic1, Kind::Riemann, 4)];
        let (cone, kind, n) = cases[pick];
        let t = tensor(kind, n, seed);
        let r = cones::defect(&t, cone, &opt(seed)).unwrap();
        let again = cones::evaluate_at(&t, cone, &r.witness, r.lambda).unwrap();
        prop_assert!((again - r.defect).abs() <= 1e-12 * t.norm().max(1.0));
    }
}

#[test]
fn derived_seeds_are_stable_and_distinct() {
    let a: Vec<u64> = (0..64).map(|i| rng::derive_seed(42, i)).collect();
    let b: Vec<u64> = (0..64).map(|i| rng::derive_seed(42, i)).collect();
    assert_eq!(a, b);
    let mut s = a.clone();
    s.sort_unstable();
    s.dedup();
    assert_eq!(s.len(), a.len());
}
