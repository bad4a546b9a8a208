//! Closed-form fixtures and their reaction terms.
//!
//! The round sphere and Fubini-Study are fixed directions of the reaction:
//! Q(c·S) = κ c²·S.

use curvlab::sampling::{fixture, FixtureSpec};
use curvlab::tensor::Kind;

fn main() -> curvlab::Result<()> {
    let specs = [
        FixtureSpec::Sphere { dim: 4, c: 1.0 },
        FixtureSpec::Sphere { dim: 6, c: 0.5 },
        FixtureSpec::FubiniStudy { dim: 2, c: 1.0 },
        FixtureSpec::FubiniStudy { dim: 3, c: 2.0 },
        FixtureSpec::Product(
            Box::new(FixtureSpec::FubiniStudy { dim: 1, c: 1.0 }),
            Box::new(FixtureSpec::Flat { kind: Kind::Kahler, dim: 1 }),
        ),
    ];
    println!("{:<42} {:>8} {:>10} {:>12}", "fixture", "scal", "ric_min", "Q/T ratio");
    for spec in &specs {
        let t = fixture(spec)?;
        let q = t.reaction();
        // ratio of the reaction to the tensor, when they are parallel
        let ratio = {
            let (a, b) = (t.to_flat(), q.to_flat());
            let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            let aa: f64 = a.iter().map(|x| x * x).sum();
            let r = dot / aa.max(f64::MIN_POSITIVE);
            let resid = q.add_scaled(&t, -r).norm();
            if resid < 1e-12 * q.norm().max(1.0) { format!("{r:.6}") } else { "n/a".into() }
        };
        println!(
            "{:<42} {:>8.4} {:>10.4} {:>12}",
            format!("{spec:?}").chars().take(42).collect::<String>(),
            t.scalar(),
            t.ricci_eigenvalues()[0],
            ratio
        );
    }
    Ok(())
}
