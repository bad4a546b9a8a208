//! Reaction flow from the sphere and from Fubini-Study, against the
//! closed-form ray c(t) = c₀ / (1 − κ c₀ t). `ray_constant` returns the
//! initial growth rate κ c₀.

use curvlab::flow::{integrate, ray_constant, FunctionalId, StepControl};
use curvlab::sampling::{fixture, FixtureSpec};

fn main() -> curvlab::Result<()> {
    let ctrl = StepControl { stop_factor: 2.0, ..Default::default() };
    for spec in [FixtureSpec::Sphere { dim: 5, c: 1.0 }, FixtureSpec::FubiniStudy { dim: 3, c: 0.5 }] {
        let t0 = fixture(&spec)?;
        let rate = ray_constant(&t0, 1e-12).expect("fixture is a ray");
        let tr = integrate(&t0, &ctrl, &[FunctionalId::Scal])?;
        // scal is linear in c along the ray
        let scal = tr.column(FunctionalId::Scal).expect("tracked");
        let mut worst = 0.0f64;
        for (&t, &s) in tr.times.iter().zip(&scal) {
            let exact = scal[0] / (1.0 - rate * t);
            worst = worst.max(((s - exact) / exact).abs());
        }
        println!(
            "{spec:?}: {} steps to t = {:.6}, worst relative error {worst:.2e}",
            tr.accepted,
            tr.final_time()
        );
    }
    Ok(())
}
