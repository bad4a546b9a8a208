//! NOB defect of a random Kähler tensor, the shift ℓ that makes it NOB, and
//! the rank-one minimizer of the curvature form.

use curvlab::cones::{self, nob_rank1, ConeId, OptimizerConfig};
use curvlab::sampling::{random_tensor, SamplerConfig};
use curvlab::tensor::Kind;

fn main() -> curvlab::Result<()> {
    let opt = OptimizerConfig::default().with_restarts(32);
    for seed in 0..4u64 {
        let k = random_tensor(Kind::Kahler, &SamplerConfig::new(3, seed))?;
        let ell = cones::nob_shift(&k, &opt)?;
        let shifted = k.shifted(ell);
        let after = cones::defect(&shifted, ConeId::Nob, &opt)?.defect;
        let r1 = nob_rank1(&k, &opt)?;
        println!(
            "seed {seed}: ell = {ell:+.6}, defect after shift = {after:+.2e}, rank-one report {}",
            r1.to_json()
        );
    }
    Ok(())
}
