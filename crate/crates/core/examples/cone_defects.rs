//! Defects of one random Riemannian tensor against every Riemannian cone,
//! cross-checked against the sampling oracle.

use curvlab::cones::{self, ConeId, OptimizerConfig};
use curvlab::sampling::{random_tensor, SamplerConfig};
use curvlab::tensor::Kind;

fn main() -> curvlab::Result<()> {
    let n = 5;
    let t = random_tensor(Kind::Riemann, &SamplerConfig::new(n, 11))?.shifted(1.5);
    let opt = OptimizerConfig::default().with_restarts(16).with_oracle_samples(20_000);
    println!("n = {n}, |T| = {:.4}, scal = {:.4}", t.norm(), t.scalar());
    println!("{:<16} {:>12} {:>12} {:>6}", "cone", "defect", "oracle", "conv");
    for cone in ConeId::all(2).into_iter().filter(|c| c.accepts(Kind::Riemann)) {
        let r = cones::defect(&t, cone, &opt)?;
        println!("{:<16} {:>12.6} {:>12.6} {:>6}", cone.to_string(), r.defect, r.oracle_defect, r.converged);
    }
    Ok(())
}
