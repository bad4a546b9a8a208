//! Boundary NOB tensors flowed until scal doubles; prints the worst cone
//! defect and smallest Ricci eigenvalue seen along each trajectory.

use curvlab::cones::ConeId;
use curvlab::flow::{invariance_experiment, InvarianceConfig};
use curvlab::tensor::Kind;

fn main() -> curvlab::Result<()> {
    let mut cfg = InvarianceConfig::new(ConeId::Nob, Kind::Kahler, 2, 10, 2024);
    cfg.also = Some(ConeId::RicciK(1));
    let rep = invariance_experiment(&cfg)?;
    print!("{}", rep.to_csv());
    println!(
        "worst excursion {:.3e}, worst λ1 {:.3e}, blowups {}",
        rep.worst_excursion(),
        rep.worst_ric_min(),
        rep.blowups()
    );
    Ok(())
}
