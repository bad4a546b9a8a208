//! Runs every registered claim at a small budget and prints the CSV summary.
//!
//! `cargo run --release --example lemma_registry -- 6 40`

use curvlab::verify::{verify, SearchConfig, VerifierReport, ALL_CLAIMS};

fn main() -> curvlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let dim: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(5);
    let samples: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(20);
    let cfg = SearchConfig { restarts: 4, iters_per_stage: 8, ..Default::default() };
    println!("{}", VerifierReport::CSV_HEADER);
    for (i, claim) in ALL_CLAIMS.iter().enumerate() {
        let rep = verify(*claim, dim, samples, &cfg, 100 + i as u64)?;
        println!("{}", rep.csv_row());
    }
    Ok(())
}
