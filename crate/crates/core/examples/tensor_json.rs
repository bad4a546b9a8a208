//! Round trip through the JSON tensor format, and the reader rejecting a
//! tensor that breaks the Bianchi identity.

use curvlab::sampling::{random_tensor, SamplerConfig};
use curvlab::tensor::{io, Kind};

fn main() -> curvlab::Result<()> {
    let t = random_tensor(Kind::Riemann, &SamplerConfig::new(4, 3))?;
    let text = io::to_json_string(&t);
    let back = io::from_json_str(&text, false)?;
    println!("round trip max |Δ| = {:e}", t.max_abs_diff(&back));

    let mut v: serde_json::Value = serde_json::from_str(&text)?;
    // R_0123 alone breaks the first Bianchi identity
    let idx = ((0 * 4 + 1) * 4 + 2) * 4 + 3;
    let c = v["components"][idx].as_f64().unwrap();
    v["components"][idx] = (c + 0.25).into();
    match io::from_json_value(&v, false) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("strict reader: {e}"),
    }
    let projected = io::from_json_value(&v, true)?;
    println!("projecting reader: residual {:.2e}", projected.symmetry_residual());
    Ok(())
}
