//! Bound curves for both protocols, ideal and with imperfect detectors.
//!
//! Run with `cargo run --release --example key_rate_curves`.

use qkd_bsa::bound::{linear_grid, scan};
use qkd_bsa::detector::DetectorSpec;
use qkd_bsa::protocol::{ProtocolKind, ProtocolSpec};

fn main() -> qkd_bsa::Result<()> {
    let grid = linear_grid(0.0, 0.35, 15)?;
    let setups = [
        ("ideal", DetectorSpec::ideal()),
        ("d=1e-6, eta=0.15", DetectorSpec::uniform(1e-6, 0.15)?),
    ];
    for kind in [ProtocolKind::SixState, ProtocolKind::FourState] {
        let spec = ProtocolSpec::equal_weights(kind);
        for (label, det) in &setups {
            println!("# {kind}, {label}");
            println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "e", "lambda", "bound", "I(A;B)", "E_r");
            for r in scan(&spec, &grid, det)? {
                println!(
                    "{:>6.3} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
                    r.e,
                    r.lambda_max,
                    r.upper_bound,
                    r.mutual_info,
                    r.e_r.unwrap_or(f64::NAN)
                );
            }
        }
    }
    Ok(())
}
