//! The separable-weight bound against the relative entropy of entanglement
//! and the observed mutual information.

use qkd_bsa::bound::{corollary2_bound, E_R_LABEL};
use qkd_bsa::detector::DetectorSpec;
use qkd_bsa::protocol::{ChannelParam, ProtocolKind, ProtocolSpec};

fn main() -> qkd_bsa::Result<()> {
    let spec = ProtocolSpec::equal_weights(ProtocolKind::SixState);
    println!("{:>5} {:>10} {:>10} {:>10}   ({E_R_LABEL})", "e", "bound", "I(A;B)", "E_r");
    for e in [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3] {
        let r = corollary2_bound(&spec, ChannelParam::new(e)?, &DetectorSpec::ideal())?;
        println!("{e:>5.2} {:>10.6} {:>10.6} {:>10.6}", r.upper_bound, r.mutual_info, r.e_r.unwrap_or(f64::NAN));
    }
    Ok(())
}
