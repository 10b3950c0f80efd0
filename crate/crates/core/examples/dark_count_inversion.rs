//! Trusted detectors: simulate dark counts and losses, then undo the dark counts.

use qkd_bsa::detector::{apply_efficiency, invert_dark_counts, noisy_povm, DetectorSpec};
use qkd_bsa::protocol::{born_distribution, depolarized_bell_state, ChannelParam, ProtocolKind, ProtocolSpec};

fn main() -> qkd_bsa::Result<()> {
    let det = DetectorSpec::uniform(1e-3, 0.5)?;
    let spec = ProtocolSpec::equal_weights(ProtocolKind::FourState);
    let rho = depolarized_bell_state(ChannelParam::new(0.05)?);

    let lossy = apply_efficiency(&spec.bob_povm, &det)?;
    let noisy = noisy_povm(&spec.bob_povm, &det)?;
    println!("Bob outcomes: {:?}", noisy.labels());

    let observed = born_distribution(&rho, &spec.alice_povm, &noisy)?;
    let clean = born_distribution(&rho, &spec.alice_povm, &lossy)?;
    let recovered = invert_dark_counts(&observed, &det, &lossy)?;

    let err = recovered.probs().iter().zip(clean.probs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("max |recovered - dark-free| = {err:.2e}");
    Ok(())
}
