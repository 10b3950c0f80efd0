//! Best separable approximation of six-state tomography data.

use qkd_bsa::bsa::{max_separable_weight, EquivalenceClassSpec};
use qkd_bsa::protocol::{born_distribution, depolarized_bell_state, ChannelParam, ProtocolKind, ProtocolSpec};

fn main() -> qkd_bsa::Result<()> {
    let e = 0.1;
    let rho = depolarized_bell_state(ChannelParam::new(e)?);
    let spec = ProtocolSpec::equal_weights(ProtocolKind::SixState);
    let p = born_distribution(&rho, &spec.alice_povm, &spec.bob_povm)?;
    let class = EquivalenceClassSpec::new(spec.alice_povm, spec.bob_povm, p)?;

    let r = max_separable_weight(&class)?;
    println!("e = {e}: lambda_max = {:.9} (3e = {:.9})", r.lambda_max, 3.0 * e);
    println!("verdict: {}", r.verdict());
    println!("iterations {}, gap {:.2e}, residual {:.2e}", r.iterations, r.duality_gap, r.decomposition_residual());
    if let Some(ent) = &r.rho_ent {
        println!("purity of rho_ent = {:.9}", ent.purity());
    }
    println!("{}", serde_json::to_string_pretty(&r.to_json())?);
    Ok(())
}
