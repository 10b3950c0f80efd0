//! Separability verdicts for random product mixtures and random entangled states.

use qkd_bsa::bsa::{separability_verdict, EquivalenceClassSpec};
use qkd_bsa::protocol::{born_distribution, ProtocolKind, ProtocolSpec};
use qkd_bsa::quantum::{partial_transpose, random, tensor, DensityMatrix, HermitianMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn class(rho: &DensityMatrix) -> qkd_bsa::Result<EquivalenceClassSpec> {
    let spec = ProtocolSpec::equal_weights(ProtocolKind::SixState);
    let p = born_distribution(rho, &spec.alice_povm, &spec.bob_povm)?;
    EquivalenceClassSpec::new(spec.alice_povm, spec.bob_povm, p)
}

fn main() -> qkd_bsa::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..5 {
        let mut sep = HermitianMatrix::zeros(4);
        for _ in 0..3 {
            let a = random::density(&mut rng, &[2], 1);
            let b = random::density(&mut rng, &[2], 1);
            sep = sep.add(&tensor(a.hermitian(), b.hermitian()));
        }
        let sep = DensityMatrix::normalized(sep, vec![2, 2])?;
        println!("product mixture {k}: separable-compatible = {}", separability_verdict(&class(&sep)?)?);

        let ent = random::pure(&mut rng, &[2, 2]).density();
        let min_pt = partial_transpose(ent.hermitian(), &[2, 2], 1)?.min_eigenvalue();
        println!("random pure {k} (min PT eigenvalue {min_pt:.3}): separable-compatible = {}", separability_verdict(&class(&ent)?)?);
    }
    Ok(())
}
