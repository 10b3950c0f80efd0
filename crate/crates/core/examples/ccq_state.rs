//! Eve's conditional states after Alice and Bob measure a purified
//! depolarized Bell state, and the information Eve leaves when she measures.

use qkd_bsa::info::{ccq_state, measured_distribution, measured_quantum_intrinsic, mutual_information};
use qkd_bsa::protocol::{basis_povm, depolarized_bell_state, Basis, ChannelParam};
use qkd_bsa::quantum::purify;

fn main() -> qkd_bsa::Result<()> {
    let rho = depolarized_bell_state(ChannelParam::new(0.1)?);
    let psi = purify(&rho);
    let z = basis_povm(Basis::Z);
    let ccq = ccq_state(&psi.density(), &z, &z)?;
    println!("Eve dimension {}", ccq.eve_dim());
    println!("I(A;B) = {:.6}", mutual_information(&ccq.ab_distribution()?)?);

    let eve = qkd_bsa::detector::Povm::projective(
        &nalgebra::DMatrix::identity(ccq.eve_dim(), ccq.eve_dim()),
        (0..ccq.eve_dim()).map(|k| k.to_string()).collect(),
    )?;
    let p = measured_distribution(&ccq, &eve)?;
    println!("p(a,b,e) shape {:?}", p.shape());
    println!("I(A;B|E) with a computational-basis measurement = {:.6}", measured_quantum_intrinsic(&ccq, &eve)?);
    Ok(())
}
