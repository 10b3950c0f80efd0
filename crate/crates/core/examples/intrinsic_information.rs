//! Intrinsic information of a tripartite distribution.

use qkd_bsa::info::{
    conditional_mutual_information, intrinsic_information, mutual_information, JointDistribution, SearchConfig,
};

fn main() -> qkd_bsa::Result<()> {
    // Alice and Bob share a noisy bit, Eve holds a noisy copy of Alice's.
    let (eps, delta) = (0.1, 0.2);
    let mut probs = Vec::new();
    for a in 0..2 {
        for b in 0..2 {
            for e in 0..2 {
                let pb = if a == b { 1.0 - eps } else { eps };
                let pe = if a == e { 1.0 - delta } else { delta };
                probs.push(0.5 * pb * pe);
            }
        }
    }
    let p = JointDistribution::new(vec![2, 2, 2], probs)?;
    let ii = intrinsic_information(&p, &SearchConfig::default())?;
    println!("I(A;B)        = {:.6}", mutual_information(&p.marginal(&[0, 1]))?);
    println!("I(A;B|E)      = {:.6}", conditional_mutual_information(&p)?);
    println!("I(A;B down E) = {:.6}", ii.value);
    println!("best channel  = {:?}", ii.channel);
    Ok(())
}
