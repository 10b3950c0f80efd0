//! Property tests over seeded random inputs.

use nalgebra::DMatrix;
use proptest::prelude::*;
use qkd_bsa::bound::{corollary2_bound, format_sig9, linear_grid};
use qkd_bsa::detector::{apply_dark_counts_to_distribution, invert_dark_counts_with, DetectorSpec};
use qkd_bsa::info::{
    conditional_mutual_information, mutual_information, shannon_entropy, JointDistribution,
};
use qkd_bsa::protocol::{ChannelParam, ProtocolKind, ProtocolSpec};
use qkd_bsa::quantum::{partial_trace, partial_transpose, random, von_neumann_entropy};
use qkd_bsa::sdp::{hermitian_functional, hermitian_to_real_embedding, read_dump, real_to_hermitian, write_dump};
use qkd_bsa::sdp::{Constraint, SdpProblem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn distribution(weights: &[f64], shape: Vec<usize>) -> JointDistribution {
    let s: f64 = weights.iter().sum();
    JointDistribution::new(shape, weights.iter().map(|w| w / s).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_operations_respect_trace_and_spectrum(seed in any::<u64>(), da in 2usize..4, db in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random::density(&mut rng, &[da, db], 2);
        let pt = partial_transpose(rho.hermitian(), &[da, db], 1).unwrap();
        prop_assert!((pt.trace() - 1.0).abs() < 1e-12);
        let back = partial_transpose(&pt, &[da, db], 1).unwrap();
        prop_assert!(back.max_abs_diff(rho.hermitian()) < 1e-15);
        let ra = partial_trace(rho.hermitian(), &[da, db], 0).unwrap();
        prop_assert!((ra.trace() - 1.0).abs() < 1e-12);
        prop_assert!(ra.min_eigenvalue() > -1e-12);
    }

    #[test]
    fn pure_states_have_equal_marginal_entropies(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random::pure(&mut rng, &[2, 3]).density();
        let sa = von_neumann_entropy(&partial_trace(psi.hermitian(), &[2, 3], 0).unwrap());
        let sb = von_neumann_entropy(&partial_trace(psi.hermitian(), &[2, 3], 1).unwrap());
        prop_assert!((sa - sb).abs() < 1e-9);
        prop_assert!(von_neumann_entropy(psi.hermitian()).abs() < 1e-9);
    }

    #[test]
    fn real_embedding_round_trips(seed in any::<u64>(), n in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random::hermitian(&mut rng, n);
        let e = random::hermitian(&mut rng, n);
        let x = hermitian_to_real_embedding(&h);
        prop_assert!(real_to_hermitian(&x).max_abs_diff(&h) < 1e-14);
        let lhs = hermitian_functional(&e).dot(&x);
        prop_assert!((lhs - e.inner(&h)).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_is_bounded(w in prop::collection::vec(0.0f64..1.0, 6)) {
        prop_assume!(w.iter().sum::<f64>() > 1e-3);
        let p = distribution(&w, vec![2, 3]);
        let i = mutual_information(&p).unwrap();
        let ha = shannon_entropy(p.marginal(&[0]).probs()).unwrap();
        let hb = shannon_entropy(p.marginal(&[1]).probs()).unwrap();
        prop_assert!(i >= 0.0 && i <= ha.min(hb) + 1e-12);
    }

    #[test]
    fn conditional_mutual_information_is_nonnegative(w in prop::collection::vec(0.0f64..1.0, 8)) {
        prop_assume!(w.iter().sum::<f64>() > 1e-3);
        prop_assert!(conditional_mutual_information(&distribution(&w, vec![2, 2, 2])).unwrap() >= 0.0);
    }

    #[test]
    fn dark_counts_invert_exactly(w in prop::collection::vec(0.0f64..1.0, 16), d in 0.0f64..1e-3) {
        prop_assume!(w.iter().sum::<f64>() > 1e-3);
        let p = distribution(&w, vec![4, 4]);
        let dark = vec![d / 4.0; 4];
        let back = invert_dark_counts_with(&apply_dark_counts_to_distribution(&p, &dark).unwrap(), &dark).unwrap();
        for (x, y) in back.probs().iter().zip(p.probs()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn sig9_round_trips(v in -1e3f64..1e3) {
        let parsed: f64 = format_sig9(v).parse().unwrap();
        prop_assert!((parsed - v).abs() <= 5e-9 * v.abs().max(1e-300));
    }

    #[test]
    fn grid_is_sorted_with_exact_endpoints(a in 0.0f64..0.25, b in 0.25f64..0.5, n in 2usize..200) {
        let g = linear_grid(a, b, n).unwrap();
        prop_assert_eq!(g.len(), n);
        prop_assert_eq!(g[0], a);
        prop_assert_eq!(g[n - 1], b);
        prop_assert!(g.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn sdp_dump_round_trips(seed in any::<u64>(), n in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sym = |rng: &mut ChaCha8Rng| {
            let h = random::hermitian(rng, n);
            DMatrix::from_fn(n, n, |i, j| h.get(i, j).re)
        };
        let c = sym(&mut rng);
        let a = sym(&mut rng);
        let p = SdpProblem::new(vec![n, 1], vec![c, DMatrix::zeros(1, 1)], vec![
            Constraint { matrices: vec![Some(a), None], rhs: 0.3 },
            Constraint { matrices: vec![None, Some(DMatrix::identity(1, 1))], rhs: 1.0 },
        ]).unwrap();
        prop_assert_eq!(read_dump(&write_dump(&p)).unwrap(), p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// More noise never raises the bound.
    #[test]
    fn bound_is_monotone_in_noise(e1 in 0.0f64..0.5, e2 in 0.0f64..0.5, six in any::<bool>()) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let kind = if six { ProtocolKind::SixState } else { ProtocolKind::FourState };
        let spec = ProtocolSpec::equal_weights(kind);
        let det = DetectorSpec::ideal();
        let a = corollary2_bound(&spec, ChannelParam::new(lo).unwrap(), &det).unwrap();
        let b = corollary2_bound(&spec, ChannelParam::new(hi).unwrap(), &det).unwrap();
        prop_assert!(b.upper_bound <= a.upper_bound + 1e-7);
        prop_assert!(b.lambda_max >= a.lambda_max - 1e-7);
    }

    /// Lower efficiency never raises the bound.
    #[test]
    fn bound_is_monotone_in_efficiency(e in 0.0f64..0.3, eta1 in 0.05f64..1.0, eta2 in 0.05f64..1.0) {
        let (lo, hi) = if eta1 <= eta2 { (eta1, eta2) } else { (eta2, eta1) };
        let spec = ProtocolSpec::equal_weights(ProtocolKind::SixState);
        let p = ChannelParam::new(e).unwrap();
        let a = corollary2_bound(&spec, p, &DetectorSpec::uniform(1e-6, lo).unwrap()).unwrap();
        let b = corollary2_bound(&spec, p, &DetectorSpec::uniform(1e-6, hi).unwrap()).unwrap();
        prop_assert!(a.upper_bound <= b.upper_bound + 1e-7);
    }
}
