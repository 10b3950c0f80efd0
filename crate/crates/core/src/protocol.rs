//! Four-state and six-state measurement sets and the depolarized Bell state.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::detector::{embed_state, noisy_povm, DetectorSpec, Povm};
use crate::error::{invalid, Result};
use crate::info::JointDistribution;
use crate::quantum::{bell_phi_plus, DensityMatrix, HermitianMatrix};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    FourState,
    SixState,
}

impl ProtocolKind {
    pub fn bases(self) -> &'static [Basis] {
        match self {
            ProtocolKind::FourState => &[Basis::Z, Basis::X],
            ProtocolKind::SixState => &[Basis::Z, Basis::X, Basis::Y],
        }
    }
}

impl FromStr for ProtocolKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "four-state" | "bb84" => Ok(ProtocolKind::FourState),
            "six-state" => Ok(ProtocolKind::SixState),
            other => Err(invalid(format!("unknown protocol {other:?}"))),
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProtocolKind::FourState => "four-state",
            ProtocolKind::SixState => "six-state",
        })
    }
}

/// Pauli eigenbases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    fn tag(self) -> &'static str {
        match self {
            Basis::X => "x",
            Basis::Y => "y",
            Basis::Z => "z",
        }
    }

    /// Eigenvectors as columns, +1 eigenvalue first.
    pub fn vectors(self) -> DMatrix<C64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (r, i) = (C64::new(s, 0.0), C64::new(0.0, s));
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        match self {
            Basis::Z => DMatrix::from_row_slice(2, 2, &[one, zero, zero, one]),
            Basis::X => DMatrix::from_row_slice(2, 2, &[r, r, r, -r]),
            Basis::Y => DMatrix::from_row_slice(2, 2, &[r, r, i, -i]),
        }
    }
}

/// Projective measurement onto a Pauli eigenbasis (labels like `"z0"`, `"z1"`).
pub fn basis_povm(b: Basis) -> Povm {
    Povm::projective(&b.vectors(), vec![format!("{}0", b.tag()), format!("{}1", b.tag())])
        .expect("Pauli eigenbasis is orthonormal")
}

/// Depolarizing error probability `e` in `[0, 1/2]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ChannelParam(f64);

impl ChannelParam {
    pub fn new(e: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&e) {
            return Err(invalid(format!("error probability e must lie in [0, 1/2], got {e}")));
        }
        Ok(Self(e))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `(1 - 2e) |phi+><phi+| + (e/2) I`.
pub fn depolarized_bell_state(e: ChannelParam) -> DensityMatrix {
    let e = e.value();
    let h = bell_phi_plus()
        .density()
        .scale(1.0 - 2.0 * e)
        .add(&HermitianMatrix::identity(4).scale(e / 2.0));
    DensityMatrix::new(h, vec![2, 2]).expect("depolarized Bell state is a valid state")
}

/// Measurement set of a protocol. Each outcome element is
/// `weight(basis) * eigenprojector`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolSpec {
    pub kind: ProtocolKind,
    pub weights: Vec<f64>,
    pub alice_povm: Povm,
    pub bob_povm: Povm,
    pub key_basis: Basis,
}

/// Builds the protocol POVMs with basis probabilities `weights` (ordered as
/// [`ProtocolKind::bases`]: z, x, then y).
pub fn protocol_povms(kind: ProtocolKind, weights: &[f64]) -> Result<ProtocolSpec> {
    let bases = kind.bases();
    if weights.len() != bases.len() {
        return Err(invalid(format!(
            "{kind} needs {} basis weights, got {}",
            bases.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|&w| w.is_nan() || w < 0.0) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("basis weights {weights:?} must be nonnegative and sum to 1")));
    }
    let mut elements = Vec::new();
    let mut labels = Vec::new();
    for (&b, &w) in bases.iter().zip(weights) {
        let p = basis_povm(b);
        for (e, l) in p.elements().iter().zip(p.labels()) {
            elements.push(e.scale(w));
            labels.push(l.clone());
        }
    }
    let povm = Povm::new(elements, labels)?;
    Ok(ProtocolSpec {
        kind,
        weights: weights.to_vec(),
        alice_povm: povm.clone(),
        bob_povm: povm,
        key_basis: Basis::Z,
    })
}

impl ProtocolSpec {
    pub fn equal_weights(kind: ProtocolKind) -> Self {
        let n = kind.bases().len();
        protocol_povms(kind, &vec![1.0 / n as f64; n]).expect("equal weights are valid")
    }

    /// Same protocol with equal basis weights; used to build the constraints
    /// of the compatible-state set.
    pub fn tomography(&self) -> Self {
        let mut t = Self::equal_weights(self.kind);
        t.key_basis = self.key_basis;
        t
    }

    /// Unweighted projective measurement in the key basis.
    pub fn key_povm(&self) -> Povm {
        basis_povm(self.key_basis)
    }
}

/// `p_ij = Tr((A_i (x) B_j) rho)`. A two-qubit `rho` measured by a Bob POVM
/// with a vacuum level is embedded first.
pub fn born_distribution(rho: &DensityMatrix, alice: &Povm, bob: &Povm) -> Result<JointDistribution> {
    let embedded;
    let rho = if rho.dims().len() == 2 && rho.dims()[1] + 1 == bob.dim() && rho.dims()[0] == alice.dim() {
        embedded = embed_state(rho)?;
        &embedded
    } else {
        rho
    };
    if rho.dims() != [alice.dim(), bob.dim()] {
        return Err(invalid(format!(
            "state dims {:?} incompatible with POVM dimensions ({}, {})",
            rho.dims(),
            alice.dim(),
            bob.dim()
        )));
    }
    // reduce rho against each A_i first: M_i = Tr_A((A_i (x) I) rho)
    let (da, db) = (alice.dim(), bob.dim());
    let mut probs = Vec::with_capacity(alice.len() * bob.len());
    for a in alice.elements() {
        let mut reduced = DMatrix::<C64>::zeros(db, db);
        for r in 0..da {
            for c in 0..da {
                let coeff = a.get(c, r);
                if coeff == C64::new(0.0, 0.0) {
                    continue;
                }
                reduced += rho.matrix().view((r * db, c * db), (db, db)).scale(1.0) * coeff;
            }
        }
        for b in bob.elements() {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..db {
                for c in 0..db {
                    acc += b.get(r, c) * reduced[(c, r)];
                }
            }
            probs.push(acc.re.max(0.0));
        }
    }
    JointDistribution::new(vec![alice.len(), bob.len()], probs)
}

/// Statistics of the protocol measurements (Bob's through `detectors`).
pub fn observed_distribution(
    rho: &DensityMatrix,
    spec: &ProtocolSpec,
    detectors: Option<&DetectorSpec>,
) -> Result<JointDistribution> {
    let bob = match detectors {
        Some(d) => noisy_povm(&spec.bob_povm, d)?,
        None => spec.bob_povm.clone(),
    };
    born_distribution(rho, &spec.alice_povm, &bob)
}

/// Statistics conditioned on both parties measuring the key basis; Bob's
/// vacuum outcome is kept when losses are modeled.
pub fn key_basis_distribution(
    rho: &DensityMatrix,
    spec: &ProtocolSpec,
    detectors: Option<&DetectorSpec>,
) -> Result<JointDistribution> {
    let key = spec.key_povm();
    let bob = match detectors {
        Some(d) => noisy_povm(&key, d)?,
        None => key.clone(),
    };
    born_distribution(rho, &key, &bob)
}
