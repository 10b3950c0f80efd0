//! Largest separable weight over the set of states compatible with observed
//! statistics.
//!
//! For every state `rho` in the class, `rho = sigma + omega` with `sigma`
//! separable and `omega` PSD; the weight is `Tr sigma`. Separability is
//! relaxed to PPT, which is exact when `dA * dB <= 6`.
//!
//! SDP variables are four real-embedded blocks `[rho, sigma, tau, omega]`
//! coupled linearly by `tau = sigma^{T_B}` and `omega = rho - sigma`, with
//! the measurement data imposed on `rho`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::detector::{Povm, PovmJson};
use crate::error::{invalid, Error, Result};
use crate::info::{DistributionJson, JointDistribution};
use crate::quantum::{partial_transpose, tensor, DensityMatrix, HermitianMatrix, MatrixJson};
use crate::sdp::{self, hermitian_functional, real_to_hermitian, Constraint, SdpOptions, SdpProblem, SdpStatus};
use crate::C64;

/// Weights at or above this count as "separable-compatible".
pub const SEPARABLE_THRESHOLD: f64 = 1.0 - 1e-7;

/// Largest `dA * dB` for which PPT is equivalent to separability.
pub const MAX_PPT_EXACT_DIM: usize = 6;

pub(crate) const RHO: usize = 0;
pub(crate) const SIGMA: usize = 1;
pub(crate) const TAU: usize = 2;
pub(crate) const OMEGA: usize = 3;

/// All states `rho` with `Tr((A_i (x) B_j) rho) = p_ij`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ClassJson", into = "ClassJson")]
pub struct EquivalenceClassSpec {
    alice_povm: Povm,
    bob_povm: Povm,
    observed: JointDistribution,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassJson {
    pub alice_povm: PovmJson,
    pub bob_povm: PovmJson,
    pub observed: DistributionJson,
}

impl TryFrom<ClassJson> for EquivalenceClassSpec {
    type Error = Error;

    fn try_from(j: ClassJson) -> Result<Self> {
        Self::new(j.alice_povm.try_into()?, j.bob_povm.try_into()?, j.observed.try_into()?)
    }
}

impl From<EquivalenceClassSpec> for ClassJson {
    fn from(s: EquivalenceClassSpec) -> Self {
        ClassJson {
            alice_povm: s.alice_povm.into(),
            bob_povm: s.bob_povm.into(),
            observed: s.observed.into(),
        }
    }
}

impl EquivalenceClassSpec {
    pub fn new(alice_povm: Povm, bob_povm: Povm, observed: JointDistribution) -> Result<Self> {
        let (na, nb) = observed.two_party_shape()?;
        if na != alice_povm.len() || nb != bob_povm.len() {
            return Err(invalid(format!(
                "observed table is {na}x{nb} but the POVMs have {} and {} outcomes",
                alice_povm.len(),
                bob_povm.len()
            )));
        }
        Ok(Self { alice_povm, bob_povm, observed })
    }

    pub fn alice_povm(&self) -> &Povm {
        &self.alice_povm
    }

    pub fn bob_povm(&self) -> &Povm {
        &self.bob_povm
    }

    pub fn observed(&self) -> &JointDistribution {
        &self.observed
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.alice_povm.dim(), self.bob_povm.dim())
    }
}

/// Orthonormal basis of the Hermitian `n x n` matrices under `Re Tr(A B)`.
pub(crate) fn hermitian_basis(n: usize) -> Vec<HermitianMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in i..n {
            if i == j {
                let mut m = DMatrix::zeros(n, n);
                m[(i, i)] = C64::new(1.0, 0.0);
                out.push(HermitianMatrix::from_exact(m));
            } else {
                let mut re = DMatrix::zeros(n, n);
                re[(i, j)] = C64::new(s, 0.0);
                re[(j, i)] = C64::new(s, 0.0);
                out.push(HermitianMatrix::from_exact(re));
                let mut im = DMatrix::zeros(n, n);
                im[(i, j)] = C64::new(0.0, -s);
                im[(j, i)] = C64::new(0.0, s);
                out.push(HermitianMatrix::from_exact(im));
            }
        }
    }
    out
}

fn on_blocks(entries: &[(usize, DMatrix<f64>)], rhs: f64) -> Constraint {
    let mut matrices = vec![None; 4];
    for (b, m) in entries {
        matrices[*b] = Some(m.clone());
    }
    Constraint { matrices, rhs }
}

/// Number of data rows (`#(i,j)` pairs plus the trace row) at the head of
/// the constraint list built by [`build_bsa_sdp`].
pub fn data_row_count(spec: &EquivalenceClassSpec) -> usize {
    spec.alice_povm.len() * spec.bob_povm.len() + 1
}

/// Minimizes `-Tr sigma`. Constraint order: data rows, trace, the
/// `omega = rho - sigma` coupling, then the `tau = sigma^{T_B}` coupling.
pub fn build_bsa_sdp(spec: &EquivalenceClassSpec) -> Result<SdpProblem> {
    let (da, db) = spec.dims();
    let n = da * db;
    if n > MAX_PPT_EXACT_DIM {
        return Err(Error::UnsupportedDimension(format!(
            "{da}x{db} exceeds the PPT-exact regime (dA*dB <= {MAX_PPT_EXACT_DIM})"
        )));
    }
    let dims = [da, db];
    let mut constraints = Vec::new();
    for (i, a) in spec.alice_povm.elements().iter().enumerate() {
        for (j, b) in spec.bob_povm.elements().iter().enumerate() {
            let f = hermitian_functional(&tensor(a, b));
            constraints.push(on_blocks(&[(RHO, f)], spec.observed.get(&[i, j])));
        }
    }
    let id = hermitian_functional(&HermitianMatrix::identity(n));
    constraints.push(on_blocks(&[(RHO, id.clone())], 1.0));
    let basis = hermitian_basis(n);
    for e in &basis {
        let f = hermitian_functional(e);
        constraints.push(on_blocks(&[(RHO, f.clone()), (SIGMA, -&f), (OMEGA, -&f)], 0.0));
    }
    for e in &basis {
        let f = hermitian_functional(e);
        let ft = hermitian_functional(&partial_transpose(e, &dims, 1)?);
        constraints.push(on_blocks(&[(TAU, f), (SIGMA, -ft)], 0.0));
    }
    let zero = DMatrix::zeros(2 * n, 2 * n);
    let objective = vec![zero.clone(), -id, zero.clone(), zero];
    SdpProblem::new(vec![2 * n; 4], objective, constraints)
}

#[derive(Clone, Debug)]
pub struct BsaResult {
    pub lambda_max: f64,
    pub rho_star: DensityMatrix,
    pub sigma_sep: Option<DensityMatrix>,
    pub rho_ent: Option<DensityMatrix>,
    /// Unnormalized separable part `lambda * sigma_sep`.
    pub sigma_tilde: HermitianMatrix,
    pub duality_gap: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BsaResultJson {
    pub lambda_max: f64,
    pub verdict: String,
    pub dims: Vec<usize>,
    pub rho_star: MatrixJson,
    pub sigma_sep: Option<MatrixJson>,
    pub rho_ent: Option<MatrixJson>,
    pub duality_gap: f64,
    pub iterations: usize,
}

impl BsaResult {
    pub fn is_separable_compatible(&self) -> bool {
        self.lambda_max >= SEPARABLE_THRESHOLD
    }

    pub fn verdict(&self) -> &'static str {
        if self.is_separable_compatible() {
            "separable-compatible; bound = 0"
        } else {
            "entangled-verified"
        }
    }

    /// `|| lambda sigma_sep + (1 - lambda) rho_ent - rho_star ||_F`, or the
    /// distance of `sigma_sep` to `rho_star` when there is no entangled part.
    pub fn decomposition_residual(&self) -> f64 {
        let l = self.lambda_max;
        let sep = match &self.sigma_sep {
            Some(s) => s.scale(l.min(1.0)),
            None => HermitianMatrix::zeros(self.rho_star.dim()),
        };
        let ent = match &self.rho_ent {
            Some(r) => r.scale(1.0 - l),
            None => HermitianMatrix::zeros(self.rho_star.dim()),
        };
        if self.rho_ent.is_none() {
            return self.sigma_tilde.distance(&self.rho_star);
        }
        sep.add(&ent).distance(&self.rho_star)
    }

    pub fn to_json(&self) -> BsaResultJson {
        BsaResultJson {
            lambda_max: self.lambda_max,
            verdict: self.verdict().to_string(),
            dims: self.rho_star.dims().to_vec(),
            rho_star: self.rho_star.hermitian().clone().into(),
            sigma_sep: self.sigma_sep.as_ref().map(|s| s.hermitian().clone().into()),
            rho_ent: self.rho_ent.as_ref().map(|s| s.hermitian().clone().into()),
            duality_gap: self.duality_gap,
            iterations: self.iterations,
        }
    }
}

/// Projects a numerically PSD operator onto the states: clips tiny negative
/// eigenvalues and renormalizes.
fn to_state(h: &HermitianMatrix, dims: Vec<usize>) -> Result<DensityMatrix> {
    let e = crate::quantum::eig_hermitian(h);
    let clipped = crate::quantum::Eigen {
        values: e.values.iter().map(|v| v.max(0.0)).collect(),
        vectors: e.vectors,
    }
    .reconstruct();
    DensityMatrix::normalized(clipped, dims)
}

pub fn max_separable_weight(spec: &EquivalenceClassSpec) -> Result<BsaResult> {
    max_separable_weight_with(spec, &SdpOptions::default())
}

pub fn max_separable_weight_with(spec: &EquivalenceClassSpec, opts: &SdpOptions) -> Result<BsaResult> {
    let problem = build_bsa_sdp(spec)?;
    let sol = sdp::solve(&problem, opts);
    match sol.status {
        SdpStatus::Optimal => {}
        SdpStatus::Infeasible => {
            return Err(Error::InconsistentStatistics(
                "no quantum state reproduces the observed statistics".into(),
            ))
        }
        SdpStatus::DualInfeasible | SdpStatus::MaxIter => {
            let best = -sol.primal_objective;
            return Err(Error::NumericalFailure {
                message: format!(
                    "separable-weight SDP stopped after {} iterations ({:?}, gap {:.3e}, residuals {:.3e}/{:.3e})",
                    sol.iterations, sol.status, sol.duality_gap, sol.primal_residual, sol.dual_residual
                ),
                best_bound: best.is_finite().then_some(best),
            });
        }
    }
    let (da, db) = spec.dims();
    let dims = vec![da, db];
    let rho = real_to_hermitian(&sol.x[RHO]);
    let sigma = real_to_hermitian(&sol.x[SIGMA]);
    let omega = real_to_hermitian(&sol.x[OMEGA]);
    let lambda = sigma.trace().clamp(0.0, 1.0);
    let rho_star = to_state(&rho, dims.clone())?;
    let sigma_sep = if lambda > 1e-12 { Some(to_state(&sigma, dims.clone())?) } else { None };
    let rho_ent = if lambda < SEPARABLE_THRESHOLD { Some(to_state(&omega, dims.clone())?) } else { None };
    Ok(BsaResult {
        lambda_max: lambda,
        rho_star,
        sigma_sep,
        rho_ent,
        sigma_tilde: sigma,
        duality_gap: sol.duality_gap,
        iterations: sol.iterations,
    })
}

/// True when the data could come from a separable state.
pub fn separability_verdict(spec: &EquivalenceClassSpec) -> Result<bool> {
    Ok(max_separable_weight(spec)?.is_separable_compatible())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{born_distribution, depolarized_bell_state, ChannelParam, ProtocolKind, ProtocolSpec};
    use crate::quantum::{bell_phi_plus, PureStateVector};

    fn class_for(kind: ProtocolKind, rho: &DensityMatrix) -> EquivalenceClassSpec {
        let spec = ProtocolSpec::equal_weights(kind);
        let p = born_distribution(rho, &spec.alice_povm, &spec.bob_povm).unwrap();
        EquivalenceClassSpec::new(spec.alice_povm, spec.bob_povm, p).unwrap()
    }

    fn bell(e: f64) -> DensityMatrix {
        depolarized_bell_state(ChannelParam::new(e).unwrap())
    }

    #[test]
    fn basis_is_orthonormal() {
        let b = hermitian_basis(3);
        assert_eq!(b.len(), 9);
        for (i, x) in b.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((x.inner(y) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn structure_of_the_two_qubit_problem() {
        let class = class_for(ProtocolKind::SixState, &bell(0.1));
        let p = build_bsa_sdp(&class).unwrap();
        assert_eq!(p.blocks, vec![8; 4]);
        assert_eq!(data_row_count(&class), 37);
        assert_eq!(p.num_constraints(), 37 + 2 * 16);
    }

    #[test]
    fn rejects_large_dimensions() {
        let q = crate::protocol::basis_povm(crate::protocol::Basis::Z);
        let a = crate::detector::apply_efficiency(&q, &crate::detector::DetectorSpec::uniform(0.0, 0.5).unwrap()).unwrap();
        let p = JointDistribution::new(vec![3, 3], vec![1.0 / 9.0; 9]).unwrap();
        let spec = EquivalenceClassSpec::new(a.clone(), a, p).unwrap();
        assert!(matches!(build_bsa_sdp(&spec), Err(Error::UnsupportedDimension(_))));
    }

    #[test]
    fn six_state_weight_is_three_e() {
        for e in [0.0, 0.05, 0.1, 0.2, 0.3] {
            let r = max_separable_weight(&class_for(ProtocolKind::SixState, &bell(e))).unwrap();
            assert!((r.lambda_max - 3.0 * e).abs() < 1e-6, "e={e}: {}", r.lambda_max);
            let ent = r.rho_ent.as_ref().unwrap();
            let phi = bell_phi_plus().density();
            assert!(ent.distance(&phi) < 1e-4, "e={e}");
            assert!(r.decomposition_residual() < 1e-7);
        }
    }

    #[test]
    fn four_state_weight_saturates_at_one_quarter() {
        // needs the definiteness backtracking in the step length
        for k in 0..=25 {
            let e = 0.25 + 0.01 * k as f64;
            let r = max_separable_weight(&class_for(ProtocolKind::FourState, &bell(e))).unwrap();
            assert!(r.is_separable_compatible(), "e = {e}: lambda = {}", r.lambda_max);
        }
        let r = max_separable_weight(&class_for(ProtocolKind::FourState, &bell(0.1))).unwrap();
        assert!((r.lambda_max - 0.4).abs() < 1e-6);
    }

    #[test]
    fn product_state_is_separable_compatible() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let amps = nalgebra::DVector::from_vec(vec![
            C64::new(s, 0.0),
            C64::new(s, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        ]);
        let psi = PureStateVector::new(amps, vec![2, 2]).unwrap();
        let r = max_separable_weight(&class_for(ProtocolKind::SixState, &psi.density())).unwrap();
        assert!(r.is_separable_compatible());
        assert!(r.rho_ent.is_none());
    }

    #[test]
    fn verdicts_on_depolarized_states() {
        assert!(separability_verdict(&class_for(ProtocolKind::SixState, &bell(0.4))).unwrap());
        assert!(!separability_verdict(&class_for(ProtocolKind::SixState, &bell(0.1))).unwrap());
        let spec = ProtocolSpec::equal_weights(ProtocolKind::FourState);
        let n = spec.alice_povm.len() * spec.bob_povm.len();
        let flat = JointDistribution::new(vec![4, 4], vec![1.0 / n as f64; n]).unwrap();
        let class = EquivalenceClassSpec::new(spec.alice_povm, spec.bob_povm, flat).unwrap();
        assert!(separability_verdict(&class).unwrap());
    }

    #[test]
    fn impossible_statistics_are_reported() {
        // all mass on (z0, z0) contradicts Alice's basis weight of 1/2
        let spec = ProtocolSpec::equal_weights(ProtocolKind::FourState);
        let mut probs = vec![0.0; 16];
        probs[0] = 1.0;
        let p = JointDistribution::new(vec![4, 4], probs).unwrap();
        let class = EquivalenceClassSpec::new(spec.alice_povm, spec.bob_povm, p).unwrap();
        assert!(matches!(max_separable_weight(&class), Err(Error::InconsistentStatistics(_))));
    }

    #[test]
    fn json_round_trip() {
        let class = class_for(ProtocolKind::FourState, &bell(0.1));
        let text = serde_json::to_string(&class).unwrap();
        let back: EquivalenceClassSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back.dims(), (2, 2));
        for (a, b) in back.observed().probs().iter().zip(class.observed().probs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
