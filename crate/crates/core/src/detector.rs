//! Trusted-device detector models.
//!
//! Only Bob's detectors are imperfect. Losses add a vacuum level to Bob's
//! space and a `"vac"` (no click) outcome; dark counts then act on the
//! extended space, so a dark count can turn a would-be vacuum event into a
//! click.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::info::JointDistribution;
use crate::quantum::{DensityMatrix, HermitianMatrix};

/// Label of the no-click outcome added by [`apply_efficiency`].
pub const VAC: &str = "vac";

const PSD_TOL: f64 = 1e-9;
const COMPLETENESS_TOL: f64 = 1e-9;

/// A finite list of positive operators summing to the identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PovmJson", into = "PovmJson")]
pub struct Povm {
    elements: Vec<HermitianMatrix>,
    labels: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PovmJson {
    pub labels: Vec<String>,
    pub elements: Vec<HermitianMatrix>,
}

impl TryFrom<PovmJson> for Povm {
    type Error = Error;

    fn try_from(j: PovmJson) -> Result<Self> {
        Povm::new(j.elements, j.labels)
    }
}

impl From<Povm> for PovmJson {
    fn from(p: Povm) -> Self {
        PovmJson { labels: p.labels, elements: p.elements }
    }
}

impl Povm {
    pub fn new(elements: Vec<HermitianMatrix>, labels: Vec<String>) -> Result<Self> {
        if elements.is_empty() {
            return Err(invalid("POVM needs at least one element"));
        }
        if elements.len() != labels.len() {
            return Err(invalid(format!(
                "POVM has {} elements but {} labels",
                elements.len(),
                labels.len()
            )));
        }
        let dim = elements[0].dim();
        if elements.iter().any(|e| e.dim() != dim) {
            return Err(invalid("POVM elements have different dimensions"));
        }
        for (e, l) in elements.iter().zip(&labels) {
            let min = e.min_eigenvalue();
            if min < -PSD_TOL {
                return Err(invalid(format!(
                    "POVM element {l:?} is not positive (min eigenvalue {min:.3e})"
                )));
            }
        }
        let sum = elements
            .iter()
            .skip(1)
            .fold(elements[0].clone(), |acc, e| acc.add(e));
        let dev = sum.max_abs_diff(&HermitianMatrix::identity(dim));
        if dev > COMPLETENESS_TOL {
            return Err(invalid(format!(
                "POVM elements do not sum to the identity (deviation {dev:.3e})"
            )));
        }
        Ok(Self { elements, labels })
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[HermitianMatrix] {
        &self.elements
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn has_vacuum(&self) -> bool {
        self.labels.iter().any(|l| l == VAC)
    }

    /// Indices of the outcomes that are detector clicks.
    pub fn click_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.labels[k] != VAC).collect()
    }

    /// Sum of all elements; the identity up to rounding.
    pub fn completeness(&self) -> HermitianMatrix {
        self.elements
            .iter()
            .skip(1)
            .fold(self.elements[0].clone(), |acc, e| acc.add(e))
    }

    /// Born-rule outcome probabilities on a single-party state.
    pub fn probabilities(&self, rho: &HermitianMatrix) -> Vec<f64> {
        self.elements.iter().map(|e| e.inner(rho)).collect()
    }

    /// Projective measurement onto an orthonormal basis given as columns.
    pub fn projective(vectors: &nalgebra::DMatrix<crate::C64>, labels: Vec<String>) -> Result<Self> {
        let elements = (0..vectors.ncols())
            .map(|k| HermitianMatrix::projector(&vectors.column(k).into_owned()))
            .collect();
        Povm::new(elements, labels)
    }
}

/// Dark counts and efficiencies of Bob's detectors.
///
/// `dark_split` lists the per-click-outcome dark count probabilities; when
/// absent, `dark_total` is split equally over the click outcomes of the POVM
/// it is applied to. `efficiencies` holds one entry per click outcome, or a
/// single entry shared by all of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec {
    pub dark_total: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dark_split: Option<Vec<f64>>,
    #[serde(default = "unit_efficiency")]
    pub efficiencies: Vec<f64>,
}

fn unit_efficiency() -> Vec<f64> {
    vec![1.0]
}

impl Default for DetectorSpec {
    fn default() -> Self {
        Self::ideal()
    }
}

impl DetectorSpec {
    pub fn ideal() -> Self {
        Self { dark_total: 0.0, dark_split: None, efficiencies: vec![1.0] }
    }

    /// Every detector shares dark count `d` (split equally) and efficiency `eta`.
    pub fn uniform(d: f64, eta: f64) -> Result<Self> {
        let spec = Self { dark_total: d, dark_split: None, efficiencies: vec![eta] };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.dark_total) {
            return Err(invalid(format!(
                "dark count probability must lie in [0, 1), got {}",
                self.dark_total
            )));
        }
        if let Some(split) = &self.dark_split {
            if split.iter().any(|&x| x < 0.0) {
                return Err(invalid("dark count split entries must be nonnegative"));
            }
            let s: f64 = split.iter().sum();
            if (s - self.dark_total).abs() > 1e-12 {
                return Err(invalid(format!(
                    "dark count split sums to {s}, expected {}",
                    self.dark_total
                )));
            }
        }
        if self.efficiencies.is_empty() {
            return Err(invalid("efficiency list is empty"));
        }
        if let Some(&eta) = self.efficiencies.iter().find(|&&x| !(x > 0.0 && x <= 1.0)) {
            return Err(invalid(format!("efficiency must lie in (0, 1], got {eta}")));
        }
        Ok(())
    }

    /// True when some detector loses signals, i.e. a vacuum outcome is needed.
    pub fn has_losses(&self) -> bool {
        self.efficiencies.iter().any(|&x| x < 1.0)
    }

    pub fn is_ideal(&self) -> bool {
        self.dark_total == 0.0 && !self.has_losses()
    }

    /// Per-click dark count probabilities for `n_clicks` outcomes.
    pub fn resolved_dark_split(&self, n_clicks: usize) -> Result<Vec<f64>> {
        match &self.dark_split {
            Some(split) if split.len() == n_clicks => Ok(split.clone()),
            Some(split) => Err(invalid(format!(
                "dark count split has {} entries, POVM has {n_clicks} click outcomes",
                split.len()
            ))),
            None if n_clicks == 0 => Ok(vec![]),
            None => Ok(vec![self.dark_total / n_clicks as f64; n_clicks]),
        }
    }

    pub fn resolved_efficiencies(&self, n_clicks: usize) -> Result<Vec<f64>> {
        match self.efficiencies.len() {
            1 => Ok(vec![self.efficiencies[0]; n_clicks]),
            n if n == n_clicks => Ok(self.efficiencies.clone()),
            n => Err(invalid(format!(
                "efficiency list has {n} entries, POVM has {n_clicks} click outcomes"
            ))),
        }
    }

    /// Dark counts per outcome of `p`, zero on the vacuum outcome.
    fn per_outcome_dark(&self, p: &Povm) -> Result<Vec<f64>> {
        let clicks = p.click_indices();
        let split = self.resolved_dark_split(clicks.len())?;
        let mut out = vec![0.0; p.len()];
        for (k, d) in clicks.into_iter().zip(split) {
            out[k] = d;
        }
        Ok(out)
    }
}

/// `B_j -> (1 - d) B_j + d_j I` on every click outcome; the vacuum outcome
/// (if any) becomes `(1 - d) B_vac`.
pub fn apply_dark_counts(p: &Povm, spec: &DetectorSpec) -> Result<Povm> {
    spec.validate()?;
    let d = spec.dark_total;
    if d == 0.0 {
        return Ok(p.clone());
    }
    let per = spec.per_outcome_dark(p)?;
    let id = HermitianMatrix::identity(p.dim());
    let elements = p
        .elements
        .iter()
        .zip(&per)
        .map(|(e, &dj)| e.scale(1.0 - d).add(&id.scale(dj)))
        .collect();
    Povm::new(elements, p.labels.clone())
}

/// Click elements become `eta_j B_j` (zero on the vacuum level) and a new
/// `"vac"` outcome `sum_j (1 - eta_j) B_j + |vac><vac|` is appended.
pub fn apply_efficiency(p: &Povm, spec: &DetectorSpec) -> Result<Povm> {
    spec.validate()?;
    if p.has_vacuum() {
        return Err(invalid("POVM already contains a vacuum outcome"));
    }
    let etas = spec.resolved_efficiencies(p.len())?;
    let n = p.dim();
    let mut elements: Vec<HermitianMatrix> = p
        .elements
        .iter()
        .zip(&etas)
        .map(|(e, &eta)| e.scale(eta).pad_to(n + 1))
        .collect();
    let mut vac = p
        .elements
        .iter()
        .zip(&etas)
        .fold(HermitianMatrix::zeros(n), |acc, (e, &eta)| acc.add(&e.scale(1.0 - eta)))
        .pad_to(n + 1);
    let mut vac_level = vec![0.0; n + 1];
    vac_level[n] = 1.0;
    vac = vac.add(&HermitianMatrix::diagonal(&vac_level));
    elements.push(vac);
    let mut labels = p.labels.clone();
    labels.push(VAC.to_string());
    Povm::new(elements, labels)
}

/// Efficiency first (when lossy), then dark counts.
pub fn noisy_povm(p: &Povm, spec: &DetectorSpec) -> Result<Povm> {
    let lossy = if spec.has_losses() { apply_efficiency(p, spec)? } else { p.clone() };
    apply_dark_counts(&lossy, spec)
}

/// Forward map on statistics: `p~_ij = (1 - d) p_ij + d_j p_i`, with Bob's
/// outcomes on the second axis.
pub fn apply_dark_counts_to_distribution(
    p: &JointDistribution,
    dark: &[f64],
) -> Result<JointDistribution> {
    let (na, nb) = p.two_party_shape()?;
    if dark.len() != nb {
        return Err(invalid(format!(
            "dark count vector has {} entries, distribution has {nb} Bob outcomes",
            dark.len()
        )));
    }
    let d: f64 = dark.iter().sum();
    let mut out = vec![0.0; na * nb];
    for i in 0..na {
        let pi: f64 = (0..nb).map(|j| p.get(&[i, j])).sum();
        for j in 0..nb {
            out[i * nb + j] = (1.0 - d) * p.get(&[i, j]) + dark[j] * pi;
        }
    }
    JointDistribution::new(vec![na, nb], out)
}

/// Trusted-device inversion: `p_ij = (p~_ij - d_j p_i) / (1 - d)` with
/// `p_i = sum_j p~_ij`. `dark` lists the dark count of each Bob outcome
/// (zero for the vacuum outcome).
pub fn invert_dark_counts_with(
    observed: &JointDistribution,
    dark: &[f64],
) -> Result<JointDistribution> {
    let (na, nb) = observed.two_party_shape()?;
    if dark.len() != nb {
        return Err(invalid(format!(
            "dark count vector has {} entries, distribution has {nb} Bob outcomes",
            dark.len()
        )));
    }
    let d: f64 = dark.iter().sum();
    if !(0.0..1.0).contains(&d) {
        return Err(invalid(format!("total dark count {d} outside [0, 1)")));
    }
    let mut out = vec![0.0; na * nb];
    for i in 0..na {
        let pi: f64 = (0..nb).map(|j| observed.get(&[i, j])).sum();
        for j in 0..nb {
            let v = (observed.get(&[i, j]) - dark[j] * pi) / (1.0 - d);
            if v < -1e-10 {
                return Err(Error::InconsistentStatistics(format!(
                    "entry ({i},{j}) becomes {v:.3e} after removing dark counts"
                )));
            }
            out[i * nb + j] = v.max(0.0);
        }
    }
    JointDistribution::new(vec![na, nb], out)
}

/// [`invert_dark_counts_with`] using the equal-split rule over Bob's click
/// outcomes, where outcome labels come from `bob`.
pub fn invert_dark_counts(
    observed: &JointDistribution,
    spec: &DetectorSpec,
    bob: &Povm,
) -> Result<JointDistribution> {
    spec.validate()?;
    invert_dark_counts_with(observed, &spec.per_outcome_dark(bob)?)
}

/// Per-outcome dark count vector for `bob` (zero on vacuum).
pub fn dark_vector(spec: &DetectorSpec, bob: &Povm) -> Result<Vec<f64>> {
    spec.per_outcome_dark(bob)
}

/// Adds a vacuum level to Bob's factor (the last subsystem); new entries are zero.
pub fn embed_state(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let dims = rho.dims();
    let (&db, rest) = dims.split_last().expect("non-empty dims");
    let da: usize = rest.iter().product();
    let mut iso = nalgebra::DMatrix::<crate::C64>::zeros(db + 1, db);
    for k in 0..db {
        iso[(k, k)] = crate::C64::new(1.0, 0.0);
    }
    let full_iso = nalgebra::DMatrix::<crate::C64>::identity(da, da).kronecker(&iso);
    let m = &full_iso * rho.matrix() * full_iso.adjoint();
    let mut new_dims = rest.to_vec();
    new_dims.push(db + 1);
    DensityMatrix::new(HermitianMatrix::symmetrized(m), new_dims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{bell_phi_plus, eig_hermitian, random};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn z_basis() -> Povm {
        Povm::new(
            vec![HermitianMatrix::diagonal(&[1.0, 0.0]), HermitianMatrix::diagonal(&[0.0, 1.0])],
            vec!["z0".into(), "z1".into()],
        )
        .unwrap()
    }

    fn random_distribution(rng: &mut ChaCha8Rng, na: usize, nb: usize) -> JointDistribution {
        let raw: Vec<f64> = (0..na * nb).map(|_| rng.random::<f64>() + 1e-3).collect();
        let s: f64 = raw.iter().sum();
        JointDistribution::new(vec![na, nb], raw.iter().map(|x| x / s).collect()).unwrap()
    }

    #[test]
    fn povm_rejects_incomplete_and_negative() {
        let bad = Povm::new(vec![HermitianMatrix::diagonal(&[1.0, 0.0])], vec!["a".into()]);
        assert!(bad.is_err());
        let neg = Povm::new(
            vec![HermitianMatrix::diagonal(&[1.1, 1.0]), HermitianMatrix::diagonal(&[-0.1, 0.0])],
            vec!["a".into(), "b".into()],
        );
        assert!(neg.is_err());
    }

    #[test]
    fn zero_dark_counts_is_identity() {
        let p = z_basis();
        assert_eq!(apply_dark_counts(&p, &DetectorSpec::ideal()).unwrap(), p);
    }

    #[test]
    fn dark_counts_on_z_basis() {
        let spec = DetectorSpec::uniform(1e-6, 1.0).unwrap();
        let noisy = apply_dark_counts(&z_basis(), &spec).unwrap();
        let want0 = HermitianMatrix::diagonal(&[1.0 - 1e-6 + 5e-7, 5e-7]);
        let want1 = HermitianMatrix::diagonal(&[5e-7, 1.0 - 1e-6 + 5e-7]);
        assert!(noisy.elements()[0].max_abs_diff(&want0) < 1e-16);
        assert!(noisy.elements()[1].max_abs_diff(&want1) < 1e-16);
        let dev = noisy.completeness().max_abs_diff(&HermitianMatrix::identity(2));
        assert!(dev < 1e-12);
    }

    #[test]
    fn dark_count_out_of_range() {
        let spec = DetectorSpec { dark_total: 1.0, dark_split: None, efficiencies: vec![1.0] };
        assert!(matches!(apply_dark_counts(&z_basis(), &spec), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn efficiency_examples() {
        let full = apply_efficiency(&z_basis(), &DetectorSpec::ideal()).unwrap();
        assert_eq!(full.dim(), 3);
        assert_eq!(full.labels().last().unwrap(), VAC);
        assert!(full.elements()[0].max_abs_diff(&HermitianMatrix::diagonal(&[1.0, 0.0, 0.0])) < 1e-15);
        assert!(full.elements()[2].max_abs_diff(&HermitianMatrix::diagonal(&[0.0, 0.0, 1.0])) < 1e-15);

        let lossy = apply_efficiency(&z_basis(), &DetectorSpec::uniform(0.0, 0.15).unwrap()).unwrap();
        assert!(lossy.elements()[0].max_abs_diff(&HermitianMatrix::diagonal(&[0.15, 0.0, 0.0])) < 1e-15);
        assert!(lossy.elements()[1].max_abs_diff(&HermitianMatrix::diagonal(&[0.0, 0.15, 0.0])) < 1e-15);
        assert!(lossy.elements()[2].max_abs_diff(&HermitianMatrix::diagonal(&[0.85, 0.85, 1.0])) < 1e-15);

        assert!(apply_efficiency(&lossy, &DetectorSpec::ideal()).is_err());
        let bad = DetectorSpec { dark_total: 0.0, dark_split: None, efficiencies: vec![1.5] };
        assert!(apply_efficiency(&z_basis(), &bad).is_err());
        let bad = DetectorSpec { dark_total: 0.0, dark_split: None, efficiencies: vec![0.0] };
        assert!(apply_efficiency(&z_basis(), &bad).is_err());
    }

    #[test]
    fn composed_transforms_stay_complete_and_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let u = random::unitary(&mut rng, 2);
            let p = Povm::projective(&u, vec!["a".into(), "b".into()]).unwrap();
            let spec = DetectorSpec {
                dark_total: 1e-3 * rng.random::<f64>(),
                dark_split: None,
                efficiencies: vec![0.01 + 0.99 * rng.random::<f64>(), 0.01 + 0.99 * rng.random::<f64>()],
            };
            let out = noisy_povm(&p, &spec).unwrap();
            let dev = out.completeness().max_abs_diff(&HermitianMatrix::identity(3));
            assert!(dev < 1e-12);
            for e in out.elements() {
                assert!(*eig_hermitian(e).values.last().unwrap() >= -1e-10);
            }
        }
    }

    #[test]
    fn inversion_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..100 {
            let p = random_distribution(&mut rng, 4, 3);
            let d = 1e-6;
            let dark = vec![d / 2.0, d / 2.0, 0.0];
            let noisy = apply_dark_counts_to_distribution(&p, &dark).unwrap();
            let back = invert_dark_counts_with(&noisy, &dark).unwrap();
            let err = p.probs().iter().zip(back.probs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-12);
        }
    }

    #[test]
    fn zero_dark_inversion_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let p = random_distribution(&mut rng, 2, 2);
        let back = invert_dark_counts(&p, &DetectorSpec::ideal(), &z_basis()).unwrap();
        assert_eq!(back.probs(), p.probs());
    }

    #[test]
    fn pure_noise_recovers_original() {
        // p_ij = p_i * delta_{j0}; observed adds the dark counts of both clicks
        let p = JointDistribution::new(vec![2, 2], vec![0.3, 0.0, 0.7, 0.0]).unwrap();
        let d = 1e-3;
        let dark = [d / 2.0, d / 2.0];
        let observed = JointDistribution::new(
            vec![2, 2],
            vec![0.3 * (1.0 - d) + 0.3 * d / 2.0, 0.3 * d / 2.0, 0.7 * (1.0 - d) + 0.7 * d / 2.0, 0.7 * d / 2.0],
        )
        .unwrap();
        let back = invert_dark_counts_with(&observed, &dark).unwrap();
        for (a, b) in back.probs().iter().zip(p.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn inversion_detects_inconsistent_data() {
        let observed = JointDistribution::new(vec![1, 2], vec![1.0, 0.0]).unwrap();
        let r = invert_dark_counts_with(&observed, &[0.0, 0.1]);
        assert!(matches!(r, Err(Error::InconsistentStatistics(_))));
    }

    #[test]
    fn embed_examples() {
        let mixed = DensityMatrix::maximally_mixed(vec![2]);
        let e = embed_state(&mixed).unwrap();
        assert_eq!(e.dims(), &[3]);
        assert!(e.max_abs_diff(&HermitianMatrix::diagonal(&[0.5, 0.5, 0.0])) < 1e-15);

        let bell = bell_phi_plus().density();
        let e = embed_state(&bell).unwrap();
        assert_eq!(e.dims(), &[2, 3]);
        let idx = [0usize, 1, 3, 4];
        for (r, &rr) in idx.iter().enumerate() {
            for (c, &cc) in idx.iter().enumerate() {
                assert_eq!(e.get(rr, cc), bell.get(r, c));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let r = random::density(&mut rng, &[2, 2], 3);
        assert!((embed_state(&r).unwrap().trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn detector_spec_json() {
        let spec: DetectorSpec = serde_json::from_str(r#"{"dark_total":1e-6,"efficiencies":[0.15]}"#).unwrap();
        assert_eq!(spec.dark_split, None);
        assert_eq!(spec.resolved_dark_split(4).unwrap(), vec![2.5e-7; 4]);
        let bad: DetectorSpec =
            serde_json::from_str(r#"{"dark_total":1e-6,"dark_split":[1e-6,1e-6],"efficiencies":[1]}"#).unwrap();
        assert!(bad.validate().is_err());
    }
}
