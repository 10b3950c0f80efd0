//! Classical and measured-quantum information measures (bits).

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::Povm;
use crate::error::{invalid, Error, Result};
use crate::quantum::{partial_trace_matrix, DensityMatrix, HermitianMatrix};

const SUM_TOL: f64 = 1e-10;
const NEG_TOL: f64 = 1e-12;
/// Conditioning events below this probability are dropped.
pub const EVENT_CUTOFF: f64 = 1e-14;
/// Largest Eve alphabet accepted by [`intrinsic_information`].
pub const MAX_EVE_ALPHABET: usize = 6;

/// Nonnegative table over two or three outcome alphabets, stored row-major
/// (last axis fastest). JSON form: `{shape, probs}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionJson", into = "DistributionJson")]
pub struct JointDistribution {
    shape: Vec<usize>,
    probs: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistributionJson {
    pub shape: Vec<usize>,
    pub probs: Vec<f64>,
}

impl TryFrom<DistributionJson> for JointDistribution {
    type Error = Error;

    fn try_from(j: DistributionJson) -> Result<Self> {
        JointDistribution::new(j.shape, j.probs)
    }
}

impl From<JointDistribution> for DistributionJson {
    fn from(d: JointDistribution) -> Self {
        DistributionJson { shape: d.shape, probs: d.probs }
    }
}

impl JointDistribution {
    /// Entries in `[-1e-12, 0)` are clamped to zero.
    pub fn new(shape: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.len() > 3 || shape.contains(&0) {
            return Err(invalid(format!("unsupported distribution shape {shape:?}")));
        }
        let n: usize = shape.iter().product();
        if probs.len() != n {
            return Err(invalid(format!(
                "shape {shape:?} needs {n} probabilities, got {}",
                probs.len()
            )));
        }
        let probs = clamp_probabilities(&probs)?;
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > SUM_TOL {
            return Err(invalid(format!("probabilities sum to {s}, expected 1")));
        }
        Ok(Self { shape, probs })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        let flat = idx.iter().zip(&self.shape).fold(0, |acc, (&i, &n)| acc * n + i);
        self.probs[flat]
    }

    pub fn two_party_shape(&self) -> Result<(usize, usize)> {
        match self.shape[..] {
            [a, b] => Ok((a, b)),
            _ => Err(invalid(format!("expected a two-party distribution, got shape {:?}", self.shape))),
        }
    }

    pub fn three_party_shape(&self) -> Result<(usize, usize, usize)> {
        match self.shape[..] {
            [a, b, e] => Ok((a, b, e)),
            _ => Err(invalid(format!(
                "expected a three-party distribution, got shape {:?}",
                self.shape
            ))),
        }
    }

    /// Marginal over the listed axes (kept in ascending order).
    pub fn marginal(&self, keep: &[usize]) -> JointDistribution {
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        let shape: Vec<usize> = keep.iter().map(|&k| self.shape[k]).collect();
        let n: usize = shape.iter().product();
        let mut out = vec![0.0; n];
        let mut idx = vec![0; self.shape.len()];
        for (flat, &p) in self.probs.iter().enumerate() {
            let mut rem = flat;
            for k in (0..self.shape.len()).rev() {
                idx[k] = rem % self.shape[k];
                rem /= self.shape[k];
            }
            let o = keep.iter().fold(0, |acc, &k| acc * self.shape[k] + idx[k]);
            out[o] += p;
        }
        JointDistribution { shape, probs: out }
    }

    /// Pushes the third (Eve) axis through a classical channel.
    pub fn apply_channel(&self, channel: &Channel) -> Result<JointDistribution> {
        let (na, nb, ne) = self.three_party_shape()?;
        if channel.input_size != ne {
            return Err(invalid(format!(
                "channel input size {} does not match Eve alphabet {ne}",
                channel.input_size
            )));
        }
        let no = channel.output_size;
        let mut out = vec![0.0; na * nb * no];
        for ab in 0..na * nb {
            for e in 0..ne {
                let p = self.probs[ab * ne + e];
                if p == 0.0 {
                    continue;
                }
                for o in 0..no {
                    out[ab * no + o] += p * channel.get(e, o);
                }
            }
        }
        Ok(JointDistribution { shape: vec![na, nb, no], probs: out })
    }
}

fn clamp_probabilities(p: &[f64]) -> Result<Vec<f64>> {
    p.iter()
        .map(|&x| {
            if !x.is_finite() || x < -NEG_TOL {
                Err(invalid(format!("probability entry {x} is negative or not finite")))
            } else {
                Ok(x.max(0.0))
            }
        })
        .collect()
}

fn entropy_unchecked(p: impl IntoIterator<Item = f64>) -> f64 {
    p.into_iter().filter(|&x| x > 0.0).map(|x| -x * x.log2()).sum()
}

/// `H(X) = -sum p log2 p`, with `0 log 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    let p = clamp_probabilities(p)?;
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > SUM_TOL {
        return Err(invalid(format!("probabilities sum to {s}, expected 1")));
    }
    Ok(entropy_unchecked(p).max(0.0))
}

/// Binary entropy `h(x)`.
pub fn binary_entropy(x: f64) -> f64 {
    entropy_unchecked([x, 1.0 - x])
}

/// `I(A;B) = H(A) + H(B) - H(A,B)`.
pub fn mutual_information(p: &JointDistribution) -> Result<f64> {
    p.two_party_shape()?;
    Ok(mi_raw(p))
}

fn mi_raw(p: &JointDistribution) -> f64 {
    let ha = entropy_unchecked(p.marginal(&[0]).probs);
    let hb = entropy_unchecked(p.marginal(&[1]).probs);
    let hab = entropy_unchecked(p.probs.iter().copied());
    (ha + hb - hab).max(0.0)
}

/// `I(A;B|E) = sum_e P(e) [H(A|e) + H(B|e) - H(A,B|e)]`.
pub fn conditional_mutual_information(p: &JointDistribution) -> Result<f64> {
    let (na, nb, ne) = p.three_party_shape()?;
    Ok(cmi_raw(&p.probs, na, nb, ne))
}

fn cmi_raw(probs: &[f64], na: usize, nb: usize, ne: usize) -> f64 {
    let mut total = 0.0;
    let mut pa = vec![0.0; na];
    let mut pb = vec![0.0; nb];
    for e in 0..ne {
        let pe: f64 = (0..na * nb).map(|ab| probs[ab * ne + e]).sum();
        if pe < EVENT_CUTOFF {
            continue;
        }
        pa.iter_mut().for_each(|x| *x = 0.0);
        pb.iter_mut().for_each(|x| *x = 0.0);
        let mut hab = 0.0;
        for a in 0..na {
            for b in 0..nb {
                let q = probs[(a * nb + b) * ne + e] / pe;
                pa[a] += q;
                pb[b] += q;
                if q > 0.0 {
                    hab -= q * q.log2();
                }
            }
        }
        let ha = entropy_unchecked(pa.iter().copied());
        let hb = entropy_unchecked(pb.iter().copied());
        total += pe * (ha + hb - hab);
    }
    total.max(0.0)
}

/// Row-stochastic transition matrix `P(ebar | e)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub input_size: usize,
    pub output_size: usize,
    /// Row-major, one row per input symbol.
    pub transition: Vec<f64>,
}

impl Channel {
    pub fn new(input_size: usize, output_size: usize, transition: Vec<f64>) -> Result<Self> {
        if input_size == 0 || output_size == 0 || transition.len() != input_size * output_size {
            return Err(invalid("channel dimensions do not match its transition table"));
        }
        for r in 0..input_size {
            let row = &transition[r * output_size..(r + 1) * output_size];
            if row.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                return Err(invalid(format!("channel row {r} has entries outside [0, 1]")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > SUM_TOL {
                return Err(invalid(format!("channel row {r} sums to {s}")));
            }
        }
        Ok(Self { input_size, output_size, transition })
    }

    pub fn identity(n: usize) -> Self {
        let mut t = vec![0.0; n * n];
        (0..n).for_each(|k| t[k * n + k] = 1.0);
        Self { input_size: n, output_size: n, transition: t }
    }

    /// Maps every input to output 0.
    pub fn constant(n: usize) -> Self {
        let mut t = vec![0.0; n * n];
        (0..n).for_each(|k| t[k * n] = 1.0);
        Self { input_size: n, output_size: n, transition: t }
    }

    pub fn get(&self, input: usize, output: usize) -> f64 {
        self.transition[input * self.output_size + output]
    }
}

/// Effort settings for the intrinsic-information search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Random starting channels (identity and constant channels are always added).
    pub starts: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
    /// Grid resolution of the exhaustive 2x2 search.
    pub grid_steps: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { starts: 20, max_iterations: 200, tolerance: 1e-9, seed: 0x5eed, grid_steps: 200 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntrinsicResult {
    /// Smallest `I(A;B|Ebar)` found; an upper estimate of the infimum.
    pub value: f64,
    pub channel: Channel,
}

/// `min over channels E -> Ebar` of `I(A;B|Ebar)` with `|Ebar| = |E|`.
///
/// Multi-start projected gradient descent over row-stochastic matrices,
/// polished by golden-section moves of probability mass between pairs of
/// entries in a row. For a binary Eve the exhaustive grid is searched too.
pub fn intrinsic_information(p: &JointDistribution, cfg: &SearchConfig) -> Result<IntrinsicResult> {
    let (na, nb, ne) = p.three_party_shape()?;
    if ne > MAX_EVE_ALPHABET {
        return Err(Error::UnsupportedSize(format!(
            "Eve alphabet {ne} exceeds the supported maximum {MAX_EVE_ALPHABET}"
        )));
    }
    let obj = Objective { probs: &p.probs, na, nb, ne };

    let mut starts: Vec<Vec<f64>> = vec![
        Channel::identity(ne).transition,
        Channel::constant(ne).transition,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.starts {
        let mut t: Vec<f64> = (0..ne * ne).map(|_| -rng.random::<f64>().ln()).collect();
        for r in 0..ne {
            let s: f64 = t[r * ne..(r + 1) * ne].iter().sum();
            t[r * ne..(r + 1) * ne].iter_mut().for_each(|x| *x /= s);
        }
        starts.push(t);
    }
    if ne == 2 {
        starts.push(obj.grid_minimum(cfg.grid_steps.max(1)));
    }

    let results: Vec<(f64, Vec<f64>)> = starts
        .into_par_iter()
        .map(|t| obj.descend(t, cfg))
        .collect();
    let (value, best) = results
        .into_iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.0.total_cmp(&b.0).then(ia.cmp(ib)))
        .map(|(_, r)| r)
        .expect("at least two starts");
    Ok(IntrinsicResult { value, channel: Channel { input_size: ne, output_size: ne, transition: best } })
}

struct Objective<'a> {
    probs: &'a [f64],
    na: usize,
    nb: usize,
    ne: usize,
}

impl Objective<'_> {
    fn eval(&self, t: &[f64]) -> f64 {
        let (nab, ne) = (self.na * self.nb, self.ne);
        let mut out = vec![0.0; nab * ne];
        for ab in 0..nab {
            for e in 0..ne {
                let p = self.probs[ab * ne + e];
                if p == 0.0 {
                    continue;
                }
                for o in 0..ne {
                    out[ab * ne + o] += p * t[e * ne + o];
                }
            }
        }
        cmi_raw(&out, self.na, self.nb, ne)
    }

    fn grid_minimum(&self, steps: usize) -> Vec<f64> {
        let mut best = (f64::INFINITY, vec![1.0, 0.0, 0.0, 1.0]);
        for i in 0..=steps {
            let a = i as f64 / steps as f64;
            for j in 0..=steps {
                let b = j as f64 / steps as f64;
                let t = vec![a, 1.0 - a, b, 1.0 - b];
                let v = self.eval(&t);
                if v < best.0 {
                    best = (v, t);
                }
            }
        }
        best.1
    }

    fn descend(&self, mut t: Vec<f64>, cfg: &SearchConfig) -> (f64, Vec<f64>) {
        let ne = self.ne;
        let mut f = self.eval(&t);
        for _ in 0..cfg.max_iterations {
            let before = f;

            // projected gradient step with backtracking
            let g = self.gradient(&t);
            let mut step = 1.0;
            while step > 1e-10 {
                let mut trial: Vec<f64> = t.iter().zip(&g).map(|(x, gx)| x - step * gx).collect();
                for r in 0..ne {
                    project_simplex(&mut trial[r * ne..(r + 1) * ne]);
                }
                let ft = self.eval(&trial);
                if ft < f - 1e-14 {
                    t = trial;
                    f = ft;
                    break;
                }
                step *= 0.5;
            }

            // pairwise golden-section polish
            for r in 0..ne {
                for a in 0..ne {
                    for b in (a + 1)..ne {
                        f = self.golden_pair(&mut t, r, a, b, f);
                    }
                }
            }

            if before - f <= cfg.tolerance {
                break;
            }
        }
        (f, t)
    }

    fn gradient(&self, t: &[f64]) -> Vec<f64> {
        let h = 1e-7;
        let mut g = vec![0.0; t.len()];
        let mut work = t.to_vec();
        for k in 0..t.len() {
            work[k] = t[k] + h;
            let fp = self.eval(&work);
            work[k] = t[k] - h;
            let fm = self.eval(&work);
            work[k] = t[k];
            g[k] = (fp - fm) / (2.0 * h);
        }
        g
    }

    /// Moves mass `delta` from entry `b` to entry `a` of row `r`.
    fn golden_pair(&self, t: &mut [f64], r: usize, a: usize, b: usize, f0: f64) -> f64 {
        let ne = self.ne;
        let (ia, ib) = (r * ne + a, r * ne + b);
        let (xa, xb) = (t[ia], t[ib]);
        let (lo, hi) = (-xa, xb);
        if hi - lo < 1e-12 {
            return f0;
        }
        let mut work = t.to_vec();
        let mut at = |delta: f64| {
            work[ia] = (xa + delta).max(0.0);
            work[ib] = (xb - delta).max(0.0);
            self.eval(&work)
        };
        let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
        let (mut l, mut h) = (lo, hi);
        let mut c = h - phi * (h - l);
        let mut d = l + phi * (h - l);
        let mut fc = at(c);
        let mut fd = at(d);
        for _ in 0..40 {
            if fc < fd {
                h = d;
                d = c;
                fd = fc;
                c = h - phi * (h - l);
                fc = at(c);
            } else {
                l = c;
                c = d;
                fc = fd;
                d = l + phi * (h - l);
                fd = at(d);
            }
        }
        let mut best = (f0, 0.0);
        for delta in [lo, hi, 0.5 * (l + h)] {
            let v = at(delta);
            if v < best.0 - 1e-15 {
                best = (v, delta);
            }
        }
        if best.1 != 0.0 {
            t[ia] = (xa + best.1).max(0.0);
            t[ib] = (xb - best.1).max(0.0);
        }
        best.0
    }
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &mut [f64]) {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (k, &x) in u.iter().enumerate() {
        css += x;
        let t = (css - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter_mut().for_each(|x| *x = (*x - theta).max(0.0));
}

/// Classical-classical-quantum state: Eve's unnormalized conditional
/// operators `rho_E^{ij}`, stored row-major over `(i, j)`.
#[derive(Clone, Debug)]
pub struct CcqState {
    pub alice_outcomes: usize,
    pub bob_outcomes: usize,
    pub eve_blocks: Vec<HermitianMatrix>,
}

impl CcqState {
    pub fn block(&self, i: usize, j: usize) -> &HermitianMatrix {
        &self.eve_blocks[i * self.bob_outcomes + j]
    }

    pub fn eve_dim(&self) -> usize {
        self.eve_blocks[0].dim()
    }

    /// `p_ij = Tr rho_E^{ij}`.
    pub fn ab_distribution(&self) -> Result<JointDistribution> {
        JointDistribution::new(
            vec![self.alice_outcomes, self.bob_outcomes],
            self.eve_blocks.iter().map(|b| b.trace()).collect(),
        )
    }
}

/// `rho_E^{ij} = Tr_AB((A_i (x) B_j (x) I) rho_ABE)` for a state on `[dA, dB, dE]`.
pub fn ccq_state(rho_abe: &DensityMatrix, alice: &Povm, bob: &Povm) -> Result<CcqState> {
    let dims = rho_abe.dims();
    if dims.len() != 3 || dims[0] != alice.dim() || dims[1] != bob.dim() {
        return Err(invalid(format!(
            "state dims {dims:?} do not match POVM dimensions ({}, {}) plus an Eve factor",
            alice.dim(),
            bob.dim()
        )));
    }
    let de = dims[2];
    let id_e = DMatrix::<crate::C64>::identity(de, de);
    let mut blocks = Vec::with_capacity(alice.len() * bob.len());
    for a in alice.elements() {
        for b in bob.elements() {
            let op = a.matrix().kronecker(b.matrix()).kronecker(&id_e);
            let block = partial_trace_matrix(&(op * rho_abe.matrix()), dims, &[2])?;
            blocks.push(HermitianMatrix::symmetrized(block));
        }
    }
    let ccq = CcqState { alice_outcomes: alice.len(), bob_outcomes: bob.len(), eve_blocks: blocks };
    let total: f64 = ccq.eve_blocks.iter().map(|b| b.trace()).sum();
    debug_assert!((total - 1.0).abs() < 1e-9);
    Ok(ccq)
}

/// `sum_k p(e_k) I(A;B | e_k)` for Eve measuring `eve_povm` on her blocks;
/// equals the conditional mutual information of `p_ijk = Tr(E_k rho_E^{ij})`.
pub fn measured_quantum_intrinsic(ccq: &CcqState, eve_povm: &Povm) -> Result<f64> {
    conditional_mutual_information(&measured_distribution(ccq, eve_povm)?)
}

/// `p_ijk = Tr(E_k rho_E^{ij})`.
pub fn measured_distribution(ccq: &CcqState, eve_povm: &Povm) -> Result<JointDistribution> {
    if eve_povm.dim() != ccq.eve_dim() {
        return Err(invalid(format!(
            "Eve POVM acts on dimension {}, blocks have dimension {}",
            eve_povm.dim(),
            ccq.eve_dim()
        )));
    }
    let nk = eve_povm.len();
    let mut probs = Vec::with_capacity(ccq.eve_blocks.len() * nk);
    for block in &ccq.eve_blocks {
        for ek in eve_povm.elements() {
            probs.push(ek.inner(block).max(0.0));
        }
    }
    let s: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|x| *x /= s);
    JointDistribution::new(vec![ccq.alice_outcomes, ccq.bob_outcomes, nk], probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{bell_phi_plus, purify, random, tensor};

    fn dist(shape: &[usize], p: &[f64]) -> JointDistribution {
        JointDistribution::new(shape.to_vec(), p.to_vec()).unwrap()
    }

    #[test]
    fn shannon_examples() {
        assert_eq!(shannon_entropy(&[1.0, 0.0]).unwrap(), 0.0);
        assert!((shannon_entropy(&[0.5, 0.5]).unwrap() - 1.0).abs() < 1e-15);
        assert!((shannon_entropy(&[0.9, 0.1]).unwrap() - 0.468996).abs() < 5e-7);
        assert!(matches!(shannon_entropy(&[1.1, -0.1]), Err(Error::InvalidArgument(_))));
        // tiny negatives are noise
        assert!(shannon_entropy(&[1.0 + 1e-13, -1e-13]).is_ok());
    }

    #[test]
    fn mutual_information_examples() {
        assert!(mutual_information(&dist(&[2, 2], &[0.25; 4])).unwrap().abs() < 1e-15);
        assert!((mutual_information(&dist(&[2, 2], &[0.5, 0.0, 0.0, 0.5])).unwrap() - 1.0).abs() < 1e-15);
        for e in [0.01, 0.1, 0.3] {
            let p = dist(&[2, 2], &[(1.0 - e) / 2.0, e / 2.0, e / 2.0, (1.0 - e) / 2.0]);
            let want = 1.0 - binary_entropy(e);
            assert!((mutual_information(&p).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn cmi_examples() {
        // Ebar independent of (A,B)
        let pab = [0.4, 0.1, 0.1, 0.4];
        let pe = [0.3, 0.7];
        let probs: Vec<f64> = pab.iter().flat_map(|a| pe.iter().map(move |e| a * e)).collect();
        let p = dist(&[2, 2, 2], &probs);
        let iab = mutual_information(&p.marginal(&[0, 1])).unwrap();
        assert!((conditional_mutual_information(&p).unwrap() - iab).abs() < 1e-12);

        // Ebar = A = B
        let p = dist(&[2, 2, 2], &[0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5]);
        assert!(conditional_mutual_information(&p).unwrap().abs() < 1e-15);

        // independent uniform bits, Ebar = A xor B
        let mut probs = vec![0.0; 8];
        for a in 0..2 {
            for b in 0..2 {
                probs[(a * 2 + b) * 2 + (a ^ b)] = 0.25;
            }
        }
        assert!((conditional_mutual_information(&dist(&[2, 2, 2], &probs)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn intrinsic_examples() {
        let cfg = SearchConfig::default();
        // constant E
        let p = dist(&[2, 2, 2], &[0.4, 0.0, 0.1, 0.0, 0.1, 0.0, 0.4, 0.0]);
        let iab = mutual_information(&p.marginal(&[0, 1])).unwrap();
        let r = intrinsic_information(&p, &cfg).unwrap();
        assert!((r.value - iab).abs() < 1e-9);
        // E = A = B
        let p = dist(&[2, 2, 2], &[0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5]);
        assert!(intrinsic_information(&p, &cfg).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn intrinsic_rejects_large_alphabet() {
        let n = 2 * 2 * 7;
        let p = dist(&[2, 2, 7], &vec![1.0 / n as f64; n]);
        assert!(matches!(
            intrinsic_information(&p, &SearchConfig::default()),
            Err(Error::UnsupportedSize(_))
        ));
    }

    #[test]
    fn simplex_projection() {
        let mut v = [0.7, 0.7, -0.2];
        project_simplex(&mut v);
        assert!((v[0] - 0.5).abs() < 1e-15 && (v[1] - 0.5).abs() < 1e-15 && v[2] == 0.0);
    }

    #[test]
    fn ccq_of_product_state() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let rab = random::density(&mut rng, &[2, 2], 4);
        let re = random::density(&mut rng, &[3], 3);
        let full = DensityMatrix::new(tensor(&rab, &re), vec![2, 2, 3]).unwrap();
        let z = crate::protocol::basis_povm(crate::protocol::Basis::Z);
        let ccq = ccq_state(&full, &z, &z).unwrap();
        let pab = ccq.ab_distribution().unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let w = pab.get(&[i, j]);
                assert!(ccq.block(i, j).max_abs_diff(&re.scale(w)) < 1e-12);
            }
        }
        let x = crate::protocol::basis_povm(crate::protocol::Basis::X);
        let trivial = Povm::new(vec![HermitianMatrix::identity(3)], vec!["1".into()]).unwrap();
        let v = measured_quantum_intrinsic(&ccq, &trivial).unwrap();
        assert!((v - mutual_information(&pab).unwrap()).abs() < 1e-12);
        // blocks proportional to a fixed rho_E: Eve's POVM is irrelevant
        let u = random::unitary(&mut rng, 3);
        let eve = Povm::projective(&u, vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let v2 = measured_quantum_intrinsic(&ccq, &eve).unwrap();
        assert!((v2 - v).abs() < 1e-10);
        assert!(ccq_state(&full, &x, &crate::protocol::basis_povm(crate::protocol::Basis::Z)).is_ok());
    }

    #[test]
    fn ccq_of_bell_with_product_eve() {
        let psi = bell_phi_plus().density();
        let phi = HermitianMatrix::diagonal(&[0.0, 1.0]);
        let full = DensityMatrix::new(tensor(&psi, &phi), vec![2, 2, 2]).unwrap();
        let z = crate::protocol::basis_povm(crate::protocol::Basis::Z);
        let ccq = ccq_state(&full, &z, &z).unwrap();
        for b in &ccq.eve_blocks {
            let tr = b.trace();
            assert!(b.max_abs_diff(&phi.scale(tr)) < 1e-15);
        }
        let p = purify(&psi);
        assert_eq!(p.dims(), &[2, 2, 1]);
    }

    #[test]
    fn ccq_rejects_bad_dims() {
        let rho = DensityMatrix::maximally_mixed(vec![2, 2]);
        let z = crate::protocol::basis_povm(crate::protocol::Basis::Z);
        assert!(ccq_state(&rho, &z, &z).is_err());
    }

    #[test]
    fn distribution_json() {
        let p: JointDistribution = serde_json::from_str(r#"{"shape":[2,2],"probs":[0.5,0,0,0.5]}"#).unwrap();
        assert_eq!(p.get(&[1, 1]), 0.5);
        assert!(serde_json::from_str::<JointDistribution>(r#"{"shape":[2,2],"probs":[0.5,0,0,0.6]}"#).is_err());
    }
}
