//! Finite-dimensional quantum objects.
//!
//! Composite systems use the Kronecker convention: the left factor (Alice)
//! is the slowest-varying index. All entropies are in bits.

use std::fmt;
use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::C64;

/// Largest tolerated deviation from Hermitian symmetry, relative to the
/// largest entry (floored at 1).
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues below this count as zero in rank and entropy computations.
pub const EIG_CUTOFF: f64 = 1e-12;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest eigenvalue a density matrix may have.
pub const PSD_TOL: f64 = 1e-9;

/// A complex square matrix equal to its conjugate transpose.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct HermitianMatrix {
    m: DMatrix<C64>,
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermitianMatrix{}", self.m)
    }
}

impl HermitianMatrix {
    /// Validates Hermiticity and absorbs floating-point drift by replacing
    /// `m` with `(m + m^dagger) / 2`.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(invalid(format!(
                "matrix must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        let scale = m.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
        let mut asym = 0.0_f64;
        for r in 0..n {
            for c in r..n {
                asym = asym.max((m[(r, c)] - m[(c, r)].conj()).norm());
            }
        }
        if asym > HERMITIAN_TOL * scale {
            return Err(invalid(format!(
                "matrix is not Hermitian (asymmetry {asym:.3e})"
            )));
        }
        Ok(Self::symmetrized(m))
    }

    pub(crate) fn symmetrized(m: DMatrix<C64>) -> Self {
        let h = (&m + m.adjoint()).unscale(2.0);
        Self { m: h }
    }

    /// Wraps a matrix the caller guarantees to be exactly Hermitian.
    pub(crate) fn from_exact(m: DMatrix<C64>) -> Self {
        debug_assert!(m.is_square());
        Self { m }
    }

    pub fn from_real(m: DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(|x| C64::new(x, 0.0)))
    }

    pub fn identity(n: usize) -> Self {
        Self { m: DMatrix::identity(n, n) }
    }

    pub fn zeros(n: usize) -> Self {
        Self { m: DMatrix::zeros(n, n) }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d = DVector::from_iterator(values.len(), values.iter().map(|&x| C64::new(x, 0.0)));
        Self { m: DMatrix::from_diagonal(&d) }
    }

    /// `|v><v|` (not normalized).
    pub fn projector(v: &DVector<C64>) -> Self {
        Self::symmetrized(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.m[(r, c)]
    }

    pub fn trace(&self) -> f64 {
        self.m.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { m: self.m.scale(s) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { m: &self.m + &other.m }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { m: &self.m - &other.m }
    }

    pub fn transpose(&self) -> Self {
        Self { m: self.m.transpose() }
    }

    /// `U M U^dagger`.
    pub fn conjugate_by(&self, u: &DMatrix<C64>) -> Self {
        Self::symmetrized(u * &self.m * u.adjoint())
    }

    /// `Tr(self * other)`; real for Hermitian arguments.
    pub fn inner(&self, other: &Self) -> f64 {
        let mut acc = 0.0;
        for (a, b) in self.m.iter().zip(other.m.transpose().iter()) {
            acc += (a * b).re;
        }
        acc
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.norm()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (&self.m - &other.m).norm()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.m - &other.m).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Embeds `self` as the leading block of a larger zero matrix.
    pub fn pad_to(&self, n: usize) -> Self {
        assert!(n >= self.dim());
        let mut m = DMatrix::zeros(n, n);
        m.view_mut((0, 0), (self.dim(), self.dim())).copy_from(&self.m);
        Self { m }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let vals = eig_hermitian(self).values;
        *vals.last().expect("non-empty matrix")
    }

    pub fn purity(&self) -> f64 {
        self.inner(self)
    }
}

/// Wire format `{dim, re, im}` with row-major entries.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl TryFrom<MatrixJson> for HermitianMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        let n = j.dim;
        if n == 0 || j.re.len() != n * n || j.im.len() != n * n {
            return Err(invalid(format!(
                "matrix json: expected {} entries in re and im for dim {n}",
                n * n
            )));
        }
        let m = DMatrix::from_fn(n, n, |r, c| C64::new(j.re[r * n + c], j.im[r * n + c]));
        HermitianMatrix::new(m)
    }
}

impl From<HermitianMatrix> for MatrixJson {
    fn from(h: HermitianMatrix) -> Self {
        let n = h.dim();
        let mut re = Vec::with_capacity(n * n);
        let mut im = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                re.push(h.m[(r, c)].re);
                im.push(h.m[(r, c)].im);
            }
        }
        MatrixJson { dim: n, re, im }
    }
}

/// A unit-trace positive semidefinite matrix on a composite space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    h: HermitianMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    pub fn new(h: HermitianMatrix, dims: Vec<usize>) -> Result<Self> {
        check_dims(h.dim(), &dims)?;
        let tr = h.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(invalid(format!("density matrix trace is {tr}, expected 1")));
        }
        let min = h.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(invalid(format!(
                "density matrix has negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { h, dims })
    }

    /// Rescales a nonzero PSD operator to unit trace.
    pub fn normalized(h: HermitianMatrix, dims: Vec<usize>) -> Result<Self> {
        let tr = h.trace();
        if tr <= 0.0 {
            return Err(invalid("cannot normalize an operator with non-positive trace"));
        }
        Self::new(h.scale(1.0 / tr), dims)
    }

    pub fn from_pure(psi: &PureStateVector) -> Self {
        Self {
            h: HermitianMatrix::projector(psi.amplitudes()),
            dims: psi.dims().to_vec(),
        }
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let n: usize = dims.iter().product();
        Self {
            h: HermitianMatrix::identity(n).scale(1.0 / n as f64),
            dims,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.h
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.h
    }
}

impl Deref for DensityMatrix {
    type Target = HermitianMatrix;

    fn deref(&self) -> &HermitianMatrix {
        &self.h
    }
}

/// A normalized state vector on a composite space.
#[derive(Clone, Debug, PartialEq)]
pub struct PureStateVector {
    amps: DVector<C64>,
    dims: Vec<usize>,
}

impl PureStateVector {
    pub fn new(amps: DVector<C64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(amps.len(), &dims)?;
        let n2 = amps.norm_squared();
        if (n2 - 1.0).abs() > TRACE_TOL {
            return Err(invalid(format!("state vector has squared norm {n2}")));
        }
        Ok(Self { amps, dims })
    }

    pub fn normalized(amps: DVector<C64>, dims: Vec<usize>) -> Result<Self> {
        let n = amps.norm();
        if n == 0.0 {
            return Err(invalid("zero vector cannot be normalized"));
        }
        Self::new(amps.unscale(n), dims)
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

/// `(|00> + |11>) / sqrt(2)`.
pub fn bell_phi_plus() -> PureStateVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let amps = DVector::from_vec(vec![
        C64::new(s, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(s, 0.0),
    ]);
    PureStateVector { amps, dims: vec![2, 2] }
}

pub fn pauli_x() -> HermitianMatrix {
    HermitianMatrix::from_real(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap()
}

pub fn pauli_y() -> HermitianMatrix {
    let i = C64::new(0.0, 1.0);
    let z = C64::new(0.0, 0.0);
    HermitianMatrix::from_exact(DMatrix::from_row_slice(2, 2, &[z, -i, i, z]))
}

pub fn pauli_z() -> HermitianMatrix {
    HermitianMatrix::diagonal(&[1.0, -1.0])
}

fn check_dims(total: usize, dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(invalid("subsystem dimensions must be positive"));
    }
    let prod: usize = dims.iter().product();
    if prod != total {
        return Err(invalid(format!(
            "subsystem dimensions {dims:?} multiply to {prod}, matrix dimension is {total}"
        )));
    }
    Ok(())
}

/// Kronecker product, left factor slowest.
pub fn tensor(a: &HermitianMatrix, b: &HermitianMatrix) -> HermitianMatrix {
    HermitianMatrix::from_exact(a.m.kronecker(&b.m))
}

pub fn tensor_all(factors: &[&HermitianMatrix]) -> HermitianMatrix {
    let mut it = factors.iter();
    let first = (*it.next().expect("at least one factor")).clone();
    it.fold(first, |acc, f| tensor(&acc, f))
}

fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
}

fn compose(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&d, &n)| acc * n + d)
}

/// Traces out every subsystem except `keep`.
pub fn partial_trace(m: &HermitianMatrix, dims: &[usize], keep: usize) -> Result<HermitianMatrix> {
    partial_trace_keep(m, dims, &[keep])
}

/// Traces out every subsystem not listed in `keep`; kept factors stay in
/// their original order.
pub fn partial_trace_keep(
    m: &HermitianMatrix,
    dims: &[usize],
    keep: &[usize],
) -> Result<HermitianMatrix> {
    Ok(HermitianMatrix::symmetrized(partial_trace_matrix(m.matrix(), dims, keep)?))
}

/// Partial trace of an arbitrary (not necessarily Hermitian) operator.
pub(crate) fn partial_trace_matrix(
    m: &DMatrix<C64>,
    dims: &[usize],
    keep: &[usize],
) -> Result<DMatrix<C64>> {
    check_dims(m.nrows(), dims)?;
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(invalid(format!("subsystem index out of range for dims {dims:?}")));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let n_out: usize = kept_dims.iter().product();
    let n = m.nrows();

    // split every full index into (kept part, traced part)
    let mut split = Vec::with_capacity(n);
    let mut d = vec![0; dims.len()];
    for i in 0..n {
        digits(i, dims, &mut d);
        let kd: Vec<usize> = keep.iter().map(|&k| d[k]).collect();
        let td: Vec<usize> = traced.iter().map(|&k| d[k]).collect();
        split.push((compose(&kd, &kept_dims), compose(&td, &traced_dims)));
    }
    let mut out = DMatrix::<C64>::zeros(n_out, n_out);
    for r in 0..n {
        for c in 0..n {
            if split[r].1 == split[c].1 {
                out[(split[r].0, split[c].0)] += m[(r, c)];
            }
        }
    }
    Ok(out)
}

/// Transposes subsystem `which`; an exact permutation of entries.
pub fn partial_transpose(
    m: &HermitianMatrix,
    dims: &[usize],
    which: usize,
) -> Result<HermitianMatrix> {
    check_dims(m.dim(), dims)?;
    if which >= dims.len() {
        return Err(invalid(format!("subsystem index {which} out of range")));
    }
    let n = m.dim();
    let mut out = DMatrix::<C64>::zeros(n, n);
    let mut dr = vec![0; dims.len()];
    let mut dc = vec![0; dims.len()];
    for r in 0..n {
        digits(r, dims, &mut dr);
        for c in 0..n {
            digits(c, dims, &mut dc);
            std::mem::swap(&mut dr[which], &mut dc[which]);
            let (r2, c2) = (compose(&dr, dims), compose(&dc, dims));
            std::mem::swap(&mut dr[which], &mut dc[which]);
            out[(r2, c2)] = m.m[(r, c)];
        }
    }
    Ok(HermitianMatrix::from_exact(out))
}

/// Eigenvalues in descending order with matching orthonormal eigenvector
/// columns.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl Eigen {
    pub fn reconstruct(&self) -> HermitianMatrix {
        let n = self.values.len();
        let mut out = DMatrix::<C64>::zeros(n, n);
        for (k, &v) in self.values.iter().enumerate() {
            let col = self.vectors.column(k);
            out += (col * col.adjoint()).scale(v);
        }
        HermitianMatrix::symmetrized(out)
    }
}

pub fn eig_hermitian(m: &HermitianMatrix) -> Eigen {
    let se = m.m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..m.dim()).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].total_cmp(&se.eigenvalues[a]));
    let values = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(m.dim(), m.dim(), |r, c| se.eigenvectors[(r, order[c])]);
    Eigen { values, vectors }
}

/// Applies a real function to the spectrum.
pub fn matrix_function(m: &HermitianMatrix, f: impl Fn(f64) -> f64) -> HermitianMatrix {
    let mut e = eig_hermitian(m);
    e.values.iter_mut().for_each(|v| *v = f(*v));
    e.reconstruct()
}

pub fn is_psd(m: &HermitianMatrix, tol: f64) -> bool {
    m.min_eigenvalue() >= -tol
}

/// Purifies `rho` onto `rho.dims() + [rank]`; the ancilla is the last factor.
pub fn purify(rho: &DensityMatrix) -> PureStateVector {
    let e = eig_hermitian(rho);
    let kept: Vec<usize> = (0..e.values.len()).filter(|&k| e.values[k] > EIG_CUTOFF).collect();
    let rank = kept.len().max(1);
    let n = rho.dim();
    let mut amps = DVector::<C64>::zeros(n * rank);
    for (a, &k) in kept.iter().enumerate() {
        let w = e.values[k].sqrt();
        for i in 0..n {
            amps[i * rank + a] = e.vectors[(i, k)] * w;
        }
    }
    let norm = amps.norm();
    let mut dims = rho.dims().to_vec();
    dims.push(rank);
    PureStateVector { amps: amps.unscale(norm), dims }
}

/// `-Tr(rho log2 rho)`.
pub fn von_neumann_entropy(rho: &HermitianMatrix) -> f64 {
    eig_hermitian(rho)
        .values
        .iter()
        .filter(|&&l| l > EIG_CUTOFF)
        .map(|&l| -l * l.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Random states and unitaries for tests and examples.
pub mod random {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }

    pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<C64> {
        DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
    }

    pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HermitianMatrix {
        HermitianMatrix::symmetrized(ginibre(rng, n, n))
    }

    /// Haar-distributed unitary via QR of a Ginibre matrix.
    pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<C64> {
        let qr = ginibre(rng, n, n).qr();
        let (q, r) = qr.unpack();
        let phases = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                let d = r[(i, i)];
                if d.norm() > 0.0 {
                    d / d.norm()
                } else {
                    C64::new(1.0, 0.0)
                }
            } else {
                C64::new(0.0, 0.0)
            }
        });
        q * phases
    }

    /// Density matrix of rank `rank` on `dims`.
    pub fn density<R: Rng + ?Sized>(rng: &mut R, dims: &[usize], rank: usize) -> DensityMatrix {
        let n: usize = dims.iter().product();
        let g = ginibre(rng, n, rank);
        let h = HermitianMatrix::symmetrized(&g * g.adjoint());
        DensityMatrix::normalized(h, dims.to_vec()).expect("ginibre state is valid")
    }

    pub fn pure<R: Rng + ?Sized>(rng: &mut R, dims: &[usize]) -> PureStateVector {
        let n: usize = dims.iter().product();
        let v = DVector::from_fn(n, |_, _| gaussian(rng));
        PureStateVector::normalized(v, dims.to_vec()).expect("nonzero gaussian vector")
    }
}
