use nalgebra::DMatrix;

use crate::quantum::HermitianMatrix;
use crate::C64;

/// `[[Re H, -Im H], [Im H, Re H]]`: PSD iff `H` is, with every eigenvalue of
/// `H` appearing twice.
pub fn hermitian_to_real_embedding(h: &HermitianMatrix) -> DMatrix<f64> {
    let n = h.dim();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let z = h.get(r, c);
            out[(r, c)] = z.re;
            out[(r + n, c + n)] = z.re;
            out[(r, c + n)] = -z.im;
            out[(r + n, c)] = z.im;
        }
    }
    out
}

/// Left inverse of the embedding that also maps any real PSD matrix to a
/// Hermitian PSD matrix: `((X11 + X22) + i (X21 - X12)) / 2`.
pub fn real_to_hermitian(x: &DMatrix<f64>) -> HermitianMatrix {
    let n = x.nrows() / 2;
    let m = DMatrix::from_fn(n, n, |r, c| {
        C64::new(
            0.5 * (x[(r, c)] + x[(r + n, c + n)]),
            0.5 * (x[(r + n, c)] - x[(r, c + n)]),
        )
    });
    HermitianMatrix::symmetrized(m)
}

/// Matrix `F` with `<F, X> = Re Tr(E * real_to_hermitian(X))` for every real
/// symmetric `X`.
pub fn hermitian_functional(e: &HermitianMatrix) -> DMatrix<f64> {
    hermitian_to_real_embedding(e) * 0.5
}
