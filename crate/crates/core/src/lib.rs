//! Upper bounds on the secret key rate of qubit QKD protocols run with
//! trusted but imperfect detectors.
//!
//! The bound is `K_S <= (1 - lambda) * I_ent(A;B)`, where `lambda` is the
//! largest separable weight reachable by any two-party state that reproduces
//! the observed measurement statistics, and `I_ent` is the mutual information
//! obtained when the entangled remainder of that state is measured with the
//! real (lossy, noisy) detectors.
//!
//! Module map:
//!
//! - [`quantum`]: Hermitian matrices, tensor products, partial trace and
//!   transpose, eigendecomposition, purification, von Neumann entropy.
//! - [`info`]: Shannon entropies, (conditional) mutual information,
//!   intrinsic information over classical channels, ccq states.
//! - [`detector`]: POVMs, dark counts, detection efficiency and the
//!   trusted-device inversion of observed statistics.
//! - [`protocol`]: four-state and six-state measurement sets, the
//!   depolarized Bell state and the induced statistics.
//! - [`sdp`]: a dense primal-dual interior-point solver for small block SDPs.
//! - [`bsa`]: maximum separable weight over the set of compatible states.
//! - [`bound`]: the composed key-rate bound, scans and CSV/JSON output.
//! - [`cli`]: configuration and command dispatch for the `qkd-bound` binary.

pub mod bound;
pub mod bsa;
pub mod cli;
pub mod detector;
pub mod error;
pub mod info;
pub mod protocol;
pub mod quantum;
pub mod sdp;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
