//! Dense-statevector simulation of random quantum circuit families together
//! with the two statistics used to grade their output states: Lorenz curves
//! (majorization cumulants of the computational-basis probabilities) and
//! entanglement-spectrum gap ratios across a balanced bipartition.
//!
//! The crate is organized bottom-up:
//!
//! - [`simcore`]: amplitudes, gate kernels, initial/reference states,
//!   probabilities, partial traces and parity compression.
//! - [`gates`]: the fixed gate matrices, random matchgates and random diagonal
//!   phase gates.
//! - [`families`]: sampling and execution of the seven circuit families
//!   (`G1`, `G2`, `G3`, `MG`, `D2`, `D3`, `Dn`) addressed by `A-B-C` names.
//! - [`majorization`]: cumulants, the majorization order and ensemble
//!   statistics of Lorenz curves.
//! - [`spectrum`]: Hermitian diagonalization, gap ratios, histograms and the
//!   Wigner-Dyson / Poisson references.
//! - [`runner`]: seeded parallel ensembles, file outputs, run comparison and
//!   the batch verdict table.
//!
//! Basis convention: in a basis index `i` of an `n`-qubit register, qubit `0`
//! is the most significant bit, i.e. qubit `q` is bit `n - 1 - q` of `i`.

pub mod error;
pub mod families;
pub mod gates;
pub mod majorization;
pub mod runner;
pub mod simcore;
pub mod spectrum;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
