use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid family/connectivity/initial-state combination, out-of-range
    /// sizes and similar setup problems.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },

    #[error("repeated qubit index {0}")]
    DuplicateQubit(usize),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NonUnitary(f64),

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NonHermitian(f64),

    #[error("norm drifted to {0} (allowed deviation 1e-9)")]
    NormDrift(f64),

    #[error("not a probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("odd-parity amplitude of modulus {modulus:.3e} at index {index}")]
    ParityViolation { index: usize, modulus: f64 },

    #[error("parity-block symmetry violated: off-block element {0:.3e}")]
    SymmetryViolation(f64),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("need at least {need} items, got {got}")]
    TooFew { need: usize, got: usize },

    #[error("Jacobi diagonalization did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("{0} has no closed-form density")]
    NoAnalyticDensity(String),

    #[error("negative argument {0}")]
    NegativeArgument(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}
