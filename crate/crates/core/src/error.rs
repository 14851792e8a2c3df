use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("operator is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("operator is not Hermitian (deviation {deviation:.3e})")]
    NonHermitian { deviation: f64 },

    #[error("state vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("invalid density state: {0}")]
    InvalidState(String),

    #[error("probe index {probe} out of range for {n_probes} probes")]
    ProbeIndex { probe: usize, n_probes: usize },

    #[error("Hilbert-space dimension {dim} exceeds cap {cap}")]
    DimCapExceeded { dim: usize, cap: usize },

    #[error("code construction needs at least 3 probes, got {0}")]
    TooFewProbes(usize),

    #[error("Hamiltonian has no component outside the Lindblad span; no code exists")]
    NoPerpendicularComponent,

    #[error("spectral code requires qubit probes, got d = {0}")]
    NotQubit(usize),

    #[error("logical states are not orthonormal (overlap {0:.3e})")]
    LogicalOverlap(f64),

    #[error("error-correction conditions violated: cond1 {cond1:.3e}, cond2 {cond2:.3e}")]
    KnillLaflamme { cond1: f64, cond2: f64 },

    #[error("recovery is not trace non-increasing (excess {0:.3e})")]
    RecoveryNotContractive(f64),

    #[error(
        "finite-difference step too large: QFI changed by {change:.3e} (relative) when halving eps"
    )]
    EpsTooLarge { change: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
