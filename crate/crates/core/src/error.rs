use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("operator is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator has zero dimension")]
    EmptyOperator,

    #[error("operator is not hermitian: max|A - A^dagger| = {0:e}")]
    NotHermitian(f64),

    #[error("operator is not unitary: max|A^dagger A - I| = {0:e}")]
    NotUnitary(f64),

    #[error("eigenphase {phase} lies within {guard:e} of the branch cut at -pi (step too large)")]
    BranchCut { phase: f64, guard: f64 },

    #[error("{n} qubits exceeds the dense simulation cap of {cap}")]
    QubitCap { n: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Majorana count {0} must be even and at least 4")]
    MajoranaCount(usize),

    #[error("Majorana index {index} outside 1..={n}")]
    MajoranaIndex { index: usize, n: usize },

    #[error("Hamiltonian has zero one-norm")]
    ZeroHamiltonian,

    #[error("unsupported product-formula order {0} (use 1 or an even order)")]
    UnsupportedOrder(usize),

    #[error("step grid is not asymptotic: fitted slope {slope:.3}, expected {expected}")]
    NonAsymptotic { slope: f64, expected: usize },

    #[error(
        "Fourier target {eps:e} unattainable: taylor tail {taylor:e}, \
         arcsin tail {arcsin:e}, binomial tail {binomial:e}"
    )]
    LwfUnattainable {
        eps: f64,
        taylor: f64,
        arcsin: f64,
        binomial: f64,
    },

    #[error("polynomial is not admissible: max |P| on the unit circle is {0}")]
    NotAdmissible(f64),

    #[error("degenerate completion: min of 1 - |P|^2 on the unit circle is {0:e}")]
    DegenerateCompletion(f64),

    #[error("root finding failed for a degree-{0} polynomial")]
    RootFinding(usize),

    #[error("layer peeling unstable at degree {degree}: leading magnitude {magnitude:e}")]
    PeelingUnstable { degree: usize, magnitude: f64 },

    #[error("spectrum [{lo}, {hi}] does not fit the signal window of half-width {width}")]
    SpectrumOutOfWindow { lo: f64, hi: f64, width: f64 },

    #[error("node {index}: {source}")]
    AtNode {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
