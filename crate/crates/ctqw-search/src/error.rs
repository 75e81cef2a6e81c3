use thiserror::Error;

/// Errors produced by graph construction, spectral analysis and the
/// secular-equation solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph parameters: {0}")]
    InvalidGraph(String),

    #[error("disconnected sample: no connected graph after {attempts} attempts")]
    DisconnectedSample { attempts: usize },

    #[error("not regular: degree normalization requires a regular graph")]
    NotRegular,

    #[error("invalid Hamiltonian: {0}")]
    InvalidHamiltonian(String),

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("D must respect eigenvalue groups (D={d} splits a group)")]
    SplitsGroup { d: usize },

    #[error("degenerate top not excluded: retained group has eigenvalue 1")]
    DegenerateTopNotExcluded,

    #[error("marked node orthogonal to the quasi-degenerate subspace")]
    OrthogonalMarkedNode,

    #[error(
        "bracket failure in interval ({lo}, {hi}): F(lo)-1={flo}, F(hi)-1={fhi} after {retries} safeguard retries"
    )]
    BracketFailure {
        lo: f64,
        hi: f64,
        flo: f64,
        fhi: f64,
        retries: usize,
    },

    #[error("secular root did not converge: residual {residual} in interval ({lo}, {hi})")]
    SecularConvergence { residual: f64, lo: f64, hi: f64 },

    #[error("no dynamics: all perturbed levels coincide with r")]
    NoDynamics,

    #[error("instance of size {n} exceeds the dense cap {cap}")]
    DenseCap { n: usize, cap: usize },

    #[error("bound not applicable: r={r} lies inside the critical window")]
    BoundNotApplicable { r: f64 },

    #[error("exponent fit requires at least {min} sizes, got {got}")]
    TooFewSizes { min: usize, got: usize },

    #[error("non-positive measured value {value} for size {size} in exponent fit")]
    NonPositiveFitValue { size: usize, value: f64 },

    #[error("singular linear system in hitting-time solve")]
    SingularSystem,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for configuration problems, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidGraph(_) | Error::TooFewSizes { .. } => 2,
            _ => 3,
        }
    }
}
