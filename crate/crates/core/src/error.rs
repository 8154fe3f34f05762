use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("empty {0}: dimension must be at least 1")]
    EmptyDimension(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported dimension {dim} (supported: {supported})")]
    UnsupportedDimension { dim: usize, supported: &'static str },

    #[error("QR iteration did not converge after {iterations} iterations ({unconverged} eigenvalues pending, last subdiagonal {residual:e})")]
    IterationFailure {
        iterations: usize,
        unconverged: usize,
        residual: f64,
    },

    #[error("parameter {name} = {value} outside [{lo}, {hi}]")]
    Domain {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    #[error("matrix is not Hermitian (‖M − M†‖_F = {defect:e})")]
    HermiticityViolation { defect: f64 },

    #[error("index {index} out of range {lo}..={hi}")]
    IndexOutOfRange { index: usize, lo: usize, hi: usize },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("near-orthogonal post-selection: |<psi_f|psi_i>|^2 = {overlap_sq:e} below floor {floor:e}")]
    NearOrthogonalPostselection { overlap_sq: f64, floor: f64 },

    #[error("negative variance {radicand:e} beyond rounding tolerance")]
    NumericalInconsistency { radicand: f64 },

    #[error("excluded parameter: {name} = {value}")]
    ExcludedParameter { name: &'static str, value: f64 },

    #[error("no real solution (discriminant {discriminant:e})")]
    NoRealSolution { discriminant: f64 },

    #[error("branch singularity: vanishing denominator {denominator:e}")]
    BranchSingularity { denominator: f64 },

    #[error("meter shift {shift} leaves the grid (limit {limit}); increase x_extent")]
    GridOverflow { shift: f64, limit: f64 },

    #[error("outside the weak regime: {0}")]
    OutsideWeakRegime(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
