use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("coupling entry ({j},{k}) breaks skew-Hermiticity: b[j,k] = {bjk}, -conj(b[k,j]) = {neg_conj_bkj}")]
    NotSkewHermitian {
        j: usize,
        k: usize,
        bjk: String,
        neg_conj_bkj: String,
    },

    #[error("coupling entries are only available up to order {available}, order {requested} requested")]
    CouplingExtent { requested: usize, available: usize },

    #[error("eigenvalue {index} is not available: the drift only stores {available} eigenvalues")]
    EigenvalueExtent { index: usize, available: usize },

    #[error("invalid spectral data: {0}")]
    InvalidSpectrum(String),

    #[error("unsupported coupling structure: bandwidth {bandwidth} where a tri-diagonal operator is required")]
    UnsupportedStructure { bandwidth: String },

    #[error("{name} = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid control: {0}")]
    InvalidControl(String),

    #[error("control is not admissible: sup|u| = {sup:.6} must be < (1 - delta)/a = {threshold:.6} (delta = {delta}, a = {a})")]
    Inadmissible {
        sup: f64,
        threshold: f64,
        delta: f64,
        a: f64,
    },

    #[error("requested {requested} subintervals but the sampled control only resolves {available}; supply a finer grid")]
    InsufficientResolution { requested: usize, available: usize },

    #[error("state has basis order {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("basis index {index} out of range 1..={order}")]
    IndexOutOfRange { index: usize, order: usize },

    #[error("system constants are required but have not been attached")]
    MissingConstants,

    #[error("eigendecomposition failed: {0}")]
    Numerical(String),

    #[error("BV limit did not converge after refinements {refinements:?}; increments {increments:?}")]
    NoConvergence {
        refinements: Vec<usize>,
        increments: Vec<f64>,
    },

    #[error("no dimension up to {cap} brings the bound below epsilon; bound at the cap is {bound_at_cap:e}")]
    SearchCap { cap: usize, bound_at_cap: f64 },

    #[error("model rejected: {0}")]
    Model(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

pub(crate) fn ensure_domain(
    name: &'static str,
    value: f64,
    ok: bool,
    domain: &'static str,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            domain,
        })
    }
}
