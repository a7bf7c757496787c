use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure category, used by the CLI to pick an exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Simulation,
    Analysis,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value: {0}")]
    NonFinite(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("not a circular formation: {0}")]
    NotAFormation(String),

    #[error("singular cotangent: bearing {index} = {bearing} has zero sine")]
    SingularCotangent { index: usize, bearing: f64 },

    #[error("arrangement count overflows for n = {0}")]
    Overflow(usize),

    #[error("state is not an equilibrium (residual {residual:e} > {tolerance:e})")]
    NotEquilibrium { residual: f64, tolerance: f64 },

    #[error("state is not a collinear equilibrium: {0}")]
    NotCollinear(String),

    #[error("reduction mismatch: closed form and similarity transform differ by {0:e}")]
    ReductionMismatch(f64),

    #[error("unsupported control law configuration: {0}")]
    UnsupportedLaw(String),

    #[error("adjacent collision at t = {time}: rho_{link} = {rho:e} below {rho_min:e}")]
    Collision {
        time: f64,
        link: usize,
        rho: f64,
        rho_min: f64,
    },

    #[error("integration blew up at t = {0}")]
    Blowup(f64),

    #[error("eigenvalue iteration did not converge for a {0}x{0} matrix")]
    EigenNonConvergence(usize),

    #[error("polynomial remainder {remainder:e} exceeds {tolerance:e}")]
    PolynomialInconsistency { remainder: f64, tolerance: f64 },

    #[error("input outside theorem hypotheses: {0}")]
    OutsideHypotheses(String),

    #[error("identical initial headings (beta0 = -pi) have no circular equilibrium")]
    IdenticalHeadings,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) | Error::Json(_) | Error::Io(_) | Error::UnsupportedLaw(_) => {
                ErrorKind::Config
            }
            Error::Collision { .. } | Error::Blowup(_) => ErrorKind::Simulation,
            Error::InvalidInput(_) | Error::NonFinite(_) => ErrorKind::Config,
            _ => ErrorKind::Analysis,
        }
    }
}
