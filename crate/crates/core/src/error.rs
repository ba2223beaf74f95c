use thiserror::Error;

/// Failures of the numerical pipeline.
///
/// Every variant carries enough context to act on: the offending node,
/// the value that crossed a threshold, or the parameter to enlarge.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("adaptive quadrature did not converge: partial value {partial:e}, error estimate {estimate:e} > tolerance {tolerance:e}")]
    QuadratureNotConverged {
        partial: f64,
        estimate: f64,
        tolerance: f64,
    },

    #[error("potential tail does not decay fast enough: need x_right ≈ {required:e} (cap {cap:e})")]
    TailNotConvergent { required: f64, cap: f64 },

    #[error("ODE integrator failed at x = {x}: {reason}")]
    Integration { x: f64, reason: String },

    #[error("Wronskian |W| = {modulus:e} below floor at k = {k}; potential looks exceptional, shift the profile")]
    WronskianFloor { k: f64, modulus: f64 },

    #[error("bound-state count mismatch: Wronskian scan found {scan}, eigensolver found {eigensolver}")]
    BoundStateCount { scan: usize, eigensolver: usize },

    #[error("split denominator |1 - L+ R-| = {modulus:e} below floor at k = {k}")]
    SplitDenominator { k: f64, modulus: f64 },

    #[error("Volterra iteration not contracting after {iterations} iterations (residual {residual:e})")]
    VolterraDivergence { iterations: usize, residual: f64 },

    #[error("Riccati integration failed at x = {x} even in angle form")]
    Riccati { x: f64 },

    #[error("contour integral refused: {0}")]
    ContourRefused(String),

    #[error("contour truncation bound {bound:e} above tolerance; contour half-length {required} needed")]
    ContourTruncation { bound: f64, required: f64 },

    #[error("oscillatory quadrature error estimate {estimate:e} above tolerance at s = {s}")]
    KernelAccuracy { s: f64, estimate: f64 },

    #[error("kernel tail |F(2 L_s)| = {value:e} exceeds cut {cut:e}; enlarge L_s (currently {l_s})")]
    TailCut { value: f64, cut: f64, l_s: f64 },

    #[error("1 + M is singular (pivot {pivot:e})")]
    Singular { pivot: f64 },

    #[error("determinant is non-positive (sign {sign}); data inadmissible or corrupted")]
    NonPositiveDeterminant { sign: f64 },

    #[error("u evaluation routes disagree: finite difference {fd}, trace formula {trace}")]
    MethodDisagreement { fd: f64, trace: f64 },

    #[error("block determinant variants disagree: {0}")]
    BlockDisagreement(String),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("split-step solver blew up at t = {t} (norm growth {growth:e})")]
    SplitStepBlowUp { t: f64, growth: f64 },

    #[error("i/o: {0}")]
    Io(String),

    #[error("format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
