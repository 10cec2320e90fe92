use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("quadrature window captures only {captured:.3e} of the kernel mass")]
    QuadratureTooNarrow { captured: f64 },
    #[error("moment diverged at lambda = {lambda}")]
    MomentDiverged { lambda: f64 },
    #[error("order undetermined: relative fit residual {residual:.3e} (alpha {alpha:.4}, kcal {kcal:.4})")]
    OrderUndetermined { alpha: f64, kcal: f64, residual: f64 },
    #[error("monostable hypotheses violated: {0}")]
    HypothesesViolated(String),
    #[error("no tangency in bracket: {0}")]
    NoTangency(String),
    #[error("Newton stalled after {iterations} iterations (residual {residual:.3e})")]
    NewtonStalled { iterations: usize, residual: f64 },
    #[error("subcritical speed: no roots (c = {c}, c* = {c_star})")]
    SubcriticalSpeed { c: f64, c_star: f64 },
    #[error("root not bracketed: {0}")]
    NotBracketed(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("domain too short; extend L ({0})")]
    DomainTooShort(String),
    #[error("profile iteration stalled after {iterations} iterations (last update {last_update:.3e})")]
    ProfileStalled { iterations: usize, last_update: f64 },
    #[error("subcritical: no front (c = {c})")]
    NoFront { c: f64 },
    #[error("tail underresolved: {0}")]
    TailUnderresolved(String),
    #[error("grid too small for kernel: kernel half-width {kernel_half_width} exceeds grid half-width {grid_half_width}")]
    GridTooSmall { kernel_half_width: f64, grid_half_width: f64 },
    #[error("scheme monotonicity broken (reduce dt): value {value:.3e} outside [{low}, {high}] at node {node}")]
    MonotonicityBroken { value: f64, low: f64, high: f64, node: usize },
    #[error("profile window exceeded; enlarge L (frame coordinate {xi:.3})")]
    ProfileWindowExceeded { xi: f64 },
    #[error("t too large for exact evaluation (t = {t}, tau = {tau})")]
    DelayedExpOverflow { t: f64, tau: f64 },
    #[error("signal vanished: {0}")]
    SignalVanished(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("config: {0}")]
    Config(String),
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn in_stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }
}
