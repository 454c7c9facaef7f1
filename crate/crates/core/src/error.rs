use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ball under-resolved: radius {radius} < h/2 = {half_h}")]
    BallUnderResolved { radius: f64, half_h: f64 },

    #[error("invalid exponent: p = {0}, expected p >= 1")]
    InvalidExponent(f64),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("grids are not aligned: {0}")]
    GridMismatch(String),

    #[error("empty radius ladder: r_min = {r_min}, r_max = {r_max}")]
    EmptyLadder { r_min: f64, r_max: f64 },

    #[error("empty sample set for condition check `{0}`")]
    EmptySamples(&'static str),

    #[error("kernel under-resolved: t = {t} < 2h = {min_t}")]
    KernelUnderResolved { t: f64, min_t: f64 },

    #[error("insufficient resolution for epsilon: {predicate}")]
    InsufficientResolution { predicate: String },

    #[error("CZ-C violated: growth function fails the tail-integral condition (C = {constant:.3e})")]
    CzcViolated { constant: f64 },

    #[error("distance sandwich violated: lower {lower} > upper {upper} beyond tolerance")]
    SandwichViolated { lower: f64, upper: f64 },

    #[error("support escapes the covering window")]
    SupportEscapesWindow,

    #[error("window outside resolvable range: {0}")]
    BadWindow(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
