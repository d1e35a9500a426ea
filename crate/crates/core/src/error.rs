use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("time {t} outside [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },

    #[error("invalid curve family: {0}")]
    InvalidFamily(String),

    #[error("curves not ordered: min sampled gap {min_gap} below required {required}")]
    CurvesNotOrdered { min_gap: f64, required: f64 },

    #[error("interface index {index} outside 1..={count}")]
    InterfaceIndex { index: usize, count: usize },

    #[error("beta out of (-1,1): interface {interface} reaches {value}")]
    BetaOutOfRange { interface: usize, value: f64 },

    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),

    #[error("slopes must be positive (got {plus}, {minus})")]
    NonPositiveSlope { plus: f64, minus: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point ({t}, {x}) outside the computational box")]
    OutsideBox { t: f64, x: f64 },

    #[error("singular tridiagonal system at row {row}")]
    SingularSystem { row: usize },

    #[error("hypothesis check failed: {0}")]
    Hypothesis(String),
}
