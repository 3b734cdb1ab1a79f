use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),

    /// The deuce denominator vanishes, e.g. (p_F, p_S) = (1, 0) on an alternating cycle.
    #[error("singular serve profile: deuce denominator {denominator:e} is zero")]
    SingularProfile { denominator: f64 },

    #[error("break-point metrics are undefined when S serves some points")]
    MixedServerBreakpoint,

    #[error("invalid serve schedule: {0}")]
    InvalidSchedule(String),

    #[error("deuce loop exceeded {0} cycles")]
    DeuceCapExceeded(u64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: {field} = {value} is outside [0, 1]")]
    Range { line: u64, field: &'static str, value: f64 },

    #[error("double-fault rate {0} is outside the accepted range [0, 0.05]")]
    DoubleFaultRange(f64),

    /// The cutoff equation has no solution when p_emp equals p_s_won.
    #[error("degenerate player profile: p_emp equals p_s_won ({0})")]
    DegenerateProfile(f64),

    #[error("no player rows supplied")]
    EmptyInput,
}
