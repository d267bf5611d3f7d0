use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("frame size {0} outside 1..=64")]
    InvalidFrame(usize),

    #[error("element {element} is not in a frame of size {frame_size}")]
    ElementOutOfFrame { element: usize, frame_size: usize },

    #[error("focal set of a simple support function must be non-empty")]
    EmptyFocalSet,

    #[error("support {0} outside [0, 1]")]
    InvalidSupport(f64),

    #[error("invalid mass function: {0}")]
    InvalidMass(String),

    #[error("operands are defined over different frames ({left} vs {right})")]
    FrameMismatch { left: usize, right: usize },

    /// Every pair of focal elements is disjoint; Dempster's rule is undefined.
    #[error("total conflict: combination undefined")]
    TotalConflict,

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid interaction matrix: {0}")]
    InvalidInteractions(String),

    #[error("invalid anneal configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate spectrum: critical temperature {0} is not positive")]
    DegenerateSpectrum(f64),

    #[error("search space of {size} configurations exceeds the limit of {limit}")]
    TooLarge { size: f64, limit: f64 },

    #[error("bond state has a vacant bond inside bond-cluster containing sites {0} and {1}")]
    NotGroundStateForm(usize, usize),

    #[error("invalid bond graph: {0}")]
    InvalidGraph(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("evidence file line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
