use crate::counting::FeasibilityReport;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("unknown camera class `{0}`")]
    UnknownClass(String),
    #[error("singular configuration: {0}")]
    Singular(String),
    #[error("singular configuration at point {point}, camera {camera}: {reason}")]
    SingularAt {
        point: usize,
        camera: usize,
        reason: String,
    },
    #[error("retinal coordinates outside the chart: {0}")]
    OutOfChart(String),
    #[error("group element is not in the {group} group of class `{class}`")]
    GroupMismatch {
        class: &'static str,
        group: &'static str,
    },
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("empty matrix")]
    EmptyMatrix,
    #[error("dimension inequality fails: {0}")]
    Infeasible(FeasibilityReport),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
