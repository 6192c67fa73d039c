use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("no centerline")]
    NoCenterline,
    #[error("bad interval")]
    BadInterval,
    #[error("degenerate polyline")]
    DegeneratePolyline,
    #[error("unbranchable point {0}")]
    UnbranchablePoint(u32),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty scale list")]
    EmptyScales,
    #[error("no target shape")]
    NoTargetShape,
    #[error("empty template")]
    EmptyTemplate,
    #[error("no vessels detected in destination")]
    NoVesselsDetected,
    #[error("candidate set does not match graph ({points} points, {lists} candidate lists)")]
    CandidateMismatch { points: usize, lists: usize },
    #[error("infeasible node {0}")]
    InfeasibleNode(usize),
    #[error("empty seed set")]
    EmptySeeds,
    #[error("start pixel ({0}, {1}) is unreachable")]
    Unreachable(i32, i32),
    #[error("degenerate result")]
    DegenerateResult,
    #[error("empty truth")]
    EmptyTruth,
    #[error("no shared ids")]
    NoSharedIds,
}

pub type Result<T> = core::result::Result<T, Error>;
