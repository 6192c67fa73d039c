//! File formats, image IO and the command-line driver around `vco-core`.

pub mod cli;
pub mod formats;
pub mod imageio;

/// Command failure, mapped to a process exit code.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Failure {
    #[error("input error: {0}")]
    Input(String),
    #[error("output error: {0}")]
    Output(String),
    #[error("pipeline infeasible: {0}")]
    Infeasible(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) | Failure::Output(_) => 2,
            Failure::Infeasible(_) => 3,
        }
    }
}

impl From<vco_core::Error> for Failure {
    fn from(e: vco_core::Error) -> Self {
        use vco_core::Error as E;
        match e {
            E::NoVesselsDetected | E::NoTargetShape | E::DegenerateResult | E::InfeasibleNode(_) | E::Unreachable(..) => {
                Failure::Infeasible(e.to_string())
            }
            other => Failure::Input(other.to_string()),
        }
    }
}

pub type Outcome<T> = Result<T, Failure>;
