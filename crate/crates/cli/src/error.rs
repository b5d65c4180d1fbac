use sasakit::cy::CyError;
use sasakit::families::FamilyError;
use sasakit::json::JsonError;
use sasakit::potentials::PotentialError;
use sasakit::volume::VolumeError;
use sasakit::DiagramError;
use thiserror::Error;

pub const NO_CY_MESSAGE: &str = "no toric diagram structure; c₁(D) = 0 fails";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] JsonError),
    #[error("invalid diagram: {0}")]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("{0}")]
    Usage(String),
    #[error("not good: {0}")]
    NotGood(String),
    #[error("{NO_CY_MESSAGE}")]
    NoCalabiYau,
    #[error("CY structure: {0}")]
    Cy(#[from] CyError),
    #[error("volume minimization: {0}")]
    Volume(#[from] VolumeError),
    #[error("potential evaluation: {0}")]
    Potential(#[from] PotentialError),
    #[error("numerical check failed: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Read { .. }
            | Self::Write { .. }
            | Self::Json(_)
            | Self::Diagram(_)
            | Self::Family(_)
            | Self::Usage(_) => 1,
            Self::NotGood(_) => 2,
            Self::NoCalabiYau => 3,
            Self::Cy(_) | Self::Volume(_) | Self::Potential(_) | Self::Numerical(_) => 4,
        }
    }
}
