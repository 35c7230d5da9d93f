use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("kernel evaluated at coincident points (r = {0:e})")]
    SingularEvaluation(f64),

    #[error("degenerate element: {0}")]
    DegenerateElement(String),

    #[error("tangent vectors are parallel or vanish (|U1 x U2| = {0:e})")]
    DegenerateTangent(f64),

    #[error("field point lies on the boundary of the integration triangle (distance {distance:e} to edge {edge})")]
    DegenerateSubTriangle { edge: usize, distance: f64 },

    #[error("angle {0} outside the open interval (-pi/2, pi/2)")]
    OutOfDomain(f64),

    #[error("analytic line integral requires a conformal frame (A varies by {0:e})")]
    NonConformalFrame(f64),

    #[error("local correction system is singular or ill-conditioned (pivot {0:e})")]
    IllConditionedCorrection(f64),

    #[error("system matrix is singular")]
    SingularMatrix,

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("{path}: line {line}: {message}")]
    MeshParse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("exact field has zero norm")]
    ZeroNorm,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
