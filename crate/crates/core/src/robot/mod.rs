//! Robot specifications, kinematic matching across robots, and the
//! normalized evolution space.

mod matching;
mod space;
mod spec;

pub use matching::{match_kinematics, CanonicalBody, CanonicalJoint, MatchedSpace};
pub use space::{compute_bounds, EvolutionSpace};
pub use spec::{Body, Joint, JointKind, Param, RobotSpec};

#[derive(Debug, thiserror::Error)]
pub enum RobotError {
    #[error("{file}: {path}: {message}")]
    InvalidSpec {
        file: String,
        path: String,
        message: String,
    },
    #[error("{file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
    #[error("correspondence conflict in robot `{robot}`: {message}")]
    Conflict { robot: String, message: String },
    #[error("parameter `{key}` has mixed units: `{a}` vs `{b}`")]
    MixedUnits { key: String, a: String, b: String },
    #[error("dimension {dim} (`{key}`) is outside the evolution hull: {value}")]
    OutOfHull { dim: usize, key: String, value: f64 },
    #[error("{0}")]
    InvalidInput(String),
}

impl RobotError {
    pub(crate) fn in_file(self, file: &str) -> RobotError {
        match self {
            RobotError::InvalidSpec { path, message, .. } => RobotError::InvalidSpec {
                file: file.to_string(),
                path,
                message,
            },
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, RobotError>;
