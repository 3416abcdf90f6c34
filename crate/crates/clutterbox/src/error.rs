//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Two grids were combined that do not share dims, resolution, and origin.
    #[error("voxel grid geometry mismatch: {0}")]
    GeometryMismatch(String),

    /// A point-set operation received an empty set; names which one.
    #[error("point set `{which}` is empty")]
    EmptyPointSet { which: &'static str },

    /// A grid-distance operation received a grid with no set voxels.
    #[error("voxel grid `{which}` has no occupied voxels")]
    EmptyGrid { which: &'static str },

    /// Shape completion requires a nonempty partial scan.
    #[error("completion input has an empty partial grid")]
    EmptyPartial,

    /// A primitive was requested with an extent smaller than one voxel.
    #[error("primitive dimension {dim} = {value} m is smaller than one voxel ({resolution} m)")]
    PrimitiveTooSmall {
        dim: &'static str,
        value: f64,
        resolution: f64,
    },

    /// Every sampled shadow voxel traced back to the table within the retry budget.
    #[error("no selectable object: all sampled shadows were cast by the table after {retries} retries")]
    NoSelectableObject { retries: usize },

    /// Every sampled action candidate was infeasible.
    #[error("no feasible action among {samples} sampled candidates")]
    NoFeasibleAction { samples: usize },

    /// An action was executed whose preconditions do not hold.
    #[error("infeasible action: {0}")]
    InfeasibleAction(String),

    /// Scene or experiment file failed to parse.
    #[error("parse error in {file}: {message}")]
    Parse { file: String, message: String },

    /// Scene contents violate a structural invariant.
    #[error("invalid scene: {0}")]
    InvalidScene(String),

    /// Binary grid file was malformed.
    #[error("bad grid file {file}: {message}")]
    BadGridFile { file: String, message: String },

    /// The external completer did not produce its output file in time.
    #[error("external completer timed out after {seconds} s waiting for {path}")]
    ExternalCompleterTimeout { path: String, seconds: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
