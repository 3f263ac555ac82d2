use thiserror::Error;

use crate::pose::FacePose;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("point is behind the camera (z = {z})")]
    BehindCamera { z: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("polynomial has degree 0 and no roots")]
    NoRoots,

    #[error("conic is constant in the elimination variable")]
    DegenerateConic,

    #[error("curves share a common component")]
    CurvesCoincide,

    #[error("degenerate observation: {0}")]
    DegenerateObservation(String),

    #[error("no admissible positive real solution for the observation")]
    Unsolvable,

    /// Several distinct poses are equally preferred; all of them are listed.
    #[error("observation is ambiguous: {} candidate poses", candidates.len())]
    Ambiguous { candidates: Vec<FacePose> },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("pupil ray misses the sphere by {miss_cm} cm")]
    RayMissesSphere { miss_cm: f64 },

    #[error("detection failed at stage `{stage}`: {reason}")]
    DetectionFailed { stage: &'static str, reason: String },

    #[error("nose not found: {0}")]
    NoseNotFound(String),

    #[error("image format: {0}")]
    ImageFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::BehindCamera { .. } => "behind_camera",
            Error::InvalidInput(_) => "invalid_input",
            Error::NoRoots => "no_roots",
            Error::DegenerateConic => "degenerate_conic",
            Error::CurvesCoincide => "curves_coincide",
            Error::DegenerateObservation(_) => "degenerate_observation",
            Error::Unsolvable => "unsolvable_observation",
            Error::Ambiguous { .. } => "ambiguous_observation",
            Error::DegenerateGeometry(_) => "degenerate_geometry",
            Error::RayMissesSphere { .. } => "ray_misses_sphere",
            Error::DetectionFailed { .. } => "detection_failed",
            Error::NoseNotFound(_) => "nose_not_found",
            Error::ImageFormat(_) => "image_format",
            Error::Io(_) => "io",
            Error::Json(_) => "parse",
            Error::Csv(_) => "io",
        }
    }
}
