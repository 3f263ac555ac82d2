//! Head pose and gaze estimation from a single calibrated camera image.
//!
//! The face is reduced to three points: the two eye glints and the bottom of
//! the nose. Their distances follow a fixed model, which turns the pose into
//! the intersection of two conics in the unknown ray scales. Gaze comes from
//! the glint, a known LED position and the pupil image.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod poly;
pub mod pose;
pub mod gaze;
pub mod synthetic;
pub mod detect;
pub mod sim;
pub mod report;

pub use error::{Error, Result};
pub use gaze::{EyeGeometry, GazeResult, LedConfig, PupilObservation};
pub use geometry::{CameraIntrinsics, Direction, ImagePoint, Point3, Ray3};
pub use poly::{BivariateQuadratic, RootSet, UniPoly};
pub use pose::{FaceModel, FaceObservation, FacePose};
