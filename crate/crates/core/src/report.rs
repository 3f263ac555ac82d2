//! JSON documents produced by the command-line tool, and the commands
//! themselves as plain functions over parsed inputs.

use serde::{Deserialize, Serialize};

use crate::detect::{detect_all, DetectionParams, DetectionResult, GrayImage};
use crate::error::{Error, Result};
use crate::gaze::{gaze_for_pose, EyeGeometry, GazeResult, LedConfig, PupilObservation};
use crate::geometry::{CameraIntrinsics, Direction, Point3};
use crate::pose::{face_distance, solve_pose, FaceModel, FaceObservation, FacePose};
use crate::sim::{curve_string, run_scenario, SimScenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseReport {
    #[serde(rename = "A")]
    pub a: Point3,
    #[serde(rename = "B")]
    pub b: Point3,
    #[serde(rename = "C")]
    pub c: Point3,
    pub normal: Direction,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Camera to nose-bottom distance, cm.
    pub distance: f64,
}

impl From<&FacePose> for PoseReport {
    fn from(p: &FacePose) -> Self {
        PoseReport {
            a: p.a,
            b: p.b,
            c: p.c,
            normal: p.normal,
            alpha: p.alpha,
            beta: p.beta,
            gamma: p.gamma,
            distance: face_distance(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub kind: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<PoseReport>>,
}

impl From<&Error> for ErrorBody {
    fn from(e: &Error) -> Self {
        ErrorBody {
            kind: e.kind().to_string(),
            message: e.to_string(),
            stage: match e {
                Error::DetectionFailed { stage, .. } => Some(stage.to_string()),
                _ => None,
            },
            candidates: match e {
                Error::Ambiguous { candidates } => Some(candidates.iter().map(PoseReport::from).collect()),
                _ => None,
            },
        }
    }
}

/// Top-level error document: `{ "error": { "kind": ..., "message": ... } }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub error: ErrorBody,
}

impl From<&Error> for ErrorReport {
    fn from(e: &Error) -> Self {
        ErrorReport { error: e.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EyeStatus {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EyeReport {
    pub status: EyeStatus,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub result: Option<GazeResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBody>,
}

impl From<Result<GazeResult>> for EyeReport {
    fn from(r: Result<GazeResult>) -> Self {
        match r {
            Ok(g) => EyeReport {
                status: EyeStatus::Ok,
                result: Some(g),
                error: None,
            },
            Err(e) => EyeReport {
                status: EyeStatus::Error,
                result: None,
                error: Some((&e).into()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GazeReport {
    pub pose: PoseReport,
    pub eye_a: EyeReport,
    pub eye_b: EyeReport,
}

pub fn pose_report(k: &CameraIntrinsics, obs: &FaceObservation, model: &FaceModel) -> Result<PoseReport> {
    Ok(PoseReport::from(&solve_pose(k, obs, model)?))
}

pub fn gaze_report(
    k: &CameraIntrinsics,
    obs: &FaceObservation,
    pupils: &PupilObservation,
    led: &LedConfig,
    eye: &EyeGeometry,
    model: &FaceModel,
) -> Result<GazeReport> {
    let pose = solve_pose(k, obs, model)?;
    let [a, b] = gaze_for_pose(k, &pose, obs, pupils, led, eye);
    Ok(GazeReport {
        pose: PoseReport::from(&pose),
        eye_a: a.into(),
        eye_b: b.into(),
    })
}

pub fn detection_report(img: &GrayImage, params: &DetectionParams) -> Result<DetectionResult> {
    detect_all(img, params)
}

/// Runs a scenario and renders its curve as CSV. `seed` overrides the
/// scenario's own seed.
pub fn simulation_csv(scenario: &SimScenario, seed: Option<u64>) -> Result<String> {
    let mut s = scenario.clone();
    if let Some(seed) = seed {
        s.seed = seed;
    }
    curve_string(&run_scenario(&s)?)
}

/// Process exit code for an error: 2 for I/O, 3 for unreadable or invalid
/// input, 4 for solver and detection failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Csv(_) => 2,
        Error::Json(_) | Error::Config(_) | Error::ImageFormat(_) | Error::InvalidInput(_) => 3,
        _ => 4,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ImagePoint;
    use crate::synthetic::SyntheticFace;

    #[test]
    fn pose_report_fields() {
        let k = CameraIntrinsics::new(4000.0, 4000.0, 696.0, 520.0).unwrap();
        let m = FaceModel::default();
        let face = SyntheticFace::facing_camera(&m, Point3::new(2.0, 1.0, 60.0), 10.0, 25.0, 5.0);
        let r = pose_report(&k, &face.observe(&k).unwrap(), &m).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for key in ["A", "B", "C", "normal", "alpha", "beta", "gamma", "distance"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert!((r.distance - face.c.coords.norm()).abs() < 1e-6);
    }

    #[test]
    fn eye_report_shapes() {
        let err: EyeReport = Err(Error::RayMissesSphere { miss_cm: 0.2 }).into();
        let v = serde_json::to_value(&err).unwrap();
        assert_eq!(v["status"], "error");
        assert_eq!(v["error"]["kind"], "ray_misses_sphere");
        assert!(v.get("cornea_center").is_none());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), 2);
        assert_eq!(exit_code(&serde_json::from_str::<FaceModel>("{").unwrap_err().into()), 3);
        assert_eq!(exit_code(&Error::Unsolvable), 4);
        assert_eq!(
            exit_code(&Error::DetectionFailed { stage: "glints", reason: String::new() }),
            4
        );
        let e = FaceObservation::new(ImagePoint::new(0.0, 0.0), ImagePoint::new(0.0, 0.0), ImagePoint::new(1.0, 0.0))
            .unwrap_err();
        assert_eq!(exit_code(&e), 3);
    }
}
