//! Face pose from two eye glints and the nose bottom.
//!
//! The face is modelled as an isosceles triangle: both eyes are equally far
//! from the nose bottom, the eye distance is `ratio_r` times the eye–nose
//! distance, and the eye distance itself is known in centimeters. Writing each
//! 3D point as an unknown scale along its optical ray turns the first two
//! constraints into a pair of conics in the eye scales (with the nose scale
//! fixed to one); the third constraint then fixes the metric scale.

use nalgebra::{Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, Direction, ImagePoint, Point3};
use crate::poly::{intersect_conics, BivariateQuadratic};

/// Anthropometric face model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFaceModel")]
pub struct FaceModel {
    /// Distance between the eye centers, in cm.
    pub inter_eye_cm: f64,
    /// `d(A, B) / d(A, C)`.
    pub ratio_r: f64,
}

#[derive(Deserialize)]
struct RawFaceModel {
    #[serde(default = "FaceModel::default_inter_eye")]
    inter_eye_cm: f64,
    #[serde(default = "FaceModel::default_ratio")]
    ratio_r: f64,
}

impl TryFrom<RawFaceModel> for FaceModel {
    type Error = Error;

    fn try_from(raw: RawFaceModel) -> Result<Self> {
        FaceModel::new(raw.inter_eye_cm, raw.ratio_r)
    }
}

impl Default for FaceModel {
    fn default() -> Self {
        FaceModel {
            inter_eye_cm: Self::default_inter_eye(),
            ratio_r: Self::default_ratio(),
        }
    }
}

impl FaceModel {
    pub const INTER_EYE_CM: f64 = 6.5;
    pub const RATIO_R: f64 = 1.0833;

    fn default_inter_eye() -> f64 {
        Self::INTER_EYE_CM
    }

    fn default_ratio() -> f64 {
        Self::RATIO_R
    }

    pub fn new(inter_eye_cm: f64, ratio_r: f64) -> Result<Self> {
        if !(inter_eye_cm > 0.0) || !inter_eye_cm.is_finite() {
            return Err(Error::Config(format!(
                "inter-eye distance must be positive, got {inter_eye_cm}"
            )));
        }
        // r < 2 is the triangle inequality for the isosceles model
        if !(ratio_r > 0.0 && ratio_r < 2.0) {
            return Err(Error::Config(format!(
                "face ratio must lie in (0, 2), got {ratio_r}"
            )));
        }
        Ok(FaceModel {
            inter_eye_cm,
            ratio_r,
        })
    }

    /// Eye to nose-bottom distance.
    pub fn eye_nose_cm(&self) -> f64 {
        self.inter_eye_cm / self.ratio_r
    }

    /// Distance from the eye midpoint to the nose bottom.
    pub fn nose_height_cm(&self) -> f64 {
        let side = self.eye_nose_cm();
        let half = self.inter_eye_cm / 2.0;
        (side * side - half * half).sqrt()
    }
}

/// Image positions of the two glints and the nose bottom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawObservation")]
pub struct FaceObservation {
    pub glint_a: ImagePoint,
    pub glint_b: ImagePoint,
    pub nose_c: ImagePoint,
}

#[derive(Deserialize)]
struct RawObservation {
    glint_a: ImagePoint,
    glint_b: ImagePoint,
    nose_c: ImagePoint,
}

impl TryFrom<RawObservation> for FaceObservation {
    type Error = Error;

    fn try_from(raw: RawObservation) -> Result<Self> {
        FaceObservation::new(raw.glint_a, raw.glint_b, raw.nose_c)
    }
}

/// Minimum pixel separation between observed points.
pub const MIN_SEPARATION_PX: f64 = 1e-6;

impl FaceObservation {
    pub fn new(glint_a: ImagePoint, glint_b: ImagePoint, nose_c: ImagePoint) -> Result<Self> {
        let pts = [glint_a, glint_b, nose_c];
        if pts.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidInput("observation has non-finite coordinates".into()));
        }
        for i in 0..3 {
            for j in i + 1..3 {
                if pts[i].distance(&pts[j]) < MIN_SEPARATION_PX {
                    return Err(Error::InvalidInput(
                        "observation points must be pairwise distinct".into(),
                    ));
                }
            }
        }
        Ok(FaceObservation {
            glint_a,
            glint_b,
            nose_c,
        })
    }

    /// Projects three camera-frame points.
    pub fn project(k: &CameraIntrinsics, a: &Point3, b: &Point3, c: &Point3) -> Result<Self> {
        Self::new(k.project(a)?, k.project(b)?, k.project(c)?)
    }
}

/// A recovered face. `alpha` and `beta` are the eye scales relative to a unit
/// nose scale; `gamma` is the metric factor, so `a = gamma·alpha·K⁻¹·glint_a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FacePose {
    #[serde(rename = "A")]
    pub a: Point3,
    #[serde(rename = "B")]
    pub b: Point3,
    #[serde(rename = "C")]
    pub c: Point3,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Unit normal of the eye–eye–nose plane, pointing out of the face.
    pub normal: Direction,
}

impl FacePose {
    /// Depth scale along the `K⁻¹·glint_a` ray.
    pub fn scale_a(&self) -> f64 {
        self.gamma * self.alpha
    }

    pub fn scale_b(&self) -> f64 {
        self.gamma * self.beta
    }

    pub fn eye_midpoint(&self) -> Point3 {
        nalgebra::center(&self.a, &self.b)
    }

    pub fn centroid(&self) -> Point3 {
        Point3::from((self.a.coords + self.b.coords + self.c.coords) / 3.0)
    }

    /// Residuals of the three model equations: `|AC| - |BC|`,
    /// `|AB| - r·|AC|` and `|AB| - inter_eye`.
    pub fn model_residuals(&self, model: &FaceModel) -> [f64; 3] {
        let ab = (self.b - self.a).norm();
        let ac = (self.c - self.a).norm();
        let bc = (self.c - self.b).norm();
        [ac - bc, ab - model.ratio_r * ac, ab - model.inter_eye_cm]
    }

    /// Sine of the angle between the eye-to-nose direction and the plane
    /// facing the viewer at the eye midpoint. Positive when the nose bottom is
    /// farther from the camera than the eyes.
    pub fn nose_tilt(&self) -> f64 {
        let m = self.eye_midpoint();
        let down = self.c - m;
        down.dot(&m.coords) / (down.norm() * m.coords.norm())
    }

    /// Cosine between the face normal and the direction from the face to the
    /// camera.
    pub fn frontality(&self) -> f64 {
        let g = self.centroid().coords;
        -self.normal.dot(&g) / g.norm()
    }
}

/// Distance from the camera center to the nose bottom, in cm.
pub fn face_distance(pose: &FacePose) -> f64 {
    pose.c.coords.norm()
}

pub(crate) fn conics_from_rays(
    ua: &Vector3<f64>,
    ub: &Vector3<f64>,
    uc: &Vector3<f64>,
    ratio_r: f64,
) -> (BivariateQuadratic, BivariateQuadratic) {
    let (aa, bb, cc) = (ua.dot(ua), ub.dot(ub), uc.dot(uc));
    let (ac, bc, ab) = (ua.dot(uc), ub.dot(uc), ua.dot(ub));
    let r2 = ratio_r * ratio_r;
    // |αa - c|² - |βb - c|²
    let f = BivariateQuadratic::new(aa, 0.0, -bb, -2.0 * ac, 2.0 * bc, 0.0);
    // |αa - βb|² - r²|αa - c|²
    let g = BivariateQuadratic::new(
        (1.0 - r2) * aa,
        -2.0 * ab,
        bb,
        2.0 * r2 * ac,
        0.0,
        -r2 * cc,
    );
    (f, g)
}

/// The two face-model constraints as conics in the eye scales `(α, β)` with
/// the nose scale fixed to one:
///
/// * `f = |α·ua - uc|² - |β·ub - uc|²` (equal eye–nose distances)
/// * `g = |α·ua - β·ub|² - r²·|α·ua - uc|²` (eye distance ratio)
pub fn build_constraint_conics(
    k: &CameraIntrinsics,
    obs: &FaceObservation,
    model: &FaceModel,
) -> Result<(BivariateQuadratic, BivariateQuadratic)> {
    let ua = k.ray(obs.glint_a);
    let ub = k.ray(obs.glint_b);
    let uc = k.ray(obs.nose_c);
    let volume = ua.dot(&ub.cross(&uc)).abs();
    if volume <= 1e-12 * ua.norm() * ub.norm() * uc.norm() {
        return Err(Error::DegenerateObservation(
            "the three optical rays are coplanar".into(),
        ));
    }
    Ok(conics_from_rays(&ua, &ub, &uc, model.ratio_r))
}

fn pose_from_scales(
    ua: &Vector3<f64>,
    ub: &Vector3<f64>,
    uc: &Vector3<f64>,
    alpha: f64,
    beta: f64,
    model: &FaceModel,
) -> Option<FacePose> {
    let a0 = ua * alpha;
    let b0 = ub * beta;
    let gamma = model.inter_eye_cm / (a0 - b0).norm();
    if !gamma.is_finite() || gamma <= 0.0 {
        return None;
    }
    let a = Point3::from(a0 * gamma);
    let b = Point3::from(b0 * gamma);
    let c = Point3::from(uc * gamma);
    let mut n = (b - a).cross(&(c - a));
    let centroid = a.coords + b.coords + c.coords;
    if n.dot(&centroid) > 0.0 {
        n = -n;
    }
    let normal = Unit::try_new(n, 0.0)?;
    Some(FacePose {
        a,
        b,
        c,
        alpha,
        beta,
        gamma,
        normal,
    })
}

/// Every pose consistent with the observation: real solutions of the
/// constraint conics with both eyes in front of the camera and the face
/// normal (oriented toward the camera) pointing along `-z`.
pub fn pose_candidates(
    k: &CameraIntrinsics,
    obs: &FaceObservation,
    model: &FaceModel,
) -> Result<Vec<FacePose>> {
    let (f, g) = build_constraint_conics(k, obs, model)?;
    let ua = k.ray(obs.glint_a);
    let ub = k.ray(obs.glint_b);
    let uc = k.ray(obs.nose_c);
    let solutions = intersect_conics(&f, &g)?;
    log::debug!("conic system has {} real solutions", solutions.len());
    Ok(solutions
        .into_iter()
        .filter(|&(alpha, beta)| alpha > 0.0 && beta > 0.0)
        .filter_map(|(alpha, beta)| pose_from_scales(&ua, &ub, &uc, alpha, beta, model))
        .filter(|p| p.normal.z < 0.0)
        .collect())
}

/// Candidates whose nose tilt is within this margin of the largest are
/// compared on frontality instead.
pub const NOSE_TILT_TIE: f64 = 0.05;

/// Picks one pose out of the admissible candidates.
///
/// The conic system has a two-fold ambiguity much like three-point
/// resection: a tilted triangle and its mirror image about the line of sight
/// project to the same three pixels. The rule prefers the candidate whose nose
/// bottom leans away from the camera the most; candidates within
/// [`NOSE_TILT_TIE`] of that are decided by frontality, which resolves the
/// four-fold degenerate case of a face squarely facing the camera.
pub fn select_pose(candidates: &[FacePose]) -> Result<FacePose> {
    let best_tilt = candidates
        .iter()
        .map(FacePose::nose_tilt)
        .fold(f64::NEG_INFINITY, f64::max);
    if !best_tilt.is_finite() {
        return Err(Error::Unsolvable);
    }
    let mut tied: Vec<&FacePose> = candidates
        .iter()
        .filter(|p| p.nose_tilt() >= best_tilt - NOSE_TILT_TIE)
        .collect();
    tied.sort_by(|x, y| y.frontality().total_cmp(&x.frontality()));
    let top = tied[0].frontality();
    let mut equal: Vec<FacePose> = vec![*tied[0]];
    for p in &tied[1..] {
        if top - p.frontality() > 1e-9 {
            break;
        }
        let distinct = equal
            .iter()
            .all(|q| (q.a - p.a).norm() + (q.b - p.b).norm() > 1e-6);
        if distinct {
            equal.push(**p);
        }
    }
    if equal.len() > 1 {
        return Err(Error::Ambiguous { candidates: equal });
    }
    Ok(*tied[0])
}

/// Recovers the 3D eye and nose points from a single observation.
pub fn solve_pose(
    k: &CameraIntrinsics,
    obs: &FaceObservation,
    model: &FaceModel,
) -> Result<FacePose> {
    let candidates = pose_candidates(k, obs, model)?;
    if candidates.is_empty() {
        return Err(Error::Unsolvable);
    }
    select_pose(&candidates)
}
