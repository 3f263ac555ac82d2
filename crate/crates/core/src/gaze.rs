//! Gaze line from a glint, the LED position and the pupil image.
//!
//! The cornea is a sphere. The glint is the surface point whose normal bisects
//! the directions toward the LED and toward the camera, so the cornea center
//! sits one radius behind the glint along that bisector. The pupil center lies
//! on a smaller sphere around the cornea center and on its optical ray; the
//! gaze runs from the cornea center through the pupil center.
//!
//! The glint's depth comes from the face pose, where the glint stands in for
//! the eye center. Both uses are approximations of the same point.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, ImagePoint, Point3, Ray3};
use crate::pose::{FaceObservation, FacePose};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEyeGeometry")]
pub struct EyeGeometry {
    pub cornea_radius_cm: f64,
    pub pupil_cornea_dist_cm: f64,
}

#[derive(Deserialize)]
struct RawEyeGeometry {
    #[serde(default = "EyeGeometry::default_cornea_radius")]
    cornea_radius_cm: f64,
    #[serde(default = "EyeGeometry::default_pupil_distance")]
    pupil_cornea_dist_cm: f64,
}

impl TryFrom<RawEyeGeometry> for EyeGeometry {
    type Error = Error;

    fn try_from(raw: RawEyeGeometry) -> Result<Self> {
        EyeGeometry::new(raw.cornea_radius_cm, raw.pupil_cornea_dist_cm)
    }
}

impl Default for EyeGeometry {
    fn default() -> Self {
        EyeGeometry {
            cornea_radius_cm: Self::default_cornea_radius(),
            pupil_cornea_dist_cm: Self::default_pupil_distance(),
        }
    }
}

impl EyeGeometry {
    fn default_cornea_radius() -> f64 {
        0.77
    }

    fn default_pupil_distance() -> f64 {
        0.45
    }

    pub fn new(cornea_radius_cm: f64, pupil_cornea_dist_cm: f64) -> Result<Self> {
        if !(cornea_radius_cm > 0.0 && cornea_radius_cm.is_finite()) {
            return Err(Error::Config(format!(
                "cornea radius must be positive, got {cornea_radius_cm}"
            )));
        }
        if !(pupil_cornea_dist_cm > 0.0 && pupil_cornea_dist_cm < 2.0 * cornea_radius_cm) {
            return Err(Error::Config(format!(
                "pupil-cornea distance must lie in (0, {}), got {pupil_cornea_dist_cm}",
                2.0 * cornea_radius_cm
            )));
        }
        Ok(EyeGeometry {
            cornea_radius_cm,
            pupil_cornea_dist_cm,
        })
    }
}

/// Illuminator position in the camera frame. JSON: `{ "led": [x, y, z] }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLed")]
pub struct LedConfig {
    #[serde(rename = "led")]
    pub position: Point3,
}

#[derive(Deserialize)]
struct RawLed {
    led: [f64; 3],
}

impl TryFrom<RawLed> for LedConfig {
    type Error = Error;

    fn try_from(raw: RawLed) -> Result<Self> {
        LedConfig::new(Point3::new(raw.led[0], raw.led[1], raw.led[2]))
    }
}

impl LedConfig {
    pub fn new(position: Point3) -> Result<Self> {
        if !position.iter().all(|c| c.is_finite()) {
            return Err(Error::Config("LED position must be finite".into()));
        }
        if position.coords.norm() == 0.0 {
            return Err(Error::Config("LED cannot sit at the camera center".into()));
        }
        Ok(LedConfig { position })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeResult {
    pub cornea_center: Point3,
    pub pupil_center: Point3,
    pub gaze: Ray3,
}

/// Center of the corneal sphere behind a 3D glint.
pub fn cornea_center(glint: &Point3, led: &LedConfig, eye: &EyeGeometry) -> Result<Point3> {
    let to_led = led.position - glint;
    let to_cam = -glint.coords;
    if to_led.norm() == 0.0 || to_cam.norm() == 0.0 {
        return Err(Error::DegenerateGeometry(
            "glint coincides with the LED or the camera center".into(),
        ));
    }
    let bisector = to_led.normalize() + to_cam.normalize();
    let len = bisector.norm();
    if len <= 1e-12 {
        return Err(Error::DegenerateGeometry(
            "LED and camera are in opposite directions from the glint".into(),
        ));
    }
    Ok(glint - bisector * (eye.cornea_radius_cm / len))
}

/// Scale of the discriminant below which a ray is read as tangent.
pub const TANGENT_TOLERANCE: f64 = 1e-12;

/// Pupil center: the first intersection of the pupil's optical ray with the
/// sphere of radius `pupil_cornea_dist_cm` around the cornea center.
pub fn pupil_center(
    k: &CameraIntrinsics,
    pupil: ImagePoint,
    cornea: &Point3,
    eye: &EyeGeometry,
) -> Result<Point3> {
    let dir = k.back_project(pupil).into_inner();
    let radius = eye.pupil_cornea_dist_cm;
    let b = dir.dot(&cornea.coords);
    let c = cornea.coords.norm_squared() - radius * radius;
    let mut disc = b * b - c;
    if disc < 0.0 {
        if disc >= -TANGENT_TOLERANCE * cornea.coords.norm_squared() {
            disc = 0.0;
        } else {
            let miss = (cornea.coords.norm_squared() - b * b).max(0.0).sqrt() - radius;
            return Err(Error::RayMissesSphere { miss_cm: miss });
        }
    }
    let root = disc.sqrt();
    let far = b + root;
    if far < 0.0 {
        return Err(Error::BehindCamera { z: far * dir.z });
    }
    // near = b - root, computed without cancellation
    let near = if far > 0.0 { c / far } else { 0.0 };
    let t = if near > 0.0 { near } else { far };
    Ok(Point3::from(dir * t))
}

/// Cornea center, pupil center and gaze ray for one eye. `glint_scale` is the
/// depth of the glint along `K⁻¹·glint` as recovered by the pose solver.
pub fn gaze_for_eye(
    k: &CameraIntrinsics,
    glint: ImagePoint,
    pupil: ImagePoint,
    glint_scale: f64,
    led: &LedConfig,
    eye: &EyeGeometry,
) -> Result<GazeResult> {
    if !(glint_scale > 0.0 && glint_scale.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "glint scale must be positive, got {glint_scale}"
        )));
    }
    let glint3d = Point3::from(k.ray(glint) * glint_scale);
    let cornea = cornea_center(&glint3d, led, eye)?;
    let pupil3d = pupil_center(k, pupil, &cornea, eye)?;
    let gaze = Ray3::new(cornea, pupil3d - cornea)?;
    Ok(GazeResult {
        cornea_center: cornea,
        pupil_center: pupil3d,
        gaze,
    })
}

/// Pupil image positions for the eyes behind `glint_a` and `glint_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PupilObservation {
    pub pupil_a: ImagePoint,
    pub pupil_b: ImagePoint,
}

/// Gaze for both eyes of a solved face. Each eye succeeds or fails on its own.
pub fn gaze_for_pose(
    k: &CameraIntrinsics,
    pose: &FacePose,
    obs: &FaceObservation,
    pupils: &PupilObservation,
    led: &LedConfig,
    eye: &EyeGeometry,
) -> [Result<GazeResult>; 2] {
    [
        gaze_for_eye(k, obs.glint_a, pupils.pupil_a, pose.scale_a(), led, eye),
        gaze_for_eye(k, obs.glint_b, pupils.pupil_b, pose.scale_b(), led, eye),
    ]
}

/// Angle between `glint - center` and the directions toward the LED and the
/// camera; the two are equal for a mirror reflection.
pub fn reflection_angles(glint: &Point3, center: &Point3, led: &Point3) -> (f64, f64) {
    let n = glint - center;
    let angle = |v: Vector3<f64>| n.cross(&v).norm().atan2(n.dot(&v));
    (angle(led - glint), angle(-glint.coords))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn led(x: f64, y: f64, z: f64) -> LedConfig {
        LedConfig::new(Point3::new(x, y, z)).unwrap()
    }

    #[test]
    fn validation() {
        assert!(EyeGeometry::new(0.77, 1.6).is_err());
        assert!(EyeGeometry::new(-1.0, 0.45).is_err());
        assert!(LedConfig::new(Point3::origin()).is_err());
        let l: LedConfig = serde_json::from_str(r#"{ "led": [10, -5, 0] }"#).unwrap();
        assert_eq!(l.position, Point3::new(10.0, -5.0, 0.0));
        let e: EyeGeometry = serde_json::from_str("{}").unwrap();
        assert_eq!(e, EyeGeometry::default());
    }

    #[test]
    fn coaxial_led_puts_center_on_camera_ray() {
        let glint = Point3::new(2.0, 1.0, 60.0);
        // LED just in front of the camera on the same ray
        let l = led(2.0 * 1e-6, 1.0 * 1e-6, 60.0 * 1e-6);
        let eye = EyeGeometry::default();
        let c = cornea_center(&glint, &l, &eye).unwrap();
        let expected = glint + glint.coords.normalize() * eye.cornea_radius_cm;
        assert_relative_eq!(c, expected, epsilon = 1e-9);
    }

    #[test]
    fn symmetric_led_keeps_center_on_axis() {
        let glint = Point3::new(0.0, 0.0, 50.0);
        let c = cornea_center(&glint, &led(0.0, 0.0, -5.0), &EyeGeometry::default());
        // LED behind the camera on the axis: u and v coincide
        let c = c.unwrap();
        assert_relative_eq!(c, Point3::new(0.0, 0.0, 50.77), epsilon = 1e-12);
    }

    #[test]
    fn antipodal_directions_are_degenerate() {
        let glint = Point3::new(0.0, 0.0, 50.0);
        let res = cornea_center(&glint, &led(0.0, 0.0, 100.0), &EyeGeometry::default());
        assert!(matches!(res, Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn pupil_on_axis() {
        let k = CameraIntrinsics::identity();
        let p = pupil_center(&k, ImagePoint::new(0.0, 0.0), &Point3::new(0.0, 0.0, 60.0), &EyeGeometry::default())
            .unwrap();
        assert_relative_eq!(p, Point3::new(0.0, 0.0, 59.55), epsilon = 1e-12);
    }

    #[test]
    fn tangent_ray_returns_single_point() {
        let k = CameraIntrinsics::identity();
        let eye = EyeGeometry::default();
        // sphere of radius 0.45 centered at (0.45, 0, 60) touches the optical axis
        let p = pupil_center(&k, ImagePoint::new(0.0, 0.0), &Point3::new(0.45, 0.0, 60.0), &eye).unwrap();
        assert_relative_eq!(p, Point3::new(0.0, 0.0, 60.0), epsilon = 1e-6);
    }

    #[test]
    fn missing_ray_reports_distance() {
        let k = CameraIntrinsics::identity();
        let res = pupil_center(&k, ImagePoint::new(0.0, 0.0), &Point3::new(1.0, 0.0, 60.0), &EyeGeometry::default());
        match res {
            Err(Error::RayMissesSphere { miss_cm }) => assert_relative_eq!(miss_cm, 0.55, epsilon = 1e-9),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sphere_behind_camera() {
        let k = CameraIntrinsics::identity();
        let res = pupil_center(&k, ImagePoint::new(0.0, 0.0), &Point3::new(0.0, 0.0, -60.0), &EyeGeometry::default());
        assert!(matches!(res, Err(Error::BehindCamera { .. })));
    }

    #[test]
    fn pupil_round_trip() {
        let k = CameraIntrinsics::new(4000.0, 4000.0, 696.0, 520.0).unwrap();
        let eye = EyeGeometry::default();
        let cornea = Point3::new(-3.0, 1.5, 58.0);
        let gaze = Vector3::new(0.2, -0.1, -1.0).normalize();
        let pupil = cornea + gaze * eye.pupil_cornea_dist_cm;
        let img = k.project(&pupil).unwrap();
        let p = pupil_center(&k, img, &cornea, &eye).unwrap();
        assert!((p - pupil).norm() < 1e-9);
    }

    #[test]
    fn looking_at_camera() {
        let k = CameraIntrinsics::new(4000.0, 4000.0, 696.0, 520.0).unwrap();
        let eye = EyeGeometry::default();
        let l = led(5.0, 8.0, 0.0);
        let cornea = Point3::new(2.0, -1.0, 62.0);
        let (glint, _) = crate::synthetic::reflection_point(&cornea, eye.cornea_radius_cm, &l.position);
        let pupil = cornea - cornea.coords.normalize() * eye.pupil_cornea_dist_cm;
        let res = gaze_for_eye(
            &k,
            k.project(&glint).unwrap(),
            k.project(&pupil).unwrap(),
            glint.z,
            &l,
            &eye,
        )
        .unwrap();
        let expected = -cornea.coords.normalize();
        let angle = res.gaze.direction.angle(&expected);
        assert!(angle < 1e-6, "angle {angle}");
        assert_eq!(res.gaze.origin, res.cornea_center);
    }

    mod props {
        use super::*;
        use crate::synthetic::reflection_point;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(128))]

            #[test]
            fn cornea_center_inverts_reflection(
                x in -20.0..20.0f64, y in -15.0..15.0f64, z in 30.0..120.0f64,
                lx in -25.0..25.0f64, ly in -25.0..25.0f64, lz in -5.0..5.0f64,
                radius in 0.6..1.0f64,
            ) {
                prop_assume!(lx.abs() + ly.abs() > 0.5);
                let center = Point3::new(x, y, z);
                let led = LedConfig::new(Point3::new(lx, ly, lz)).unwrap();
                let eye = EyeGeometry::new(radius, 0.45).unwrap();
                let glint = reflection_point(&center, radius, &led.position).0;
                let c = cornea_center(&glint, &led, &eye).unwrap();
                prop_assert!((c - center).norm() < 1e-9);
                let (a, b) = reflection_angles(&glint, &c, &led.position);
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
