//! Synthetic scenes: model-conforming faces placed in front of the camera and
//! a numeric forward model of the corneal reflection.

use nalgebra::{Rotation3, Vector3};
use rand::Rng;

use crate::error::Result;
use crate::geometry::{CameraIntrinsics, Point3};
use crate::pose::{FaceModel, FaceObservation};

/// Three face points in the camera frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticFace {
    pub a: Point3,
    pub b: Point3,
    pub c: Point3,
}

impl SyntheticFace {
    /// Eyes at `(∓d/2, 0, depth)`, nose bottom straight below them in the
    /// same fronto-parallel plane.
    pub fn frontal(model: &FaceModel, depth_cm: f64) -> Self {
        let half = model.inter_eye_cm / 2.0;
        SyntheticFace {
            a: Point3::new(-half, 0.0, depth_cm),
            b: Point3::new(half, 0.0, depth_cm),
            c: Point3::new(0.0, model.nose_height_cm(), depth_cm),
        }
    }

    /// Places the eye midpoint at `eye_midpoint` with the face turned toward
    /// the camera, then applies yaw (about the face's vertical axis), pitch
    /// (about the eye axis; positive moves the nose away from the camera) and
    /// roll (about the line of sight). Angles in degrees.
    pub fn facing_camera(
        model: &FaceModel,
        eye_midpoint: Point3,
        yaw_deg: f64,
        pitch_deg: f64,
        roll_deg: f64,
    ) -> Self {
        let away = eye_midpoint.coords.normalize();
        let right = Vector3::y().cross(&away).normalize();
        let down = away.cross(&right);
        let frame = nalgebra::Matrix3::from_columns(&[right, down, away]);
        let rot = Rotation3::from_axis_angle(&Vector3::z_axis(), roll_deg.to_radians())
            * Rotation3::from_axis_angle(&Vector3::y_axis(), yaw_deg.to_radians())
            * Rotation3::from_axis_angle(&Vector3::x_axis(), pitch_deg.to_radians());
        let half = model.inter_eye_cm / 2.0;
        let place = |local: Vector3<f64>| eye_midpoint + frame * (rot * local);
        SyntheticFace {
            a: place(Vector3::new(-half, 0.0, 0.0)),
            b: place(Vector3::new(half, 0.0, 0.0)),
            c: place(Vector3::new(0.0, model.nose_height_cm(), 0.0)),
        }
    }

    /// A random face inside the region where pose selection is unambiguous:
    /// depth in `[min_depth, max_depth]`, within the central field of view,
    /// yaw up to 40°, roll up to 30°, nose tilted away from the camera by
    /// 10°–50°, and face normal within 60° of the optical axis.
    pub fn random_admissible<R: Rng + ?Sized>(
        model: &FaceModel,
        rng: &mut R,
        min_depth: f64,
        max_depth: f64,
    ) -> Self {
        loop {
            let z = rng.random_range(min_depth..=max_depth);
            let mid = Point3::new(
                rng.random_range(-0.25..0.25) * z,
                rng.random_range(-0.2..0.2) * z,
                z,
            );
            let face = Self::facing_camera(
                model,
                mid,
                rng.random_range(-40.0..40.0),
                rng.random_range(10.0..50.0),
                rng.random_range(-30.0..30.0),
            );
            if face.normal().z <= -0.5 {
                return face;
            }
        }
    }

    /// Completes a face from two given eye points: the nose bottom goes below
    /// their midpoint at the model height for the eyes' actual distance,
    /// tilted away from the camera by `pitch_deg`.
    pub fn from_eyes(a: Point3, b: Point3, ratio_r: f64, pitch_deg: f64) -> Self {
        let d = (b - a).norm();
        let model = FaceModel {
            inter_eye_cm: d,
            ratio_r,
        };
        let right = (b - a) / d;
        let mid = Point3::from((a.coords + b.coords) / 2.0);
        let away = mid.coords - right * right.dot(&mid.coords);
        let away = away.normalize();
        let down = away.cross(&right);
        let (s, c) = pitch_deg.to_radians().sin_cos();
        SyntheticFace {
            a,
            b,
            c: mid + (down * c + away * s) * model.nose_height_cm(),
        }
    }

    pub fn translated(&self, t: &Vector3<f64>) -> Self {
        SyntheticFace {
            a: self.a + t,
            b: self.b + t,
            c: self.c + t,
        }
    }

    /// Unit normal of the face plane, oriented toward the camera.
    pub fn normal(&self) -> Vector3<f64> {
        let n = (self.b - self.a).cross(&(self.c - self.a)).normalize();
        let centroid = self.a.coords + self.b.coords + self.c.coords;
        if n.dot(&centroid) > 0.0 {
            -n
        } else {
            n
        }
    }

    pub fn observe(&self, k: &CameraIntrinsics) -> Result<FaceObservation> {
        FaceObservation::project(k, &self.a, &self.b, &self.c)
    }

    pub fn points(&self) -> [Point3; 3] {
        [self.a, self.b, self.c]
    }
}

/// The point of a sphere where light from `led` is mirrored into a camera at
/// the origin, found by bisection on the reflection angle condition. Returns
/// the surface point and its outward normal.
pub fn reflection_point(center: &Point3, radius: f64, led: &Point3) -> (Point3, Vector3<f64>) {
    let to_cam = (-center.coords).normalize();
    let to_led = led - center;
    let across = to_led - to_cam * to_led.dot(&to_cam);
    if across.norm() <= 1e-15 * to_led.norm() {
        return (center + to_cam * radius, to_cam);
    }
    let across = across.normalize();
    let theta_led = to_led.dot(&across).atan2(to_led.dot(&to_cam));
    let angle = |u: &Vector3<f64>, v: &Vector3<f64>| u.cross(v).norm().atan2(u.dot(v));
    let mismatch = |theta: f64| {
        let n = to_cam * theta.cos() + across * theta.sin();
        let g = center + n * radius;
        angle(&n, &(led - g)) - angle(&n, &(-g.coords))
    };
    let (mut lo, mut hi) = (0.0, theta_led);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mismatch(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    let n = to_cam * theta.cos() + across * theta.sin();
    (center + n * radius, n)
}
