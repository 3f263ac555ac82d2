//! Pinhole camera model and image/space point types.
//!
//! Conventions: pixel origin at the top-left corner with `v` growing downward;
//! camera frame right-handed with the optical axis along `+z`. All 3D lengths
//! are in centimeters.

use nalgebra::{Matrix3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point3 = nalgebra::Point3<f64>;
pub type Direction = Unit<Vector3<f64>>;

/// Internal camera parameters. `K = [[fx, skew, cx], [0, fy, cy], [0, 0, 1]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawIntrinsics")]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub skew: f64,
}

#[derive(Deserialize)]
struct RawIntrinsics {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    #[serde(default)]
    skew: f64,
}

impl TryFrom<RawIntrinsics> for CameraIntrinsics {
    type Error = Error;

    fn try_from(raw: RawIntrinsics) -> Result<Self> {
        CameraIntrinsics::with_skew(raw.fx, raw.fy, raw.cx, raw.cy, raw.skew)
    }
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self> {
        Self::with_skew(fx, fy, cx, cy, 0.0)
    }

    pub fn with_skew(fx: f64, fy: f64, cx: f64, cy: f64, skew: f64) -> Result<Self> {
        let all = [fx, fy, cx, cy, skew];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("camera intrinsics must be finite".into()));
        }
        if fx <= 0.0 || fy <= 0.0 {
            return Err(Error::Config(format!(
                "focal lengths must be positive (fx = {fx}, fy = {fy})"
            )));
        }
        Ok(CameraIntrinsics {
            fx,
            fy,
            cx,
            cy,
            skew,
        })
    }

    /// Square pixels, zero skew, principal point at the center of a
    /// `width` x `height` image.
    pub fn centered(focal_px: f64, width: u32, height: u32) -> Result<Self> {
        Self::new(
            focal_px,
            focal_px,
            f64::from(width) / 2.0,
            f64::from(height) / 2.0,
        )
    }

    pub fn identity() -> Self {
        CameraIntrinsics {
            fx: 1.0,
            fy: 1.0,
            cx: 0.0,
            cy: 0.0,
            skew: 0.0,
        }
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.fx, self.skew, self.cx, //
            0.0, self.fy, self.cy, //
            0.0, 0.0, 1.0,
        )
    }

    pub fn inverse(&self) -> Matrix3<f64> {
        let (fx, fy, s) = (self.fx, self.fy, self.skew);
        Matrix3::new(
            1.0 / fx,
            -s / (fx * fy),
            (s * self.cy - self.cx * fy) / (fx * fy),
            0.0,
            1.0 / fy,
            -self.cy / fy,
            0.0,
            0.0,
            1.0,
        )
    }

    /// `K⁻¹ · [u, v, 1]ᵀ`, not normalized. Its `z` component is always 1, so
    /// the point at scale `s` along it has depth `s`.
    pub fn ray(&self, p: ImagePoint) -> Vector3<f64> {
        let y = (p.v - self.cy) / self.fy;
        let x = (p.u - self.cx - self.skew * y) / self.fx;
        Vector3::new(x, y, 1.0)
    }

    pub fn back_project(&self, p: ImagePoint) -> Direction {
        Unit::new_normalize(self.ray(p))
    }

    pub fn project(&self, point: &Point3) -> Result<ImagePoint> {
        if !(point.z > 0.0) {
            return Err(Error::BehindCamera { z: point.z });
        }
        let x = point.x / point.z;
        let y = point.y / point.z;
        Ok(ImagePoint::new(
            self.fx * x + self.skew * y + self.cx,
            self.fy * y + self.cy,
        ))
    }

    /// Returns a copy with both focal lengths replaced.
    pub fn with_focal(&self, focal_px: f64) -> Result<Self> {
        Self::with_skew(focal_px, focal_px, self.cx, self.cy, self.skew)
    }
}

/// A pixel position. Serialized as `[u, v]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct ImagePoint {
    pub u: f64,
    pub v: f64,
}

impl ImagePoint {
    pub const fn new(u: f64, v: f64) -> Self {
        ImagePoint { u, v }
    }

    pub fn distance(&self, other: &ImagePoint) -> f64 {
        (self.u - other.u).hypot(self.v - other.v)
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }

    pub fn offset(&self, du: f64, dv: f64) -> ImagePoint {
        ImagePoint::new(self.u + du, self.v + dv)
    }
}

impl From<[f64; 2]> for ImagePoint {
    fn from([u, v]: [f64; 2]) -> Self {
        ImagePoint { u, v }
    }
}

impl From<ImagePoint> for [f64; 2] {
    fn from(p: ImagePoint) -> Self {
        [p.u, p.v]
    }
}

/// A half-line with unit direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray3 {
    pub origin: Point3,
    pub direction: Direction,
}

impl Ray3 {
    pub fn new(origin: Point3, direction: Vector3<f64>) -> Result<Self> {
        let norm = direction.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::DegenerateGeometry("ray direction has zero length".into()));
        }
        Ok(Ray3 {
            origin,
            direction: Unit::new_unchecked(direction / norm),
        })
    }

    pub fn at(&self, t: f64) -> Point3 {
        self.origin + self.direction.into_inner() * t
    }

    /// Shortest distance between this ray's supporting line and `p`.
    pub fn distance_to(&self, p: &Point3) -> f64 {
        (p - self.origin).cross(&self.direction).norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference_camera() -> CameraIntrinsics {
        CameraIntrinsics::new(4000.0, 4000.0, 696.0, 520.0).unwrap()
    }

    #[test]
    fn identity_principal_ray() {
        let d = CameraIntrinsics::identity().back_project(ImagePoint::new(0.0, 0.0));
        assert_relative_eq!(d.into_inner(), Vector3::z(), epsilon = 1e-15);
    }

    #[test]
    fn off_axis_ray() {
        let k = CameraIntrinsics::new(4000.0, 4000.0, 0.0, 0.0).unwrap();
        let d = k.back_project(ImagePoint::new(4000.0, 0.0));
        let expected = Vector3::new(1.0, 0.0, 1.0).normalize();
        assert_relative_eq!(d.into_inner(), expected, epsilon = 1e-15);
    }

    #[test]
    fn principal_point_maps_to_axis() {
        let d = reference_camera().back_project(ImagePoint::new(696.0, 520.0));
        assert_relative_eq!(d.into_inner(), Vector3::z(), epsilon = 1e-15);
    }

    #[test]
    fn inverse_matches_matrix() {
        let k = CameraIntrinsics::with_skew(3900.0, 4100.0, 700.0, 510.0, 3.5).unwrap();
        let prod = k.matrix() * k.inverse();
        assert_relative_eq!(prod, Matrix3::identity(), epsilon = 1e-12);
        let p = ImagePoint::new(123.0, 987.0);
        let via_matrix = k.inverse() * Vector3::new(p.u, p.v, 1.0);
        assert_relative_eq!(k.ray(p), via_matrix, epsilon = 1e-12);
    }

    #[test]
    fn project_examples() {
        let p = CameraIntrinsics::identity()
            .project(&Point3::new(0.0, 0.0, 60.0))
            .unwrap();
        assert_eq!(p, ImagePoint::new(0.0, 0.0));

        let k = CameraIntrinsics::new(4000.0, 4000.0, 0.0, 0.0).unwrap();
        let p = k.project(&Point3::new(3.25, 0.0, 60.0)).unwrap();
        assert_relative_eq!(p.u, 4000.0 * 3.25 / 60.0, epsilon = 1e-12);
        assert_relative_eq!(p.u, 216.666_666_666_666_66, epsilon = 1e-9);
        assert_eq!(p.v, 0.0);
    }

    #[test]
    fn behind_camera_rejected() {
        let err = reference_camera().project(&Point3::new(0.0, 0.0, -1.0));
        assert!(matches!(err, Err(Error::BehindCamera { .. })));
        assert!(reference_camera().project(&Point3::new(1.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn invalid_intrinsics() {
        assert!(CameraIntrinsics::new(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(CameraIntrinsics::new(1.0, -1.0, 0.0, 0.0).is_err());
        assert!(CameraIntrinsics::new(f64::NAN, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let k: CameraIntrinsics =
            serde_json::from_str(r#"{ "fx": 4000, "fy": 4000, "cx": 696, "cy": 520 }"#).unwrap();
        assert_eq!(k, reference_camera());
        let bad = serde_json::from_str::<CameraIntrinsics>(
            r#"{ "fx": -1, "fy": 4000, "cx": 696, "cy": 520, "skew": 0 }"#,
        );
        assert!(bad.is_err());
        let p: ImagePoint = serde_json::from_str("[1.5, 2.5]").unwrap();
        assert_eq!(p, ImagePoint::new(1.5, 2.5));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn project_back_project_parallel(
                fx in 100.0..8000.0f64, fy in 100.0..8000.0f64,
                cx in -500.0..1500.0f64, cy in -500.0..1500.0f64, skew in -5.0..5.0f64,
                x in -100.0..100.0f64, y in -100.0..100.0f64, z in 1.0..300.0f64,
            ) {
                let k = CameraIntrinsics::with_skew(fx, fy, cx, cy, skew).unwrap();
                let p = Point3::new(x, y, z);
                let d = k.back_project(k.project(&p).unwrap());
                prop_assert!((d.norm() - 1.0).abs() < 1e-12);
                let cross = d.cross(&p.coords.normalize());
                prop_assert!(cross.norm() < 1e-10);
                let recovered = d.into_inner() * p.coords.norm();
                prop_assert!((recovered - p.coords).norm() < 1e-9);
            }
        }
    }
}
