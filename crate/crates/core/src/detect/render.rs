//! Synthetic face images for exercising the detector.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::image::GrayImage;
use crate::error::Result;
use crate::geometry::ImagePoint;

const SUPERSAMPLE: usize = 8;

/// A filled disk drawn with anti-aliased edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: ImagePoint,
    pub radius: f64,
    pub intensity: u8,
}

/// Image description: a flat background with disks painted in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub width: usize,
    pub height: usize,
    pub background: u8,
    pub disks: Vec<Disk>,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub noise_seed: u64,
}

/// Where the features of a rendered face ended up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceLayout {
    pub glint_a: ImagePoint,
    pub glint_b: ImagePoint,
    pub pupil_a: ImagePoint,
    pub pupil_b: ImagePoint,
    pub nostril_a: ImagePoint,
    pub nostril_b: ImagePoint,
}

/// Size of the canonical fixture image.
pub const CANONICAL_WIDTH: usize = 1392;
pub const CANONICAL_HEIGHT: usize = 1040;

impl FaceLayout {
    /// A slightly turned face about 75 cm from a 4000 px camera centered in a
    /// 1392 x 1040 image. Every disk is centered on a pixel, so noise-free
    /// detection recovers the points exactly.
    pub fn canonical() -> Self {
        FaceLayout {
            glint_a: ImagePoint::new(606.0, 458.0),
            glint_b: ImagePoint::new(949.0, 476.0),
            pupil_a: ImagePoint::new(608.0, 459.0),
            pupil_b: ImagePoint::new(951.0, 477.0),
            nostril_a: ImagePoint::new(736.0, 702.0),
            nostril_b: ImagePoint::new(822.0, 706.0),
        }
    }

    /// Glints at the given points, pupils offset by `pupil_offset` in the
    /// frame of the glint pair, nostrils straddling `nose` along the pair
    /// axis at a quarter of the glint separation each.
    pub fn new(glint_a: ImagePoint, glint_b: ImagePoint, nose: ImagePoint, pupil_offset: (f64, f64)) -> Self {
        let (du, dv) = (glint_b.u - glint_a.u, glint_b.v - glint_a.v);
        let sep = du.hypot(dv);
        let (ax, ay) = (du / sep, dv / sep);
        let (ox, oy) = pupil_offset;
        let pupil = |g: ImagePoint| g.offset(ox * ax - oy * ay, ox * ay + oy * ax);
        let half = 0.25 * sep / 2.0;
        FaceLayout {
            glint_a,
            glint_b,
            pupil_a: pupil(glint_a),
            pupil_b: pupil(glint_b),
            nostril_a: nose.offset(-half * ax, -half * ay),
            nostril_b: nose.offset(half * ax, half * ay),
        }
    }

    pub fn nose(&self) -> ImagePoint {
        ImagePoint::new(
            0.5 * (self.nostril_a.u + self.nostril_b.u),
            0.5 * (self.nostril_a.v + self.nostril_b.v),
        )
    }

    pub fn points(&self) -> [ImagePoint; 6] {
        [
            self.glint_a,
            self.glint_b,
            self.pupil_a,
            self.pupil_b,
            self.nostril_a,
            self.nostril_b,
        ]
    }

    pub fn map(&self, f: impl Fn(ImagePoint) -> ImagePoint) -> Self {
        FaceLayout {
            glint_a: f(self.glint_a),
            glint_b: f(self.glint_b),
            pupil_a: f(self.pupil_a),
            pupil_b: f(self.pupil_b),
            nostril_a: f(self.nostril_a),
            nostril_b: f(self.nostril_b),
        }
    }

    pub fn translated(&self, du: f64, dv: f64) -> Self {
        self.map(|p| p.offset(du, dv))
    }

    /// Rotation about `center` by `deg` degrees in image coordinates.
    pub fn rotated(&self, center: ImagePoint, deg: f64) -> Self {
        let (s, c) = deg.to_radians().sin_cos();
        self.map(|p| {
            let (x, y) = (p.u - center.u, p.v - center.v);
            ImagePoint::new(center.u + c * x - s * y, center.v + s * x + c * y)
        })
    }

    /// A scene with skin-gray background, dark pupils and nostrils, and
    /// saturated glints drawn on top of the pupils.
    pub fn scene(&self, width: usize, height: usize) -> Scene {
        let sep = self.glint_a.distance(&self.glint_b);
        let nostril_r = (0.045 * sep).max(3.0);
        let disk = |center, radius, intensity| Disk {
            center,
            radius,
            intensity,
        };
        Scene {
            width,
            height,
            background: 150,
            disks: vec![
                disk(self.pupil_a, 8.0, 20),
                disk(self.pupil_b, 8.0, 20),
                disk(self.nostril_a, nostril_r, 35),
                disk(self.nostril_b, nostril_r, 35),
                disk(self.glint_a, 1.8, 255),
                disk(self.glint_b, 1.8, 255),
            ],
            noise_sigma: 0.0,
            noise_seed: 0,
        }
    }
}

impl Scene {
    pub fn with_noise(mut self, sigma: f64, seed: u64) -> Self {
        self.noise_sigma = sigma;
        self.noise_seed = seed;
        self
    }

    pub fn render(&self) -> Result<GrayImage> {
        let mut buf = vec![f64::from(self.background); self.width * self.height];
        let step = 1.0 / SUPERSAMPLE as f64;
        for d in &self.disks {
            let x0 = (d.center.u - d.radius - 1.0).floor().max(0.0) as usize;
            let y0 = (d.center.v - d.radius - 1.0).floor().max(0.0) as usize;
            let x1 = ((d.center.u + d.radius + 1.0).ceil().max(0.0) as usize).min(self.width - 1);
            let y1 = ((d.center.v + d.radius + 1.0).ceil().max(0.0) as usize).min(self.height - 1);
            let r2 = d.radius * d.radius;
            for y in y0..=y1 {
                for x in x0..=x1 {
                    // pixel (x, y) covers [x - 0.5, x + 0.5]
                    let mut hits = 0usize;
                    for sy in 0..SUPERSAMPLE {
                        let py = y as f64 - 0.5 + (sy as f64 + 0.5) * step - d.center.v;
                        for sx in 0..SUPERSAMPLE {
                            let px = x as f64 - 0.5 + (sx as f64 + 0.5) * step - d.center.u;
                            if px * px + py * py <= r2 {
                                hits += 1;
                            }
                        }
                    }
                    if hits > 0 {
                        let cover = hits as f64 / (SUPERSAMPLE * SUPERSAMPLE) as f64;
                        let p = &mut buf[y * self.width + x];
                        *p = *p * (1.0 - cover) + f64::from(d.intensity) * cover;
                    }
                }
            }
        }
        if self.noise_sigma > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.noise_seed);
            let normal = Normal::new(0.0, self.noise_sigma)
                .map_err(|e| crate::Error::Config(e.to_string()))?;
            for p in &mut buf {
                *p += normal.sample(&mut rng);
            }
        }
        let data = buf.iter().map(|p| p.round().clamp(0.0, 255.0) as u8).collect();
        GrayImage::new(self.width, self.height, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_coverage() {
        let scene = Scene {
            width: 40,
            height: 40,
            background: 0,
            disks: vec![Disk {
                center: ImagePoint::new(20.0, 20.0),
                radius: 8.0,
                intensity: 255,
            }],
            noise_sigma: 0.0,
            noise_seed: 0,
        };
        let img = scene.render().unwrap();
        assert_eq!(img.get(20, 20), 255);
        assert_eq!(img.get(0, 0), 0);
        let total: f64 = img.data().iter().map(|&p| f64::from(p) / 255.0).sum();
        assert!((total - std::f64::consts::PI * 64.0).abs() < 2.0);
    }

    #[test]
    fn layout_geometry() {
        let l = FaceLayout::new(
            ImagePoint::new(100.0, 100.0),
            ImagePoint::new(300.0, 100.0),
            ImagePoint::new(200.0, 240.0),
            (2.0, 1.0),
        );
        assert_eq!(l.pupil_a, ImagePoint::new(102.0, 101.0));
        assert_eq!(l.nose(), ImagePoint::new(200.0, 240.0));
        assert_eq!(l.nostril_a, ImagePoint::new(175.0, 240.0));
        let r = l.rotated(ImagePoint::new(200.0, 100.0), 90.0);
        assert!(r.glint_a.distance(&ImagePoint::new(200.0, 0.0)) < 1e-9);
    }
}
