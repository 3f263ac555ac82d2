//! Glint, pupil and nose detection in grayscale images.
//!
//! Glints are small saturated blobs; candidate pairs are filtered by
//! separation and tilt. Each glint of a pair must have a dark pupil close by.
//! The nose bottom is the midpoint between the nostrils, searched in a
//! rectangle below the eyes that follows the orientation of the glint pair.

mod blob;
mod image;
pub mod render;

pub use blob::{components, Blob, BoundingBox};
pub use image::GrayImage;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaze::PupilObservation;
use crate::geometry::ImagePoint;
use crate::pose::FaceObservation;

/// Thresholds and ranges of the detector. Missing JSON fields take defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionParams {
    pub glint_threshold: u8,
    pub glint_min_area: usize,
    pub glint_max_area: usize,
    pub pair_min_distance: f64,
    pub pair_max_distance: f64,
    /// Largest tilt of the glint pair from horizontal, degrees.
    pub pair_max_angle_deg: f64,
    pub pupil_threshold: u8,
    pub pupil_search_radius: f64,
    pub pupil_min_area: usize,
    pub pupil_max_area: usize,
    /// Nose search rectangle size relative to the glint separation.
    pub nose_region_scale: f64,
    pub nostril_threshold: u8,
    /// Nostril area range as fractions of the squared glint separation.
    pub nostril_min_area_frac: f64,
    pub nostril_max_area_frac: f64,
    /// Nostril spacing range as fractions of the glint separation.
    pub nostril_min_spacing: f64,
    pub nostril_max_spacing: f64,
    /// Largest angle between the nostril axis and the glint axis, degrees.
    pub nostril_max_angle_deg: f64,
    pub nostril_max_elongation: f64,
}

impl Default for DetectionParams {
    fn default() -> Self {
        DetectionParams {
            glint_threshold: 250,
            glint_min_area: 2,
            glint_max_area: 50,
            pair_min_distance: 60.0,
            pair_max_distance: 400.0,
            pair_max_angle_deg: 25.0,
            pupil_threshold: 60,
            pupil_search_radius: 25.0,
            pupil_min_area: 10,
            pupil_max_area: 1200,
            nose_region_scale: 1.0,
            nostril_threshold: 70,
            nostril_min_area_frac: 0.0005,
            nostril_max_area_frac: 0.03,
            nostril_min_spacing: 0.1,
            nostril_max_spacing: 0.6,
            nostril_max_angle_deg: 20.0,
            nostril_max_elongation: 3.0,
        }
    }
}

impl DetectionParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.glint_min_area >= 1
            && self.glint_min_area <= self.glint_max_area
            && self.pair_min_distance > 0.0
            && self.pair_min_distance <= self.pair_max_distance
            && (0.0..=90.0).contains(&self.pair_max_angle_deg)
            && self.pupil_search_radius > 0.0
            && self.pupil_min_area <= self.pupil_max_area
            && self.nose_region_scale > 0.0
            && self.nostril_min_area_frac <= self.nostril_max_area_frac
            && self.nostril_min_spacing <= self.nostril_max_spacing
            && (0.0..=90.0).contains(&self.nostril_max_angle_deg)
            && self.nostril_max_elongation >= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config("inconsistent detection parameters".into()))
        }
    }
}

/// A candidate glint pair, `left` having the smaller `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlintPair {
    pub left: Blob,
    pub right: Blob,
}

impl GlintPair {
    pub fn separation(&self) -> f64 {
        self.left.centroid.distance(&self.right.centroid)
    }

    /// Tilt of the pair axis from horizontal, degrees in `[0, 90]`.
    pub fn tilt_deg(&self) -> f64 {
        let (a, b) = (self.left.centroid, self.right.centroid);
        (b.v - a.v).abs().atan2((b.u - a.u).abs()).to_degrees()
    }

    pub fn midpoint(&self) -> ImagePoint {
        let (a, b) = (self.left.centroid, self.right.centroid);
        ImagePoint::new(0.5 * (a.u + b.u), 0.5 * (a.v + b.v))
    }

    /// Unit vector from `left` to `right`.
    pub fn axis(&self) -> (f64, f64) {
        let (a, b) = (self.left.centroid, self.right.centroid);
        let s = self.separation();
        ((b.u - a.u) / s, (b.v - a.v) / s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Confidence {
    pub glints: f64,
    pub pupil_a: f64,
    pub pupil_b: f64,
    pub nose: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub glint_a: ImagePoint,
    pub glint_b: ImagePoint,
    pub nose_c: ImagePoint,
    pub pupil_a: ImagePoint,
    pub pupil_b: ImagePoint,
    pub confidence: Confidence,
}

impl DetectionResult {
    pub fn observation(&self) -> Result<FaceObservation> {
        FaceObservation::new(self.glint_a, self.glint_b, self.nose_c)
    }

    pub fn pupils(&self) -> PupilObservation {
        PupilObservation {
            pupil_a: self.pupil_a,
            pupil_b: self.pupil_b,
        }
    }
}

fn full_frame(img: &GrayImage) -> BoundingBox {
    BoundingBox {
        min_x: 0,
        min_y: 0,
        max_x: img.width() - 1,
        max_y: img.height() - 1,
    }
}

/// Bounding box of `[u0, u1] x [v0, v1]` clipped to the image.
fn clip(img: &GrayImage, u0: f64, v0: f64, u1: f64, v1: f64) -> Option<BoundingBox> {
    let max_x = img.width() as f64 - 1.0;
    let max_y = img.height() as f64 - 1.0;
    let (u0, v0) = (u0.ceil().max(0.0), v0.ceil().max(0.0));
    let (u1, v1) = (u1.floor().min(max_x), v1.floor().min(max_y));
    if u0 > u1 || v0 > v1 {
        return None;
    }
    Some(BoundingBox {
        min_x: u0 as usize,
        min_y: v0 as usize,
        max_x: u1 as usize,
        max_y: v1 as usize,
    })
}

/// Centroid of the intensity above the local floor in a window around a
/// thresholded glint. The floor is the brightest pixel on the window border,
/// so anti-aliased edge pixels below the threshold still count.
fn refine_glint(img: &GrayImage, blob: &Blob) -> ImagePoint {
    const MARGIN: usize = 2;
    let x0 = blob.bbox.min_x.saturating_sub(MARGIN);
    let y0 = blob.bbox.min_y.saturating_sub(MARGIN);
    let x1 = (blob.bbox.max_x + MARGIN).min(img.width() - 1);
    let y1 = (blob.bbox.max_y + MARGIN).min(img.height() - 1);
    let mut floor = 0u8;
    for y in y0..=y1 {
        for x in x0..=x1 {
            if x == x0 || x == x1 || y == y0 || y == y1 {
                floor = floor.max(img.get(x, y));
            }
        }
    }
    let (mut sw, mut su, mut sv) = (0.0, 0.0, 0.0);
    for y in y0..=y1 {
        for x in x0..=x1 {
            let w = f64::from(img.get(x, y).saturating_sub(floor));
            sw += w;
            su += w * x as f64;
            sv += w * y as f64;
        }
    }
    if sw > 0.0 {
        ImagePoint::new(su / sw, sv / sw)
    } else {
        blob.centroid
    }
}

/// Candidate glint pairs, top-most first.
pub fn detect_glints(img: &GrayImage, params: &DetectionParams) -> Vec<GlintPair> {
    let thr = params.glint_threshold;
    let glints: Vec<Blob> = components(img, full_frame(img), |_, _, i| {
        if i >= thr {
            f64::from(i - thr) + 1.0
        } else {
            0.0
        }
    })
    .into_iter()
    .filter(|b| (params.glint_min_area..=params.glint_max_area).contains(&b.area))
    .map(|mut b| {
        b.centroid = refine_glint(img, &b);
        b
    })
    .collect();
    log::debug!("{} glint blobs after the area filter", glints.len());

    let mut pairs = Vec::new();
    for i in 0..glints.len() {
        for j in i + 1..glints.len() {
            let (p, q) = (&glints[i], &glints[j]);
            let (left, right) = if (p.centroid.u, p.centroid.v) <= (q.centroid.u, q.centroid.v) {
                (p, q)
            } else {
                (q, p)
            };
            let pair = GlintPair {
                left: left.clone(),
                right: right.clone(),
            };
            let d = pair.separation();
            if d < params.pair_min_distance || d > params.pair_max_distance {
                continue;
            }
            if pair.tilt_deg() > params.pair_max_angle_deg {
                continue;
            }
            pairs.push(pair);
        }
    }
    pairs.sort_by(|a, b| {
        let (ma, mb) = (a.midpoint(), b.midpoint());
        ma.v.total_cmp(&mb.v).then(ma.u.total_cmp(&mb.u))
    });
    pairs
}

/// Pupil centroid and its darkness-based confidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PupilHit {
    pub center: ImagePoint,
    pub confidence: f64,
}

/// The darkest dark blob lying entirely within the search radius of `glint`.
pub fn detect_pupil_near(img: &GrayImage, glint: ImagePoint, params: &DetectionParams) -> Option<PupilHit> {
    let r = params.pupil_search_radius;
    let region = clip(img, glint.u - r, glint.v - r, glint.u + r, glint.v + r)?;
    let thr = params.pupil_threshold;
    let inside = |x: usize, y: usize| (x as f64 - glint.u).hypot(y as f64 - glint.v) <= r;
    let blobs = components(img, region, |x, y, i| {
        if i < thr && inside(x, y) {
            f64::from(thr - i)
        } else {
            0.0
        }
    });
    blobs
        .into_iter()
        .filter(|b| (params.pupil_min_area..=params.pupil_max_area).contains(&b.area))
        // blobs cut by the search boundary continue outside it
        .filter(|b| {
            let bb = b.bbox;
            [(bb.min_x, bb.min_y), (bb.max_x, bb.min_y), (bb.min_x, bb.max_y), (bb.max_x, bb.max_y)]
                .iter()
                .all(|&(x, y)| (x as f64 - glint.u).hypot(y as f64 - glint.v) < r - 1.0)
        })
        .min_by(|a, b| {
            a.mean_intensity
                .total_cmp(&b.mean_intensity)
                .then(b.area.cmp(&a.area))
        })
        .map(|b| PupilHit {
            center: b.centroid,
            confidence: ((f64::from(thr) - b.mean_intensity) / f64::from(thr)).clamp(0.0, 1.0),
        })
}

/// Nose search frame: origin at the glint midpoint, `x` along the pair axis,
/// `y` perpendicular to it pointing down the face.
struct NoseFrame {
    origin: ImagePoint,
    axis: (f64, f64),
    lateral: f64,
    near: f64,
    far: f64,
}

impl NoseFrame {
    fn new(pair: &GlintPair, params: &DetectionParams) -> Self {
        let s = pair.separation() * params.nose_region_scale;
        NoseFrame {
            origin: pair.midpoint(),
            axis: pair.axis(),
            lateral: 0.5 * s,
            near: 0.3 * s,
            far: 1.2 * s,
        }
    }

    fn to_local(&self, u: f64, v: f64) -> (f64, f64) {
        let (du, dv) = (u - self.origin.u, v - self.origin.v);
        let (ax, ay) = self.axis;
        (du * ax + dv * ay, -du * ay + dv * ax)
    }

    fn to_image(&self, x: f64, y: f64) -> ImagePoint {
        let (ax, ay) = self.axis;
        ImagePoint::new(self.origin.u + x * ax - y * ay, self.origin.v + x * ay + y * ax)
    }

    fn contains(&self, u: f64, v: f64) -> bool {
        let (x, y) = self.to_local(u, v);
        x.abs() <= self.lateral && y >= self.near && y <= self.far
    }

    fn bounds(&self, img: &GrayImage) -> Option<BoundingBox> {
        let corners = [
            self.to_image(-self.lateral, self.near),
            self.to_image(self.lateral, self.near),
            self.to_image(-self.lateral, self.far),
            self.to_image(self.lateral, self.far),
        ];
        let fold = |f: fn(f64, f64) -> f64, init: f64, get: fn(&ImagePoint) -> f64| {
            corners.iter().map(get).fold(init, f)
        };
        clip(
            img,
            fold(f64::min, f64::INFINITY, |p| p.u),
            fold(f64::min, f64::INFINITY, |p| p.v),
            fold(f64::max, f64::NEG_INFINITY, |p| p.u),
            fold(f64::max, f64::NEG_INFINITY, |p| p.v),
        )
    }

    /// Points in the middle of dark runs that are followed or preceded by a
    /// bright run and another dark run along lines parallel to the axis.
    fn dark_bright_dark(&self, img: &GrayImage, threshold: u8) -> Vec<ImagePoint> {
        let thr = f64::from(threshold);
        let mut hits = Vec::new();
        let mut y = self.near;
        while y <= self.far {
            let mut runs: Vec<(bool, f64, f64)> = Vec::new();
            let mut x = -self.lateral;
            while x <= self.lateral {
                let p = self.to_image(x, y);
                if let Some(i) = img.sample(p.u, p.v) {
                    let dark = i < thr;
                    match runs.last_mut() {
                        Some(run) if run.0 == dark => run.2 = x,
                        _ => runs.push((dark, x, x)),
                    }
                }
                x += 1.0;
            }
            for w in runs.windows(3) {
                if w[0].0 && !w[1].0 && w[2].0 {
                    for run in [w[0], w[2]] {
                        hits.push(self.to_image(0.5 * (run.1 + run.2), y));
                    }
                }
            }
            y += 1.0;
        }
        hits
    }
}

/// Nose bottom: the midpoint of the best nostril pair below the glints, and
/// a confidence from the pair's symmetry.
pub fn detect_nose(img: &GrayImage, pair: &GlintPair, params: &DetectionParams) -> Result<(ImagePoint, f64)> {
    let frame = NoseFrame::new(pair, params);
    let region = frame
        .bounds(img)
        .ok_or_else(|| Error::NoseNotFound("search region lies outside the image".into()))?;
    let thr = params.nostril_threshold;
    let hits = frame.dark_bright_dark(img, thr);
    if hits.is_empty() {
        return Err(Error::NoseNotFound("no dark-bright-dark pattern below the eyes".into()));
    }
    let s = pair.separation();
    let s2 = s * s;
    let blobs: Vec<Blob> = components(img, region, |x, y, i| {
        if i < thr && frame.contains(x as f64, y as f64) {
            f64::from(thr - i)
        } else {
            0.0
        }
    })
    .into_iter()
    .filter(|b| {
        let a = b.area as f64;
        a >= (params.nostril_min_area_frac * s2).max(4.0)
            && a <= params.nostril_max_area_frac * s2
            && b.elongation() <= params.nostril_max_elongation
            && hits.iter().any(|h| b.bbox.contains(*h))
    })
    .collect();
    log::debug!("{} nostril candidates", blobs.len());

    let mut best: Option<(f64, ImagePoint)> = None;
    for i in 0..blobs.len() {
        for j in i + 1..blobs.len() {
            let (p, q) = (blobs[i].centroid, blobs[j].centroid);
            let spacing = p.distance(&q) / s;
            if spacing < params.nostril_min_spacing || spacing > params.nostril_max_spacing {
                continue;
            }
            let (lp, lq) = (frame.to_local(p.u, p.v), frame.to_local(q.u, q.v));
            let angle = (lq.1 - lp.1).abs().atan2((lq.0 - lp.0).abs()).to_degrees();
            if angle > params.nostril_max_angle_deg {
                continue;
            }
            let size_ratio = blobs[i].area.max(blobs[j].area) as f64 / blobs[i].area.min(blobs[j].area) as f64;
            if size_ratio > 3.0 {
                continue;
            }
            let mid_lateral = 0.5 * (lp.0 + lq.0) / frame.lateral;
            let score = mid_lateral.abs()
                + angle / params.nostril_max_angle_deg.max(1e-9)
                + size_ratio.ln();
            if best.is_none_or(|(b, _)| score < b) {
                let mid = ImagePoint::new(0.5 * (p.u + q.u), 0.5 * (p.v + q.v));
                best = Some((score, mid));
            }
        }
    }
    best.map(|(score, mid)| (mid, (1.0 - score / 3.0).clamp(0.0, 1.0)))
        .ok_or_else(|| Error::NoseNotFound(format!("{} nostril candidates, no valid pair", blobs.len())))
}

/// Full pipeline: glint pairs, pupils for both glints, then the nose.
pub fn detect_all(img: &GrayImage, params: &DetectionParams) -> Result<DetectionResult> {
    params.validate()?;
    let pairs = detect_glints(img, params);
    if pairs.is_empty() {
        return Err(Error::DetectionFailed {
            stage: "glints",
            reason: "no glint pair within the distance and angle ranges".into(),
        });
    }
    let with_pupils: Vec<_> = pairs
        .iter()
        .filter_map(|pair| {
            let a = detect_pupil_near(img, pair.left.centroid, params)?;
            let b = detect_pupil_near(img, pair.right.centroid, params)?;
            Some((pair, a, b))
        })
        .collect();
    log::info!("{} glint pairs, {} with pupils", pairs.len(), with_pupils.len());
    if with_pupils.is_empty() {
        return Err(Error::DetectionFailed {
            stage: "pupils",
            reason: format!("none of {} glint pairs has a pupil at both glints", pairs.len()),
        });
    }
    let mut last_err = None;
    for (pair, pa, pb) in with_pupils {
        match detect_nose(img, pair, params) {
            Ok((nose, nose_conf)) => {
                let glint_conf = 1.0 - 0.5 * pair.tilt_deg() / params.pair_max_angle_deg.max(1e-9);
                return Ok(DetectionResult {
                    glint_a: pair.left.centroid,
                    glint_b: pair.right.centroid,
                    nose_c: nose,
                    pupil_a: pa.center,
                    pupil_b: pb.center,
                    confidence: Confidence {
                        glints: glint_conf.clamp(0.0, 1.0),
                        pupil_a: pa.confidence,
                        pupil_b: pb.confidence,
                        nose: nose_conf,
                    },
                });
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(Error::DetectionFailed {
        stage: "nose",
        reason: last_err.map_or_else(String::new, |e| e.to_string()),
    })
}
