use serde::{Deserialize, Serialize};

use super::image::GrayImage;
use crate::geometry::ImagePoint;

/// Inclusive pixel bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_x: usize,
    pub min_y: usize,
    pub max_x: usize,
    pub max_y: usize,
}

impl BoundingBox {
    pub fn width(&self) -> usize {
        self.max_x - self.min_x + 1
    }

    pub fn height(&self) -> usize {
        self.max_y - self.min_y + 1
    }

    pub fn contains(&self, p: ImagePoint) -> bool {
        p.u >= self.min_x as f64
            && p.u <= self.max_x as f64
            && p.v >= self.min_y as f64
            && p.v <= self.max_y as f64
    }
}

/// A connected component with an intensity-weighted centroid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Blob {
    pub centroid: ImagePoint,
    pub area: usize,
    pub bbox: BoundingBox,
    pub mean_intensity: f64,
    /// Second moments of the pixel positions around the unweighted mean.
    pub cov: [f64; 3],
}

impl Blob {
    /// Ratio of the principal axis lengths, 1 for a disk.
    pub fn elongation(&self) -> f64 {
        let [xx, xy, yy] = self.cov;
        let tr = xx + yy;
        let det = xx * yy - xy * xy;
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        let (l1, l2) = (tr / 2.0 + disc, tr / 2.0 - disc);
        if l2 <= 0.0 {
            return f64::INFINITY;
        }
        (l1 / l2).sqrt()
    }

    pub fn touches(&self, region: &BoundingBox) -> bool {
        self.bbox.min_x == region.min_x
            || self.bbox.min_y == region.min_y
            || self.bbox.max_x == region.max_x
            || self.bbox.max_y == region.max_y
    }
}

/// 8-connected components of the pixels in `region` for which `weight`
/// returns a positive value. The weight is also used for the centroid.
pub fn components<F>(img: &GrayImage, region: BoundingBox, weight: F) -> Vec<Blob>
where
    F: Fn(usize, usize, u8) -> f64,
{
    let (w, h) = (region.width(), region.height());
    let mut weights = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let (ix, iy) = (region.min_x + x, region.min_y + y);
            let wt = weight(ix, iy, img.get(ix, iy));
            if wt > 0.0 {
                weights[y * w + x] = wt;
            }
        }
    }
    let mut seen = vec![false; w * h];
    let mut blobs = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if seen[start] || weights[start] <= 0.0 {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut acc = Accumulator::default();
        while let Some(idx) = stack.pop() {
            let (x, y) = (idx % w, idx / w);
            let (ix, iy) = (region.min_x + x, region.min_y + y);
            acc.add(ix, iy, weights[idx], img.get(ix, iy));
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let n = ny as usize * w + nx as usize;
                    if !seen[n] && weights[n] > 0.0 {
                        seen[n] = true;
                        stack.push(n);
                    }
                }
            }
        }
        blobs.push(acc.finish());
    }
    blobs
}

#[derive(Default)]
struct Accumulator {
    n: usize,
    w: f64,
    wu: f64,
    wv: f64,
    sum_i: f64,
    sx: f64,
    sy: f64,
    sxx: f64,
    sxy: f64,
    syy: f64,
    bbox: Option<BoundingBox>,
}

impl Accumulator {
    fn add(&mut self, x: usize, y: usize, weight: f64, intensity: u8) {
        let (fx, fy) = (x as f64, y as f64);
        self.n += 1;
        self.w += weight;
        self.wu += weight * fx;
        self.wv += weight * fy;
        self.sum_i += f64::from(intensity);
        self.sx += fx;
        self.sy += fy;
        self.sxx += fx * fx;
        self.sxy += fx * fy;
        self.syy += fy * fy;
        self.bbox = Some(match self.bbox {
            None => BoundingBox {
                min_x: x,
                min_y: y,
                max_x: x,
                max_y: y,
            },
            Some(b) => BoundingBox {
                min_x: b.min_x.min(x),
                min_y: b.min_y.min(y),
                max_x: b.max_x.max(x),
                max_y: b.max_y.max(y),
            },
        });
    }

    fn finish(self) -> Blob {
        let n = self.n as f64;
        let (mx, my) = (self.sx / n, self.sy / n);
        Blob {
            centroid: ImagePoint::new(self.wu / self.w, self.wv / self.w),
            area: self.n,
            bbox: self.bbox.expect("component has at least one pixel"),
            mean_intensity: self.sum_i / n,
            // one pixel's own extent keeps single-pixel blobs finite
            cov: [
                self.sxx / n - mx * mx + 1.0 / 12.0,
                self.sxy / n - mx * my,
                self.syy / n - my * my + 1.0 / 12.0,
            ],
        }
    }
}
