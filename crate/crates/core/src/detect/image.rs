use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ImageFormat(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::ImageFormat(format!(
                "buffer has {} bytes, expected {}",
                data.len(),
                width * height
            )));
        }
        Ok(GrayImage { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.data[y * self.width + x] = value;
    }

    /// Bilinear sample at a sub-pixel position; `None` outside the image.
    pub fn sample(&self, u: f64, v: f64) -> Option<f64> {
        if !(u >= 0.0 && v >= 0.0) {
            return None;
        }
        let (x0, y0) = (u.floor() as usize, v.floor() as usize);
        if x0 >= self.width || y0 >= self.height {
            return None;
        }
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let (fx, fy) = (u - x0 as f64, v - y0 as f64);
        let p = |x, y| f64::from(self.get(x, y));
        let top = p(x0, y0) * (1.0 - fx) + p(x1, y0) * fx;
        let bottom = p(x0, y1) * (1.0 - fx) + p(x1, y1) * fx;
        Some(top * (1.0 - fy) + bottom * fy)
    }

    pub fn read_pgm<R: Read>(mut reader: R) -> Result<Self> {
        let mut bytes = Vec::new();
        reader.read_to_end(&mut bytes)?;
        parse_pgm(&bytes)
    }

    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        parse_pgm(&bytes)
    }

    pub fn write_pgm<W: Write>(&self, mut writer: W) -> Result<()> {
        write!(writer, "P5\n{} {}\n255\n", self.width, self.height)?;
        writer.write_all(&self.data)?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_pgm(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::ImageFormat(format!("missing or invalid {what}")))
    }
}

fn parse_pgm(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(Error::ImageFormat("not a binary PGM (P5) file".into()));
    }
    let mut h = Header { bytes, pos: 2 };
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval = h.number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::ImageFormat(format!(
            "only 8-bit PGM is supported (maxval {maxval})"
        )));
    }
    match bytes.get(h.pos) {
        Some(c) if c.is_ascii_whitespace() => h.pos += 1,
        _ => return Err(Error::ImageFormat("truncated header".into())),
    }
    let pixels = &bytes[h.pos..];
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::ImageFormat("image too large".into()))?;
    if pixels.len() < n {
        return Err(Error::ImageFormat(format!(
            "expected {n} pixel bytes, found {}",
            pixels.len()
        )));
    }
    let data = if maxval == 255 {
        pixels[..n].to_vec()
    } else {
        pixels[..n]
            .iter()
            .map(|&p| ((usize::from(p) * 255 + maxval / 2) / maxval).min(255) as u8)
            .collect()
    };
    GrayImage::new(width, height, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_round_trip() {
        let img = GrayImage::new(3, 2, vec![0, 10, 20, 30, 40, 255]).unwrap();
        let mut buf = Vec::new();
        img.write_pgm(&mut buf).unwrap();
        assert_eq!(GrayImage::read_pgm(&buf[..]).unwrap(), img);
    }

    #[test]
    fn header_comments_and_maxval() {
        let mut buf = b"P5\n# made by hand\n2 1\n# another\n15\n".to_vec();
        buf.extend([15, 0]);
        let img = GrayImage::read_pgm(&buf[..]).unwrap();
        assert_eq!(img.data(), &[255, 0]);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(GrayImage::read_pgm(&b"P2\n1 1\n255\n0"[..]).is_err());
        assert!(GrayImage::read_pgm(&b"P5\n4 4\n255\n\0\0"[..]).is_err());
        assert!(GrayImage::read_pgm(&b"P5\n0 4\n255\n"[..]).is_err());
        assert!(GrayImage::read_pgm(&b"P5\n1 1\n65535\n\0\0"[..]).is_err());
        assert!(GrayImage::new(2, 2, vec![0; 3]).is_err());
    }

    #[test]
    fn bilinear_sampling() {
        let img = GrayImage::new(2, 2, vec![0, 100, 100, 200]).unwrap();
        assert_eq!(img.sample(0.5, 0.5), Some(100.0));
        assert_eq!(img.sample(1.0, 0.0), Some(100.0));
        assert_eq!(img.sample(-0.1, 0.0), None);
        assert_eq!(img.sample(2.0, 0.0), None);
    }
}
