//! Finds glints, pupils and the nose bottom in a grayscale image.
//!
//! ```text
//! cargo run --example detect_features [-- IMAGE.pgm]
//! ```
//!
//! Without an argument a synthetic face is rendered with sensor noise.

use gazegeom::detect::render::{FaceLayout, CANONICAL_HEIGHT, CANONICAL_WIDTH};
use gazegeom::detect::{detect_all, DetectionParams, DetectionResult, GrayImage};
use gazegeom::Result;

pub fn run(img: &GrayImage) -> Result<DetectionResult> {
    let d = detect_all(img, &DetectionParams::default())?;
    let show = |name: &str, p: gazegeom::ImagePoint, conf: f64| {
        println!("{name:8} ({:8.3}, {:8.3})  confidence {conf:.2}", p.u, p.v);
    };
    show("glint A", d.glint_a, d.confidence.glints);
    show("glint B", d.glint_b, d.confidence.glints);
    show("pupil A", d.pupil_a, d.confidence.pupil_a);
    show("pupil B", d.pupil_b, d.confidence.pupil_b);
    show("nose", d.nose_c, d.confidence.nose);
    Ok(d)
}

fn main() -> Result<()> {
    let img = match std::env::args().nth(1) {
        Some(path) => GrayImage::open(path)?,
        None => {
            let layout = FaceLayout::canonical().rotated(FaceLayout::canonical().nose(), 8.0);
            let img = layout
                .scene(CANONICAL_WIDTH, CANONICAL_HEIGHT)
                .with_noise(4.0, 7)
                .render()?;
            println!("rendered nose at ({:.3}, {:.3})", layout.nose().u, layout.nose().v);
            img
        }
    };
    run(&img)?;
    Ok(())
}
