//! Regenerates the files under `data/`: the canonical face image, its
//! observation, the golden pose, gaze inputs and the simulation scenarios.
//!
//! ```text
//! cargo run --example make_fixtures [-- OUTPUT_DIR]
//! ```

use std::path::{Path, PathBuf};

use gazegeom::detect::render::{FaceLayout, CANONICAL_HEIGHT, CANONICAL_WIDTH};
use gazegeom::detect::DetectionParams;
use gazegeom::gaze::cornea_center;
use gazegeom::pose::solve_pose;
use gazegeom::report::PoseReport;
use gazegeom::sim::{SimScenario, Target};
use gazegeom::{
    CameraIntrinsics, EyeGeometry, FaceModel, FaceObservation, ImagePoint, LedConfig, Point3,
    PupilObservation, Result,
};

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

fn sigmas(step: f64) -> Vec<f64> {
    (0..=5).map(|i| (i as f64 * step * 1e6).round() / 1e6).collect()
}

pub fn run(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir.join("scenarios"))?;
    let k = CameraIntrinsics::new(4000.0, 4000.0, 696.0, 520.0)?;
    write_json(dir, "camera.json", &k)?;
    write_json(dir, "detection_params.json", &DetectionParams::default())?;

    let layout = FaceLayout::canonical();
    layout
        .scene(CANONICAL_WIDTH, CANONICAL_HEIGHT)
        .render()?
        .save(dir.join("face.pgm"))?;
    let obs = FaceObservation::new(layout.glint_a, layout.glint_b, layout.nose())?;
    write_json(dir, "observation.json", &obs)?;

    let pose = solve_pose(&k, &obs, &FaceModel::default())?;
    write_json(dir, "pose.json", &PoseReport::from(&pose))?;

    // both eyes fixate the camera
    let led = LedConfig::new(Point3::new(0.0, 10.0, 0.0))?;
    let eye = EyeGeometry::default();
    write_json(dir, "led.json", &led)?;
    let pupil_of = |glint: &Point3| -> Result<ImagePoint> {
        let center = cornea_center(glint, &led, &eye)?;
        let pupil = center - center.coords.normalize() * eye.pupil_cornea_dist_cm;
        k.project(&pupil)
    };
    let pupils = PupilObservation {
        pupil_a: pupil_of(&pose.a)?,
        pupil_b: pupil_of(&pose.b)?,
    };
    write_json(dir, "pupils.json", &pupils)?;
    let miss = PupilObservation {
        pupil_a: layout.glint_a.offset(40.0, 0.0),
        ..pupils
    };
    write_json(dir, "pupils_miss.json", &miss)?;

    for (target, step) in [
        (Target::FocalLength, 20.0),
        (Target::InterEyeDist, 0.1),
        (Target::RatioR, 0.03),
        (Target::ImagePoints, 2.0),
    ] {
        let s = SimScenario::new(target, sigmas(step));
        write_json(&dir.join("scenarios"), &format!("{}.json", target.name()), &s)?;
    }
    Ok(())
}

fn main() -> Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("data"));
    run(&dir)?;
    println!("fixtures written to {}", dir.display());
    Ok(())
}
