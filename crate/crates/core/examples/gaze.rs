//! Gaze direction of both eyes from glints, pupils and the solved face pose.
//!
//! ```text
//! cargo run --example gaze
//! ```
//!
//! The eyes of a synthetic face look at a target 20 cm to the right of the
//! camera. Glints are placed where the LED reflection would appear on each
//! cornea.

use gazegeom::gaze::gaze_for_pose;
use gazegeom::pose::solve_pose;
use gazegeom::synthetic::{reflection_point, SyntheticFace};
use gazegeom::{
    CameraIntrinsics, EyeGeometry, FaceModel, GazeResult, LedConfig, Point3, PupilObservation,
    Result,
};

pub fn run(target: Point3) -> Result<[Result<GazeResult>; 2]> {
    let k = CameraIntrinsics::centered(4000.0, 1392, 1040)?;
    let eye = EyeGeometry::default();
    let led = LedConfig::new(Point3::new(0.0, 10.0, 0.0))?;

    let centers = [Point3::new(-3.25, -1.0, 65.0), Point3::new(3.25, -1.0, 65.0)];
    let glints = centers.map(|c| reflection_point(&c, eye.cornea_radius_cm, &led.position).0);
    let pupils = centers.map(|c| c + (target - c).normalize() * eye.pupil_cornea_dist_cm);

    let model = FaceModel::new((glints[1] - glints[0]).norm(), FaceModel::RATIO_R)?;
    let face = SyntheticFace::from_eyes(glints[0], glints[1], model.ratio_r, 30.0);
    let obs = face.observe(&k)?;
    let pupil_obs = PupilObservation {
        pupil_a: k.project(&pupils[0])?,
        pupil_b: k.project(&pupils[1])?,
    };

    let pose = solve_pose(&k, &obs, &model)?;
    let results = gaze_for_pose(&k, &pose, &obs, &pupil_obs, &led, &eye);
    for (name, res, c) in [("eye A", &results[0], centers[0]), ("eye B", &results[1], centers[1])] {
        match res {
            Ok(g) => {
                let want = (target - c).normalize();
                println!(
                    "{name}: cornea ({:+.4}, {:+.4}, {:+.4}) gaze ({:+.5}, {:+.5}, {:+.5}) error {:.1e} deg",
                    g.cornea_center.x,
                    g.cornea_center.y,
                    g.cornea_center.z,
                    g.gaze.direction.x,
                    g.gaze.direction.y,
                    g.gaze.direction.z,
                    g.gaze.direction.angle(&want).to_degrees()
                );
            }
            Err(e) => println!("{name}: {e}"),
        }
    }
    Ok(results)
}

fn main() -> Result<()> {
    for res in run(Point3::new(20.0, 0.0, 0.0))? {
        res?;
    }
    Ok(())
}
