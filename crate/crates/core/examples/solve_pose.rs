//! Recovers the 3D eye and nose points of a face from one image.
//!
//! ```text
//! cargo run --example solve_pose [-- YAW PITCH ROLL]
//! ```
//!
//! A synthetic face is placed 70 cm in front of a 4000 px camera, projected,
//! and solved again from its three image points.

use gazegeom::pose::{face_distance, pose_candidates, solve_pose};
use gazegeom::synthetic::SyntheticFace;
use gazegeom::{CameraIntrinsics, FaceModel, FacePose, Point3, Result};

pub fn run(yaw: f64, pitch: f64, roll: f64) -> Result<FacePose> {
    let k = CameraIntrinsics::centered(4000.0, 1392, 1040)?;
    let model = FaceModel::default();
    let truth = SyntheticFace::facing_camera(&model, Point3::new(4.0, -3.0, 70.0), yaw, pitch, roll);
    let obs = truth.observe(&k)?;
    println!(
        "image points: A ({:.2}, {:.2})  B ({:.2}, {:.2})  C ({:.2}, {:.2})",
        obs.glint_a.u, obs.glint_a.v, obs.glint_b.u, obs.glint_b.v, obs.nose_c.u, obs.nose_c.v
    );

    let candidates = pose_candidates(&k, &obs, &model)?;
    println!("{} admissible candidates", candidates.len());
    for p in &candidates {
        println!(
            "  alpha {:.4}  beta {:.4}  nose tilt {:+.3}  frontality {:.3}",
            p.alpha,
            p.beta,
            p.nose_tilt(),
            p.frontality()
        );
    }

    let pose = solve_pose(&k, &obs, &model)?;
    for (name, est, t) in [("A", pose.a, truth.a), ("B", pose.b, truth.b), ("C", pose.c, truth.c)] {
        println!(
            "{name}: ({:+.4}, {:+.4}, {:+.4}) cm, error {:.1e}",
            est.x,
            est.y,
            est.z,
            (est - t).norm()
        );
    }
    let n = pose.normal;
    println!(
        "distance {:.3} cm, normal ({:+.4}, {:+.4}, {:+.4})",
        face_distance(&pose),
        n.x,
        n.y,
        n.z
    );
    Ok(pose)
}

fn main() -> Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("angles must be numbers"))
        .collect();
    let angle = |i: usize, default: f64| args.get(i).copied().unwrap_or(default);
    run(angle(0, 15.0), angle(1, 30.0), angle(2, -5.0))?;
    Ok(())
}
