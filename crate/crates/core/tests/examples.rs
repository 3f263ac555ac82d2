//! Runs every example's entry point so the documented usage keeps working.

#![allow(dead_code)]

use gazegeom::{BivariateQuadratic, Point3, UniPoly};

#[path = "../examples/companion_roots.rs"]
mod companion_roots;
#[path = "../examples/conic_intersection.rs"]
mod conic_intersection;
#[path = "../examples/detect_features.rs"]
mod detect_features;
#[path = "../examples/gaze.rs"]
mod gaze;
#[path = "../examples/make_fixtures.rs"]
mod make_fixtures;
#[path = "../examples/robustness.rs"]
mod robustness;
#[path = "../examples/solve_pose.rs"]
mod solve_pose;

#[test]
fn companion_roots_example() {
    let roots = companion_roots::run(&UniPoly::from_roots(&[-1.0, 0.5, 4.0])).unwrap();
    let mut real = roots.real();
    real.sort_by(f64::total_cmp);
    for (got, want) in real.iter().zip([-1.0, 0.5, 4.0]) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn conic_intersection_example() {
    let circle = BivariateQuadratic::new(1.0, 0.0, 1.0, 0.0, 0.0, -1.0);
    let line_pair = BivariateQuadratic::new(1.0, 0.0, 0.0, 0.0, 0.0, -0.25);
    let pts = conic_intersection::run(&circle, &line_pair).unwrap();
    assert_eq!(pts.len(), 4);
}

#[test]
fn solve_pose_example() {
    let pose = solve_pose::run(-20.0, 25.0, 10.0).unwrap();
    assert!(pose.normal.z < 0.0);
}

#[test]
fn gaze_example() {
    let [a, b] = gaze::run(Point3::new(-10.0, 5.0, 0.0)).unwrap();
    assert!(a.is_ok() && b.is_ok());
}

#[test]
fn detect_features_example() {
    let img = gazegeom::detect::render::FaceLayout::canonical()
        .scene(1392, 1040)
        .render()
        .unwrap();
    let d = detect_features::run(&img).unwrap();
    assert_eq!((d.nose_c.u, d.nose_c.v), (779.0, 704.0));
}

#[test]
fn robustness_example() {
    let results = robustness::run(5).unwrap();
    assert_eq!(results.len(), 4);
    assert!(results.iter().all(|r| r.rows.len() == 6));
}

#[test]
fn make_fixtures_matches_committed_data() {
    let dir = tempfile::tempdir().unwrap();
    make_fixtures::run(dir.path()).unwrap();
    let committed = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    for name in ["camera.json", "observation.json", "pose.json", "pupils.json", "face.pgm"] {
        let fresh = std::fs::read(dir.path().join(name)).unwrap();
        assert_eq!(fresh, std::fs::read(committed.join(name)).unwrap(), "{name}");
    }
}
