use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn gazegeom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gazegeom"))
        .args(args)
        .output()
        .unwrap()
}

fn with_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_gazegeom"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(bytes)))
}

fn vec3(v: &Value) -> [f64; 3] {
    let a = v.as_array().unwrap();
    [0, 1, 2].map(|i| a[i].as_f64().unwrap())
}

fn assert_pose_close(got: &Value, want: &Value, tol: f64) {
    for key in ["A", "B", "C", "normal"] {
        let (g, w) = (vec3(&got[key]), vec3(&want[key]));
        for i in 0..3 {
            assert!((g[i] - w[i]).abs() <= tol, "{key}[{i}]: {} vs {}", g[i], w[i]);
        }
    }
    for key in ["alpha", "beta", "gamma", "distance"] {
        let (g, w) = (got[key].as_f64().unwrap(), want[key].as_f64().unwrap());
        assert!((g - w).abs() <= tol * (1.0 + w.abs()), "{key}: {g} vs {w}");
    }
}

fn golden() -> Value {
    json(&std::fs::read(data("pose.json")).unwrap())
}

#[test]
fn pose_matches_golden() {
    let out = gazegeom(&["pose", "--camera", &data("camera.json"), &data("observation.json")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_pose_close(&json(&out.stdout), &golden(), 1e-6);
}

#[test]
fn frontal_observation_faces_camera() {
    let dir = tempfile::tempdir().unwrap();
    let obs = dir.path().join("frontal.json");
    // symmetric eyes with the nose straight below, camera centered at (696, 520)
    std::fs::write(
        &obs,
        r#"{ "glint_a": [479.3333333333333, 520], "glint_b": [912.6666666666667, 520], "nose_c": [696, 856.1] }"#,
    )
    .unwrap();
    let out = gazegeom(&["pose", "--camera", &data("camera.json"), obs.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let n = vec3(&json(&out.stdout)["normal"]);
    assert!(n[2] < -0.99, "{n:?}");
}

#[test]
fn malformed_json_is_a_parse_error() {
    let out = with_stdin(&["pose", "--camera", &data("camera.json"), "-"], b"{ not json");
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out.stderr)["error"]["kind"], "parse");
    assert!(out.stdout.is_empty());
}

#[test]
fn invalid_values_are_parse_errors() {
    let out = with_stdin(
        &["pose", "--camera", &data("camera.json"), "-"],
        br#"{ "glint_a": [1, 1], "glint_b": [1, 1], "nose_c": [5, 9] }"#,
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_file_is_an_io_error() {
    let out = gazegeom(&["pose", "--camera", "/nonexistent/camera.json", &data("observation.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out.stderr)["error"]["kind"], "io");
}

#[test]
fn usage_errors_exit_3() {
    assert_eq!(gazegeom(&["explode"]).status.code(), Some(3));
    assert_eq!(gazegeom(&["pose"]).status.code(), Some(3));
    assert_eq!(gazegeom(&["--help"]).status.code(), Some(0));
}

#[test]
fn collinear_observation_exits_4() {
    let out = with_stdin(
        &["pose", "--camera", &data("camera.json"), "-"],
        br#"{ "glint_a": [600, 500], "glint_b": [800, 500], "nose_c": [700, 500] }"#,
    );
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&out.stderr)["error"]["kind"], "degenerate_observation");
}

#[test]
fn detect_then_pose_reproduces_golden() {
    let detected = gazegeom(&["detect", &data("face.pgm")]);
    assert_eq!(detected.status.code(), Some(0));
    let pose = with_stdin(&["pose", "--camera", &data("camera.json"), "-"], &detected.stdout);
    assert_eq!(pose.status.code(), Some(0), "{}", String::from_utf8_lossy(&pose.stderr));
    assert_pose_close(&json(&pose.stdout), &golden(), 1e-3);
}

#[test]
fn detect_from_stdin_with_params() {
    let img = std::fs::read(data("face.pgm")).unwrap();
    let out = with_stdin(&["detect", "--params", &data("detection_params.json"), "-"], &img);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out.stdout);
    assert_eq!(vec3_2(&v["nose_c"]), [779.0, 704.0]);
}

fn vec3_2(v: &Value) -> [f64; 2] {
    let a = v.as_array().unwrap();
    [a[0].as_f64().unwrap(), a[1].as_f64().unwrap()]
}

#[test]
fn blank_image_fails_detection() {
    let mut pgm = b"P5\n64 48\n255\n".to_vec();
    pgm.extend(std::iter::repeat_n(0u8, 64 * 48));
    let out = with_stdin(&["detect", "-"], &pgm);
    assert_eq!(out.status.code(), Some(4));
    let err = json(&out.stderr);
    assert_eq!(err["error"]["kind"], "detection_failed");
    assert_eq!(err["error"]["stage"], "glints");
}

#[test]
fn truncated_image_is_a_parse_error() {
    let out = with_stdin(&["detect", "-"], b"P5\n64 48\n255\n\0\0\0");
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out.stderr)["error"]["kind"], "image_format");
}

#[test]
fn gaze_reports_each_eye() {
    let base = ["gaze", "--camera", &data("camera.json"), "--led", &data("led.json")];
    let mut args = base.to_vec();
    let (obs, pupils) = (data("observation.json"), data("pupils.json"));
    args.extend([obs.as_str(), pupils.as_str()]);
    let out = gazegeom(&args);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out.stdout);
    for eye in ["eye_a", "eye_b"] {
        assert_eq!(v[eye]["status"], "ok");
        // the fixture's eyes look at the camera
        let o = vec3(&v[eye]["gaze"]["origin"]);
        let d = vec3(&v[eye]["gaze"]["direction"]);
        let norm = (o[0] * o[0] + o[1] * o[1] + o[2] * o[2]).sqrt();
        let cos = -(o[0] * d[0] + o[1] * d[1] + o[2] * d[2]) / norm;
        assert!(cos > 1.0 - 1e-9, "{eye}: {cos}");
    }

    let miss = data("pupils_miss.json");
    let mut args = base.to_vec();
    args.extend([obs.as_str(), miss.as_str()]);
    let out = gazegeom(&args);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out.stdout);
    assert_eq!(v["eye_a"]["status"], "error");
    assert_eq!(v["eye_a"]["error"]["kind"], "ray_misses_sphere");
    assert_eq!(v["eye_b"]["status"], "ok");
}

#[test]
fn gaze_eye_geometry_override() {
    let dir = tempfile::tempdir().unwrap();
    let eye = dir.path().join("eye.json");
    std::fs::write(&eye, r#"{ "cornea_radius_cm": 0.8, "pupil_cornea_dist_cm": 2.0 }"#).unwrap();
    let out = gazegeom(&[
        "gaze",
        "--camera",
        &data("camera.json"),
        "--led",
        &data("led.json"),
        "--eye-geometry",
        eye.to_str().unwrap(),
        &data("observation.json"),
        &data("pupils.json"),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out.stderr)["error"]["kind"], "parse");
}

fn simulate_to(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let out_path = dir.join(name);
    let mut args = vec!["simulate", "--out", out_path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = gazegeom(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    out_path
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = data("scenarios/ratio_r.json");
    let a = std::fs::read(simulate_to(dir.path(), "a.csv", &[&scenario])).unwrap();
    let b = std::fs::read(simulate_to(dir.path(), "b.csv", &[&scenario])).unwrap();
    assert_eq!(a, b);
    let c = std::fs::read(simulate_to(dir.path(), "c.csv", &["--seed", "99", &scenario])).unwrap();
    assert_ne!(a, c);
}

#[test]
fn simulate_zero_sigma_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.json");
    std::fs::write(&scenario, r#"{ "target": "image_points", "sigmas": [0], "trials": 5 }"#).unwrap();
    let csv = std::fs::read_to_string(simulate_to(dir.path(), "out.csv", &[scenario.to_str().unwrap()])).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("sigma,mean_error_cm,error_pct_of_distance,failures,trials"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!(row[1].parse::<f64>().unwrap() <= 1e-6);
    assert_eq!(row[3], "0");
    assert_eq!(row[4], "5");
    assert!(lines.next().is_none());
}

#[test]
fn committed_scenarios_parse() {
    for name in ["focal_length", "inter_eye_dist", "ratio_r", "image_points"] {
        let s = gazegeom::sim::SimScenario::from_path(data(&format!("scenarios/{name}.json"))).unwrap();
        assert_eq!(s.target.name(), name);
        assert_eq!(s.sigmas.len(), 6);
        assert_eq!(s.trials, 100);
    }
}
