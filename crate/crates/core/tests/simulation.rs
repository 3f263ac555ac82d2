use gazegeom::sim::{curve_string, run_scenario, SimScenario, Target};

fn pixel_scenario(focal_px: f64) -> SimScenario {
    let mut s = SimScenario::new(Target::ImagePoints, vec![10.0]);
    s.focal_px = focal_px;
    s.trials = 200;
    s
}

#[test]
fn longer_focal_length_reduces_pixel_noise_error() {
    let short = run_scenario(&pixel_scenario(4000.0)).unwrap().rows[0].mean_error_cm;
    let long = run_scenario(&pixel_scenario(8000.0)).unwrap().rows[0].mean_error_cm;
    let gain = short / long;
    assert!((1.5..=2.5).contains(&gain), "{short} / {long} = {gain}");
}

#[test]
fn zero_noise_is_exact_for_every_target() {
    for t in Target::ALL {
        let mut s = SimScenario::new(t, vec![0.0]);
        s.trials = 10;
        let row = &run_scenario(&s).unwrap().rows[0];
        assert_eq!(row.failures, 0);
        assert!(row.mean_error_cm < 1e-8, "{}: {}", t.name(), row.mean_error_cm);
    }
}

#[test]
fn seed_changes_results_and_is_reproducible() {
    let mut s = SimScenario::new(Target::RatioR, vec![0.05, 0.1]);
    s.trials = 30;
    let a = curve_string(&run_scenario(&s).unwrap()).unwrap();
    assert_eq!(a, curve_string(&run_scenario(&s).unwrap()).unwrap());
    s.seed = 17;
    assert_ne!(a, curve_string(&run_scenario(&s).unwrap()).unwrap());
}

#[test]
fn adding_a_sigma_leaves_other_rows_unchanged() {
    let mut s = SimScenario::new(Target::FocalLength, vec![50.0]);
    s.trials = 20;
    let alone = run_scenario(&s).unwrap().rows[0].clone();
    s.sigmas = vec![50.0, 75.0];
    let with_more = run_scenario(&s).unwrap().rows[0].clone();
    assert_eq!(alone.errors, with_more.errors);
}

#[test]
fn randomized_faces_still_track_noise() {
    let mut s = SimScenario::new(Target::ImagePoints, vec![0.0, 2.0, 4.0, 8.0]);
    s.trials = 50;
    s.randomize_face = true;
    let res = run_scenario(&s).unwrap();
    assert!(res.spearman() >= 0.9, "{}", res.spearman());
}
