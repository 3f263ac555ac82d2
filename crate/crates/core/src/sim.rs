//! Monte Carlo sensitivity of the pose solver to one perturbed quantity.
//!
//! A model-conforming face is projected with the nominal camera. In each
//! trial one input of the solver is drawn around its nominal value and the
//! recovered points are compared with the true ones.

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, ImagePoint, Point3};
use crate::pose::{solve_pose, FaceModel, FaceObservation};
use crate::synthetic::SyntheticFace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    FocalLength,
    InterEyeDist,
    RatioR,
    ImagePoints,
}

impl Target {
    pub const ALL: [Target; 4] = [
        Target::FocalLength,
        Target::InterEyeDist,
        Target::RatioR,
        Target::ImagePoints,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Target::FocalLength => "focal_length",
            Target::InterEyeDist => "inter_eye_dist",
            Target::RatioR => "ratio_r",
            Target::ImagePoints => "image_points",
        }
    }

    fn index(self) -> u64 {
        Target::ALL.iter().position(|&t| t == self).unwrap_or(0) as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimScenario {
    pub target: Target,
    pub sigmas: Vec<f64>,
    #[serde(default = "defaults::trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::focal")]
    pub focal_px: f64,
    #[serde(default = "defaults::width")]
    pub width: u32,
    #[serde(default = "defaults::height")]
    pub height: u32,
    /// Depth of the eye midpoint on the optical axis.
    #[serde(default = "defaults::depth")]
    pub depth_cm: f64,
    /// Nose-away tilt of the nominal face.
    #[serde(default = "defaults::pitch")]
    pub face_pitch_deg: f64,
    /// Draw a new face around the nominal depth for every trial.
    #[serde(default)]
    pub randomize_face: bool,
    #[serde(default)]
    pub model: FaceModel,
}

mod defaults {
    pub fn trials() -> usize {
        100
    }
    pub fn focal() -> f64 {
        4000.0
    }
    pub fn width() -> u32 {
        1392
    }
    pub fn height() -> u32 {
        1040
    }
    pub fn depth() -> f64 {
        60.0
    }
    pub fn pitch() -> f64 {
        30.0
    }
}

impl SimScenario {
    pub fn new(target: Target, sigmas: Vec<f64>) -> Self {
        SimScenario {
            target,
            sigmas,
            trials: defaults::trials(),
            seed: 0,
            focal_px: defaults::focal(),
            width: defaults::width(),
            height: defaults::height(),
            depth_cm: defaults::depth(),
            face_pitch_deg: defaults::pitch(),
            randomize_face: false,
            model: FaceModel::default(),
        }
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let s: SimScenario = serde_json::from_str(&text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.sigmas.is_empty() {
            return Err(Error::Config("sigma list is empty".into()));
        }
        if let Some(s) = self.sigmas.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
            return Err(Error::Config(format!("sigma must be finite and >= 0, got {s}")));
        }
        if !(self.depth_cm > 0.0) {
            return Err(Error::Config("depth must be positive".into()));
        }
        self.camera()?;
        Ok(())
    }

    pub fn camera(&self) -> Result<CameraIntrinsics> {
        CameraIntrinsics::centered(self.focal_px, self.width, self.height)
    }

    pub fn nominal_face(&self) -> SyntheticFace {
        SyntheticFace::facing_camera(
            &self.model,
            Point3::new(0.0, 0.0, self.depth_cm),
            0.0,
            self.face_pitch_deg,
            0.0,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaRow {
    pub sigma: f64,
    /// Mean over successful trials; NaN if every trial failed.
    pub mean_error_cm: f64,
    pub error_pct_of_distance: f64,
    pub failures: usize,
    pub trials: usize,
    /// Per-trial errors, `None` for solver failures.
    pub errors: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub target: Target,
    pub distance_cm: f64,
    pub rows: Vec<SigmaRow>,
}

/// RMS over the three points of the Euclidean point errors.
pub fn rms_point_error(est: [Point3; 3], truth: [Point3; 3]) -> f64 {
    let sq: f64 = est
        .iter()
        .zip(truth.iter())
        .map(|(e, t)| (e - t).norm_squared())
        .sum();
    (sq / 3.0).sqrt()
}

fn trial_rng(seed: u64, target: Target, sigma_index: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((target.index() << 56) | ((sigma_index as u64) << 32) | trial as u64);
    rng
}

fn run_trial(
    s: &SimScenario,
    k: &CameraIntrinsics,
    sigma: f64,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let face = if s.randomize_face {
        SyntheticFace::random_admissible(&s.model, rng, 0.9 * s.depth_cm, 1.1 * s.depth_cm)
    } else {
        s.nominal_face()
    };
    let obs = face.observe(k)?;
    let noise = Normal::new(0.0, sigma).map_err(|e| Error::Config(e.to_string()))?;
    let mut draw = || noise.sample(rng);
    let truth = face.points();
    match s.target {
        Target::FocalLength => {
            let noisy = k.with_focal(s.focal_px + draw())?;
            scored(|| solve_pose(&noisy, &obs, &s.model), truth)
        }
        Target::InterEyeDist => {
            let model = FaceModel::new(s.model.inter_eye_cm + draw(), s.model.ratio_r)?;
            scored(|| solve_pose(k, &obs, &model), truth)
        }
        Target::RatioR => {
            let model = FaceModel::new(s.model.inter_eye_cm, s.model.ratio_r + draw())?;
            scored(|| solve_pose(k, &obs, &model), truth)
        }
        Target::ImagePoints => {
            let mut jitter = |p: ImagePoint| {
                let du = draw();
                p.offset(du, draw())
            };
            let noisy = FaceObservation::new(jitter(obs.glint_a), jitter(obs.glint_b), jitter(obs.nose_c))?;
            scored(|| solve_pose(k, &noisy, &s.model), truth)
        }
    }
}

/// Solves and scores one perturbed input. An ambiguous solve is scored by the
/// worst of its equally preferred candidates.
fn scored<F>(solve: F, truth: [Point3; 3]) -> Result<f64>
where
    F: FnOnce() -> Result<crate::pose::FacePose>,
{
    match solve() {
        Ok(p) => Ok(rms_point_error([p.a, p.b, p.c], truth)),
        Err(Error::Ambiguous { candidates }) => Ok(candidates
            .iter()
            .map(|p| rms_point_error([p.a, p.b, p.c], truth))
            .fold(0.0, f64::max)),
        Err(e) => Err(e),
    }
}

/// Runs every trial of every sigma. Trials draw from independent streams, so
/// the result does not depend on how they are scheduled.
pub fn run_scenario(s: &SimScenario) -> Result<SimResult> {
    s.validate()?;
    let k = s.camera()?;
    let mut rows = Vec::with_capacity(s.sigmas.len());
    for (si, &sigma) in s.sigmas.iter().enumerate() {
        let errors: Vec<Option<f64>> = (0..s.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(s.seed, s.target, si, t);
                match run_trial(s, &k, sigma, &mut rng) {
                    Ok(e) => Some(e),
                    Err(err) => {
                        log::debug!("{} sigma {sigma} trial {t}: {err}", s.target.name());
                        None
                    }
                }
            })
            .collect();
        let ok: Vec<f64> = errors.iter().flatten().copied().collect();
        let failures = errors.len() - ok.len();
        let mean = if ok.is_empty() {
            f64::NAN
        } else {
            ok.iter().sum::<f64>() / ok.len() as f64
        };
        log::info!(
            "{} sigma {sigma}: mean error {mean:.4} cm, {failures} failures",
            s.target.name()
        );
        rows.push(SigmaRow {
            sigma,
            mean_error_cm: mean,
            error_pct_of_distance: 100.0 * mean / s.depth_cm,
            failures,
            trials: s.trials,
            errors,
        });
    }
    Ok(SimResult {
        target: s.target,
        distance_cm: s.depth_cm,
        rows,
    })
}

impl SimResult {
    pub fn row(&self, sigma: f64) -> Option<&SigmaRow> {
        self.rows.iter().find(|r| (r.sigma - sigma).abs() <= 1e-12 * (1.0 + sigma.abs()))
    }

    /// Spearman rank correlation between sigma and mean error.
    pub fn spearman(&self) -> f64 {
        let xs: Vec<f64> = self.rows.iter().map(|r| r.sigma).collect();
        let ys: Vec<f64> = self.rows.iter().map(|r| r.mean_error_cm).collect();
        spearman(&xs, &ys)
    }
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let rank = 0.5 * (i + j) as f64 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman correlation with average ranks for ties. NaN for fewer than two
/// points or a constant series.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return f64::NAN;
    }
    let (rx, ry) = (ranks(&xs[..n]), ranks(&ys[..n]));
    let mean = (n as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (dx, dy) = (rx[i] - mean, ry[i] - mean);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    sxy / (sxx * syy).sqrt()
}

#[derive(Serialize)]
struct CsvRow {
    sigma: f64,
    mean_error_cm: f64,
    error_pct_of_distance: f64,
    failures: usize,
    trials: usize,
}

/// One CSV row per sigma with a header line.
pub fn emit_curve<W: Write>(result: &SimResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in &result.rows {
        w.serialize(CsvRow {
            sigma: r.sigma,
            mean_error_cm: r.mean_error_cm,
            error_pct_of_distance: r.error_pct_of_distance,
            failures: r.failures,
            trials: r.trials,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn curve_string(result: &SimResult) -> Result<String> {
    let mut buf = Vec::new();
    emit_curve(result, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::InvalidInput(e.to_string()))
}
