use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use gazegeom::detect::{DetectionParams, GrayImage};
use gazegeom::report::{self, ErrorReport};
use gazegeom::sim::SimScenario;
use gazegeom::{CameraIntrinsics, Error, EyeGeometry, FaceModel, FaceObservation, LedConfig, PupilObservation, Result};

/// Head pose, gaze and facial feature detection from a single camera image.
#[derive(Parser)]
#[command(name = "gazegeom", version)]
struct Cli {
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recover the 3D eye and nose points from an observation.
    Pose {
        #[arg(long)]
        camera: PathBuf,
        /// Face model overrides (inter_eye_cm, ratio_r).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Observation JSON, `-` for standard input.
        observation: PathBuf,
    },
    /// Gaze rays for both eyes.
    Gaze {
        #[arg(long)]
        camera: PathBuf,
        #[arg(long)]
        led: PathBuf,
        #[arg(long)]
        eye_geometry: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        observation: PathBuf,
        pupils: PathBuf,
    },
    /// Find glints, pupils and the nose bottom in a PGM image.
    Detect {
        #[arg(long)]
        params: Option<PathBuf>,
        /// Binary PGM image, `-` for standard input.
        image: PathBuf,
    },
    /// Run a perturbation scenario and write its error curve as CSV.
    Simulate {
        #[arg(long)]
        seed: Option<u64>,
        scenario: PathBuf,
    },
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    if path == Path::new("-") {
        let mut buf = Vec::new();
        std::io::stdin().read_to_end(&mut buf)?;
        Ok(buf)
    } else {
        Ok(std::fs::read(path)?)
    }
}

fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_slice(&read_input(path)?)?)
}

fn load_or_default<T: DeserializeOwned + Default>(path: Option<&PathBuf>) -> Result<T> {
    path.map_or_else(|| Ok(T::default()), |p| load(p))
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Pose {
            camera,
            model,
            observation,
        } => {
            let k: CameraIntrinsics = load(camera)?;
            let model: FaceModel = load_or_default(model.as_ref())?;
            let obs: FaceObservation = load(observation)?;
            json(&report::pose_report(&k, &obs, &model)?)
        }
        Command::Gaze {
            camera,
            led,
            eye_geometry,
            model,
            observation,
            pupils,
        } => {
            let k: CameraIntrinsics = load(camera)?;
            let led: LedConfig = load(led)?;
            let eye: EyeGeometry = load_or_default(eye_geometry.as_ref())?;
            let model: FaceModel = load_or_default(model.as_ref())?;
            let obs: FaceObservation = load(observation)?;
            let pupils: PupilObservation = load(pupils)?;
            json(&report::gaze_report(&k, &obs, &pupils, &led, &eye, &model)?)
        }
        Command::Detect { params, image } => {
            let params: DetectionParams = load_or_default(params.as_ref())?;
            let img = GrayImage::read_pgm(&read_input(image)?[..])?;
            json(&report::detection_report(&img, &params)?)
        }
        Command::Simulate { seed, scenario } => {
            let s: SimScenario = load(scenario)?;
            report::simulation_csv(&s, *seed)
        }
    }
}

fn write_output(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn fail(e: &Error) -> ExitCode {
    log::debug!("{e:?}");
    let body = serde_json::to_string(&ErrorReport::from(e))
        .unwrap_or_else(|_| format!("{{\"error\":{{\"kind\":\"{}\"}}}}", e.kind()));
    eprintln!("{body}");
    ExitCode::from(report::exit_code(e) as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GAZEGEOM_LOG", "error")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(3);
        }
    };
    match run(&cli).and_then(|text| write_output(cli.out.as_ref(), &text)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
