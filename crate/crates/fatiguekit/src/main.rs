//! Thin command-line front end over the fatiguekit library.
//!
//! Three subcommands: `analyze` runs the full evaluation pipeline on
//! recorded files, `endurance` answers the constant-load holding-time
//! question, and `synth` generates test recordings with ground truth.
//! Exit codes: 0 success, 1 usage or input error, 2 internal invariant
//! violation. Errors are a single machine-parsable line on stderr.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use fatiguekit::fatigue::{endurance_constant_relative, exhaustion_index_constant, EnduranceOutcome};
use fatiguekit::load::{parse_mass_csv, Interpolation};
use fatiguekit::motion::parse_motion_csv;
use fatiguekit::report::{evaluate_task, write_report, EvaluationOptions, FatigueReport};
use fatiguekit::synth::{
    generate_hold, generate_lift_cycle, seed_from_env, HoldScenario, LiftCycleScenario,
    SynthOutput,
};
use fatiguekit::biomech::WorkerProfile;
use fatiguekit::{Error, Result};

#[derive(Parser)]
#[command(
    name = "fatiguekit",
    version,
    about = "Muscle fatigue and manual-work evaluation toolkit",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a recorded task and write report files
    Analyze(AnalyzeArgs),
    /// Endurance time for holding a constant load
    Endurance(EnduranceArgs),
    /// Generate synthetic recordings with known ground truth
    #[command(subcommand)]
    Synth(SynthCommand),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// JSON config file supplying any of the options below; explicit flags win
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker profile JSON (segments, joints, muscles)
    #[arg(long)]
    worker: Option<PathBuf>,
    /// Motion CSV: t_min,<joint>_rad,...
    #[arg(long)]
    motion: Option<PathBuf>,
    /// Handled-mass CSV: t_min,mass_kg
    #[arg(long)]
    mass: Option<PathBuf>,
    /// Directory for report.json, summary.csv and trajectory CSVs
    #[arg(long)]
    out: Option<PathBuf>,
    /// Standard phase times JSON ({"dwell": minutes, ...}) for efficiency scoring
    #[arg(long)]
    standards: Option<PathBuf>,
    /// Upper bound on the analysis grid step, minutes
    #[arg(long)]
    analysis_dt: Option<f64>,
    /// Override every muscle's fatigability rate, 1/min
    #[arg(long)]
    k: Option<f64>,
    /// Joint speed separating dwell from move, rad/min
    #[arg(long)]
    velocity_threshold: Option<f64>,
    /// Shortest phase kept as its own span, minutes
    #[arg(long)]
    min_phase_duration: Option<f64>,
    /// Joint speed above which gravity-only demand estimates are flagged, rad/min
    #[arg(long)]
    quasistatic_limit: Option<f64>,
    /// How far past the recording to scan for exhaustion, minutes
    #[arg(long)]
    endurance_horizon: Option<f64>,
}

/// File form of the analyze options; every field optional, flags override.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnalyzeFileConfig {
    worker: Option<PathBuf>,
    motion: Option<PathBuf>,
    mass: Option<PathBuf>,
    out: Option<PathBuf>,
    standards: Option<PathBuf>,
    analysis_dt_min: Option<f64>,
    k_per_min: Option<f64>,
    velocity_threshold_rad_per_min: Option<f64>,
    min_phase_duration_min: Option<f64>,
    quasistatic_limit_rad_per_min: Option<f64>,
    endurance_horizon_min: Option<f64>,
}

#[derive(Args)]
struct EnduranceArgs {
    /// Maximum voluntary contraction, newtons
    #[arg(long, allow_negative_numbers = true)]
    mvc: f64,
    /// Fatigability rate, 1/min
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    k: f64,
    /// Constant demanded force, newtons
    #[arg(long, allow_negative_numbers = true)]
    load: f64,
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Constant posture held for a fixed duration
    Hold(HoldArgs),
    /// Repeated dwell-then-move lifting cycles between two postures
    LiftCycle(LiftCycleArgs),
}

#[derive(Args)]
struct HoldArgs {
    /// Hold duration, seconds
    #[arg(long)]
    duration_s: f64,
    /// Frame rate, Hz
    #[arg(long, default_value_t = 25.0)]
    rate_hz: f64,
    /// Held joint angle as name=radians; repeat per joint
    /// [default: shoulder=0.3 elbow=0.5 wrist=0]
    #[arg(long = "angle", value_parser = parse_joint_angle)]
    angles: Vec<(String, f64)>,
    /// Mass in the hands, kg
    #[arg(long, default_value_t = 5.0)]
    mass_kg: f64,
    /// Half-width of uniform angle noise, radians
    #[arg(long, default_value_t = 0.0)]
    noise_rad: f64,
    /// Noise seed; overrides FATIGUEKIT_SEED
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for motion.csv, mass.csv and ground_truth.json
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LiftCycleArgs {
    /// Number of dwell+move cycles
    #[arg(long, default_value_t = 3)]
    cycles: u32,
    /// Dwell duration per cycle, seconds
    #[arg(long, default_value_t = 4.8)]
    dwell_s: f64,
    /// Move duration per cycle, seconds
    #[arg(long, default_value_t = 2.4)]
    move_s: f64,
    /// Frame rate, Hz
    #[arg(long, default_value_t = 25.0)]
    rate_hz: f64,
    /// Mass in the hands, kg
    #[arg(long, default_value_t = 5.0)]
    mass_kg: f64,
    /// Rest posture angle as name=radians; repeat per joint
    /// [default: shoulder=0.3 elbow=0.5 wrist=0]
    #[arg(long = "rest-angle", value_parser = parse_joint_angle)]
    rest_angles: Vec<(String, f64)>,
    /// Lifted posture angle as name=radians; repeat per joint
    /// [default: shoulder=1.2 elbow=1.0 wrist=0]
    #[arg(long = "lift-angle", value_parser = parse_joint_angle)]
    lift_angles: Vec<(String, f64)>,
    /// Half-width of uniform angle noise, radians
    #[arg(long, default_value_t = 0.0)]
    noise_rad: f64,
    /// Noise seed; overrides FATIGUEKIT_SEED
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for motion.csv, mass.csv and ground_truth.json
    #[arg(long)]
    out: PathBuf,
}

fn parse_joint_angle(text: &str) -> std::result::Result<(String, f64), String> {
    let (joint, angle) = text
        .split_once('=')
        .ok_or_else(|| format!("expected name=radians, got `{text}`"))?;
    let angle: f64 = angle
        .parse()
        .map_err(|_| format!("`{angle}` is not a number (in `{text}`)"))?;
    if joint.is_empty() {
        return Err(format!("empty joint name in `{text}`"));
    }
    Ok((joint.to_string(), angle))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            // Keep stderr to one line so scripts can parse it.
            let text = err.to_string();
            let first = text
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("error: invalid arguments");
            eprintln!("{first}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(if err.is_internal() { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Endurance(args) => cmd_endurance(args),
        Command::Synth(SynthCommand::Hold(args)) => cmd_synth_hold(args),
        Command::Synth(SynthCommand::LiftCycle(args)) => cmd_synth_lift(args),
    }
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn require(what: &str, flag: Option<PathBuf>, file: Option<PathBuf>) -> Result<PathBuf> {
    flag.or(file)
        .ok_or_else(|| Error::Config(format!("missing --{what} (and no `{what}` in the config file)")))
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let file_cfg = match &args.config {
        Some(path) => serde_json::from_str::<AnalyzeFileConfig>(&read_file(path)?)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
        None => AnalyzeFileConfig::default(),
    };

    let worker_path = require("worker", args.worker, file_cfg.worker)?;
    let motion_path = require("motion", args.motion, file_cfg.motion)?;
    let mass_path = require("mass", args.mass, file_cfg.mass)?;
    let out_dir = require("out", args.out, file_cfg.out)?;
    let standards_path = args.standards.or(file_cfg.standards);

    let worker = WorkerProfile::from_json(&read_file(&worker_path)?)?;
    let motion = parse_motion_csv(&read_file(&motion_path)?)?;
    let mass = parse_mass_csv(&read_file(&mass_path)?, Interpolation::Hold)?;
    let standard_times_min = match &standards_path {
        Some(path) => Some(
            serde_json::from_str::<BTreeMap<String, f64>>(&read_file(path)?)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
        ),
        None => None,
    };

    let defaults = EvaluationOptions::default();
    let options = EvaluationOptions {
        analysis_dt_min: args
            .analysis_dt
            .or(file_cfg.analysis_dt_min)
            .unwrap_or(defaults.analysis_dt_min),
        velocity_threshold_rad_per_min: args
            .velocity_threshold
            .or(file_cfg.velocity_threshold_rad_per_min)
            .unwrap_or(defaults.velocity_threshold_rad_per_min),
        min_phase_duration_min: args
            .min_phase_duration
            .or(file_cfg.min_phase_duration_min)
            .unwrap_or(defaults.min_phase_duration_min),
        quasistatic_limit_rad_per_min: args
            .quasistatic_limit
            .or(file_cfg.quasistatic_limit_rad_per_min)
            .unwrap_or(defaults.quasistatic_limit_rad_per_min),
        endurance_horizon_min: args
            .endurance_horizon
            .or(file_cfg.endurance_horizon_min)
            .unwrap_or(defaults.endurance_horizon_min),
        standard_times_min,
        k_override_per_min: args.k.or(file_cfg.k_per_min),
    };

    let report = evaluate_task(&worker, &motion, &mass, &options)?;
    let files = write_report(&report, &out_dir)?;
    print_summary(&report, &files);
    Ok(())
}

fn print_summary(report: &FatigueReport, files: &[PathBuf]) {
    println!(
        "wrote {} file(s) to {}",
        files.len(),
        files[0].parent().unwrap_or(Path::new(".")).display()
    );
    let id_width = report
        .muscles
        .iter()
        .map(|m| m.muscle_id.len())
        .chain(["muscle".len()])
        .max()
        .unwrap_or(6);
    println!(
        "{:<id_width$}  {:>12}  {:>14}  {:>14}",
        "muscle", "final_u_min", "endurance_min", "peak_rel_load"
    );
    for m in &report.muscles {
        let endurance = match m.endurance {
            EnduranceOutcome::Exhausted { t_min } => format!("{t_min:.6}"),
            EnduranceOutcome::NotExhausted => "none".to_string(),
        };
        println!(
            "{:<id_width$}  {:>12.6}  {:>14}  {:>14.6}",
            m.muscle_id, m.final_u_min, endurance, m.peak_relative_load
        );
        if !m.overload_spans.is_empty() {
            println!(
                "warning: demand exceeded remaining capacity for `{}` in {} span(s)",
                m.muscle_id,
                m.overload_spans.len()
            );
        }
    }
    println!(
        "phases: {} ({:.6} min total)",
        report.phases.len(),
        report
            .phases
            .iter()
            .map(|p| p.duration_min)
            .sum::<f64>()
    );
    if let Some(eff) = &report.efficiency {
        println!("efficiency: {:.6} overall", eff.overall_ratio);
    }
    if !report.fast_motion_spans.is_empty() {
        println!(
            "warning: {} stretch(es) exceed the quasi-static speed limit; demands there are underestimated",
            report.fast_motion_spans.len()
        );
    }
}

fn cmd_endurance(args: EnduranceArgs) -> Result<()> {
    if !args.mvc.is_finite() || args.mvc <= 0.0 {
        return Err(Error::Parameter(format!(
            "--mvc must be finite and > 0, got {}",
            args.mvc
        )));
    }
    if !args.load.is_finite() || args.load < 0.0 {
        return Err(Error::Parameter(format!(
            "--load must be finite and >= 0, got {}",
            args.load
        )));
    }
    if args.load == 0.0 {
        println!("no exhaustion: a zero load can be held indefinitely");
        return Ok(());
    }
    let f_rel = args.load / args.mvc;
    let endurance = endurance_constant_relative(args.k, f_rel)?;
    let u_at_exhaustion = exhaustion_index_constant(args.k, f_rel)?;
    println!("endurance: {endurance:.6} min");
    println!("fatigue index at exhaustion: {u_at_exhaustion:.6} min");
    Ok(())
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    Ok(match flag {
        Some(seed) => seed,
        None => seed_from_env()?.unwrap_or(0),
    })
}

fn angles_or(defaults: &[(&str, f64)], given: Vec<(String, f64)>) -> BTreeMap<String, f64> {
    if given.is_empty() {
        defaults
            .iter()
            .map(|(j, a)| (j.to_string(), *a))
            .collect()
    } else {
        given.into_iter().collect()
    }
}

fn write_synth_output(output: &SynthOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let write = |name: &str, contents: String| -> Result<PathBuf> {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    };
    let motion_path = write("motion.csv", output.motion_csv())?;
    println!(
        "wrote {} ({} frames at {} per minute)",
        motion_path.display(),
        output.truth.frames,
        output.truth.rate_per_min
    );
    let mass_path = write("mass.csv", output.mass_csv())?;
    println!("wrote {}", mass_path.display());
    let truth_path = write("ground_truth.json", output.ground_truth_json()?)?;
    println!(
        "wrote {} ({} phase(s))",
        truth_path.display(),
        output.truth.phases.len()
    );
    Ok(())
}

fn cmd_synth_hold(args: HoldArgs) -> Result<()> {
    let scenario = HoldScenario {
        duration_min: args.duration_s / 60.0,
        rate_per_min: args.rate_hz * 60.0,
        angles_rad: angles_or(&[("shoulder", 0.3), ("elbow", 0.5), ("wrist", 0.0)], args.angles),
        mass_kg: args.mass_kg,
        noise_rad: args.noise_rad,
        seed: resolve_seed(args.seed)?,
    };
    write_synth_output(&generate_hold(&scenario)?, &args.out)
}

fn cmd_synth_lift(args: LiftCycleArgs) -> Result<()> {
    let scenario = LiftCycleScenario {
        cycles: args.cycles,
        dwell_min: args.dwell_s / 60.0,
        move_min: args.move_s / 60.0,
        rate_per_min: args.rate_hz * 60.0,
        mass_kg: args.mass_kg,
        rest_angles_rad: angles_or(&[("shoulder", 0.3), ("elbow", 0.5), ("wrist", 0.0)], args.rest_angles),
        lift_angles_rad: angles_or(&[("shoulder", 1.2), ("elbow", 1.0), ("wrist", 0.0)], args.lift_angles),
        noise_rad: args.noise_rad,
        seed: resolve_seed(args.seed)?,
    };
    write_synth_output(&generate_lift_cycle(&scenario)?, &args.out)
}
