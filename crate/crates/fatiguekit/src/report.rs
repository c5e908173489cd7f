//! Pipeline orchestration and report emission.
//!
//! [`evaluate_task`] runs the whole chain — recording → joint torques →
//! per-muscle demand profiles → capacity/fatigue trajectories → phase
//! attribution — and returns a [`FatigueReport`]. [`write_report`] renders
//! it as `report.json`, one `trajectory_<muscle>.csv` per muscle, and
//! `summary.csv`.
//!
//! Reports are deterministic: identical inputs produce byte-identical
//! files. All numeric output is printed with 9 significant digits, maps are
//! ordered, muscles are sorted by id, and the metadata carries SHA-256
//! digests of the inputs instead of timestamps.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::biomech::{posture_series_to_load_profiles, WorkerProfile, GRAVITY_M_PER_S2};
use crate::error::{Error, Result};
use crate::fatigue::{
    endurance_time, fatigue_index_closed_form, fcem_closed_form, steps_covering,
    EnduranceOutcome, MuscleParameters,
};
use crate::load::{mean_relative_load, LoadProfile};
use crate::motion::{efficiency_ratio, EfficiencySummary, MotionSeries, PhaseLabel};

/// Tunable analysis parameters, all optional with working defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationOptions {
    /// Upper bound on the analysis grid step, minutes. When the recording
    /// itself is finer, the frame times are used directly.
    pub analysis_dt_min: f64,
    /// Joint speed at or above which a frame counts as movement, rad/min.
    /// Task-dependent; tune per capture setup.
    pub velocity_threshold_rad_per_min: f64,
    /// Runs shorter than this merge into their neighbour, minutes
    /// (default 0.25 s). Task-dependent.
    pub min_phase_duration_min: f64,
    /// Joint speed above which the gravity-only torque model is suspect,
    /// rad/min (default 120, i.e. 2 rad/s). Inertial terms are not
    /// modelled; faster stretches are flagged in the report, not rejected.
    pub quasistatic_limit_rad_per_min: f64,
    /// How far past the recording to project the demand when scanning for
    /// exhaustion, minutes. The last demanded force is held constant over
    /// the extension.
    pub endurance_horizon_min: f64,
    /// Standard phase times by label for efficiency scoring; omit to skip
    /// the efficiency section.
    pub standard_times_min: Option<BTreeMap<String, f64>>,
    /// Replace every muscle's fatigability rate, 1/min.
    pub k_override_per_min: Option<f64>,
}

impl Default for EvaluationOptions {
    fn default() -> Self {
        EvaluationOptions {
            analysis_dt_min: 5e-4,
            velocity_threshold_rad_per_min: 15.0,
            min_phase_duration_min: 1.0 / 240.0,
            quasistatic_limit_rad_per_min: 120.0,
            endurance_horizon_min: 60.0,
            standard_times_min: None,
            k_override_per_min: None,
        }
    }
}

impl EvaluationOptions {
    fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("analysis_dt_min", self.analysis_dt_min),
            (
                "velocity_threshold_rad_per_min",
                self.velocity_threshold_rad_per_min,
            ),
            (
                "quasistatic_limit_rad_per_min",
                self.quasistatic_limit_rad_per_min,
            ),
            ("endurance_horizon_min", self.endurance_horizon_min),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::Parameter(format!(
                    "{name} must be finite and > 0, got {value}"
                )));
            }
        }
        if !self.min_phase_duration_min.is_finite() || self.min_phase_duration_min < 0.0 {
            return Err(Error::Parameter(format!(
                "min_phase_duration_min must be finite and >= 0, got {}",
                self.min_phase_duration_min
            )));
        }
        if let Some(k) = self.k_override_per_min {
            if !(k > 0.0) || !k.is_finite() {
                return Err(Error::Parameter(format!(
                    "k_override_per_min must be finite and > 0, got {k}"
                )));
            }
        }
        Ok(())
    }
}

/// One analysis-grid sample of a muscle's demand and state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t_min: f64,
    pub f_load_n: f64,
    pub fcem_n: f64,
    pub u_min: f64,
}

/// Contiguous flagged stretch of the recording.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSpan {
    pub t_start_min: f64,
    pub t_end_min: f64,
}

/// Everything the analysis concluded about one muscle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuscleReport {
    pub muscle_id: String,
    pub mvc_n: f64,
    pub k_per_min: f64,
    pub peak_load_n: f64,
    pub peak_relative_load: f64,
    pub mean_relative_load: f64,
    pub final_fcem_n: f64,
    pub final_u_min: f64,
    /// Exhaustion time in minutes from the start of the recording, with
    /// the final demand held constant beyond it, or `not_exhausted` within
    /// the configured horizon.
    pub endurance: EnduranceOutcome,
    pub overload_spans: Vec<TimeSpan>,
    pub trajectory: Vec<TrajectoryPoint>,
}

/// One segmented phase with its per-muscle fatigue contribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub label: PhaseLabel,
    pub t_start_min: f64,
    pub t_end_min: f64,
    pub duration_min: f64,
    /// Fatigue-index growth across this phase, by muscle id.
    pub delta_u_min: BTreeMap<String, f64>,
}

/// Parameters echoed into the report for reproducibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParameters {
    pub analysis_dt_min: f64,
    pub velocity_threshold_rad_per_min: f64,
    pub min_phase_duration_min: f64,
    pub quasistatic_limit_rad_per_min: f64,
    pub endurance_horizon_min: f64,
    pub k_override_per_min: Option<f64>,
    pub gravity_m_per_s2: f64,
}

/// Analysis-grid facts, including the self-check that halving the grid
/// step leaves the final fatigue index unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    /// Largest step of the grid actually used, minutes.
    pub dt_min: f64,
    pub points: usize,
    /// Largest relative change in any muscle's final U when the analysis
    /// step is halved.
    pub u_rel_change_on_dt_halving: f64,
    /// True when the change above is below 1e-4.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub tool: String,
    pub tool_version: String,
    pub parameters: ReportParameters,
    /// SHA-256 of each input's canonical JSON form.
    pub input_digests: BTreeMap<String, String>,
    pub grid: GridInfo,
}

/// The full evaluation result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FatigueReport {
    pub metadata: ReportMetadata,
    /// Sorted by muscle id.
    pub muscles: Vec<MuscleReport>,
    pub phases: Vec<PhaseReport>,
    /// Stretches where joint speed exceeded the quasi-static limit, so the
    /// gravity-only demand estimates there understate the true load.
    pub fast_motion_spans: Vec<TimeSpan>,
    pub efficiency: Option<EfficiencySummary>,
}

/// Group timestamped flags into contiguous [`TimeSpan`]s. A lone flagged
/// sample yields a zero-width span.
fn flagged_spans(points: impl Iterator<Item = (f64, bool)>) -> Vec<TimeSpan> {
    let mut spans = Vec::new();
    let mut open: Option<(f64, f64)> = None;
    for (t, flagged) in points {
        if flagged {
            open = match open {
                Some((start, _)) => Some((start, t)),
                None => Some((t, t)),
            };
        } else if let Some((t_start_min, t_end_min)) = open.take() {
            spans.push(TimeSpan {
                t_start_min,
                t_end_min,
            });
        }
    }
    if let Some((t_start_min, t_end_min)) = open {
        spans.push(TimeSpan {
            t_start_min,
            t_end_min,
        });
    }
    spans
}

fn digest_json<T: Serialize>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value)
        .map_err(|e| Error::Internal(format!("digesting input: {e}")))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("sha256:{:x}", hasher.finalize()))
}

/// Grid times for the analysis: the frame times themselves unless
/// `analysis_dt` is coarser than the recording, in which case a uniform
/// grid at (at most) `analysis_dt` spanning the same range.
fn analysis_grid(motion: &MotionSeries, analysis_dt: f64) -> Vec<f64> {
    let frames = motion.frames();
    let max_frame_step = frames
        .windows(2)
        .map(|w| w[1].t_min - w[0].t_min)
        .fold(0.0, f64::max);
    if analysis_dt <= max_frame_step {
        return frames.iter().map(|f| f.t_min).collect();
    }
    let span = motion.duration_min();
    let n = steps_covering(span, analysis_dt);
    let h = span / n as f64;
    let mut grid = Vec::with_capacity(n + 1);
    for i in 0..n {
        grid.push(motion.t_first() + i as f64 * h);
    }
    grid.push(motion.t_last());
    grid
}

/// Accumulated relative load at each grid time, from exact integrals of
/// the demand profile over the grid intervals.
fn accumulate_on_grid(
    profile: &LoadProfile,
    params: &MuscleParameters,
    grid: &[f64],
    quad_dt: f64,
) -> Result<Vec<f64>> {
    let mut f_acc = Vec::with_capacity(grid.len());
    f_acc.push(0.0);
    for pair in grid.windows(2) {
        let inc = profile.integral_force_min(pair[0], pair[1], quad_dt)? / params.mvc_n;
        f_acc.push(f_acc.last().unwrap() + inc);
    }
    Ok(f_acc)
}

fn final_u_for(
    profile: &LoadProfile,
    params: &MuscleParameters,
    grid: &[f64],
    quad_dt: f64,
) -> Result<f64> {
    let f_acc = accumulate_on_grid(profile, params, grid, quad_dt)?;
    fatigue_index_closed_form(params, 0.0, *f_acc.last().unwrap())
}

/// Exhaustion scan over the recording, extended past its end by holding
/// the final demand constant. Returns minutes from the recording start.
fn endurance_with_extension(
    params: &MuscleParameters,
    profile: &LoadProfile,
    window_span: f64,
    horizon_min: f64,
    scan_dt: f64,
) -> Result<EnduranceOutcome> {
    let horizon = horizon_min.max(window_span);
    let last_value = profile.evaluate(
        profile
            .domain_end()
            .expect("recorded demand profiles are bounded"),
    )?;
    // Wrapping in a composite rebases the recording to start at 0 even when
    // the capture began later, and appends the constant extension.
    let mut segments = vec![(window_span, profile.clone())];
    if horizon > window_span {
        segments.push((horizon - window_span, LoadProfile::constant(last_value)?));
    }
    let extended = LoadProfile::composite(segments)?;
    endurance_time(params, &extended, horizon, scan_dt)
}

/// Run the full evaluation pipeline.
///
/// The recording is segmented into phases, joint torques and muscle
/// demands are computed quasi-statically frame by frame, and capacity and
/// fatigue index follow from closed forms on exactly integrated
/// accumulated load, so results do not depend on the grid resolution.
/// Demand above remaining capacity is flagged in `overload_spans` rather
/// than treated as an error.
pub fn evaluate_task(
    worker: &WorkerProfile,
    motion: &MotionSeries,
    mass_kg: &LoadProfile,
    options: &EvaluationOptions,
) -> Result<FatigueReport> {
    options.validate()?;
    worker.validate()?;

    let mut worker = worker.clone();
    if let Some(k) = options.k_override_per_min {
        for m in &mut worker.muscles {
            m.k_per_min = k;
        }
    }

    let mut input_digests = BTreeMap::from([
        ("worker_profile".to_string(), digest_json(&worker)?),
        ("motion".to_string(), digest_json(motion)?),
        ("mass_timeline".to_string(), digest_json(mass_kg)?),
    ]);
    if let Some(standards) = &options.standard_times_min {
        input_digests.insert("standard_times".to_string(), digest_json(standards)?);
    }

    let load_profiles = posture_series_to_load_profiles(&worker, motion, mass_kg)?;
    let grid = analysis_grid(motion, options.analysis_dt_min);
    let span = motion.duration_min();
    let scan_dt = span / (motion.frames().len() - 1) as f64;
    let quad_dt = options.analysis_dt_min;

    let spans = motion.segment_phases(
        options.velocity_threshold_rad_per_min,
        options.min_phase_duration_min,
    )?;

    let mut muscles = Vec::with_capacity(load_profiles.len());
    let mut delta_u_by_phase: Vec<BTreeMap<String, f64>> =
        vec![BTreeMap::new(); spans.len()];
    let mut u_rel_change: f64 = 0.0;

    for params in worker.muscle_parameters() {
        let profile = &load_profiles[&params.muscle_id];
        let f_acc = accumulate_on_grid(profile, &params, &grid, quad_dt)?;

        let mut trajectory = Vec::with_capacity(grid.len());
        let mut peak_load_n = 0.0_f64;
        for (&t, &f) in grid.iter().zip(&f_acc) {
            let f_load_n = profile.evaluate(t)?;
            peak_load_n = peak_load_n.max(f_load_n);
            trajectory.push(TrajectoryPoint {
                t_min: t,
                f_load_n,
                fcem_n: fcem_closed_form(&params, f),
                u_min: fatigue_index_closed_form(&params, 0.0, f)?,
            });
        }
        let final_point = *trajectory.last().expect("grid is never empty");
        let final_u_min = final_point.u_min;

        // Overload flags: grid samples where demand met or exceeded the
        // remaining capacity, grouped into contiguous spans.
        let overload_spans =
            flagged_spans(trajectory.iter().map(|p| (p.t_min, p.f_load_n >= p.fcem_n)));

        let endurance = if peak_load_n == 0.0 {
            EnduranceOutcome::NotExhausted
        } else {
            endurance_with_extension(
                &params,
                profile,
                span,
                options.endurance_horizon_min,
                scan_dt,
            )?
        };

        // Phase attribution: accumulated load at each phase boundary via
        // the same exact integrals, then the fatigue-index closed form
        // between consecutive boundaries.
        let mut f_at = f64::NAN;
        let mut t_prev = f64::NAN;
        let mut total_delta = 0.0;
        for (i, phase) in spans.iter().enumerate() {
            if i == 0 {
                f_at = 0.0;
                t_prev = phase.t_start_min;
            }
            let inc =
                profile.integral_force_min(t_prev, phase.t_end_min, quad_dt)? / params.mvc_n;
            let f_end = f_at + inc;
            let delta = fatigue_index_closed_form(&params, f_at, f_end)?;
            total_delta += delta;
            delta_u_by_phase[i].insert(params.muscle_id.clone(), delta);
            f_at = f_end;
            t_prev = phase.t_end_min;
        }
        let tolerance = 1e-9 * final_u_min.abs().max(1e-12);
        if (total_delta - final_u_min).abs() > tolerance {
            return Err(Error::Internal(format!(
                "phase fatigue for `{}` sums to {total_delta}, final index is {final_u_min}",
                params.muscle_id
            )));
        }

        // Grid self-check: recompute the final index on a grid of half the
        // step; the closed forms on exact integrals must not move.
        let half_grid = analysis_grid(motion, options.analysis_dt_min / 2.0);
        let u_half = final_u_for(profile, &params, &half_grid, quad_dt / 2.0)?;
        let change = (u_half - final_u_min).abs() / final_u_min.abs().max(1e-30);
        u_rel_change = u_rel_change.max(change);

        muscles.push(MuscleReport {
            muscle_id: params.muscle_id.clone(),
            mvc_n: params.mvc_n,
            k_per_min: params.k_per_min,
            peak_load_n,
            peak_relative_load: peak_load_n / params.mvc_n,
            mean_relative_load: mean_relative_load(profile, &params, span)
                .or_else(|_| -> Result<f64> {
                    // Recordings need not start at t = 0; integrate the
                    // actual domain instead.
                    Ok(profile.integral_force_min(
                        profile.domain_start(),
                        profile.domain_end().expect("sampled profile"),
                        quad_dt,
                    )? / params.mvc_n
                        / span)
                })?,
            final_fcem_n: final_point.fcem_n,
            final_u_min,
            endurance,
            overload_spans,
            trajectory,
        });
    }

    let phases = spans
        .iter()
        .zip(delta_u_by_phase)
        .map(|(span, delta_u_min)| PhaseReport {
            label: span.label,
            t_start_min: span.t_start_min,
            t_end_min: span.t_end_min,
            duration_min: span.duration_min(),
            delta_u_min,
        })
        .collect();

    let efficiency = match &options.standard_times_min {
        Some(standards) => Some(efficiency_ratio(&spans, standards)?),
        None => None,
    };

    let fast_motion_spans = flagged_spans(
        motion
            .frames()
            .iter()
            .zip(motion.frame_speeds())
            .map(|(frame, speed)| (frame.t_min, speed > options.quasistatic_limit_rad_per_min)),
    );

    let grid_step = grid
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max);
    Ok(FatigueReport {
        metadata: ReportMetadata {
            tool: "fatiguekit".into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            parameters: ReportParameters {
                analysis_dt_min: options.analysis_dt_min,
                velocity_threshold_rad_per_min: options.velocity_threshold_rad_per_min,
                min_phase_duration_min: options.min_phase_duration_min,
                quasistatic_limit_rad_per_min: options.quasistatic_limit_rad_per_min,
                endurance_horizon_min: options.endurance_horizon_min,
                k_override_per_min: options.k_override_per_min,
                gravity_m_per_s2: GRAVITY_M_PER_S2,
            },
            input_digests,
            grid: GridInfo {
                dt_min: grid_step,
                points: grid.len(),
                u_rel_change_on_dt_halving: u_rel_change,
                converged: u_rel_change < 1e-4,
            },
        },
        muscles,
        phases,
        fast_motion_spans,
        efficiency,
    })
}

// ---------------------------------------------------------------------------
// Rendering

/// Formats every float with 9 significant digits (`1.23456789e0`) so that
/// report bytes are identical across runs and platforms, while keeping
/// serde_json's pretty layout for everything else.
struct NineDigitFormatter {
    inner: serde_json::ser::PrettyFormatter<'static>,
}

impl NineDigitFormatter {
    fn new() -> Self {
        NineDigitFormatter {
            inner: serde_json::ser::PrettyFormatter::new(),
        }
    }
}

impl serde_json::ser::Formatter for NineDigitFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.8e}")
    }

    fn begin_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_array(writer)
    }

    fn end_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object(writer)
    }

    fn end_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_object_value(writer)
    }
}

fn sig9(value: f64) -> String {
    format!("{value:.8e}")
}

/// Render the report as deterministic pretty JSON (9 significant digits on
/// every float), with a trailing newline.
pub fn render_report_json(report: &FatigueReport) -> Result<String> {
    let mut bytes = Vec::with_capacity(64 * 1024);
    let mut ser = serde_json::Serializer::with_formatter(&mut bytes, NineDigitFormatter::new());
    report
        .serialize(&mut ser)
        .map_err(|e| Error::Internal(format!("serializing report: {e}")))?;
    bytes.push(b'\n');
    String::from_utf8(bytes).map_err(|e| Error::Internal(format!("report is not UTF-8: {e}")))
}

/// Parse a `report.json` produced by [`write_report`].
pub fn parse_report_json(text: &str) -> Result<FatigueReport> {
    serde_json::from_str(text).map_err(|e| Error::Schema(format!("report: {e}")))
}

fn trajectory_csv(muscle: &MuscleReport) -> String {
    let mut out = String::with_capacity(muscle.trajectory.len() * 64 + 32);
    out.push_str("t_min,f_load_N,fcem_N,u_min\n");
    for p in &muscle.trajectory {
        out.push_str(&format!(
            "{},{},{},{}\n",
            sig9(p.t_min),
            sig9(p.f_load_n),
            sig9(p.fcem_n),
            sig9(p.u_min)
        ));
    }
    out
}

fn summary_csv(report: &FatigueReport) -> String {
    let mut out = String::from(
        "muscle_id,mvc_N,k_per_min,peak_load_N,peak_relative_load,mean_relative_load,\
         final_fcem_N,final_u_min,endurance_status,endurance_t_min\n",
    );
    for m in &report.muscles {
        let (status, t_min) = match m.endurance {
            EnduranceOutcome::Exhausted { t_min } => ("exhausted", sig9(t_min)),
            EnduranceOutcome::NotExhausted => ("not_exhausted", String::new()),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            m.muscle_id,
            sig9(m.mvc_n),
            sig9(m.k_per_min),
            sig9(m.peak_load_n),
            sig9(m.peak_relative_load),
            sig9(m.mean_relative_load),
            sig9(m.final_fcem_n),
            sig9(m.final_u_min),
            status,
            t_min
        ));
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path.to_path_buf(), e))
}

/// Write `report.json`, `summary.csv` and one `trajectory_<muscle>.csv`
/// per muscle into `directory` (created if missing). Returns the written
/// paths. Identical reports produce byte-identical files.
pub fn write_report(report: &FatigueReport, directory: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(directory).map_err(|e| Error::io(directory.to_path_buf(), e))?;
    let mut written = Vec::with_capacity(report.muscles.len() + 2);

    let json_path = directory.join("report.json");
    write_file(&json_path, &render_report_json(report)?)?;
    written.push(json_path);

    let summary_path = directory.join("summary.csv");
    write_file(&summary_path, &summary_csv(report))?;
    written.push(summary_path);

    for muscle in &report.muscles {
        let path = directory.join(format!("trajectory_{}.csv", muscle.muscle_id));
        write_file(&path, &trajectory_csv(muscle))?;
        written.push(path);
    }
    Ok(written)
}
