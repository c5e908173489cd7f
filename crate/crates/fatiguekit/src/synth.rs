//! Synthetic task generators for fixtures and tests.
//!
//! Real captures are noisy and their true phase boundaries are unknown;
//! these generators produce desk-scale recordings *with* their ground
//! truth, so segmentation and the full pipeline can be checked against
//! known answers. Two scenarios are provided: a constant-posture hold and
//! a repeated lift cycle that alternates dwell and move phases.
//!
//! Generation is deterministic for a given seed; the `FATIGUEKIT_SEED`
//! environment variable supplies one externally.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fatigue::{valid_id, LoadSample};
use crate::load::{render_two_column_csv, Interpolation, LoadProfile};
use crate::motion::{MotionFrame, MotionSeries, PhaseLabel, PhaseSpan};

/// Environment variable consulted for a generation seed.
pub const SEED_ENV_VAR: &str = "FATIGUEKIT_SEED";

/// Read the seed from `FATIGUEKIT_SEED`, if set.
pub fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV_VAR) {
        Ok(text) => {
            let seed = text.trim().parse::<u64>().map_err(|_| {
                Error::Config(format!(
                    "{SEED_ENV_VAR} must be an unsigned integer, got `{text}`"
                ))
            })?;
            Ok(Some(seed))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(std::env::VarError::NotUnicode(_)) => Err(Error::Config(format!(
            "{SEED_ENV_VAR} is not valid unicode"
        ))),
    }
}

/// Constant posture held for a fixed duration.
#[derive(Debug, Clone, PartialEq)]
pub struct HoldScenario {
    pub duration_min: f64,
    /// Frame rate, frames per minute (25 Hz = 1500).
    pub rate_per_min: f64,
    /// Held joint angles, radians from vertical.
    pub angles_rad: BTreeMap<String, f64>,
    /// Mass in the hands for the whole duration, kg.
    pub mass_kg: f64,
    /// Half-width of uniform angle noise, radians; 0 disables noise.
    pub noise_rad: f64,
    pub seed: u64,
}

/// Repeated dwell-then-move cycles between two postures.
///
/// Cycle `c` dwells at one posture for `dwell_min`, then moves linearly to
/// the other posture over `move_min`; cycles alternate direction, so
/// `cycles = 3` produces six phases (dwell, move, dwell, move, dwell,
/// move) by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftCycleScenario {
    pub cycles: u32,
    pub dwell_min: f64,
    pub move_min: f64,
    pub rate_per_min: f64,
    pub mass_kg: f64,
    pub rest_angles_rad: BTreeMap<String, f64>,
    pub lift_angles_rad: BTreeMap<String, f64>,
    pub noise_rad: f64,
    pub seed: u64,
}

/// Ground truth recorded alongside a generated scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// `"hold"` or `"lift_cycle"`.
    pub scenario: String,
    pub frames: usize,
    pub rate_per_min: f64,
    /// The true phase spans, clipped to the recording.
    pub phases: Vec<PhaseSpan>,
    /// Interior phase boundaries, minutes (empty for a hold).
    pub boundaries_min: Vec<f64>,
    pub seed: u64,
}

/// A generated scenario: the recording, its handled-mass timeline, and the
/// ground truth that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub motion: MotionSeries,
    pub mass: LoadProfile,
    pub truth: GroundTruth,
}

impl SynthOutput {
    pub fn motion_csv(&self) -> String {
        crate::motion::write_motion_csv(&self.motion)
    }

    pub fn mass_csv(&self) -> String {
        let LoadProfile::Sampled { samples, .. } = &self.mass else {
            unreachable!("synthetic mass timelines are sampled");
        };
        let rows: Vec<(f64, f64)> = samples.iter().map(|s| (s.t_min, s.f_load_n)).collect();
        render_two_column_csv("t_min,mass_kg", &rows)
    }

    pub fn ground_truth_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.truth)
            .map_err(|e| Error::Internal(format!("serializing ground truth: {e}")))
    }
}

fn check_angles(angles: &BTreeMap<String, f64>, what: &str) -> Result<()> {
    if angles.is_empty() {
        return Err(Error::Parameter(format!("{what} needs at least one joint")));
    }
    for (joint, angle) in angles {
        if !valid_id(joint) {
            return Err(Error::Parameter(format!(
                "{what}: joint `{joint}` must be ASCII letters, digits, `_` or `-`"
            )));
        }
        if !angle.is_finite() {
            return Err(Error::Parameter(format!(
                "{what}: angle for `{joint}` must be finite, got {angle}"
            )));
        }
    }
    Ok(())
}

fn check_common(rate_per_min: f64, mass_kg: f64, noise_rad: f64) -> Result<()> {
    if !(rate_per_min > 0.0) || !rate_per_min.is_finite() {
        return Err(Error::Parameter(format!(
            "frame rate must be > 0, got {rate_per_min}"
        )));
    }
    if !mass_kg.is_finite() || mass_kg < 0.0 {
        return Err(Error::Parameter(format!(
            "mass must be finite and >= 0, got {mass_kg}"
        )));
    }
    if !noise_rad.is_finite() || noise_rad < 0.0 {
        return Err(Error::Parameter(format!(
            "noise must be finite and >= 0, got {noise_rad}"
        )));
    }
    Ok(())
}

/// Frames for a recording of `duration_min` at `rate_per_min`:
/// `round(duration * rate)` frames at times `i / rate`.
fn frame_count(duration_min: f64, rate_per_min: f64) -> Result<usize> {
    if !(duration_min > 0.0) || !duration_min.is_finite() {
        return Err(Error::Parameter(format!(
            "duration must be > 0, got {duration_min} min"
        )));
    }
    let n = (duration_min * rate_per_min).round();
    if n < 2.0 {
        return Err(Error::Parameter(format!(
            "duration {duration_min} min at {rate_per_min} frames/min yields fewer than 2 frames"
        )));
    }
    Ok(n as usize)
}

fn constant_mass_timeline(mass_kg: f64, t_last: f64) -> Result<LoadProfile> {
    LoadProfile::sampled(
        vec![
            LoadSample::new(0.0, mass_kg)?,
            LoadSample::new(t_last, mass_kg)?,
        ],
        Interpolation::Hold,
    )
}

fn build_motion(
    joints: &[String],
    n: usize,
    rate: f64,
    noise_rad: f64,
    seed: u64,
    angle_at: impl Fn(&str, f64) -> f64,
) -> Result<MotionSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut frames = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / rate;
        let angles = joints
            .iter()
            .map(|j| {
                let clean = angle_at(j, t);
                if noise_rad > 0.0 {
                    clean + rng.gen_range(-noise_rad..=noise_rad)
                } else {
                    clean
                }
            })
            .collect();
        frames.push(MotionFrame {
            t_min: t,
            angles_rad: angles,
        });
    }
    MotionSeries::new(joints.to_vec(), frames)
}

/// Generate a constant-posture hold.
pub fn generate_hold(scenario: &HoldScenario) -> Result<SynthOutput> {
    check_common(scenario.rate_per_min, scenario.mass_kg, scenario.noise_rad)?;
    check_angles(&scenario.angles_rad, "hold scenario")?;
    let n = frame_count(scenario.duration_min, scenario.rate_per_min)?;
    let joints: Vec<String> = scenario.angles_rad.keys().cloned().collect();
    let motion = build_motion(
        &joints,
        n,
        scenario.rate_per_min,
        scenario.noise_rad,
        scenario.seed,
        |j, _| scenario.angles_rad[j],
    )?;
    let t_last = motion.t_last();
    let truth = GroundTruth {
        scenario: "hold".into(),
        frames: n,
        rate_per_min: scenario.rate_per_min,
        phases: vec![PhaseSpan {
            label: PhaseLabel::Dwell,
            t_start_min: 0.0,
            t_end_min: t_last,
        }],
        boundaries_min: vec![],
        seed: scenario.seed,
    };
    Ok(SynthOutput {
        motion,
        mass: constant_mass_timeline(scenario.mass_kg, t_last)?,
        truth,
    })
}

/// Generate alternating dwell/move lift cycles.
pub fn generate_lift_cycle(scenario: &LiftCycleScenario) -> Result<SynthOutput> {
    check_common(scenario.rate_per_min, scenario.mass_kg, scenario.noise_rad)?;
    check_angles(&scenario.rest_angles_rad, "lift-cycle rest posture")?;
    check_angles(&scenario.lift_angles_rad, "lift-cycle lift posture")?;
    if scenario.cycles == 0 {
        return Err(Error::Parameter("lift-cycle needs at least one cycle".into()));
    }
    if !(scenario.dwell_min > 0.0) || !scenario.dwell_min.is_finite() {
        return Err(Error::Parameter(format!(
            "dwell duration must be > 0, got {} min",
            scenario.dwell_min
        )));
    }
    if !(scenario.move_min > 0.0) || !scenario.move_min.is_finite() {
        return Err(Error::Parameter(format!(
            "move duration must be > 0, got {} min",
            scenario.move_min
        )));
    }
    let rest_joints: Vec<&String> = scenario.rest_angles_rad.keys().collect();
    let lift_joints: Vec<&String> = scenario.lift_angles_rad.keys().collect();
    if rest_joints != lift_joints {
        return Err(Error::Parameter(
            "rest and lift postures must name the same joints".into(),
        ));
    }

    let period = scenario.dwell_min + scenario.move_min;
    let total = scenario.cycles as f64 * period;
    let n = frame_count(total, scenario.rate_per_min)?;
    let joints: Vec<String> = scenario.rest_angles_rad.keys().cloned().collect();

    let posture_at = |joint: &str, t: f64| -> f64 {
        let rest = scenario.rest_angles_rad[joint];
        let lift = scenario.lift_angles_rad[joint];
        let cycle = ((t / period).floor() as u32).min(scenario.cycles - 1);
        let (from, to) = if cycle % 2 == 0 { (rest, lift) } else { (lift, rest) };
        let u = t - cycle as f64 * period;
        if u < scenario.dwell_min {
            from
        } else {
            from + (u - scenario.dwell_min) / scenario.move_min * (to - from)
        }
    };
    let motion = build_motion(
        &joints,
        n,
        scenario.rate_per_min,
        scenario.noise_rad,
        scenario.seed,
        posture_at,
    )?;
    let t_last = motion.t_last();

    let mut phases = Vec::with_capacity(2 * scenario.cycles as usize);
    let mut boundaries = Vec::new();
    for c in 0..scenario.cycles {
        let start = c as f64 * period;
        let mid = start + scenario.dwell_min;
        let end = ((c + 1) as f64 * period).min(t_last);
        phases.push(PhaseSpan {
            label: PhaseLabel::Dwell,
            t_start_min: start,
            t_end_min: mid,
        });
        phases.push(PhaseSpan {
            label: PhaseLabel::Move,
            t_start_min: mid,
            t_end_min: end,
        });
        boundaries.push(mid);
        if c + 1 < scenario.cycles {
            boundaries.push(end);
        }
    }
    let truth = GroundTruth {
        scenario: "lift_cycle".into(),
        frames: n,
        rate_per_min: scenario.rate_per_min,
        phases,
        boundaries_min: boundaries,
        seed: scenario.seed,
    };
    Ok(SynthOutput {
        motion,
        mass: constant_mass_timeline(scenario.mass_kg, t_last)?,
        truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn hold(duration_min: f64) -> HoldScenario {
        HoldScenario {
            duration_min,
            rate_per_min: 1500.0,
            angles_rad: BTreeMap::from([
                ("shoulder".to_string(), 1.0),
                ("elbow".to_string(), 0.5),
            ]),
            mass_kg: 5.0,
            noise_rad: 0.0,
            seed: 0,
        }
    }

    fn lift() -> LiftCycleScenario {
        LiftCycleScenario {
            cycles: 3,
            dwell_min: 0.08,
            move_min: 0.04,
            rate_per_min: 1500.0,
            mass_kg: 5.0,
            rest_angles_rad: BTreeMap::from([
                ("shoulder".to_string(), 0.3),
                ("elbow".to_string(), 0.5),
            ]),
            lift_angles_rad: BTreeMap::from([
                ("shoulder".to_string(), 1.2),
                ("elbow".to_string(), 1.0),
            ]),
            noise_rad: 0.0,
            seed: 0,
        }
    }

    #[test]
    fn hold_matches_the_frame_count_rule() {
        // 60 s at 25 Hz: 1500 frames, constant angles.
        let out = generate_hold(&hold(1.0)).unwrap();
        assert_eq!(out.motion.frames().len(), 1500);
        assert_eq!(out.truth.frames, 1500);
        for frame in out.motion.frames() {
            assert_eq!(frame.angles_rad, vec![0.5, 1.0]);
        }
        // 60.04 s lands one frame past the minute, ending at exactly 1.0.
        let out = generate_hold(&hold(60.04 / 60.0)).unwrap();
        assert_eq!(out.motion.frames().len(), 1501);
        assert_eq!(out.motion.t_last(), 1.0);
    }

    #[test]
    fn hold_ground_truth_is_one_dwell_span() {
        let out = generate_hold(&hold(1.0)).unwrap();
        assert_eq!(out.truth.phases.len(), 1);
        assert_eq!(out.truth.phases[0].label, PhaseLabel::Dwell);
        assert_eq!(out.truth.boundaries_min.len(), 0);
        assert_eq!(out.truth.phases[0].t_end_min, out.motion.t_last());
    }

    #[test]
    fn invalid_scenarios_are_rejected() {
        assert!(generate_hold(&hold(0.0)).is_err());
        assert!(generate_hold(&hold(-1.0)).is_err());
        let mut s = hold(1.0);
        s.mass_kg = -2.0;
        assert!(generate_hold(&s).is_err());
        let mut s = hold(1.0);
        s.angles_rad.clear();
        assert!(generate_hold(&s).is_err());

        let mut l = lift();
        l.cycles = 0;
        assert!(generate_lift_cycle(&l).is_err());
        let mut l = lift();
        l.lift_angles_rad.remove("elbow");
        assert!(generate_lift_cycle(&l).is_err());
        let mut l = lift();
        l.move_min = 0.0;
        assert!(generate_lift_cycle(&l).is_err());
    }

    #[test]
    fn lift_cycle_truth_has_two_phases_per_cycle() {
        let out = generate_lift_cycle(&lift()).unwrap();
        assert_eq!(out.truth.phases.len(), 6);
        assert_eq!(out.truth.boundaries_min.len(), 5);
        assert_eq!(out.motion.frames().len(), 540);
        let labels: Vec<PhaseLabel> = out.truth.phases.iter().map(|p| p.label).collect();
        assert_eq!(
            labels,
            vec![
                PhaseLabel::Dwell,
                PhaseLabel::Move,
                PhaseLabel::Dwell,
                PhaseLabel::Move,
                PhaseLabel::Dwell,
                PhaseLabel::Move
            ]
        );
        // Phases tile the recording.
        for pair in out.truth.phases.windows(2) {
            assert_abs_diff_eq!(pair[0].t_end_min, pair[1].t_start_min, epsilon = 1e-12);
        }
    }

    #[test]
    fn lift_cycle_alternates_and_stays_continuous() {
        let out = generate_lift_cycle(&lift()).unwrap();
        let m = &out.motion;
        let sh = m.joint_index("shoulder").unwrap();
        // Dwell 1 at rest, dwell 2 at lift, dwell 3 back at rest.
        assert_eq!(m.frames()[0].angles_rad[sh], 0.3);
        let at = |t: f64| m.angle_at("shoulder", t).unwrap();
        assert_abs_diff_eq!(at(0.15), 1.2, epsilon = 1e-9);
        assert_abs_diff_eq!(at(0.27), 0.3, epsilon = 1e-9);
        // No jumps: consecutive frames differ by at most the move slope.
        let max_step = (1.2 - 0.3) / lift().move_min / 1500.0;
        for pair in m.frames().windows(2) {
            let d = (pair[1].angles_rad[sh] - pair[0].angles_rad[sh]).abs();
            assert!(d <= max_step * 1.0001, "jump of {d} rad");
        }
    }

    #[test]
    fn segmentation_recovers_lift_cycle_boundaries() {
        let out = generate_lift_cycle(&lift()).unwrap();
        let spans = out.motion.segment_phases(15.0, 1.0 / 240.0).unwrap();
        assert_eq!(spans.len(), out.truth.phases.len(), "{spans:?}");
        let frame = 1.0 / 1500.0;
        for (found, truth) in spans.iter().zip(&out.truth.phases) {
            assert_eq!(found.label, truth.label);
            assert!(
                (found.t_start_min - truth.t_start_min).abs() <= 2.0 * frame + 1e-12,
                "start {} vs truth {}",
                found.t_start_min,
                truth.t_start_min
            );
        }
    }

    #[test]
    fn noise_is_seeded_and_bounded() {
        let mut noisy = hold(0.2);
        noisy.noise_rad = 0.01;
        let a = generate_hold(&noisy).unwrap();
        let b = generate_hold(&noisy).unwrap();
        assert_eq!(a.motion, b.motion, "same seed, same frames");

        let mut other = noisy.clone();
        other.seed = 1;
        let c = generate_hold(&other).unwrap();
        assert_ne!(a.motion, c.motion, "different seed, different noise");

        for frame in a.motion.frames() {
            assert!((frame.angles_rad[1] - 1.0).abs() <= 0.01 + 1e-12);
            assert!((frame.angles_rad[0] - 0.5).abs() <= 0.01 + 1e-12);
        }
    }

    #[test]
    fn rendered_files_parse_back() {
        let out = generate_lift_cycle(&lift()).unwrap();
        let motion = crate::motion::parse_motion_csv(&out.motion_csv()).unwrap();
        assert_eq!(motion, out.motion);
        let mass = crate::load::parse_mass_csv(&out.mass_csv(), Interpolation::Hold).unwrap();
        assert_eq!(mass, out.mass);
        let truth: GroundTruth =
            serde_json::from_str(&out.ground_truth_json().unwrap()).unwrap();
        assert_eq!(truth, out.truth);
    }
}
