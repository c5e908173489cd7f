//! Recorded joint-angle trajectories and their segmentation into work
//! phases.
//!
//! A [`MotionSeries`] is a fixed set of named joints sampled at strictly
//! increasing times. [`segment_phases`](MotionSeries::segment_phases) splits
//! the recording into alternating `dwell` (quasi-static posture) and `move`
//! spans by thresholding joint angular speed, which is the basis for both
//! per-phase fatigue attribution and the move/total efficiency figure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fatigue::valid_id;
use crate::load::parse_finite;

/// Joint angles (radians) at one instant, in the series' joint order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionFrame {
    pub t_min: f64,
    pub angles_rad: Vec<f64>,
}

/// A multi-joint angle recording on a strictly increasing time base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionSeries {
    joints: Vec<String>,
    frames: Vec<MotionFrame>,
}

/// Label of one segmented span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseLabel {
    /// Quasi-static posture: every joint slower than the threshold.
    Dwell,
    /// At least one joint moving at or above the threshold.
    Move,
}

impl PhaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseLabel::Dwell => "dwell",
            PhaseLabel::Move => "move",
        }
    }
}

/// One labelled time span. Spans returned by segmentation partition the
/// recording: each `t_end_min` equals the next span's `t_start_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpan {
    pub label: PhaseLabel,
    pub t_start_min: f64,
    pub t_end_min: f64,
}

impl PhaseSpan {
    pub fn duration_min(&self) -> f64 {
        self.t_end_min - self.t_start_min
    }
}

/// One span scored against its label's standard time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseEfficiency {
    pub label: PhaseLabel,
    pub t_start_min: f64,
    pub t_end_min: f64,
    pub actual_min: f64,
    pub standard_min: f64,
    /// `standard_min / actual_min`; above 1 means faster than standard.
    pub ratio: f64,
}

/// Per-phase and overall comparison of actual durations to standard times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencySummary {
    pub per_phase: Vec<PhaseEfficiency>,
    pub standard_total_min: f64,
    pub actual_total_min: f64,
    /// `standard_total_min / actual_total_min`.
    pub overall_ratio: f64,
}

impl MotionSeries {
    pub fn new(joints: Vec<String>, frames: Vec<MotionFrame>) -> Result<Self> {
        if joints.is_empty() {
            return Err(Error::Invalid("a motion series needs at least one joint".into()));
        }
        for (i, j) in joints.iter().enumerate() {
            if !valid_id(j) {
                return Err(Error::Invalid(format!(
                    "joint name `{j}` must be non-empty ASCII letters, digits, `_` or `-`"
                )));
            }
            if joints[..i].contains(j) {
                return Err(Error::Invalid(format!("duplicate joint name `{j}`")));
            }
        }
        if frames.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "a motion series needs at least 2 frames, got {}",
                frames.len()
            )));
        }
        for (i, frame) in frames.iter().enumerate() {
            if !frame.t_min.is_finite() || frame.t_min < 0.0 {
                return Err(Error::Invalid(format!(
                    "frame {i}: time must be finite and >= 0, got {}",
                    frame.t_min
                )));
            }
            if i > 0 && frame.t_min <= frames[i - 1].t_min {
                return Err(Error::Invalid(format!(
                    "frame {i}: timestamps must be strictly increasing ({} after {})",
                    frame.t_min,
                    frames[i - 1].t_min
                )));
            }
            if frame.angles_rad.len() != joints.len() {
                return Err(Error::Invalid(format!(
                    "frame {i}: expected {} angles, got {}",
                    joints.len(),
                    frame.angles_rad.len()
                )));
            }
            for (j, a) in frame.angles_rad.iter().enumerate() {
                if !a.is_finite() {
                    return Err(Error::Invalid(format!(
                        "frame {i}, joint `{}`: angle must be finite, got {a}",
                        joints[j]
                    )));
                }
            }
        }
        Ok(MotionSeries { joints, frames })
    }

    pub fn joints(&self) -> &[String] {
        &self.joints
    }

    pub fn frames(&self) -> &[MotionFrame] {
        &self.frames
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j == name)
    }

    pub fn t_first(&self) -> f64 {
        self.frames[0].t_min
    }

    pub fn t_last(&self) -> f64 {
        self.frames[self.frames.len() - 1].t_min
    }

    pub fn duration_min(&self) -> f64 {
        self.t_last() - self.t_first()
    }

    /// Average frame rate over the recording, frames per minute.
    pub fn rate_per_min(&self) -> f64 {
        (self.frames.len() - 1) as f64 / self.duration_min()
    }

    /// Angle of `joint` at `t_min`, linearly interpolated between frames.
    pub fn angle_at(&self, joint: &str, t_min: f64) -> Result<f64> {
        let idx = self
            .joint_index(joint)
            .ok_or_else(|| Error::Invalid(format!("unknown joint `{joint}`")))?;
        let eps = 1e-12 * self.t_last().abs().max(1.0);
        if t_min < self.t_first() - eps || t_min > self.t_last() + eps {
            return Err(Error::Domain(format!(
                "t = {t_min} min is outside the recording [{}, {}] min",
                self.t_first(),
                self.t_last()
            )));
        }
        let t = t_min.clamp(self.t_first(), self.t_last());
        let pos = self
            .frames
            .binary_search_by(|f| f.t_min.partial_cmp(&t).expect("finite times"));
        let i = match pos {
            Ok(i) => return Ok(self.frames[i].angles_rad[idx]),
            Err(ins) => ins.saturating_sub(1).min(self.frames.len() - 2),
        };
        let (f0, f1) = (&self.frames[i], &self.frames[i + 1]);
        if (t - f0.t_min).abs() <= eps {
            return Ok(f0.angles_rad[idx]);
        }
        if (t - f1.t_min).abs() <= eps {
            return Ok(f1.angles_rad[idx]);
        }
        let w = (t - f0.t_min) / (f1.t_min - f0.t_min);
        Ok(f0.angles_rad[idx] + w * (f1.angles_rad[idx] - f0.angles_rad[idx]))
    }

    /// Resample onto a uniform grid at `rate_per_min` covering the same
    /// span, interpolating angles linearly. Frame times that land on source
    /// frames reproduce them exactly.
    pub fn resample(&self, rate_per_min: f64) -> Result<MotionSeries> {
        if !(rate_per_min > 0.0) || !rate_per_min.is_finite() {
            return Err(Error::Parameter(format!(
                "frame rate must be > 0, got {rate_per_min}"
            )));
        }
        let span = self.duration_min();
        let n = crate::fatigue::steps_covering(span, 1.0 / rate_per_min);
        let h = span / n as f64;
        // Resampling at the source's own uniform grid must reproduce it
        // frame for frame, so detect that case instead of rebuilding times
        // that would differ in the last bits.
        if n + 1 == self.frames.len() {
            let eps = n as f64 * f64::EPSILON * self.t_last().abs().max(1.0);
            let matches_source = self
                .frames
                .iter()
                .enumerate()
                .all(|(i, f)| (f.t_min - (self.t_first() + i as f64 * h)).abs() <= eps);
            if matches_source {
                return Ok(self.clone());
            }
        }
        let mut frames = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let t = if i == n {
                self.t_last()
            } else {
                self.t_first() + i as f64 * h
            };
            let angles = self
                .joints
                .iter()
                .map(|j| self.angle_at(j, t))
                .collect::<Result<Vec<_>>>()?;
            frames.push(MotionFrame {
                t_min: t,
                angles_rad: angles,
            });
        }
        MotionSeries::new(self.joints.clone(), frames)
    }

    /// Per-frame angular speed: the max over joints of `|dangle/dt|`,
    /// rad/min, by central differences (one-sided at the ends).
    pub fn frame_speeds(&self) -> Vec<f64> {
        let n = self.frames.len();
        let mut speeds = vec![0.0; n];
        for i in 0..n {
            let (a, b) = if i == 0 {
                (0, 1)
            } else if i == n - 1 {
                (n - 2, n - 1)
            } else {
                (i - 1, i + 1)
            };
            let dt = self.frames[b].t_min - self.frames[a].t_min;
            let mut fastest = 0.0f64;
            for j in 0..self.joints.len() {
                let v = (self.frames[b].angles_rad[j] - self.frames[a].angles_rad[j]) / dt;
                fastest = fastest.max(v.abs());
            }
            speeds[i] = fastest;
        }
        speeds
    }

    /// Split the recording into dwell/move spans.
    ///
    /// Frames at or above `velocity_threshold_rad_per_min` (max over joints)
    /// are movement. Runs shorter than `min_phase_duration_min` are treated
    /// as noise and absorbed into the preceding span (a short leading run
    /// joins the following one), then adjacent same-label spans merge. The
    /// result partitions `[t_first, t_last]` and alternates labels.
    pub fn segment_phases(
        &self,
        velocity_threshold_rad_per_min: f64,
        min_phase_duration_min: f64,
    ) -> Result<Vec<PhaseSpan>> {
        if !(velocity_threshold_rad_per_min > 0.0) || !velocity_threshold_rad_per_min.is_finite() {
            return Err(Error::Parameter(format!(
                "velocity threshold must be > 0, got {velocity_threshold_rad_per_min}"
            )));
        }
        if !min_phase_duration_min.is_finite() || min_phase_duration_min < 0.0 {
            return Err(Error::Parameter(format!(
                "min phase duration must be finite and >= 0, got {min_phase_duration_min}"
            )));
        }
        let speeds = self.frame_speeds();
        let labels: Vec<PhaseLabel> = speeds
            .iter()
            .map(|&v| {
                if v >= velocity_threshold_rad_per_min {
                    PhaseLabel::Move
                } else {
                    PhaseLabel::Dwell
                }
            })
            .collect();

        // Run-length encode into (label, first frame index).
        let mut runs: Vec<(PhaseLabel, usize)> = Vec::new();
        for (i, &label) in labels.iter().enumerate() {
            if runs.last().map(|&(l, _)| l) != Some(label) {
                runs.push((label, i));
            }
        }
        let run_end_time = |run_idx: usize| -> f64 {
            match runs.get(run_idx + 1) {
                Some(&(_, start)) => self.frames[start].t_min,
                None => self.t_last(),
            }
        };

        // Absorb runs shorter than the minimum duration. Skipping a run
        // extends the previously kept one; leading short runs carry their
        // start forward into the first kept run.
        let mut kept: Vec<(PhaseLabel, usize)> = Vec::new();
        let mut carry: Option<usize> = None;
        for (i, &(label, start)) in runs.iter().enumerate() {
            let duration = run_end_time(i) - self.frames[start].t_min;
            let effective_start = carry.take().unwrap_or(start);
            if duration < min_phase_duration_min && runs.len() > 1 {
                if kept.is_empty() {
                    carry = Some(effective_start);
                }
                continue;
            }
            kept.push((label, effective_start));
        }
        if kept.is_empty() {
            // Every run was short: fall back to the longest run's label.
            let longest = (0..runs.len())
                .max_by(|&a, &b| {
                    let da = run_end_time(a) - self.frames[runs[a].1].t_min;
                    let db = run_end_time(b) - self.frames[runs[b].1].t_min;
                    da.partial_cmp(&db).expect("finite durations")
                })
                .expect("at least one run");
            kept.push((runs[longest].0, 0));
        }

        // Coalesce adjacent spans that ended up with the same label.
        let mut coalesced: Vec<(PhaseLabel, usize)> = Vec::new();
        for (label, start) in kept {
            if coalesced.last().map(|&(l, _)| l) == Some(label) {
                continue;
            }
            coalesced.push((label, start));
        }

        let mut spans = Vec::with_capacity(coalesced.len());
        for (i, &(label, start)) in coalesced.iter().enumerate() {
            let t_end = match coalesced.get(i + 1) {
                Some(&(_, next_start)) => self.frames[next_start].t_min,
                None => self.t_last(),
            };
            spans.push(PhaseSpan {
                label,
                t_start_min: self.frames[start].t_min,
                t_end_min: t_end,
            });
        }
        Ok(spans)
    }
}

/// Score spans against per-label standard times (minutes).
///
/// Each span's ratio is `standard / actual`, and the overall ratio is the
/// sum of standards over the sum of actual durations, so values above 1
/// mean the work ran faster than standard. Every label occurring in
/// `spans` must have a standard time.
pub fn efficiency_ratio(
    spans: &[PhaseSpan],
    standard_times_min: &std::collections::BTreeMap<String, f64>,
) -> Result<EfficiencySummary> {
    if spans.is_empty() {
        return Err(Error::Invalid("cannot compute efficiency of zero spans".into()));
    }
    for (label, &std_min) in standard_times_min {
        if !std_min.is_finite() || std_min <= 0.0 {
            return Err(Error::Config(format!(
                "standard time for `{label}` must be finite and > 0, got {std_min}"
            )));
        }
    }
    let mut per_phase = Vec::with_capacity(spans.len());
    let mut standard_total_min = 0.0;
    let mut actual_total_min = 0.0;
    for span in spans {
        let Some(&standard_min) = standard_times_min.get(span.label.as_str()) else {
            return Err(Error::Config(format!(
                "no standard time configured for phase label `{}`",
                span.label.as_str()
            )));
        };
        let actual_min = span.duration_min();
        if !(actual_min > 0.0) {
            return Err(Error::Invalid(format!(
                "span [{}, {}] has non-positive duration",
                span.t_start_min, span.t_end_min
            )));
        }
        standard_total_min += standard_min;
        actual_total_min += actual_min;
        per_phase.push(PhaseEfficiency {
            label: span.label,
            t_start_min: span.t_start_min,
            t_end_min: span.t_end_min,
            actual_min,
            standard_min,
            ratio: standard_min / actual_min,
        });
    }
    Ok(EfficiencySummary {
        per_phase,
        standard_total_min,
        actual_total_min,
        overall_ratio: standard_total_min / actual_total_min,
    })
}

/// Parse the motion CSV format.
///
/// Header `t_min,<joint>_rad,...` names the joints; each row carries one
/// frame. Lines starting with `#` and blank lines are ignored.
pub fn parse_motion_csv(text: &str) -> Result<MotionSeries> {
    let mut joints: Option<Vec<String>> = None;
    let mut frames: Vec<MotionFrame> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let Some(joints) = &joints else {
            if fields.first() != Some(&"t_min") {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!(
                        "header must start with `t_min`, got `{}`",
                        fields.first().unwrap_or(&"")
                    ),
                });
            }
            if fields.len() < 2 {
                return Err(Error::Parse {
                    line: line_no,
                    message: "header needs at least one `<joint>_rad` column".into(),
                });
            }
            let mut names = Vec::with_capacity(fields.len() - 1);
            for col in &fields[1..] {
                let Some(name) = col.strip_suffix("_rad") else {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("angle column `{col}` must end in `_rad`"),
                    });
                };
                names.push(name.to_string());
            }
            joints = Some(names);
            continue;
        };
        if fields.len() != joints.len() + 1 {
            return Err(Error::Parse {
                line: line_no,
                message: format!(
                    "expected {} fields (t_min + {} angles), got {}",
                    joints.len() + 1,
                    joints.len(),
                    fields.len()
                ),
            });
        }
        let t = parse_finite(fields[0], line_no, "time")?;
        if let Some(last) = frames.last() {
            if t <= last.t_min {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!(
                        "timestamps must be strictly increasing ({t} after {})",
                        last.t_min
                    ),
                });
            }
        }
        let mut angles = Vec::with_capacity(joints.len());
        for field in &fields[1..] {
            angles.push(parse_finite(field, line_no, "angle")?);
        }
        frames.push(MotionFrame {
            t_min: t,
            angles_rad: angles,
        });
    }
    let Some(joints) = joints else {
        return Err(Error::Parse {
            line: 1,
            message: "missing motion header `t_min,<joint>_rad,...`".into(),
        });
    };
    MotionSeries::new(joints, frames)
}

/// Render a series back to the motion CSV format, full precision.
pub fn write_motion_csv(series: &MotionSeries) -> String {
    let mut out = String::from("t_min");
    for j in series.joints() {
        out.push(',');
        out.push_str(j);
        out.push_str("_rad");
    }
    out.push('\n');
    for frame in series.frames() {
        out.push_str(&format!("{}", frame.t_min));
        for a in &frame.angles_rad {
            out.push_str(&format!(",{a}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// One joint: dwell at 0 for 0.4 min, ramp to 1 rad over 0.2 min,
    /// dwell there until 1.0 min. Sampled every 0.02 min.
    fn dwell_move_dwell() -> MotionSeries {
        let mut frames = Vec::new();
        for i in 0..=50 {
            let t = i as f64 * 0.02;
            let angle = if t <= 0.4 {
                0.0
            } else if t < 0.6 {
                (t - 0.4) * 5.0
            } else {
                1.0
            };
            frames.push(MotionFrame {
                t_min: t,
                angles_rad: vec![angle],
            });
        }
        MotionSeries::new(vec!["elbow".into()], frames).unwrap()
    }

    #[test]
    fn parse_motion_csv_happy_path() {
        let text = "\
# capture demo
t_min,shoulder_rad,elbow_rad

0.00,0.1,1.50
0.04,0.2,1.45
0.08,0.3,1.40
";
        let m = parse_motion_csv(text).unwrap();
        assert_eq!(m.joints(), ["shoulder".to_string(), "elbow".to_string()]);
        assert_eq!(m.frames().len(), 3);
        assert_eq!(m.frames()[1].angles_rad, vec![0.2, 1.45]);
        assert_relative_eq!(m.rate_per_min(), 25.0, max_relative = 1e-12);
    }

    #[test]
    fn parse_motion_csv_errors_carry_line_numbers() {
        let missing_suffix = "t_min,shoulder\n0,1\n0.1,2\n";
        assert!(matches!(
            parse_motion_csv(missing_suffix),
            Err(Error::Parse { line: 1, .. })
        ));
        let wrong_arity = "t_min,a_rad,b_rad\n0,1,2\n0.1,3\n";
        assert!(matches!(
            parse_motion_csv(wrong_arity),
            Err(Error::Parse { line: 3, .. })
        ));
        let backwards = "t_min,a_rad\n0,1\n0.2,2\n0.1,3\n";
        assert!(matches!(
            parse_motion_csv(backwards),
            Err(Error::Parse { line: 4, .. })
        ));
        let too_short = "t_min,a_rad\n0,1\n";
        assert!(parse_motion_csv(too_short).is_err());
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let m = dwell_move_dwell();
        let text = write_motion_csv(&m);
        let back = parse_motion_csv(&text).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn frame_rate_of_a_25hz_minute() {
        // 1500 frames spanning one minute (25 Hz).
        let frames: Vec<MotionFrame> = (0..1500)
            .map(|i| MotionFrame {
                t_min: i as f64 / 1500.0,
                angles_rad: vec![0.0],
            })
            .collect();
        let m = MotionSeries::new(vec!["hip".into()], frames).unwrap();
        assert_relative_eq!(m.rate_per_min(), 1500.0, max_relative = 1e-12);
    }

    #[test]
    fn angle_interpolation_and_domain() {
        let m = dwell_move_dwell();
        assert_abs_diff_eq!(m.angle_at("elbow", 0.5).unwrap(), 0.5, epsilon = 1e-12);
        assert_eq!(m.angle_at("elbow", 0.2).unwrap(), 0.0);
        assert!(m.angle_at("elbow", 1.5).is_err());
        assert!(m.angle_at("wrist", 0.5).is_err());
    }

    #[test]
    fn resample_halves_the_rate() {
        let m = dwell_move_dwell();
        let r = m.resample(25.0).unwrap();
        assert_eq!(r.frames().len(), 26);
        assert_relative_eq!(r.rate_per_min(), 25.0, max_relative = 1e-12);
        assert_eq!(r.t_first(), m.t_first());
        assert_eq!(r.t_last(), m.t_last());
        // Values on shared grid points are untouched.
        assert_eq!(r.frames()[5].angles_rad[0], m.angle_at("elbow", r.frames()[5].t_min).unwrap());
    }

    #[test]
    fn segments_dwell_move_dwell() {
        let m = dwell_move_dwell();
        let spans = m.segment_phases(2.0, 0.05).unwrap();
        let labels: Vec<PhaseLabel> = spans.iter().map(|s| s.label).collect();
        assert_eq!(
            labels,
            vec![PhaseLabel::Dwell, PhaseLabel::Move, PhaseLabel::Dwell]
        );
        // Boundaries land within one frame of the true corners.
        assert_abs_diff_eq!(spans[0].t_end_min, 0.4, epsilon = 0.021);
        assert_abs_diff_eq!(spans[1].t_end_min, 0.6, epsilon = 0.021);
        // Spans partition the recording.
        assert_eq!(spans[0].t_start_min, 0.0);
        assert_eq!(spans[2].t_end_min, 1.0);
        assert_eq!(spans[0].t_end_min, spans[1].t_start_min);
        assert_eq!(spans[1].t_end_min, spans[2].t_start_min);
    }

    #[test]
    fn single_frame_blip_is_absorbed() {
        let mut frames = Vec::new();
        for i in 0..=50 {
            let t = i as f64 * 0.02;
            let angle = if i == 25 { 0.08 } else { 0.0 };
            frames.push(MotionFrame {
                t_min: t,
                angles_rad: vec![angle],
            });
        }
        let m = MotionSeries::new(vec!["elbow".into()], frames).unwrap();
        let spans = m.segment_phases(2.0, 0.05).unwrap();
        assert_eq!(spans.len(), 1, "{spans:?}");
        assert_eq!(spans[0].label, PhaseLabel::Dwell);
        assert_eq!((spans[0].t_start_min, spans[0].t_end_min), (0.0, 1.0));
    }

    #[test]
    fn short_leading_run_joins_the_following_span() {
        let mut frames = Vec::new();
        for i in 0..=50 {
            let t = i as f64 * 0.02;
            let angle = if i == 0 { 0.1 } else { 0.0 };
            frames.push(MotionFrame {
                t_min: t,
                angles_rad: vec![angle],
            });
        }
        let m = MotionSeries::new(vec!["elbow".into()], frames).unwrap();
        let spans = m.segment_phases(2.0, 0.05).unwrap();
        assert_eq!(spans.len(), 1, "{spans:?}");
        assert_eq!(spans[0].label, PhaseLabel::Dwell);
        assert_eq!(spans[0].t_start_min, 0.0);
    }

    #[test]
    fn efficiency_against_standard_times() {
        use std::collections::BTreeMap;
        let spans = vec![
            PhaseSpan {
                label: PhaseLabel::Dwell,
                t_start_min: 0.0,
                t_end_min: 0.2,
            },
            PhaseSpan {
                label: PhaseLabel::Move,
                t_start_min: 0.2,
                t_end_min: 0.6,
            },
        ];
        let standards =
            BTreeMap::from([("dwell".to_string(), 0.3), ("move".to_string(), 0.3)]);
        let eff = efficiency_ratio(&spans, &standards).unwrap();
        // Standards (0.3, 0.3) against actuals (0.2, 0.4).
        assert_relative_eq!(eff.per_phase[0].ratio, 1.5, max_relative = 1e-12);
        assert_relative_eq!(eff.per_phase[1].ratio, 0.75, max_relative = 1e-12);
        assert_relative_eq!(eff.overall_ratio, 1.0, max_relative = 1e-12);

        // Actual equal to standard everywhere: all ratios are 1.
        let matched =
            BTreeMap::from([("dwell".to_string(), 0.2), ("move".to_string(), 0.4)]);
        let eff = efficiency_ratio(&spans, &matched).unwrap();
        assert!(eff.per_phase.iter().all(|p| (p.ratio - 1.0).abs() < 1e-12));
        assert_relative_eq!(eff.overall_ratio, 1.0, max_relative = 1e-12);

        // A single phase, standard 0.5 against actual 1.0.
        let one = vec![PhaseSpan {
            label: PhaseLabel::Dwell,
            t_start_min: 0.0,
            t_end_min: 1.0,
        }];
        let eff =
            efficiency_ratio(&one, &BTreeMap::from([("dwell".to_string(), 0.5)])).unwrap();
        assert_relative_eq!(eff.per_phase[0].ratio, 0.5, max_relative = 1e-12);

        // A label without a standard time is a configuration error.
        let missing = BTreeMap::from([("dwell".to_string(), 0.3)]);
        assert!(matches!(
            efficiency_ratio(&spans, &missing),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn resample_at_own_rate_is_identity() {
        let m = dwell_move_dwell();
        let r = m.resample(m.rate_per_min()).unwrap();
        assert_eq!(m, r);
    }

    #[test]
    fn resample_bounds_interpolation_error_on_a_sine() {
        // One joint swinging as sin(2*pi*25*t): 60 samples per cycle at
        // 1500 frames/min. Upsampling the linear interpolant to twice the
        // rate must stay within h^2 * max|angle''| / 8 of the true sine.
        let omega = 2.0 * PI * 25.0;
        let frames: Vec<MotionFrame> = (0..=300)
            .map(|i| {
                let t = i as f64 / 1500.0;
                MotionFrame {
                    t_min: t,
                    angles_rad: vec![(omega * t).sin()],
                }
            })
            .collect();
        let m = MotionSeries::new(vec!["wrist".into()], frames).unwrap();
        let up = m.resample(3000.0).unwrap();
        let h = 1.0 / 1500.0;
        let bound = h * h * omega * omega / 8.0;
        for frame in up.frames() {
            let truth = (omega * frame.t_min).sin();
            assert!(
                (frame.angles_rad[0] - truth).abs() <= bound,
                "deviation {} above bound {bound} at t = {}",
                (frame.angles_rad[0] - truth).abs(),
                frame.t_min
            );
        }
    }

    #[test]
    fn oversized_min_duration_collapses_to_one_span() {
        let m = dwell_move_dwell();
        let spans = m.segment_phases(2.0, 10.0).unwrap();
        assert_eq!(spans.len(), 1);
        assert_eq!((spans[0].t_start_min, spans[0].t_end_min), (0.0, 1.0));
    }

    #[test]
    fn rejects_malformed_series() {
        assert!(MotionSeries::new(vec![], vec![]).is_err());
        let f = |t: f64| MotionFrame {
            t_min: t,
            angles_rad: vec![0.0],
        };
        assert!(MotionSeries::new(vec!["a".into()], vec![f(0.0)]).is_err());
        assert!(
            MotionSeries::new(vec!["a".into(), "a".into()], vec![f(0.0), f(1.0)]).is_err(),
            "duplicate joints"
        );
        let bad_arity = vec![
            MotionFrame {
                t_min: 0.0,
                angles_rad: vec![0.0, 1.0],
            },
            f(1.0),
        ];
        assert!(MotionSeries::new(vec!["a".into(), "b".into()], bad_arity).is_err());
    }

    proptest! {
        #[test]
        fn spans_partition_and_alternate(
            seed_angles in proptest::collection::vec(-0.5_f64..0.5, 40..120),
            threshold in 1.0_f64..50.0,
            min_dur in 0.0_f64..0.1,
        ) {
            let frames: Vec<MotionFrame> = seed_angles
                .iter()
                .enumerate()
                .map(|(i, &a)| MotionFrame {
                    t_min: i as f64 * 0.01,
                    angles_rad: vec![a],
                })
                .collect();
            let m = MotionSeries::new(vec!["j".into()], frames).unwrap();
            let spans = m.segment_phases(threshold, min_dur).unwrap();
            prop_assert!(!spans.is_empty());
            prop_assert_eq!(spans[0].t_start_min, m.t_first());
            prop_assert_eq!(spans[spans.len() - 1].t_end_min, m.t_last());
            for pair in spans.windows(2) {
                prop_assert_eq!(pair[0].t_end_min, pair[1].t_start_min);
                prop_assert!(pair[0].label != pair[1].label);
            }
            for s in &spans {
                prop_assert!(s.duration_min() > 0.0);
            }
        }
    }
}
