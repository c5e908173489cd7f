//! Planar static biomechanics: from posture and handled mass to joint
//! torques and per-muscle demanded forces.
//!
//! The body model is a sagittal-plane chain of rigid segments hanging from
//! a fixed proximal joint. Each joint angle is measured from the vertical,
//! so an angle of 0 lets the segment hang straight down and `pi/2` holds it
//! horizontal. Motion is treated quasi-statically: gravity on the segments
//! and on the handled mass (a point load at the chain's end) is balanced by
//! joint torques, and each torque is assigned to the muscles spanning that
//! joint in fixed shares.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fatigue::{valid_id, LoadSample, MuscleParameters};
use crate::load::{Interpolation, LoadProfile};
use crate::motion::MotionSeries;

/// Standard gravity, m/s^2.
pub const GRAVITY_M_PER_S2: f64 = 9.81;

/// One rigid segment, attached at its proximal joint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub name: String,
    /// Proximal joint this segment pivots about. Segment order in the
    /// profile defines the chain: each segment hangs from the previous
    /// one's distal end.
    pub joint: String,
    pub length_m: f64,
    pub mass_kg: f64,
    /// Centre-of-mass position as a fraction of length from the proximal
    /// end, in `[0, 1]`.
    pub com_ratio: f64,
}

/// Joint-level capability limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointSpec {
    /// Largest torque the joint can sustain, N*m.
    pub max_torque_nm: f64,
}

/// One muscle (or muscle group) acting about a joint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuscleSpec {
    pub muscle_id: String,
    pub joint: String,
    /// Effective moment arm, metres.
    pub moment_arm_m: f64,
    /// Fraction of the joint torque this muscle carries; shares on one
    /// joint must sum to 1.
    pub share: f64,
    /// Maximum voluntary contraction, newtons.
    pub mvc_n: f64,
    /// Fatigability rate, 1/min.
    pub k_per_min: f64,
}

fn default_angle_limit() -> f64 {
    PI
}

/// A worker's segment chain, joint limits and muscle set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkerProfile {
    pub name: String,
    pub segments: Vec<SegmentSpec>,
    /// Capability limits by joint name; joints may be omitted.
    #[serde(default)]
    pub joints: BTreeMap<String, JointSpec>,
    pub muscles: Vec<MuscleSpec>,
    /// Largest joint angle magnitude accepted as a valid posture, radians.
    #[serde(default = "default_angle_limit")]
    pub angle_limit_rad: f64,
}

impl WorkerProfile {
    pub fn from_json(text: &str) -> Result<Self> {
        let profile: WorkerProfile =
            serde_json::from_str(text).map_err(|e| Error::Schema(format!("worker profile: {e}")))?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Internal(format!("serializing worker profile: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Schema("worker profile name must not be empty".into()));
        }
        if self.segments.is_empty() {
            return Err(Error::Schema("worker profile needs at least one segment".into()));
        }
        if !self.angle_limit_rad.is_finite() || self.angle_limit_rad <= 0.0 {
            return Err(Error::Schema(format!(
                "angle_limit_rad must be finite and > 0, got {}",
                self.angle_limit_rad
            )));
        }
        for (i, seg) in self.segments.iter().enumerate() {
            if !valid_id(&seg.name) {
                return Err(Error::Schema(format!(
                    "segment {i}: name `{}` must be ASCII letters, digits, `_` or `-`",
                    seg.name
                )));
            }
            if !valid_id(&seg.joint) {
                return Err(Error::Schema(format!(
                    "segment `{}`: joint `{}` must be ASCII letters, digits, `_` or `-`",
                    seg.name, seg.joint
                )));
            }
            if self.segments[..i].iter().any(|s| s.name == seg.name) {
                return Err(Error::Schema(format!("duplicate segment name `{}`", seg.name)));
            }
            if self.segments[..i].iter().any(|s| s.joint == seg.joint) {
                return Err(Error::Schema(format!(
                    "joint `{}` is the pivot of more than one segment",
                    seg.joint
                )));
            }
            if !seg.length_m.is_finite() || seg.length_m <= 0.0 {
                return Err(Error::Schema(format!(
                    "segment `{}`: length_m must be finite and > 0, got {}",
                    seg.name, seg.length_m
                )));
            }
            if !seg.mass_kg.is_finite() || seg.mass_kg < 0.0 {
                return Err(Error::Schema(format!(
                    "segment `{}`: mass_kg must be finite and >= 0, got {}",
                    seg.name, seg.mass_kg
                )));
            }
            if !seg.com_ratio.is_finite() || !(0.0..=1.0).contains(&seg.com_ratio) {
                return Err(Error::Schema(format!(
                    "segment `{}`: com_ratio must lie in [0, 1], got {}",
                    seg.name, seg.com_ratio
                )));
            }
        }
        for (joint, spec) in &self.joints {
            if !self.segments.iter().any(|s| &s.joint == joint) {
                return Err(Error::Schema(format!(
                    "joint limit references unknown joint `{joint}`"
                )));
            }
            if !spec.max_torque_nm.is_finite() || spec.max_torque_nm <= 0.0 {
                return Err(Error::Schema(format!(
                    "joint `{joint}`: max_torque_nm must be finite and > 0, got {}",
                    spec.max_torque_nm
                )));
            }
        }
        let mut share_sums: BTreeMap<&str, f64> = BTreeMap::new();
        for (i, m) in self.muscles.iter().enumerate() {
            if !valid_id(&m.muscle_id) {
                return Err(Error::Schema(format!(
                    "muscle {i}: id `{}` must be ASCII letters, digits, `_` or `-`",
                    m.muscle_id
                )));
            }
            if self.muscles[..i].iter().any(|o| o.muscle_id == m.muscle_id) {
                return Err(Error::Schema(format!("duplicate muscle id `{}`", m.muscle_id)));
            }
            if !self.segments.iter().any(|s| s.joint == m.joint) {
                return Err(Error::Schema(format!(
                    "muscle `{}` references unknown joint `{}`",
                    m.muscle_id, m.joint
                )));
            }
            if !m.moment_arm_m.is_finite() || m.moment_arm_m <= 0.0 {
                return Err(Error::Schema(format!(
                    "muscle `{}`: moment_arm_m must be finite and > 0, got {}",
                    m.muscle_id, m.moment_arm_m
                )));
            }
            if !m.share.is_finite() || m.share <= 0.0 || m.share > 1.0 {
                return Err(Error::Schema(format!(
                    "muscle `{}`: share must lie in (0, 1], got {}",
                    m.muscle_id, m.share
                )));
            }
            if !m.mvc_n.is_finite() || m.mvc_n <= 0.0 {
                return Err(Error::Schema(format!(
                    "muscle `{}`: mvc_n must be finite and > 0, got {}",
                    m.muscle_id, m.mvc_n
                )));
            }
            if !m.k_per_min.is_finite() || m.k_per_min <= 0.0 {
                return Err(Error::Schema(format!(
                    "muscle `{}`: k_per_min must be finite and > 0, got {}",
                    m.muscle_id, m.k_per_min
                )));
            }
            *share_sums.entry(m.joint.as_str()).or_insert(0.0) += m.share;
        }
        for (joint, sum) in share_sums {
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Schema(format!(
                    "muscle shares on joint `{joint}` sum to {sum}, expected 1"
                )));
            }
        }
        Ok(())
    }

    /// Muscles sorted by id, as [`MuscleParameters`] for the fatigue model.
    pub fn muscle_parameters(&self) -> Vec<MuscleParameters> {
        let mut muscles: Vec<&MuscleSpec> = self.muscles.iter().collect();
        muscles.sort_by(|a, b| a.muscle_id.cmp(&b.muscle_id));
        muscles
            .into_iter()
            .map(|m| MuscleParameters {
                muscle_id: m.muscle_id.clone(),
                mvc_n: m.mvc_n,
                k_per_min: m.k_per_min,
            })
            .collect()
    }

    fn check_angles(&self, angles_rad: &BTreeMap<String, f64>) -> Result<()> {
        for seg in &self.segments {
            let Some(angle) = angles_rad.get(&seg.joint) else {
                return Err(Error::Invalid(format!(
                    "no angle supplied for joint `{}`",
                    seg.joint
                )));
            };
            if !angle.is_finite() {
                return Err(Error::Invalid(format!(
                    "angle for joint `{}` must be finite, got {angle}",
                    seg.joint
                )));
            }
            if angle.abs() > self.angle_limit_rad {
                return Err(Error::Domain(format!(
                    "angle {angle} rad at joint `{}` exceeds the limit of {} rad",
                    seg.joint, self.angle_limit_rad
                )));
            }
        }
        Ok(())
    }
}

/// Gravitational torque magnitude about every joint of the chain for one
/// posture, N*m.
///
/// `angles_rad` must contain an entry for every segment's joint (extra
/// entries are ignored); `hand_mass_kg` acts as a point load at the distal
/// end of the last segment. Torques above a joint's `max_torque_nm` are
/// rejected as out of the worker's capability.
pub fn static_joint_torques(
    profile: &WorkerProfile,
    angles_rad: &BTreeMap<String, f64>,
    hand_mass_kg: f64,
) -> Result<BTreeMap<String, f64>> {
    if !hand_mass_kg.is_finite() || hand_mass_kg < 0.0 {
        return Err(Error::Parameter(format!(
            "handled mass must be finite and >= 0, got {hand_mass_kg}"
        )));
    }
    profile.check_angles(angles_rad)?;

    // Walk the chain once to place joints and centres of mass along the
    // horizontal axis; vertical positions never enter a gravity torque.
    let n = profile.segments.len();
    let mut joint_x = Vec::with_capacity(n);
    let mut com_x = Vec::with_capacity(n);
    let mut x = 0.0_f64;
    for seg in &profile.segments {
        let reach = seg.length_m * angles_rad[&seg.joint].sin();
        joint_x.push(x);
        com_x.push(x + seg.com_ratio * reach);
        x += reach;
    }
    let end_x = x;

    let mut torques = BTreeMap::new();
    for (i, seg) in profile.segments.iter().enumerate() {
        let pivot = joint_x[i];
        let mut torque = 0.0;
        for (k, distal) in profile.segments.iter().enumerate().skip(i) {
            torque += distal.mass_kg * GRAVITY_M_PER_S2 * (com_x[k] - pivot);
        }
        torque += hand_mass_kg * GRAVITY_M_PER_S2 * (end_x - pivot);
        let torque = torque.abs();
        if let Some(spec) = profile.joints.get(&seg.joint) {
            if torque > spec.max_torque_nm {
                return Err(Error::Domain(format!(
                    "torque {torque:.3} N*m at joint `{}` exceeds the capability of {} N*m",
                    seg.joint, spec.max_torque_nm
                )));
            }
        }
        torques.insert(seg.joint.clone(), torque);
    }
    Ok(torques)
}

/// Demanded force per muscle for a set of joint torques:
/// `share * torque / moment_arm`, newtons, keyed by muscle id.
pub fn torque_to_muscle_load(
    profile: &WorkerProfile,
    torques_nm: &BTreeMap<String, f64>,
) -> Result<BTreeMap<String, f64>> {
    let mut loads = BTreeMap::new();
    for m in &profile.muscles {
        let Some(torque) = torques_nm.get(&m.joint) else {
            return Err(Error::Invalid(format!(
                "no torque supplied for joint `{}` of muscle `{}`",
                m.joint, m.muscle_id
            )));
        };
        loads.insert(m.muscle_id.clone(), m.share * torque / m.moment_arm_m);
    }
    Ok(loads)
}

/// Joint torques at one recorded instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointTorqueFrame {
    pub t_min: f64,
    /// Torque magnitude by joint name, N*m.
    pub torque_nm: BTreeMap<String, f64>,
}

fn mass_at(mass_kg: &LoadProfile, t: f64) -> Result<f64> {
    mass_kg.evaluate(t).map_err(|e| match e {
        Error::Domain(msg) => Error::Domain(format!("handled-mass timeline: {msg}")),
        other => other,
    })
}

fn check_mass_covers(mass_kg: &LoadProfile, motion: &MotionSeries) -> Result<()> {
    let eps = 1e-12 * motion.t_last().abs().max(1.0);
    let starts_late = mass_kg.domain_start() > motion.t_first() + eps;
    let ends_early = mass_kg
        .domain_end()
        .is_some_and(|end| end < motion.t_last() - eps);
    if starts_late || ends_early {
        return Err(Error::Invalid(format!(
            "handled-mass timeline [{}, {}] must cover the recording [{}, {}] min",
            mass_kg.domain_start(),
            mass_kg
                .domain_end()
                .map_or_else(|| "inf".into(), |e| e.to_string()),
            motion.t_first(),
            motion.t_last()
        )));
    }
    Ok(())
}

/// Joint torques at every frame of a recording, with the handled mass read
/// from `mass_kg` (a profile whose values are kilograms).
pub fn joint_torque_series(
    profile: &WorkerProfile,
    motion: &MotionSeries,
    mass_kg: &LoadProfile,
) -> Result<Vec<JointTorqueFrame>> {
    check_mass_covers(mass_kg, motion)?;
    let mut frames = Vec::with_capacity(motion.frames().len());
    for frame in motion.frames() {
        let angles: BTreeMap<String, f64> = motion
            .joints()
            .iter()
            .cloned()
            .zip(frame.angles_rad.iter().copied())
            .collect();
        let torque_nm =
            static_joint_torques(profile, &angles, mass_at(mass_kg, frame.t_min)?)?;
        frames.push(JointTorqueFrame {
            t_min: frame.t_min,
            torque_nm,
        });
    }
    Ok(frames)
}

/// Turn a recording plus handled-mass timeline into one demanded-force
/// profile per muscle, keyed by muscle id.
///
/// Each profile samples the static muscle load at the recording's frame
/// times and holds it between frames, ready for the fatigue model.
pub fn posture_series_to_load_profiles(
    profile: &WorkerProfile,
    motion: &MotionSeries,
    mass_kg: &LoadProfile,
) -> Result<BTreeMap<String, LoadProfile>> {
    let torque_frames = joint_torque_series(profile, motion, mass_kg)?;
    let mut samples: BTreeMap<String, Vec<LoadSample>> = profile
        .muscles
        .iter()
        .map(|m| (m.muscle_id.clone(), Vec::with_capacity(torque_frames.len())))
        .collect();
    for frame in &torque_frames {
        let loads = torque_to_muscle_load(profile, &frame.torque_nm)?;
        for (id, f_load_n) in loads {
            samples
                .get_mut(&id)
                .expect("load map keys match muscle ids")
                .push(LoadSample::new(frame.t_min, f_load_n)?);
        }
    }
    samples
        .into_iter()
        .map(|(id, s)| Ok((id, LoadProfile::sampled(s, Interpolation::Hold)?)))
        .collect()
}

/// Built-in single-arm worker: 50th-percentile segment lengths, masses and
/// centre-of-mass ratios from standard anthropometric tables, with
/// placeholder strength values. Calibrate `mvc_n` and `k_per_min` against
/// the actual population before relying on absolute numbers.
pub fn default_profile() -> WorkerProfile {
    let profile = WorkerProfile::from_json(include_str!("../data/default_worker.json"))
        .expect("bundled default worker profile is valid");
    profile
}
