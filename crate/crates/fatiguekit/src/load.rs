//! Demanded-force-over-time profiles that drive the fatigue model.
//!
//! A [`LoadProfile`] captures the intensity, repetitiveness and duration of
//! the external demand on a muscle: constant holds, rectangular work/rest
//! cycles, recorded samples, and compositions of those. Profiles are
//! immutable after construction and safe to share across threads.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fatigue::{LoadSample, MuscleParameters};

/// How a [`LoadProfile::Sampled`] profile is read between its samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// The most recent sample's value applies until the next sample.
    Hold,
    /// Straight-line interpolation between neighbouring samples.
    Linear,
}

/// Demanded external force on a muscle as a function of time (minutes).
///
/// `Constant` and `Cyclic` are defined on `[0, +inf)`; `Sampled` on the
/// closed span of its samples; `Composite` on `[0, sum of durations]`.
/// Evaluating outside the domain is an error, never an extrapolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadProfile {
    Constant {
        level_n: f64,
    },
    /// Rectangular wave: `high_n` for the first `duty` fraction of each
    /// period, `low_n` for the rest. At the switch instant the low value
    /// applies (right-continuous switching).
    Cyclic {
        high_n: f64,
        low_n: f64,
        period_min: f64,
        duty: f64,
    },
    Sampled {
        samples: Vec<LoadSample>,
        interpolation: Interpolation,
    },
    Composite {
        segments: Vec<(f64, LoadProfile)>,
    },
}

/// Relative tolerance used to snap query times onto sample timestamps and
/// domain endpoints, so grid arithmetic jitter does not flip domain checks.
const TIME_SNAP_REL: f64 = 1e-12;

fn snap_eps(scale: f64) -> f64 {
    TIME_SNAP_REL * scale.abs().max(1.0)
}

impl LoadProfile {
    pub fn constant(level_n: f64) -> Result<Self> {
        let p = LoadProfile::Constant { level_n };
        p.validate()?;
        Ok(p)
    }

    pub fn cyclic(high_n: f64, low_n: f64, period_min: f64, duty: f64) -> Result<Self> {
        let p = LoadProfile::Cyclic {
            high_n,
            low_n,
            period_min,
            duty,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn sampled(samples: Vec<LoadSample>, interpolation: Interpolation) -> Result<Self> {
        let p = LoadProfile::Sampled {
            samples,
            interpolation,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn composite(segments: Vec<(f64, LoadProfile)>) -> Result<Self> {
        let p = LoadProfile::Composite { segments };
        p.validate()?;
        Ok(p)
    }

    /// Check every invariant of the variant (finite non-negative forces,
    /// strictly increasing timestamps, positive durations).
    pub fn validate(&self) -> Result<()> {
        fn check_force(value: f64, what: &str) -> Result<()> {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::Invalid(format!(
                    "{what} must be finite and >= 0, got {value}"
                )));
            }
            Ok(())
        }
        match self {
            LoadProfile::Constant { level_n } => check_force(*level_n, "constant level"),
            LoadProfile::Cyclic {
                high_n,
                low_n,
                period_min,
                duty,
            } => {
                check_force(*high_n, "cyclic high level")?;
                check_force(*low_n, "cyclic low level")?;
                if !period_min.is_finite() || *period_min <= 0.0 {
                    return Err(Error::Invalid(format!(
                        "cyclic period must be finite and > 0, got {period_min}"
                    )));
                }
                if !duty.is_finite() || *duty <= 0.0 || *duty >= 1.0 {
                    return Err(Error::Invalid(format!(
                        "cyclic duty must lie strictly inside (0, 1), got {duty}"
                    )));
                }
                Ok(())
            }
            LoadProfile::Sampled { samples, .. } => {
                if samples.len() < 2 {
                    return Err(Error::Invalid(format!(
                        "sampled profile needs at least 2 samples, got {}",
                        samples.len()
                    )));
                }
                for (i, s) in samples.iter().enumerate() {
                    if !s.t_min.is_finite() || s.t_min < 0.0 {
                        return Err(Error::Invalid(format!(
                            "sample {i}: time must be finite and >= 0, got {}",
                            s.t_min
                        )));
                    }
                    check_force(s.f_load_n, &format!("sample {i} value"))?;
                    if i > 0 && s.t_min <= samples[i - 1].t_min {
                        return Err(Error::Invalid(format!(
                            "sample {i}: timestamps must be strictly increasing \
                             ({} after {})",
                            s.t_min,
                            samples[i - 1].t_min
                        )));
                    }
                }
                Ok(())
            }
            LoadProfile::Composite { segments } => {
                if segments.is_empty() {
                    return Err(Error::Invalid(
                        "composite profile needs at least one segment".into(),
                    ));
                }
                for (i, (duration, inner)) in segments.iter().enumerate() {
                    if !duration.is_finite() || *duration <= 0.0 {
                        return Err(Error::Invalid(format!(
                            "composite segment {i}: duration must be finite and > 0, got {duration}"
                        )));
                    }
                    inner.validate()?;
                }
                Ok(())
            }
        }
    }

    /// First time the profile is defined at.
    pub fn domain_start(&self) -> f64 {
        match self {
            LoadProfile::Sampled { samples, .. } => samples[0].t_min,
            _ => 0.0,
        }
    }

    /// Last time the profile is defined at; `None` means unbounded.
    pub fn domain_end(&self) -> Option<f64> {
        match self {
            LoadProfile::Constant { .. } | LoadProfile::Cyclic { .. } => None,
            LoadProfile::Sampled { samples, .. } => Some(samples[samples.len() - 1].t_min),
            LoadProfile::Composite { segments } => {
                Some(segments.iter().map(|(d, _)| *d).sum())
            }
        }
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if !t.is_finite() {
            return Err(Error::Parameter(format!("time must be finite, got {t}")));
        }
        let start = self.domain_start();
        let end = self.domain_end();
        let eps = snap_eps(end.unwrap_or(start.max(1.0)));
        if t < start - eps {
            return Err(Error::Domain(format!(
                "t = {t} min is before the profile domain start {start} min"
            )));
        }
        if let Some(end) = end {
            if t > end + eps {
                return Err(Error::Domain(format!(
                    "t = {t} min is past the profile domain end {end} min"
                )));
            }
        }
        Ok(())
    }

    /// Demanded force in newtons at time `t_min`.
    pub fn evaluate(&self, t_min: f64) -> Result<f64> {
        self.check_domain(t_min)?;
        let t = t_min.max(self.domain_start());
        Ok(self.evaluate_unchecked(t))
    }

    /// Evaluation core; `t` must already lie inside the domain.
    fn evaluate_unchecked(&self, t: f64) -> f64 {
        match self {
            LoadProfile::Constant { level_n } => *level_n,
            LoadProfile::Cyclic {
                high_n,
                low_n,
                period_min,
                duty,
            } => {
                // f64 remainder is exact, so the phase is bit-deterministic.
                let phase = t % period_min;
                if phase < duty * period_min {
                    *high_n
                } else {
                    *low_n
                }
            }
            LoadProfile::Sampled {
                samples,
                interpolation,
            } => {
                let last = samples.len() - 1;
                let eps = snap_eps(samples[last].t_min);
                if t >= samples[last].t_min - eps {
                    return samples[last].f_load_n;
                }
                // Last index with sample time <= t.
                let idx = match samples
                    .binary_search_by(|s| s.t_min.partial_cmp(&t).expect("finite times"))
                {
                    Ok(i) => i,
                    Err(ins) => ins.saturating_sub(1),
                };
                let s0 = &samples[idx];
                let s1 = &samples[idx + 1];
                if (t - s0.t_min).abs() <= eps {
                    return s0.f_load_n;
                }
                match interpolation {
                    Interpolation::Hold => s0.f_load_n,
                    Interpolation::Linear => {
                        let w = (t - s0.t_min) / (s1.t_min - s0.t_min);
                        s0.f_load_n + w * (s1.f_load_n - s0.f_load_n)
                    }
                }
            }
            LoadProfile::Composite { segments } => {
                let mut offset = 0.0;
                for (i, (duration, inner)) in segments.iter().enumerate() {
                    let seg_end = offset + duration;
                    let is_last = i == segments.len() - 1;
                    // Right-continuous at interior boundaries; the final
                    // endpoint belongs to the last segment.
                    if t < seg_end || (is_last && t <= seg_end + snap_eps(seg_end)) {
                        let local = (t - offset).clamp(0.0, *duration);
                        let local = inner.domain_start() + local;
                        return inner.evaluate_unchecked(local.min(
                            inner.domain_end().unwrap_or(f64::INFINITY),
                        ));
                    }
                    offset = seg_end;
                }
                // Unreachable for t inside the domain; defend with last value.
                let (duration, inner) = segments.last().expect("validated non-empty");
                inner.evaluate_unchecked(inner.domain_start() + duration)
            }
        }
    }

    /// True when evaluation is piecewise constant, so time integrals have
    /// exact closed forms.
    pub fn is_piecewise_constant(&self) -> bool {
        match self {
            LoadProfile::Constant { .. } | LoadProfile::Cyclic { .. } => true,
            LoadProfile::Sampled { interpolation, .. } => *interpolation == Interpolation::Hold,
            LoadProfile::Composite { segments } => {
                segments.iter().all(|(_, p)| p.is_piecewise_constant())
            }
        }
    }

    /// Integral of the force over `[t0, t1]`, in newton-minutes.
    ///
    /// Piecewise-constant variants are integrated exactly segment by
    /// segment; anything else falls back to composite Simpson's rule on a
    /// uniform grid of step at most `dt`.
    pub fn integral_force_min(&self, t0: f64, t1: f64, dt: f64) -> Result<f64> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Parameter(format!(
                "integration step dt must be > 0, got {dt}"
            )));
        }
        if !t0.is_finite() || !t1.is_finite() || t0 < 0.0 || t1 < t0 {
            return Err(Error::Parameter(format!(
                "integration bounds must satisfy 0 <= t0 <= t1, got [{t0}, {t1}]"
            )));
        }
        self.check_domain(t0)?;
        self.check_domain(t1)?;
        if t1 == t0 {
            return Ok(0.0);
        }
        self.integral_inner(t0, t1, dt)
    }

    fn integral_inner(&self, t0: f64, t1: f64, dt: f64) -> Result<f64> {
        match self {
            LoadProfile::Constant { level_n } => Ok(level_n * (t1 - t0)),
            LoadProfile::Cyclic { .. } => Ok(self.cyclic_antiderivative(t1) - self.cyclic_antiderivative(t0)),
            LoadProfile::Sampled {
                samples,
                interpolation: Interpolation::Hold,
            } => {
                // Jump straight to the first window that can overlap, so
                // repeated small-interval integrals stay cheap on long
                // recordings.
                let first = samples
                    .partition_point(|s| s.t_min <= t0)
                    .saturating_sub(1);
                let mut total = 0.0;
                for pair in samples[first..].windows(2) {
                    if pair[0].t_min >= t1 {
                        break;
                    }
                    let lo = pair[0].t_min.max(t0);
                    let hi = pair[1].t_min.min(t1);
                    if hi > lo {
                        total += pair[0].f_load_n * (hi - lo);
                    }
                }
                Ok(total)
            }
            LoadProfile::Sampled { .. } => self.simpson(t0, t1, dt),
            LoadProfile::Composite { segments } => {
                let mut total = 0.0;
                let mut offset = 0.0;
                for (duration, inner) in segments {
                    let seg_start = offset;
                    let seg_end = offset + duration;
                    let lo = t0.max(seg_start);
                    let hi = t1.min(seg_end);
                    if hi > lo {
                        let base = inner.domain_start();
                        total += inner.integral_inner(base + (lo - seg_start), base + (hi - seg_start), dt)?;
                    }
                    offset = seg_end;
                }
                Ok(total)
            }
        }
    }

    /// Exact integral of a rectangular wave over `[0, x]`.
    fn cyclic_antiderivative(&self, x: f64) -> f64 {
        let LoadProfile::Cyclic {
            high_n,
            low_n,
            period_min,
            duty,
        } = self
        else {
            unreachable!("cyclic_antiderivative on non-cyclic profile");
        };
        let switch = duty * period_min;
        let per_period = switch * high_n + (period_min - switch) * low_n;
        let full = (x / period_min).floor();
        let rem = x - full * period_min;
        full * per_period + rem.min(switch) * high_n + (rem - switch).max(0.0) * low_n
    }

    fn simpson(&self, t0: f64, t1: f64, dt: f64) -> Result<f64> {
        let span = t1 - t0;
        let mut n = (span / dt).ceil() as usize;
        n = n.max(2);
        if n % 2 == 1 {
            n += 1;
        }
        let h = span / n as f64;
        let mut sum = self.evaluate(t0)? + self.evaluate(t1)?;
        for i in 1..n {
            let t = t0 + i as f64 * h;
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * self.evaluate(t)?;
        }
        Ok(sum * h / 3.0)
    }

    /// Resample onto a uniform grid covering `[0, horizon]`.
    ///
    /// The grid step is `horizon / n <= dt` with `n` minimal, so the final
    /// sample lands exactly on `horizon`. Grid values match `evaluate` on
    /// the source exactly. The result holds between samples when the source
    /// is piecewise constant and interpolates linearly otherwise.
    pub fn resample(&self, dt: f64, horizon: f64) -> Result<LoadProfile> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Parameter(format!("resample dt must be > 0, got {dt}")));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::Parameter(format!(
                "resample horizon must be > 0, got {horizon}"
            )));
        }
        if let Some(end) = self.domain_end() {
            if horizon > end + snap_eps(end) {
                return Err(Error::Domain(format!(
                    "resample horizon {horizon} min exceeds the source domain end {end} min"
                )));
            }
        }
        if self.domain_start() > snap_eps(horizon) {
            return Err(Error::Domain(format!(
                "resample starts at 0 but the source domain starts at {} min",
                self.domain_start()
            )));
        }
        let ratio = horizon / dt;
        let mut n = if (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0) {
            ratio.round() as usize
        } else {
            ratio.ceil() as usize
        };
        n = n.max(1);
        let h = horizon / n as f64;
        let mut samples = Vec::with_capacity(n + 1);
        for i in 0..n {
            let t = i as f64 * h;
            samples.push(LoadSample::new(t, self.evaluate(t)?)?);
        }
        samples.push(LoadSample::new(horizon, self.evaluate(horizon)?)?);
        let interpolation = if self.is_piecewise_constant() {
            Interpolation::Hold
        } else {
            Interpolation::Linear
        };
        LoadProfile::sampled(samples, interpolation)
    }
}

/// Time-average of the relative load `f_load / mvc` over `[0, horizon]`.
pub fn mean_relative_load(
    profile: &LoadProfile,
    params: &MuscleParameters,
    horizon: f64,
) -> Result<f64> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::Parameter(format!(
            "mean_relative_load horizon must be > 0, got {horizon}"
        )));
    }
    let dt = horizon / 4096.0;
    Ok(profile.integral_force_min(0.0, horizon, dt)? / params.mvc_n / horizon)
}

/// Parse the load CSV format: header `t_min,f_load_N`, one `time,force`
/// pair per row, strictly increasing time. Lines starting with `#` and
/// blank lines are ignored.
pub fn parse_load_csv(text: &str, interpolation: Interpolation) -> Result<LoadProfile> {
    let samples = parse_two_column_csv(text, "t_min,f_load_N")?
        .into_iter()
        .map(|(t, f)| LoadSample::new(t, f))
        .collect::<Result<Vec<_>>>()?;
    LoadProfile::sampled(samples, interpolation)
}

/// Parse a handled-mass timeline: header `t_min,mass_kg`. The result is a
/// profile whose "force" values carry kilograms; the biomechanical loader
/// converts them to joint demands.
pub fn parse_mass_csv(text: &str, interpolation: Interpolation) -> Result<LoadProfile> {
    let samples = parse_two_column_csv(text, "t_min,mass_kg")?
        .into_iter()
        .map(|(t, m)| LoadSample::new(t, m))
        .collect::<Result<Vec<_>>>()?;
    LoadProfile::sampled(samples, interpolation)
}

/// Shared two-column numeric CSV reader with strict validation and
/// 1-based line numbers in every error.
pub(crate) fn parse_two_column_csv(text: &str, expected_header: &str) -> Result<Vec<(f64, f64)>> {
    let mut rows: Vec<(f64, f64)> = Vec::new();
    let mut header_seen = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        if !header_seen {
            if line.trim() != expected_header {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!(
                        "expected header `{expected_header}`, got `{}`",
                        line.trim()
                    ),
                });
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 2 comma-separated fields, got {}", fields.len()),
            });
        }
        let t = parse_finite(fields[0], line_no, "time")?;
        let v = parse_finite(fields[1], line_no, "value")?;
        if v < 0.0 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("value must be >= 0, got {v}"),
            });
        }
        if let Some((prev_t, _)) = rows.last() {
            if t <= *prev_t {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!(
                        "timestamps must be strictly increasing ({t} after {prev_t})"
                    ),
                });
            }
        } else if t < 0.0 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("time must be >= 0, got {t}"),
            });
        }
        rows.push((t, v));
    }
    if !header_seen {
        return Err(Error::Parse {
            line: 1,
            message: format!("missing header `{expected_header}`"),
        });
    }
    Ok(rows)
}

/// Render rows as a two-column CSV under `header`, full float precision.
pub(crate) fn render_two_column_csv(header: &str, rows: &[(f64, f64)]) -> String {
    let mut out = String::with_capacity(rows.len() * 24 + header.len() + 1);
    out.push_str(header);
    out.push('\n');
    for (t, v) in rows {
        out.push_str(&format!("{t},{v}\n"));
    }
    out
}

pub(crate) fn parse_finite(field: &str, line_no: usize, what: &str) -> Result<f64> {
    let value: f64 = field.trim().parse().map_err(|_| Error::Parse {
        line: line_no,
        message: format!("{what} `{}` is not a number", field.trim()),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse {
            line: line_no,
            message: format!("{what} must be finite, got {value}"),
        });
    }
    Ok(value)
}
