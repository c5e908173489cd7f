//! Muscle capacity dynamics.
//!
//! A muscle starts with capacity equal to its maximum voluntary contraction
//! (`MVC`, newtons) and loses capacity as it works. The remaining capacity
//! `F_cem` obeys
//!
//! ```text
//! dF_cem/dt = -k * F_cem * F_load / MVC
//! ```
//!
//! where `k` (1/min) is the per-worker fatigability rate and `F_load(t)` the
//! demanded force. Two companion quantities are tracked: the accumulated
//! relative load `F(t) = integral of F_load/MVC` (dimensionless "MVC-minutes"),
//! and the fatigue index `U(t)` (minutes) which weights work by how depleted
//! the muscle already is:
//!
//! ```text
//! dU/dt = MVC * F_load / F_cem^2
//! ```
//!
//! Both have closed forms in terms of `F(t)`:
//!
//! ```text
//! F_cem(t) = MVC * exp(-k * F(t))
//! U(t)     = (exp(2k * F(t)) - exp(2k * F(0))) / (2k)
//! ```
//!
//! The closed forms are the production path. [`ReferenceIntegrator`] solves
//! the same ODE system with classical fixed-step RK4 and exists to
//! cross-check them, not to replace them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::load::LoadProfile;

/// Per-muscle model constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuscleParameters {
    /// Stable identifier; ASCII letters, digits, `_` and `-` only.
    pub muscle_id: String,
    /// Maximum voluntary contraction, newtons.
    pub mvc_n: f64,
    /// Fatigability rate, 1/min. Larger k means faster capacity loss.
    pub k_per_min: f64,
}

pub(crate) fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl MuscleParameters {
    pub fn new(muscle_id: impl Into<String>, mvc_n: f64, k_per_min: f64) -> Result<Self> {
        let muscle_id = muscle_id.into();
        if !valid_id(&muscle_id) {
            return Err(Error::Parameter(format!(
                "muscle id `{muscle_id}` must be non-empty ASCII letters, digits, `_` or `-`"
            )));
        }
        if !mvc_n.is_finite() || mvc_n <= 0.0 {
            return Err(Error::Parameter(format!(
                "mvc_n must be finite and > 0, got {mvc_n}"
            )));
        }
        if !k_per_min.is_finite() || k_per_min <= 0.0 {
            return Err(Error::Parameter(format!(
                "k_per_min must be finite and > 0, got {k_per_min}"
            )));
        }
        Ok(MuscleParameters {
            muscle_id,
            mvc_n,
            k_per_min,
        })
    }
}

/// One timestamped demanded-force reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadSample {
    pub t_min: f64,
    pub f_load_n: f64,
}

impl LoadSample {
    pub fn new(t_min: f64, f_load_n: f64) -> Result<Self> {
        if !t_min.is_finite() || t_min < 0.0 {
            return Err(Error::Invalid(format!(
                "sample time must be finite and >= 0, got {t_min}"
            )));
        }
        if !f_load_n.is_finite() || f_load_n < 0.0 {
            return Err(Error::Invalid(format!(
                "sample value must be finite and >= 0, got {f_load_n}"
            )));
        }
        Ok(LoadSample { t_min, f_load_n })
    }
}

/// Instantaneous state of one muscle along a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuscleState {
    /// Simulation time, minutes.
    pub t_min: f64,
    /// Remaining capacity, newtons. Starts at MVC, never increases.
    pub fcem_n: f64,
    /// Accumulated relative load `integral of F_load/MVC`, dimensionless.
    pub f_acc: f64,
    /// Fatigue index, minutes.
    pub u_min: f64,
}

impl MuscleState {
    /// State of a rested muscle at t = 0.
    pub fn fresh(params: &MuscleParameters) -> Self {
        MuscleState {
            t_min: 0.0,
            fcem_n: params.mvc_n,
            f_acc: 0.0,
            u_min: 0.0,
        }
    }
}

/// Accumulated relative load over `[t0, t1]`: the profile's force integral
/// divided by MVC. `dt` bounds the quadrature step where no closed form
/// exists (see [`LoadProfile::integral_force_min`]).
pub fn accumulated_load(
    profile: &LoadProfile,
    params: &MuscleParameters,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<f64> {
    Ok(profile.integral_force_min(t0, t1, dt)? / params.mvc_n)
}

/// Remaining capacity after accumulated relative load `f_acc`.
pub fn fcem_closed_form(params: &MuscleParameters, f_acc: f64) -> f64 {
    params.mvc_n * (-params.k_per_min * f_acc).exp()
}

/// Fatigue index accrued while the accumulated relative load grows from
/// `f_acc_start` to `f_acc_end`, in minutes.
///
/// Uses the `exp(a) * expm1(b - a)` arrangement so small increments keep
/// full precision instead of cancelling between two large exponentials.
pub fn fatigue_index_closed_form(
    params: &MuscleParameters,
    f_acc_start: f64,
    f_acc_end: f64,
) -> Result<f64> {
    if !f_acc_start.is_finite() || !f_acc_end.is_finite() || f_acc_start < 0.0 {
        return Err(Error::Parameter(format!(
            "accumulated loads must be finite and >= 0, got [{f_acc_start}, {f_acc_end}]"
        )));
    }
    if f_acc_end < f_acc_start {
        return Err(Error::Parameter(format!(
            "accumulated load cannot decrease (start {f_acc_start}, end {f_acc_end})"
        )));
    }
    let two_k = 2.0 * params.k_per_min;
    Ok((two_k * f_acc_start).exp() * (two_k * (f_acc_end - f_acc_start)).exp_m1() / two_k)
}

/// Fatigue index accrued from rest up to accumulated relative load `f_acc`.
pub fn fatigue_index_from_rest(params: &MuscleParameters, f_acc: f64) -> Result<f64> {
    fatigue_index_closed_form(params, 0.0, f_acc)
}

/// Classical fixed-step RK4 solver for the capacity ODE system.
///
/// The demanded force is held constant across each step (sample-and-hold),
/// so feed it steps no coarser than the load's own variation. Kept as an
/// independent cross-check of the closed forms.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceIntegrator {
    /// Capacity floor as a fraction of MVC; stepping below it is an error
    /// because `dU/dt ~ 1/F_cem^2` blows up.
    pub capacity_floor_rel: f64,
}

impl Default for ReferenceIntegrator {
    fn default() -> Self {
        ReferenceIntegrator {
            capacity_floor_rel: 1e-9,
        }
    }
}

/// Time derivatives (du, dfcem, df_acc) at capacity `fcem_n` under load.
fn derivatives(params: &MuscleParameters, fcem_n: f64, f_load_n: f64) -> (f64, f64, f64) {
    (
        params.mvc_n * f_load_n / (fcem_n * fcem_n),
        -params.k_per_min * fcem_n * f_load_n / params.mvc_n,
        f_load_n / params.mvc_n,
    )
}

impl ReferenceIntegrator {
    pub fn new(capacity_floor_rel: f64) -> Result<Self> {
        if !capacity_floor_rel.is_finite() || capacity_floor_rel <= 0.0 || capacity_floor_rel >= 1.0
        {
            return Err(Error::Parameter(format!(
                "capacity floor must lie in (0, 1), got {capacity_floor_rel}"
            )));
        }
        Ok(ReferenceIntegrator { capacity_floor_rel })
    }

    /// Advance one RK4 step of length `dt_min` under constant demanded
    /// force `f_load_n`.
    pub fn step(
        &self,
        params: &MuscleParameters,
        state: &MuscleState,
        f_load_n: f64,
        dt_min: f64,
    ) -> Result<MuscleState> {
        if !(dt_min > 0.0) || !dt_min.is_finite() {
            return Err(Error::Parameter(format!(
                "step size must be > 0, got {dt_min}"
            )));
        }
        if !f_load_n.is_finite() || f_load_n < 0.0 {
            return Err(Error::Parameter(format!(
                "demanded force must be finite and >= 0, got {f_load_n}"
            )));
        }
        let floor = self.capacity_floor_rel * params.mvc_n;
        let guard = |fcem: f64| -> Result<f64> {
            if fcem <= floor {
                Err(Error::CapacityExhausted {
                    t_min: state.t_min,
                    message: format!(
                        "capacity fell to {fcem:.3e} N (floor {floor:.3e} N) for `{}`",
                        params.muscle_id
                    ),
                })
            } else {
                Ok(fcem)
            }
        };

        let y = (state.u_min, guard(state.fcem_n)?, state.f_acc);
        let k1 = derivatives(params, y.1, f_load_n);
        let k2 = derivatives(params, guard(y.1 + 0.5 * dt_min * k1.1)?, f_load_n);
        let k3 = derivatives(params, guard(y.1 + 0.5 * dt_min * k2.1)?, f_load_n);
        let k4 = derivatives(params, guard(y.1 + dt_min * k3.1)?, f_load_n);

        let sixth = dt_min / 6.0;
        let next = MuscleState {
            t_min: state.t_min + dt_min,
            u_min: y.0 + sixth * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            fcem_n: guard(y.1 + sixth * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1))?,
            f_acc: y.2 + sixth * (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2),
        };
        Ok(next)
    }

    /// Integrate from rest over `[0, horizon_min]`, sampling the demanded
    /// force at the left edge of each step. Returns the state at every grid
    /// point including t = 0, so the result has `n + 1` entries.
    pub fn integrate_profile(
        &self,
        params: &MuscleParameters,
        profile: &LoadProfile,
        horizon_min: f64,
        dt_min: f64,
    ) -> Result<Vec<MuscleState>> {
        if !(horizon_min > 0.0) || !horizon_min.is_finite() {
            return Err(Error::Parameter(format!(
                "horizon must be > 0, got {horizon_min}"
            )));
        }
        if !(dt_min > 0.0) || !dt_min.is_finite() {
            return Err(Error::Parameter(format!(
                "step size must be > 0, got {dt_min}"
            )));
        }
        let n = steps_covering(horizon_min, dt_min);
        let h = horizon_min / n as f64;
        let mut states = Vec::with_capacity(n + 1);
        let mut state = MuscleState::fresh(params);
        states.push(state);
        for i in 0..n {
            let t = i as f64 * h;
            let load = profile.evaluate(t)?;
            state = self.step(params, &state, load, h)?;
            // Rebuild the clock from the index so it cannot drift.
            state.t_min = if i + 1 == n {
                horizon_min
            } else {
                (i + 1) as f64 * h
            };
            states.push(state);
        }
        Ok(states)
    }
}

/// Single reference RK4 step with the default capacity floor.
pub fn step_reference_ode(
    params: &MuscleParameters,
    state: &MuscleState,
    f_load_n: f64,
    dt_min: f64,
) -> Result<MuscleState> {
    ReferenceIntegrator::default().step(params, state, f_load_n, dt_min)
}

/// Smallest step count `n` with `horizon / n <= dt`, tolerant of the
/// horizon being a near-exact multiple of `dt`.
pub(crate) fn steps_covering(horizon: f64, dt: f64) -> usize {
    let ratio = horizon / dt;
    let n = if (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0) {
        ratio.round() as usize
    } else {
        ratio.ceil() as usize
    };
    n.max(1)
}

/// Result of an endurance scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum EnduranceOutcome {
    /// Capacity first met the demanded force at `t_min`.
    Exhausted { t_min: f64 },
    /// Capacity stayed above the demand across the whole scan window.
    NotExhausted,
}

/// Earliest time in `[0, horizon_min]` at which remaining capacity drops to
/// the demanded force (`F_cem(t) <= F_load(t)`).
///
/// The window is scanned on a grid of step at most `dt_min`; the first
/// bracket with a sign change is refined by bisection to 1e-8 min, and the
/// upper end of the final bracket is reported so the condition holds at the
/// returned time. Crossings that both start and end inside one grid step
/// can be missed, so pick `dt_min` below the load's fastest feature. When
/// the profile's domain ends before `horizon_min`, the scan stops there.
pub fn endurance_time(
    params: &MuscleParameters,
    profile: &LoadProfile,
    horizon_min: f64,
    dt_min: f64,
) -> Result<EnduranceOutcome> {
    if !(horizon_min > 0.0) || !horizon_min.is_finite() {
        return Err(Error::Parameter(format!(
            "horizon must be > 0, got {horizon_min}"
        )));
    }
    if !(dt_min > 0.0) || !dt_min.is_finite() {
        return Err(Error::Parameter(format!(
            "scan step must be > 0, got {dt_min}"
        )));
    }
    let horizon = match profile.domain_end() {
        Some(end) => horizon_min.min(end),
        None => horizon_min,
    };
    // Margin of capacity over demand given accumulated load f_acc at t.
    let margin = |t: f64, f_acc: f64| -> Result<f64> {
        Ok(fcem_closed_form(params, f_acc) - profile.evaluate(t)?)
    };
    let mut f_lo = 0.0;
    if margin(0.0, f_lo)? <= 0.0 {
        return Ok(EnduranceOutcome::Exhausted { t_min: 0.0 });
    }
    let n = steps_covering(horizon, dt_min);
    let h = horizon / n as f64;
    let mut t_lo = 0.0;
    for i in 1..=n {
        let t_hi = if i == n { horizon } else { i as f64 * h };
        let f_hi = f_lo + accumulated_load(profile, params, t_lo, t_hi, dt_min)?;
        if margin(t_hi, f_hi)? <= 0.0 {
            // Bisect inside [t_lo, t_hi]; accumulated load is recomputed
            // from the bracket start each probe, so it stays consistent.
            let (mut lo, mut hi) = (t_lo, t_hi);
            while hi - lo > 1e-8 {
                let mid = 0.5 * (lo + hi);
                let f_mid = f_lo + accumulated_load(profile, params, t_lo, mid, dt_min)?;
                if margin(mid, f_mid)? <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(EnduranceOutcome::Exhausted { t_min: hi });
        }
        t_lo = t_hi;
        f_lo = f_hi;
    }
    Ok(EnduranceOutcome::NotExhausted)
}

/// Endurance time for a constant relative load `f_rel = F_load / MVC`.
///
/// Setting `MVC * exp(-k * f_rel * t) = f_rel * MVC` gives
/// `t = -ln(f_rel) / (k * f_rel)`. A demand at or above MVC exhausts a
/// rested muscle immediately.
pub fn endurance_constant_relative(k_per_min: f64, f_rel: f64) -> Result<f64> {
    if !k_per_min.is_finite() || k_per_min <= 0.0 {
        return Err(Error::Parameter(format!(
            "k_per_min must be finite and > 0, got {k_per_min}"
        )));
    }
    if !f_rel.is_finite() || f_rel <= 0.0 {
        return Err(Error::Parameter(format!(
            "relative load must be finite and > 0, got {f_rel}"
        )));
    }
    if f_rel >= 1.0 {
        return Ok(0.0);
    }
    Ok(-f_rel.ln() / (k_per_min * f_rel))
}

/// Fatigue index accumulated by the moment of exhaustion under a constant
/// relative load: with `F = f_rel * t*` and `t* = -ln(f_rel)/(k f_rel)`,
/// the closed form collapses to `(1/f_rel^2 - 1) / (2k)`. Zero when the
/// demand already meets MVC.
pub fn exhaustion_index_constant(k_per_min: f64, f_rel: f64) -> Result<f64> {
    if !k_per_min.is_finite() || k_per_min <= 0.0 {
        return Err(Error::Parameter(format!(
            "k_per_min must be finite and > 0, got {k_per_min}"
        )));
    }
    if !f_rel.is_finite() || f_rel <= 0.0 {
        return Err(Error::Parameter(format!(
            "relative load must be finite and > 0, got {f_rel}"
        )));
    }
    if f_rel >= 1.0 {
        return Ok(0.0);
    }
    Ok((1.0 / (f_rel * f_rel) - 1.0) / (2.0 * k_per_min))
}
