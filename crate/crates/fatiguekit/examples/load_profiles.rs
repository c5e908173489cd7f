//! Build the four demand-profile shapes and put their integrals to work.
//!
//! A load profile maps time (minutes) to demanded force (newtons). The
//! fatigue model only ever consumes profiles through their time integral,
//! so piecewise-constant shapes are integrated exactly — no quadrature
//! error anywhere in the common cases.
//!
//! Run with: cargo run --example load_profiles

use fatiguekit::fatigue::{LoadSample, MuscleParameters};
use fatiguekit::load::{mean_relative_load, Interpolation, LoadProfile};

fn main() -> fatiguekit::Result<()> {
    // Constant: the simplest hold.
    let steady = LoadProfile::constant(300.0)?;
    println!("constant 300 N, integral over [0, 2]: {} N*min", steady.integral_force_min(0.0, 2.0, 0.01)?);

    // Cyclic: rectangular work/rest alternation. 0.25 duty over a 1 min
    // period means 15 s of work per minute.
    let duty_cycle = LoadProfile::cyclic(80.0, 0.0, 1.0, 0.25)?;
    println!("\ncyclic 80 N at 25% duty:");
    for t in [0.0, 0.2, 0.25, 0.7, 1.1] {
        println!("  f({t:>4}) = {:>5.1} N", duty_cycle.evaluate(t)?);
    }
    println!(
        "  integral over one period: {} N*min (exact: 80 * 0.25)",
        duty_cycle.integral_force_min(0.0, 1.0, 0.01)?
    );

    // Sampled: recorded values, held or interpolated between knots.
    let samples = vec![
        LoadSample::new(0.0, 100.0)?,
        LoadSample::new(0.5, 200.0)?,
        LoadSample::new(1.0, 50.0)?,
    ];
    let held = LoadProfile::sampled(samples.clone(), Interpolation::Hold)?;
    let ramped = LoadProfile::sampled(samples, Interpolation::Linear)?;
    println!("\nsame three samples, two readings at t = 0.25:");
    println!("  hold   -> {:>6.1} N (last knot persists)", held.evaluate(0.25)?);
    println!("  linear -> {:>6.1} N (halfway up the ramp)", ramped.evaluate(0.25)?);

    // Composite: profiles concatenated in time — a warm-up hold, then the
    // duty-cycled main task.
    let shift = LoadProfile::composite(vec![
        (0.5, LoadProfile::constant(40.0)?),
        (2.0, duty_cycle.clone()),
    ])?;
    println!(
        "\nwarm-up then duty cycle: f(0.4) = {} N, f(0.6) = {} N",
        shift.evaluate(0.4)?,
        shift.evaluate(0.6)?
    );
    println!(
        "  total demanded impulse: {} N*min",
        shift.integral_force_min(0.0, 2.5, 0.01)?
    );

    // Profiles meet the fatigue model through the relative load f/MVC.
    let muscle = MuscleParameters::new("equivalent", 400.0, 1.0)?;
    println!(
        "\nmean relative load of the duty cycle on a 400 N muscle: {}",
        mean_relative_load(&duty_cycle, &muscle, 1.0)?
    );

    // Resampling renders any profile onto a uniform grid, e.g. to export.
    let uniform = shift.resample(0.25, 2.5)?;
    println!("\nresampled composite at 0.25 min steps:");
    for t in [0.0, 0.25, 0.5, 0.75, 1.0, 1.25] {
        println!("  f({t:>5}) = {:>5.1} N", uniform.evaluate(t)?);
    }
    Ok(())
}
