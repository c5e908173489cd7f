//! How long can a load be held before the muscle gives out?
//!
//! Sweeps the analytic endurance formula over relative loads and
//! fatigability rates, then cross-checks one point against the scanning
//! predictor that works for arbitrary load profiles.
//!
//! Run with: cargo run --example endurance

use fatiguekit::fatigue::{
    endurance_constant_relative, endurance_time, exhaustion_index_constant, EnduranceOutcome,
    MuscleParameters,
};
use fatiguekit::load::LoadProfile;

fn main() -> fatiguekit::Result<()> {
    // Holding half your strength with k = 1/min exhausts you in ~1.39 min;
    // lighter loads buy disproportionately more time.
    println!("endurance (min) for constant relative load f, fatigability k:");
    println!("{:>6}  {:>10}  {:>10}  {:>10}", "f", "k=0.5", "k=1.0", "k=2.0");
    for f in [0.2, 0.35, 0.5, 0.65, 0.8, 0.95] {
        let row: Vec<f64> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&k| endurance_constant_relative(k, f).unwrap())
            .collect();
        println!(
            "{:>6.2}  {:>10.4}  {:>10.4}  {:>10.4}",
            f, row[0], row[1], row[2]
        );
    }

    // The fatigue index accumulated by the moment of exhaustion depends on
    // the load too: lighter loads are held longer and cost more in total.
    println!("\nfatigue index at exhaustion (min), k = 1/min:");
    for f in [0.2, 0.5, 0.8] {
        println!(
            "  f = {:.1} -> U* = {:.4} min after {:.4} min",
            f,
            exhaustion_index_constant(1.0, f)?,
            endurance_constant_relative(1.0, f)?
        );
    }

    // The same prediction via the general scanner, which handles arbitrary
    // profiles: a 600 N constant demand against a 1200 N muscle.
    let muscle = MuscleParameters::new("biceps_equivalent", 1200.0, 1.0)?;
    let constant = LoadProfile::constant(600.0)?;
    let scanned = endurance_time(&muscle, &constant, 10.0, 1e-4)?;
    let analytic = endurance_constant_relative(muscle.k_per_min, 0.5)?;
    println!("\nscanned vs analytic at f = 0.5:");
    println!("  scan     -> {scanned:?}");
    println!("  analytic -> {analytic:.6} min");

    // Duty-cycled work stretches endurance: same 600 N peak, but demanded
    // only half of each 0.5 min cycle.
    let cyclic = LoadProfile::cyclic(600.0, 0.0, 0.5, 0.5)?;
    match endurance_time(&muscle, &cyclic, 10.0, 1e-4)? {
        EnduranceOutcome::Exhausted { t_min } => {
            println!("\nsame peak at 50% duty -> exhausted at {t_min:.4} min");
            println!("  (a bit more than twice the continuous time: rests defer, never undo)");
        }
        EnduranceOutcome::NotExhausted => println!("\nsame peak at 50% duty -> survives 10 min"),
    }
    Ok(())
}
