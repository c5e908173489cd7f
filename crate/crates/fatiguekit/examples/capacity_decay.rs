//! Watch a muscle's exertable capacity decay under sustained load, and
//! check the closed forms against the RK4 reference integrator.
//!
//! Capacity follows MVC * exp(-k * accumulated relative load), so constant
//! demand gives clean exponential decay; the fatigue index grows with the
//! square of demand over remaining capacity. Both have closed forms that
//! the fixed-step solver should reproduce to near machine precision.
//!
//! Run with: cargo run --example capacity_decay

use fatiguekit::fatigue::{
    fatigue_index_from_rest, fcem_closed_form, MuscleParameters, ReferenceIntegrator,
};
use fatiguekit::load::LoadProfile;

fn main() -> fatiguekit::Result<()> {
    let muscle = MuscleParameters::new("shoulder_equivalent", 800.0, 1.0)?;
    let demand = LoadProfile::constant(400.0)?; // half of MVC
    let horizon = 1.2; // minutes; analytic exhaustion is ~1.386 min

    let solver = ReferenceIntegrator::default();
    let states = solver.integrate_profile(&muscle, &demand, horizon, 1e-4)?;

    println!("constant 400 N on an 800 N muscle, k = 1/min:");
    println!(
        "{:>7}  {:>10}  {:>10}  {:>11}  {:>9}",
        "t_min", "fcem_N", "u_min", "closed_fcem", "rel_err"
    );
    for state in states.iter().step_by(2000) {
        let closed = fcem_closed_form(&muscle, state.f_acc);
        let rel_err = (state.fcem_n - closed).abs() / closed;
        println!(
            "{:>7.3}  {:>10.3}  {:>10.6}  {:>11.3}  {:>9.2e}",
            state.t_min, state.fcem_n, state.u_min, closed, rel_err
        );
    }

    let last = states.last().unwrap();
    let u_closed = fatigue_index_from_rest(&muscle, last.f_acc)?;
    println!(
        "\nafter {:.2} min: capacity {:.1} N of {:.0} N, fatigue index {:.6} min",
        last.t_min, last.fcem_n, muscle.mvc_n, last.u_min
    );
    println!(
        "closed-form fatigue index at the same accumulated load: {:.6} min",
        u_closed
    );
    println!(
        "RK4 vs closed form: {:.2e} relative",
        (last.u_min - u_closed).abs() / u_closed
    );

    // Driving demand to zero freezes the state: the model has no recovery
    // term, so capacity holds flat through rest.
    let rest_then_work = LoadProfile::composite(vec![
        (0.5, LoadProfile::constant(400.0)?),
        (0.5, LoadProfile::constant(0.0)?),
    ])?;
    let states = solver.integrate_profile(&muscle, &rest_then_work, 1.0, 1e-4)?;
    let at_half = states.iter().find(|s| s.t_min >= 0.5).unwrap();
    let at_end = states.last().unwrap();
    println!(
        "\nwork 0.5 min then rest 0.5 min: fcem {:.3} N at 0.5 min, {:.3} N at 1.0 min",
        at_half.fcem_n, at_end.fcem_n
    );
    println!("(no recovery modelled: lost capacity stays lost)");
    Ok(())
}
