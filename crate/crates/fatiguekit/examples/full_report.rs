//! The whole pipeline on a bundled recording: files in, report out.
//!
//! Reads the hold-task fixture (a 10 kg mass held at full horizontal reach
//! for one minute — an equivalent muscle at exactly half its strength),
//! evaluates it, and writes the deterministic report files.
//!
//! Run with: cargo run --example full_report

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use fatiguekit::load::{parse_mass_csv, Interpolation};
use fatiguekit::motion::parse_motion_csv;
use fatiguekit::report::{evaluate_task, write_report, EvaluationOptions};
use fatiguekit::{EnduranceOutcome, WorkerProfile};

fn main() -> fatiguekit::Result<()> {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/hold_task");
    let read = |name: &str| {
        fs::read_to_string(fixture.join(name)).expect("bundled fixture file is present")
    };

    let worker = WorkerProfile::from_json(&read("worker.json"))?;
    let motion = parse_motion_csv(&read("motion.csv"))?;
    let mass = parse_mass_csv(&read("mass.csv"), Interpolation::Hold)?;
    println!(
        "task: {} frames over {:.3} min, worker `{}`",
        motion.frames().len(),
        motion.duration_min(),
        worker.name
    );

    let options = EvaluationOptions {
        standard_times_min: Some(BTreeMap::from([("dwell".to_string(), 1.0)])),
        ..EvaluationOptions::default()
    };
    let report = evaluate_task(&worker, &motion, &mass, &options)?;

    for muscle in &report.muscles {
        println!("\nmuscle `{}`:", muscle.muscle_id);
        println!("  peak demand     {:>10.1} N ({:.1}% of MVC)", muscle.peak_load_n, 100.0 * muscle.peak_relative_load);
        println!("  final capacity  {:>10.1} N of {:.1} N", muscle.final_fcem_n, muscle.mvc_n);
        println!("  fatigue index   {:>10.6} min", muscle.final_u_min);
        match muscle.endurance {
            EnduranceOutcome::Exhausted { t_min } => {
                println!("  exhaustion at   {t_min:>10.6} min if the demand persisted")
            }
            EnduranceOutcome::NotExhausted => println!("  no exhaustion within the horizon"),
        }
    }

    println!("\nphases:");
    for phase in &report.phases {
        let du: f64 = phase.delta_u_min.values().sum();
        println!(
            "  {:>5} [{:.3}, {:.3}] min, total delta-U {du:.6} min",
            phase.label.as_str(),
            phase.t_start_min,
            phase.t_end_min
        );
    }
    if let Some(eff) = &report.efficiency {
        println!("efficiency overall: {:.4}", eff.overall_ratio);
    }

    let out_dir = std::env::temp_dir().join("fatiguekit_full_report");
    let files = write_report(&report, &out_dir)?;
    println!("\nwrote:");
    for file in &files {
        println!("  {}", file.display());
    }
    println!("(rerunning writes byte-identical files; digests in report.json pin the inputs)");
    Ok(())
}
