//! Acceptance gate: the eight checks that define "working" for this crate.
//!
//! Each test prints one PASS line (visible with `--nocapture`); a failing
//! criterion fails its test, so `cargo test --test acceptance` gives one
//! verdict per criterion.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fatiguekit::biomech::{static_joint_torques, SegmentSpec, WorkerProfile};
use fatiguekit::fatigue::{
    endurance_constant_relative, endurance_time, fatigue_index_closed_form,
    fatigue_index_from_rest, fcem_closed_form, EnduranceOutcome, MuscleParameters, MuscleState,
    ReferenceIntegrator,
};
use fatiguekit::load::{parse_mass_csv, Interpolation, LoadProfile};
use fatiguekit::motion::parse_motion_csv;
use fatiguekit::report::{evaluate_task, EvaluationOptions};

fn fixture_dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn read_fixture(task: &str, file: &str) -> String {
    let path = fixture_dir(task).join(file);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

/// A randomized piecewise-constant demand: segment durations in minutes
/// and relative levels, against a muscle drawn from the same generator.
struct RandomCase {
    params: MuscleParameters,
    segments: Vec<(f64, f64)>, // (duration_min, relative_level)
    horizon_min: f64,
}

fn random_case(rng: &mut ChaCha8Rng, index: usize) -> RandomCase {
    let mvc_n = rng.gen_range(200.0..=1000.0);
    let k_per_min = rng.gen_range(0.5..=2.0);
    let params = MuscleParameters::new(format!("case_{index}"), mvc_n, k_per_min).unwrap();

    let n_segments = rng.gen_range(1..=4);
    let mut segments = Vec::with_capacity(n_segments);
    let mut f_max: f64 = 0.0;
    for _ in 0..n_segments {
        let level = rng.gen_range(0.05..=0.9);
        f_max = f_max.max(level);
        segments.push((rng.gen_range(0.05..=1.0), level));
    }
    // Stay inside the model's validity region: stop well before even the
    // heaviest segment level could exhaust the muscle.
    let t_star = endurance_constant_relative(k_per_min, f_max).unwrap();
    let horizon_min = rng.gen_range(0.2..=0.8) * t_star;

    // Rescale segment durations to tile the horizon exactly.
    let total: f64 = segments.iter().map(|(d, _)| d).sum();
    for (d, _) in &mut segments {
        *d *= horizon_min / total;
    }
    RandomCase {
        params,
        segments,
        horizon_min,
    }
}

#[test]
fn criterion_1_closed_forms_match_rk4_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let solver = ReferenceIntegrator::default();
    let cases = 120;
    let mut worst_rel = 0.0_f64;

    for index in 0..cases {
        let case = random_case(&mut rng, index);
        let params = &case.params;

        // March RK4 segment by segment so the solver never steps across a
        // load discontinuity; within a segment the demand is constant.
        let mut state = MuscleState::fresh(params);
        let mut f_exact = 0.0;
        for &(duration, level) in &case.segments {
            let f_load_n = level * params.mvc_n;
            let steps = (duration / 1e-4).ceil().max(1.0) as usize;
            let h = duration / steps as f64;
            for _ in 0..steps {
                state = solver.step(params, &state, f_load_n, h).unwrap();
            }
            f_exact += level * duration;
        }

        let fcem_expected = fcem_closed_form(params, f_exact);
        let u_expected = fatigue_index_from_rest(params, f_exact).unwrap();
        let fcem_rel = (state.fcem_n - fcem_expected).abs() / fcem_expected;
        let u_rel = (state.u_min - u_expected).abs() / u_expected.max(1e-30);
        worst_rel = worst_rel.max(fcem_rel).max(u_rel);
        assert!(
            fcem_rel < 1e-5 && u_rel < 1e-5,
            "case {index}: fcem rel err {fcem_rel:.3e}, u rel err {u_rel:.3e} \
             (horizon {:.3} min)",
            case.horizon_min
        );
    }

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "oracle comparison took {elapsed:?}, budget is 10 s"
    );
    println!(
        "PASS criterion 1: closed forms vs RK4 oracle on {cases} randomized cases, \
         worst relative error {worst_rel:.2e}, {elapsed:?}"
    );
}

#[test]
fn criterion_2_endurance_matches_analytic_formula() {
    let mut worst = 0.0_f64;
    for &f_rel in &[0.2_f64, 0.5, 0.8] {
        for &k in &[0.5_f64, 1.0, 2.0] {
            let analytic = -f_rel.ln() / (k * f_rel);
            let mvc = 500.0;
            let params = MuscleParameters::new("endurance_check", mvc, k).unwrap();
            let profile = LoadProfile::constant(f_rel * mvc).unwrap();
            let scanned = endurance_time(&params, &profile, 1.5 * analytic, 1e-3).unwrap();
            let EnduranceOutcome::Exhausted { t_min } = scanned else {
                panic!("f={f_rel}, k={k}: expected exhaustion, got {scanned:?}");
            };
            let err = (t_min - analytic).abs();
            worst = worst.max(err);
            assert!(
                err < 1e-6,
                "f={f_rel}, k={k}: scan {t_min}, analytic {analytic}, err {err:.3e}"
            );
        }
    }
    println!(
        "PASS criterion 2: endurance scan within 1e-6 min of -ln(f)/(k f) \
         over the 3x3 grid, worst error {worst:.2e} min"
    );
}

#[test]
fn criterion_3_model_invariants_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let solver = ReferenceIntegrator::default();

    for trial in 0..25 {
        let case = random_case(&mut rng, trial);
        let params = &case.params;

        // Fresh state pins the boundary conditions.
        let fresh = MuscleState::fresh(params);
        assert_eq!(fresh.fcem_n, params.mvc_n, "fcem(0) = MVC");
        assert_eq!(fresh.u_min, 0.0, "u(0) = 0");

        // Monotonicity along the RK4 trajectory.
        let mut state = fresh;
        for &(duration, level) in &case.segments {
            let f_load_n = level * params.mvc_n;
            let steps = (duration / 5e-4).ceil().max(1.0) as usize;
            let h = duration / steps as f64;
            for _ in 0..steps {
                let next = solver.step(params, &state, f_load_n, h).unwrap();
                assert!(next.fcem_n <= state.fcem_n, "capacity never recovers");
                assert!(next.u_min >= state.u_min, "fatigue never decreases");
                state = next;
            }
        }

        // Exact scale invariance: doubling MVC and demand (a power-of-two
        // scale) must reproduce relative quantities bit for bit.
        let doubled =
            MuscleParameters::new(params.muscle_id.clone(), 2.0 * params.mvc_n, params.k_per_min)
                .unwrap();
        let f_acc: f64 = case.segments.iter().map(|(d, l)| l * d).sum();
        assert_eq!(
            fcem_closed_form(params, f_acc) * 2.0,
            fcem_closed_form(&doubled, f_acc),
            "capacity scales by exactly the MVC factor"
        );
        assert_eq!(
            fatigue_index_from_rest(params, f_acc).unwrap(),
            fatigue_index_from_rest(&doubled, f_acc).unwrap(),
            "fatigue index is scale-free, bit for bit"
        );

        // Load dominance: pointwise-heavier demand fatigues at least as much.
        let heavier = f_acc + rng.gen_range(0.01..0.5);
        assert!(fcem_closed_form(params, heavier) < fcem_closed_form(params, f_acc));
        assert!(
            fatigue_index_from_rest(params, heavier).unwrap()
                > fatigue_index_from_rest(params, f_acc).unwrap()
        );

        // Semigroup: running to a then from a to b equals running to b.
        let split = rng.gen_range(0.1..0.9) * f_acc;
        let joined = fatigue_index_from_rest(params, f_acc).unwrap();
        let parts = fatigue_index_from_rest(params, split).unwrap()
            + fatigue_index_closed_form(params, split, f_acc).unwrap();
        assert!(
            (joined - parts).abs() <= 1e-9 * joined.max(1.0),
            "additivity: {joined} vs {parts}"
        );
    }
    println!(
        "PASS criterion 3: boundary conditions, monotonicity, exact scale \
         invariance, dominance and 1e-9 additivity over 25 randomized trials"
    );
}

#[test]
fn criterion_4_grid_convergence_on_lift_fixture() {
    let worker = WorkerProfile::from_json(&read_fixture("lift_task", "worker.json")).unwrap();
    let motion = parse_motion_csv(&read_fixture("lift_task", "motion.csv")).unwrap();
    let mass = parse_mass_csv(&read_fixture("lift_task", "mass.csv"), Interpolation::Hold).unwrap();

    // Once at a grid coarser than the recording, once at half that step;
    // "converged" means a final-U shift below 1e-4 relative.
    let mut worst = 0.0_f64;
    for dt in [2e-3, EvaluationOptions::default().analysis_dt_min] {
        let coarse = evaluate_task(
            &worker,
            &motion,
            &mass,
            &EvaluationOptions {
                analysis_dt_min: dt,
                ..EvaluationOptions::default()
            },
        )
        .unwrap();
        let fine = evaluate_task(
            &worker,
            &motion,
            &mass,
            &EvaluationOptions {
                analysis_dt_min: dt / 2.0,
                ..EvaluationOptions::default()
            },
        )
        .unwrap();
        for (c, f) in coarse.muscles.iter().zip(&fine.muscles) {
            let rel = (c.final_u_min - f.final_u_min).abs() / f.final_u_min.abs().max(1e-30);
            worst = worst.max(rel);
            assert!(
                rel < 1e-4,
                "muscle {}: dt {dt} -> {}, dt/2 -> {} (rel {rel:.3e})",
                c.muscle_id,
                c.final_u_min,
                f.final_u_min
            );
        }
        assert!(coarse.metadata.grid.converged, "report self-check at dt {dt}");
    }
    println!(
        "PASS criterion 4: halving analysis_dt moves final U by {worst:.2e} \
         relative (< 1e-4) on the bundled lift-cycle task"
    );
}

#[test]
fn criterion_5_horizontal_arm_torque_matches_hand_derivation() {
    // Two-segment arm, both horizontal, 10 kg in hand:
    //   9.81 * (2.0*0.15 + 1.5*(0.3 + 0.175) + 10*0.65) = 73.697625 N*m.
    let worker = WorkerProfile {
        name: "horizontal-arm-check".into(),
        segments: vec![
            SegmentSpec {
                name: "upper_arm".into(),
                joint: "shoulder".into(),
                length_m: 0.3,
                mass_kg: 2.0,
                com_ratio: 0.5,
            },
            SegmentSpec {
                name: "forearm_hand".into(),
                joint: "elbow".into(),
                length_m: 0.35,
                mass_kg: 1.5,
                com_ratio: 0.5,
            },
        ],
        joints: BTreeMap::new(),
        muscles: vec![],
        angle_limit_rad: std::f64::consts::PI,
    };
    let posture = BTreeMap::from([
        ("shoulder".to_string(), FRAC_PI_2),
        ("elbow".to_string(), FRAC_PI_2),
    ]);
    let torques = static_joint_torques(&worker, &posture, 10.0).unwrap();
    let expected = 9.81 * (2.0 * 0.15 + 1.5 * (0.3 + 0.175) + 10.0 * 0.65);
    let rel = (torques["shoulder"] - expected).abs() / expected;
    assert!(
        rel < 1e-9,
        "shoulder torque {} vs {expected} (rel {rel:.3e})",
        torques["shoulder"]
    );
    println!(
        "PASS criterion 5: horizontal-arm shoulder torque {:.6} N*m matches \
         the hand-derived value within {rel:.2e} relative",
        torques["shoulder"]
    );
}

#[test]
fn criterion_6_segmentation_recovers_synth_boundaries() {
    // Generate a dwell/move/dwell/move recording with the shipped
    // generator CLI, then recover the boundaries from angles alone.
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_fatiguekit"))
        .args([
            "synth",
            "lift-cycle",
            "--cycles",
            "2",
            "--dwell-s",
            "4.8",
            "--move-s",
            "2.4",
            "--rate-hz",
            "25",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());

    let motion =
        parse_motion_csv(&fs::read_to_string(dir.path().join("motion.csv")).unwrap()).unwrap();
    let truth: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("ground_truth.json")).unwrap())
            .unwrap();
    let true_boundaries: Vec<f64> = truth["boundaries_min"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(true_boundaries.len(), 3, "2 cycles -> 4 phases -> 3 boundaries");

    let spans = motion.segment_phases(15.0, 1.0 / 240.0).unwrap();
    let detected: Vec<f64> = spans.iter().skip(1).map(|s| s.t_start_min).collect();
    assert_eq!(detected.len(), true_boundaries.len(), "span count");

    let frame_min = 1.0 / 1500.0; // one frame at 25 Hz, in minutes
    let mut worst_frames = 0.0_f64;
    for (d, t) in detected.iter().zip(&true_boundaries) {
        let frames = (d - t).abs() / frame_min;
        worst_frames = worst_frames.max(frames);
        assert!(
            frames <= 2.0,
            "boundary at {t} min detected at {d} min ({frames:.2} frames off)"
        );
    }
    println!(
        "PASS criterion 6: all {} phase boundaries recovered within \
         {worst_frames:.1} frame(s) at 25 Hz (allowance 2)",
        true_boundaries.len()
    );
}

fn run_analyze(out: &Path) {
    let hold = fixture_dir("hold_task");
    let status = Command::new(env!("CARGO_BIN_EXE_fatiguekit"))
        .arg("analyze")
        .arg("--worker")
        .arg(hold.join("worker.json"))
        .arg("--motion")
        .arg(hold.join("motion.csv"))
        .arg("--mass")
        .arg(hold.join("mass.csv"))
        .arg("--standards")
        .arg(hold.join("standards.json"))
        .arg("--out")
        .arg(out)
        .status()
        .unwrap();
    assert!(status.success());
}

#[test]
fn criterion_7_analyze_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (first, second) = (dir.path().join("first"), dir.path().join("second"));
    run_analyze(&first);
    run_analyze(&second);

    let mut names: Vec<String> = fs::read_dir(&first)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        vec!["report.json", "summary.csv", "trajectory_shoulder_flexor.csv"]
    );
    for name in &names {
        let a = fs::read(first.join(name)).unwrap();
        let b = fs::read(second.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between reruns");
    }
    println!(
        "PASS criterion 7: two analyze runs produced byte-identical \
         {:?}",
        names
    );
}

#[test]
fn criterion_8_bundled_hold_task_end_to_end() {
    let worker = WorkerProfile::from_json(&read_fixture("hold_task", "worker.json")).unwrap();
    let motion = parse_motion_csv(&read_fixture("hold_task", "motion.csv")).unwrap();
    let mass = parse_mass_csv(&read_fixture("hold_task", "mass.csv"), Interpolation::Hold).unwrap();

    let report = evaluate_task(&worker, &motion, &mass, &EvaluationOptions::default()).unwrap();
    assert_eq!(report.muscles.len(), 1);
    let muscle = &report.muscles[0];

    // The fixture is built to put the equivalent muscle at exactly half
    // its strength, so the constant-load numbers flow through unchanged.
    let last = muscle.trajectory.last().unwrap();
    assert_eq!(last.t_min, 1.0, "recording ends at exactly one minute");
    let u_expected = 0.8591409142295225; // (e - 1) / 2
    let u_rel = (muscle.final_u_min - u_expected).abs() / u_expected;
    assert!(u_rel < 1e-9, "final U {} (rel {u_rel:.3e})", muscle.final_u_min);

    let fcem_expected = muscle.mvc_n * (-0.5_f64).exp();
    let fcem_rel = (muscle.final_fcem_n - fcem_expected).abs() / fcem_expected;
    assert!(fcem_rel < 1e-9, "final fcem {}", muscle.final_fcem_n);

    let EnduranceOutcome::Exhausted { t_min } = muscle.endurance else {
        panic!("expected exhaustion, got {:?}", muscle.endurance);
    };
    assert!(
        (t_min - 1.3862943611198906).abs() < 1e-6,
        "endurance {t_min}"
    );
    assert!((muscle.peak_relative_load - 0.5).abs() < 1e-12);
    assert!(muscle.overload_spans.is_empty());
    println!(
        "PASS criterion 8: bundled hold task -> final U {:.6} min at t = 1 min, \
         fcem {:.2} N, endurance {:.6} min",
        muscle.final_u_min, muscle.final_fcem_n, t_min
    );
}
