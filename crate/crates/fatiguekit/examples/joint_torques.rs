//! Static joint torques for a planar arm, and what they demand of muscles.
//!
//! The loader models the body as a chain of rigid segments in the sagittal
//! plane; angles are measured from vertical, so a hanging arm costs
//! nothing and a horizontal reach is the worst case. Gravity moments of
//! the segments and the handled mass are summed about each joint.
//!
//! Run with: cargo run --example joint_torques

use std::f64::consts::FRAC_PI_2;

use fatiguekit::biomech::{default_profile, static_joint_torques, torque_to_muscle_load};

fn main() -> fatiguekit::Result<()> {
    let worker = default_profile();
    println!("worker: {} ({} segments, {} muscles)", worker.name, worker.segments.len(), worker.muscles.len());

    let joints: Vec<&str> = worker.segments.iter().map(|s| s.joint.as_str()).collect();
    let posture = |angles: &[f64]| -> Vec<(String, f64)> {
        joints
            .iter()
            .zip(angles)
            .map(|(j, a)| (j.to_string(), *a))
            .collect()
    };

    // Hanging straight down: every moment arm is zero.
    let hanging = posture(&[0.0, 0.0, 0.0]).into_iter().collect();
    let torques = static_joint_torques(&worker, &hanging, 5.0)?;
    println!("\nhanging arm with 5 kg in hand:");
    for (joint, torque) in &torques {
        println!("  {joint:<9} {torque:>8.3} N*m");
    }

    // Fully horizontal: maximum gravity moment at every joint.
    let horizontal = posture(&[FRAC_PI_2, FRAC_PI_2, FRAC_PI_2]).into_iter().collect();
    let torques = static_joint_torques(&worker, &horizontal, 5.0)?;
    println!("\nhorizontal arm with 5 kg in hand:");
    for (joint, torque) in &torques {
        println!("  {joint:<9} {torque:>8.3} N*m");
    }

    // Torque becomes muscle force through the effective moment arm: a few
    // centimetres of leverage turn tens of N*m into hundreds of newtons.
    let loads = torque_to_muscle_load(&worker, &torques)?;
    println!("\nper-muscle demand in that posture:");
    for (muscle_id, f_load) in &loads {
        let spec = worker.muscles.iter().find(|m| &m.muscle_id == muscle_id).unwrap();
        println!(
            "  {muscle_id:<16} {f_load:>8.1} N  ({:.0} N*m / {:.2} m arm, {:.0}% of MVC)",
            torques[&spec.joint],
            spec.moment_arm_m,
            100.0 * f_load / spec.mvc_n
        );
    }

    // Halfway postures scale smoothly between the extremes.
    println!("\nshoulder torque vs reach angle (5 kg in hand):");
    for deg in [0, 15, 30, 45, 60, 75, 90] {
        let angle = f64::from(deg).to_radians();
        let p = posture(&[angle, angle, angle]).into_iter().collect();
        let torque = static_joint_torques(&worker, &p, 5.0)?;
        println!("  {deg:>3} deg -> {:>8.3} N*m", torque["shoulder"]);
    }
    Ok(())
}
