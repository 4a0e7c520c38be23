// Oracle soundness: every reference constructor's device must pass the full
// evaluation pipeline against its generated task, at every supported
// parameter point.

use redbench_core::build::{self, BuildError};
use redbench_core::contract::evaluate;
use redbench_core::task::{generate_task, generate_task_with, Family, GenOptions, Level};
use redbench_core::world::World;

fn solve_and_evaluate(family: Family, level: Level, seed: u64) -> Result<(), String> {
    let spec = generate_task(family, level, seed).map_err(|e| e.to_string())?;
    let device = build::solve(&spec).map_err(|e| e.to_string())?;
    let mut world = World::default();
    device.load_into(&mut world);
    let (verdict, trace) = evaluate(&mut world, &spec);
    if verdict.pass {
        Ok(())
    } else {
        Err(format!(
            "{family:?} {level:?}: {:?} onsets {:?}",
            verdict.violations, trace.onsets
        ))
    }
}

#[test]
fn family_a_all_levels() {
    for level in Level::ALL {
        solve_and_evaluate(Family::A, level, 0).unwrap();
    }
}

#[test]
fn family_b_all_levels() {
    for level in Level::ALL {
        solve_and_evaluate(Family::B, level, 0).unwrap();
    }
}

#[test]
fn family_c_l1_to_l3() {
    for level in [Level::L1, Level::L2, Level::L3] {
        solve_and_evaluate(Family::C, level, 0).unwrap();
    }
}

#[test]
fn family_c_l4_l5_fit_or_report_overflow() {
    for level in [Level::L4, Level::L5] {
        let spec = generate_task(Family::C, level, 0).unwrap();
        match build::solve(&spec) {
            Ok(device) => {
                let mut world = World::default();
                device.load_into(&mut world);
                let (verdict, _) = evaluate(&mut world, &spec);
                assert!(verdict.pass, "{level:?} built but failed evaluation");
            }
            Err(BuildError::RegionOverflow {
                needed_cells,
                available_cells,
                ..
            }) => {
                assert!(needed_cells > 0 || available_cells > 0);
            }
            Err(e) => panic!("{level:?}: unexpected {e}"),
        }
    }
}

#[test]
fn family_d_l1_to_l3_multiple_seeds() {
    for level in [Level::L1, Level::L2, Level::L3] {
        for seed in 0..4 {
            solve_and_evaluate(Family::D, level, seed).unwrap();
        }
    }
}

#[test]
fn family_d_l4_l5_report_overflow() {
    for level in [Level::L4, Level::L5] {
        let spec = generate_task(Family::D, level, 0).unwrap();
        match build::solve(&spec) {
            Err(BuildError::RegionOverflow { detail, .. }) => {
                assert!(!detail.is_empty());
            }
            other => panic!("expected overflow, got {other:?}"),
        }
    }
}

#[test]
fn family_e_every_tau_at_4_and_8_lamps() {
    for n in [4u32, 8] {
        for tau in 4..=12 {
            let spec = generate_task_with(
                Family::E,
                Level::L1,
                0,
                &GenOptions {
                    n: Some(n),
                    tau: Some(tau),
                    ..GenOptions::default()
                },
            )
            .unwrap();
            let device = build::solve(&spec).unwrap_or_else(|e| panic!("tau {tau} n {n}: {e}"));
            let mut world = World::default();
            device.load_into(&mut world);
            let (verdict, trace) = evaluate(&mut world, &spec);
            assert!(
                verdict.pass,
                "tau {tau} n {n}: {:?} onsets {:?} offsets {:?}",
                verdict.violations, trace.onsets, trace.offsets
            );
        }
    }
}

#[test]
fn family_e_schedule_levels() {
    // Levels L1 and L2 sit inside the small-net domain; L3+ use the
    // corridor lattice.
    for level in Level::ALL {
        let spec = generate_task(Family::E, level, 0).unwrap();
        let device = build::solve(&spec).unwrap();
        let mut world = World::default();
        device.load_into(&mut world);
        let (verdict, trace) = evaluate(&mut world, &spec);
        assert!(
            verdict.pass,
            "{level:?}: {:?} onsets {:?} offsets {:?}",
            verdict.violations, trace.onsets, trace.offsets
        );
    }
}

#[test]
fn simultaneous_devices_have_zero_onset_spread() {
    for n in [4u32, 8, 16, 32, 64] {
        let spec = generate_task_with(
            Family::A,
            Level::L1,
            0,
            &GenOptions {
                n: Some(n),
                ..GenOptions::default()
            },
        )
        .unwrap();
        let device = build::solve(&spec).unwrap();
        let mut world = World::default();
        device.load_into(&mut world);
        let (verdict, trace) = evaluate(&mut world, &spec);
        assert!(verdict.pass, "n {n}: {:?}", verdict.violations);
        let onsets: Vec<u64> = trace.onsets.iter().map(|o| o.unwrap()).collect();
        let min = onsets.iter().min().unwrap();
        let max = onsets.iter().max().unwrap();
        assert_eq!(min, max, "n {n}: symmetric fanout must have zero skew");
    }
}
