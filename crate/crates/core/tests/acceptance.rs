//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tofmux_core::detector::{self, SweepParams};
use tofmux_core::scheduler::{self, ScheduleError};
use tofmux_core::signal::{self, CorrelationSamples, ModulationParams};
use tofmux_core::simulator::{self, BeatPeriod, Simulator};
use tofmux_core::timing::derive_quad_timing;
use tofmux_core::{CameraConfig, Time};

use common::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn capacity_bound() -> Outcome {
    let c = camera(30.0, 4, 0.28);
    let bound = scheduler::max_cameras(&derive_quad_timing(&c).unwrap()).unwrap();
    ensure(bound == 3, format!("max_cameras = {bound}, expected 3"))?;
    let s = scheduler::assign_shifts(&c, 3).map_err(|e| e.to_string())?;
    let report = scheduler::verify_schedule(&s, (Time::ZERO, Time::from_secs(1))).unwrap();
    ensure(report.is_valid(), format!("3-camera schedule overlaps: {:?}", report.pairs))?;
    match scheduler::assign_shifts(&c, 4) {
        Err(ScheduleError::CapacityExceeded { bound: 3, .. }) => {}
        other => return Err(format!("4 cameras gave {other:?}")),
    }
    Ok("N_max = 3, 3 cameras verified over 1 s with zero overlap, 4 rejected with bound 3".into())
}

fn fig5_shape() -> Outcome {
    let c = camera(30.0, 4, 0.28);
    let scenario = same_rate_pair(Time::ZERO, 1);
    let baseline = baseline_count(&scenario);
    let band = 0.01 * scenario.scene.pixel_count() as f64;
    let shifts: Vec<Time> = (0..=32).map(|i| Time::from_micros(250 * i)).collect();
    let counts = detector::saturation_at_shifts(&scenario, &shifts, 1).map_err(|e| e.to_string())?;
    let free: Vec<bool> = shifts.iter().map(|&s| detector::is_predicted_free(&c, s).unwrap()).collect();
    for (i, (&cnt, &f)) in counts.iter().zip(&free).enumerate() {
        if f {
            ensure(
                cnt == baseline as f64,
                format!("shift {} µs predicted free but count {cnt} != baseline {baseline}", i * 250),
            )?;
        }
    }
    let first_free = free.iter().position(|&f| f).ok_or("no predicted free shift in 0-8 ms")?;
    let last_free = free.iter().rposition(|&f| f).unwrap();
    ensure(
        counts[..=first_free].windows(2).all(|w| w[0] >= w[1]),
        format!("counts not decreasing before the free interval: {:?}", &counts[..=first_free]),
    )?;
    ensure(
        counts[last_free..].windows(2).all(|w| w[0] <= w[1]),
        format!("counts not regrowing after the free interval: {:?}", &counts[last_free..]),
    )?;
    let max = counts.iter().copied().fold(0.0, f64::max);
    ensure(counts[0] == max, format!("maximum {max} is not at shift 0 ({})", counts[0]))?;
    ensure(*counts.last().unwrap() > baseline as f64, "no re-growth by 8 ms")?;
    let excess = counts[0] - baseline as f64;
    ensure(
        excess >= 10.0 * band,
        format!("count at 0 exceeds baseline by {excess}, need >= {}", 10.0 * band),
    )?;
    Ok(format!(
        "baseline {baseline}, count(0) = {}, excess {excess} >= {}, free shifts {:.2}-{:.2} ms at baseline",
        counts[0],
        10.0 * band,
        first_free as f64 * 0.25,
        last_free as f64 * 0.25
    ))
}

fn fig6_sweep() -> Outcome {
    let c = camera(30.0, 4, 0.28);
    let scenario = same_rate_pair(Time::ZERO, 1);
    let r = detector::sweep_shifts(&scenario, &SweepParams::default()).map_err(|e| e.to_string())?;
    let cmp = detector::compare_with_prediction(&c, &r.shifts, &r.is_free, Time::from_millis(1))
        .map_err(|e| e.to_string())?;
    let predicted: Vec<bool> =
        r.shifts.iter().map(|&s| detector::is_predicted_free(&c, s).unwrap()).collect();
    ensure(cmp.within_tolerance, format!("detected {:?} vs predicted {:?}", r.is_free, predicted))?;
    let ms: Vec<i64> = r.mci_free_shifts.iter().map(|s| s.to_micros_rounded() / 1000).collect();
    Ok(format!(
        "{} shifts, free set {ms:?} ms, {} (mismatches {:?})",
        r.shifts.len(),
        if cmp.exact { "identical to prediction" } else { "within one step of prediction" },
        cmp.mismatches
    ))
}

fn fig7_beat() -> Outcome {
    let scenario = beat_pair(Time::from_secs(4), 1);
    let (a, b) = (&scenario.cameras[0].config, &scenario.cameras[1].config);
    let beat = simulator::beat_period(a, b, simulator::DEFAULT_BEAT_CAP).unwrap();
    ensure(beat == BeatPeriod::Frames(5), format!("beat period {beat:?}"))?;
    let sim = Simulator::new(&scenario).map_err(|e| e.to_string())?;
    let frames = sim.camera_stream(0);
    ensure(frames.len() == 120, format!("{} frames, expected 120", frames.len()))?;
    let overlaps: Vec<Time> = frames.iter().map(|f| f.overlap).collect();
    ensure(
        detector::detect_period(&overlaps) == Some(5),
        format!("overlap period {:?}", detector::detect_period(&overlaps)),
    )?;
    let baseline = baseline_count(&scenario);
    for (p, chunk) in frames.chunks(5).enumerate() {
        let free: Vec<_> = chunk.iter().filter(|f| f.overlap.is_zero()).collect();
        ensure(free.len() == 1, format!("period {p} has {} zero-overlap frames", free.len()))?;
        ensure(free[0].saturated_count == baseline, format!("free frame in period {p} saturates"))?;
        let mut hit: Vec<_> = chunk.iter().filter(|f| !f.overlap.is_zero()).collect();
        hit.sort_by_key(|f| f.saturated_count);
        let least_overlap = chunk.iter().filter(|f| !f.overlap.is_zero()).min_by_key(|f| f.overlap).unwrap();
        ensure(
            free[0].saturated_count < hit[0].saturated_count
                && hit[0].saturated_count < hit[1].saturated_count,
            format!("period {p}: no distinct slight class in {:?}", counts(chunk)),
        )?;
        ensure(
            hit[0].frame_index == least_overlap.frame_index,
            format!("period {p}: slightest frame is not the least overlapped"),
        )?;
    }
    let first: Vec<usize> = frames[..5].iter().map(|f| f.saturated_count).collect();
    let us: Vec<i64> = frames[..5].iter().map(|f| f.overlap.to_micros_rounded()).collect();
    Ok(format!("beat 5, one free frame in each of 24 periods, counts {first:?}, overlap {us:?} µs"))
}

fn counts(frames: &[simulator::SimFrame]) -> Vec<usize> {
    frames.iter().map(|f| f.saturated_count).collect()
}

fn extraction() -> Outcome {
    let scenario = beat_pair(Time::from_fraction(10, 3), 1);
    let streams = simulator::simulate_stream(&scenario).map_err(|e| e.to_string())?;
    let stream = &streams[0];
    ensure(stream.len() == 100, format!("{} frames, expected 100", stream.len()))?;
    let truth: Vec<u64> = stream.iter().filter(|f| f.overlap.is_zero()).map(|f| f.frame_index).collect();
    let labels = detector::periodicity_analysis(
        stream,
        &streams[1],
        &scenario.cameras[0].config,
        &scenario.cameras[1].config,
    )
    .map_err(|e| e.to_string())?;
    ensure(labels.free_frames() == truth, "timestamp labels disagree with ground truth")?;
    let tol = detector::default_tolerance(scenario.scene.pixel_count());
    let range = signal::ambiguity_range(scenario.cameras[0].config.mod_freq);
    for seed_count in 3..=5 {
        let r = detector::extract_mci_free(stream, seed_count, tol).map_err(|e| e.to_string())?;
        ensure(
            r.inlier_frames == truth,
            format!("seed {seed_count}: inliers {:?} vs truth {truth:?}", r.inlier_frames),
        )?;
        let inliers: Vec<&simulator::SimFrame> =
            stream.iter().filter(|f| r.inlier_frames.contains(&f.frame_index)).collect();
        let flicker = detector::flicker_metric(&inliers, range).map_err(|e| e.to_string())?;
        ensure(flicker == 0.0, format!("seed {seed_count}: inlier flicker {flicker}"))?;
    }
    let all: Vec<&simulator::SimFrame> = stream.iter().collect();
    let full = detector::flicker_metric(&all, range).map_err(|e| e.to_string())?;
    Ok(format!(
        "{} free frames recovered for seed counts 3-5, inlier flicker 0, full-stream flicker {full:.3e}",
        truth.len()
    ))
}

fn signal_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let f = 24e6;
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = ModulationParams {
            a_r: rng.random_range(0.0..10.0),
            b_r: rng.random_range(0.0..10.0),
            a_d: rng.random_range(0.0..10.0),
            b_d: rng.random_range(0.0..10.0),
            mod_freq: f,
            tau: rng.random_range(0.0..1.0 / f),
        };
        let t_d = rng.random_range(0.0..1.0 / f);
        let numeric = signal::correlate_numeric(&p, t_d, 4096);
        let closed = signal::correlate_closed_form(&p, TAU * f * t_d);
        let scale = closed.value.abs().max(closed.a_c + closed.b_c);
        worst = worst.max((numeric - closed.value).abs() / scale);
    }
    ensure(worst <= 1e-6, format!("numeric vs closed form relative error {worst:e}"))?;

    let mut worst_phase = 0.0f64;
    for i in 0..360 {
        let phi = TAU * i as f64 / 360.0;
        let p =
            ModulationParams { a_r: 1.0, b_r: 2.0, a_d: 1.0, b_d: 1.0, mod_freq: f, tau: phi / (TAU * f) };
        let c = |q| signal::correlate_closed_form(&p, signal::bucket_phase(q, 4)).value;
        let est = signal::estimate_phase(&CorrelationSamples::new(c(0), c(1), c(2), c(3))).unwrap();
        let d = (est - phi).abs();
        worst_phase = worst_phase.max(d.min(TAU - d));
    }
    ensure(worst_phase <= 1e-9, format!("phase round trip error {worst_phase:e}"))?;

    // Buckets and offsets on a dyadic grid add without rounding.
    for _ in 0..1000 {
        let mut b = || rng.random_range(0..1 << 20) as f64 / 256.0;
        let s = CorrelationSamples::new(b(), b(), b(), b());
        let dc = rng.random_range(0..1 << 20) as f64 / 256.0;
        let shifted = s.with_offset(dc);
        ensure(
            shifted.c3 - shifted.c1 == s.c3 - s.c1 && shifted.c0 - shifted.c2 == s.c0 - s.c2,
            "DC offset changed a bucket difference",
        )?;
        ensure(signal::estimate_phase(&shifted) == signal::estimate_phase(&s), "DC changed phase")?;
    }

    let range = signal::ambiguity_range(24e6);
    ensure((range - 6.2457).abs() <= 1e-3, format!("ambiguity range {range}"))?;
    Ok(format!(
        "closed form max rel err {worst:.1e}, phase max err {worst_phase:.1e}, DC immunity bit-exact, d_max {range:.4} m"
    ))
}

fn overlap_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0e1a);
    let grid = 1e-6;
    let mut worst = 0.0f64;
    for case in 0..200 {
        let mut cfg = || CameraConfig {
            frame_rate: rng.random_range(100..=600) as f64 / 10.0,
            n_quads: rng.random_range(3..=8),
            n_subframes: rng.random_range(1..=2),
            intg_duty_cycle: rng.random_range(5..=40) as f64 / 100.0,
            n_col_tot: 80,
            n_row: 60,
            ..CameraConfig::default()
        };
        let (a, b) = (cfg(), cfg());
        if derive_quad_timing(&a).is_err() || derive_quad_timing(&b).is_err() {
            return Err(format!("case {case}: generated an infeasible config"));
        }
        let off_a = Time::from_micros(rng.random_range(0..40_000));
        let off_b = Time::from_micros(rng.random_range(0..40_000));
        let lo = Time::from_micros(rng.random_range(0..10_000));
        let hi = lo + Time::from_micros(30_000);
        let exact = scheduler::pairwise_overlap(&a, off_a, &b, off_b, (lo, hi))
            .map_err(|e| e.to_string())?
            .as_secs_f64();
        let sampled = sampled_overlap(
            (&a, off_a.as_secs_f64()),
            (&b, off_b.as_secs_f64()),
            lo.as_secs_f64(),
            hi.as_secs_f64(),
            grid,
        );
        let n_intervals = tofmux_core::timing::integration_intervals(&a, off_a, (lo, hi)).unwrap().len()
            + tofmux_core::timing::integration_intervals(&b, off_b, (lo, hi)).unwrap().len();
        let err = (exact - sampled).abs();
        let bound = grid * n_intervals as f64;
        ensure(err <= bound, format!("case {case}: sweep {exact} vs grid {sampled}, bound {bound}"))?;
        worst = worst.max(err / bound);
    }
    Ok(format!("200 random pairs, worst error {:.2} of the allowed bound", worst))
}

type Criterion = (&'static str, &'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("AC1", "capacity bound", Duration::from_secs(1), capacity_bound),
        ("AC2", "same-rate shift response (0-8 ms)", Duration::from_secs(30), fig5_shape),
        ("AC3", "1 ms shift sweep vs predicted free shifts", Duration::from_secs(60), fig6_sweep),
        ("AC4", "30 vs 28 fps beat pattern", Duration::from_secs(30), fig7_beat),
        ("AC5", "MCI-free frame extraction", Duration::from_secs(30), extraction),
        ("AC6", "signal math oracles", Duration::from_secs(10), signal_oracles),
        ("AC7", "overlap vs 1 µs grid oracle", Duration::from_secs(60), overlap_oracle),
    ];
    let mut failed = 0;
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > limit => Err(format!("{detail}; took {elapsed:.2?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("{id} PASS {name}: {detail} [{elapsed:.2?} < {limit:?}]"),
            Err(why) => {
                failed += 1;
                println!("{id} FAIL {name}: {why} [{elapsed:.2?}]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
