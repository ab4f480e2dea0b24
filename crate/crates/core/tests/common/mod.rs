// Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use tofmux_core::scene::{SceneModel, SceneParams};
use tofmux_core::simulator::{CameraSetup, Scenario};
use tofmux_core::{CameraConfig, Time};

pub fn camera(fps: f64, n_quads: u32, duty: f64) -> CameraConfig {
    CameraConfig { frame_rate: fps, n_quads, intg_duty_cycle: duty, ..CameraConfig::default() }
}

pub fn default_scene() -> SceneModel {
    SceneModel::render(&SceneParams::default())
}

/// Two identical 30 fps cameras, the second delayed by `shift`.
pub fn same_rate_pair(shift: Time, seed: u64) -> Scenario {
    let c = camera(30.0, 4, 0.28);
    Scenario {
        seed,
        ..Scenario::new(
            vec![CameraSetup::new(c, Time::ZERO), CameraSetup::new(c, shift)],
            default_scene(),
            Time::from_fraction(1, 10),
        )
    }
}

/// 30 fps against 28 fps, six quads, the second camera triggered 1667 µs late.
pub fn beat_pair(duration: Time, seed: u64) -> Scenario {
    Scenario {
        seed,
        ..Scenario::new(
            vec![
                CameraSetup::new(camera(30.0, 6, 0.28), Time::ZERO),
                CameraSetup::new(camera(28.0, 6, 0.28), Time::from_micros(1667)),
            ],
            default_scene(),
            duration,
        )
    }
}

/// Saturated pixels of a lone camera.
pub fn baseline_count(scenario: &Scenario) -> usize {
    let mut solo = scenario.clone();
    solo.cameras.truncate(1);
    let sim = tofmux_core::simulator::Simulator::new(&solo).unwrap();
    sim.frame(0, 0).saturated_count
}

/// Whether a camera with `config` triggered at `offset` (seconds) is
/// integrating at time `t`, from the frame layout in floating point.
pub fn integrating_at(config: &CameraConfig, offset: f64, t: f64) -> bool {
    let clock = config.sys_clock_freq as f64;
    let quads = (config.n_quads * config.n_subframes) as f64;
    let quad = 1.0 / (config.frame_rate * quads);
    let t_qt = (clock * quad).floor();
    let t_qin = (t_qt * config.intg_duty_cycle).floor();
    let lead = config.reset_cycles as f64 / clock;
    let len = t_qin / clock;
    let phase = (t - offset).rem_euclid(quad);
    phase >= lead && phase < lead + len
}

/// Overlap of two cameras on a `grid`-second lattice over `[lo, hi)`.
pub fn sampled_overlap(a: (&CameraConfig, f64), b: (&CameraConfig, f64), lo: f64, hi: f64, grid: f64) -> f64 {
    let n = ((hi - lo) / grid).round() as usize;
    let hits = (0..n)
        .filter(|&i| {
            let t = lo + (i as f64 + 0.5) * grid;
            integrating_at(a.0, a.1, t) && integrating_at(b.0, b.1, t)
        })
        .count();
    hits as f64 * grid
}

/// Smallest `k` with `k / fa` a whole number of the interferer's quad
/// periods, by direct search over integers.
pub fn brute_force_beat(
    fa_num: u64,
    fa_den: u64,
    fb_num: u64,
    fb_den: u64,
    quads_b: u64,
    cap: u64,
) -> Option<u64> {
    // k/fa ÷ 1/(fb·quads_b) = k·fa_den·fb_num·quads_b / (fa_num·fb_den)
    (1..=cap).find(|&k| (k * fa_den * fb_num * quads_b).is_multiple_of(fa_num * fb_den))
}
