//! Trigger-shift scheduling for cameras sharing one frame rate.
//!
//! Camera `k` is delayed by `k·t_qin`, so its integration windows fall into
//! the dead time of every camera before it. At most `floor(t_qt / t_qin)`
//! cameras fit.

use alloc::vec::Vec;

use thiserror::Error;

use crate::time::Time;
use crate::timing::{derive_quad_timing, Cadence, CameraConfig, QuadTiming, TimingError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("{requested} cameras requested but at most {bound} fit without interference")]
    CapacityExceeded { requested: usize, bound: u64 },
    #[error("integration time is zero; capacity is unbounded")]
    ZeroIntegration,
    #[error(transparent)]
    Timing(#[from] TimingError),
}

/// Per-camera trigger delays for a shared configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub config: CameraConfig,
    pub offsets: Vec<Time>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairOverlap {
    pub a: usize,
    pub b: usize,
    pub overlap: Time,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleReport {
    pub pairs: Vec<PairOverlap>,
}

impl ScheduleReport {
    pub fn is_valid(&self) -> bool {
        self.pairs.iter().all(|p| p.overlap.is_zero())
    }

    pub fn total_overlap(&self) -> Time {
        self.pairs.iter().map(|p| p.overlap).sum()
    }
}

pub fn max_cameras(timing: &QuadTiming) -> Result<u64, ScheduleError> {
    if timing.t_qin == 0 {
        return Err(ScheduleError::ZeroIntegration);
    }
    Ok(timing.t_qt / timing.t_qin)
}

pub fn assign_shifts(config: &CameraConfig, n_cameras: usize) -> Result<Schedule, ScheduleError> {
    let timing = derive_quad_timing(config)?;
    let bound = max_cameras(&timing)?;
    if n_cameras as u64 > bound {
        return Err(ScheduleError::CapacityExceeded { requested: n_cameras, bound });
    }
    let offsets = (0..n_cameras)
        .map(|k| Time::from_cycles(k as i128 * timing.t_qin as i128, config.sys_clock_freq))
        .collect();
    Ok(Schedule { config: *config, offsets })
}

/// Total time during which both cameras integrate inside `window`.
pub fn pairwise_overlap(
    config_a: &CameraConfig,
    offset_a: Time,
    config_b: &CameraConfig,
    offset_b: Time,
    window: (Time, Time),
) -> Result<Time, TimingError> {
    if window.0 >= window.1 {
        return Err(TimingError::EmptyWindow);
    }
    let a = Cadence::of(config_a)?.intervals(offset_a, window.0, window.1);
    let b = Cadence::of(config_b)?.intervals(offset_b, window.0, window.1);
    Ok(a.intersection_length(&b))
}

/// Pairwise overlaps for arbitrary, possibly heterogeneous, cameras.
pub fn verify_cameras(
    cameras: &[(CameraConfig, Time)],
    window: (Time, Time),
) -> Result<ScheduleReport, TimingError> {
    if window.0 >= window.1 {
        return Err(TimingError::EmptyWindow);
    }
    let sets = cameras
        .iter()
        .map(|(cfg, off)| Ok(Cadence::of(cfg)?.intervals(*off, window.0, window.1)))
        .collect::<Result<Vec<_>, TimingError>>()?;
    let mut pairs = Vec::new();
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            pairs.push(PairOverlap { a, b, overlap: sets[a].intersection_length(&sets[b]) });
        }
    }
    Ok(ScheduleReport { pairs })
}

pub fn verify_schedule(schedule: &Schedule, window: (Time, Time)) -> Result<ScheduleReport, TimingError> {
    let cams: Vec<_> = schedule.offsets.iter().map(|&o| (schedule.config, o)).collect();
    verify_cameras(&cams, window)
}
