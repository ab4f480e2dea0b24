//! Interference detection from observable frame data.
//!
//! Saturated pixels are the primary cue: a frame whose integration windows
//! overlap another camera's collects extra light and loses pixels to
//! saturation. Depth flicker across frames of a static scene is the second.

use alloc::vec::Vec;

use thiserror::Error;

use crate::simulator::{Scenario, SimError, SimFrame, Simulator};
use crate::time::Time;
use crate::timing::{Cadence, CameraConfig, TimingError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DetectorError {
    #[error("frame rates differ; use the periodicity analysis instead")]
    RateMismatch,
    #[error("expected exactly two cameras, found {0}")]
    NeedTwoCameras(usize),
    #[error("shift step must be positive and no longer than one frame period")]
    InvalidStep,
    #[error("burst must contain at least one frame")]
    EmptyBurst,
    #[error("need at least {needed} frames, got {got}")]
    InsufficientFrames { needed: usize, got: usize },
    #[error("frames have different dimensions")]
    DimensionMismatch,
    #[error("no pixel is valid in every frame")]
    NoCommonValidPixels,
    #[error("stream is empty")]
    EmptyStream,
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Timing(#[from] TimingError),
}

pub fn count_saturated(frame: &SimFrame) -> usize {
    frame.saturation.iter().filter(|&&s| s).count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepParams {
    pub step: Time,
    pub burst_frames: usize,
    /// Tie band above the minimum, as a fraction of the pixel count.
    pub tie_fraction: f64,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams { step: Time::from_millis(1), burst_frames: 3, tie_fraction: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftSweepResult {
    pub shifts: Vec<Time>,
    /// Mean saturated count of the observing camera per shift.
    pub saturated_counts: Vec<f64>,
    /// Counts divided by their maximum.
    pub normalized_counts: Vec<f64>,
    pub mci_free_shifts: Vec<Time>,
    /// Per shift, whether it belongs to `mci_free_shifts`.
    pub is_free: Vec<bool>,
    pub tie_band: f64,
}

fn check_pair(scenario: &Scenario) -> Result<(), DetectorError> {
    if scenario.cameras.len() != 2 {
        return Err(DetectorError::NeedTwoCameras(scenario.cameras.len()));
    }
    let (a, b) = (&scenario.cameras[0].config, &scenario.cameras[1].config);
    if a.frame_rate_exact()? != b.frame_rate_exact()? {
        return Err(DetectorError::RateMismatch);
    }
    Ok(())
}

/// Mean saturated count of camera 0 over `burst` frames, for camera 1
/// delayed by each of `shifts` relative to camera 0.
pub fn saturation_at_shifts(
    scenario: &Scenario,
    shifts: &[Time],
    burst: usize,
) -> Result<Vec<f64>, DetectorError> {
    check_pair(scenario)?;
    if burst == 0 {
        return Err(DetectorError::EmptyBurst);
    }
    let base = scenario.cameras[0].trigger_offset;
    let fp = scenario.cameras[0].config.frame_period()?;
    let mut trial = scenario.clone();
    trial.duration = base + fp * burst as i128;
    shifts
        .iter()
        .map(|&shift| {
            trial.cameras[1].trigger_offset = base + shift;
            let sim = Simulator::new(&trial)?;
            let total: usize = (0..burst as u64).map(|k| sim.frame(0, k).saturated_count).sum();
            Ok(total as f64 / burst as f64)
        })
        .collect()
}

/// Tries every shift of camera 1 on a `step` grid over one frame period.
pub fn sweep_shifts(scenario: &Scenario, params: &SweepParams) -> Result<ShiftSweepResult, DetectorError> {
    check_pair(scenario)?;
    let fp = scenario.cameras[0].config.frame_period()?;
    if params.step <= Time::ZERO || params.step > fp {
        return Err(DetectorError::InvalidStep);
    }
    let n = (fp - Time::from_fraction(1, 1_000_000_000_000)).div_floor(params.step) + 1;
    let shifts: Vec<Time> = (0..n).map(|i| params.step * i).filter(|&s| s < fp).collect();
    let counts = saturation_at_shifts(scenario, &shifts, params.burst_frames)?;
    let tie_band = params.tie_fraction * scenario.scene.pixel_count() as f64;
    let min = counts.iter().copied().fold(f64::INFINITY, f64::min);
    let max = counts.iter().copied().fold(0.0, f64::max);
    let is_free: Vec<bool> = counts.iter().map(|&c| c <= min + tie_band).collect();
    let normalized_counts = counts.iter().map(|&c| if max > 0.0 { c / max } else { 0.0 }).collect();
    let mci_free_shifts = shifts.iter().zip(&is_free).filter(|(_, &f)| f).map(|(&s, _)| s).collect();
    Ok(ShiftSweepResult {
        shifts,
        saturated_counts: counts,
        normalized_counts,
        mci_free_shifts,
        is_free,
        tie_band,
    })
}

/// Shift intervals, within one quad period `[0, P)`, that give two cameras
/// with this config zero integration overlap. Intervals are closed and
/// repeat with period `P`.
pub fn predict_free_shifts(
    config: &CameraConfig,
    n_cameras: usize,
) -> Result<Vec<(Time, Time)>, TimingError> {
    let c = Cadence::of(config)?;
    let p = c.quad_period;
    if n_cameras <= 1 {
        return Ok(alloc::vec![(Time::ZERO, p)]);
    }
    let len = c.integration_len;
    if len.is_zero() {
        return Ok(alloc::vec![(Time::ZERO, p)]);
    }
    let bound = (p.ratio_to(len)).floor().to_integer();
    if n_cameras as i128 > bound {
        return Ok(Vec::new());
    }
    Ok(alloc::vec![(len, p - len)])
}

/// Whether delaying an identical camera by `shift` avoids all overlap.
pub fn is_predicted_free(config: &CameraConfig, shift: Time) -> Result<bool, TimingError> {
    let c = Cadence::of(config)?;
    let r = shift.rem_euclid(c.quad_period);
    Ok(predict_free_shifts(config, 2)?.iter().any(|&(lo, hi)| lo <= r && r <= hi))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftComparison {
    pub exact: bool,
    /// Every disagreement lies within the tolerance of a predicted edge.
    pub within_tolerance: bool,
    /// Indices into the compared shifts where detection and prediction differ.
    pub mismatches: Vec<usize>,
}

/// Distance from `shift` to the boundary of the predicted free set, taken
/// modulo the quad period. A full period when there is no free shift.
fn distance_to_edge(free: &[(Time, Time)], period: Time, shift: Time) -> Time {
    let r = shift.rem_euclid(period);
    free.iter()
        .flat_map(|&(lo, hi)| [lo, hi])
        .flat_map(|edge| {
            let d = (r - edge).abs();
            [d, period - d]
        })
        .min()
        .unwrap_or(period)
}

/// Compares a detected free-shift mask against [`predict_free_shifts`].
/// A disagreement is tolerated when the shift lies within `tolerance` of a
/// predicted plateau edge.
pub fn compare_with_prediction(
    config: &CameraConfig,
    shifts: &[Time],
    detected: &[bool],
    tolerance: Time,
) -> Result<ShiftComparison, TimingError> {
    assert_eq!(shifts.len(), detected.len());
    let period = Cadence::of(config)?.quad_period;
    let free = predict_free_shifts(config, 2)?;
    let mut mismatches = Vec::new();
    let mut within_tolerance = true;
    for (i, (&shift, &found)) in shifts.iter().zip(detected).enumerate() {
        if found != is_predicted_free(config, shift)? {
            mismatches.push(i);
            within_tolerance &= distance_to_edge(&free, period, shift) <= tolerance;
        }
    }
    Ok(ShiftComparison { exact: mismatches.is_empty(), within_tolerance, mismatches })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameLabel {
    pub frame_index: u64,
    pub timestamp: Time,
    pub paired_index: u64,
    pub paired_timestamp: Time,
    /// Overlap implied by the two timestamps and the known cadences.
    pub overlap: Time,
    pub is_free: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicityReport {
    pub labels: Vec<FrameLabel>,
    /// Smallest period of the overlap sequence, if it repeats at least twice.
    pub period: Option<usize>,
}

impl PeriodicityReport {
    pub fn free_frames(&self) -> Vec<u64> {
        self.labels.iter().filter(|l| l.is_free).map(|l| l.frame_index).collect()
    }
}

/// Labels frames of `stream_a` using only timestamps and the cadences: each
/// frame is paired with the `stream_b` frame starting nearest to it, camera
/// b's windows are extrapolated from that timestamp, and the frame is free
/// iff no window overlaps.
pub fn periodicity_analysis(
    stream_a: &[SimFrame],
    stream_b: &[SimFrame],
    config_a: &CameraConfig,
    config_b: &CameraConfig,
) -> Result<PeriodicityReport, DetectorError> {
    if stream_b.is_empty() {
        return Err(DetectorError::EmptyStream);
    }
    let ca = Cadence::of(config_a)?;
    let cb = Cadence::of(config_b)?;
    let labels: Vec<FrameLabel> = stream_a
        .iter()
        .map(|fa| {
            let t = fa.timestamp;
            let idx = stream_b.partition_point(|fb| fb.timestamp < t);
            let pick = [idx.checked_sub(1), Some(idx)]
                .into_iter()
                .flatten()
                .filter(|&i| i < stream_b.len())
                .min_by_key(|&i| (stream_b[i].timestamp - t).abs())
                .expect("stream_b is non-empty");
            let fb = &stream_b[pick];
            let end = t + ca.frame_period;
            let own = ca.intervals(t, t, end);
            let other = cb.intervals(fb.timestamp, t, end);
            let overlap = own.intersection_length(&other);
            FrameLabel {
                frame_index: fa.frame_index,
                timestamp: t,
                paired_index: fb.frame_index,
                paired_timestamp: fb.timestamp,
                overlap,
                is_free: overlap.is_zero(),
            }
        })
        .collect();
    let overlaps: Vec<Time> = labels.iter().map(|l| l.overlap).collect();
    Ok(PeriodicityReport { period: detect_period(&overlaps), labels })
}

/// Smallest `p` with `seq[i] == seq[i + p]` everywhere, if `seq` holds at
/// least two full periods.
pub fn detect_period<T: PartialEq>(seq: &[T]) -> Option<usize> {
    (1..=seq.len() / 2).find(|&p| (0..seq.len() - p).all(|i| seq[i] == seq[i + p]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionResult {
    /// Frame indices, ascending.
    pub inlier_frames: Vec<u64>,
    pub fitted_level: f64,
    pub iterations: usize,
}

/// 2% of the pixel count.
pub fn default_tolerance(pixel_count: usize) -> f64 {
    0.02 * pixel_count as f64
}

pub fn extract_mci_free(
    stream: &[SimFrame],
    seed_count: usize,
    tolerance: f64,
) -> Result<ExtractionResult, DetectorError> {
    let counts: Vec<(u64, usize)> = stream.iter().map(|f| (f.frame_index, f.saturated_count)).collect();
    extract_from_counts(&counts, seed_count, tolerance)
}

/// Fits a horizontal line through the `seed_count` lowest counts and grows
/// the inlier set until no frame within `tolerance` of the level is left.
pub fn extract_from_counts(
    counts: &[(u64, usize)],
    seed_count: usize,
    tolerance: f64,
) -> Result<ExtractionResult, DetectorError> {
    let needed = seed_count.max(3);
    if counts.len() < needed {
        return Err(DetectorError::InsufficientFrames { needed, got: counts.len() });
    }
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by_key(|&i| (counts[i].1, counts[i].0));
    let mut inlier = alloc::vec![false; counts.len()];
    for &i in &order[..seed_count] {
        inlier[i] = true;
    }
    let mut iterations = 0;
    let level = loop {
        iterations += 1;
        let (sum, n) = counts
            .iter()
            .zip(&inlier)
            .filter(|(_, &keep)| keep)
            .fold((0usize, 0usize), |(s, n), (c, _)| (s + c.1, n + 1));
        let level = sum as f64 / n as f64;
        let mut grew = false;
        for (i, c) in counts.iter().enumerate() {
            if !inlier[i] && (c.1 as f64 - level).abs() <= tolerance {
                inlier[i] = true;
                grew = true;
            }
        }
        if !grew {
            break level;
        }
    };
    let mut inlier_frames: Vec<u64> =
        counts.iter().zip(&inlier).filter(|(_, &k)| k).map(|(c, _)| c.0).collect();
    inlier_frames.sort_unstable();
    Ok(ExtractionResult { inlier_frames, fitted_level: level, iterations })
}

/// Mean temporal standard deviation of depth over pixels valid in every
/// frame, relative to `ambiguity_range`.
pub fn flicker_metric(frames: &[&SimFrame], ambiguity_range: f64) -> Result<f64, DetectorError> {
    if frames.len() < 2 {
        return Err(DetectorError::InsufficientFrames { needed: 2, got: frames.len() });
    }
    let n_px = frames[0].depth.len();
    if frames.iter().any(|f| f.depth.len() != n_px || f.rows != frames[0].rows) {
        return Err(DetectorError::DimensionMismatch);
    }
    let n = frames.len() as f64;
    let mut total = 0.0;
    let mut valid = 0usize;
    for p in 0..n_px {
        let Some(first) = frames[0].depth[p] else { continue };
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut complete = true;
        for f in frames {
            match f.depth[p] {
                Some(d) => {
                    let x = d - first;
                    sum += x;
                    sum_sq += x * x;
                }
                None => {
                    complete = false;
                    break;
                }
            }
        }
        if !complete {
            continue;
        }
        let mean = sum / n;
        let var = (sum_sq / n - mean * mean).max(0.0);
        total += crate::math::sqrt(var);
        valid += 1;
    }
    if valid == 0 {
        return Err(DetectorError::NoCommonValidPixels);
    }
    Ok(total / valid as f64 / ambiguity_range)
}
