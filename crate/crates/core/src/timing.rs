//! Quad-level decomposition of a ToF frame.
//!
//! A frame holds `n_subframes × n_quads` quads. Each quad runs
//! reset → integration → readout → dead time, all counted in system clock
//! cycles. The illumination is on during integration only.
//!
//! Cycle budgets are integers (floored), but quads are laid out on the
//! exact quad period `1 / (frame_rate · n_quads · n_subframes)`, so the
//! quads of a frame tile it completely and frames repeat at exactly
//! `1 / frame_rate`. The sub-cycle remainder lands in the dead time.

use num_rational::Ratio;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::interval::IntervalSet;
use crate::time::{decimal_ratio, Rational, Time};

/// Cycles spent resetting the sensor at the start of every quad.
pub const DEFAULT_RESET_CYCLES: u64 = 768;
pub const DEFAULT_SYS_CLOCK_HZ: u64 = 48_000_000;
pub const DEFAULT_MOD_FREQ_HZ: f64 = 24e6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimingError {
    #[error("invalid camera config: {0}")]
    InvalidConfig(&'static str),
    #[error(
        "infeasible timing: quad of {t_qt} cycles cannot hold reset {t_rs} + integration {t_qin} + readout {t_rd}"
    )]
    InfeasibleTiming { t_qt: u64, t_rs: u64, t_qin: u64, t_rd: u64 },
    #[error("empty or inverted time window")]
    EmptyWindow,
}

/// Static parameters of one camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraConfig {
    /// Frames per second.
    pub frame_rate: f64,
    pub n_subframes: u32,
    pub n_quads: u32,
    /// Fraction of each quad spent integrating, in (0, 1].
    pub intg_duty_cycle: f64,
    /// System clock in Hz; all cycle counts are in this clock.
    pub sys_clock_freq: u64,
    pub n_col_tot: u32,
    pub n_row: u32,
    pub reset_cycles: u64,
    /// Illumination modulation frequency in Hz.
    pub mod_freq: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        CameraConfig {
            frame_rate: 30.0,
            n_subframes: 1,
            n_quads: 4,
            intg_duty_cycle: 0.28,
            sys_clock_freq: DEFAULT_SYS_CLOCK_HZ,
            n_col_tot: 320,
            n_row: 240,
            reset_cycles: DEFAULT_RESET_CYCLES,
            mod_freq: DEFAULT_MOD_FREQ_HZ,
        }
    }
}

impl CameraConfig {
    pub fn validate(&self) -> Result<(), TimingError> {
        use TimingError::InvalidConfig;
        if !(self.frame_rate.is_finite() && self.frame_rate > 0.0) {
            return Err(InvalidConfig("frame_rate must be > 0"));
        }
        if !(self.mod_freq.is_finite() && self.mod_freq > 0.0) {
            return Err(InvalidConfig("mod_freq must be > 0"));
        }
        if self.sys_clock_freq == 0 {
            return Err(InvalidConfig("sys_clock_freq must be > 0"));
        }
        if !(self.intg_duty_cycle > 0.0 && self.intg_duty_cycle <= 1.0) {
            return Err(InvalidConfig("intg_duty_cycle must be in (0, 1]"));
        }
        if self.n_col_tot == 0 || self.n_row == 0 {
            return Err(InvalidConfig("sensor geometry must be non-empty"));
        }
        if self.n_quads < 3 {
            return Err(InvalidConfig("n_quads must be >= 3"));
        }
        if self.n_subframes == 0 {
            return Err(InvalidConfig("n_subframes must be >= 1"));
        }
        Ok(())
    }

    /// Frame rate as an exact rational (through its shortest decimal).
    pub fn frame_rate_exact(&self) -> Result<Rational, TimingError> {
        decimal_ratio(self.frame_rate)
            .filter(|r| *r > Ratio::from_integer(0))
            .ok_or(TimingError::InvalidConfig("frame_rate is not representable"))
    }

    fn duty_exact(&self) -> Result<Rational, TimingError> {
        decimal_ratio(self.intg_duty_cycle)
            .ok_or(TimingError::InvalidConfig("intg_duty_cycle is not representable"))
    }

    pub fn quads_per_frame(&self) -> u32 {
        self.n_quads * self.n_subframes
    }

    pub fn frame_period(&self) -> Result<Time, TimingError> {
        let rate = self.frame_rate_exact()?;
        Ok(Time::from_ratio(rate.recip()))
    }

    /// Exact spacing of consecutive quads, in seconds.
    pub fn quad_period(&self) -> Result<Time, TimingError> {
        Ok(self.frame_period()? / self.quads_per_frame() as i128)
    }
}

/// Cycle budget of one quad. `t_rs + t_qin + t_rd + t_qd == t_qt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadTiming {
    pub t_qt: u64,
    pub t_rs: u64,
    pub t_qin: u64,
    pub t_rd: u64,
    pub t_qd: u64,
}

/// Readout time in cycles: `401 + cols + ceil(rows · cols / 4)`.
pub fn readout_cycles(n_col_tot: u32, n_row: u32) -> Result<u64, TimingError> {
    if n_col_tot == 0 || n_row == 0 {
        return Err(TimingError::InvalidConfig("sensor geometry must be non-empty"));
    }
    let cols = n_col_tot as u64;
    let pixels = n_row as u64 * cols;
    Ok(401 + cols + pixels.div_ceil(4))
}

/// Whole cycles in one quad: `floor(sys_clock / (frame_rate · n_quads · n_subframes))`.
pub fn quad_total_cycles(config: &CameraConfig) -> Result<u64, TimingError> {
    config.validate()?;
    let rate = config.frame_rate_exact()?;
    let cycles =
        Ratio::from_integer(config.sys_clock_freq as i128) / (rate * config.quads_per_frame() as i128);
    cycles.floor().to_integer().to_u64().ok_or(TimingError::InvalidConfig("quad length out of range"))
}

pub fn derive_quad_timing(config: &CameraConfig) -> Result<QuadTiming, TimingError> {
    let t_qt = quad_total_cycles(config)?;
    let t_qin = (config.duty_exact()? * t_qt as i128)
        .floor()
        .to_integer()
        .to_u64()
        .ok_or(TimingError::InvalidConfig("integration length out of range"))?;
    let t_rd = readout_cycles(config.n_col_tot, config.n_row)?;
    let t_rs = config.reset_cycles;
    let used = t_rs as u128 + t_qin as u128 + t_rd as u128;
    if used > t_qt as u128 {
        return Err(TimingError::InfeasibleTiming { t_qt, t_rs, t_qin, t_rd });
    }
    Ok(QuadTiming { t_qt, t_rs, t_qin, t_rd, t_qd: t_qt - used as u64 })
}

/// Everything needed to lay a camera's quads on the time axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cadence {
    pub timing: QuadTiming,
    pub frame_period: Time,
    pub quad_period: Time,
    pub quads_per_frame: u32,
    pub n_quads: u32,
    /// Reset length; integration starts this long after the quad starts.
    pub integration_lead: Time,
    pub integration_len: Time,
}

impl Cadence {
    pub fn of(config: &CameraConfig) -> Result<Self, TimingError> {
        let timing = derive_quad_timing(config)?;
        let clock = config.sys_clock_freq;
        Ok(Cadence {
            timing,
            frame_period: config.frame_period()?,
            quad_period: config.quad_period()?,
            quads_per_frame: config.quads_per_frame(),
            n_quads: config.n_quads,
            integration_lead: Time::from_cycles(timing.t_rs as i128, clock),
            integration_len: Time::from_cycles(timing.t_qin as i128, clock),
        })
    }

    /// Integration window of quad `quad` in the frame starting at `frame_start`.
    pub fn integration_window(&self, frame_start: Time, quad: u32) -> (Time, Time) {
        let s = frame_start + self.quad_period * quad as i128 + self.integration_lead;
        (s, s + self.integration_len)
    }

    /// All integration windows of a free-running camera whose frames start
    /// at `offset + k / frame_rate` for every integer `k`, clipped to `[lo, hi)`.
    pub fn intervals(&self, offset: Time, lo: Time, hi: Time) -> IntervalSet {
        if lo >= hi {
            return IntervalSet::new();
        }
        let mut k = (lo - offset).div_floor(self.frame_period) - 1;
        let mut spans = alloc::vec::Vec::new();
        loop {
            let frame_start = offset + self.frame_period * k;
            if frame_start >= hi {
                break;
            }
            for q in 0..self.quads_per_frame {
                let (s, e) = self.integration_window(frame_start, q);
                let (s, e) = (s.max(lo), e.min(hi));
                if s < e {
                    spans.push((s, e));
                }
            }
            k += 1;
        }
        IntervalSet::from_spans(spans)
    }
}

/// Integration windows of a camera triggered at `trigger_offset`, clipped to
/// `window`. The camera is free-running: the offset fixes the phase of its
/// frame train, which also extends before the offset.
pub fn integration_intervals(
    config: &CameraConfig,
    trigger_offset: Time,
    window: (Time, Time),
) -> Result<IntervalSet, TimingError> {
    if window.0 >= window.1 {
        return Err(TimingError::EmptyWindow);
    }
    let cadence = Cadence::of(config)?;
    Ok(cadence.intervals(trigger_offset, window.0, window.1))
}
