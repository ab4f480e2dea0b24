//! Correlation, demodulation and saturation for a single pixel.
//!
//! The reflected light `R(t) = A_R·sin(2πf(t − τ)) + B_R` is correlated with
//! the demodulation signal `D(t) = A_D·sin(2πft) + B_D` over one period.
//! For sinusoids this has the closed form `C(ψ) = A_C·cos(ψ + φ) + B_C`
//! with `A_C = A_R·A_D·T/2`, `B_C = B_R·B_D·T` and `φ = 2πfτ`.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use thiserror::Error;

use crate::math;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SignalError {
    #[error("correlation samples carry no modulation; phase is undefined")]
    DegenerateSamples,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationParams {
    pub a_r: f64,
    pub b_r: f64,
    pub a_d: f64,
    pub b_d: f64,
    pub mod_freq: f64,
    /// Delay of the reflected signal, seconds.
    pub tau: f64,
}

impl ModulationParams {
    pub fn period(&self) -> f64 {
        1.0 / self.mod_freq
    }

    /// `φ = 2π·f·τ`, not wrapped.
    pub fn phase(&self) -> f64 {
        TAU * self.mod_freq * self.tau
    }

    pub fn amplitude(&self) -> f64 {
        self.a_r * self.a_d * self.period() / 2.0
    }

    pub fn offset(&self) -> f64 {
        self.b_r * self.b_d * self.period()
    }
}

/// Four correlation samples at ψ = 0°, 90°, 180°, 270°.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationSamples {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub a_c: Option<f64>,
    pub b_c: Option<f64>,
}

impl CorrelationSamples {
    pub fn new(c0: f64, c1: f64, c2: f64, c3: f64) -> Self {
        CorrelationSamples { c0, c1, c2, c3, a_c: None, b_c: None }
    }

    pub fn buckets(&self) -> [f64; 4] {
        [self.c0, self.c1, self.c2, self.c3]
    }

    /// Same samples with `dc` added to every bucket.
    pub fn with_offset(&self, dc: f64) -> Self {
        CorrelationSamples {
            c0: self.c0 + dc,
            c1: self.c1 + dc,
            c2: self.c2 + dc,
            c3: self.c3 + dc,
            a_c: self.a_c,
            b_c: self.b_c.map(|b| b + dc),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PixelState {
    pub accumulated: Vec<f64>,
    pub well_capacity: f64,
    pub saturated: bool,
}

/// Closed-form correlation value together with its amplitude and offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub value: f64,
    pub a_c: f64,
    pub b_c: f64,
}

/// Phase offset of bucket `index` out of `count` equally spaced samples.
pub fn bucket_phase(index: usize, count: usize) -> f64 {
    TAU * index as f64 / count as f64
}

/// Trapezoidal integral of `D(t + t_d)·R(t)` over one modulation period.
pub fn correlate_numeric(params: &ModulationParams, t_d: f64, steps: usize) -> f64 {
    assert!(steps >= 64, "correlate_numeric needs at least 64 steps");
    let period = params.period();
    let omega = TAU * params.mod_freq;
    let integrand = |t: f64| {
        let d = params.a_d * math::sin(omega * (t + t_d)) + params.b_d;
        let r = params.a_r * math::sin(omega * (t - params.tau)) + params.b_r;
        d * r
    };
    let h = period / steps as f64;
    let interior: f64 = (1..steps).map(|i| integrand(i as f64 * h)).sum();
    h * (interior + 0.5 * (integrand(0.0) + integrand(period)))
}

pub fn correlate_closed_form(params: &ModulationParams, psi: f64) -> Correlation {
    let a_c = params.amplitude();
    let b_c = params.offset();
    Correlation { value: a_c * math::cos(psi + params.phase()) + b_c, a_c, b_c }
}

/// Four-bucket phase estimate `atan2(c3 − c1, c0 − c2)`, wrapped to `[0, 2π)`.
pub fn estimate_phase(samples: &CorrelationSamples) -> Result<f64, SignalError> {
    let num = samples.c3 - samples.c1;
    let den = samples.c0 - samples.c2;
    if num == 0.0 && den == 0.0 {
        return Err(SignalError::DegenerateSamples);
    }
    Ok(wrap_phase(math::atan2(num, den)))
}

/// Phase from `n ≥ 3` equally spaced buckets. Four buckets go through
/// [`estimate_phase`]; other counts use the first DFT bin, which reduces to
/// the same formula at `n = 4`.
pub fn estimate_phase_n(buckets: &[f64]) -> Result<f64, SignalError> {
    if let [c0, c1, c2, c3] = *buckets {
        return estimate_phase(&CorrelationSamples::new(c0, c1, c2, c3));
    }
    let n = buckets.len();
    let (mut re, mut im, mut scale) = (0.0, 0.0, 0.0);
    for (q, &c) in buckets.iter().enumerate() {
        let psi = bucket_phase(q, n);
        re += c * math::cos(psi);
        im -= c * math::sin(psi);
        scale += c.abs();
    }
    // The bin of a flat input is only zero up to rounding of cos and sin.
    if re.abs() + im.abs() <= 1e-12 * scale || (re == 0.0 && im == 0.0) {
        return Err(SignalError::DegenerateSamples);
    }
    Ok(wrap_phase(math::atan2(im, re)))
}

fn wrap_phase(phi: f64) -> f64 {
    let wrapped = if phi < 0.0 { phi + TAU } else { phi };
    // atan2 can return exactly -0.0 or a value that rounds up to 2π.
    if wrapped >= TAU {
        0.0
    } else {
        wrapped + 0.0
    }
}

/// `d = c·φ / (4π·f)`.
pub fn phase_to_depth(phi: f64, mod_freq: f64) -> f64 {
    SPEED_OF_LIGHT * phi / (4.0 * PI * mod_freq)
}

/// Maximum unambiguous depth, `c / (2f)`.
pub fn ambiguity_range(mod_freq: f64) -> f64 {
    SPEED_OF_LIGHT / (2.0 * mod_freq)
}

/// Round-trip delay for a target at `depth` meters.
pub fn depth_to_tau(depth: f64) -> f64 {
    2.0 * depth / SPEED_OF_LIGHT
}

/// Contribution of an interfering illuminator to the bucket at phase `psi`
/// of a camera demodulating with `own`. Coherent sources (same modulation
/// frequency) add their full correlation; incoherent ones average their AC
/// part away and add only the DC term over the own period.
pub fn interference_term(
    own: &ModulationParams,
    interferer: &ModulationParams,
    psi: f64,
    coherent: bool,
) -> f64 {
    if coherent {
        correlate_closed_form(interferer, psi).value
    } else {
        interferer.b_r * own.b_d * own.period()
    }
}

pub fn superpose_interference(
    own: &ModulationParams,
    interferer: &ModulationParams,
    overlap_fraction: f64,
    coherent: bool,
) -> CorrelationSamples {
    debug_assert!((0.0..=1.0).contains(&overlap_fraction));
    let bucket = |q: usize| {
        let psi = bucket_phase(q, 4);
        let base = correlate_closed_form(own, psi).value;
        if overlap_fraction == 0.0 {
            base
        } else {
            base + overlap_fraction * interference_term(own, interferer, psi, coherent)
        }
    };
    CorrelationSamples::new(bucket(0), bucket(1), bucket(2), bucket(3))
}

/// True when any bucket reaches the well capacity (inclusive).
pub fn saturates(buckets: &[f64], well_capacity: f64) -> bool {
    buckets.iter().any(|&b| b >= well_capacity)
}

pub fn integrate_pixel(samples: &CorrelationSamples, well_capacity: f64) -> PixelState {
    assert!(well_capacity > 0.0, "well capacity must be positive");
    let accumulated = samples.buckets().to_vec();
    let saturated = saturates(&accumulated, well_capacity);
    PixelState { accumulated, well_capacity, saturated }
}
