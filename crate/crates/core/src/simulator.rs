//! Multi-camera frame streams over a static scene.
//!
//! Every camera free-runs from its trigger offset. For each own quad the
//! simulator measures how long each other camera's integration windows
//! overlap it and adds that fraction of the interferer's correlation to the
//! bucket read out in that quad.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_integer::Integer;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::scene::SceneModel;
use crate::signal::{self, ModulationParams};
use crate::time::Time;
use crate::timing::{Cadence, CameraConfig, TimingError};

pub const DEFAULT_BEAT_CAP: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    ScenarioInvalid(String),
    #[error(transparent)]
    Timing(#[from] TimingError),
}

fn invalid<T>(msg: &str) -> Result<T, SimError> {
    Err(SimError::ScenarioInvalid(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraSetup {
    pub config: CameraConfig,
    pub trigger_offset: Time,
    /// When false the camera still captures but emits no light.
    pub illumination: bool,
}

impl CameraSetup {
    pub fn new(config: CameraConfig, trigger_offset: Time) -> Self {
        CameraSetup { config, trigger_offset, illumination: true }
    }
}

/// Emitter and demodulation constants shared by all cameras.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radiometry {
    /// Received amplitude at 1 m for unit reflectivity.
    pub emitter_gain: f64,
    /// `A_R / B_R` of the received light.
    pub modulation_depth: f64,
    pub demod_amplitude: f64,
    pub demod_offset: f64,
    /// Scale of another camera's light relative to the own light.
    pub cross_gain: f64,
}

impl Default for Radiometry {
    fn default() -> Self {
        Radiometry {
            emitter_gain: 1.0,
            modulation_depth: 0.5,
            demod_amplitude: 1.0,
            demod_offset: 1.0,
            cross_gain: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub cameras: Vec<CameraSetup>,
    pub scene: SceneModel,
    pub duration: Time,
    pub seed: u64,
    /// `None` selects [`default_well_capacity`].
    pub well_capacity: Option<f64>,
    pub coherent: bool,
    pub radiometry: Radiometry,
}

impl Scenario {
    pub fn new(cameras: Vec<CameraSetup>, scene: SceneModel, duration: Time) -> Self {
        Scenario {
            cameras,
            scene,
            duration,
            seed: 0,
            well_capacity: None,
            coherent: true,
            radiometry: Radiometry::default(),
        }
    }

    pub fn resolved_well_capacity(&self) -> Result<f64, SimError> {
        match self.well_capacity {
            Some(c) => Ok(c),
            None => {
                if self.cameras.is_empty() {
                    return Err(no_cameras());
                }
                Ok(self
                    .cameras
                    .iter()
                    .map(|c| {
                        default_well_capacity(
                            &self.scene,
                            &self.radiometry,
                            c.config.mod_freq,
                            c.config.n_quads,
                        )
                    })
                    .fold(0.0, f64::max))
            }
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.cameras.is_empty() {
            return Err(no_cameras());
        }
        if self.duration <= Time::ZERO {
            return invalid("duration must be > 0");
        }
        let s = &self.scene;
        if s.pixel_count() == 0 || s.depth.len() != s.pixel_count() {
            return invalid("scene depth map does not match its dimensions");
        }
        if s.reflectivity.len() != s.pixel_count() {
            return invalid("scene reflectivity map does not match its dimensions");
        }
        if s.reflectivity.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
            return invalid("reflectivity must be in (0, 1]");
        }
        if s.depth.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
            return invalid("scene depth must be > 0");
        }
        for cam in &self.cameras {
            cam.config.validate()?;
            if s.farthest_depth() >= signal::ambiguity_range(cam.config.mod_freq) {
                return invalid("scene depth reaches the ambiguity range");
            }
        }
        let r = &self.radiometry;
        let positive = [r.emitter_gain, r.modulation_depth, r.demod_amplitude, r.demod_offset];
        if positive.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return invalid("radiometry gains must be > 0");
        }
        if !(r.cross_gain >= 0.0 && r.cross_gain.is_finite()) {
            return invalid("cross_gain must be >= 0");
        }
        if let Some(c) = self.well_capacity {
            if !(c > 0.0 && c.is_finite()) {
                return invalid("well_capacity must be > 0");
            }
        }
        Ok(())
    }
}

fn no_cameras() -> SimError {
    SimError::ScenarioInvalid("scenario needs at least one camera".into())
}

/// Largest bucket the own signal produces anywhere in the scene, so the
/// brightest pixel sits exactly at the limit without interference.
pub fn default_well_capacity(
    scene: &SceneModel,
    radiometry: &Radiometry,
    mod_freq: f64,
    n_quads: u32,
) -> f64 {
    let nq = n_quads as usize;
    (0..scene.pixel_count())
        .flat_map(|i| {
            let p = pixel_params(radiometry, scene.depth[i], scene.reflectivity[i], mod_freq, 0.0);
            (0..nq).map(move |q| signal::correlate_closed_form(&p, signal::bucket_phase(q, nq)).value)
        })
        .fold(0.0, f64::max)
}

fn pixel_params(
    radiometry: &Radiometry,
    depth: f64,
    reflectivity: f64,
    mod_freq: f64,
    extra_phase: f64,
) -> ModulationParams {
    let a_r = radiometry.emitter_gain * reflectivity / (depth * depth);
    ModulationParams {
        a_r,
        b_r: a_r / radiometry.modulation_depth,
        a_d: radiometry.demod_amplitude,
        b_d: radiometry.demod_offset,
        mod_freq,
        tau: signal::depth_to_tau(depth) + extra_phase / (TAU * mod_freq),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimFrame {
    pub camera_id: usize,
    pub frame_index: u64,
    /// Start of frame on the shared time axis.
    pub timestamp: Time,
    pub rows: usize,
    pub cols: usize,
    /// Row-major depth in meters; `None` marks a hole.
    pub depth: Vec<Option<f64>>,
    pub saturation: Vec<bool>,
    pub saturated_count: usize,
    /// Integration overlap with all interferers during this frame.
    pub overlap: Time,
    /// Same, split by quad.
    pub quad_overlap: Vec<Time>,
}

/// Absolute modulation phase of each camera's oscillator.
pub fn oscillator_phases(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) * TAU).collect()
}

/// Precomputed per-camera data shared by all its frames.
struct CameraModel {
    cadence: Cadence,
    /// `own[q][pixel]`, bucket value without interference.
    own: Vec<Vec<f64>>,
}

struct Interferer {
    id: usize,
    cadence: Cadence,
    offset: Time,
    /// `term[q][pixel]`, full-overlap contribution to bucket `q`.
    term: Vec<Vec<f64>>,
}

/// Reusable simulation state for one scenario.
pub struct Simulator<'a> {
    scenario: &'a Scenario,
    capacity: f64,
    models: Vec<CameraModel>,
    phases: Vec<f64>,
}

impl<'a> Simulator<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self, SimError> {
        scenario.validate()?;
        let capacity = scenario.resolved_well_capacity()?;
        let scene = &scenario.scene;
        let rad = &scenario.radiometry;
        let models = scenario
            .cameras
            .iter()
            .map(|cam| {
                let cadence = Cadence::of(&cam.config)?;
                let nq = cam.config.n_quads as usize;
                let own = (0..nq)
                    .map(|q| {
                        let psi = signal::bucket_phase(q, nq);
                        (0..scene.pixel_count())
                            .map(|i| {
                                let p = pixel_params(
                                    rad,
                                    scene.depth[i],
                                    scene.reflectivity[i],
                                    cam.config.mod_freq,
                                    0.0,
                                );
                                signal::correlate_closed_form(&p, psi).value
                            })
                            .collect()
                    })
                    .collect();
                Ok(CameraModel { cadence, own })
            })
            .collect::<Result<Vec<_>, SimError>>()?;
        let phases = oscillator_phases(scenario.seed, scenario.cameras.len());
        Ok(Simulator { scenario, capacity, models, phases })
    }

    pub fn well_capacity(&self) -> f64 {
        self.capacity
    }

    fn interferers(&self, observer: usize) -> Vec<Interferer> {
        let scene = &self.scenario.scene;
        let rad = &self.scenario.radiometry;
        let own_cfg = &self.scenario.cameras[observer].config;
        let nq = own_cfg.n_quads as usize;
        self.scenario
            .cameras
            .iter()
            .enumerate()
            .filter(|&(id, cam)| id != observer && cam.illumination)
            .map(|(id, cam)| {
                let coherent = self.scenario.coherent && cam.config.mod_freq == own_cfg.mod_freq;
                let mut rel = self.phases[id] - self.phases[observer];
                if rel < 0.0 {
                    rel += TAU;
                }
                let term = (0..nq)
                    .map(|q| {
                        let psi = signal::bucket_phase(q, nq);
                        (0..scene.pixel_count())
                            .map(|i| {
                                let own = pixel_params(
                                    rad,
                                    scene.depth[i],
                                    scene.reflectivity[i],
                                    own_cfg.mod_freq,
                                    0.0,
                                );
                                let mut other = pixel_params(
                                    rad,
                                    scene.depth[i],
                                    scene.reflectivity[i],
                                    cam.config.mod_freq,
                                    rel,
                                );
                                other.a_r *= rad.cross_gain;
                                other.b_r *= rad.cross_gain;
                                other.a_d = own.a_d;
                                other.b_d = own.b_d;
                                signal::interference_term(&own, &other, psi, coherent)
                            })
                            .collect()
                    })
                    .collect();
                Interferer { id, cadence: self.models[id].cadence, offset: cam.trigger_offset, term }
            })
            .collect()
    }

    /// Number of frames camera `id` starts before the scenario ends.
    pub fn frame_count(&self, id: usize) -> u64 {
        let cam = &self.scenario.cameras[id];
        let fp = self.models[id].cadence.frame_period;
        let span = self.scenario.duration - cam.trigger_offset;
        if span <= Time::ZERO {
            return 0;
        }
        // Frames k with offset + k·fp < duration.
        let r = span.ratio_to(fp);
        let (q, rem) = r.numer().div_mod_floor(r.denom());
        (if rem == 0 { q } else { q + 1 }) as u64
    }

    pub fn camera_stream(&self, id: usize) -> Vec<SimFrame> {
        let interferers = self.interferers(id);
        (0..self.frame_count(id)).map(|k| self.frame_with(id, k, &interferers)).collect()
    }

    pub fn frame(&self, id: usize, k: u64) -> SimFrame {
        self.frame_with(id, k, &self.interferers(id))
    }

    fn frame_with(&self, id: usize, k: u64, interferers: &[Interferer]) -> SimFrame {
        let cam = &self.scenario.cameras[id];
        let model = &self.models[id];
        let cadence = &model.cadence;
        let nq = cadence.n_quads as usize;
        let n_sub = (cadence.quads_per_frame as usize) / nq;
        let pixels = self.scenario.scene.pixel_count();
        let timestamp = cam.trigger_offset + cadence.frame_period * k as i128;

        let mut quad_overlap = Vec::with_capacity(cadence.quads_per_frame as usize);
        // fractions[j][i]: share of quad j's integration overlapped by interferer i.
        let mut fractions: Vec<Vec<f64>> = Vec::with_capacity(cadence.quads_per_frame as usize);
        for j in 0..cadence.quads_per_frame {
            let (s, e) = cadence.integration_window(timestamp, j);
            let mut total = Time::ZERO;
            let mut fr = Vec::with_capacity(interferers.len());
            for itf in interferers {
                let o =
                    if s < e { itf.cadence.intervals(itf.offset, s, e).total_length() } else { Time::ZERO };
                total += o;
                fr.push(if o.is_zero() { 0.0 } else { rational_f64(o.ratio_to(e - s)) });
            }
            quad_overlap.push(total);
            fractions.push(fr);
        }

        let mut depth = Vec::with_capacity(pixels);
        let mut saturation = Vec::with_capacity(pixels);
        let mut buckets = alloc::vec![0.0; nq];
        let mod_freq = cam.config.mod_freq;
        for p in 0..pixels {
            let mut saturated = false;
            buckets.iter_mut().for_each(|b| *b = 0.0);
            for (j, fr) in fractions.iter().enumerate() {
                let q = j % nq;
                let mut v = model.own[q][p];
                for (itf, &f) in interferers.iter().zip(fr) {
                    if f != 0.0 {
                        v += f * itf.term[q][p];
                    }
                }
                saturated |= v >= self.capacity;
                buckets[q] += v;
            }
            if n_sub > 1 {
                buckets.iter_mut().for_each(|b| *b /= n_sub as f64);
            }
            let d = if saturated {
                None
            } else {
                signal::estimate_phase_n(&buckets).ok().map(|phi| signal::phase_to_depth(phi, mod_freq))
            };
            depth.push(d);
            saturation.push(saturated);
        }
        let saturated_count = saturation.iter().filter(|&&s| s).count();
        SimFrame {
            camera_id: id,
            frame_index: k,
            timestamp,
            rows: self.scenario.scene.rows,
            cols: self.scenario.scene.cols,
            depth,
            saturation,
            saturated_count,
            overlap: quad_overlap.iter().copied().sum(),
            quad_overlap,
        }
    }

    /// Ids of the illuminating cameras other than `id`.
    pub fn interferer_ids(&self, id: usize) -> Vec<usize> {
        self.interferers(id).iter().map(|i| i.id).collect()
    }
}

fn rational_f64(r: crate::time::Rational) -> f64 {
    crate::time::ratio_to_f64(r)
}

/// All frames of every camera, indexed by camera.
pub fn simulate_stream(scenario: &Scenario) -> Result<Vec<Vec<SimFrame>>, SimError> {
    let sim = Simulator::new(scenario)?;
    Ok((0..scenario.cameras.len()).map(|id| sim.camera_stream(id)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeatPeriod {
    Frames(u64),
    Aperiodic,
}

/// Number of `observer` frames after which its position relative to the
/// interferer's quad grid repeats: the smallest `k` for which `k / f_a` is a
/// whole number of interferer quad periods.
pub fn beat_period(
    observer: &CameraConfig,
    interferer: &CameraConfig,
    cap: u64,
) -> Result<BeatPeriod, TimingError> {
    let fa = observer.frame_period()?;
    let pb = interferer.quad_period()?;
    let k = fa.ratio_to(pb).reduced();
    let period = *k.denom() as u64;
    Ok(if period <= cap { BeatPeriod::Frames(period) } else { BeatPeriod::Aperiodic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::SceneParams;

    fn small_scene() -> SceneModel {
        SceneModel::render(&SceneParams { cols: 16, rows: 12, ..SceneParams::default() })
    }

    fn cam(fps: f64, nq: u32, offset: Time) -> CameraSetup {
        let config = CameraConfig { frame_rate: fps, n_quads: nq, ..CameraConfig::default() };
        CameraSetup::new(config, offset)
    }

    #[test]
    fn single_camera_frames_are_identical() {
        let s =
            Scenario::new(alloc::vec![cam(30.0, 4, Time::ZERO)], small_scene(), Time::from_fraction(1, 6));
        let frames = simulate_stream(&s).unwrap().remove(0);
        assert_eq!(frames.len(), 5);
        for f in &frames {
            assert_eq!(f.overlap, Time::ZERO);
            assert_eq!(f.depth, frames[0].depth);
            assert_eq!(f.saturated_count, frames[0].saturated_count);
        }
        assert_eq!(frames[3].timestamp, Time::from_fraction(1, 10));
    }

    #[test]
    fn clean_depth_matches_scene() {
        let scene = small_scene();
        let s = Scenario {
            well_capacity: Some(1.0),
            ..Scenario::new(alloc::vec![cam(30.0, 4, Time::ZERO)], scene.clone(), Time::from_fraction(1, 30))
        };
        let f = &simulate_stream(&s).unwrap()[0][0];
        assert_eq!(f.saturated_count, 0);
        for (d, truth) in f.depth.iter().zip(&scene.depth) {
            assert!((d.unwrap() - truth).abs() < 1e-9);
        }
    }

    #[test]
    fn six_bucket_depth_matches_scene() {
        let scene = small_scene();
        let s = Scenario {
            well_capacity: Some(1.0),
            ..Scenario::new(alloc::vec![cam(30.0, 6, Time::ZERO)], scene.clone(), Time::from_fraction(1, 30))
        };
        let f = &simulate_stream(&s).unwrap()[0][0];
        for (d, truth) in f.depth.iter().zip(&scene.depth) {
            assert!((d.unwrap() - truth).abs() < 1e-9);
        }
    }

    #[test]
    fn too_deep_scene_is_rejected() {
        let s = Scenario::new(
            alloc::vec![cam(30.0, 4, Time::ZERO)],
            SceneModel::uniform(2, 2, 7.0, 0.5),
            Time::from_secs(1),
        );
        assert!(matches!(simulate_stream(&s), Err(SimError::ScenarioInvalid(_))));
    }

    #[test]
    fn beat_period_examples() {
        let c = |fps, nq| CameraConfig { frame_rate: fps, n_quads: nq, ..CameraConfig::default() };
        assert_eq!(beat_period(&c(30.0, 6), &c(28.0, 6), 100), Ok(BeatPeriod::Frames(5)));
        assert_eq!(beat_period(&c(28.0, 6), &c(30.0, 6), 100), Ok(BeatPeriod::Frames(7)));
        assert_eq!(beat_period(&c(30.0, 4), &c(30.0, 4), 100), Ok(BeatPeriod::Frames(1)));
        assert_eq!(beat_period(&c(30.0, 4), &c(29.0, 4), 100), Ok(BeatPeriod::Frames(15)));
        assert_eq!(beat_period(&c(30.0, 4), &c(29.97, 4), 100), Ok(BeatPeriod::Aperiodic));
    }

    #[test]
    fn oscillator_phases_are_seeded() {
        assert_eq!(oscillator_phases(7, 3), oscillator_phases(7, 3));
        assert_ne!(oscillator_phases(7, 3), oscillator_phases(8, 3));
        assert!(oscillator_phases(1, 10).iter().all(|&p| (0.0..TAU).contains(&p)));
    }
}
