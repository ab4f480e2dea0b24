//! Scenario files: one TOML document per experiment run.
//!
//! Every key carries its unit in the name and unknown keys are rejected.
//! Missing keys take the defaults shown by [`ScenarioFile::resolved`].

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tofmux_core::detector;
use tofmux_core::scene::{SceneModel, SceneParams};
use tofmux_core::simulator::{CameraSetup, Radiometry, Scenario};
use tofmux_core::timing::{DEFAULT_MOD_FREQ_HZ, DEFAULT_RESET_CYCLES, DEFAULT_SYS_CLOCK_HZ};
use tofmux_core::{CameraConfig, Time};

use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub cameras: Vec<CameraEntry>,
    #[serde(default)]
    pub scene: SceneEntry,
    #[serde(default)]
    pub sim: SimEntry,
    pub experiment: ExperimentEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraEntry {
    pub frame_rate_hz: f64,
    pub n_quads: u32,
    pub n_subframes: u32,
    pub intg_duty_cycle: f64,
    pub sys_clock_hz: u64,
    pub n_col_tot: u32,
    pub n_row: u32,
    pub reset_cycles: u64,
    pub mod_freq_hz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trigger_offset_us: Option<i64>,
    /// Exact alternative to `trigger_offset_us`, in system clock cycles.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trigger_offset_cycles: Option<i64>,
    pub illumination: bool,
}

impl Default for CameraEntry {
    fn default() -> Self {
        let c = CameraConfig::default();
        CameraEntry {
            frame_rate_hz: c.frame_rate,
            n_quads: c.n_quads,
            n_subframes: c.n_subframes,
            intg_duty_cycle: c.intg_duty_cycle,
            sys_clock_hz: DEFAULT_SYS_CLOCK_HZ,
            n_col_tot: c.n_col_tot,
            n_row: c.n_row,
            reset_cycles: DEFAULT_RESET_CYCLES,
            mod_freq_hz: DEFAULT_MOD_FREQ_HZ,
            trigger_offset_us: None,
            trigger_offset_cycles: None,
            illumination: true,
        }
    }
}

impl CameraEntry {
    pub fn config(&self) -> CameraConfig {
        CameraConfig {
            frame_rate: self.frame_rate_hz,
            n_subframes: self.n_subframes,
            n_quads: self.n_quads,
            intg_duty_cycle: self.intg_duty_cycle,
            sys_clock_freq: self.sys_clock_hz,
            n_col_tot: self.n_col_tot,
            n_row: self.n_row,
            reset_cycles: self.reset_cycles,
            mod_freq: self.mod_freq_hz,
        }
    }

    pub fn trigger_offset(&self) -> Result<Time, Error> {
        match (self.trigger_offset_us, self.trigger_offset_cycles) {
            (Some(_), Some(_)) => {
                Err(Error::Invalid("give trigger_offset_us or trigger_offset_cycles, not both".into()))
            }
            (Some(us), None) => Ok(Time::from_micros(us)),
            (None, Some(cycles)) => {
                if self.sys_clock_hz == 0 {
                    return Err(Error::Invalid("sys_clock_hz must be > 0".into()));
                }
                Ok(Time::from_cycles(cycles as i128, self.sys_clock_hz))
            }
            (None, None) => Ok(Time::ZERO),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneEntry {
    pub plane_depth_m: f64,
    pub bump_radius_m: f64,
    pub reflectivity: f64,
    pub cols: usize,
    pub rows: usize,
    pub hfov_deg: f64,
}

impl Default for SceneEntry {
    fn default() -> Self {
        let p = SceneParams::default();
        SceneEntry {
            plane_depth_m: p.plane_depth,
            bump_radius_m: p.bump_radius,
            reflectivity: p.reflectivity,
            cols: p.cols,
            rows: p.rows,
            hfov_deg: p.hfov_deg,
        }
    }
}

impl SceneEntry {
    fn params(&self) -> SceneParams {
        SceneParams {
            plane_depth: self.plane_depth_m,
            bump_radius: self.bump_radius_m,
            reflectivity: self.reflectivity,
            cols: self.cols,
            rows: self.rows,
            hfov_deg: self.hfov_deg,
        }
    }

    fn validate(&self) -> Result<(), Error> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.plane_depth_m) {
            return Err(Error::Invalid("scene.plane_depth_m must be > 0".into()));
        }
        if !(self.bump_radius_m.is_finite() && (0.0..self.plane_depth_m).contains(&self.bump_radius_m)) {
            return Err(Error::Invalid("scene.bump_radius_m must lie in [0, plane_depth_m)".into()));
        }
        if !positive(self.reflectivity) {
            return Err(Error::Invalid("scene.reflectivity must be > 0".into()));
        }
        if self.cols == 0 || self.rows == 0 {
            return Err(Error::Invalid("scene resolution must be non-zero".into()));
        }
        if !(positive(self.hfov_deg) && self.hfov_deg < 180.0) {
            return Err(Error::Invalid("scene.hfov_deg must lie in (0, 180)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimEntry {
    pub duration_s: f64,
    pub seed: u64,
    /// Bucket energy at which a pixel saturates; the largest lone-camera
    /// bucket in the scene when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub well_capacity: Option<f64>,
    pub coherent: bool,
    pub modulation_depth: f64,
    pub cross_gain: f64,
}

impl Default for SimEntry {
    fn default() -> Self {
        let r = Radiometry::default();
        SimEntry {
            duration_s: 1.0,
            seed: 0,
            well_capacity: None,
            coherent: true,
            modulation_depth: r.modulation_depth,
            cross_gain: r.cross_gain,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Schedule,
    Sweep,
    Periodicity,
    Extract,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::Schedule => "schedule",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::Periodicity => "periodicity",
            ExperimentKind::Extract => "extract",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentEntry {
    pub kind: ExperimentKind,
    /// Cameras to schedule; the number of `[[cameras]]` tables when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_cameras: Option<usize>,
    #[serde(default = "default_step_us")]
    pub step_us: i64,
    #[serde(default = "default_burst_frames")]
    pub burst_frames: usize,
    #[serde(default = "default_tie_fraction")]
    pub tie_fraction: f64,
    #[serde(default = "default_seed_count")]
    pub seed_count: usize,
    /// Inlier band in pixels; 2% of the pixel count when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Also write every frame of camera 0 to `depth.csv`.
    #[serde(default)]
    pub depth_csv: bool,
}

fn default_step_us() -> i64 {
    1000
}

fn default_burst_frames() -> usize {
    3
}

fn default_tie_fraction() -> f64 {
    0.01
}

fn default_seed_count() -> usize {
    3
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, Error> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text =
            std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        toml::from_str(&text).map_err(|source| Error::Toml { path: path.to_path_buf(), source })
    }

    /// Copy with every optional setting made explicit.
    pub fn resolved(&self) -> Result<ScenarioFile, Error> {
        let mut out = self.clone();
        for cam in &mut out.cameras {
            if cam.trigger_offset_us.is_none() && cam.trigger_offset_cycles.is_none() {
                cam.trigger_offset_us = Some(0);
            }
        }
        let scenario = self.to_scenario()?;
        out.sim.well_capacity = Some(scenario.resolved_well_capacity()?);
        out.experiment.n_cameras.get_or_insert(self.cameras.len());
        out.experiment.tolerance.get_or_insert(detector::default_tolerance(scenario.scene.pixel_count()));
        Ok(out)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn to_scenario(&self) -> Result<Scenario, Error> {
        if self.cameras.is_empty() {
            return Err(Error::Invalid("at least one [[cameras]] table is required".into()));
        }
        self.scene.validate()?;
        let cameras = self
            .cameras
            .iter()
            .map(|c| {
                Ok(CameraSetup {
                    illumination: c.illumination,
                    ..CameraSetup::new(c.config(), c.trigger_offset()?)
                })
            })
            .collect::<Result<Vec<_>, Error>>()?;
        let duration = Time::from_secs_f64(self.sim.duration_s)
            .filter(|d| *d > Time::ZERO)
            .ok_or_else(|| Error::Invalid("sim.duration_s must be a positive number".into()))?;
        let radiometry = Radiometry {
            modulation_depth: self.sim.modulation_depth,
            cross_gain: self.sim.cross_gain,
            ..Radiometry::default()
        };
        let scenario = Scenario {
            seed: self.sim.seed,
            well_capacity: self.sim.well_capacity,
            coherent: self.sim.coherent,
            radiometry,
            ..Scenario::new(cameras, SceneModel::render(&self.scene.params()), duration)
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[[cameras]]
frame_rate_hz = 30.0

[experiment]
kind = "schedule"
"#;

    #[test]
    fn defaults_fill_missing_keys() {
        let f = ScenarioFile::parse(MINIMAL).unwrap();
        assert_eq!(f.cameras[0].config(), CameraConfig::default());
        assert_eq!(f.scene, SceneEntry::default());
        assert_eq!(f.experiment.step_us, 1000);
        let s = f.to_scenario().unwrap();
        assert_eq!(s.duration, Time::from_secs(1));
        assert_eq!(s.scene.pixel_count(), 80 * 60);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = MINIMAL.replace("frame_rate_hz", "frame_rate");
        assert!(ScenarioFile::parse(&bad).is_err());
        let bad = format!("{MINIMAL}\n[scene]\ndepth = 2.0\n");
        assert!(ScenarioFile::parse(&bad).is_err());
        let bad = MINIMAL.replace("schedule", "calibrate");
        assert!(ScenarioFile::parse(&bad).is_err());
    }

    #[test]
    fn resolved_file_round_trips() {
        let f = ScenarioFile::parse(MINIMAL).unwrap().resolved().unwrap();
        assert_eq!(f.cameras[0].trigger_offset_us, Some(0));
        assert!(f.sim.well_capacity.unwrap() > 0.0);
        assert_eq!(f.experiment.n_cameras, Some(1));
        assert_eq!(f.experiment.tolerance, Some(96.0));
        let again = ScenarioFile::parse(&f.to_toml()).unwrap();
        assert_eq!(again, f);
    }

    #[test]
    fn offsets_in_cycles_are_exact() {
        let text = MINIMAL.replace("frame_rate_hz = 30.0", "trigger_offset_cycles = 134400");
        let f = ScenarioFile::parse(&text).unwrap();
        assert_eq!(f.cameras[0].trigger_offset().unwrap(), Time::from_fraction(134_400, 48_000_000));
        let both = text.replace("trigger_offset_cycles", "trigger_offset_us = 5\ntrigger_offset_cycles");
        assert!(ScenarioFile::parse(&both).unwrap().to_scenario().is_err());
    }

    #[test]
    fn invalid_values_are_reported() {
        let text = format!("{MINIMAL}\n[sim]\nduration_s = 0.0\n");
        assert!(ScenarioFile::parse(&text).unwrap().to_scenario().is_err());
        let text = format!("{MINIMAL}\n[scene]\nrows = 0\n");
        assert!(ScenarioFile::parse(&text).unwrap().to_scenario().is_err());
    }
}
