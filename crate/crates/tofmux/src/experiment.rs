//! The four experiment pipelines. Each writes its CSV artifacts and a
//! `summary.txt` into the output directory.

use std::fmt::Write as _;
use std::path::Path;

use tofmux_core::detector::{self, SweepParams};
use tofmux_core::scheduler;
use tofmux_core::signal;
use tofmux_core::simulator::{self, BeatPeriod, CameraSetup, Scenario, SimFrame, Simulator};
use tofmux_core::timing::{derive_quad_timing, Cadence};
use tofmux_core::Time;

use crate::artifacts::{self, ScheduleRow};
use crate::scenario::{ExperimentKind, ScenarioFile};
use crate::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub kind: ExperimentKind,
    /// Whether the experiment's own success condition holds.
    pub valid: bool,
    /// Resolved scenario followed by the results, as written to `summary.txt`.
    pub summary: String,
}

/// Runs the experiment named in `file`, which must be `requested`.
pub fn run(file: &ScenarioFile, requested: ExperimentKind, out: &Path) -> Result<RunReport, Error> {
    let found = file.experiment.kind;
    if found != requested {
        return Err(Error::WrongExperiment { found, requested });
    }
    let resolved = file.resolved()?;
    let scenario = resolved.to_scenario()?;
    std::fs::create_dir_all(out).map_err(|source| Error::Io { path: out.to_path_buf(), source })?;

    let mut text = String::new();
    writeln!(text, "# resolved scenario").unwrap();
    text.push_str(&resolved.to_toml());
    writeln!(text, "\n# {found} results").unwrap();
    let valid = match found {
        ExperimentKind::Schedule => run_schedule(&resolved, &scenario, out, &mut text)?,
        ExperimentKind::Sweep => run_sweep(&resolved, &scenario, out, &mut text)?,
        ExperimentKind::Periodicity => run_periodicity(&resolved, &scenario, out, &mut text)?,
        ExperimentKind::Extract => run_extract(&resolved, &scenario, out, &mut text)?,
    };
    writeln!(text, "valid: {}", if valid { "yes" } else { "no" }).unwrap();

    let path = out.join("summary.txt");
    std::fs::write(&path, &text).map_err(|source| Error::Io { path, source })?;
    Ok(RunReport { kind: found, valid, summary: text })
}

fn us(t: Time) -> i64 {
    t.to_micros_rounded()
}

fn cycles(t: Time, clock_hz: u64) -> i64 {
    (t.as_ratio() * clock_hz as i128).round().to_integer() as i64
}

fn maybe_depth(file: &ScenarioFile, stream: &[SimFrame], out: &Path) -> Result<(), Error> {
    if file.experiment.depth_csv {
        artifacts::render_depth_csv(stream, &out.join("depth.csv"))?;
    }
    Ok(())
}

fn need_cameras(scenario: &Scenario, n: usize) -> Result<(), Error> {
    if scenario.cameras.len() < n {
        return Err(Error::Invalid(format!(
            "this experiment needs {n} cameras, the scenario has {}",
            scenario.cameras.len()
        )));
    }
    Ok(())
}

fn run_schedule(
    file: &ScenarioFile,
    scenario: &Scenario,
    out: &Path,
    text: &mut String,
) -> Result<bool, Error> {
    let config = scenario.cameras[0].config;
    if scenario.cameras.iter().any(|c| c.config != config) {
        return Err(Error::Invalid("scheduling needs identical camera configurations".into()));
    }
    let t = derive_quad_timing(&config)?;
    let bound = scheduler::max_cameras(&t)?;
    writeln!(
        text,
        "quad timing (cycles): t_qt={} t_rs={} t_qin={} t_rd={} t_qd={}",
        t.t_qt, t.t_rs, t.t_qin, t.t_rd, t.t_qd
    )
    .unwrap();
    writeln!(text, "max cameras without overlap: {bound}").unwrap();

    let n = file.experiment.n_cameras.unwrap_or(scenario.cameras.len());
    let schedule = scheduler::assign_shifts(&config, n)?;
    let window = (Time::ZERO, scenario.duration);
    let report = scheduler::verify_schedule(&schedule, window)?;

    let rows: Vec<ScheduleRow> = schedule
        .offsets
        .iter()
        .enumerate()
        .map(|(camera_id, &o)| ScheduleRow {
            camera_id,
            offset_cycles: cycles(o, config.sys_clock_freq),
            offset_us: us(o),
        })
        .collect();
    for r in &rows {
        writeln!(text, "camera {}: offset {} cycles ({} us)", r.camera_id, r.offset_cycles, r.offset_us)
            .unwrap();
    }
    for p in &report.pairs {
        writeln!(text, "overlap cameras {}-{}: {} us", p.a, p.b, us(p.overlap)).unwrap();
    }
    artifacts::write_schedule_csv(&rows, &out.join("schedule.csv"))?;

    let mut check = scenario.clone();
    check.cameras = schedule.offsets.iter().map(|&o| CameraSetup::new(config, o)).collect();
    let streams = simulator::simulate_stream(&check)?;
    let frames: Vec<SimFrame> = streams.iter().flatten().cloned().collect();
    artifacts::write_metrics_csv(&frames, &out.join("metrics.csv"))?;
    maybe_depth(file, &streams[0], out)?;
    let worst = frames.iter().map(|f| f.overlap).max().unwrap_or(Time::ZERO);
    let (lo, hi) =
        frames.iter().map(|f| f.saturated_count).fold((usize::MAX, 0), |(lo, hi), c| (lo.min(c), hi.max(c)));
    writeln!(text, "verification: {} frames, worst frame overlap {} us", frames.len(), us(worst)).unwrap();
    if !frames.is_empty() {
        writeln!(text, "saturated pixels per frame: {lo}..={hi}").unwrap();
    }
    Ok(report.is_valid() && worst.is_zero())
}

/// Closed ranges of consecutive true entries, as (first, last) indices.
fn runs(flags: &[bool]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &f) in flags.iter().chain([&false]).enumerate() {
        match (f, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    out
}

fn run_sweep(file: &ScenarioFile, scenario: &Scenario, out: &Path, text: &mut String) -> Result<bool, Error> {
    let e = &file.experiment;
    let params = SweepParams {
        step: Time::from_micros(e.step_us),
        burst_frames: e.burst_frames,
        tie_fraction: e.tie_fraction,
    };
    let result = detector::sweep_shifts(scenario, &params)?;
    artifacts::write_sweep_csv(&result, &out.join("sweep.csv"))?;

    let config = scenario.cameras[0].config;
    let cad = Cadence::of(&config)?;
    writeln!(text, "shifts tried: {} at {} us steps", result.shifts.len(), e.step_us).unwrap();
    writeln!(text, "tie band: {:.2} saturated pixels", result.tie_band).unwrap();
    let plateaus: Vec<String> = runs(&result.is_free)
        .into_iter()
        .map(|(a, b)| format!("{}-{}", us(result.shifts[a]), us(result.shifts[b])))
        .collect();
    writeln!(text, "free plateaus (us): {}", plateaus.join(", ")).unwrap();
    let predicted: Vec<String> = detector::predict_free_shifts(&config, 2)?
        .into_iter()
        .flat_map(|(lo, hi)| {
            (0..cad.quads_per_frame as i128)
                .map(move |k| (lo + cad.quad_period * k, hi + cad.quad_period * k))
        })
        .map(|(lo, hi)| format!("{}-{}", us(lo), us(hi)))
        .collect();
    writeln!(text, "predicted free intervals (us): {}", predicted.join(", ")).unwrap();
    if !scenario.cameras[1].illumination {
        writeln!(text, "camera 1 emits no light: every shift is free").unwrap();
    }
    let cmp = detector::compare_with_prediction(&config, &result.shifts, &result.is_free, params.step)?;
    let verdict = if cmp.exact {
        "identical"
    } else if cmp.within_tolerance {
        "within one step of the interval edges"
    } else {
        "different"
    };
    writeln!(text, "detected vs predicted: {verdict} ({} mismatched shifts)", cmp.mismatches.len()).unwrap();
    Ok(!result.mci_free_shifts.is_empty())
}

fn run_periodicity(
    file: &ScenarioFile,
    scenario: &Scenario,
    out: &Path,
    text: &mut String,
) -> Result<bool, Error> {
    need_cameras(scenario, 2)?;
    let (ca, cb) = (scenario.cameras[0].config, scenario.cameras[1].config);
    let streams = simulator::simulate_stream(scenario)?;
    let report = detector::periodicity_analysis(&streams[0], &streams[1], &ca, &cb)?;
    artifacts::write_periodicity_csv(&report, &streams[0], &out.join("periodicity.csv"))?;
    maybe_depth(file, &streams[0], out)?;

    match simulator::beat_period(&ca, &cb, simulator::DEFAULT_BEAT_CAP)? {
        BeatPeriod::Frames(k) => writeln!(text, "beat period from frame rates: {k} frames").unwrap(),
        BeatPeriod::Aperiodic => writeln!(text, "beat period from frame rates: none within cap").unwrap(),
    }
    match report.period {
        Some(p) => writeln!(text, "period detected from timestamps: {p} frames").unwrap(),
        None => writeln!(text, "period detected from timestamps: none").unwrap(),
    }
    let free = report.free_frames();
    writeln!(text, "free frames: {} of {}", free.len(), report.labels.len()).unwrap();
    let truth: Vec<u64> = streams[0].iter().filter(|f| f.overlap.is_zero()).map(|f| f.frame_index).collect();
    writeln!(
        text,
        "timestamp labels vs simulated overlap: {}",
        if truth == free { "agree" } else { "disagree" }
    )
    .unwrap();
    if let Some(p) = report.period {
        writeln!(text, "first period (frame, overlap us, saturated pixels):").unwrap();
        for (l, f) in report.labels.iter().zip(&streams[0]).take(p) {
            writeln!(text, "  {} {} {}", l.frame_index, us(l.overlap), f.saturated_count).unwrap();
        }
    }
    Ok(report.period.is_some())
}

fn flicker_line(frames: &[&SimFrame], range: f64) -> String {
    match detector::flicker_metric(frames, range) {
        Ok(v) => format!("{v:.6e}"),
        Err(e) => format!("n/a ({e})"),
    }
}

fn run_extract(
    file: &ScenarioFile,
    scenario: &Scenario,
    out: &Path,
    text: &mut String,
) -> Result<bool, Error> {
    let sim = Simulator::new(scenario)?;
    let stream = sim.camera_stream(0);
    let tolerance = file
        .experiment
        .tolerance
        .unwrap_or_else(|| detector::default_tolerance(scenario.scene.pixel_count()));
    let result = detector::extract_mci_free(&stream, file.experiment.seed_count, tolerance)?;
    artifacts::write_extraction_csv(&result, &stream, &out.join("extraction.csv"))?;
    maybe_depth(file, &stream, out)?;

    writeln!(
        text,
        "inliers: {} of {} frames, level {:.2} saturated pixels, {} iterations",
        result.inlier_frames.len(),
        stream.len(),
        result.fitted_level,
        result.iterations
    )
    .unwrap();
    let list: Vec<String> = result.inlier_frames.iter().map(u64::to_string).collect();
    writeln!(text, "inlier frames: {}", list.join(" ")).unwrap();
    let truth: Vec<u64> = stream.iter().filter(|f| f.overlap.is_zero()).map(|f| f.frame_index).collect();
    writeln!(
        text,
        "inliers vs simulated free frames: {}",
        if truth == result.inlier_frames { "identical" } else { "different" }
    )
    .unwrap();
    let range = signal::ambiguity_range(scenario.cameras[0].config.mod_freq);
    let inliers: Vec<&SimFrame> =
        stream.iter().filter(|f| result.inlier_frames.binary_search(&f.frame_index).is_ok()).collect();
    let all: Vec<&SimFrame> = stream.iter().collect();
    writeln!(text, "flicker (inliers): {}", flicker_line(&inliers, range)).unwrap();
    writeln!(text, "flicker (all frames): {}", flicker_line(&all, range)).unwrap();
    Ok(!result.inlier_frames.is_empty())
}
