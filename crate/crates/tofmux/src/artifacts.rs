//! CSV artifacts. Times are integer microseconds, rounded to nearest.

use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tofmux_core::detector::{ExtractionResult, PeriodicityReport, ShiftSweepResult};
use tofmux_core::simulator::SimFrame;

use crate::Error;

pub const DEPTH_HEADER: [&str; 7] =
    ["camera_id", "frame_index", "timestamp_us", "row", "col", "depth_m", "saturated"];
pub const METRICS_HEADER: [&str; 5] =
    ["camera_id", "frame_index", "timestamp_us", "overlap_us", "saturated_count"];
pub const SCHEDULE_HEADER: [&str; 3] = ["camera_id", "offset_cycles", "offset_us"];
pub const SWEEP_HEADER: [&str; 4] = ["shift_us", "saturated_count", "normalized_count", "is_free"];
pub const PERIODICITY_HEADER: [&str; 7] = [
    "frame_index",
    "timestamp_us",
    "paired_frame_index",
    "paired_timestamp_us",
    "overlap_us",
    "saturated_count",
    "is_free",
];
pub const EXTRACTION_HEADER: [&str; 3] = ["frame_index", "saturated_count", "is_inlier"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DepthRow {
    camera_id: usize,
    frame_index: u64,
    timestamp_us: i64,
    row: usize,
    col: usize,
    depth_m: Option<f64>,
    saturated: bool,
}

#[derive(Debug, Serialize)]
struct MetricsRow {
    camera_id: usize,
    frame_index: u64,
    timestamp_us: i64,
    overlap_us: i64,
    saturated_count: usize,
}

#[derive(Debug, Serialize)]
pub struct ScheduleRow {
    pub camera_id: usize,
    pub offset_cycles: i64,
    pub offset_us: i64,
}

#[derive(Debug, Serialize)]
struct SweepRow {
    shift_us: i64,
    saturated_count: f64,
    normalized_count: f64,
    is_free: bool,
}

#[derive(Debug, Serialize)]
struct PeriodicityRow {
    frame_index: u64,
    timestamp_us: i64,
    paired_frame_index: u64,
    paired_timestamp_us: i64,
    overlap_us: i64,
    saturated_count: usize,
    is_free: bool,
}

#[derive(Debug, Serialize)]
struct ExtractionRow {
    frame_index: u64,
    saturated_count: usize,
    is_inlier: bool,
}

/// One frame as stored in a depth CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthRaster {
    pub camera_id: usize,
    pub frame_index: u64,
    pub timestamp_us: i64,
    pub rows: usize,
    pub cols: usize,
    /// Row-major, `None` where the pixel has no depth.
    pub depth: Vec<Option<f64>>,
    pub saturation: Vec<bool>,
}

impl From<&SimFrame> for DepthRaster {
    fn from(f: &SimFrame) -> Self {
        DepthRaster {
            camera_id: f.camera_id,
            frame_index: f.frame_index,
            timestamp_us: f.timestamp.to_micros_rounded(),
            rows: f.rows,
            cols: f.cols,
            depth: f.depth.clone(),
            saturation: f.saturation.clone(),
        }
    }
}

fn csv_error(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv { path: path.to_path_buf(), source }
}

fn write_csv<T: Serialize>(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = T>,
) -> Result<(), Error> {
    let file = File::create(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    w.write_record(header).map_err(csv_error(path))?;
    for row in rows {
        w.serialize(row).map_err(csv_error(path))?;
    }
    w.flush().map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// One line per pixel per frame, frames in the given order, pixels row-major.
pub fn render_depth_csv(frames: &[SimFrame], path: &Path) -> Result<(), Error> {
    let rows = frames.iter().flat_map(|f| {
        (0..f.rows * f.cols).map(move |i| DepthRow {
            camera_id: f.camera_id,
            frame_index: f.frame_index,
            timestamp_us: f.timestamp.to_micros_rounded(),
            row: i / f.cols,
            col: i % f.cols,
            depth_m: f.depth[i],
            saturated: f.saturation[i],
        })
    });
    write_csv(path, &DEPTH_HEADER, rows)
}

pub fn read_depth_csv(path: &Path) -> Result<Vec<DepthRaster>, Error> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_error(path))?;
    let headers = reader.headers().map_err(csv_error(path))?;
    if headers.iter().ne(DEPTH_HEADER) {
        return Err(Error::Invalid(format!("{}: unexpected header", path.display())));
    }
    let mut frames: Vec<(DepthRaster, Vec<(usize, usize)>)> = Vec::new();
    for row in reader.deserialize::<DepthRow>() {
        let row = row.map_err(csv_error(path))?;
        let same = frames
            .last()
            .is_some_and(|(f, _)| (f.camera_id, f.frame_index) == (row.camera_id, row.frame_index));
        if !same {
            frames.push((
                DepthRaster {
                    camera_id: row.camera_id,
                    frame_index: row.frame_index,
                    timestamp_us: row.timestamp_us,
                    rows: 0,
                    cols: 0,
                    depth: Vec::new(),
                    saturation: Vec::new(),
                },
                Vec::new(),
            ));
        }
        let (f, cells) = frames.last_mut().expect("pushed above");
        f.rows = f.rows.max(row.row + 1);
        f.cols = f.cols.max(row.col + 1);
        f.depth.push(row.depth_m);
        f.saturation.push(row.saturated);
        cells.push((row.row, row.col));
    }
    frames
        .into_iter()
        .map(|(f, cells)| {
            let row_major = cells.len() == f.rows * f.cols
                && cells.iter().enumerate().all(|(i, &rc)| rc == (i / f.cols, i % f.cols));
            if row_major {
                Ok(f)
            } else {
                Err(Error::Invalid(format!(
                    "{}: frame {} of camera {} is not a complete row-major raster",
                    path.display(),
                    f.frame_index,
                    f.camera_id
                )))
            }
        })
        .collect()
}

pub fn write_metrics_csv(frames: &[SimFrame], path: &Path) -> Result<(), Error> {
    let rows = frames.iter().map(|f| MetricsRow {
        camera_id: f.camera_id,
        frame_index: f.frame_index,
        timestamp_us: f.timestamp.to_micros_rounded(),
        overlap_us: f.overlap.to_micros_rounded(),
        saturated_count: f.saturated_count,
    });
    write_csv(path, &METRICS_HEADER, rows)
}

pub fn write_schedule_csv(rows: &[ScheduleRow], path: &Path) -> Result<(), Error> {
    write_csv(path, &SCHEDULE_HEADER, rows)
}

pub fn write_sweep_csv(result: &ShiftSweepResult, path: &Path) -> Result<(), Error> {
    let rows = (0..result.shifts.len()).map(|i| SweepRow {
        shift_us: result.shifts[i].to_micros_rounded(),
        saturated_count: result.saturated_counts[i],
        normalized_count: result.normalized_counts[i],
        is_free: result.is_free[i],
    });
    write_csv(path, &SWEEP_HEADER, rows)
}

/// `stream` supplies the saturated count of each labelled frame.
pub fn write_periodicity_csv(
    report: &PeriodicityReport,
    stream: &[SimFrame],
    path: &Path,
) -> Result<(), Error> {
    let rows = report.labels.iter().zip(stream).map(|(l, f)| PeriodicityRow {
        frame_index: l.frame_index,
        timestamp_us: l.timestamp.to_micros_rounded(),
        paired_frame_index: l.paired_index,
        paired_timestamp_us: l.paired_timestamp.to_micros_rounded(),
        overlap_us: l.overlap.to_micros_rounded(),
        saturated_count: f.saturated_count,
        is_free: l.is_free,
    });
    write_csv(path, &PERIODICITY_HEADER, rows)
}

pub fn write_extraction_csv(
    result: &ExtractionResult,
    stream: &[SimFrame],
    path: &Path,
) -> Result<(), Error> {
    let rows = stream.iter().map(|f| ExtractionRow {
        frame_index: f.frame_index,
        saturated_count: f.saturated_count,
        is_inlier: result.inlier_frames.binary_search(&f.frame_index).is_ok(),
    });
    write_csv(path, &EXTRACTION_HEADER, rows)
}
