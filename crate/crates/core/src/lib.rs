//! Quad-level timing, interference simulation and interference detection
//! for rigs of several continuous-wave time-of-flight cameras.
//!
//! A ToF frame is split into subframes and each subframe into quads. Every
//! quad runs reset, integration, readout and dead time back to back, and
//! only the integration window has the illumination switched on. Two
//! cameras interfere only when their integration windows overlap, so
//! cameras sharing a frame rate can be packed into each other's dead time
//! without lowering the frame rate.
//!
//! The crate is `no_std` (with `alloc`). Everything that touches files or
//! the command line lives in the `tofmux` companion crate.
//!
//! * [`timing`] derives the per-quad cycle budget and materializes
//!   integration windows on an absolute time axis.
//! * [`signal`] holds the correlation / four-bucket demodulation math and
//!   the saturation model.
//! * [`scheduler`] computes and verifies interference-free trigger shifts.
//! * [`simulator`] renders timestamped frame streams of a synthetic scene.
//! * [`detector`] works only from observable frame data: saturation
//!   counts, shift sweeps, timestamp periodicity and inlier extraction.
//!
//! All times are exact rationals ([`Time`]) so that touching windows
//! produce an overlap of exactly zero.
#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod detector;
pub mod interval;
mod math;
pub mod scene;
pub mod scheduler;
pub mod signal;
pub mod simulator;
pub mod time;
pub mod timing;

pub use interval::IntervalSet;
pub use time::{Rational, Time};
pub use timing::{CameraConfig, QuadTiming};
