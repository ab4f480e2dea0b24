//! Synthetic static scene seen through a pinhole camera.

use alloc::vec::Vec;

use crate::math;

/// Frontal plane with a hemispherical bump at the optical axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneParams {
    /// Distance to the background plane, meters.
    pub plane_depth: f64,
    /// Radius of the bump centered on the plane, meters.
    pub bump_radius: f64,
    pub reflectivity: f64,
    pub cols: usize,
    pub rows: usize,
    /// Horizontal field of view, degrees.
    pub hfov_deg: f64,
}

impl Default for SceneParams {
    fn default() -> Self {
        SceneParams {
            plane_depth: 1.0,
            bump_radius: 0.15,
            reflectivity: 0.8,
            cols: 80,
            rows: 60,
            hfov_deg: 60.0,
        }
    }
}

/// Per-pixel range and reflectivity, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneModel {
    pub rows: usize,
    pub cols: usize,
    pub depth: Vec<f64>,
    pub reflectivity: Vec<f64>,
}

impl SceneModel {
    /// Ray-casts `params` through pixel centers. Depth is the radial range
    /// to the first hit.
    pub fn render(params: &SceneParams) -> SceneModel {
        let (rows, cols) = (params.rows, params.cols);
        let half_fov = params.hfov_deg.to_radians() / 2.0;
        let focal = (cols as f64 / 2.0) / math::tan(half_fov);
        let d = params.plane_depth;
        let r = params.bump_radius;
        let mut depth = Vec::with_capacity(rows * cols);
        for v in 0..rows {
            for u in 0..cols {
                let x = (u as f64 + 0.5 - cols as f64 / 2.0) / focal;
                let y = (v as f64 + 0.5 - rows as f64 / 2.0) / focal;
                let norm = math::sqrt(x * x + y * y + 1.0);
                let dz = 1.0 / norm;
                let mut range = d / dz;
                // Sphere centered at (0, 0, d): nearest root of |t·dir − c|² = r².
                let b = dz * d;
                let disc = b * b - (d * d - r * r);
                if disc >= 0.0 {
                    let t = b - math::sqrt(disc);
                    if t > 0.0 && t < range {
                        range = t;
                    }
                }
                depth.push(range);
            }
        }
        SceneModel { rows, cols, reflectivity: alloc::vec![params.reflectivity; depth.len()], depth }
    }

    pub fn uniform(rows: usize, cols: usize, depth: f64, reflectivity: f64) -> SceneModel {
        SceneModel {
            rows,
            cols,
            depth: alloc::vec![depth; rows * cols],
            reflectivity: alloc::vec![reflectivity; rows * cols],
        }
    }

    pub fn pixel_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn nearest_depth(&self) -> f64 {
        self.depth.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn farthest_depth(&self) -> f64 {
        self.depth.iter().copied().fold(0.0, f64::max)
    }
}
