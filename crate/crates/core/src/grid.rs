//! Evaluation grid and wave parameters.
//!
//! The grid is an `I × J` lattice of points with uniform spacing `l`, centred
//! on the coordinate origin. Index `i` runs along `x`, index `j` along `y`;
//! planes are stored row-major in `(i, j)` order.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    rows: usize,
    cols: usize,
    spacing: f64,
}

impl Grid {
    pub fn new(rows: usize, cols: usize, spacing: f64) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2x2 points, got {rows}x{cols}"
            )));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {spacing}")));
        }
        Ok(Self { rows, cols, spacing })
    }

    /// Number of points along `x` (`I`).
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of points along `y` (`J`).
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Total number of evaluation points `N = I·J`.
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn n_patches(&self) -> usize {
        (self.rows - 1) * (self.cols - 1)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.cols + j
    }

    #[inline]
    pub fn patch_index(&self, i: usize, j: usize) -> usize {
        i * (self.cols - 1) + j
    }

    /// Coordinates of node `(0, 0)`.
    pub fn origin_offset(&self) -> (f64, f64) {
        (
            -0.5 * (self.rows - 1) as f64 * self.spacing,
            -0.5 * (self.cols - 1) as f64 * self.spacing,
        )
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.origin_offset().0 + i as f64 * self.spacing
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.origin_offset().1 + j as f64 * self.spacing
    }

    #[inline]
    pub fn position(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x(i), self.y(j))
    }

    /// All node positions in row-major `(i, j)` order.
    pub fn positions(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.push(self.position(i, j));
            }
        }
        out
    }

    /// Side lengths of the domain along `x` and `y`.
    pub fn extent(&self) -> (f64, f64) {
        (
            (self.rows - 1) as f64 * self.spacing,
            (self.cols - 1) as f64 * self.spacing,
        )
    }

    /// Area of the domain.
    pub fn area(&self) -> f64 {
        let (wx, wy) = self.extent();
        wx * wy
    }

    /// Euclidean distance from `(x, y)` to the closed domain rectangle; zero inside.
    pub fn distance_to_domain(&self, x: f64, y: f64) -> f64 {
        let (hx, hy) = (0.5 * self.extent().0, 0.5 * self.extent().1);
        let dx = (x.abs() - hx).max(0.0);
        let dy = (y.abs() - hy).max(0.0);
        dx.hypot(dy)
    }

    /// Whether `(x, y)` lies in the closed domain, allowing a small relative slack
    /// for points computed in floating point on the boundary.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (wx, wy) = self.extent();
        let slack = 1e-12 * wx.max(wy);
        x.abs() <= 0.5 * wx + slack && y.abs() <= 0.5 * wy + slack
    }

    /// Same geometry as `other`, up to relative tolerance on the spacing.
    pub fn matches(&self, other: &Grid) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && (self.spacing - other.spacing).abs() <= 1e-12 * self.spacing
    }
}

/// Frequency and propagation speed of a single-frequency field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveContext {
    frequency: f64,
    sound_speed: f64,
}

impl WaveContext {
    pub const DEFAULT_SOUND_SPEED: f64 = 340.0;

    pub fn new(frequency: f64, sound_speed: f64) -> Result<Self> {
        if !(frequency.is_finite() && frequency > 0.0) {
            return Err(Error::InvalidWave(format!("frequency must be positive, got {frequency}")));
        }
        if !(sound_speed.is_finite() && sound_speed > 0.0) {
            return Err(Error::InvalidWave(format!(
                "sound speed must be positive, got {sound_speed}"
            )));
        }
        Ok(Self { frequency, sound_speed })
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn sound_speed(&self) -> f64 {
        self.sound_speed
    }

    /// `k = 2πf / c`.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI * self.frequency / self.sound_speed
    }

    pub fn wavelength(&self) -> f64 {
        self.sound_speed / self.frequency
    }
}
