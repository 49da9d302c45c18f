//! Gridded complex pressure fields, observation sets and estimator outputs.
//!
//! Complex values are kept as separate real and imaginary planes.

use crate::error::{Error, Result};
use crate::grid::Grid;

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::ShapeMismatch { expected, actual });
    }
    Ok(())
}

fn check_finite(plane: &[f64], what: &'static str) -> Result<()> {
    if plane.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Complex pressure sampled at every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl ComplexField {
    pub fn new(grid: Grid, re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        check_len(grid.len(), re.len())?;
        check_len(grid.len(), im.len())?;
        check_finite(&re, "field real plane")?;
        check_finite(&im, "field imaginary plane")?;
        Ok(Self { grid, re, im })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, re: vec![0.0; grid.len()], im: vec![0.0; grid.len()] }
    }

    /// Builds a field by evaluating `f(x, y) -> (re, im)` at every node.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64, f64) -> (f64, f64)) -> Result<Self> {
        let (mut re, mut im) = (Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len()));
        for (x, y) in grid.positions() {
            let (a, b) = f(x, y);
            re.push(a);
            im.push(b);
        }
        Self::new(grid, re, im)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn re(&self) -> &[f64] {
        &self.re
    }

    pub fn im(&self) -> &[f64] {
        &self.im
    }

    pub fn at(&self, i: usize, j: usize) -> (f64, f64) {
        let n = self.grid.index(i, j);
        (self.re[n], self.im[n])
    }

    pub fn into_parts(self) -> (Grid, Vec<f64>, Vec<f64>) {
        (self.grid, self.re, self.im)
    }

    /// Largest absolute value over both planes.
    pub fn max_abs(&self) -> f64 {
        self.re.iter().chain(&self.im).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `Σ |u|²` over all nodes.
    pub fn energy(&self) -> f64 {
        self.re.iter().zip(&self.im).map(|(a, b)| a * a + b * b).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            re: self.re.iter().map(|v| v * factor).collect(),
            im: self.im.iter().map(|v| v * factor).collect(),
        }
    }

    /// Multiplies every value by the unit phasor `e^{jφ}`.
    pub fn rotated(&self, phase: f64) -> Self {
        let (s, c) = phase.sin_cos();
        let mut re = Vec::with_capacity(self.re.len());
        let mut im = Vec::with_capacity(self.im.len());
        for (&a, &b) in self.re.iter().zip(&self.im) {
            re.push(a * c - b * s);
            im.push(a * s + b * c);
        }
        Self { grid: self.grid, re, im }
    }
}

/// `M` microphone readings taken at distinct grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    grid: Grid,
    indices: Vec<(usize, usize)>,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl ObservationSet {
    pub fn new(
        grid: Grid,
        indices: Vec<(usize, usize)>,
        re: Vec<f64>,
        im: Vec<f64>,
    ) -> Result<Self> {
        let m = indices.len();
        if m == 0 || m > grid.len() {
            return Err(Error::InvalidArgument(format!(
                "observation count must lie in 1..={}, got {m}",
                grid.len()
            )));
        }
        check_len(m, re.len())?;
        check_len(m, im.len())?;
        check_finite(&re, "observation real values")?;
        check_finite(&im, "observation imaginary values")?;
        let mut seen = vec![false; grid.len()];
        for &(i, j) in &indices {
            if i >= grid.rows() || j >= grid.cols() {
                return Err(Error::InvalidArgument(format!("observation index ({i}, {j}) off grid")));
            }
            let n = grid.index(i, j);
            if seen[n] {
                return Err(Error::InvalidArgument(format!("duplicate observation index ({i}, {j})")));
            }
            seen[n] = true;
        }
        Ok(Self { grid, indices, re, im })
    }

    /// Reads the field at the given nodes.
    pub fn from_field(field: &ComplexField, indices: Vec<(usize, usize)>) -> Result<Self> {
        let grid = *field.grid();
        let mut re = Vec::with_capacity(indices.len());
        let mut im = Vec::with_capacity(indices.len());
        for &(i, j) in &indices {
            if i >= grid.rows() || j >= grid.cols() {
                return Err(Error::InvalidArgument(format!("observation index ({i}, {j}) off grid")));
            }
            let (a, b) = field.at(i, j);
            re.push(a);
            im.push(b);
        }
        Self::new(grid, indices, re, im)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[(usize, usize)] {
        &self.indices
    }

    pub fn re(&self) -> &[f64] {
        &self.re
    }

    pub fn im(&self) -> &[f64] {
        &self.im
    }

    pub fn positions(&self) -> Vec<(f64, f64)> {
        self.indices.iter().map(|&(i, j)| self.grid.position(i, j)).collect()
    }

    /// 0/1 plane with ones at the observed nodes.
    pub fn mask(&self) -> Vec<f64> {
        let mut mask = vec![0.0; self.grid.len()];
        for &(i, j) in &self.indices {
            mask[self.grid.index(i, j)] = 1.0;
        }
        mask
    }

    /// Observed values scattered onto full planes, zero elsewhere.
    pub fn planes(&self) -> (Vec<f64>, Vec<f64>) {
        let mut re = vec![0.0; self.grid.len()];
        let mut im = vec![0.0; self.grid.len()];
        for (m, &(i, j)) in self.indices.iter().enumerate() {
            let n = self.grid.index(i, j);
            re[n] = self.re[m];
            im[n] = self.im[m];
        }
        (re, im)
    }

    pub fn max_abs(&self) -> f64 {
        self.re.iter().chain(&self.im).fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            indices: self.indices.clone(),
            re: self.re.iter().map(|v| v * factor).collect(),
            im: self.im.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Channels of the estimator output, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Re = 0,
    Im = 1,
    DxRe = 2,
    DxIm = 3,
    DyRe = 4,
    DyIm = 5,
    DxyRe = 6,
    DxyIm = 7,
}

impl Channel {
    pub const ALL: [Channel; 8] = [
        Channel::Re,
        Channel::Im,
        Channel::DxRe,
        Channel::DxIm,
        Channel::DyRe,
        Channel::DyIm,
        Channel::DxyRe,
        Channel::DxyIm,
    ];

    /// Whether node `(i, j)` belongs to the set on which this channel is meaningful.
    pub fn is_constrained(self, grid: &Grid, i: usize, j: usize) -> bool {
        let x_end = i == 0 || i == grid.rows() - 1;
        let y_end = j == 0 || j == grid.cols() - 1;
        match self {
            Channel::Re | Channel::Im => true,
            Channel::DxRe | Channel::DxIm => x_end,
            Channel::DyRe | Channel::DyIm => y_end,
            Channel::DxyRe | Channel::DxyIm => x_end && y_end,
        }
    }
}

/// Eight-channel estimator output: pressure and boundary derivatives, each as
/// real and imaginary planes. Derivative channels carry meaning only on their
/// boundary sets; other entries are stored but ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputTensor {
    grid: Grid,
    data: Vec<f64>,
}

impl OutputTensor {
    pub const CHANNELS: usize = 8;

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, data: vec![0.0; Self::CHANNELS * grid.len()] }
    }

    /// Wraps channel-major data (`8 × I × J`).
    pub fn from_vec(grid: Grid, data: Vec<f64>) -> Result<Self> {
        check_len(Self::CHANNELS * grid.len(), data.len())?;
        Ok(Self { grid, data })
    }

    /// Pressure planes from `field`, all derivative channels zero.
    pub fn from_field(field: &ComplexField) -> Self {
        let mut out = Self::zeros(*field.grid());
        out.channel_mut(Channel::Re).copy_from_slice(field.re());
        out.channel_mut(Channel::Im).copy_from_slice(field.im());
        out
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn channel(&self, c: Channel) -> &[f64] {
        let n = self.grid.len();
        &self.data[c as usize * n..(c as usize + 1) * n]
    }

    pub fn channel_mut(&mut self, c: Channel) -> &mut [f64] {
        let n = self.grid.len();
        &mut self.data[c as usize * n..(c as usize + 1) * n]
    }

    /// Pressure channels as a complex field.
    pub fn pressure(&self) -> Result<ComplexField> {
        ComplexField::new(
            self.grid,
            self.channel(Channel::Re).to_vec(),
            self.channel(Channel::Im).to_vec(),
        )
    }

    /// Copy with every derivative channel set to zero.
    pub fn without_derivatives(&self) -> Self {
        let mut out = self.clone();
        out.data[2 * self.grid.len()..].fill(0.0);
        out
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { grid: self.grid, data: self.data.iter().map(|v| v * factor).collect() }
    }

    /// Zeroes every entry that lies outside its channel's constraint set.
    pub fn mask_unconstrained(&mut self) {
        let grid = self.grid;
        for c in Channel::ALL {
            let plane = self.channel_mut(c);
            for i in 0..grid.rows() {
                for j in 0..grid.cols() {
                    if !c.is_constrained(&grid, i, j) {
                        plane[grid.index(i, j)] = 0.0;
                    }
                }
            }
        }
    }
}
