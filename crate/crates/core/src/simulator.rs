//! Helmholtz-exact 2D fields and observation sampling.
//!
//! Two field families are available: superpositions of plane waves and
//! free-field point sources `u(r) = (j/4) H₀⁽¹⁾(k‖r − r_s‖)` placed outside
//! the grid domain.

use std::f64::consts::TAU;

use rand::seq::index;
use rand::Rng;

use crate::bessel::hankel1_0;
use crate::dataset::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::field::{ComplexField, ObservationSet};
use crate::grid::{Grid, WaveContext};
use crate::seed;

/// Minimum distance between a point source and the domain.
pub const SOURCE_CLEARANCE: f64 = 0.1;

/// Default annulus for point-source positions, in metres from the origin.
pub const DEFAULT_ANNULUS: (f64, f64) = (2.2, 4.0);

const KIND_POINT: f64 = 0.0;
const KIND_PLANE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    /// `Σ_w a_w e^{j k (r · d_w)}` with `d_w = (cos θ_w, sin θ_w)`.
    PlaneWaveMix { directions: Vec<f64>, amplitudes: Vec<(f64, f64)> },
    PointSource { position: (f64, f64) },
}

impl SourceSpec {
    pub fn value_at(&self, k: f64, x: f64, y: f64) -> (f64, f64) {
        match self {
            SourceSpec::PlaneWaveMix { directions, amplitudes } => {
                let mut re = 0.0;
                let mut im = 0.0;
                for (theta, (ar, ai)) in directions.iter().zip(amplitudes) {
                    let (s, c) = (k * (x * theta.cos() + y * theta.sin())).sin_cos();
                    re += ar * c - ai * s;
                    im += ar * s + ai * c;
                }
                (re, im)
            }
            SourceSpec::PointSource { position } => {
                let d = (x - position.0).hypot(y - position.1);
                let (j0, y0) = hankel1_0(k * d);
                // (j/4)(J0 + jY0)
                (-0.25 * y0, 0.25 * j0)
            }
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        match self {
            SourceSpec::PlaneWaveMix { directions, amplitudes } => {
                if directions.is_empty() || directions.len() != amplitudes.len() {
                    return Err(Error::InvalidArgument(
                        "plane-wave mix needs matching, non-empty directions and amplitudes".into(),
                    ));
                }
            }
            SourceSpec::PointSource { position: (x, y) } => {
                if !(grid.distance_to_domain(*x, *y) >= SOURCE_CLEARANCE) {
                    return Err(Error::SourceInsideDomain { x: *x, y: *y });
                }
            }
        }
        Ok(())
    }

    pub fn field(&self, grid: &Grid, ctx: &WaveContext) -> Result<ComplexField> {
        self.validate(grid)?;
        let k = ctx.wavenumber();
        ComplexField::from_fn(*grid, |x, y| self.value_at(k, x, y))
    }

    pub fn to_metadata(&self) -> Vec<f64> {
        match self {
            SourceSpec::PointSource { position } => vec![KIND_POINT, position.0, position.1],
            SourceSpec::PlaneWaveMix { directions, amplitudes } => {
                let mut m = vec![KIND_PLANE, directions.len() as f64];
                for (t, (a, b)) in directions.iter().zip(amplitudes) {
                    m.extend([*t, *a, *b]);
                }
                m
            }
        }
    }

    pub fn from_metadata(meta: &[f64]) -> Result<Self> {
        let bad = || Error::Malformed(format!("unrecognised source metadata {meta:?}"));
        match meta.first() {
            Some(&k) if k == KIND_POINT && meta.len() == 3 => {
                Ok(SourceSpec::PointSource { position: (meta[1], meta[2]) })
            }
            Some(&k) if k == KIND_PLANE && meta.len() >= 2 => {
                let n = meta[1] as usize;
                if meta.len() != 2 + 3 * n {
                    return Err(bad());
                }
                let mut directions = Vec::with_capacity(n);
                let mut amplitudes = Vec::with_capacity(n);
                for c in meta[2..].chunks_exact(3) {
                    directions.push(c[0]);
                    amplitudes.push((c[1], c[2]));
                }
                Ok(SourceSpec::PlaneWaveMix { directions, amplitudes })
            }
            _ => Err(bad()),
        }
    }
}

pub fn plane_wave_field(
    grid: &Grid,
    ctx: &WaveContext,
    directions: &[f64],
    amplitudes: &[(f64, f64)],
) -> Result<ComplexField> {
    SourceSpec::PlaneWaveMix { directions: directions.to_vec(), amplitudes: amplitudes.to_vec() }
        .field(grid, ctx)
}

pub fn point_source_field(grid: &Grid, ctx: &WaveContext, source: (f64, f64)) -> Result<ComplexField> {
    SourceSpec::PointSource { position: source }.field(grid, ctx)
}

/// Which random field family a dataset draws from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldFamily {
    /// One point source at a uniformly drawn radius and angle in the annulus,
    /// redrawn until it clears the domain.
    PointSource { inner: f64, outer: f64 },
    /// `n_waves` plane waves with uniform directions, magnitudes in
    /// `[0.5, 1]` and uniform phases.
    PlaneWaveMix { n_waves: usize },
}

impl Default for FieldFamily {
    fn default() -> Self {
        FieldFamily::PointSource { inner: DEFAULT_ANNULUS.0, outer: DEFAULT_ANNULUS.1 }
    }
}

impl FieldFamily {
    pub fn describe(&self) -> String {
        match self {
            FieldFamily::PointSource { inner, outer } => format!("point_source annulus={inner},{outer}"),
            FieldFamily::PlaneWaveMix { n_waves } => format!("plane_wave_mix waves={n_waves}"),
        }
    }

    pub fn draw<R: Rng>(&self, grid: &Grid, rng: &mut R) -> Result<SourceSpec> {
        match *self {
            FieldFamily::PointSource { inner, outer } => {
                if !(inner > 0.0 && outer > inner) {
                    return Err(Error::InvalidArgument(format!("bad annulus [{inner}, {outer}]")));
                }
                if grid.distance_to_domain(outer, 0.0).max(grid.distance_to_domain(0.0, outer))
                    < SOURCE_CLEARANCE
                {
                    return Err(Error::InvalidArgument(format!(
                        "annulus [{inner}, {outer}] never clears the domain"
                    )));
                }
                loop {
                    let r = rng.random_range(inner..outer);
                    let theta = rng.random_range(0.0..TAU);
                    let position = (r * theta.cos(), r * theta.sin());
                    if grid.distance_to_domain(position.0, position.1) >= SOURCE_CLEARANCE {
                        return Ok(SourceSpec::PointSource { position });
                    }
                }
            }
            FieldFamily::PlaneWaveMix { n_waves } => {
                if n_waves == 0 {
                    return Err(Error::InvalidArgument("plane-wave mix needs at least one wave".into()));
                }
                let mut directions = Vec::with_capacity(n_waves);
                let mut amplitudes = Vec::with_capacity(n_waves);
                for _ in 0..n_waves {
                    directions.push(rng.random_range(0.0..TAU));
                    let mag = rng.random_range(0.5..1.0);
                    let phase: f64 = rng.random_range(0.0..TAU);
                    amplitudes.push((mag * phase.cos(), mag * phase.sin()));
                }
                Ok(SourceSpec::PlaneWaveMix { directions, amplitudes })
            }
        }
    }
}

/// Draws `n_samples` fields; sample `i` uses its own seed derived from `(seed, i)`.
/// The first half is the training split, the second half the test split.
pub fn generate_dataset(
    grid: &Grid,
    ctx: &WaveContext,
    n_samples: usize,
    family: FieldFamily,
    seed: u64,
) -> Result<Dataset> {
    if n_samples == 0 || n_samples % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "sample count must be even and positive for the train/test split, got {n_samples}"
        )));
    }
    let samples = (0..n_samples)
        .map(|i| {
            let mut rng = seed::rng(seed, &[i as u64]);
            let source = family.draw(grid, &mut rng)?;
            Ok(Sample { metadata: source.to_metadata(), field: source.field(grid, ctx)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset { grid: *grid, ctx: *ctx, seed, generator: family.describe(), samples })
}

/// `m` distinct uniformly drawn nodes of `field`.
pub fn sample_observations_with<R: Rng>(field: &ComplexField, m: usize, rng: &mut R) -> Result<ObservationSet> {
    let grid = *field.grid();
    if m == 0 || m > grid.len() {
        return Err(Error::InvalidArgument(format!(
            "observation count must lie in 1..={}, got {m}",
            grid.len()
        )));
    }
    let picks = index::sample(rng, grid.len(), m);
    let indices = picks.iter().map(|n| (n / grid.cols(), n % grid.cols())).collect();
    ObservationSet::from_field(field, indices)
}

pub fn sample_observations(field: &ComplexField, m: usize, seed: u64) -> Result<ObservationSet> {
    sample_observations_with(field, m, &mut seed::rng(seed, &[]))
}

/// Divides by the largest real/imaginary magnitude so every entry lies in
/// `[-1, 1]`. Returns the scaled field and the factor; an all-zero field
/// comes back unchanged with factor 1.
pub fn standardize(field: &ComplexField) -> (ComplexField, f64) {
    let scale = field.max_abs();
    if scale == 0.0 {
        return (field.clone(), 1.0);
    }
    (field.scaled(1.0 / scale), scale)
}

pub fn standardize_observations(obs: &ObservationSet) -> (ObservationSet, f64) {
    let scale = obs.max_abs();
    if scale == 0.0 {
        return (obs.clone(), 1.0);
    }
    (obs.scaled(1.0 / scale), scale)
}

/// Multiplies the field by `e^{jφ}` with `φ ~ U[0, 2π)`. Returns the field and `φ`.
pub fn randomize_phase<R: Rng>(field: &ComplexField, rng: &mut R) -> (ComplexField, f64) {
    let phi = rng.random_range(0.0..TAU);
    (field.rotated(phi), phi)
}
