//! Model checkpoint file.
//!
//! Same container as the dataset file with magic `SFCKPT01`: a `key: value`
//! manifest (grid, wave, architecture, training settings) followed by the
//! flat float64 parameter block and its SHA-256.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::network::{format_architecture, parse_architecture, ModelParams};
use super::train::{TrainConfig, TrainedModel};
use crate::dataset::{grid_from_manifest, grid_to_manifest, push_f64s, read_header, write_header, Manifest};
use crate::error::{Error, Result};
use crate::grid::{Grid, WaveContext};

const MAGIC: &[u8; 8] = b"SFCKPT01";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams,
    pub grid: Grid,
    pub ctx: WaveContext,
    pub lambda: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub m_values: Vec<usize>,
}

impl Checkpoint {
    pub fn from_trained(model: &TrainedModel) -> Self {
        let TrainConfig { lambda, learning_rate, epochs, m_values, .. } = model.config.clone();
        Self { params: model.params.clone(), grid: model.grid, ctx: model.ctx, lambda, learning_rate, epochs, m_values }
    }

    pub fn manifest(&self) -> Manifest {
        let mut m = Manifest::default();
        grid_to_manifest(&mut m, &self.grid, &self.ctx);
        m.insert("layers", format_architecture(self.params.layers()));
        m.insert("seed", self.params.seed());
        m.insert("epoch", self.epochs);
        m.insert("lambda", self.lambda);
        m.insert("learning_rate", self.learning_rate);
        m.insert(
            "m_values",
            self.m_values.iter().map(ToString::to_string).collect::<Vec<_>>().join(","),
        );
        m.insert("n_params", self.params.len());
        m
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut payload = Vec::with_capacity(8 * self.params.len());
        push_f64s(&mut payload, self.params.values());
        let mut out = Vec::new();
        write_header(&mut out, MAGIC, &self.manifest());
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&payload);
        out.extend_from_slice(&Sha256::digest(&payload));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (m, mut cur) = read_header(bytes, MAGIC)?;
        let (grid, ctx) = grid_from_manifest(&m)?;
        let layers = parse_architecture(m.get("layers")?)?;
        let n: usize = m.parse_key("n_params")?;
        let len = cur.u64().ok_or_else(|| Error::Malformed("missing parameter block length".into()))? as usize;
        if len != 8 * n {
            return Err(Error::Malformed("parameter block length disagrees with n_params".into()));
        }
        let payload = cur.take(len).ok_or_else(|| Error::Malformed("truncated parameter block".into()))?;
        let digest = cur.take(32).ok_or_else(|| Error::Malformed("missing checksum".into()))?;
        if digest != Sha256::digest(payload).as_slice() {
            return Err(Error::Checksum);
        }
        let values = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        let m_values = m
            .get("m_values")?
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| Error::Malformed(format!("bad m_values entry '{s}'"))))
            .collect::<Result<Vec<usize>>>()?;
        Ok(Self {
            params: ModelParams::from_values(layers, values, m.parse_key("seed")?)?,
            grid,
            ctx,
            lambda: m.parse_key("lambda")?,
            learning_rate: m.parse_key("learning_rate")?,
            epochs: m.parse_key("epoch")?,
            m_values,
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }

    /// Errors unless grid and wave parameters agree with a dataset's.
    pub fn check_compatible(&self, grid: &Grid, ctx: &WaveContext) -> Result<()> {
        if !self.grid.matches(grid) {
            return Err(Error::Incompatible(format!(
                "checkpoint grid {}x{}@{} m differs from dataset grid {}x{}@{} m",
                self.grid.rows(),
                self.grid.cols(),
                self.grid.spacing(),
                grid.rows(),
                grid.cols(),
                grid.spacing()
            )));
        }
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        if !close(self.ctx.frequency(), ctx.frequency()) || !close(self.ctx.sound_speed(), ctx.sound_speed()) {
            return Err(Error::Incompatible(format!(
                "checkpoint is for {} Hz at {} m/s, dataset is {} Hz at {} m/s",
                self.ctx.frequency(),
                self.ctx.sound_speed(),
                ctx.frequency(),
                ctx.sound_speed()
            )));
        }
        Ok(())
    }
}
