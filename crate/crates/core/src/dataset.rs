//! Binary dataset file.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic          8 bytes   "SFDATA01"
//! manifest_len   u64
//! manifest       manifest_len bytes of UTF-8 "key: value" lines
//! payload_len    u64
//! payload        payload_len bytes, one record per sample:
//!                  meta_count u64, meta_count × f64, I·J × f64 re, I·J × f64 im
//! checksum       32 bytes, SHA-256 of the payload
//! ```
//!
//! Manifest keys: `rows`, `cols`, `spacing_m`, `frequency_hz`,
//! `sound_speed_mps`, `n_samples`, `seed`, `generator`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::{Grid, WaveContext};

const MAGIC: &[u8; 8] = b"SFDATA01";

/// One simulated field with generator metadata (source parameters).
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub metadata: Vec<f64>,
    pub field: ComplexField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub grid: Grid,
    pub ctx: WaveContext,
    pub seed: u64,
    pub generator: String,
    pub samples: Vec<Sample>,
}

/// Parsed `key: value` manifest block.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest(pub BTreeMap<String, String>);

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once(':')
                .ok_or_else(|| Error::Malformed(format!("manifest line without ':': {line}")))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn insert(&mut self, key: &str, value: impl ToString) {
        self.0.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Result<&str> {
        self.0
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Malformed(format!("manifest key '{key}' missing")))
    }

    pub fn parse_key<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.get(key)?;
        raw.parse()
            .map_err(|_| Error::Malformed(format!("manifest key '{key}' has bad value '{raw}'")))
    }

    pub fn render(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k}: {v}\n")).collect()
    }
}

/// Reads length-prefixed sections from a byte buffer.
pub(crate) struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub(crate) fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub(crate) fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        if self.remaining() < n {
            return None;
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Some(s)
    }

    pub(crate) fn u64(&mut self) -> Option<u64> {
        self.take(8).map(|b| u64::from_le_bytes(b.try_into().unwrap()))
    }

    pub(crate) fn f64s(&mut self, n: usize) -> Option<Vec<f64>> {
        let bytes = self.take(n.checked_mul(8)?)?;
        Some(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

pub(crate) fn push_f64s(out: &mut Vec<u8>, values: &[f64]) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

/// Reads magic and manifest; returns the cursor positioned after them.
pub(crate) fn read_header<'a>(bytes: &'a [u8], magic: &[u8; 8]) -> Result<(Manifest, Cursor<'a>)> {
    let mut cur = Cursor::new(bytes);
    if cur.take(8) != Some(&magic[..]) {
        return Err(Error::Malformed("bad magic".into()));
    }
    let len = cur.u64().ok_or_else(|| Error::Malformed("missing manifest length".into()))? as usize;
    let text = cur.take(len).ok_or_else(|| Error::Malformed("truncated manifest".into()))?;
    let text = std::str::from_utf8(text).map_err(|_| Error::Malformed("manifest is not UTF-8".into()))?;
    Ok((Manifest::parse(text)?, cur))
}

pub(crate) fn write_header(out: &mut Vec<u8>, magic: &[u8; 8], manifest: &Manifest) {
    let text = manifest.render();
    out.extend_from_slice(magic);
    out.extend_from_slice(&(text.len() as u64).to_le_bytes());
    out.extend_from_slice(text.as_bytes());
}

pub(crate) fn grid_from_manifest(m: &Manifest) -> Result<(Grid, WaveContext)> {
    let grid = Grid::new(m.parse_key("rows")?, m.parse_key("cols")?, m.parse_key("spacing_m")?)?;
    let ctx = WaveContext::new(m.parse_key("frequency_hz")?, m.parse_key("sound_speed_mps")?)?;
    Ok((grid, ctx))
}

pub(crate) fn grid_to_manifest(m: &mut Manifest, grid: &Grid, ctx: &WaveContext) {
    m.insert("rows", grid.rows());
    m.insert("cols", grid.cols());
    m.insert("spacing_m", grid.spacing());
    m.insert("frequency_hz", ctx.frequency());
    m.insert("sound_speed_mps", ctx.sound_speed());
}

impl Dataset {
    /// First half for training, second half for testing.
    pub fn split(&self) -> (&[Sample], &[Sample]) {
        self.samples.split_at(self.samples.len() / 2)
    }

    pub fn manifest(&self) -> Manifest {
        let mut m = Manifest::default();
        grid_to_manifest(&mut m, &self.grid, &self.ctx);
        m.insert("n_samples", self.samples.len());
        m.insert("seed", self.seed);
        m.insert("generator", &self.generator);
        m
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut payload = Vec::new();
        for s in &self.samples {
            payload.extend_from_slice(&(s.metadata.len() as u64).to_le_bytes());
            push_f64s(&mut payload, &s.metadata);
            push_f64s(&mut payload, s.field.re());
            push_f64s(&mut payload, s.field.im());
        }
        let mut out = Vec::with_capacity(payload.len() + 256);
        write_header(&mut out, MAGIC, &self.manifest());
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&payload);
        out.extend_from_slice(&Sha256::digest(&payload));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (manifest, mut cur) = read_header(bytes, MAGIC)?;
        let (grid, ctx) = grid_from_manifest(&manifest)?;
        let declared: usize = manifest.parse_key("n_samples")?;
        let seed: u64 = manifest.parse_key("seed")?;
        let generator = manifest.get("generator")?.to_string();
        let payload_len =
            cur.u64().ok_or_else(|| Error::Malformed("missing payload length".into()))? as usize;
        let available = cur.remaining().min(payload_len);
        let payload = cur.take(available).expect("bounded by remaining");

        let mut pc = Cursor::new(payload);
        let mut samples = Vec::with_capacity(declared);
        while pc.remaining() > 0 {
            let Some(meta_count) = pc.u64() else { break };
            let Some(metadata) = pc.f64s(meta_count as usize) else { break };
            let Some(re) = pc.f64s(grid.len()) else { break };
            let Some(im) = pc.f64s(grid.len()) else { break };
            samples.push(Sample { metadata, field: ComplexField::new(grid, re, im)? });
        }
        if samples.len() != declared {
            return Err(Error::CountMismatch { declared, found: samples.len() });
        }
        if pc.remaining() != 0 || available != payload_len {
            return Err(Error::Malformed("payload length does not match contents".into()));
        }
        let digest = cur.take(32).ok_or_else(|| Error::Malformed("missing checksum".into()))?;
        if digest != Sha256::digest(payload).as_slice() {
            return Err(Error::Checksum);
        }
        if cur.remaining() != 0 {
            return Err(Error::Malformed("trailing bytes after checksum".into()));
        }
        Ok(Self { grid, ctx, seed, generator, samples })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}
