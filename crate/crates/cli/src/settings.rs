//! Settings resolution: command-line flags override a `key: value` config
//! file, which overrides the selected preset.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use soundfield::kernel::DEFAULT_REGULARIZATION;
use soundfield::model::{default_architecture_with_dilations, TrainConfig};
use soundfield::simulator::{FieldFamily, DEFAULT_ANNULUS};
use soundfield::{Grid, WaveContext};

/// Every recognised setting key.
pub const KEYS: &[&str] = &[
    "grid",
    "spacing",
    "freq",
    "sound-speed",
    "seed",
    "n",
    "family",
    "lambda",
    "lr",
    "epochs",
    "m",
    "dilations",
    "resample-observations",
    "phase-randomize",
    "reg",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Desk,
    Paper,
}

impl Preset {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "desk" => Ok(Preset::Desk),
            "paper" => Ok(Preset::Paper),
            other => bail!("unknown preset '{other}' (expected 'desk' or 'paper')"),
        }
    }

    pub fn values(self) -> BTreeMap<String, String> {
        let common = [
            ("freq", "300"),
            ("sound-speed", "340"),
            ("seed", "0"),
            ("family", "point"),
            ("dilations", "1,3,6,1"),
            ("resample-observations", "true"),
            ("phase-randomize", "true"),
        ];
        let lambda_desk = TrainConfig::DESK_LAMBDA.to_string();
        let lambda_paper = TrainConfig::PAPER_LAMBDA.to_string();
        let reg = DEFAULT_REGULARIZATION.to_string();
        let specific: Vec<(&str, &str)> = match self {
            Preset::Desk => vec![
                ("grid", "16"),
                ("spacing", "0.2"),
                ("n", "128"),
                ("lambda", &lambda_desk),
                ("lr", "0.001"),
                ("epochs", "500"),
                ("m", "5,10,15,20"),
                ("reg", &reg),
            ],
            Preset::Paper => vec![
                ("grid", "32"),
                ("spacing", "0.1"),
                ("n", "256"),
                ("lambda", &lambda_paper),
                ("lr", "0.01"),
                ("epochs", "5000"),
                ("m", "5,10,15,20"),
                ("reg", &reg),
            ],
        };
        common.into_iter().chain(specific).map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }
}

/// Parses `key: value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once(':')
            .ok_or_else(|| anyhow!("config line {}: expected 'key: value', got '{raw}'", n + 1))?;
        let key = k.trim().replace('_', "-");
        if key != "preset" && !KEYS.contains(&key.as_str()) {
            bail!("config line {}: unknown key '{}'", n + 1, k.trim());
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

/// Resolved settings plus the set of keys that were given explicitly (by a
/// flag or the config file) rather than taken from the preset.
#[derive(Debug, Clone)]
pub struct Settings {
    values: BTreeMap<String, String>,
    explicit: BTreeMap<String, String>,
}

impl Settings {
    pub fn resolve(
        preset_flag: Option<&str>,
        config_path: Option<&Path>,
        flags: BTreeMap<String, String>,
    ) -> Result<Self> {
        let config = match config_path {
            Some(p) => parse_config(
                &fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?,
            )?,
            None => BTreeMap::new(),
        };
        let preset = match (preset_flag, config.get("preset").map(String::as_str)) {
            (Some(p), _) | (None, Some(p)) => Preset::parse(p)?,
            (None, None) => Preset::Desk,
        };
        let mut explicit = config;
        explicit.remove("preset");
        explicit.extend(flags);
        let mut values = preset.values();
        values.extend(explicit.clone());
        Ok(Self { values, explicit })
    }

    fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or_default()
    }

    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.contains_key(key)
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.raw(key).trim().parse().map_err(|_| anyhow!("invalid value '{}' for {key}", self.raw(key)))
    }

    pub fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>> {
        self.raw(key)
            .split(',')
            .map(|v| v.trim().parse().map_err(|_| anyhow!("invalid entry '{v}' in {key}")))
            .collect()
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        match self.raw(key).trim() {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            v => bail!("invalid boolean '{v}' for {key}"),
        }
    }

    /// `N` for a square grid or `RxC`.
    pub fn grid(&self) -> Result<Grid> {
        let raw = self.raw("grid");
        let (r, c) = match raw.split_once(['x', 'X']) {
            Some((r, c)) => (r.trim().parse::<usize>(), c.trim().parse::<usize>()),
            None => (raw.trim().parse(), raw.trim().parse()),
        };
        let (r, c) = (r.map_err(|_| anyhow!("invalid grid '{raw}'"))?, c.map_err(|_| anyhow!("invalid grid '{raw}'"))?);
        Ok(Grid::new(r, c, self.get("spacing")?)?)
    }

    pub fn wave(&self) -> Result<WaveContext> {
        Ok(WaveContext::new(self.get("freq")?, self.get("sound-speed")?)?)
    }

    /// `point`, `point:INNER,OUTER`, `plane` or `plane:WAVES`.
    pub fn family(&self) -> Result<FieldFamily> {
        let raw = self.raw("family").trim();
        let (kind, arg) = raw.split_once(':').map_or((raw, None), |(k, a)| (k, Some(a)));
        match (kind, arg) {
            ("point", None) => Ok(FieldFamily::PointSource { inner: DEFAULT_ANNULUS.0, outer: DEFAULT_ANNULUS.1 }),
            ("point", Some(a)) => {
                let (i, o) = a.split_once(',').ok_or_else(|| anyhow!("expected point:INNER,OUTER"))?;
                Ok(FieldFamily::PointSource { inner: i.trim().parse()?, outer: o.trim().parse()? })
            }
            ("plane", None) => Ok(FieldFamily::PlaneWaveMix { n_waves: 3 }),
            ("plane", Some(a)) => Ok(FieldFamily::PlaneWaveMix { n_waves: a.trim().parse()? }),
            _ => bail!("unknown field family '{raw}' (expected point[:INNER,OUTER] or plane[:WAVES])"),
        }
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let d: Vec<usize> = self.list("dilations")?;
        let dilations: [usize; 4] =
            d.try_into().map_err(|_| anyhow!("dilations must list exactly four values"))?;
        let config = TrainConfig {
            lambda: self.get("lambda")?,
            learning_rate: self.get("lr")?,
            epochs: self.get("epochs")?,
            m_values: self.list("m")?,
            seed: self.get("seed")?,
            resample_observations_each_epoch: self.flag("resample-observations")?,
            phase_randomize: self.flag("phase-randomize")?,
            architecture: default_architecture_with_dilations(dilations),
        };
        config.validate()?;
        Ok(config)
    }

    /// Errors if an explicitly requested grid or wave setting disagrees with
    /// the one stored in an input file.
    pub fn check_against(&self, grid: &Grid, ctx: &WaveContext, what: &str) -> Result<()> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        if self.is_explicit("grid") || self.is_explicit("spacing") {
            let g = self.grid()?;
            if !g.matches(grid) {
                bail!(
                    "{what} grid {}x{}@{} m differs from requested {}x{}@{} m",
                    grid.rows(),
                    grid.cols(),
                    grid.spacing(),
                    g.rows(),
                    g.cols(),
                    g.spacing()
                );
            }
        }
        if self.is_explicit("freq") || self.is_explicit("sound-speed") {
            let w = self.wave()?;
            if !close(w.frequency(), ctx.frequency()) || !close(w.sound_speed(), ctx.sound_speed()) {
                bail!(
                    "{what} is for {} Hz at {} m/s, requested {} Hz at {} m/s",
                    ctx.frequency(),
                    ctx.sound_speed(),
                    w.frequency(),
                    w.sound_speed()
                );
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn precedence_is_flags_then_config_then_preset() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        fs::write(&cfg, "preset: paper\nepochs: 7 # short\nlr: 0.5\n").unwrap();
        let s = Settings::resolve(None, Some(&cfg), flags(&[("lr", "0.25")])).unwrap();
        assert_eq!(s.get::<usize>("epochs").unwrap(), 7);
        assert_eq!(s.get::<f64>("lr").unwrap(), 0.25);
        assert_eq!(s.grid().unwrap().rows(), 32);
        assert!(s.is_explicit("epochs") && !s.is_explicit("grid"));
        let s = Settings::resolve(Some("desk"), Some(&cfg), BTreeMap::new()).unwrap();
        assert_eq!(s.grid().unwrap().rows(), 16);
        assert_eq!(s.get::<usize>("epochs").unwrap(), 7);
    }

    #[test]
    fn config_rejects_unknown_keys_and_bad_lines() {
        assert!(parse_config("colour: blue").is_err());
        assert!(parse_config("epochs 5").is_err());
        assert_eq!(parse_config("sound_speed: 343").unwrap()["sound-speed"], "343");
    }

    #[test]
    fn grid_and_family_forms() {
        let s = Settings::resolve(None, None, flags(&[("grid", "8x12"), ("family", "plane:2")])).unwrap();
        let g = s.grid().unwrap();
        assert_eq!((g.rows(), g.cols()), (8, 12));
        assert_eq!(s.family().unwrap(), FieldFamily::PlaneWaveMix { n_waves: 2 });
        let s = Settings::resolve(None, None, flags(&[("family", "point:3,5")])).unwrap();
        assert_eq!(s.family().unwrap(), FieldFamily::PointSource { inner: 3.0, outer: 5.0 });
        assert!(Settings::resolve(Some("huge"), None, BTreeMap::new()).is_err());
    }
}
