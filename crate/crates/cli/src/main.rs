//! `soundfield` command-line driver: simulate datasets, train estimators,
//! evaluate them against the kernel method and emit plot artifacts.

mod settings;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use soundfield::dataset::Dataset;
use soundfield::experiment::{
    check_m_values, evaluate, per_sample_csv, results_table_csv, summarize, summary_csv, EvalSettings,
    LearnedModel, Method, TableMetric,
};
use soundfield::kernel::KernelEstimator;
use soundfield::model::{estimate, loss_log_csv, train_with_progress, Checkpoint};
use soundfield::plot::{grid_csv, pgm};
use soundfield::seed;
use soundfield::simulator::{generate_dataset, sample_observations_with};
use soundfield::ComplexField;

use settings::Settings;

#[derive(Parser, Debug)]
#[command(name = "soundfield", version, about = "Sound field estimation from sparse microphones")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a dataset of analytic single-frequency fields.
    Simulate(SimulateArgs),
    /// Train a network on the training half of a dataset.
    Train(TrainArgs),
    /// Evaluate checkpoints (and optionally the kernel method) on the test half.
    Eval(EvalArgs),
    /// Evaluate only the kernel method on the test half.
    Kernel(KernelArgs),
    /// Write heatmaps and CSV grids for one test sample.
    Plot(PlotArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Grid size: `N` for N×N or `RxC`.
    #[arg(long)]
    grid: Option<String>,
    /// Node spacing in metres.
    #[arg(long)]
    spacing: Option<String>,
    /// Frequency in hertz.
    #[arg(long)]
    freq: Option<String>,
    /// Sound speed in metres per second.
    #[arg(long = "sound-speed")]
    sound_speed: Option<String>,
    /// Random seed (data for simulate, initialization for train, observations for eval and plot).
    #[arg(long)]
    seed: Option<String>,
    /// Output file (simulate, train) or directory (eval, kernel, plot).
    #[arg(long)]
    out: PathBuf,
    /// Built-in defaults: `desk` (16×16, 500 epochs) or `paper` (32×32, 5000 epochs).
    #[arg(long)]
    preset: Option<String>,
    /// File of `key: value` lines overriding the preset.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Common {
    fn flags(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        for (k, v) in [
            ("grid", &self.grid),
            ("spacing", &self.spacing),
            ("freq", &self.freq),
            ("sound-speed", &self.sound_speed),
            ("seed", &self.seed),
        ] {
            if let Some(v) = v {
                m.insert(k.to_string(), v.clone());
            }
        }
        m
    }

    fn settings(&self, extra: &[(&str, &Option<String>)]) -> Result<Settings> {
        let mut flags = self.flags();
        for (k, v) in extra {
            if let Some(v) = v {
                flags.insert(k.to_string(), v.clone());
            }
        }
        Settings::resolve(self.preset.as_deref(), self.config.as_deref(), flags)
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// Number of samples (even; half train, half test).
    #[arg(long)]
    n: Option<String>,
    /// `point[:INNER,OUTER]` or `plane[:WAVES]`.
    #[arg(long)]
    family: Option<String>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    /// Dataset file written by `simulate`.
    #[arg(long)]
    dataset: PathBuf,
    /// Helmholtz loss weight; 0 trains the data-only baseline.
    #[arg(long)]
    lambda: Option<String>,
    /// Observation counts, comma separated; each example draws one.
    #[arg(long)]
    m: Option<String>,
    /// Number of training epochs.
    #[arg(long)]
    epochs: Option<String>,
    /// Adam learning rate.
    #[arg(long)]
    lr: Option<String>,
    /// Four comma-separated per-layer dilations.
    #[arg(long)]
    dilations: Option<String>,
    /// Keep one observation set per training sample instead of redrawing each epoch.
    #[arg(long)]
    fixed_observations: bool,
    /// Feed training fields at their original phase instead of a random global phase.
    #[arg(long)]
    no_phase_randomize: bool,
    /// Loss log CSV path; defaults to the checkpoint path with `.loss.csv` appended.
    #[arg(long)]
    loss_log: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    /// Dataset file written by `simulate`.
    #[arg(long)]
    dataset: PathBuf,
    /// Checkpoint to evaluate; repeat for several.
    #[arg(long = "checkpoint")]
    checkpoints: Vec<PathBuf>,
    /// Observation counts, comma separated.
    #[arg(long)]
    m: Option<String>,
    /// Also evaluate the kernel method.
    #[arg(long)]
    kernel: bool,
    /// Kernel ridge regularization.
    #[arg(long)]
    reg: Option<String>,
}

#[derive(Args, Debug)]
struct KernelArgs {
    #[command(flatten)]
    common: Common,
    /// Dataset file written by `simulate`.
    #[arg(long)]
    dataset: PathBuf,
    /// Observation counts, comma separated.
    #[arg(long)]
    m: Option<String>,
    /// Kernel ridge regularization.
    #[arg(long)]
    reg: Option<String>,
}

#[derive(Args, Debug)]
struct PlotArgs {
    #[command(flatten)]
    common: Common,
    /// Dataset file written by `simulate`.
    #[arg(long)]
    dataset: PathBuf,
    /// Index into the test half.
    #[arg(long, default_value_t = 0)]
    sample: usize,
    /// Number of observations (a single value).
    #[arg(long)]
    m: Option<String>,
    /// Checkpoint to plot; repeat for several.
    #[arg(long = "checkpoint")]
    checkpoints: Vec<PathBuf>,
    /// Kernel ridge regularization.
    #[arg(long)]
    reg: Option<String>,
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Simulate(a) => simulate(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Kernel(a) => kernel(a),
        Command::Plot(a) => plot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let s = a.common.settings(&[("n", &a.n), ("family", &a.family)])?;
    let grid = s.grid()?;
    let ctx = s.wave()?;
    let n: usize = s.get("n")?;
    let family = s.family()?;
    let data = generate_dataset(&grid, &ctx, n, family, s.get("seed")?)?;
    data.write(&a.common.out).with_context(|| format!("writing {}", a.common.out.display()))?;
    println!(
        "wrote {} samples ({} train / {} test) on a {}x{} grid at {} m, {} Hz, {} to {}",
        n,
        n / 2,
        n / 2,
        grid.rows(),
        grid.cols(),
        grid.spacing(),
        ctx.frequency(),
        family.describe(),
        a.common.out.display()
    );
    Ok(())
}

fn read_dataset(path: &Path, s: &Settings) -> Result<Dataset> {
    let data = Dataset::read(path).with_context(|| format!("reading dataset {}", path.display()))?;
    s.check_against(&data.grid, &data.ctx, "dataset")?;
    Ok(data)
}

fn read_checkpoint(path: &Path, data: &Dataset) -> Result<Checkpoint> {
    let ckpt = Checkpoint::read(path).with_context(|| format!("reading checkpoint {}", path.display()))?;
    ckpt.check_compatible(&data.grid, &data.ctx)
        .with_context(|| format!("checkpoint {} does not match the dataset", path.display()))?;
    Ok(ckpt)
}

fn test_fields(data: &Dataset) -> Vec<ComplexField> {
    data.split().1.iter().map(|s| s.field.clone()).collect()
}

fn train(a: TrainArgs) -> Result<()> {
    let resample = a.fixed_observations.then(|| "false".to_string());
    let phase = a.no_phase_randomize.then(|| "false".to_string());
    let s = a.common.settings(&[
        ("lambda", &a.lambda),
        ("m", &a.m),
        ("epochs", &a.epochs),
        ("lr", &a.lr),
        ("dilations", &a.dilations),
        ("resample-observations", &resample),
        ("phase-randomize", &phase),
    ])?;
    let data = read_dataset(&a.dataset, &s)?;
    let config = s.train_config()?;
    check_m_values(&config.m_values, data.grid.len())?;
    let fields: Vec<ComplexField> = data.split().0.iter().map(|s| s.field.clone()).collect();
    let every = (config.epochs / 10).max(1);
    let model = train_with_progress(&fields, &data.ctx, &config, |e| {
        if e.epoch == 1 || e.epoch % every == 0 {
            eprintln!("epoch {:>5}  loss {:.4e}  data {:.4e}  helmholtz {:.4e}", e.epoch, e.loss, e.data_loss, e.he_loss);
        }
    })?;
    let out = &a.common.out;
    Checkpoint::from_trained(&model).write(out).with_context(|| format!("writing {}", out.display()))?;
    let log_path = a.loss_log.unwrap_or_else(|| {
        let mut p = out.clone().into_os_string();
        p.push(".loss.csv");
        PathBuf::from(p)
    });
    fs::write(&log_path, loss_log_csv(&model.log))?;
    println!(
        "trained {} (lambda {}) for {} epochs; checkpoint {}, loss log {}",
        Method::for_lambda(config.lambda),
        config.lambda,
        config.epochs,
        out.display(),
        log_path.display()
    );
    Ok(())
}

fn write_results(dir: &Path, metrics: &[soundfield::experiment::SampleMetric]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let cells = summarize(metrics)?;
    let nmse = results_table_csv(&cells, TableMetric::NmseDb);
    let he = results_table_csv(&cells, TableMetric::HeLog10);
    fs::write(dir.join("per_sample.csv"), per_sample_csv(metrics))?;
    fs::write(dir.join("summary.csv"), summary_csv(&cells))?;
    fs::write(dir.join("nmse_db.csv"), &nmse)?;
    fs::write(dir.join("log10_he.csv"), &he)?;
    println!("NMSE [dB]\n{nmse}\nlog10 HE\n{he}");
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let s = a.common.settings(&[("m", &a.m), ("reg", &a.reg)])?;
    if a.checkpoints.is_empty() && !a.kernel {
        bail!("nothing to evaluate: pass --checkpoint and/or --kernel");
    }
    let data = read_dataset(&a.dataset, &s)?;
    let ckpts = a.checkpoints.iter().map(|p| read_checkpoint(p, &data)).collect::<Result<Vec<_>>>()?;
    let models: Vec<LearnedModel> =
        ckpts.iter().enumerate().map(|(run, c)| LearnedModel { params: &c.params, lambda: c.lambda, run }).collect();
    let m_values: Vec<usize> = s.list("m")?;
    check_m_values(&m_values, data.grid.len())?;
    let settings = EvalSettings {
        m_values,
        seed: s.get("seed")?,
        include_kernel: a.kernel,
        kernel_regularization: s.get("reg")?,
    };
    let metrics = evaluate(&test_fields(&data), &data.ctx, &models, &settings)?;
    write_results(&a.common.out, &metrics)
}

fn kernel(a: KernelArgs) -> Result<()> {
    let s = a.common.settings(&[("m", &a.m), ("reg", &a.reg)])?;
    let data = read_dataset(&a.dataset, &s)?;
    let m_values: Vec<usize> = s.list("m")?;
    check_m_values(&m_values, data.grid.len())?;
    let settings =
        EvalSettings { m_values, seed: s.get("seed")?, include_kernel: true, kernel_regularization: s.get("reg")? };
    let metrics = evaluate(&test_fields(&data), &data.ctx, &[], &settings)?;
    write_results(&a.common.out, &metrics)
}

fn write_plane(dir: &Path, name: &str, field: &ComplexField, marks: &[(usize, usize)]) -> Result<()> {
    fs::write(dir.join(format!("{name}.pgm")), pgm(field.grid(), field.re(), marks)?)?;
    fs::write(dir.join(format!("{name}_re.csv")), grid_csv(field.grid(), field.re())?)?;
    fs::write(dir.join(format!("{name}_im.csv")), grid_csv(field.grid(), field.im())?)?;
    Ok(())
}

fn plot(a: PlotArgs) -> Result<()> {
    let s = a.common.settings(&[("m", &a.m), ("reg", &a.reg)])?;
    let data = read_dataset(&a.dataset, &s)?;
    let tests = test_fields(&data);
    let truth = tests
        .get(a.sample)
        .with_context(|| format!("sample {} is outside the {}-sample test half", a.sample, tests.len()))?;
    let m_values: Vec<usize> = s.list("m")?;
    let m = if a.m.is_some() || s.is_explicit("m") || m_values.len() == 1 {
        match m_values.as_slice() {
            [m] => *m,
            _ => bail!("plot needs a single --m value"),
        }
    } else {
        10
    };
    check_m_values(&[m], data.grid.len())?;
    let mut rng = seed::rng(s.get("seed")?, &[a.sample as u64, m as u64]);
    let obs = sample_observations_with(truth, m, &mut rng)?;
    let marks = obs.indices().to_vec();
    let dir = &a.common.out;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;

    write_plane(dir, "truth", truth, &marks)?;
    let fit = KernelEstimator::fit(&obs, &data.ctx, s.get("reg")?)?;
    write_plane(dir, "kernel", &fit.predict_grid(&data.grid)?, &marks)?;
    for (n, path) in a.checkpoints.iter().enumerate() {
        let ckpt = read_checkpoint(path, &data)?;
        let (est, _) = estimate(&ckpt.params, &obs)?;
        let name = format!("{}_{n}", Method::for_lambda(ckpt.lambda).to_string().to_lowercase());
        write_plane(dir, &name, &est, &marks)?;
    }
    let obs_csv: String = std::iter::once("i,j,x,y\n".to_string())
        .chain(marks.iter().map(|&(i, j)| format!("{i},{j},{},{}\n", data.grid.x(i), data.grid.y(j))))
        .collect();
    fs::write(dir.join("observations.csv"), obs_csv)?;
    println!("wrote plots for test sample {} with M = {m} to {}", a.sample, dir.display());
    Ok(())
}
