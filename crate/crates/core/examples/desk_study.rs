//! Desk-scale comparison of Kernel, Baseline and Proposed estimators.
//!
//! Usage: `cargo run --release -p soundfield --example desk_study -- [key=value ...]`
//! with keys `lambda`, `lr`, `epochs`, `seeds`, `m`, `dilations`, `spacing`,
//! `n`, `grid`, `data_seed`, `methods` (`b`, `p` or `bp`).

use std::collections::HashMap;
use std::time::Instant;

use soundfield::experiment::{evaluate, results_table_csv, summarize, EvalSettings, LearnedModel, TableMetric};
use soundfield::kernel::DEFAULT_REGULARIZATION;
use soundfield::model::{default_architecture_with_dilations, train_with_progress, TrainConfig};
use soundfield::simulator::{generate_dataset, FieldFamily};
use soundfield::{Grid, WaveContext};

fn list<T: std::str::FromStr>(s: &str) -> Vec<T>
where
    T::Err: std::fmt::Debug,
{
    s.split(',').map(|v| v.trim().parse().unwrap()).collect()
}

fn main() -> soundfield::Result<()> {
    let args: HashMap<String, String> = std::env::args()
        .skip(1)
        .filter_map(|a| a.split_once('=').map(|(k, v)| (k.to_string(), v.to_string())))
        .collect();
    let get = |k: &str, d: &str| args.get(k).cloned().unwrap_or_else(|| d.to_string());
    let lambda: f64 = get("lambda", "1e-4").parse().unwrap();
    let lr: f64 = get("lr", "1e-3").parse().unwrap();
    let epochs: usize = get("epochs", "500").parse().unwrap();
    let seeds: Vec<u64> = list(&get("seeds", "1,2,3"));
    let m_values: Vec<usize> = list(&get("m", "5,10,15,20"));
    let d: Vec<usize> = list(&get("dilations", "1,3,6,1"));
    let spacing: f64 = get("spacing", "0.2").parse().unwrap();
    let n: usize = get("n", "128").parse().unwrap();
    let size: usize = get("grid", "16").parse().unwrap();
    let data_seed: u64 = get("data_seed", "2024").parse().unwrap();

    let grid = Grid::new(size, size, spacing)?;
    let ctx = WaveContext::new(300.0, 340.0)?;
    let data = generate_dataset(&grid, &ctx, n, FieldFamily::default(), data_seed)?;
    let (train, test) = data.split();
    let train: Vec<_> = train.iter().map(|s| s.field.clone()).collect();
    let test: Vec<_> = test.iter().map(|s| s.field.clone()).collect();

    let mut trained = Vec::new();
    for &seed in &seeds {
        let lambdas: Vec<f64> = match get("methods", "bp").as_str() {
            "b" => vec![0.0],
            "p" => vec![lambda],
            _ => vec![0.0, lambda],
        };
        for lam in lambdas {
            let mut config = TrainConfig::desk(lam, seed);
            config.m_values = m_values.clone();
            config.learning_rate = lr;
            config.epochs = epochs;
            config.architecture = default_architecture_with_dilations([d[0], d[1], d[2], d[3]]);
            let start = Instant::now();
            let model = train_with_progress(&train, &ctx, &config, |e| {
                if e.epoch == 1 || e.epoch % 100 == 0 {
                    eprintln!("  seed {seed} lambda {lam:e} epoch {} L {:.4e} LD {:.4e} LH {:.4e}", e.epoch, e.loss, e.data_loss, e.he_loss);
                }
            })?;
            eprintln!("trained seed {seed} lambda {lam:e} in {:.1}s", start.elapsed().as_secs_f64());
            trained.push((model.params, lam, seed as usize));
        }
    }
    let models: Vec<LearnedModel> =
        trained.iter().map(|(p, lam, run)| LearnedModel { params: p, lambda: *lam, run: *run }).collect();
    let settings = EvalSettings {
        m_values: m_values.clone(),
        seed: 99,
        include_kernel: true,
        kernel_regularization: DEFAULT_REGULARIZATION,
    };
    let metrics = evaluate(&test, &ctx, &models, &settings)?;
    let cells = summarize(&metrics)?;
    println!("NMSE dB\n{}", results_table_csv(&cells, TableMetric::NmseDb));
    println!("log10 HE\n{}", results_table_csv(&cells, TableMetric::HeLog10));
    Ok(())
}
