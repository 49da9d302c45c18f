//! Evaluation of kernel and learned estimators over a test split.
//!
//! Every method sees the same observation set for a given `(sample, M)`,
//! drawn from a seed derived from the evaluation seed.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{ComplexField, OutputTensor};
use crate::grid::WaveContext;
use crate::kernel::KernelEstimator;
use crate::metrics::{aggregate, he_log10, he_metric, nmse_db, Summary};
use crate::model::{estimate, ModelParams};
use crate::seed;
use crate::simulator::sample_observations_with;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Kernel,
    Baseline,
    Proposed,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Kernel, Method::Baseline, Method::Proposed];

    /// Learned models trained with `λ = 0` are the baseline.
    pub fn for_lambda(lambda: f64) -> Self {
        if lambda > 0.0 {
            Method::Proposed
        } else {
            Method::Baseline
        }
    }

    /// Whether HE is computed with zeroed boundary derivatives.
    pub fn zero_derivative_he(self) -> bool {
        !matches!(self, Method::Proposed)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Kernel => "Kernel",
            Method::Baseline => "Baseline",
            Method::Proposed => "Proposed",
        })
    }
}

/// A learned estimator to evaluate.
#[derive(Debug, Clone, Copy)]
pub struct LearnedModel<'a> {
    pub params: &'a ModelParams,
    pub lambda: f64,
    /// Distinguishes repeated trainings of the same method.
    pub run: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleMetric {
    pub method: Method,
    pub run: usize,
    pub m: usize,
    pub sample: usize,
    pub nmse_db: f64,
    pub he: f64,
    pub he_log10: f64,
}

#[derive(Debug, Clone)]
pub struct EvalSettings {
    pub m_values: Vec<usize>,
    pub seed: u64,
    pub include_kernel: bool,
    pub kernel_regularization: f64,
}

/// Output of an estimator expressed as an 8-channel tensor.
fn kernel_output(fit: &KernelEstimator, truth: &ComplexField) -> Result<OutputTensor> {
    let pred = fit.predict_grid(truth.grid())?;
    Ok(OutputTensor::from_field(&pred))
}

pub fn evaluate(
    test: &[ComplexField],
    ctx: &WaveContext,
    models: &[LearnedModel<'_>],
    settings: &EvalSettings,
) -> Result<Vec<SampleMetric>> {
    let mut out = Vec::new();
    for &m in &settings.m_values {
        for (s, truth) in test.iter().enumerate() {
            let mut rng = seed::rng(settings.seed, &[s as u64, m as u64]);
            let obs = sample_observations_with(truth, m, &mut rng)?;
            let mut record = |method: Method, run: usize, output: &OutputTensor| -> Result<()> {
                let nmse = nmse_db(&output.pressure()?, truth)?;
                let he = he_metric(output, ctx, method.zero_derivative_he())?;
                out.push(SampleMetric { method, run, m, sample: s, nmse_db: nmse, he, he_log10: he_log10(he) });
                Ok(())
            };
            if settings.include_kernel {
                let fit = KernelEstimator::fit(&obs, ctx, settings.kernel_regularization)?;
                record(Method::Kernel, 0, &kernel_output(&fit, truth)?)?;
            }
            for model in models {
                let (_, output) = estimate(model.params, &obs)?;
                record(Method::for_lambda(model.lambda), model.run, &output)?;
            }
        }
    }
    Ok(out)
}

/// Aggregated NMSE and log-HE for one `(method, M)` cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub nmse_db: Summary,
    pub he_log10: Summary,
}

pub fn summarize(metrics: &[SampleMetric]) -> Result<BTreeMap<(Method, usize), Cell>> {
    let mut groups: BTreeMap<(Method, usize), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in metrics {
        let g = groups.entry((r.method, r.m)).or_default();
        g.0.push(r.nmse_db);
        g.1.push(r.he_log10);
    }
    groups
        .into_iter()
        .map(|(key, (n, h))| Ok((key, Cell { nmse_db: aggregate(&n)?, he_log10: aggregate(&h)? })))
        .collect()
}

pub fn per_sample_csv(metrics: &[SampleMetric]) -> String {
    let mut s = String::from("method,run,m,sample,nmse_db,he,log10_he,he_boundary_derivatives\n");
    for r in metrics {
        let conv = if r.method.zero_derivative_he() { "zero" } else { "estimated" };
        s.push_str(&format!(
            "{},{},{},{},{:.17e},{:.17e},{:.17e},{}\n",
            r.method, r.run, r.m, r.sample, r.nmse_db, r.he, r.he_log10, conv
        ));
    }
    s
}

/// Which aggregated quantity a results table shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableMetric {
    NmseDb,
    HeLog10,
}

/// `M,Kernel,Baseline,Proposed` table with `mean±std` cells; `--` where a
/// method was not evaluated.
pub fn results_table_csv(cells: &BTreeMap<(Method, usize), Cell>, metric: TableMetric) -> String {
    let mut ms: Vec<usize> = cells.keys().map(|k| k.1).collect();
    ms.sort_unstable();
    ms.dedup();
    let mut s = String::from("M,Kernel,Baseline,Proposed\n");
    for m in ms {
        s.push_str(&m.to_string());
        for method in Method::ALL {
            let cell = cells.get(&(method, m)).map(|c| match metric {
                TableMetric::NmseDb => c.nmse_db,
                TableMetric::HeLog10 => c.he_log10,
            });
            s.push(',');
            s.push_str(&cell.map_or_else(|| "--".to_string(), |v| v.display(2)));
        }
        s.push('\n');
    }
    s
}

/// Long-form numeric summary: one row per `(method, M)`.
pub fn summary_csv(cells: &BTreeMap<(Method, usize), Cell>) -> String {
    let mut s = String::from("method,m,n,nmse_mean_db,nmse_std_db,log10_he_mean,log10_he_std\n");
    for ((method, m), c) in cells {
        s.push_str(&format!(
            "{},{},{},{:.17e},{:.17e},{:.17e},{:.17e}\n",
            method, m, c.nmse_db.n, c.nmse_db.mean, c.nmse_db.std, c.he_log10.mean, c.he_log10.std
        ));
    }
    s
}

/// Errors if `m_values` asks for more observations than the grid has.
pub fn check_m_values(m_values: &[usize], n_points: usize) -> Result<()> {
    match m_values.iter().find(|&&m| m == 0 || m > n_points) {
        Some(m) => Err(Error::InvalidArgument(format!("M = {m} is outside 1..={n_points}"))),
        None => Ok(()),
    }
}
