//! Losses, training loop and inference for the convolutional estimator.

use rand::seq::SliceRandom;
use rand::Rng;

use super::adam::{adam_step, AdamConfig, AdamState};
use super::network::{self, default_architecture, LayerSpec, ModelParams};
use crate::error::{Error, Result};
use crate::field::{Channel, ComplexField, ObservationSet, OutputTensor};
use crate::grid::{Grid, WaveContext};
use crate::helmholtz::{he_loss, he_loss_and_gradient};
use crate::seed;
use crate::simulator::{randomize_phase, sample_observations_with, standardize_observations};
use crate::spline::interpolate_output;

/// Three input planes: observed real part, observed imaginary part, mask.
#[derive(Debug, Clone, PartialEq)]
pub struct InputTensor {
    grid: Grid,
    data: Vec<f64>,
}

impl InputTensor {
    pub fn from_observations(obs: &ObservationSet) -> Self {
        let grid = *obs.grid();
        let (re, im) = obs.planes();
        let mut data = Vec::with_capacity(3 * grid.len());
        data.extend(re);
        data.extend(im);
        data.extend(obs.mask());
        Self { grid, data }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

pub fn forward(params: &ModelParams, input: &InputTensor) -> Result<OutputTensor> {
    let (out, _) = network::forward(params, &input.grid, &input.data)?;
    OutputTensor::from_vec(input.grid, out)
}

/// Mean squared pressure error over all nodes; derivative channels are ignored.
pub fn data_loss(out: &OutputTensor, truth: &ComplexField) -> Result<f64> {
    check_grid(out.grid(), truth.grid())?;
    let n = truth.grid().len() as f64;
    let sum: f64 = out
        .channel(Channel::Re)
        .iter()
        .zip(truth.re())
        .chain(out.channel(Channel::Im).iter().zip(truth.im()))
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / n)
}

fn check_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a.matches(b) {
        Ok(())
    } else {
        Err(Error::Incompatible(format!(
            "grids differ: {}x{}@{} vs {}x{}@{}",
            a.rows(),
            a.cols(),
            a.spacing(),
            b.rows(),
            b.cols(),
            b.spacing()
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParts {
    pub total: f64,
    pub data: f64,
    pub helmholtz: f64,
}

/// `L = L_D + λ·L_H`. With `λ = 0` the Helmholtz term is not evaluated and
/// reported as zero, so `total` is exactly the data loss.
pub fn total_loss(out: &OutputTensor, truth: &ComplexField, ctx: &WaveContext, lambda: f64) -> Result<LossParts> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be nonnegative, got {lambda}")));
    }
    let data = data_loss(out, truth)?;
    if lambda == 0.0 {
        return Ok(LossParts { total: data, data, helmholtz: 0.0 });
    }
    let helmholtz = he_loss(&interpolate_output(out)?, ctx.wavenumber())?;
    Ok(LossParts { total: data + lambda * helmholtz, data, helmholtz })
}

/// Loss parts and `∂L/∂Û` for one output.
pub fn loss_and_output_grad(
    out: &OutputTensor,
    truth: &ComplexField,
    ctx: &WaveContext,
    lambda: f64,
) -> Result<(LossParts, OutputTensor)> {
    let grid = *out.grid();
    let data = data_loss(out, truth)?;
    let (helmholtz, mut grad) = if lambda > 0.0 {
        let (h, g) = he_loss_and_gradient(out, ctx.wavenumber())?;
        (h, g.scaled(lambda))
    } else {
        (0.0, OutputTensor::zeros(grid))
    };
    let scale = 2.0 / grid.len() as f64;
    for (c, truth_plane) in [(Channel::Re, truth.re()), (Channel::Im, truth.im())] {
        let est = out.channel(c).to_vec();
        for ((g, e), t) in grad.channel_mut(c).iter_mut().zip(est).zip(truth_plane) {
            *g += scale * (e - t);
        }
    }
    Ok((LossParts { total: data + lambda * helmholtz, data, helmholtz }, grad))
}

/// Total loss and its gradient with respect to every network parameter.
pub fn backward(
    params: &ModelParams,
    input: &InputTensor,
    truth: &ComplexField,
    ctx: &WaveContext,
    lambda: f64,
) -> Result<(LossParts, Vec<f64>)> {
    check_grid(&input.grid, truth.grid())?;
    let (raw, cache) = network::forward(params, &input.grid, &input.data)?;
    let out = OutputTensor::from_vec(input.grid, raw)?;
    let (parts, out_grad) = loss_and_output_grad(&out, truth, ctx, lambda)?;
    Ok((parts, network::backward(params, &cache, out_grad.as_slice())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Weight of the Helmholtz loss; zero trains the data-only baseline.
    pub lambda: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Observation counts; each training example draws one uniformly.
    pub m_values: Vec<usize>,
    pub seed: u64,
    pub resample_observations_each_epoch: bool,
    pub phase_randomize: bool,
    pub architecture: Vec<LayerSpec>,
}

impl TrainConfig {
    pub const PAPER_LAMBDA: f64 = 1e-5;
    pub const DESK_LAMBDA: f64 = 1e-4;
    pub const DESK_M_VALUES: [usize; 4] = [5, 10, 15, 20];

    /// 32×32-scale settings: learning rate 0.01, 5000 epochs.
    pub fn paper(lambda: f64, m: usize, seed: u64) -> Self {
        Self {
            lambda,
            learning_rate: 0.01,
            epochs: 5000,
            m_values: vec![m],
            seed,
            resample_observations_each_epoch: true,
            phase_randomize: true,
            architecture: default_architecture(),
        }
    }

    /// 16×16-scale settings for a single CPU core: learning rate 1e-3,
    /// 500 epochs, one model for all of `M ∈ {5, 10, 15, 20}`.
    pub fn desk(lambda: f64, seed: u64) -> Self {
        Self {
            epochs: 500,
            learning_rate: 1e-3,
            m_values: Self::DESK_M_VALUES.to_vec(),
            ..Self::paper(lambda, Self::DESK_M_VALUES[0], seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must be nonnegative, got {}", self.lambda)));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument("learning rate must be positive".into()));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidArgument("epochs must be at least 1".into()));
        }
        if self.m_values.is_empty() || self.m_values.contains(&0) {
            return Err(Error::InvalidArgument("observation counts must be positive".into()));
        }
        network::validate_architecture(&self.architecture)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub loss: f64,
    pub data_loss: f64,
    pub he_loss: f64,
}

pub fn loss_log_csv(log: &[EpochLog]) -> String {
    let mut s = String::from("epoch,loss,data_loss,he_loss\n");
    for e in log {
        s.push_str(&format!("{},{:e},{:e},{:e}\n", e.epoch, e.loss, e.data_loss, e.he_loss));
    }
    s
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub params: ModelParams,
    pub config: TrainConfig,
    pub grid: Grid,
    pub ctx: WaveContext,
    pub log: Vec<EpochLog>,
}

/// Standardised network input and target for one training example.
fn prepare_example<R: Rng>(
    field: &ComplexField,
    fixed_obs: Option<&[(usize, usize)]>,
    config: &TrainConfig,
    rng: &mut R,
) -> Result<(InputTensor, ComplexField)> {
    let field = if config.phase_randomize { randomize_phase(field, rng).0 } else { field.clone() };
    let obs = match fixed_obs {
        Some(idx) => ObservationSet::from_field(&field, idx.to_vec())?,
        None => {
            let m = config.m_values[rng.random_range(0..config.m_values.len())];
            sample_observations_with(&field, m, rng)?
        }
    };
    let (obs, scale) = standardize_observations(&obs);
    Ok((InputTensor::from_observations(&obs), field.scaled(1.0 / scale)))
}

/// Per-sample Adam updates in a seeded shuffled order.
pub fn train(fields: &[ComplexField], ctx: &WaveContext, config: &TrainConfig) -> Result<TrainedModel> {
    train_with_progress(fields, ctx, config, |_| {})
}

pub fn train_with_progress(
    fields: &[ComplexField],
    ctx: &WaveContext,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochLog),
) -> Result<TrainedModel> {
    config.validate()?;
    let grid = *fields
        .first()
        .ok_or_else(|| Error::InvalidArgument("training set is empty".into()))?
        .grid();
    for f in fields {
        check_grid(&grid, f.grid())?;
    }
    let mut params = ModelParams::init(config.architecture.clone(), config.seed)?;
    let adam = AdamConfig::with_learning_rate(config.learning_rate);
    let mut state = AdamState::new(params.len());
    let mut rng = seed::rng(config.seed, &[0x7121]);

    let fixed: Option<Vec<Vec<(usize, usize)>>> = if config.resample_observations_each_epoch {
        None
    } else {
        let sets = fields
            .iter()
            .enumerate()
            .map(|(s, f)| {
                let mut r = seed::rng(config.seed, &[0x0b5, s as u64]);
                let m = config.m_values[r.random_range(0..config.m_values.len())];
                Ok(sample_observations_with(f, m, &mut r)?.indices().to_vec())
            })
            .collect::<Result<Vec<_>>>()?;
        Some(sets)
    };

    let mut order: Vec<usize> = (0..fields.len()).collect();
    let mut log = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let (mut sum_l, mut sum_d, mut sum_h) = (0.0, 0.0, 0.0);
        for &s in &order {
            let fixed_obs = fixed.as_ref().map(|f| f[s].as_slice());
            let (input, target) = prepare_example(&fields[s], fixed_obs, config, &mut rng)?;
            let (parts, grads) = backward(&params, &input, &target, ctx, config.lambda)?;
            if !parts.total.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            adam_step(params.values_mut(), &grads, &mut state, &adam);
            sum_l += parts.total;
            sum_d += parts.data;
            sum_h += parts.helmholtz;
        }
        let n = fields.len() as f64;
        let entry = EpochLog { epoch, loss: sum_l / n, data_loss: sum_d / n, he_loss: sum_h / n };
        if !entry.loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        on_epoch(&entry);
        log.push(entry);
    }
    Ok(TrainedModel { params, config: config.clone(), grid, ctx: *ctx, log })
}

/// Standardises the observations, runs the network and undoes the scaling
/// on every output channel.
pub fn estimate(params: &ModelParams, obs: &ObservationSet) -> Result<(ComplexField, OutputTensor)> {
    let (scaled, scale) = standardize_observations(obs);
    let out = forward(params, &InputTensor::from_observations(&scaled))?.scaled(scale);
    Ok((out.pressure()?, out))
}
