//! NMSE and Helmholtz-equation error, plus mean ± std aggregation.

use crate::error::{Error, Result};
use crate::field::{ComplexField, OutputTensor};
use crate::grid::WaveContext;
use crate::helmholtz::he_loss;
use crate::spline::interpolate_output;

/// Reported in place of `-∞` for log-scale values.
pub const LOG_FLOOR: f64 = -300.0;

/// `10·log₁₀(Σ|û − u|² / Σ|u|²)` over all nodes.
pub fn nmse_db(estimate: &ComplexField, truth: &ComplexField) -> Result<f64> {
    if !estimate.grid().matches(truth.grid()) {
        return Err(Error::Incompatible("estimate and truth grids differ".into()));
    }
    let energy = truth.energy();
    if energy == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let err: f64 = estimate
        .re()
        .iter()
        .zip(truth.re())
        .chain(estimate.im().iter().zip(truth.im()))
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(log_scale(10.0 * (err / energy).log10()))
}

fn log_scale(v: f64) -> f64 {
    if v.is_finite() {
        v.max(LOG_FLOOR)
    } else if v == f64::INFINITY {
        v
    } else {
        LOG_FLOOR
    }
}

/// Helmholtz-equation error of the spline interpolant of `out`. With
/// `zero_derivatives`, the boundary derivative channels are treated as zero
/// (the convention for estimators that only produce pressure).
pub fn he_metric(out: &OutputTensor, ctx: &WaveContext, zero_derivatives: bool) -> Result<f64> {
    let field = if zero_derivatives {
        interpolate_output(&out.without_derivatives())?
    } else {
        interpolate_output(out)?
    };
    he_loss(&field, ctx.wavenumber())
}

/// `log₁₀` of an HE value, floored at [`LOG_FLOOR`].
pub fn he_log10(he: f64) -> f64 {
    log_scale(he.log10())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation (`n − 1` denominator); zero for one value.
    pub std: f64,
    pub n: usize,
}

impl Summary {
    pub fn display(&self, decimals: usize) -> String {
        format!("{:.*}±{:.*}", decimals, self.mean, decimals, self.std)
    }
}

pub fn aggregate(values: &[f64]) -> Result<Summary> {
    let n = values.len();
    if n == 0 {
        return Err(Error::InvalidArgument("cannot aggregate zero runs".into()));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(Summary { mean, std, n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn field() -> ComplexField {
        ComplexField::from_fn(Grid::new(4, 4, 0.1).unwrap(), |x, y| (1.0 + x, y - 0.5)).unwrap()
    }

    #[test]
    fn nmse_of_zero_estimate_is_zero_db() {
        let u = field();
        let z = ComplexField::zeros(*u.grid());
        assert!(nmse_db(&z, &u).unwrap().abs() < 1e-12);
    }

    #[test]
    fn nmse_of_exact_estimate_hits_floor() {
        let u = field();
        assert_eq!(nmse_db(&u, &u).unwrap(), LOG_FLOOR);
    }

    #[test]
    fn nmse_rejects_zero_truth() {
        let u = field();
        let z = ComplexField::zeros(*u.grid());
        assert!(matches!(nmse_db(&u, &z), Err(Error::ZeroEnergy)));
    }

    #[test]
    fn he_of_zero_field() {
        let ctx = WaveContext::new(300.0, 340.0).unwrap();
        let out = OutputTensor::zeros(Grid::new(4, 4, 0.1).unwrap());
        let he = he_metric(&out, &ctx, true).unwrap();
        assert_eq!(he, 0.0);
        assert_eq!(he_log10(he), LOG_FLOOR);
    }

    #[test]
    fn aggregate_examples() {
        let s = aggregate(&[-3.5]).unwrap();
        assert_eq!((s.mean, s.std, s.n), (-3.5, 0.0, 1));
        let s = aggregate(&[-2.0, -4.0]).unwrap();
        assert!((s.mean + 3.0).abs() < 1e-15);
        assert!((s.std - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.display(3), "-3.000±1.414");
        assert!(aggregate(&[]).is_err());
    }
}
