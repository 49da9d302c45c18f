//! Kernel ridge regression with the `J₀(k‖r − r'‖)` kernel.
//!
//! Every estimate is a finite sum of `J₀` kernels, hence an exact solution of
//! the Helmholtz equation.

use crate::bessel::bessel_j0;
use crate::error::{Error, Result};
use crate::field::{ComplexField, ObservationSet};
use crate::grid::{Grid, WaveContext};

/// Default ridge parameter.
pub const DEFAULT_REGULARIZATION: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct KernelEstimator {
    positions: Vec<(f64, f64)>,
    weights_re: Vec<f64>,
    weights_im: Vec<f64>,
    wavenumber: f64,
    regularization: f64,
}

fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Symmetric kernel matrix `K[m][n] = J₀(k‖r_m − r_n‖)`, row-major.
pub fn gram_matrix(positions: &[(f64, f64)], k: f64) -> Vec<f64> {
    let m = positions.len();
    let mut gram = vec![0.0; m * m];
    for a in 0..m {
        gram[a * m + a] = 1.0;
        for b in 0..a {
            let v = bessel_j0(k * distance(positions[a], positions[b]));
            gram[a * m + b] = v;
            gram[b * m + a] = v;
        }
    }
    gram
}

/// In-place Cholesky factorisation of a symmetric positive definite matrix;
/// the lower triangle receives `L`.
fn cholesky(a: &mut [f64], n: usize) -> Result<()> {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::InvalidArgument("kernel system is not positive definite".into()));
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    Ok(())
}

fn cholesky_solve(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

impl KernelEstimator {
    /// Solves `(K + reg·I) w = s` for the complex weights.
    pub fn fit(obs: &ObservationSet, ctx: &WaveContext, regularization: f64) -> Result<Self> {
        Self::fit_points(obs.positions(), obs.re(), obs.im(), ctx.wavenumber(), regularization)
    }

    pub fn fit_points(
        positions: Vec<(f64, f64)>,
        re: &[f64],
        im: &[f64],
        wavenumber: f64,
        regularization: f64,
    ) -> Result<Self> {
        if !(regularization.is_finite() && regularization > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "regularization must be positive, got {regularization}"
            )));
        }
        let m = positions.len();
        if m == 0 {
            return Err(Error::InvalidArgument("no observations".into()));
        }
        if re.len() != m || im.len() != m {
            return Err(Error::ShapeMismatch { expected: m, actual: re.len().min(im.len()) });
        }
        let mut sys = gram_matrix(&positions, wavenumber);
        for a in 0..m {
            sys[a * m + a] += regularization;
        }
        cholesky(&mut sys, m)?;
        let mut weights_re = re.to_vec();
        let mut weights_im = im.to_vec();
        cholesky_solve(&sys, m, &mut weights_re);
        cholesky_solve(&sys, m, &mut weights_im);
        Ok(Self { positions, weights_re, weights_im, wavenumber, regularization })
    }

    pub fn weights(&self) -> (&[f64], &[f64]) {
        (&self.weights_re, &self.weights_im)
    }

    pub fn positions(&self) -> &[(f64, f64)] {
        &self.positions
    }

    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    pub fn regularization(&self) -> f64 {
        self.regularization
    }

    /// `û(r) = Σ_m w_m J₀(k‖r − r_m‖)`.
    pub fn predict_at(&self, r: (f64, f64)) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for ((p, wr), wi) in self.positions.iter().zip(&self.weights_re).zip(&self.weights_im) {
            let b = bessel_j0(self.wavenumber * distance(r, *p));
            re += wr * b;
            im += wi * b;
        }
        (re, im)
    }

    pub fn predict(&self, points: &[(f64, f64)]) -> Vec<(f64, f64)> {
        points.iter().map(|&r| self.predict_at(r)).collect()
    }

    pub fn predict_grid(&self, grid: &Grid) -> Result<ComplexField> {
        ComplexField::from_fn(*grid, |x, y| self.predict_at((x, y)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_observation() {
        let est = KernelEstimator::fit_points(vec![(0.3, -0.2)], &[1.0], &[0.0], 5.0, 1e-3).unwrap();
        assert!((est.weights().0[0] - 1.0 / (1.0 + 1e-3)).abs() < 1e-15);
        assert_eq!(est.weights().1[0], 0.0);
    }

    #[test]
    fn zero_observations_give_zero_weights() {
        let pos = vec![(0.0, 0.0), (0.5, 0.1), (-0.3, 0.7)];
        let est = KernelEstimator::fit_points(pos, &[0.0; 3], &[0.0; 3], 5.5, 1e-3).unwrap();
        assert!(est.weights().0.iter().chain(est.weights().1).all(|w| *w == 0.0));
        assert_eq!(est.predict_at((0.2, 0.2)), (0.0, 0.0));
    }

    #[test]
    fn residual_of_solve_is_small() {
        let pos: Vec<(f64, f64)> = (0..12).map(|i| ((i as f64 * 1.3).sin(), (i as f64 * 0.7).cos())).collect();
        let re: Vec<f64> = (0..12).map(|i| (i as f64).sin()).collect();
        let im: Vec<f64> = (0..12).map(|i| (i as f64 * 0.5).cos()).collect();
        let k = 5.5;
        let reg = 1e-3;
        let est = KernelEstimator::fit_points(pos.clone(), &re, &im, k, reg).unwrap();
        let gram = gram_matrix(&pos, k);
        for (w, s) in [(est.weights().0, &re), (est.weights().1, &im)] {
            let norm_s: f64 = s.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut res = 0.0;
            for a in 0..12 {
                let r: f64 = (0..12).map(|b| gram[a * 12 + b] * w[b]).sum::<f64>() + reg * w[a] - s[a];
                res += r * r;
            }
            assert!(res.sqrt() <= 1e-10 * norm_s);
        }
    }

    #[test]
    fn rejects_non_positive_regularization() {
        assert!(KernelEstimator::fit_points(vec![(0.0, 0.0)], &[1.0], &[0.0], 1.0, 0.0).is_err());
    }
}
