use soundfield::bessel::{bessel_j0, bessel_y0};
use soundfield::kernel::{gram_matrix, KernelEstimator, DEFAULT_REGULARIZATION};
use soundfield::metrics::nmse_db;
use soundfield::seed;
use soundfield::simulator::{generate_dataset, sample_observations, FieldFamily};
use soundfield::{ComplexField, Grid, ObservationSet, WaveContext};

/// `Σ (−1)^m (x/2)^{2m} / (m!)²`, 30 terms.
fn j0_series(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..30 {
        term *= -(x * x / 4.0) / (m as f64 * m as f64);
        sum += term;
    }
    sum
}

fn ctx() -> WaveContext {
    WaveContext::new(300.0, 340.0).unwrap()
}

#[test]
fn j0_against_series_oracle() {
    assert_eq!(bessel_j0(0.0), 1.0);
    assert!((bessel_j0(1.0) - 0.765197686557967).abs() < 1e-14);
    for x in [0.3, 1.0, 2.5, 4.0, 7.5, 11.0] {
        assert!((bessel_j0(x) - j0_series(x)).abs() < 1e-12, "x = {x}");
    }
    let (mut lo, mut hi) = (2.0, 3.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if j0_series(lo) * j0_series(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    assert!((lo - 2.404825557695773).abs() < 1e-12);
    assert!(bessel_j0(2.404825557695773).abs() <= 1e-10);
    assert!(bessel_y0(0.8935769662791675).abs() <= 1e-10);
}

#[test]
fn single_observation_weight() {
    let grid = Grid::new(4, 4, 0.2).unwrap();
    let obs = ObservationSet::new(grid, vec![(1, 2)], vec![1.0], vec![0.0]).unwrap();
    let fit = KernelEstimator::fit(&obs, &ctx(), 1e-3).unwrap();
    let (wr, wi) = fit.weights();
    assert!((wr[0] - 1.0 / 1.001).abs() < 1e-15);
    assert_eq!(wi[0], 0.0);
}

#[test]
fn gram_is_symmetric_and_fit_is_linear() {
    let grid = Grid::new(16, 16, 0.2).unwrap();
    let field = ComplexField::from_fn(grid, |x, y| ((2.0 * x).cos() + y, (1.5 * y).sin() - x)).unwrap();
    let obs = sample_observations(&field, 15, 4).unwrap();
    let k = ctx().wavenumber();
    let g = gram_matrix(&obs.positions(), k);
    for a in 0..15 {
        assert_eq!(g[a * 15 + a], 1.0);
        for b in 0..15 {
            assert_eq!(g[a * 15 + b], g[b * 15 + a]);
        }
    }
    let fit = KernelEstimator::fit(&obs, &ctx(), 1e-3).unwrap();
    let fit3 = KernelEstimator::fit(&obs.scaled(3.0), &ctx(), 1e-3).unwrap();
    for (a, b) in fit.weights().0.iter().zip(fit3.weights().0) {
        assert!((3.0 * a - b).abs() <= 1e-12 * b.abs().max(1.0));
    }
    let zero = KernelEstimator::fit(&obs.scaled(0.0), &ctx(), 1e-3).unwrap();
    assert!(zero.weights().0.iter().chain(zero.weights().1).all(|w| *w == 0.0));
    assert_eq!(zero.predict_at((0.1, 0.2)), (0.0, 0.0));
}

#[test]
fn five_wave_mix_with_twenty_observations() {
    let grid = Grid::new(32, 32, 0.1).unwrap();
    let data = generate_dataset(&grid, &ctx(), 10, FieldFamily::PlaneWaveMix { n_waves: 5 }, 12).unwrap();
    let mut total = 0.0;
    for (s, sample) in data.samples.iter().enumerate() {
        let obs = sample_observations(&sample.field, 20, s as u64).unwrap();
        let fit = KernelEstimator::fit(&obs, &ctx(), DEFAULT_REGULARIZATION).unwrap();
        total += nmse_db(&fit.predict_grid(&grid).unwrap(), &sample.field).unwrap();
    }
    let mean = total / data.samples.len() as f64;
    assert!(mean <= -8.0, "mean NMSE {mean} dB");
}

#[test]
fn interpolation_limit_recovers_observations() {
    let grid = Grid::new(16, 16, 0.2).unwrap();
    let field = ComplexField::from_fn(grid, |x, y| ((3.0 * x - y).cos(), (x + 2.0 * y).sin())).unwrap();
    let obs = sample_observations(&field, 10, 8).unwrap();
    let fit = KernelEstimator::fit(&obs, &ctx(), 1e-12).unwrap();
    for ((p, re), im) in obs.positions().iter().zip(obs.re()).zip(obs.im()) {
        let (a, b) = fit.predict_at(*p);
        let norm = re.hypot(*im);
        assert!((a - re).hypot(b - im) <= 1e-6 * norm.max(1e-3));
    }
}

#[test]
fn estimates_satisfy_helmholtz_by_finite_differences() {
    let c = ctx();
    let k = c.wavenumber();
    let grid = Grid::new(16, 16, 0.2).unwrap();
    let data = generate_dataset(&grid, &c, 4, FieldFamily::default(), 3).unwrap();
    let h = 1e-3;
    let mut rng = seed::rng(5, &[]);
    use rand::Rng;
    for sample in &data.samples {
        let obs = sample_observations(&sample.field, 20, 1).unwrap();
        let fit = KernelEstimator::fit(&obs, &c, DEFAULT_REGULARIZATION).unwrap();
        let (mut res, mut refv) = (0.0, 0.0);
        for _ in 0..100 {
            let (x, y) = (rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
            let u = fit.predict_at((x, y));
            let nb = [(x + h, y), (x - h, y), (x, y + h), (x, y - h)].map(|p| fit.predict_at(p));
            let lap_re = (nb.iter().map(|v| v.0).sum::<f64>() - 4.0 * u.0) / (h * h);
            let lap_im = (nb.iter().map(|v| v.1).sum::<f64>() - 4.0 * u.1) / (h * h);
            res += (lap_re + k * k * u.0).powi(2) + (lap_im + k * k * u.1).powi(2);
            refv += (k * k * u.0).powi(2) + (k * k * u.1).powi(2);
        }
        assert!((res / refv).sqrt() <= 1e-3);
    }
}

#[test]
fn nonpositive_regularization_is_rejected() {
    let grid = Grid::new(4, 4, 0.2).unwrap();
    let obs = ObservationSet::new(grid, vec![(0, 0)], vec![1.0], vec![0.0]).unwrap();
    assert!(KernelEstimator::fit(&obs, &ctx(), 0.0).is_err());
    assert!(KernelEstimator::fit(&obs, &ctx(), -1.0).is_err());
}
