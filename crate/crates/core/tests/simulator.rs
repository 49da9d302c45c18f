use std::f64::consts::PI;

use soundfield::bessel::{bessel_j0, bessel_y0};
use soundfield::dataset::Dataset;
use soundfield::seed;
use soundfield::simulator::{
    generate_dataset, plane_wave_field, point_source_field, randomize_phase, sample_observations, standardize,
    FieldFamily, SourceSpec, SOURCE_CLEARANCE,
};
use soundfield::{ComplexField, Grid, WaveContext};

fn ctx() -> WaveContext {
    WaveContext::new(300.0, 340.0).unwrap()
}

fn fd_residual(spec: &SourceSpec, k: f64, points: &[(f64, f64)]) -> f64 {
    let h = 1e-3;
    let (mut res, mut refv) = (0.0, 0.0);
    for &(x, y) in points {
        let u = spec.value_at(k, x, y);
        let nb = [(x + h, y), (x - h, y), (x, y + h), (x, y - h)].map(|(a, b)| spec.value_at(k, a, b));
        let lre = (nb.iter().map(|v| v.0).sum::<f64>() - 4.0 * u.0) / (h * h);
        let lim = (nb.iter().map(|v| v.1).sum::<f64>() - 4.0 * u.1) / (h * h);
        res += (lre + k * k * u.0).powi(2) + (lim + k * k * u.1).powi(2);
        refv += (k * k * u.0).powi(2) + (k * k * u.1).powi(2);
    }
    (res / refv).sqrt()
}

#[test]
fn generated_fields_satisfy_helmholtz() {
    let grid = Grid::new(16, 16, 0.2).unwrap();
    let k = ctx().wavenumber();
    let probes: Vec<(f64, f64)> = grid.positions().into_iter().step_by(7).collect();
    for family in [FieldFamily::default(), FieldFamily::PlaneWaveMix { n_waves: 4 }] {
        let data = generate_dataset(&grid, &ctx(), 10, family, 77).unwrap();
        for s in &data.samples {
            let spec = SourceSpec::from_metadata(&s.metadata).unwrap();
            assert!(fd_residual(&spec, k, &probes) <= 1e-3);
            let regenerated = spec.field(&grid, &ctx()).unwrap();
            assert_eq!(&regenerated, &s.field);
        }
    }
}

#[test]
fn plane_wave_examples() {
    let grid = Grid::new(3, 3, 0.5).unwrap();
    let f = plane_wave_field(&grid, &ctx(), &[0.0], &[(1.0, 0.0)]).unwrap();
    assert_eq!(f.at(1, 1), (1.0, 0.0));
    let k = ctx().wavenumber();
    let two = plane_wave_field(&grid, &ctx(), &[0.0, PI], &[(1.0, 0.0), (1.0, 0.0)]).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let (re, im) = two.at(i, j);
            assert!((re - 2.0 * (k * grid.x(i)).cos()).abs() < 1e-12);
            assert!(im.abs() < 1e-12);
        }
    }
}

#[test]
fn point_source_values_and_symmetry() {
    let unit = WaveContext::new(340.0 / (2.0 * PI), 340.0).unwrap();
    assert!((unit.wavenumber() - 1.0).abs() < 1e-15);
    let spec = SourceSpec::PointSource { position: (3.0, 0.0) };
    let (re, im) = spec.value_at(1.0, 2.0, 0.0);
    assert!((re + 0.25 * 0.08825696421567696).abs() < 1e-12);
    assert!((im - 0.25 * 0.7651976865579666).abs() < 1e-12);
    assert!((bessel_y0(1.0) - 0.08825696421567696).abs() < 1e-12);
    assert!((bessel_j0(1.0) - 0.7651976865579666).abs() < 1e-14);

    let k = ctx().wavenumber();
    let src = (2.5, 1.0);
    let spec = SourceSpec::PointSource { position: src };
    for r in [1.0, 1.7, 2.9] {
        let mags: Vec<f64> = (0..8)
            .map(|n| {
                let t = n as f64 * PI / 4.0;
                let (a, b) = spec.value_at(k, src.0 + r * t.cos(), src.1 + r * t.sin());
                a.hypot(b)
            })
            .collect();
        for m in &mags {
            assert!((m - mags[0]).abs() <= 1e-12 * mags[0]);
        }
    }
    let grid = Grid::new(16, 16, 0.2).unwrap();
    assert!(point_source_field(&grid, &ctx(), (0.0, 0.0)).is_err());
}

#[test]
fn dataset_generation_is_deterministic_and_respects_clearance() {
    let grid = Grid::new(32, 32, 0.1).unwrap();
    let a = generate_dataset(&grid, &ctx(), 256, FieldFamily::default(), 5).unwrap();
    let b = generate_dataset(&grid, &ctx(), 256, FieldFamily::default(), 5).unwrap();
    assert_eq!(a.to_bytes(), b.to_bytes());
    let (train, test) = a.split();
    assert_eq!((train.len(), test.len()), (128, 128));
    for s in &a.samples {
        let SourceSpec::PointSource { position: (x, y) } = SourceSpec::from_metadata(&s.metadata).unwrap() else {
            panic!("expected a point source");
        };
        assert!(grid.distance_to_domain(x, y) >= SOURCE_CLEARANCE);
        let r = x.hypot(y);
        assert!((2.2..4.0).contains(&r));
    }
    let manifest = a.manifest();
    assert_eq!(manifest.get("n_samples").unwrap(), "256");
    assert!(generate_dataset(&grid, &ctx(), 255, FieldFamily::default(), 5).is_err());
    let c = generate_dataset(&grid, &ctx(), 256, FieldFamily::default(), 6).unwrap();
    assert_ne!(a.to_bytes(), c.to_bytes());
    let restored = Dataset::from_bytes(&a.to_bytes()).unwrap();
    assert_eq!(restored.samples.len(), 256);
}

#[test]
fn observation_sampling() {
    let grid = Grid::new(5, 4, 0.2).unwrap();
    let field = ComplexField::from_fn(grid, |x, y| (x, y)).unwrap();
    let all = sample_observations(&field, 20, 1).unwrap();
    assert!(all.mask().iter().all(|m| *m == 1.0));
    let (re, im) = all.planes();
    assert_eq!(re, field.re());
    assert_eq!(im, field.im());
    let a = sample_observations(&field, 10, 9).unwrap();
    let b = sample_observations(&field, 10, 9).unwrap();
    assert_eq!(a.indices(), b.indices());
    let mut idx = a.indices().to_vec();
    idx.sort_unstable();
    idx.dedup();
    assert_eq!(idx.len(), 10);
    for ((i, j), (r, m)) in a.indices().iter().zip(a.re().iter().zip(a.im())) {
        assert_eq!((*r, *m), field.at(*i, *j));
    }
    assert!(sample_observations(&field, 0, 1).is_err());
    assert!(sample_observations(&field, 21, 1).is_err());
}

#[test]
fn standardize_and_phase() {
    let grid = Grid::new(3, 3, 0.2).unwrap();
    let field = ComplexField::from_fn(grid, |x, y| (4.0 * x / 0.2, -3.0 * y)).unwrap();
    let (scaled, s) = standardize(&field);
    assert_eq!(s, 4.0);
    assert!(scaled.re().iter().chain(scaled.im()).all(|v| v.abs() <= 1.0));
    let back = scaled.scaled(s);
    for (a, b) in back.re().iter().zip(field.re()) {
        assert!((a - b).abs() <= 1e-15 * b.abs());
    }
    let zero = ComplexField::zeros(grid);
    assert_eq!(standardize(&zero).1, 1.0);

    assert_eq!(field.rotated(0.0), field);
    let mut rng = seed::rng(4, &[]);
    let (rotated, phi) = randomize_phase(&field, &mut rng);
    assert!((0.0..2.0 * PI).contains(&phi));
    for n in 0..grid.len() {
        let a = field.re()[n].hypot(field.im()[n]);
        let b = rotated.re()[n].hypot(rotated.im()[n]);
        assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }
}
