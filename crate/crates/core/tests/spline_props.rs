use proptest::prelude::*;
use soundfield::field::Channel;
use soundfield::spline::{fit_spline, interpolate_output, OutOfDomain, SplinePatchSet};
use soundfield::{Grid, OutputTensor, WaveContext};

fn planes(grid: &Grid, f: impl Fn(f64, f64) -> [f64; 4]) -> [Vec<f64>; 4] {
    let mut out: [Vec<f64>; 4] = Default::default();
    for (x, y) in grid.positions() {
        let v = f(x, y);
        for d in 0..4 {
            out[d].push(v[d]);
        }
    }
    out
}

fn fit(grid: &Grid, p: &[Vec<f64>; 4]) -> SplinePatchSet {
    fit_spline(grid, &p[0], &p[1], &p[2], &p[3]).unwrap()
}

fn probes(grid: &Grid, n: usize, seed: u64) -> Vec<(f64, f64)> {
    let (x0, y0) = grid.position(0, 0);
    let (w, h) = grid.extent();
    (0..n)
        .map(|m| {
            let a = (((m as u64 + 1) * 2654435761 + seed * 97) % 10007) as f64 / 10006.0;
            let b = (((m as u64 + 3) * 40503 + seed * 31) % 9973) as f64 / 9972.0;
            (x0 + a * w, y0 + b * h)
        })
        .collect()
}

#[test]
fn x3y3_is_reproduced_with_exact_laplacian() {
    let grid = Grid::new(9, 8, 0.17).unwrap();
    let p = planes(&grid, |x, y| {
        [x.powi(3) * y.powi(3), 3.0 * x * x * y.powi(3), 3.0 * x.powi(3) * y * y, 9.0 * x * x * y * y]
    });
    let s = fit(&grid, &p);
    let scale = p[0].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (x, y) in probes(&grid, 400, 1) {
        let f = x.powi(3) * y.powi(3);
        assert!((s.evaluate(x, y).unwrap() - f).abs() <= 1e-9 * scale);
        let lap = 6.0 * x * y.powi(3) + 6.0 * x.powi(3) * y;
        assert!((s.evaluate_laplacian(x, y).unwrap() - lap).abs() <= 1e-9 * scale.max(1.0));
    }
}

#[test]
fn quadratic_bowl_has_laplacian_four() {
    let grid = Grid::new(7, 10, 0.3).unwrap();
    let p = planes(&grid, |x, y| [x * x + y * y, 2.0 * x, 2.0 * y, 0.0]);
    let s = fit(&grid, &p);
    for (x, y) in probes(&grid, 400, 2) {
        assert!((s.evaluate_laplacian(x, y).unwrap() - 4.0).abs() <= 1e-9);
        let (gx, gy) = s.evaluate_gradient(x, y).unwrap();
        assert!((gx - 2.0 * x).abs() <= 1e-9 && (gy - 2.0 * y).abs() <= 1e-9);
    }
}

#[test]
fn constant_plane_gives_constant_patches() {
    let grid = Grid::new(5, 6, 0.1).unwrap();
    let n = grid.len();
    let s = fit_spline(&grid, &vec![2.5; n], &vec![0.0; n], &vec![0.0; n], &vec![0.0; n]).unwrap();
    for a in s.coeffs() {
        for m in 0..4 {
            for k in 0..4 {
                let expect = if (m, k) == (0, 0) { 2.5 } else { 0.0 };
                assert!((a[m][k] - expect).abs() < 1e-14);
            }
        }
    }
    for (x, y) in probes(&grid, 50, 3) {
        assert!((s.evaluate(x, y).unwrap() - 2.5).abs() < 1e-13);
        assert!(s.evaluate_laplacian(x, y).unwrap().abs() < 1e-10);
    }
}

/// Sharp error constant of the complete cubic spline: `(5/384)·l⁴·max|f⁗|`.
#[test]
fn plane_wave_error_follows_the_fourth_order_bound() {
    let k = WaveContext::new(300.0, 340.0).unwrap().wavenumber();
    for (n, l, tol) in [(32, 0.1, 5.0 / 384.0 * (k * 0.1f64).powi(4)), (63, 0.05, 1e-4)] {
        let grid = Grid::new(n, n, l).unwrap();
        let mut out = OutputTensor::zeros(grid);
        for (idx, (x, _)) in grid.positions().into_iter().enumerate() {
            let (s, c) = (k * x).sin_cos();
            out.channel_mut(Channel::Re)[idx] = c;
            out.channel_mut(Channel::Im)[idx] = s;
            out.channel_mut(Channel::DxRe)[idx] = -k * s;
            out.channel_mut(Channel::DxIm)[idx] = k * c;
        }
        let field = interpolate_output(&out).unwrap();
        let mut worst: f64 = 0.0;
        for (x, y) in probes(&grid, 2000, 4) {
            let (s, c) = (k * x).sin_cos();
            let er = field.re.evaluate(x, y).unwrap() - c;
            let ei = field.im.evaluate(x, y).unwrap() - s;
            worst = worst.max(er.hypot(ei));
        }
        assert!(worst <= tol, "l = {l}: max error {worst:e} exceeds {tol:e}");
    }
}

#[test]
fn zero_derivative_boundaries_are_accepted() {
    let grid = Grid::new(6, 6, 0.2).unwrap();
    let mut out = OutputTensor::zeros(grid);
    for (i, v) in out.channel_mut(Channel::Re).iter_mut().enumerate() {
        *v = (i as f64 * 0.37).sin();
    }
    let field = interpolate_output(&out).unwrap();
    assert!(field.re.evaluate(0.1, -0.2).unwrap().is_finite());
    let zero = interpolate_output(&OutputTensor::zeros(grid)).unwrap();
    assert!(zero.re.coeffs().iter().chain(zero.im.coeffs()).flatten().flatten().all(|v| *v == 0.0));
}

fn random_planes(rows: usize, cols: usize, vals: &[f64]) -> [Vec<f64>; 4] {
    let n = rows * cols;
    [0, 1, 2, 3].map(|d| (0..n).map(|m| vals[(d * n + m) % vals.len()]).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fit_is_linear(
        rows in 2usize..7,
        cols in 2usize..7,
        l in 0.05f64..0.6,
        a in -3.0f64..3.0,
        vals in prop::collection::vec(-1.0f64..1.0, 40..80),
        other in prop::collection::vec(-1.0f64..1.0, 40..80),
    ) {
        let grid = Grid::new(rows, cols, l).unwrap();
        let p = random_planes(rows, cols, &vals);
        let q = random_planes(rows, cols, &other);
        let combo: [Vec<f64>; 4] = [0, 1, 2, 3].map(|d| p[d].iter().zip(&q[d]).map(|(x, y)| a * x + y).collect());
        let (sp, sq, sc) = (fit(&grid, &p), fit(&grid, &q), fit(&grid, &combo));
        for ((cp, cq), cc) in sp.coeffs().iter().zip(sq.coeffs()).zip(sc.coeffs()) {
            for m in 0..4 {
                for n in 0..4 {
                    let expect = a * cp[m][n] + cq[m][n];
                    prop_assert!((cc[m][n] - expect).abs() <= 1e-12 * (1.0 + (a * cp[m][n]).abs() + cq[m][n].abs()));
                }
            }
        }
    }

    #[test]
    fn interpolates_nodes_and_is_c1_across_edges(
        rows in 3usize..8,
        cols in 3usize..8,
        l in 0.05f64..0.6,
        vals in prop::collection::vec(-1.0f64..1.0, 40..80),
        t in 0.0f64..1.0,
    ) {
        let grid = Grid::new(rows, cols, l).unwrap();
        let p = random_planes(rows, cols, &vals);
        let s = fit(&grid, &p);
        let scale = p[0].iter().fold(1e-3f64, |m, v| m.max(v.abs()));
        for i in 0..rows {
            for j in 0..cols {
                let (x, y) = grid.position(i, j);
                prop_assert!((s.evaluate(x, y).unwrap() - p[0][grid.index(i, j)]).abs() <= 1e-12 * scale);
            }
        }
        // Vertical edges between patch (i-1, j) and (i, j): value and both
        // first derivatives agree from either side.
        for i in 1..rows - 1 {
            for j in 0..cols - 1 {
                let ty = t * l;
                let left = [(0, 0), (1, 0), (0, 1)].map(|(ox, oy)| s.patch_derivative(i - 1, j, l, ty, ox, oy));
                let right = [(0, 0), (1, 0), (0, 1)].map(|(ox, oy)| s.patch_derivative(i, j, 0.0, ty, ox, oy));
                for (a, b) in left.iter().zip(&right) {
                    prop_assert!((a - b).abs() <= 1e-9 * scale / l, "{a} vs {b}");
                }
            }
        }
        for i in 0..rows - 1 {
            for j in 1..cols - 1 {
                let tx = t * l;
                let below = [(0, 0), (1, 0), (0, 1)].map(|(ox, oy)| s.patch_derivative(i, j - 1, tx, l, ox, oy));
                let above = [(0, 0), (1, 0), (0, 1)].map(|(ox, oy)| s.patch_derivative(i, j, tx, 0.0, ox, oy));
                for (a, b) in below.iter().zip(&above) {
                    prop_assert!((a - b).abs() <= 1e-9 * scale / l, "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn per_variable_cubics_are_exact(
        c in prop::collection::vec(-1.0f64..1.0, 16),
        rows in 2usize..8,
        cols in 2usize..8,
        l in 0.05f64..0.5,
    ) {
        let grid = Grid::new(rows, cols, l).unwrap();
        let d = |p: usize, o: usize, z: f64| -> f64 {
            if o > p { return 0.0; }
            let k: f64 = ((p - o + 1)..=p).map(|v| v as f64).product();
            k * z.powi((p - o) as i32)
        };
        let f = |x: f64, y: f64, ox: usize, oy: usize| -> f64 {
            (0..16).map(|n| c[n] * d(n / 4, ox, x) * d(n % 4, oy, y)).sum()
        };
        let p = planes(&grid, |x, y| [f(x, y, 0, 0), f(x, y, 1, 0), f(x, y, 0, 1), f(x, y, 1, 1)]);
        let s = fit(&grid, &p);
        let scale = p[0].iter().fold(1e-6f64, |m, v| m.max(v.abs()));
        for (x, y) in probes(&grid, 60, rows as u64) {
            prop_assert!((s.evaluate(x, y).unwrap() - f(x, y, 0, 0)).abs() <= 1e-9 * scale);
        }
    }
}

#[test]
fn out_of_domain_policy() {
    let grid = Grid::new(4, 4, 0.1).unwrap();
    let n = grid.len();
    let vals: Vec<f64> = (0..n).map(|m| m as f64).collect();
    let s = fit_spline(&grid, &vals, &vec![0.0; n], &vec![0.0; n], &vec![0.0; n]).unwrap();
    assert!(s.evaluate(1.0, 0.0).is_err());
    let (x, y) = grid.position(3, 3);
    let clamped = s.derivative(x + 5.0, y + 5.0, 0, 0, OutOfDomain::Clamp).unwrap();
    assert!((clamped - vals[grid.index(3, 3)]).abs() < 1e-12);
}
