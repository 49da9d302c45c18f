//! Helmholtz-equation loss of a bicubic spline interpolant.
//!
//! For a patch polynomial `h(x, y) = g(x)ᵀ A g(y)` on an `l × l` square, the
//! squared residual `|(Δ + k²) h|²` integrates in closed form to a quadratic
//! form in `A` built from three Gram matrices of the monomial basis on `[0, l]`:
//!
//! ```text
//! C1 = ∫ g gᵀ,   C2 = ∫ g'' g''ᵀ,   C3 = ∫ g'' gᵀ
//! ```
//!
//! Writing `⟨X, Y⟩_A = Σ (A X Aᵀ) ∘ Y` (elementwise product, then sum), the
//! integral is
//!
//! ```text
//! ⟨C1, C2⟩ + ⟨C2, C1⟩ + k⁴⟨C1, C1⟩ + 2⟨C3ᵀ, C3⟩ + 2k²⟨C3, C1⟩ + 2k²⟨C1, C3ᵀ⟩
//! ```

use crate::error::{Error, Result};
use crate::field::{Channel, OutputTensor};
use crate::quadrature::gauss_legendre_on;
use crate::spline::{fit_spline_adjoint, interpolate_output, SplineField, SplinePatchSet};
use crate::Mat4;

/// Gram matrices of `g` and `g''` over `[0, l]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CMatrices {
    pub c1: Mat4,
    pub c2: Mat4,
    pub c3: Mat4,
    pub spacing: f64,
}

pub fn c_matrices(l: f64) -> Result<CMatrices> {
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::InvalidArgument(format!("patch side must be positive, got {l}")));
    }
    let mut c1 = [[0.0; 4]; 4];
    for (m, row) in c1.iter_mut().enumerate() {
        for (n, v) in row.iter_mut().enumerate() {
            let p = (m + n + 1) as i32;
            *v = l.powi(p) / p as f64;
        }
    }
    let (l2, l3, l4, l5) = (l * l, l.powi(3), l.powi(4), l.powi(5));
    let mut c2 = [[0.0; 4]; 4];
    c2[2][2] = 4.0 * l;
    c2[2][3] = 6.0 * l2;
    c2[3][2] = 6.0 * l2;
    c2[3][3] = 12.0 * l3;
    let mut c3 = [[0.0; 4]; 4];
    c3[2] = [2.0 * l, l2, 2.0 * l3 / 3.0, l4 / 2.0];
    c3[3] = [3.0 * l2, 2.0 * l3, 1.5 * l4, 6.0 * l5 / 5.0];
    Ok(CMatrices { c1, c2, c3, spacing: l })
}

fn transpose(a: &Mat4) -> Mat4 {
    let mut t = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            t[j][i] = a[i][j];
        }
    }
    t
}

/// `Σ_{a,b,c,d} Y[a][c] A[a][b] X[b][d] A[c][d]`, i.e. `sum((A X Aᵀ) ∘ Y)`.
fn weighted_gram(a: &Mat4, x: &Mat4, y: &Mat4) -> f64 {
    // t = A X
    let mut t = [[0.0; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            t[r][c] = (0..4).map(|k| a[r][k] * x[k][c]).sum();
        }
    }
    let mut s = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            if y[r][c] == 0.0 {
                continue;
            }
            let tac: f64 = (0..4).map(|k| t[r][k] * a[c][k]).sum();
            s += y[r][c] * tac;
        }
    }
    s
}

/// Gradient of [`weighted_gram`] in `A`: `Y A Xᵀ + Yᵀ A X`, accumulated with weight `w`.
fn weighted_gram_grad(a: &Mat4, x: &Mat4, y: &Mat4, w: f64, out: &mut Mat4) {
    let mut ax = [[0.0; 4]; 4];
    let mut axt = [[0.0; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            ax[r][c] = (0..4).map(|k| a[r][k] * x[k][c]).sum();
            axt[r][c] = (0..4).map(|k| a[r][k] * x[c][k]).sum();
        }
    }
    for r in 0..4 {
        for c in 0..4 {
            let v: f64 = (0..4).map(|k| y[r][k] * axt[k][c] + y[k][r] * ax[k][c]).sum();
            out[r][c] += w * v;
        }
    }
}

/// The six terms of the closed-form patch integral, in the order listed in the
/// module docs.
pub fn patch_he_terms(a: &Mat4, cm: &CMatrices, k: f64) -> [f64; 6] {
    let (k2, k4) = (k * k, k.powi(4));
    let c3t = transpose(&cm.c3);
    [
        weighted_gram(a, &cm.c1, &cm.c2),
        weighted_gram(a, &cm.c2, &cm.c1),
        k4 * weighted_gram(a, &cm.c1, &cm.c1),
        2.0 * weighted_gram(a, &c3t, &cm.c3),
        2.0 * k2 * weighted_gram(a, &cm.c3, &cm.c1),
        2.0 * k2 * weighted_gram(a, &cm.c1, &c3t),
    ]
}

/// `∫_patch |(Δ + k²) g(x)ᵀ A g(y)|² dx dy` over an `l × l` patch.
pub fn patch_he_integral(a: &Mat4, cm: &CMatrices, k: f64) -> f64 {
    // Clamp tiny negative roundoff of a nonnegative quadratic form.
    patch_he_terms(a, cm, k).iter().sum::<f64>().max(0.0)
}

/// Gradient of [`patch_he_integral`] with respect to `A`.
pub fn patch_he_gradient(a: &Mat4, cm: &CMatrices, k: f64) -> Mat4 {
    let (k2, k4) = (k * k, k.powi(4));
    let c3t = transpose(&cm.c3);
    let mut g = [[0.0; 4]; 4];
    weighted_gram_grad(a, &cm.c1, &cm.c2, 1.0, &mut g);
    weighted_gram_grad(a, &cm.c2, &cm.c1, 1.0, &mut g);
    weighted_gram_grad(a, &cm.c1, &cm.c1, k4, &mut g);
    weighted_gram_grad(a, &c3t, &cm.c3, 2.0, &mut g);
    weighted_gram_grad(a, &cm.c3, &cm.c1, 2.0 * k2, &mut g);
    weighted_gram_grad(a, &cm.c1, &c3t, 2.0 * k2, &mut g);
    g
}

fn patchset_integral(set: &SplinePatchSet, cm: &CMatrices, k: f64) -> f64 {
    set.coeffs().iter().map(|a| patch_he_integral(a, cm, k)).sum()
}

/// Area-normalised Helmholtz residual energy of the interpolant.
pub fn he_loss(field: &SplineField, k: f64) -> Result<f64> {
    let grid = field.grid();
    let cm = c_matrices(grid.spacing())?;
    let total = patchset_integral(&field.re, &cm, k) + patchset_integral(&field.im, &cm, k);
    Ok(total / grid.area())
}

/// Same quantity as [`he_loss`] by tensor Gauss–Legendre quadrature of the
/// spline residual on every patch.
pub fn he_loss_quadrature(field: &SplineField, k: f64, points_per_axis: usize) -> Result<f64> {
    if points_per_axis < 4 {
        return Err(Error::InvalidArgument(format!(
            "quadrature needs at least 4 points per axis, got {points_per_axis}"
        )));
    }
    let grid = field.grid();
    let (t, w) = gauss_legendre_on(points_per_axis, 0.0, grid.spacing());
    let k2 = k * k;
    let mut total = 0.0;
    for set in [&field.re, &field.im] {
        for i in 0..grid.rows() - 1 {
            for j in 0..grid.cols() - 1 {
                for (tx, wx) in t.iter().zip(&w) {
                    for (ty, wy) in t.iter().zip(&w) {
                        let r = set.patch_laplacian(i, j, *tx, *ty) + k2 * set.patch_value(i, j, *tx, *ty);
                        total += wx * wy * r * r;
                    }
                }
            }
        }
    }
    Ok(total / grid.area())
}

/// Loss and its gradient with respect to every entry of the output tensor.
/// Derivative-channel entries off their constraint sets get zero gradient.
pub fn he_loss_and_gradient(out: &OutputTensor, k: f64) -> Result<(f64, OutputTensor)> {
    let grid = *out.grid();
    let field = interpolate_output(out)?;
    let cm = c_matrices(grid.spacing())?;
    let inv_area = 1.0 / grid.area();
    let mut loss = 0.0;
    let mut grad = OutputTensor::zeros(grid);
    let groups = [
        (&field.re, [Channel::Re, Channel::DxRe, Channel::DyRe, Channel::DxyRe]),
        (&field.im, [Channel::Im, Channel::DxIm, Channel::DyIm, Channel::DxyIm]),
    ];
    for (set, channels) in groups {
        loss += patchset_integral(set, &cm, k);
        let coeff_bar: Vec<Mat4> = set
            .coeffs()
            .iter()
            .map(|a| {
                let mut g = patch_he_gradient(a, &cm, k);
                g.iter_mut().flatten().for_each(|v| *v *= inv_area);
                g
            })
            .collect();
        let planes = fit_spline_adjoint(&grid, &coeff_bar);
        for (c, plane) in channels.into_iter().zip(planes) {
            grad.channel_mut(c).copy_from_slice(&plane);
        }
    }
    Ok((loss * inv_area, grad))
}

pub fn he_loss_gradient(out: &OutputTensor, k: f64) -> Result<OutputTensor> {
    he_loss_and_gradient(out, k).map(|(_, g)| g)
}
