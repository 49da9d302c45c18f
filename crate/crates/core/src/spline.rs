//! Bicubic spline interpolation of gridded values with prescribed boundary
//! derivatives.
//!
//! Each patch `[x_i, x_{i+1}] × [y_j, y_{j+1}]` carries a 4×4 coefficient
//! matrix `A_{i,j}` so that
//!
//! ```text
//! h_{i,j}(x, y) = g(x - x_i)ᵀ A_{i,j} g(y - y_j),   g(z) = [1, z, z², z³]ᵀ
//! ```
//!
//! The fit needs the values at every node, `∂x` on the two `x`-ends
//! (`i = 0, I-1`), `∂y` on the two `y`-ends (`j = 0, J-1`) and `∂x∂y` at the
//! four corners. Node derivatives everywhere else come from clamped 1D cubic
//! spline sweeps:
//!
//! 1. `∂x` along every line of constant `j`, clamped by the `x`-end slopes.
//! 2. `∂y` along every line of constant `i`, clamped by the `y`-end slopes.
//! 3. `∂x∂y` on the two `x`-end lines: spline the `∂x` values along `y`,
//!    clamped by the corner cross-derivatives.
//! 4. `∂x∂y` in the interior: spline `∂y` along `x`, clamped by step 3.
//!
//! Each patch then converts its 16 corner Hermite values to the power basis.
//! The whole map from inputs to coefficients is linear; [`fit_spline_adjoint`]
//! applies its transpose.

use crate::error::{Error, Result};
use crate::field::{Channel, OutputTensor};
use crate::grid::Grid;
use crate::tridiag;
use crate::Mat4;

/// What to do with evaluation points outside the grid domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutOfDomain {
    #[default]
    Error,
    /// Evaluate the nearest patch at the projected point.
    Clamp,
}

/// Bicubic patches for one real plane.
#[derive(Debug, Clone, PartialEq)]
pub struct SplinePatchSet {
    grid: Grid,
    coeffs: Vec<Mat4>,
}

/// Real and imaginary interpolants on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineField {
    pub re: SplinePatchSet,
    pub im: SplinePatchSet,
}

impl SplineField {
    pub fn grid(&self) -> &Grid {
        self.re.grid()
    }
}

/// Hermite data (value and derivatives) at every node.
#[derive(Debug, Clone)]
struct NodeData {
    f: Vec<f64>,
    fx: Vec<f64>,
    fy: Vec<f64>,
    fxy: Vec<f64>,
}

impl NodeData {
    fn zeros(n: usize) -> Self {
        Self { f: vec![0.0; n], fx: vec![0.0; n], fy: vec![0.0; n], fxy: vec![0.0; n] }
    }
}

/// Interior slopes of the clamped cubic spline through `values` (uniform step
/// `h`), with end slopes `start` and `end`. Returns slopes at every node.
fn clamped_slopes(values: &[f64], start: f64, end: f64, h: f64) -> Vec<f64> {
    let n = values.len();
    let mut d = vec![0.0; n];
    d[0] = start;
    d[n - 1] = end;
    if n > 2 {
        let mut rhs: Vec<f64> =
            (1..n - 1).map(|m| 3.0 * (values[m + 1] - values[m - 1]) / h).collect();
        rhs[0] -= start;
        let last = rhs.len() - 1;
        rhs[last] -= end;
        tridiag::solve_spline_system(&mut rhs);
        d[1..n - 1].copy_from_slice(&rhs);
    }
    d
}

/// Transpose of [`clamped_slopes`]: maps slope cotangents back to
/// `(values, start, end)` cotangents. The `1, 4, 1` matrix is symmetric, so
/// the transposed solve is the same solve.
fn clamped_slopes_adjoint(slopes_bar: &[f64], h: f64) -> (Vec<f64>, f64, f64) {
    let n = slopes_bar.len();
    let mut values_bar = vec![0.0; n];
    let mut start_bar = slopes_bar[0];
    let mut end_bar = slopes_bar[n - 1];
    if n > 2 {
        let mut z = slopes_bar[1..n - 1].to_vec();
        tridiag::solve_spline_system(&mut z);
        for (k, &zk) in z.iter().enumerate() {
            let m = k + 1;
            values_bar[m + 1] += 3.0 * zk / h;
            values_bar[m - 1] -= 3.0 * zk / h;
        }
        start_bar -= z[0];
        end_bar -= z[z.len() - 1];
    }
    (values_bar, start_bar, end_bar)
}

fn column(plane: &[f64], grid: &Grid, j: usize) -> Vec<f64> {
    (0..grid.rows()).map(|i| plane[grid.index(i, j)]).collect()
}

fn row<'a>(plane: &'a [f64], grid: &Grid, i: usize) -> &'a [f64] {
    &plane[grid.index(i, 0)..grid.index(i, 0) + grid.cols()]
}

fn node_data(grid: &Grid, values: &[f64], ux: &[f64], uy: &[f64], uxy: &[f64]) -> NodeData {
    let (ni, nj, h) = (grid.rows(), grid.cols(), grid.spacing());
    let mut nd = NodeData::zeros(grid.len());
    nd.f.copy_from_slice(values);

    for j in 0..nj {
        let d = clamped_slopes(
            &column(values, grid, j),
            ux[grid.index(0, j)],
            ux[grid.index(ni - 1, j)],
            h,
        );
        for (i, v) in d.into_iter().enumerate() {
            nd.fx[grid.index(i, j)] = v;
        }
    }
    for i in 0..ni {
        let d = clamped_slopes(row(values, grid, i), uy[grid.index(i, 0)], uy[grid.index(i, nj - 1)], h);
        let base = grid.index(i, 0);
        nd.fy[base..base + nj].copy_from_slice(&d);
    }
    for i in [0, ni - 1] {
        let d = clamped_slopes(
            row(&nd.fx, grid, i),
            uxy[grid.index(i, 0)],
            uxy[grid.index(i, nj - 1)],
            h,
        );
        let base = grid.index(i, 0);
        nd.fxy[base..base + nj].copy_from_slice(&d);
    }
    for j in 0..nj {
        let d = clamped_slopes(
            &column(&nd.fy, grid, j),
            nd.fxy[grid.index(0, j)],
            nd.fxy[grid.index(ni - 1, j)],
            h,
        );
        for (i, v) in d.into_iter().enumerate() {
            nd.fxy[grid.index(i, j)] = v;
        }
    }
    nd
}

/// Transpose of [`node_data`]. Returns cotangents for
/// `(values, ux, uy, uxy)`, zero outside the respective constraint sets.
fn node_data_adjoint(grid: &Grid, bar: NodeData) -> [Vec<f64>; 4] {
    let (ni, nj, h) = (grid.rows(), grid.cols(), grid.spacing());
    let NodeData { f: mut fb, fx: mut fxb, fy: mut fyb, fxy: fxyb } = bar;
    let mut ux_bar = vec![0.0; grid.len()];
    let mut uy_bar = vec![0.0; grid.len()];
    let mut uxy_bar = vec![0.0; grid.len()];

    // Step 4: interior cross-derivative sweeps.
    let mut edge_bar = vec![0.0; grid.len()];
    for j in 0..nj {
        let (vb, sb, eb) = clamped_slopes_adjoint(&column(&fxyb, grid, j), h);
        for (i, v) in vb.into_iter().enumerate() {
            fyb[grid.index(i, j)] += v;
        }
        edge_bar[grid.index(0, j)] += sb;
        edge_bar[grid.index(ni - 1, j)] += eb;
    }
    // Step 3: cross-derivatives on the x-end lines.
    for i in [0, ni - 1] {
        let (vb, sb, eb) = clamped_slopes_adjoint(row(&edge_bar, grid, i), h);
        for (j, v) in vb.into_iter().enumerate() {
            fxb[grid.index(i, j)] += v;
        }
        uxy_bar[grid.index(i, 0)] += sb;
        uxy_bar[grid.index(i, nj - 1)] += eb;
    }
    // Step 2: y slopes.
    for i in 0..ni {
        let (vb, sb, eb) = clamped_slopes_adjoint(row(&fyb, grid, i), h);
        for (j, v) in vb.into_iter().enumerate() {
            fb[grid.index(i, j)] += v;
        }
        uy_bar[grid.index(i, 0)] += sb;
        uy_bar[grid.index(i, nj - 1)] += eb;
    }
    // Step 1: x slopes.
    for j in 0..nj {
        let (vb, sb, eb) = clamped_slopes_adjoint(&column(&fxb, grid, j), h);
        for (i, v) in vb.into_iter().enumerate() {
            fb[grid.index(i, j)] += v;
        }
        ux_bar[grid.index(0, j)] += sb;
        ux_bar[grid.index(ni - 1, j)] += eb;
    }
    [fb, ux_bar, uy_bar, uxy_bar]
}

/// Maps `[p(0), p'(0), p(l), p'(l)]` to power-basis coefficients of the cubic on `[0, l]`.
pub fn hermite_to_monomial(l: f64) -> Mat4 {
    let (l2, l3) = (l * l, l * l * l);
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [-3.0 / l2, -2.0 / l, 3.0 / l2, -1.0 / l],
        [2.0 / l3, 1.0 / l2, -2.0 / l3, 1.0 / l2],
    ]
}

fn matmul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            for j in 0..4 {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
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

/// Corner Hermite data of patch `(i, j)`: rows index `[f, ∂x]` at `x_i` then
/// `x_{i+1}`, columns `[·, ∂y]` at `y_j` then `y_{j+1}`.
fn corner_matrix(grid: &Grid, nd: &NodeData, i: usize, j: usize) -> Mat4 {
    let mut f = [[0.0; 4]; 4];
    for (a, ii) in [(0, i), (2, i + 1)] {
        for (b, jj) in [(0, j), (2, j + 1)] {
            let n = grid.index(ii, jj);
            f[a][b] = nd.f[n];
            f[a][b + 1] = nd.fy[n];
            f[a + 1][b] = nd.fx[n];
            f[a + 1][b + 1] = nd.fxy[n];
        }
    }
    f
}

fn scatter_corner_matrix(grid: &Grid, nd: &mut NodeData, i: usize, j: usize, f: &Mat4) {
    for (a, ii) in [(0, i), (2, i + 1)] {
        for (b, jj) in [(0, j), (2, j + 1)] {
            let n = grid.index(ii, jj);
            nd.f[n] += f[a][b];
            nd.fy[n] += f[a][b + 1];
            nd.fx[n] += f[a + 1][b];
            nd.fxy[n] += f[a + 1][b + 1];
        }
    }
}

fn check_plane(grid: &Grid, plane: &[f64], what: &'static str) -> Result<()> {
    if plane.len() != grid.len() {
        return Err(Error::ShapeMismatch { expected: grid.len(), actual: plane.len() });
    }
    if !plane.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite(what));
    }
    Ok(())
}

/// Fits the bicubic spline. All inputs are full `I × J` planes; `ux`, `uy`
/// and `uxy` are only read on their boundary sets.
pub fn fit_spline(
    grid: &Grid,
    values: &[f64],
    ux: &[f64],
    uy: &[f64],
    uxy: &[f64],
) -> Result<SplinePatchSet> {
    check_plane(grid, values, "spline values")?;
    check_plane(grid, ux, "spline x-derivatives")?;
    check_plane(grid, uy, "spline y-derivatives")?;
    check_plane(grid, uxy, "spline cross-derivatives")?;
    let nd = node_data(grid, values, ux, uy, uxy);
    let h = hermite_to_monomial(grid.spacing());
    let ht = transpose(&h);
    let mut coeffs = Vec::with_capacity(grid.n_patches());
    for i in 0..grid.rows() - 1 {
        for j in 0..grid.cols() - 1 {
            let f = corner_matrix(grid, &nd, i, j);
            coeffs.push(matmul(&matmul(&h, &f), &ht));
        }
    }
    Ok(SplinePatchSet { grid: *grid, coeffs })
}

/// Applies the transpose of the linear map behind [`fit_spline`] to
/// per-patch coefficient cotangents. Returns `[values, ux, uy, uxy]`
/// cotangents as full planes, zero off the constraint sets.
pub fn fit_spline_adjoint(grid: &Grid, coeff_bar: &[Mat4]) -> [Vec<f64>; 4] {
    assert_eq!(coeff_bar.len(), grid.n_patches(), "one cotangent per patch");
    let h = hermite_to_monomial(grid.spacing());
    let ht = transpose(&h);
    let mut nd = NodeData::zeros(grid.len());
    for i in 0..grid.rows() - 1 {
        for j in 0..grid.cols() - 1 {
            let a_bar = &coeff_bar[grid.patch_index(i, j)];
            let f_bar = matmul(&matmul(&ht, a_bar), &h);
            scatter_corner_matrix(grid, &mut nd, i, j, &f_bar);
        }
    }
    node_data_adjoint(grid, nd)
}

/// Splines the real and imaginary channel groups of an estimator output.
pub fn interpolate_output(out: &OutputTensor) -> Result<SplineField> {
    let grid = out.grid();
    let re = fit_spline(
        grid,
        out.channel(Channel::Re),
        out.channel(Channel::DxRe),
        out.channel(Channel::DyRe),
        out.channel(Channel::DxyRe),
    )?;
    let im = fit_spline(
        grid,
        out.channel(Channel::Im),
        out.channel(Channel::DxIm),
        out.channel(Channel::DyIm),
        out.channel(Channel::DxyIm),
    )?;
    Ok(SplineField { re, im })
}

#[inline]
fn basis(z: f64, order: usize) -> [f64; 4] {
    match order {
        0 => [1.0, z, z * z, z * z * z],
        1 => [0.0, 1.0, 2.0 * z, 3.0 * z * z],
        2 => [0.0, 0.0, 2.0, 6.0 * z],
        3 => [0.0, 0.0, 0.0, 6.0],
        _ => [0.0; 4],
    }
}

#[inline]
fn bilinear(gx: &[f64; 4], a: &Mat4, gy: &[f64; 4]) -> f64 {
    let mut s = 0.0;
    for m in 0..4 {
        let mut r = 0.0;
        for n in 0..4 {
            r += a[m][n] * gy[n];
        }
        s += gx[m] * r;
    }
    s
}

impl SplinePatchSet {
    /// Wraps explicit coefficients, one matrix per patch in `(i, j)` row-major order.
    pub fn from_coeffs(grid: Grid, coeffs: Vec<Mat4>) -> Result<Self> {
        if coeffs.len() != grid.n_patches() {
            return Err(Error::ShapeMismatch { expected: grid.n_patches(), actual: coeffs.len() });
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Mat4] {
        &self.coeffs
    }

    pub fn patch(&self, i: usize, j: usize) -> &Mat4 {
        &self.coeffs[self.grid.patch_index(i, j)]
    }

    /// Owning patch and local coordinates of `(x, y)`.
    pub fn locate(&self, x: f64, y: f64, mode: OutOfDomain) -> Result<(usize, usize, f64, f64)> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::OutsideDomain { x, y });
        }
        let (x, y) = if self.grid.contains(x, y) {
            (x, y)
        } else {
            match mode {
                OutOfDomain::Error => return Err(Error::OutsideDomain { x, y }),
                OutOfDomain::Clamp => {
                    let (wx, wy) = self.grid.extent();
                    (x.clamp(-0.5 * wx, 0.5 * wx), y.clamp(-0.5 * wy, 0.5 * wy))
                }
            }
        };
        let l = self.grid.spacing();
        let (x0, y0) = self.grid.origin_offset();
        let i = (((x - x0) / l).floor().max(0.0) as usize).min(self.grid.rows() - 2);
        let j = (((y - y0) / l).floor().max(0.0) as usize).min(self.grid.cols() - 2);
        Ok((i, j, x - self.grid.x(i), y - self.grid.y(j)))
    }

    /// Mixed partial derivative `∂^{ox}_x ∂^{oy}_y h` at `(x, y)`.
    pub fn derivative(&self, x: f64, y: f64, ox: usize, oy: usize, mode: OutOfDomain) -> Result<f64> {
        let (i, j, tx, ty) = self.locate(x, y, mode)?;
        Ok(bilinear(&basis(tx, ox), self.patch(i, j), &basis(ty, oy)))
    }

    pub fn evaluate(&self, x: f64, y: f64) -> Result<f64> {
        self.derivative(x, y, 0, 0, OutOfDomain::Error)
    }

    pub fn evaluate_gradient(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let (i, j, tx, ty) = self.locate(x, y, OutOfDomain::Error)?;
        let a = self.patch(i, j);
        Ok((
            bilinear(&basis(tx, 1), a, &basis(ty, 0)),
            bilinear(&basis(tx, 0), a, &basis(ty, 1)),
        ))
    }

    pub fn evaluate_laplacian(&self, x: f64, y: f64) -> Result<f64> {
        let (i, j, tx, ty) = self.locate(x, y, OutOfDomain::Error)?;
        Ok(self.patch_laplacian(i, j, tx, ty))
    }

    /// Value of patch `(i, j)` at local coordinates, without domain checks.
    pub fn patch_value(&self, i: usize, j: usize, tx: f64, ty: f64) -> f64 {
        bilinear(&basis(tx, 0), self.patch(i, j), &basis(ty, 0))
    }

    pub fn patch_derivative(&self, i: usize, j: usize, tx: f64, ty: f64, ox: usize, oy: usize) -> f64 {
        bilinear(&basis(tx, ox), self.patch(i, j), &basis(ty, oy))
    }

    pub fn patch_laplacian(&self, i: usize, j: usize, tx: f64, ty: f64) -> f64 {
        let a = self.patch(i, j);
        bilinear(&basis(tx, 2), a, &basis(ty, 0)) + bilinear(&basis(tx, 0), a, &basis(ty, 2))
    }
}
