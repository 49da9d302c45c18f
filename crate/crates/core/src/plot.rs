//! Static plot artifacts: 8-bit portable graymap heatmaps and CSV grids.
//!
//! Image row `r` shows `y_{J-1-r}` (so `+y` points up) and column `c` shows
//! `x_c`. Values map linearly from `[-a, a]` to `[0, 254]` with
//! `a = max|v|`; zero is mid-gray (127) and observation points are drawn at
//! 255.

use crate::error::{Error, Result};
use crate::grid::Grid;

pub const MARKER: u8 = 255;
pub const MID_GRAY: u8 = 127;

/// Pixel values for a real plane, optionally marking observed nodes.
pub fn heatmap_pixels(grid: &Grid, plane: &[f64], marks: &[(usize, usize)]) -> Result<Vec<u8>> {
    if plane.len() != grid.len() {
        return Err(Error::ShapeMismatch { expected: grid.len(), actual: plane.len() });
    }
    let (ni, nj) = (grid.rows(), grid.cols());
    let amp = plane.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut px = vec![MID_GRAY; ni * nj];
    for r in 0..nj {
        let j = nj - 1 - r;
        for i in 0..ni {
            let v = plane[grid.index(i, j)];
            if amp > 0.0 {
                px[r * ni + i] = (127.0 + 127.0 * v / amp).round().clamp(0.0, 254.0) as u8;
            }
        }
    }
    for &(i, j) in marks {
        px[(nj - 1 - j) * ni + i] = MARKER;
    }
    Ok(px)
}

/// Binary (`P5`) graymap bytes.
pub fn pgm(grid: &Grid, plane: &[f64], marks: &[(usize, usize)]) -> Result<Vec<u8>> {
    let px = heatmap_pixels(grid, plane, marks)?;
    let mut out = format!("P5\n{} {}\n255\n", grid.rows(), grid.cols()).into_bytes();
    out.extend(px);
    Ok(out)
}

/// One CSV line per `i`, `J` comma-separated values in full precision.
pub fn grid_csv(grid: &Grid, plane: &[f64]) -> Result<String> {
    if plane.len() != grid.len() {
        return Err(Error::ShapeMismatch { expected: grid.len(), actual: plane.len() });
    }
    let mut s = String::new();
    for i in 0..grid.rows() {
        let row: Vec<String> = (0..grid.cols()).map(|j| format!("{:e}", plane[grid.index(i, j)])).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    Ok(s)
}

pub fn parse_grid_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Malformed(format!("bad CSV value '{v}'"))))
                .collect()
        })
        .collect()
}
