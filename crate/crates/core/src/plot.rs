//! Plot-ready data emission: certificate surface grids, closed-loop vector
//! fields, and level-set polylines extracted by marching squares with
//! bisection-refined crossing points.

use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::verify::interval::BoxRegion;

/// Row-major `(x1, x2, w)` samples over an `n × n` mesh of the box.
pub fn grid_values(
    w: impl Fn(&[f64]) -> f64,
    region: &BoxRegion,
    n: usize,
) -> Vec<(f64, f64, f64)> {
    assert!(n >= 2 && region.dim() == 2);
    let mut rows = Vec::with_capacity(n * n);
    for i in 0..n {
        let x1 = lerp(region.dims[0].lo, region.dims[0].hi, i as f64 / (n - 1) as f64);
        for j in 0..n {
            let x2 = lerp(region.dims[1].lo, region.dims[1].hi, j as f64 / (n - 1) as f64);
            rows.push((x1, x2, w(&[x1, x2])));
        }
    }
    rows
}

pub fn write_grid_csv(path: &Path, rows: &[(f64, f64, f64)]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "x1,x2,W")?;
    for (x1, x2, w) in rows {
        writeln!(out, "{x1},{x2},{w}")?;
    }
    Ok(())
}

/// `(x1, x2, f1, f2)` samples of the closed-loop field on a coarse mesh.
pub fn vector_field(
    field: impl Fn(&[f64]) -> Vec<f64>,
    region: &BoxRegion,
    n: usize,
) -> Vec<(f64, f64, f64, f64)> {
    assert!(n >= 2 && region.dim() == 2);
    let mut rows = Vec::with_capacity(n * n);
    for i in 0..n {
        let x1 = lerp(region.dims[0].lo, region.dims[0].hi, i as f64 / (n - 1) as f64);
        for j in 0..n {
            let x2 = lerp(region.dims[1].lo, region.dims[1].hi, j as f64 / (n - 1) as f64);
            let f = field(&[x1, x2]);
            rows.push((x1, x2, f[0], f[1]));
        }
    }
    rows
}

pub fn write_vector_field_csv(path: &Path, rows: &[(f64, f64, f64, f64)]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "x1,x2,f1,f2")?;
    for (x1, x2, f1, f2) in rows {
        writeln!(out, "{x1},{x2},{f1},{f2}")?;
    }
    Ok(())
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

/// Bisect along the segment between an inside and an outside point until
/// the level is hit within `tol`.
fn refine_crossing(
    w: &impl Fn(&[f64]) -> f64,
    c: f64,
    mut inside: [f64; 2],
    mut outside: [f64; 2],
    tol: f64,
) -> [f64; 2] {
    let mut mid = inside;
    for _ in 0..80 {
        mid = [0.5 * (inside[0] + outside[0]), 0.5 * (inside[1] + outside[1])];
        let v = w(&mid);
        if (v - c).abs() <= tol {
            break;
        }
        if v < c {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    mid
}

/// Marching squares over an `n × n` mesh: line segments of the level set
/// `{w = c}`, vertices refined to `|w − c| ≤ tol`. Saddle cells are
/// disambiguated by the center sample.
pub fn level_segments(
    w: impl Fn(&[f64]) -> f64,
    region: &BoxRegion,
    n: usize,
    c: f64,
    tol: f64,
) -> Vec<[[f64; 2]; 2]> {
    assert!(n >= 2 && region.dim() == 2);
    let xs: Vec<f64> = (0..n)
        .map(|i| lerp(region.dims[0].lo, region.dims[0].hi, i as f64 / (n - 1) as f64))
        .collect();
    let ys: Vec<f64> = (0..n)
        .map(|j| lerp(region.dims[1].lo, region.dims[1].hi, j as f64 / (n - 1) as f64))
        .collect();
    let vals: Vec<Vec<f64>> = xs
        .iter()
        .map(|&x| ys.iter().map(|&y| w(&[x, y])).collect())
        .collect();

    let mut segments = Vec::new();
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            // corners counterclockwise from bottom-left
            let corner = [
                [xs[i], ys[j]],
                [xs[i + 1], ys[j]],
                [xs[i + 1], ys[j + 1]],
                [xs[i], ys[j + 1]],
            ];
            let v = [
                vals[i][j],
                vals[i + 1][j],
                vals[i + 1][j + 1],
                vals[i][j + 1],
            ];
            let mut case = 0usize;
            for (k, &vk) in v.iter().enumerate() {
                if vk < c {
                    case |= 1 << k;
                }
            }
            if case == 0 || case == 15 {
                continue;
            }
            // edge k joins corner k and corner (k+1) % 4
            let cross = |k: usize| -> [f64; 2] {
                let (a, b) = (k, (k + 1) % 4);
                if v[a] < c {
                    refine_crossing(&w, c, corner[a], corner[b], tol)
                } else {
                    refine_crossing(&w, c, corner[b], corner[a], tol)
                }
            };
            let center_inside = {
                let cx = 0.5 * (xs[i] + xs[i + 1]);
                let cy = 0.5 * (ys[j] + ys[j + 1]);
                w(&[cx, cy]) < c
            };
            let pairs: &[(usize, usize)] = match case {
                1 => &[(3, 0)],
                2 => &[(0, 1)],
                3 => &[(3, 1)],
                4 => &[(1, 2)],
                5 => {
                    if center_inside {
                        &[(0, 1), (2, 3)]
                    } else {
                        &[(3, 0), (1, 2)]
                    }
                }
                6 => &[(0, 2)],
                7 => &[(3, 2)],
                8 => &[(2, 3)],
                9 => &[(0, 2)],
                10 => {
                    if center_inside {
                        &[(3, 0), (1, 2)]
                    } else {
                        &[(0, 1), (2, 3)]
                    }
                }
                11 => &[(1, 2)],
                12 => &[(3, 1)],
                13 => &[(0, 1)],
                14 => &[(3, 0)],
                _ => &[],
            };
            for &(e0, e1) in pairs {
                segments.push([cross(e0), cross(e1)]);
            }
        }
    }
    segments
}

pub fn write_level_csv(path: &Path, segments: &[[[f64; 2]; 2]]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "segment,x1,x2")?;
    for (k, seg) in segments.iter().enumerate() {
        for p in seg {
            writeln!(out, "{k},{},{}", p[0], p[1])?;
        }
    }
    Ok(())
}
