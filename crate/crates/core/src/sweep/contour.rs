use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::table::SweepTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub level: f64,
    /// `(axis0, axis1)` coordinates, i.e. `(θi, θf)` for state grids.
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
}

/// Edge of the grid lattice: horizontal `(i, j)`–`(i, j+1)` or vertical `(i, j)`–`(i+1, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

/// Marching-squares level set of `field` on a two-axis table.
///
/// A vertex counts as above the level when `v − level > 1e-12·max(1, |level|)`,
/// so plateaus sitting exactly on the level produce no curve. Cells touching a
/// NaN vertex are skipped.
pub fn boundary_curves_of(t: &SweepTable, field: &str, level: f64) -> Result<Vec<BoundaryCurve>> {
    if t.axes.len() != 2 {
        return Err(Error::InvalidConfig(format!(
            "boundary curves need a two-axis table, got {} axes",
            t.axes.len()
        )));
    }
    let values = t
        .field(field)
        .ok_or_else(|| Error::NotFound(format!("field {field} in table {}", t.id)))?;
    let (xs, ys) = (&t.axes[0].values, &t.axes[1].values);
    let (nx, ny) = (xs.len(), ys.len());
    let v = |i: usize, j: usize| values[i * ny + j];
    let snap = 1e-12 * level.abs().max(1.0);
    let above = |x: f64| x - level > snap;

    let point_on = |e: Edge| -> (f64, f64) {
        let ((i0, j0), (i1, j1)) = match e {
            Edge::H(i, j) => ((i, j), (i, j + 1)),
            Edge::V(i, j) => ((i, j), (i + 1, j)),
        };
        let (a, b) = (v(i0, j0), v(i1, j1));
        let s = if a == b {
            0.5
        } else {
            ((level - a) / (b - a)).clamp(0.0, 1.0)
        };
        (xs[i0] + s * (xs[i1] - xs[i0]), ys[j0] + s * (ys[j1] - ys[j0]))
    };

    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for i in 0..nx.saturating_sub(1) {
        for j in 0..ny.saturating_sub(1) {
            let corners = [v(i, j), v(i, j + 1), v(i + 1, j + 1), v(i + 1, j)];
            if corners.iter().any(|c| c.is_nan()) {
                continue;
            }
            let code = corners
                .iter()
                .enumerate()
                .fold(0u8, |acc, (k, c)| acc | ((above(*c) as u8) << k));
            // Edges in corner order: bottom (0-1), right (1-2), top (3-2), left (0-3).
            let bottom = Edge::H(i, j);
            let right = Edge::V(i, j + 1);
            let top = Edge::H(i + 1, j);
            let left = Edge::V(i, j);
            let centre_above = above(corners.iter().sum::<f64>() / 4.0);
            match code {
                0 | 15 => {}
                1 | 14 => segments.push((left, bottom)),
                2 | 13 => segments.push((bottom, right)),
                3 | 12 => segments.push((left, right)),
                4 | 11 => segments.push((right, top)),
                6 | 9 => segments.push((bottom, top)),
                7 | 8 => segments.push((left, top)),
                5 => {
                    if centre_above {
                        segments.push((left, top));
                        segments.push((bottom, right));
                    } else {
                        segments.push((left, bottom));
                        segments.push((right, top));
                    }
                }
                10 => {
                    if centre_above {
                        segments.push((left, bottom));
                        segments.push((right, top));
                    } else {
                        segments.push((left, top));
                        segments.push((bottom, right));
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    let mut adjacency: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        adjacency.entry(*a).or_default().push(k);
        adjacency.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut curves = Vec::new();
    let other = |k: usize, e: Edge| {
        if segments[k].0 == e {
            segments[k].1
        } else {
            segments[k].0
        }
    };
    let next_segment = |e: Edge, used: &[bool]| adjacency[&e].iter().copied().find(|&k| !used[k]);

    // Open chains start at edges touched by a single segment; ordered scan keeps output deterministic.
    let mut starts: Vec<usize> = (0..segments.len()).collect();
    starts.sort_by_key(|&k| {
        let (a, b) = segments[k];
        !(adjacency[&a].len() == 1 || adjacency[&b].len() == 1)
    });
    for s in starts {
        if used[s] {
            continue;
        }
        let (a, b) = segments[s];
        let start = if adjacency[&b].len() == 1 && adjacency[&a].len() != 1 {
            b
        } else {
            a
        };
        let mut chain = vec![start];
        let mut cur = start;
        let mut k = s;
        loop {
            used[k] = true;
            cur = other(k, cur);
            chain.push(cur);
            match next_segment(cur, &used) {
                Some(n) => k = n,
                None => break,
            }
        }
        let closed = chain.len() > 2 && chain.first() == chain.last();
        curves.push(BoundaryCurve {
            level,
            points: chain.into_iter().map(point_on).collect(),
            closed,
        });
    }
    Ok(curves)
}

/// Level set of `wv_abs`.
pub fn boundary_curves(t: &SweepTable, level: f64) -> Result<Vec<BoundaryCurve>> {
    boundary_curves_of(t, "wv_abs", level)
}
