//! Marching squares on the torus grid.
//!
//! Cell `(j, k)` has corners `(j,k)`, `(j+1,k)`, `(j+1,k+1)`, `(j,k+1)` taken mod `M`. A cell
//! with four sign changes is a saddle; the sign of the field at the cell centre decides which
//! pair of corners the nodal line separates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::FieldGrid;
use crate::error::{ArwError, Result};
use crate::stats::pairwise_sum;
use crate::trig_grid::eval_point;

/// How the crossing on a sign-changing edge is placed and how a segment is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingRule {
    /// Linear interpolation of the corner values; segment length is the chord.
    Linear,
    /// Root of the field on the edge; the chord is corrected by the curvature of the level
    /// line, `c(1 + κ²c²/24)`.
    #[default]
    Refined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodalSegment {
    /// Endpoints reduced to `[0,1)²`.
    pub p: [f64; 2],
    pub q: [f64; 2],
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalExtraction {
    pub segments: Vec<NodalSegment>,
    /// Sum of the segment lengths.
    pub total_length: f64,
    /// Number of saddle cells resolved by the centre value.
    pub saddle_cells: usize,
}

const ROOT_TOL: f64 = 1e-13;
const ROOT_MAX_ITER: usize = 60;

/// Illinois regula falsi for `g` on `[0, 1]` with `g(0) = g0`, `g(1) = g1` of opposite sign.
fn edge_root(g: impl Fn(f64) -> f64, g0: f64, g1: f64) -> f64 {
    let (mut a, mut b, mut fa, mut fb) = (0.0, 1.0, g0, g1);
    let mut side = 0i8;
    for _ in 0..ROOT_MAX_ITER {
        let t = (a * fb - b * fa) / (fb - fa);
        let ft = g(t);
        if ft == 0.0 || b - a < ROOT_TOL {
            return t;
        }
        if (ft > 0.0) == (fa > 0.0) {
            a = t;
            fa = ft;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = t;
            fb = ft;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    (a * fb - b * fa) / (fb - fa)
}

fn wrap(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

pub fn nodal_length(grid: &FieldGrid) -> Result<NodalExtraction> {
    nodal_length_with(grid, CrossingRule::default())
}

pub fn nodal_length_with(grid: &FieldGrid, rule: CrossingRule) -> Result<NodalExtraction> {
    let m = grid.m;
    if let Some(idx) = grid.values.iter().position(|&v| v == 0.0) {
        return Err(ArwError::ExactZero {
            j: idx / m,
            k: idx % m,
        });
    }
    let h = 1.0 / m as f64;
    let terms = grid.terms();
    let val = |x: [f64; 2]| eval_point(&terms, x);
    let crossing = |v0: f64, v1: f64, base: [f64; 2], dir: usize| -> Option<f64> {
        if (v0 > 0.0) == (v1 > 0.0) {
            return None;
        }
        Some(match rule {
            CrossingRule::Linear => v0 / (v0 - v1),
            CrossingRule::Refined => edge_root(
                |t| {
                    let mut x = base;
                    x[dir] += t * h;
                    val(x)
                },
                v0,
                v1,
            ),
        })
    };
    // horiz[j*M + k]: edge (j,k)-(j+1,k); vert[j*M + k]: edge (j,k)-(j,k+1)
    let edges: Vec<(Option<f64>, Option<f64>)> = (0..m * m)
        .into_par_iter()
        .map(|idx| {
            let (j, k) = (idx / m, idx % m);
            let base = [j as f64 * h, k as f64 * h];
            let v = grid.at(j, k);
            (
                crossing(v, grid.at(j + 1, k), base, 0),
                crossing(v, grid.at(j, k + 1), base, 1),
            )
        })
        .collect();
    let horiz = |j: usize, k: usize| edges[(j % m) * m + (k % m)].0;
    let vert = |j: usize, k: usize| edges[(j % m) * m + (k % m)].1;

    let measure = |p: [f64; 2], q: [f64; 2]| -> f64 {
        let chord = (q[0] - p[0]).hypot(q[1] - p[1]);
        match rule {
            CrossingRule::Linear => chord,
            CrossingRule::Refined => {
                let jet = grid.jet([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                let [fx, fy] = jet.grad;
                let g2 = fx * fx + fy * fy;
                if g2 == 0.0 {
                    return chord;
                }
                let hs = jet.hess;
                let kappa = (hs[1][1] * fx * fx - 2.0 * hs[0][1] * fx * fy + hs[0][0] * fy * fy)
                    .abs()
                    / g2.powf(1.5);
                chord * (1.0 + kappa * kappa * chord * chord / 24.0)
            }
        }
    };

    let per_cell: Vec<(Vec<NodalSegment>, bool)> = (0..m * m)
        .into_par_iter()
        .map(|idx| {
            let (j, k) = (idx / m, idx % m);
            let (x0, y0) = (j as f64 * h, k as f64 * h);
            // crossing points on bottom, right, top, left, unwrapped around the cell
            let pts = [
                horiz(j, k).map(|t| [x0 + t * h, y0]),
                vert(j + 1, k).map(|t| [x0 + h, y0 + t * h]),
                horiz(j, k + 1).map(|t| [x0 + t * h, y0 + h]),
                vert(j, k).map(|t| [x0, y0 + t * h]),
            ];
            let found: Vec<usize> = (0..4).filter(|&e| pts[e].is_some()).collect();
            let pairs: Vec<(usize, usize)> = match found.len() {
                0 => Vec::new(),
                2 => vec![(found[0], found[1])],
                _ => {
                    let centre = val([x0 + 0.5 * h, y0 + 0.5 * h]);
                    if (centre > 0.0) == (grid.at(j, k) > 0.0) {
                        // (j,k) and (j+1,k+1) joined through the centre: cut off the other two
                        vec![(0, 1), (2, 3)]
                    } else {
                        vec![(3, 0), (1, 2)]
                    }
                }
            };
            let segs = pairs
                .into_iter()
                .map(|(a, b)| {
                    let (p, q) = (pts[a].unwrap(), pts[b].unwrap());
                    NodalSegment {
                        p: [wrap(p[0]), wrap(p[1])],
                        q: [wrap(q[0]), wrap(q[1])],
                        length: measure(p, q),
                    }
                })
                .collect();
            (segs, found.len() == 4)
        })
        .collect();
    let saddle_cells = per_cell.iter().filter(|c| c.1).count();
    let segments: Vec<NodalSegment> = per_cell.into_iter().flat_map(|c| c.0).collect();
    let lengths: Vec<f64> = segments.iter().map(|s| s.length).collect();
    Ok(NodalExtraction {
        total_length: pairwise_sum(&lengths),
        segments,
        saddle_cells,
    })
}
