//! Singular squares: the `M²` squares of side `1/M` centred at `k/M` whose centre has more than
//! `7/8` of its phases `cos(2π⟨λ, x⟩)` above `3/4` (positive) or below `-3/4` (negative).
//!
//! Only the centre is tested. With `M ≥ 8√2π√n` each phase moves by at most `1/4` inside a
//! square, which keeps `|r| ≥ 5/16` on every flagged square.

use std::f64::consts::{PI, SQRT_2, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ArwError, Result};
use crate::lattice::FrequencySet;

/// `meas(flagged) ≤ (16/5)⁶ R₆`, Chebyshev on `|r| ≥ 5/16`.
pub const CHEBYSHEV_CONSTANT: f64 = 1_073.741_824;

/// Fitted `C` in `meas(flagged) ≤ C·R₆`; observed ratios are about 0.5 and below.
pub const SINGULAR_MEASURE_FIT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SquareSign {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSetReport {
    pub n: u64,
    pub grid_m: usize,
    pub singular_square_count: usize,
    pub positive_count: usize,
    pub negative_count: usize,
    pub measure_estimate: f64,
    /// `min |r(centre)|` over flagged squares; `None` when nothing is flagged.
    pub min_abs_r_on_b: Option<f64>,
    /// Flagged squares as `(j, k, sign)`, row-major.
    pub squares: Vec<(usize, usize, SquareSign)>,
}

impl SingularSetReport {
    pub fn is_singular(&self, j: usize, k: usize) -> bool {
        self.squares
            .binary_search_by(|&(a, b, _)| (a, b).cmp(&(j, k)))
            .is_ok()
    }
}

/// `⌈8√2·π·√n⌉`.
pub fn min_singular_grid(freqs: &FrequencySet) -> usize {
    (8.0 * SQRT_2 * PI * (freqs.n() as f64).sqrt()).ceil() as usize
}

pub fn singular_set(freqs: &FrequencySet, grid_m: usize) -> Result<SingularSetReport> {
    let required = min_singular_grid(freqs);
    if grid_m < required {
        return Err(ArwError::GridTooSmall {
            required,
            got: grid_m,
        });
    }
    let m = grid_m as i64;
    // cos(2π⟨λ, k/M⟩) depends only on ⟨λ, k⟩ mod M
    let table: Vec<f64> = (0..grid_m)
        .map(|i| (TAU * i as f64 / grid_m as f64).cos())
        .collect();
    let pts = freqs.points();
    let nf = pts.len();
    let per_row: Vec<Vec<(usize, SquareSign, f64)>> = (0..grid_m)
        .into_par_iter()
        .map(|j| {
            let mut row = Vec::new();
            for k in 0..grid_m {
                let (mut above, mut below, mut sum) = (0usize, 0usize, 0.0);
                for &[a, b] in pts {
                    let phase = (a * j as i64 + b * k as i64).rem_euclid(m) as usize;
                    let c = table[phase];
                    sum += c;
                    if c > 0.75 {
                        above += 1;
                    } else if c < -0.75 {
                        below += 1;
                    }
                }
                // density strictly above 7/8
                if 8 * above > 7 * nf {
                    row.push((k, SquareSign::Positive, sum / nf as f64));
                } else if 8 * below > 7 * nf {
                    row.push((k, SquareSign::Negative, sum / nf as f64));
                }
            }
            row
        })
        .collect();
    let mut squares = Vec::new();
    let mut min_abs_r: Option<f64> = None;
    for (j, row) in per_row.into_iter().enumerate() {
        for (k, sign, r) in row {
            squares.push((j, k, sign));
            min_abs_r = Some(min_abs_r.map_or(r.abs(), |v| v.min(r.abs())));
        }
    }
    let positive_count = squares
        .iter()
        .filter(|s| s.2 == SquareSign::Positive)
        .count();
    let count = squares.len();
    Ok(SingularSetReport {
        n: freqs.n(),
        grid_m,
        singular_square_count: count,
        positive_count,
        negative_count: count - positive_count,
        measure_estimate: count as f64 / (grid_m * grid_m) as f64,
        min_abs_r_on_b: min_abs_r,
        squares,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::enumerate_lambda;

    #[test]
    fn origin_is_positive_singular() {
        let l = enumerate_lambda(25).unwrap();
        let m = min_singular_grid(&l);
        let rep = singular_set(&l, m).unwrap();
        assert!(rep.is_singular(0, 0));
        assert!(rep.min_abs_r_on_b.unwrap() >= 5.0 / 16.0);
        assert!(matches!(
            singular_set(&l, m - 1),
            Err(ArwError::GridTooSmall { .. })
        ));
    }

    #[test]
    fn chebyshev_constant_value() {
        assert!((CHEBYSHEV_CONSTANT - (16.0f64 / 5.0).powi(6)).abs() < 1e-9);
    }
}
