//! Exact evaluation of trigonometric polynomials `Σ c_λ e(⟨λ, x⟩)` on the uniform grid
//! `x = (j/M, k/M)`.
//!
//! `e(⟨λ, (j,k)/M⟩)` depends only on `λ mod M`, so accumulating coefficients on the
//! `M×M` frequency grid and applying an unnormalised inverse DFT is exact for any `M`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::stats::pairwise_sum;

/// Row-major `M×M` real grid, `values[j*M + k] = g(j/M, k/M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealGrid {
    pub m: usize,
    pub values: Vec<f64>,
}

impl RealGrid {
    pub fn at(&self, j: usize, k: usize) -> f64 {
        self.values[(j % self.m) * self.m + (k % self.m)]
    }

    /// Rectangle-rule torus average with pairwise summation.
    pub fn mean(&self) -> f64 {
        pairwise_sum(&self.values) / self.values.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RealGrid {
        RealGrid {
            m: self.m,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Real part of `Σ c_λ e(⟨λ, x⟩)` on the grid, via a 2-D inverse FFT.
pub fn eval_grid(m: usize, terms: &[([i64; 2], Complex64)]) -> RealGrid {
    eval_grid_complex(m, terms).map_real()
}

struct ComplexGrid {
    m: usize,
    data: Vec<Complex64>,
}

impl ComplexGrid {
    fn map_real(self) -> RealGrid {
        RealGrid {
            m: self.m,
            values: self.data.into_iter().map(|z| z.re).collect(),
        }
    }
}

fn eval_grid_complex(m: usize, terms: &[([i64; 2], Complex64)]) -> ComplexGrid {
    let mut data = vec![Complex64::new(0.0, 0.0); m * m];
    let mi = m as i64;
    for &([a, b], c) in terms {
        let j = a.rem_euclid(mi) as usize;
        let k = b.rem_euclid(mi) as usize;
        data[j * m + k] += c;
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_inverse(m);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    // along k, skipping rows with no frequencies
    for row in data.chunks_exact_mut(m) {
        if row.iter().any(|z| z.re != 0.0 || z.im != 0.0) {
            fft.process_with_scratch(row, &mut scratch);
        }
    }
    // along j, on contiguous rows of the transpose
    let mut t = transpose(&data, m);
    fft.process_with_scratch(&mut t, &mut scratch);
    data = transpose(&t, m);
    ComplexGrid { m, data }
}

fn transpose(src: &[Complex64], m: usize) -> Vec<Complex64> {
    const B: usize = 32;
    let mut out = vec![Complex64::new(0.0, 0.0); m * m];
    for jb in (0..m).step_by(B) {
        for kb in (0..m).step_by(B) {
            for j in jb..(jb + B).min(m) {
                for k in kb..(kb + B).min(m) {
                    out[k * m + j] = src[j * m + k];
                }
            }
        }
    }
    out
}

/// Same values by direct summation, `O(M² · terms)`; used as the second path in tests.
pub fn eval_grid_direct(m: usize, terms: &[([i64; 2], Complex64)]) -> RealGrid {
    let mut values = vec![0.0; m * m];
    for j in 0..m {
        for k in 0..m {
            let x = [j as f64 / m as f64, k as f64 / m as f64];
            values[j * m + k] = eval_point(terms, x);
        }
    }
    RealGrid { m, values }
}

/// `Re Σ c_λ e(⟨λ, x⟩)` at an arbitrary point.
pub fn eval_point(terms: &[([i64; 2], Complex64)], x: [f64; 2]) -> f64 {
    terms
        .iter()
        .map(|&([a, b], c)| {
            let phase = TAU * (a as f64 * x[0] + b as f64 * x[1]);
            let (s, co) = phase.sin_cos();
            c.re * co - c.im * s
        })
        .sum()
}

/// Smallest power of two strictly greater than `bound`.
pub fn pow2_above(bound: usize) -> usize {
    (bound + 1).next_power_of_two()
}

/// Smallest integer `≥ bound` with no prime factor above 5, a fast FFT length.
pub fn smooth_at_least(bound: usize) -> usize {
    (bound.max(1)..)
        .find(|&m| {
            let mut r = m;
            for p in [2, 3, 5] {
                while r % p == 0 {
                    r /= p;
                }
            }
            r == 1
        })
        .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_sizes() {
        assert_eq!(smooth_at_least(49), 50);
        assert_eq!(smooth_at_least(769), 800);
        assert_eq!(smooth_at_least(1), 1);
        assert_eq!(smooth_at_least(7), 8);
    }

    #[test]
    fn fft_matches_direct_sum() {
        let terms = vec![
            ([3, -4], Complex64::new(0.3, -1.2)),
            ([-5, 0], Complex64::new(1.0, 0.5)),
            ([0, 1], Complex64::new(-0.7, 0.0)),
        ];
        for m in [16usize, 17, 24] {
            let a = eval_grid(m, &terms);
            let b = eval_grid_direct(m, &terms);
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_term_average() {
        let g = eval_grid(
            8,
            &[
                ([0, 0], Complex64::new(2.5, 0.0)),
                ([1, 2], Complex64::new(1.0, 0.0)),
            ],
        );
        assert!((g.mean() - 2.5).abs() < 1e-14);
    }

    #[test]
    fn pow2() {
        assert_eq!(pow2_above(40), 64);
        assert_eq!(pow2_above(64), 128);
        assert_eq!(pow2_above(0), 1);
    }
}
