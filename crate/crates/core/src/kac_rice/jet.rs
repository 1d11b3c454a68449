use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix2, Matrix4, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ArwError, Result};
use crate::lattice::FrequencySet;
use crate::trig_grid::{eval_grid, RealGrid};

/// Conditioning floor for `1 - r²`.
pub const MIN_ONE_MINUS_R2: f64 = 1e-10;

/// `r(x)` together with its gradient and Hessian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceJet {
    pub x: [f64; 2],
    pub r: f64,
    pub d: [f64; 2],
    pub h: [[f64; 2]; 2],
}

impl CovarianceJet {
    pub fn d_vec(&self) -> Vector2<f64> {
        Vector2::new(self.d[0], self.d[1])
    }

    pub fn h_mat(&self) -> Matrix2<f64> {
        Matrix2::new(self.h[0][0], self.h[0][1], self.h[1][0], self.h[1][1])
    }

    /// `D Dᵗ = |D|²` (row-vector convention).
    pub fn ddt(&self) -> f64 {
        self.d[0] * self.d[0] + self.d[1] * self.d[1]
    }
}

pub fn covariance_jet(freqs: &FrequencySet, x: [f64; 2]) -> CovarianceJet {
    let nf = freqs.n_points() as f64;
    let (mut r, mut d, mut h) = (0.0, [0.0; 2], [[0.0; 2]; 2]);
    for &[a, b] in freqs.points() {
        let (a, b) = (a as f64, b as f64);
        let (s, c) = (TAU * (a * x[0] + b * x[1])).sin_cos();
        r += c;
        d[0] += s * a;
        d[1] += s * b;
        h[0][0] += c * a * a;
        h[0][1] += c * a * b;
        h[1][1] += c * b * b;
    }
    let dk = -TAU / nf;
    let hk = -4.0 * PI * PI / nf;
    CovarianceJet {
        x,
        r: r / nf,
        d: [dk * d[0], dk * d[1]],
        h: [[hk * h[0][0], hk * h[0][1]], [hk * h[0][1], hk * h[1][1]]],
    }
}

/// `r`, `D` and `H` evaluated on the `M×M` grid by inverse FFT.
#[derive(Debug, Clone)]
pub struct JetGrid {
    pub m: usize,
    pub r: RealGrid,
    pub d: [RealGrid; 2],
    pub h11: RealGrid,
    pub h12: RealGrid,
    pub h22: RealGrid,
}

impl JetGrid {
    pub fn new(freqs: &FrequencySet, m: usize) -> Self {
        let nf = freqs.n_points() as f64;
        let field = |coef: &dyn Fn(f64, f64) -> Complex64| {
            let terms: Vec<([i64; 2], Complex64)> = freqs
                .points()
                .iter()
                .map(|&p| (p, coef(p[0] as f64, p[1] as f64)))
                .collect();
            eval_grid(m, &terms)
        };
        let dk = TAU / nf;
        let hk = -4.0 * PI * PI / nf;
        JetGrid {
            m,
            r: field(&|_, _| Complex64::new(1.0 / nf, 0.0)),
            d: [
                field(&|a, _| Complex64::new(0.0, dk * a)),
                field(&|_, b| Complex64::new(0.0, dk * b)),
            ],
            h11: field(&|a, _| Complex64::new(hk * a * a, 0.0)),
            h12: field(&|a, b| Complex64::new(hk * a * b, 0.0)),
            h22: field(&|_, b| Complex64::new(hk * b * b, 0.0)),
        }
    }

    pub fn jet(&self, j: usize, k: usize) -> CovarianceJet {
        let m = self.m as f64;
        let h12 = self.h12.at(j, k);
        CovarianceJet {
            x: [j as f64 / m, k as f64 / m],
            r: self.r.at(j, k),
            d: [self.d[0].at(j, k), self.d[1].at(j, k)],
            h: [[self.h11.at(j, k), h12], [h12, self.h22.at(j, k)]],
        }
    }
}

/// `X`, `Y` and `Ω = I + [[X, Y], [Y, X]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledPerturbation {
    pub x: Matrix2<f64>,
    pub y: Matrix2<f64>,
    pub omega: Matrix4<f64>,
}

impl ScaledPerturbation {
    pub fn from_blocks(x: Matrix2<f64>, y: Matrix2<f64>) -> Self {
        let mut omega = Matrix4::identity();
        for i in 0..2 {
            for j in 0..2 {
                omega[(i, j)] += x[(i, j)];
                omega[(i + 2, j + 2)] += x[(i, j)];
                omega[(i, j + 2)] += y[(i, j)];
                omega[(i + 2, j)] += y[(i, j)];
            }
        }
        ScaledPerturbation { x, y, omega }
    }

    pub fn zero() -> Self {
        Self::from_blocks(Matrix2::zeros(), Matrix2::zeros())
    }
}

/// `X = -2/(E(1-r²)) DᵗD`, `Y = -(2/E)(H + r/(1-r²) DᵗD)`.
pub fn perturbation(jet: &CovarianceJet, energy: f64) -> Result<ScaledPerturbation> {
    let one_minus = 1.0 - jet.r * jet.r;
    if one_minus < MIN_ONE_MINUS_R2 {
        return Err(ArwError::DegenerateConditioning(one_minus));
    }
    let d = jet.d_vec();
    let dtd = d * d.transpose();
    let x = dtd * (-2.0 / (energy * one_minus));
    let y = (jet.h_mat() + dtd * (jet.r / one_minus)) * (-2.0 / energy);
    Ok(ScaledPerturbation::from_blocks(x, y))
}
