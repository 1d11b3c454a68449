//! `v(x) = r² - (2/E) DDᵗ + (1/E²) tr H²`, which also equals
//! `(4/N²) Σ_{λ₁,λ₂} cos⁴(θ₁₂/2) cos(2π⟨λ₁+λ₂, x⟩)` with `θ₁₂` the angle between the two
//! frequencies. The weight vanishes for `λ₂ = -λ₁`, so `∫ v = 0`.

use std::f64::consts::TAU;

use super::jet::{covariance_jet, CovarianceJet, JetGrid};
use crate::correlation::exact_grid_side;
use crate::lattice::FrequencySet;
use crate::trig_grid::{pow2_above, RealGrid};

pub fn berry_v_from_jet(jet: &CovarianceJet, energy: f64) -> f64 {
    let h = jet.h_mat();
    jet.r * jet.r - 2.0 / energy * jet.ddt() + (h * h).trace() / (energy * energy)
}

pub fn berry_v(freqs: &FrequencySet, x: [f64; 2]) -> f64 {
    berry_v_from_jet(&covariance_jet(freqs, x), freqs.energy())
}

/// Double lattice sum, with `4cos⁴(θ/2) = (1 + cos θ)² = ((n + ⟨λ₁,λ₂⟩)/n)²`.
pub fn berry_v_lattice(freqs: &FrequencySet, x: [f64; 2]) -> f64 {
    let n = freqs.n() as f64;
    let pts = freqs.points();
    let phases: Vec<(f64, f64)> = pts
        .iter()
        .map(|&[a, b]| (TAU * (a as f64 * x[0] + b as f64 * x[1])).sin_cos())
        .collect();
    let mut total = 0.0;
    for (p, &(s1, c1)) in pts.iter().zip(&phases) {
        for (q, &(s2, c2)) in pts.iter().zip(&phases) {
            let dot = (p[0] * q[0] + p[1] * q[1]) as f64;
            let w = (1.0 + dot / n).powi(2);
            total += w * (c1 * c2 - s1 * s2);
        }
    }
    let nf = pts.len() as f64;
    total / (nf * nf)
}

/// `v` on an `M×M` grid.
pub fn berry_v_grid(freqs: &FrequencySet, m: usize) -> RealGrid {
    let jets = JetGrid::new(freqs, m);
    let e = freqs.energy();
    let values = (0..m * m)
        .map(|idx| berry_v_from_jet(&jets.jet(idx / m, idx % m), e))
        .collect();
    RealGrid { m, values }
}

/// `∫ v` on a grid on which the rectangle rule is exact.
pub fn berry_v_integral(freqs: &FrequencySet) -> f64 {
    berry_v_grid(freqs, pow2_above(exact_grid_side(freqs, 2))).mean()
}
