//! Kac–Rice two-point analytics for the nodal length.
//!
//! `Var(L) = (E/2) ∫ (K₂ - 1/4)` and `E[L] = √E / (2√2)`.

mod berry;
mod jet;
mod k2;
mod lemma;
mod singular;

use std::f64::consts::SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use berry::{berry_v, berry_v_from_jet, berry_v_grid, berry_v_integral, berry_v_lattice};
pub use jet::{
    covariance_jet, perturbation, CovarianceJet, JetGrid, ScaledPerturbation, MIN_ONE_MINUS_R2,
};
pub use k2::{
    block_det, check_positive_definite, det4, k2_exact, k2_exact_with, k2_fixed, k2_monte_carlo,
    k2_taylor, l2, taylor_envelope, K2Estimate, K2MonteCarlo, TaylorTraces, K2_INITIAL_NODES,
    K2_MAX_NODES, K2_TOL, PD_THRESHOLD,
};
pub use lemma::{
    allowance, leading_term, lemma_exact, lemma_integral_suite, LemmaPart, LemmaResult, Reference,
    ZeroSumTuples, QUADRATURE_REL_TOL, R6_BOUND_CONSTANT,
};
pub use singular::{
    min_singular_grid, singular_set, SingularSetReport, SquareSign, CHEBYSHEV_CONSTANT,
    SINGULAR_MEASURE_FIT,
};

use crate::correlation::{r_moment, DEFAULT_S6_CAP};
use crate::error::Result;
use crate::lattice::FrequencySet;
use crate::quadrature::GaussLegendre;
use crate::spectral::c_n;
use crate::stats::pairwise_sum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariancePrediction {
    pub mean_l: f64,
    /// Leading term `c_n E / N²`.
    pub var_l: f64,
    /// `E · R₅(n)`, the size of the remainder.
    pub error_scale: Option<f64>,
}

pub fn mean_nodal_length(freqs: &FrequencySet) -> f64 {
    freqs.energy().sqrt() / (2.0 * SQRT_2)
}

pub fn variance_leading(freqs: &FrequencySet) -> f64 {
    let nf = freqs.n_points() as f64;
    c_n(freqs) * freqs.energy() / (nf * nf)
}

pub fn variance_prediction(freqs: &FrequencySet) -> VariancePrediction {
    VariancePrediction {
        mean_l: mean_nodal_length(freqs),
        var_l: variance_leading(freqs),
        error_scale: r_moment(freqs, 5, None, DEFAULT_S6_CAP)
            .ok()
            .map(|r5| freqs.energy() * r5),
    }
}

/// Corpus-wide `C` in `|K₂ - (1/4 + L₂)| ≤ C·(r⁶ + ‖X‖³ + ‖Y‖⁶)`. Sampled ratios stay
/// below 0.02 for every tested `n`.
pub const TAYLOR_ENVELOPE_CONSTANT: f64 = 0.05;

/// One nonsingular sample of the Taylor comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorSample {
    pub x: [f64; 2],
    pub r: f64,
    pub exact: f64,
    pub taylor: f64,
    pub envelope: f64,
}

impl TaylorSample {
    /// `|K₂ - (1/4 + L₂)| / (r⁶ + ‖X‖³ + ‖Y‖⁶)`.
    pub fn ratio(&self) -> f64 {
        (self.exact - self.taylor).abs() / self.envelope
    }
}

/// `count` uniform points with `|r| < 5/16`, each trial point drawn from its own stream.
pub fn taylor_samples(freqs: &FrequencySet, count: usize, seed: u64) -> Result<Vec<TaylorSample>> {
    let e = freqs.energy();
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            loop {
                let x = [rng.random::<f64>(), rng.random::<f64>()];
                let jet = covariance_jet(freqs, x);
                if jet.r.abs() >= 5.0 / 16.0 {
                    continue;
                }
                let pert = perturbation(&jet, e)?;
                return Ok(TaylorSample {
                    x,
                    r: jet.r,
                    exact: k2_exact(&pert, jet.r)?,
                    taylor: k2_taylor(&pert, jet.r),
                    envelope: taylor_envelope(&pert, jet.r),
                });
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceIntegral {
    pub n: u64,
    pub grid_m: usize,
    pub singular_squares: usize,
    /// `(E/2) ∫_{T∖B} (K₂ - 1/4)`, 2×2 Gauss per square.
    pub nonsingular: f64,
    /// `(E/2) ∫_B (K₂ - 1/4)`, collapsed triangles around critical points of `r`.
    pub singular: f64,
    pub total: f64,
    pub predicted: f64,
}

impl VarianceIntegral {
    pub fn ratio(&self) -> f64 {
        self.total / self.predicted
    }
}

/// Gauss orders in the radial and angular collapsed coordinates of the apex triangles.
pub const SINGULAR_RADIAL_NODES: usize = 8;
pub const SINGULAR_ANGULAR_NODES: usize = 16;
/// Radius of the excised core around a point with `|r| = 1`, in units of `1/√E`.
pub const SINGULAR_CORE_RADIUS: f64 = 0.02;
/// Gauss order per side on singular squares without a critical point of `r`.
pub const SINGULAR_GAUSS_NODES: usize = 8;

/// The eight signed permutations of the grid index, as `(j, k) ↦ image`.
fn dihedral_orbit(j: usize, k: usize, m: usize) -> [(usize, usize); 8] {
    let neg = |a: usize| (m - a) % m;
    [
        (j, k),
        (k, j),
        (neg(j), k),
        (j, neg(k)),
        (neg(j), neg(k)),
        (neg(k), j),
        (k, neg(j)),
        (neg(k), neg(j)),
    ]
}

fn k2_minus_quarter(freqs: &FrequencySet, x: [f64; 2], fixed: Option<usize>) -> Result<f64> {
    let jet = covariance_jet(freqs, x);
    let pert = perturbation(&jet, freqs.energy())?;
    let k2 = match fixed {
        Some(nodes) => k2_fixed(&pert, jet.r, nodes)?,
        None => k2_exact(&pert, jet.r)?,
    };
    Ok(k2 - 0.25)
}

/// Mean of `K₂ - 1/4` over the square of side `h` centred at `c`.
fn gauss_square(freqs: &FrequencySet, rule: &GaussLegendre, c: [f64; 2], h: f64) -> Result<f64> {
    let mut acc = 0.0;
    for (u, wu) in rule.nodes.iter().zip(&rule.weights) {
        for (v, wv) in rule.nodes.iter().zip(&rule.weights) {
            let x = [c[0] + 0.5 * h * u, c[1] + 0.5 * h * v];
            acc += 0.25 * wu * wv * k2_minus_quarter(freqs, x, None)?;
        }
    }
    Ok(acc)
}

/// Newton on `∇r = 0` from `start`; returns the critical point if it lies within `reach`.
fn critical_point(freqs: &FrequencySet, start: [f64; 2], reach: f64) -> Option<[f64; 2]> {
    let mut x = start;
    for _ in 0..50 {
        let jet = covariance_jet(freqs, x);
        let h = jet.h;
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if det.abs() < f64::MIN_POSITIVE {
            return None;
        }
        let dx = (h[1][1] * jet.d[0] - h[0][1] * jet.d[1]) / det;
        let dy = (h[0][0] * jet.d[1] - h[1][0] * jet.d[0]) / det;
        x = [x[0] - dx, x[1] - dy];
        let inside = (x[0] - start[0]).abs() <= reach && (x[1] - start[1]).abs() <= reach;
        if dx.hypot(dy) < 1e-13 {
            return inside.then_some(x);
        }
        if (x[0] - start[0]).abs() > 4.0 * reach || (x[1] - start[1]).abs() > 4.0 * reach {
            return None;
        }
    }
    None
}

/// `∫ (K₂ - 1/4)` over the triangle `(apex, a, b)` in collapsed coordinates
/// `x = apex + s((1-t)a + tb - apex)`, whose Jacobian `s` cancels a `1/|x - apex|` peak.
///
/// With `core = Some(ρc)` the apex is a point where `|r| = 1`. There `Ω` degenerates like `ρ⁴`
/// and `K₂` cannot be evaluated, so below `ρc` each ray uses `K₂ - 1/4 = A/ρ + B` fitted at
/// `ρc` and `2ρc`.
fn duffy_triangle(
    freqs: &FrequencySet,
    rules: &(GaussLegendre, GaussLegendre),
    apex: [f64; 2],
    a: [f64; 2],
    b: [f64; 2],
    core: Option<f64>,
) -> Result<f64> {
    let (ax, ay) = (a[0] - apex[0], a[1] - apex[1]);
    let (bx, by) = (b[0] - apex[0], b[1] - apex[1]);
    let area2 = (ax * by - ay * bx).abs();
    if area2 == 0.0 {
        return Ok(0.0);
    }
    let (radial, angular) = rules;
    let mut acc = 0.0;
    for (v, wv) in angular.nodes.iter().zip(&angular.weights) {
        let t = 0.5 * (v + 1.0);
        let w = [(1.0 - t) * ax + t * bx, (1.0 - t) * ay + t * by];
        let at = |s: f64| [apex[0] + s * w[0], apex[1] + s * w[1]];
        let mut ray = 0.0;
        let mut s0 = 0.0;
        if let Some(rc) = core {
            let len = w[0].hypot(w[1]);
            let sc = rc / len;
            let f1 = k2_minus_quarter(freqs, at(sc), None)?;
            let f2 = k2_minus_quarter(freqs, at(2.0 * sc), None)?;
            let (amp, base) = (2.0 * rc * (f1 - f2), 2.0 * f2 - f1);
            // ∫₀^{s_e} (A/(s·len) + B) s ds
            let se = sc.min(1.0);
            ray += amp * se / len + 0.5 * base * se * se;
            s0 = se;
        }
        if s0 < 1.0 {
            let half = 0.5 * (1.0 - s0);
            for (u, wu) in radial.nodes.iter().zip(&radial.weights) {
                let s = s0 + half * (u + 1.0);
                ray += half * wu * s * k2_minus_quarter(freqs, at(s), None)?;
            }
        }
        acc += 0.5 * wv * ray;
    }
    Ok(acc * area2)
}

/// `∫ (K₂ - 1/4)` over the square of side `h` centred at `c`. If `r` has a critical point in
/// the closed square it becomes the apex of four collapsed triangles; this covers the points
/// where `|r| = 1`, including those on an edge or corner.
fn singular_square(
    freqs: &FrequencySet,
    duffy: &(GaussLegendre, GaussLegendre),
    gauss: &GaussLegendre,
    c: [f64; 2],
    h: f64,
) -> Result<f64> {
    let half = 0.5 * h;
    let Some(p) = critical_point(freqs, c, half * (1.0 + 1e-9)) else {
        return Ok(gauss_square(freqs, gauss, c, h)? * h * h);
    };
    let apex = [
        p[0].clamp(c[0] - half, c[0] + half),
        p[1].clamp(c[1] - half, c[1] + half),
    ];
    let r = covariance_jet(freqs, apex).r;
    let core = (1.0 - r.abs() < 1e-9).then(|| SINGULAR_CORE_RADIUS / freqs.energy().sqrt());
    let corners = [
        [c[0] - half, c[1] - half],
        [c[0] + half, c[1] - half],
        [c[0] + half, c[1] + half],
        [c[0] - half, c[1] + half],
    ];
    let mut total = 0.0;
    for i in 0..4 {
        total += duffy_triangle(freqs, duffy, apex, corners[i], corners[(i + 1) % 4], core)?;
    }
    Ok(total)
}

/// `(E/2) ∫ (K₂ - 1/4)`, split at the singular set on the `grid_m` squares.
///
/// `K₂` is invariant under the signed permutations of `x` and the 2×2 Gauss points of a square
/// map onto those of its image, so only one square per orbit is visited.
pub fn variance_integral(freqs: &FrequencySet, grid_m: Option<usize>) -> Result<VarianceIntegral> {
    let m = grid_m.unwrap_or_else(|| min_singular_grid(freqs));
    let sing = singular_set(freqs, m)?;
    let e = freqs.energy();
    let h = 1.0 / m as f64;
    let reps: Vec<(usize, usize, usize)> = (0..m)
        .flat_map(|j| (0..m).map(move |k| (j, k)))
        .filter_map(|(j, k)| {
            let orbit = dihedral_orbit(j, k, m);
            if orbit.iter().any(|&p| p < (j, k)) {
                return None;
            }
            let mut distinct = orbit.to_vec();
            distinct.sort_unstable();
            distinct.dedup();
            Some((j, k, distinct.len()))
        })
        .collect();
    let g2 = GaussLegendre::new(2);
    let off = 0.5 * h * g2.nodes[0].abs();
    let regular: Vec<f64> = reps
        .par_iter()
        .map(|&(j, k, weight)| {
            if sing.is_singular(j, k) {
                return Ok(0.0);
            }
            let (cx, cy) = (j as f64 * h, k as f64 * h);
            let mut acc = 0.0;
            for (dx, dy) in [(-off, -off), (off, -off), (-off, off), (off, off)] {
                acc += k2_minus_quarter(freqs, [cx + dx, cy + dy], Some(K2_INITIAL_NODES))?;
            }
            Ok(weight as f64 * 0.25 * acc)
        })
        .collect::<Result<_>>()?;
    let nonsingular = 0.5 * e * pairwise_sum(&regular) * h * h;

    let duffy = (
        GaussLegendre::new(SINGULAR_RADIAL_NODES),
        GaussLegendre::new(SINGULAR_ANGULAR_NODES),
    );
    let gauss = GaussLegendre::new(SINGULAR_GAUSS_NODES);
    let sq: Vec<f64> = sing
        .squares
        .par_iter()
        .map(|&(j, k, _)| singular_square(freqs, &duffy, &gauss, [j as f64 * h, k as f64 * h], h))
        .collect::<Result<_>>()?;
    let singular = 0.5 * e * pairwise_sum(&sq);
    Ok(VarianceIntegral {
        n: freqs.n(),
        grid_m: m,
        singular_squares: sing.singular_square_count,
        nonsingular,
        singular,
        total: nonsingular + singular,
        predicted: variance_leading(freqs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::enumerate_lambda;
    use std::f64::consts::PI;

    #[test]
    fn prediction_examples() {
        let l25 = enumerate_lambda(25).unwrap();
        assert!((mean_nodal_length(&l25) - 5.0 * PI / SQRT_2).abs() < 1e-12);
        assert!((mean_nodal_length(&l25) - 11.1072).abs() < 1e-4);
        let l1 = enumerate_lambda(1).unwrap();
        assert!((variance_leading(&l1) - PI * PI / 1024.0).abs() < 1e-15);
        let l65 = enumerate_lambda(65).unwrap();
        let mu = 833.0f64 / 4225.0;
        let expect = (1.0 + mu * mu) / 512.0 * 260.0 * PI * PI / 256.0;
        assert!((variance_leading(&l65) - expect).abs() < 1e-14);
        assert!(variance_prediction(&l65).error_scale.unwrap() > 0.0);
    }

    #[test]
    fn orbits_partition_the_grid() {
        let m = 10;
        let mut total = 0;
        for j in 0..m {
            for k in 0..m {
                let orbit = dihedral_orbit(j, k, m);
                if orbit.iter().all(|&p| p >= (j, k)) {
                    let mut d = orbit.to_vec();
                    d.sort_unstable();
                    d.dedup();
                    total += d.len();
                }
            }
        }
        assert_eq!(total, m * m);
    }
}
