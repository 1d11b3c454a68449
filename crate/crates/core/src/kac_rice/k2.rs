//! The scaled two-point correlation
//! `K₂ = E[‖V₁‖‖V₂‖] / (2π√(1-r²))`, `(V₁, V₂) ~ N(0, Ω)`.
//!
//! Exact path: `‖V‖ = (2π)^{-1/2} ∫₀^∞ (1 - e^{-t‖V‖²/2}) t^{-3/2} dt` turns the expectation into
//! `(1/2π) ∬ g(t,s) (ts)^{-3/2} dt ds` with `g` the mixed fourth difference of
//! `f(t,s) = det(I + SΩS)^{-1/2}`, `S = diag(√t, √t, √s, √s)`. With `t = tan²θ`,
//! `s = tan²φ` the measure becomes `4 dθ dφ / (sin²θ sin²φ)` and
//! `f = cos²θ cos²φ / √det(C² + QΩQ)` with `C`, `Q` the diagonal cosines and sines.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::jet::ScaledPerturbation;
use crate::error::{ArwError, Result};
use crate::quadrature::GaussLegendre;

pub const K2_INITIAL_NODES: usize = 96;
pub const K2_TOL: f64 = 1e-8;
pub const K2_MAX_NODES: usize = 1536;
/// Smallest admissible eigenvalue of `Ω`.
pub const PD_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct K2Estimate {
    pub value: f64,
    /// Nodes per axis of the accepted rule.
    pub nodes: usize,
}

/// `(θ_i, w_i)` on `(0, π/2)` for `m = 96·2^level`, built once.
fn theta_rule(m: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static RULES: [OnceLock<(Vec<f64>, Vec<f64>)>; 8] = [const { OnceLock::new() }; 8];
    let slot = (0..RULES.len()).find(|&i| 48usize << i == m);
    match slot {
        Some(i) => RULES[i].get_or_init(|| GaussLegendre::new(m).on_interval(0.0, FRAC_PI_2)),
        None => Box::leak(Box::new(GaussLegendre::new(m).on_interval(0.0, FRAC_PI_2))),
    }
}

/// Determinant of a 4×4 matrix by Laplace expansion along the first two rows.
pub fn det4(a: &Matrix4<f64>) -> f64 {
    let (principal, rest) = det4_split(a);
    principal + rest
}

/// The Laplace expansion along rows 0–1 split as `det(A₁₁)·det(A₂₂)` plus the five terms that
/// carry two entries of the off-diagonal blocks.
pub fn det4_split(a: &Matrix4<f64>) -> (f64, f64) {
    let m = |r0: usize, r1: usize, c0: usize, c1: usize| {
        a[(r0, c0)] * a[(r1, c1)] - a[(r0, c1)] * a[(r1, c0)]
    };
    let principal = m(0, 1, 0, 1) * m(2, 3, 2, 3);
    let rest = -m(0, 1, 0, 2) * m(2, 3, 1, 3)
        + m(0, 1, 0, 3) * m(2, 3, 1, 2)
        + m(0, 1, 1, 2) * m(2, 3, 0, 3)
        - m(0, 1, 1, 3) * m(2, 3, 0, 2)
        + m(0, 1, 2, 3) * m(2, 3, 0, 1);
    (principal, rest)
}

/// Smallest eigenvalue of `Ω`; errors below [`PD_THRESHOLD`].
#[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN as well
pub fn check_positive_definite(omega: &Matrix4<f64>) -> Result<f64> {
    let min = SymmetricEigen::new(*omega).eigenvalues.min();
    if !(min > PD_THRESHOLD) {
        return Err(ArwError::NotPositiveDefinite(min));
    }
    Ok(min)
}

#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn check_r(r: f64) -> Result<f64> {
    let one_minus = 1.0 - r * r;
    if !(one_minus >= super::jet::MIN_ONE_MINUS_R2) {
        return Err(ArwError::DegenerateConditioning(one_minus));
    }
    Ok(one_minus)
}

/// `E[‖V₁‖‖V₂‖]` with an `m`-point rule per axis.
///
/// With `P_i = I + sin²·X` the diagonal blocks of `C² + QΩQ` and `D_i = det P_i`, the
/// off-diagonal terms of the determinant carry at least `sin²θ sin²φ`, so
/// `det = D₁D₂(1 + sin²θ sin²φ·ũ)`. Writing
/// `g = (1 - f₁)(1 - f₂) + f₁f₂((1 + u)^{-1/2} - 1)` then divides out the `sin²` factors
/// without cancellation.
fn expected_norm_product(omega: &Matrix4<f64>, m: usize) -> f64 {
    let (theta, w) = theta_rule(m);
    let trig: Vec<(f64, f64)> = theta
        .iter()
        .map(|t| {
            let (s, c) = t.sin_cos();
            (s * s, c * c)
        })
        .collect();
    // per block: D = det(I + s²X), f = c²/√D and (1 - f)/s²
    let block = |k: usize| -> Vec<(f64, f64, f64)> {
        let (a, b, d) = (
            omega[(k, k)] - 1.0,
            omega[(k, k + 1)],
            omega[(k + 1, k + 1)] - 1.0,
        );
        let (tr, det) = (a + d, a * d - b * b);
        trig.iter()
            .map(|&(s2, c2)| {
                let dd = 1.0 + s2 * tr + s2 * s2 * det;
                let root = dd.sqrt();
                let f = c2 / root;
                // 1 - c²/√D = (D - c⁴)/((√D + c²)√D), D - c⁴ = s²(1 + c² + tr + s² det)
                let one_minus_f = (1.0 + c2 + tr + s2 * det) / ((root + c2) * root);
                (dd, f, one_minus_f)
            })
            .collect()
    };
    let (b1, b2) = (block(0), block(2));
    let mut total = 0.0;
    for i in 0..m {
        let (s1, _) = trig[i];
        let (d1, f1, h1) = b1[i];
        let mut row = 0.0;
        for j in 0..m {
            let (s2, _) = trig[j];
            let (d2, f2, h2) = b2[j];
            let q = (s1 * s2).sqrt();
            let mut a = Matrix4::zeros();
            for u in 0..2 {
                for v in 0..2 {
                    a[(u, v)] = s1 * omega[(u, v)];
                    a[(u + 2, v + 2)] = s2 * omega[(u + 2, v + 2)];
                    a[(u, v + 2)] = q * omega[(u, v + 2)];
                    a[(u + 2, v)] = q * omega[(u + 2, v)];
                }
                a[(u, u)] += 1.0 - s1;
                a[(u + 2, u + 2)] += 1.0 - s2;
            }
            // every off-block term has at least two factors q
            let (_, rest) = det4_split(&a);
            let u_scaled = rest / (s1 * s2 * d1 * d2);
            let u = s1 * s2 * u_scaled;
            let root = (1.0 + u).sqrt();
            // ((1 + u)^{-1/2} - 1) / (s1 s2)
            let cross = -u_scaled / (root * (1.0 + root));
            row += w[j] * (h1 * h2 + f1 * f2 * cross);
        }
        total += w[i] * row;
    }
    // (1/2π) · 4 · ∬
    2.0 * total / PI
}

/// `K₂` by tensor Gauss quadrature, doubling the node count from 96 until two successive
/// values agree to `1e-8`.
pub fn k2_exact(pert: &ScaledPerturbation, r: f64) -> Result<f64> {
    k2_exact_with(pert, r, K2_INITIAL_NODES, K2_TOL).map(|e| e.value)
}

pub fn k2_exact_with(
    pert: &ScaledPerturbation,
    r: f64,
    initial_nodes: usize,
    tol: f64,
) -> Result<K2Estimate> {
    let one_minus = check_r(r)?;
    check_positive_definite(&pert.omega)?;
    let scale = 1.0 / (2.0 * PI * one_minus.sqrt());
    let mut m = initial_nodes;
    let mut prev = expected_norm_product(&pert.omega, m) * scale;
    while m < K2_MAX_NODES {
        m *= 2;
        let next = expected_norm_product(&pert.omega, m) * scale;
        if (next - prev).abs() <= tol {
            return Ok(K2Estimate {
                value: next,
                nodes: m,
            });
        }
        prev = next;
    }
    Err(ArwError::QuadratureFailed { nodes: m, tol })
}

/// Single fixed-rule evaluation, used inside torus sweeps where the rule has been validated.
pub fn k2_fixed(pert: &ScaledPerturbation, r: f64, nodes: usize) -> Result<f64> {
    let one_minus = check_r(r)?;
    check_positive_definite(&pert.omega)?;
    Ok(expected_norm_product(&pert.omega, nodes) / (2.0 * PI * one_minus.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct K2MonteCarlo {
    pub value: f64,
    pub std_error: f64,
    pub draws: usize,
}

/// Direct sampling of `(V₁, V₂) = Ω^{1/2} Z`.
pub fn k2_monte_carlo(
    pert: &ScaledPerturbation,
    r: f64,
    draws: usize,
    seed: u64,
) -> Result<K2MonteCarlo> {
    let one_minus = check_r(r)?;
    check_positive_definite(&pert.omega)?;
    let eig = SymmetricEigen::new(pert.omega);
    let root = eig.eigenvectors
        * Matrix4::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
        * eig.eigenvectors.transpose();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<f64> = (0..draws)
        .map(|_| {
            let z = Vector4::from_fn(|_, _| StandardNormal.sample(&mut rng));
            let v = root * z;
            (v[0] * v[0] + v[1] * v[1]).sqrt() * (v[2] * v[2] + v[3] * v[3]).sqrt()
        })
        .collect();
    let moments = crate::stats::SampleMoments::from_samples(&samples)
        .ok_or_else(|| ArwError::InvalidParameter("need at least two draws".into()))?;
    let scale = 1.0 / (2.0 * PI * one_minus.sqrt());
    Ok(K2MonteCarlo {
        value: moments.mean * scale,
        std_error: moments.se_mean * scale,
        draws,
    })
}

/// Traces entering the Taylor form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorTraces {
    pub tr_x: f64,
    pub tr_x2: f64,
    pub tr_y2: f64,
    pub tr_y4: f64,
    pub tr_xy2: f64,
}

impl TaylorTraces {
    pub fn new(x: &Matrix2<f64>, y: &Matrix2<f64>) -> Self {
        let y2 = y * y;
        TaylorTraces {
            tr_x: x.trace(),
            tr_x2: (x * x).trace(),
            tr_y2: y2.trace(),
            tr_y4: (y2 * y2).trace(),
            tr_xy2: (x * y2).trace(),
        }
    }
}

/// `L₂`, the main correction of the intermediate-range expansion `K₂ ≈ 1/4 + L₂`.
pub fn l2(pert: &ScaledPerturbation, r: f64) -> f64 {
    let t = TaylorTraces::new(&pert.x, &pert.y);
    let r2 = r * r;
    0.25 * (r2 / 2.0 + t.tr_x / 2.0 + t.tr_y2 / 8.0 + 3.0 * r2 * r2 / 8.0
        - t.tr_xy2 / 16.0
        - t.tr_x2 / 32.0
        + t.tr_y4 / 256.0
        + t.tr_y2 * t.tr_y2 / 512.0
        - t.tr_x * t.tr_y2 / 32.0
        + r2 * t.tr_x / 4.0
        + r2 * t.tr_y2 / 16.0)
}

pub fn k2_taylor(pert: &ScaledPerturbation, r: f64) -> f64 {
    0.25 + l2(pert, r)
}

/// `r⁶ + ‖X‖³ + ‖Y‖⁶` with Frobenius norms; the scale of the Taylor remainder.
pub fn taylor_envelope(pert: &ScaledPerturbation, r: f64) -> f64 {
    r.powi(6) + pert.x.norm().powi(3) + pert.y.norm().powi(6)
}

/// `det(I + M)` by the block formula `det(I+A)·det(I+C - Bᵗ(I+A)⁻¹B)` for
/// `M = [[A, B], [Bᵗ, C]]`.
pub fn block_det(m: &Matrix4<f64>) -> Option<f64> {
    let a = Matrix2::new(1.0 + m[(0, 0)], m[(0, 1)], m[(1, 0)], 1.0 + m[(1, 1)]);
    let b = Matrix2::new(m[(0, 2)], m[(0, 3)], m[(1, 2)], m[(1, 3)]);
    let c = Matrix2::new(1.0 + m[(2, 2)], m[(2, 3)], m[(3, 2)], 1.0 + m[(3, 3)]);
    let inv = a.try_inverse()?;
    Some(a.determinant() * (c - b.transpose() * inv * b).determinant())
}
