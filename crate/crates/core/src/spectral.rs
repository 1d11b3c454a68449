//! The spectral measure `μ_n = (1/N) Σ δ_{λ/√n}` on the unit circle.
//!
//! Fourier coefficients with `k ≡ 0 (mod 4)` are rational and are computed exactly from
//! Gaussian-integer powers; the remaining ones vanish by the `z ↦ iz` symmetry.

use std::f64::consts::FRAC_PI_4;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{ArwError, Result};
use crate::lattice::{enumerate_lambda, EnergySequence, FrequencySet};

/// `Σ_λ conj(λ)^k` as an exact Gaussian integer `(re, im)`, with `λ` read as `λ¹ + iλ²`.
/// Negative `k` uses `λ^{|k|}`, which is the same sum conjugated.
pub fn power_sum(freqs: &FrequencySet, k: i64) -> (BigInt, BigInt) {
    let e = k.unsigned_abs();
    let mut re_total = BigInt::zero();
    let mut im_total = BigInt::zero();
    for &[a, b] in freqs.points() {
        let base_im = if k >= 0 { -b } else { b };
        let (mut re, mut im) = (BigInt::one(), BigInt::zero());
        let (br, bi) = (BigInt::from(a), BigInt::from(base_im));
        for _ in 0..e {
            let nr = &re * &br - &im * &bi;
            let ni = &re * &bi + &im * &br;
            re = nr;
            im = ni;
        }
        re_total += re;
        im_total += im;
    }
    (re_total, im_total)
}

/// Exact `μ̂_n(k)` for `k ≡ 0 (mod 4)`.
pub fn mu_hat_exact(freqs: &FrequencySet, k: i64) -> Result<BigRational> {
    if k % 4 != 0 {
        return Err(ArwError::InvalidParameter(format!(
            "exact Fourier coefficient needs k ≡ 0 mod 4, got {k}"
        )));
    }
    let (re, im) = power_sum(freqs, k);
    debug_assert!(
        im.is_zero(),
        "conjugation symmetry forces a real coefficient"
    );
    let half = (k.unsigned_abs() / 2) as u32;
    let denom = BigInt::from(freqs.n()).pow(half) * BigInt::from(freqs.n_points());
    Ok(BigRational::new(re, denom))
}

/// `μ̂_n(k) = ∫ z^{-k} dμ_n(z)`; real for every `k` and even in `k`.
pub fn mu_hat(freqs: &FrequencySet, k: i64) -> f64 {
    if k % 4 == 0 {
        return mu_hat_exact(freqs, k)
            .ok()
            .and_then(|q| q.to_f64())
            .expect("rational coefficient is finite");
    }
    mu_hat_complex(freqs, k).re
}

/// Floating-point evaluation of the complex coefficient, for any `k`.
pub fn mu_hat_complex(freqs: &FrequencySet, k: i64) -> Complex64 {
    let scale = (freqs.n() as f64).sqrt();
    let sum: Complex64 = freqs
        .points()
        .iter()
        .map(|&[a, b]| Complex64::new(a as f64 / scale, b as f64 / scale).powi(-(k as i32)))
        .sum();
    sum / freqs.n_points() as f64
}

/// `c_n = (1 + μ̂_n(4)²) / 512`.
pub fn c_n(freqs: &FrequencySet) -> f64 {
    c_n_exact(freqs).to_f64().expect("finite")
}

pub fn c_n_exact(freqs: &FrequencySet) -> BigRational {
    let m = mu_hat_exact(freqs, 4).expect("k = 4");
    (BigRational::one() + &m * &m) / BigRational::from_integer(BigInt::from(512))
}

/// `B_4(μ_n) = (1/(N² n⁴)) Σ_{λ₁,λ₂} ⟨λ₁,λ₂⟩⁴`, by the direct double sum.
pub fn b4_exact(freqs: &FrequencySet) -> BigRational {
    let pts = freqs.points();
    let mut total = BigInt::zero();
    for p in pts {
        for q in pts {
            let dot = BigInt::from(
                i128::from(p[0]) * i128::from(q[0]) + i128::from(p[1]) * i128::from(q[1]),
            );
            let sq = &dot * &dot;
            total += &sq * &sq;
        }
    }
    let nn = pts.len() as u64;
    let denom = BigInt::from(nn * nn) * BigInt::from(freqs.n()).pow(4);
    BigRational::new(total, denom)
}

pub fn b4_direct(freqs: &FrequencySet) -> f64 {
    b4_exact(freqs).to_f64().expect("finite")
}

/// `B_4` predicted from the fourth Fourier coefficient, `3/8 + μ̂(4)²/8`.
pub fn b4_from_mu4(freqs: &FrequencySet) -> BigRational {
    let m = mu_hat_exact(freqs, 4).expect("k = 4");
    let eighth = BigRational::new(BigInt::one(), BigInt::from(8));
    BigRational::new(BigInt::from(3), BigInt::from(8)) + &m * &m * eighth
}

/// The four-fold symmetrised arc measure `ν_a`, `a ∈ [0, π/4]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitMeasure {
    a: f64,
}

impl LimitMeasure {
    pub fn new(a: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_4 + 1e-12).contains(&a) {
            return Err(ArwError::InvalidParameter(format!(
                "arc half-width must lie in [0, pi/4], got {a}"
            )));
        }
        Ok(LimitMeasure { a })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn is_atomic(&self) -> bool {
        self.a == 0.0
    }

    pub fn fourier(&self, k: i64) -> f64 {
        if k == 0 {
            return 1.0;
        }
        if k % 4 != 0 {
            return 0.0;
        }
        let t = k as f64 * self.a;
        if t == 0.0 {
            1.0
        } else {
            t.sin() / t
        }
    }
}

/// `ν̂_a(k)`.
pub fn nu_a_hat(a: f64, k: i64) -> Result<f64> {
    Ok(LimitMeasure::new(a)?.fourier(k))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub n: u64,
    pub n_points: usize,
    pub mu_hat: Vec<(i64, f64)>,
    pub c_n: f64,
    pub b4: f64,
}

impl SpectralSummary {
    pub fn compute(freqs: &FrequencySet, ks: &[i64]) -> Self {
        SpectralSummary {
            n: freqs.n(),
            n_points: freqs.n_points(),
            mu_hat: ks.iter().map(|&k| (k, mu_hat(freqs, k))).collect(),
            c_n: c_n(freqs),
            b4: b4_direct(freqs),
        }
    }

    pub fn coefficient(&self, k: i64) -> Option<f64> {
        self.mu_hat.iter().find(|(j, _)| *j == k).map(|&(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: u64,
    pub n_points: usize,
    pub coefficients: Vec<(i64, f64)>,
}

/// `μ̂_{n_i}(k)` along a sequence, in sequence order.
pub fn convergence_report(seq: &EnergySequence, ks: &[i64]) -> Result<Vec<ConvergenceRow>> {
    seq.terms
        .iter()
        .map(|&n| {
            let freqs = enumerate_lambda(n)?;
            Ok(ConvergenceRow {
                n,
                n_points: freqs.n_points(),
                coefficients: ks.iter().map(|&k| (k, mu_hat(&freqs, k))).collect(),
            })
        })
        .collect()
}
