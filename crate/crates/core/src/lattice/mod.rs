//! Exact integer arithmetic for sums of two squares.
//!
//! Everything here is integer-only except for [`PrimeAngle::theta`], which is derived from
//! the exact representation `p = x^2 + y^2`.

mod gaussian;
mod sequence;

use std::cmp::Ordering;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ArwError, Result};

pub use gaussian::{enumerate_lambda_gaussian, GaussianInt};
pub use sequence::{
    build_sequence, EnergySequence, LimitTarget, SequenceKind, CILLERUELO_THETA0,
    DEFAULT_SEARCH_BOUND,
};

/// Above this `n` the `O(√n)` scan is replaced by the Gaussian-integer product.
pub const SCAN_LIMIT: u64 = 1 << 44;

/// Prime factorisation `n = Π p^e`, primes ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub n: u64,
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn product(&self) -> Option<u64> {
        self.factors
            .iter()
            .try_fold(1u64, |acc, &(p, e)| acc.checked_mul(p.checked_pow(e)?))
    }

    pub fn exponent_of(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }
}

/// Trial-division factorisation.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(ArwError::ZeroInput);
    }
    let mut factors = Vec::new();
    let mut rest = n;
    let mut push = |p: u64, rest: &mut u64| {
        let mut e = 0;
        while rest.is_multiple_of(p) {
            *rest /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    };
    push(2, &mut rest);
    push(3, &mut rest);
    // 6k ± 1 wheel
    let mut d = 5u64;
    while d.saturating_mul(d) <= rest {
        push(d, &mut rest);
        push(d + 2, &mut rest);
        d += 6;
    }
    if rest > 1 {
        factors.push((rest, 1));
    }
    Ok(Factorization { n, factors })
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    matches!(factorize(p), Ok(f) if f.factors == [(p, 1)])
}

/// Number of representations `n = a^2 + b^2` with `(a, b) ∈ Z^2`, ordered and signed.
pub fn r2(n: u64) -> Result<u64> {
    let fact = factorize(n)?;
    r2_from_factorization(&fact)
}

fn r2_from_factorization(fact: &Factorization) -> Result<u64> {
    let mut count = 4u64;
    for &(p, e) in &fact.factors {
        match p % 4 {
            1 => count *= u64::from(e) + 1,
            3 if e % 2 == 1 => return Ok(0),
            _ => {}
        }
    }
    Ok(count)
}

/// The lattice points `Λ_n = {λ ∈ Z^2 : |λ|^2 = n}` in ascending angle order on `[0, 2π)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencySet {
    n: u64,
    points: Vec<[i64; 2]>,
}

impl FrequencySet {
    /// Builds a set from arbitrary points, validating the invariants and sorting by angle.
    pub fn from_points(n: u64, mut points: Vec<[i64; 2]>) -> Result<Self> {
        if n == 0 {
            return Err(ArwError::ZeroInput);
        }
        if points.is_empty() {
            return Err(ArwError::NotSumOfTwoSquares(n));
        }
        for p in &points {
            if norm_sq(*p) != i128::from(n) {
                return Err(ArwError::InvalidParameter(format!(
                    "point {p:?} does not lie on the circle of radius sqrt({n})"
                )));
            }
        }
        points.sort_by(|a, b| angle_cmp(*a, *b));
        points.dedup();
        let set = FrequencySet { n, points };
        if !set.is_symmetric() || !set.points.len().is_multiple_of(4) {
            return Err(ArwError::InvalidParameter(format!(
                "point set for n = {n} is not invariant under z -> iz"
            )));
        }
        Ok(set)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `N_n = |Λ_n|`.
    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[[i64; 2]] {
        &self.points
    }

    /// Laplace eigenvalue `E_n = 4π^2 n`.
    pub fn energy(&self) -> f64 {
        4.0 * PI * PI * self.n as f64
    }

    pub fn contains(&self, p: [i64; 2]) -> bool {
        self.points.binary_search_by(|q| angle_cmp(*q, p)).is_ok()
    }

    /// One representative of each `{λ, -λ}` pair: `λ¹ > 0`, or `λ¹ = 0` and `λ² > 0`.
    pub fn half_lattice(&self) -> Vec<[i64; 2]> {
        self.points
            .iter()
            .copied()
            .filter(|&[a, b]| a > 0 || (a == 0 && b > 0))
            .collect()
    }

    /// `⌈√n⌉`, the coordinate bound of every frequency.
    pub fn radius_ceil(&self) -> usize {
        let s = self.n.isqrt();
        (if s * s == self.n { s } else { s + 1 }) as usize
    }

    fn is_symmetric(&self) -> bool {
        self.points
            .iter()
            .all(|&[a, b]| self.contains([-a, -b]) && self.contains([-b, a]))
    }
}

pub(crate) fn norm_sq(p: [i64; 2]) -> i128 {
    let (a, b) = (i128::from(p[0]), i128::from(p[1]));
    a * a + b * b
}

/// Exact comparison of polar angles in `[0, 2π)`.
pub fn angle_cmp(a: [i64; 2], b: [i64; 2]) -> Ordering {
    // upper half-plane (angle in [0, π)) first
    let half = |p: [i64; 2]| u8::from(!(p[1] > 0 || (p[1] == 0 && p[0] > 0)));
    half(a).cmp(&half(b)).then_with(|| {
        let cross = i128::from(a[0]) * i128::from(b[1]) - i128::from(a[1]) * i128::from(b[0]);
        0.cmp(&cross)
    })
}

/// Enumerates `Λ_n`. Uses the exact `O(√n)` scan up to [`SCAN_LIMIT`] and the
/// Gaussian-integer parametrisation beyond it.
pub fn enumerate_lambda(n: u64) -> Result<FrequencySet> {
    if n == 0 {
        return Err(ArwError::ZeroInput);
    }
    if n > SCAN_LIMIT {
        return enumerate_lambda_gaussian(n);
    }
    enumerate_lambda_scan(n)
}

/// Brute-force scan over `a ∈ [0, ⌊√n⌋]` with an integer square-root test on `n - a^2`.
pub fn enumerate_lambda_scan(n: u64) -> Result<FrequencySet> {
    if n == 0 {
        return Err(ArwError::ZeroInput);
    }
    let mut points = Vec::new();
    let root = n.isqrt();
    for a in 0..=root {
        let rest = n - a * a;
        let b = rest.isqrt();
        if b * b != rest {
            continue;
        }
        let (a, b) = (a as i64, b as i64);
        for sa in [1, -1] {
            for sb in [1, -1] {
                points.push([sa * a, sb * b]);
            }
        }
    }
    points.sort_by(|a, b| angle_cmp(*a, *b));
    points.dedup();
    if points.is_empty() {
        return Err(ArwError::NotSumOfTwoSquares(n));
    }
    Ok(FrequencySet { n, points })
}

/// The representation `p = x^2 + y^2` with `0 ≤ y ≤ x` of a split prime, and its angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimeAngle {
    pub p: u64,
    pub x: u64,
    pub y: u64,
    pub theta: f64,
}

pub fn prime_angle(p: u64) -> Result<PrimeAngle> {
    if p % 4 != 1 || !is_prime(p) {
        return Err(ArwError::NotSplitPrime(p));
    }
    Ok(split_prime_angle(p))
}

/// Caller guarantees `p` is a prime `≡ 1 mod 4`.
pub(crate) fn split_prime_angle(p: u64) -> PrimeAngle {
    let mut y = 1u64;
    loop {
        let rest = p - y * y;
        let x = rest.isqrt();
        if x * x == rest {
            debug_assert!(x >= y);
            return PrimeAngle {
                p,
                x,
                y,
                theta: (y as f64).atan2(x as f64),
            };
        }
        y += 1;
    }
}

/// Primes `≡ 1 mod 4` up to `bound`, ascending (sieve of Eratosthenes).
pub fn split_primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 5 {
        return Vec::new();
    }
    let len = bound as usize + 1;
    let mut composite = vec![false; len];
    let mut out = Vec::new();
    for i in 2..len {
        if composite[i] {
            continue;
        }
        if i % 4 == 1 {
            out.push(i as u64);
        }
        let mut j = i.saturating_mul(i);
        while j < len {
            composite[j] = true;
            j += i;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_r2(n: u64) -> u64 {
        let r = n.isqrt() as i64;
        let mut c = 0;
        for a in -r..=r {
            for b in -r..=r {
                if (a * a + b * b) as u64 == n {
                    c += 1;
                }
            }
        }
        c
    }

    #[test]
    fn factorize_examples() {
        assert!(factorize(1).unwrap().factors.is_empty());
        assert_eq!(factorize(25).unwrap().factors, vec![(5, 2)]);
        assert_eq!(factorize(65).unwrap().factors, vec![(5, 1), (13, 1)]);
        assert_eq!(factorize(0), Err(ArwError::ZeroInput));
        let big = factorize(401u64.pow(7)).unwrap();
        assert_eq!(big.factors, vec![(401, 7)]);
        assert_eq!(big.product(), Some(401u64.pow(7)));
    }

    #[test]
    fn r2_examples_and_brute_force() {
        assert_eq!(r2(1).unwrap(), 4);
        assert_eq!(r2(5).unwrap(), 8);
        assert_eq!(r2(3).unwrap(), 0);
        assert_eq!(r2(65).unwrap(), 16);
        for n in 1..=600 {
            assert_eq!(r2(n).unwrap(), brute_r2(n), "n = {n}");
        }
    }

    #[test]
    fn enumerate_examples() {
        let l1 = enumerate_lambda(1).unwrap();
        assert_eq!(l1.points(), &[[1, 0], [0, 1], [-1, 0], [0, -1]]);
        let l5 = enumerate_lambda(5).unwrap();
        assert_eq!(l5.n_points(), 8);
        for p in [[1, 2], [2, 1], [-1, 2], [2, -1], [-2, -1]] {
            assert!(l5.contains(p));
        }
        let l25 = enumerate_lambda(25).unwrap();
        assert_eq!(l25.n_points(), 12);
        for p in [[5, 0], [0, -5], [3, 4], [-4, 3], [-3, -4]] {
            assert!(l25.contains(p));
        }
        assert_eq!(enumerate_lambda(3), Err(ArwError::NotSumOfTwoSquares(3)));
        assert_eq!(enumerate_lambda(0), Err(ArwError::ZeroInput));
    }

    #[test]
    fn canonical_order_is_by_angle() {
        let l = enumerate_lambda(1105).unwrap();
        let angles: Vec<f64> = l
            .points()
            .iter()
            .map(|&[a, b]| (b as f64).atan2(a as f64).rem_euclid(2.0 * PI))
            .collect();
        assert!(angles.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn half_lattice_picks_one_of_each_pair() {
        let l = enumerate_lambda(25).unwrap();
        let half = l.half_lattice();
        assert_eq!(half.len(), 6);
        for &[a, b] in &half {
            assert!(!half.contains(&[-a, -b]));
        }
        assert!(half.contains(&[0, 5]));
        assert!(!half.contains(&[0, -5]));
    }

    #[test]
    fn prime_angle_examples() {
        let a5 = prime_angle(5).unwrap();
        assert_eq!((a5.x, a5.y), (2, 1));
        assert!((a5.theta - 0.46365).abs() < 1e-5);
        let a13 = prime_angle(13).unwrap();
        assert_eq!((a13.x, a13.y), (3, 2));
        assert!((a13.theta - 0.58800).abs() < 1e-5);
        let a17 = prime_angle(17).unwrap();
        assert_eq!((a17.x, a17.y), (4, 1));
        assert!((a17.theta - 0.24498).abs() < 1e-5);
        assert_eq!(prime_angle(7), Err(ArwError::NotSplitPrime(7)));
        assert_eq!(prime_angle(21), Err(ArwError::NotSplitPrime(21)));
    }

    #[test]
    fn large_n_uses_gaussian_path() {
        let n = 401u64.pow(7);
        let l = enumerate_lambda(n).unwrap();
        assert_eq!(l.n_points(), 32);
        assert!(l.points().iter().all(|&p| norm_sq(p) == i128::from(n)));
    }

    #[test]
    fn sieve_matches_trial_division() {
        let sieve = split_primes_up_to(1000);
        let trial: Vec<u64> = (2..=1000).filter(|&p| p % 4 == 1 && is_prime(p)).collect();
        assert_eq!(sieve, trial);
        assert_eq!(&sieve[..4], &[5, 13, 17, 29]);
    }
}
