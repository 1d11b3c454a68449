use std::ops::Mul;

use super::{factorize, split_prime_angle, FrequencySet};
use crate::error::{ArwError, Result};

/// Gaussian integer `re + i·im`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GaussianInt {
    pub re: i128,
    pub im: i128,
}

impl GaussianInt {
    pub const ONE: GaussianInt = GaussianInt { re: 1, im: 0 };
    pub const I: GaussianInt = GaussianInt { re: 0, im: 1 };

    pub fn new(re: i128, im: i128) -> Self {
        GaussianInt { re, im }
    }

    pub fn conj(self) -> Self {
        GaussianInt::new(self.re, -self.im)
    }

    pub fn norm(self) -> i128 {
        self.re * self.re + self.im * self.im
    }

    pub fn pow(self, e: u32) -> Self {
        (0..e).fold(GaussianInt::ONE, |acc, _| acc * self)
    }
}

impl Mul for GaussianInt {
    type Output = GaussianInt;

    fn mul(self, o: GaussianInt) -> GaussianInt {
        GaussianInt::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

/// `Λ_n` from the factorisation of `n` in `Z[i]`:
/// `2^a · Π p^e · Π q^{2f}` with `p = π π̄` split contributes `(1+i)^a · Π π^j π̄^{e-j} · Π q^f`,
/// times the four units.
pub fn enumerate_lambda_gaussian(n: u64) -> Result<FrequencySet> {
    let fact = factorize(n)?;
    let mut reps = vec![GaussianInt::ONE];
    for &(p, e) in &fact.factors {
        match p % 4 {
            2 => {
                let w = GaussianInt::new(1, 1).pow(e);
                reps.iter_mut().for_each(|z| *z = *z * w);
            }
            3 => {
                if e % 2 == 1 {
                    return Err(ArwError::NotSumOfTwoSquares(n));
                }
                let w = GaussianInt::new(i128::from(p).pow(e / 2), 0);
                reps.iter_mut().for_each(|z| *z = *z * w);
            }
            _ => {
                let angle = split_prime_angle(p);
                let pi = GaussianInt::new(i128::from(angle.x), i128::from(angle.y));
                let mut next = Vec::with_capacity(reps.len() * (e as usize + 1));
                for j in 0..=e {
                    let w = pi.pow(j) * pi.conj().pow(e - j);
                    next.extend(reps.iter().map(|&z| z * w));
                }
                reps = next;
            }
        }
    }
    let mut points = Vec::with_capacity(4 * reps.len());
    for z in reps {
        let mut u = z;
        for _ in 0..4 {
            points.push([u.re as i64, u.im as i64]);
            u = u * GaussianInt::I;
        }
    }
    FrequencySet::from_points(n, points)
}
