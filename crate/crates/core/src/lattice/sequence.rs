use std::f64::consts::FRAC_PI_4;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{enumerate_lambda, PrimeAngle};
use crate::error::{ArwError, Result};

/// Default cap on the prime search used by [`build_sequence`].
pub const DEFAULT_SEARCH_BOUND: u64 = 1_000_000;

/// Angle budget of the Cilleruelo stream: the `k`-th prime must satisfy `θ_p ≤ θ₀ / k²`.
pub const CILLERUELO_THETA0: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceKind {
    /// Products of the first `k` split primes.
    Generic,
    /// `p_k^k` with `θ_{p_k} → 0`; spectral measure tends to the four-point atomic measure.
    Cilleruelo,
    /// `p^{⌊a/θ_p⌋}` along the record-low-angle prime stream; spectral measure tends to `ν_a`.
    NuA { a: f64 },
}

impl fmt::Display for SequenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceKind::Generic => write!(f, "generic"),
            SequenceKind::Cilleruelo => write!(f, "cilleruelo"),
            SequenceKind::NuA { a } => write!(f, "nu_a(a={a})"),
        }
    }
}

/// The weak limit the spectral measures are expected to approach.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "measure", rename_all = "snake_case")]
pub enum LimitTarget {
    Uniform,
    Atomic,
    Arc { a: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergySequence {
    pub kind: SequenceKind,
    pub terms: Vec<u64>,
    pub target: LimitTarget,
}

/// Split primes `p ≤ bound` with their angles, ascending in `p`.
///
/// Walks all `(x, y)` with `x ≥ y ≥ 1`, `x² + y² ≤ bound` and keeps prime norms, which is
/// linear in `bound` and avoids a square-root search per prime.
pub(crate) fn split_prime_angles_up_to(bound: u64) -> Vec<PrimeAngle> {
    if bound < 5 {
        return Vec::new();
    }
    let len = bound as usize + 1;
    let mut composite = vec![false; len];
    composite[0] = true;
    composite[1] = true;
    let mut i = 2usize;
    while i * i < len {
        if !composite[i] {
            (i * i..len).step_by(i).for_each(|j| composite[j] = true);
        }
        i += 1;
    }
    let mut out = Vec::new();
    let mut y = 1u64;
    while 2 * y * y <= bound {
        let mut x = y;
        while x * x + y * y <= bound {
            let p = x * x + y * y;
            if !composite[p as usize] && p % 4 == 1 {
                out.push(PrimeAngle {
                    p,
                    x,
                    y,
                    theta: (y as f64).atan2(x as f64),
                });
            }
            x += 1;
        }
        y += 1;
    }
    out.sort_by_key(|a| a.p);
    out
}

/// Constructs `count` terms of an energy-level sequence of the given kind.
pub fn build_sequence(
    kind: SequenceKind,
    count: usize,
    search_bound: u64,
) -> Result<EnergySequence> {
    if count == 0 {
        return Err(ArwError::InvalidParameter("count must be positive".into()));
    }
    let primes = split_prime_angles_up_to(search_bound);
    let exhausted = |found: usize| ArwError::SequenceExhausted {
        requested: count,
        found,
        bound: search_bound,
    };
    let (terms, target) = match kind {
        SequenceKind::Generic => {
            let mut terms = Vec::with_capacity(count);
            let mut n = 1u64;
            for angle in primes.iter().take(count) {
                n = n
                    .checked_mul(angle.p)
                    .ok_or_else(|| exhausted(terms.len()))?;
                terms.push(n);
            }
            (terms, LimitTarget::Uniform)
        }
        SequenceKind::Cilleruelo => {
            let mut terms = Vec::with_capacity(count);
            let mut candidates = primes.iter();
            for k in 1..=count as u32 {
                let threshold = CILLERUELO_THETA0 / f64::from(k * k);
                let p = candidates
                    .find(|a| a.theta <= threshold)
                    .ok_or_else(|| exhausted(terms.len()))?
                    .p;
                terms.push(p.checked_pow(k).ok_or_else(|| exhausted(terms.len()))?);
            }
            (terms, LimitTarget::Atomic)
        }
        SequenceKind::NuA { a } => {
            if !(a > 0.0 && a <= FRAC_PI_4 + 1e-12) {
                return Err(ArwError::InvalidParameter(format!(
                    "nu_a needs a in (0, pi/4], got {a}"
                )));
            }
            let mut terms = Vec::with_capacity(count);
            let mut best_theta = f64::INFINITY;
            let mut last_exponent = 0u32;
            for angle in &primes {
                if terms.len() == count {
                    break;
                }
                if angle.theta >= best_theta {
                    continue;
                }
                best_theta = angle.theta;
                let e = (a / angle.theta).floor() as u32;
                if e == 0 || e <= last_exponent {
                    continue;
                }
                match angle.p.checked_pow(e) {
                    Some(n) if n <= i64::MAX as u64 => {
                        terms.push(n);
                        last_exponent = e;
                    }
                    _ => break,
                }
            }
            (terms, LimitTarget::Arc { a })
        }
    };
    if terms.len() < count {
        return Err(exhausted(terms.len()));
    }
    Ok(EnergySequence {
        kind,
        terms,
        target,
    })
}

impl EnergySequence {
    /// Multiplicities `N_{n_i}` along the sequence.
    pub fn multiplicities(&self) -> Result<Vec<usize>> {
        self.terms
            .iter()
            .map(|&n| enumerate_lambda(n).map(|l| l.n_points()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{prime_angle, r2};

    #[test]
    fn angle_table_matches_prime_angle() {
        let table = split_prime_angles_up_to(5000);
        assert_eq!(table.len(), crate::lattice::split_primes_up_to(5000).len());
        for a in table {
            assert_eq!(a, prime_angle(a.p).unwrap());
        }
    }

    #[test]
    fn generic_first_terms() {
        let seq = build_sequence(SequenceKind::Generic, 4, DEFAULT_SEARCH_BOUND).unwrap();
        assert_eq!(seq.terms, vec![5, 65, 1105, 32045]);
        assert_eq!(seq.multiplicities().unwrap(), vec![8, 16, 32, 64]);
    }

    #[test]
    fn nu_a_quarter_pi_at_seventeen() {
        let seq =
            build_sequence(SequenceKind::NuA { a: FRAC_PI_4 }, 2, DEFAULT_SEARCH_BOUND).unwrap();
        // e = ⌊(π/4)/θ_17⌋ = 3
        assert_eq!(seq.terms, vec![5, 4913]);
    }

    #[test]
    fn cilleruelo_stream() {
        let seq = build_sequence(SequenceKind::Cilleruelo, 4, DEFAULT_SEARCH_BOUND).unwrap();
        assert_eq!(seq.terms[0], 17);
        assert_eq!(seq.terms[1], 257 * 257);
        let n = seq.multiplicities().unwrap();
        assert!(n.windows(2).all(|w| w[0] < w[1]));
        assert!(seq.terms.iter().all(|&t| r2(t).unwrap() > 0));
    }

    #[test]
    fn exhaustion_is_reported() {
        let err = build_sequence(SequenceKind::Generic, 5, 20).unwrap_err();
        assert!(matches!(
            err,
            ArwError::SequenceExhausted {
                requested: 5,
                found: 3,
                ..
            }
        ));
        let err = build_sequence(SequenceKind::Cilleruelo, 6, DEFAULT_SEARCH_BOUND).unwrap_err();
        assert!(matches!(err, ArwError::SequenceExhausted { .. }));
    }

    #[test]
    fn nu_a_rejects_out_of_range() {
        assert!(build_sequence(SequenceKind::NuA { a: 0.0 }, 1, 1000).is_err());
        assert!(build_sequence(SequenceKind::NuA { a: 1.0 }, 1, 1000).is_err());
    }
}
