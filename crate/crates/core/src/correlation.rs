//! Spectral correlation counts and the moments `R_k(n) = ∫ |r_n|^k`.
//!
//! `S_k(n)` is the set of `k`-tuples of frequencies summing to zero. By orthogonality of the
//! exponentials, `R_{2j}(n) = |S_{2j}(n)| / N^{2j}`.

use std::collections::{HashMap, HashSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ArwError, Result};
use crate::lattice::{enumerate_lambda, EnergySequence, FrequencySet};
use crate::trig_grid::{eval_grid, smooth_at_least, RealGrid};

/// Default multiplicity cap for the `O(N³)` six-fold count.
pub const DEFAULT_S6_CAP: usize = 256;

/// Relative tolerance of the grid-doubling check for odd moments.
pub const ODD_MOMENT_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCensus {
    pub n: u64,
    pub n_points: usize,
    pub s4_count: u64,
    pub s6_count: u64,
    pub additive_energy: u64,
    pub sumset_size: usize,
    /// `(k, R_k)` for `k = 2..=6`.
    pub r_moments: Vec<(u32, f64)>,
}

impl CorrelationCensus {
    pub fn compute(freqs: &FrequencySet, cap: usize) -> Result<Self> {
        let s4 = count_s4(freqs);
        let s6 = count_s6(freqs, cap)?;
        let energy = additive_energy(freqs);
        let r_moments = (2..=6)
            .map(|k| r_moment(freqs, k, None, cap).map(|v| (k, v)))
            .collect::<Result<Vec<_>>>()?;
        Ok(CorrelationCensus {
            n: freqs.n(),
            n_points: freqs.n_points(),
            s4_count: s4,
            s6_count: s6,
            additive_energy: energy.energy,
            sumset_size: energy.set_size,
            r_moments,
        })
    }

    pub fn moment(&self, k: u32) -> Option<f64> {
        self.r_moments
            .iter()
            .find(|(j, _)| *j == k)
            .map(|&(_, v)| v)
    }
}

/// `|S_4(n)| = 3N² - 3N`: every solution pairs up as `λ_i = -λ_j`, and the three pairings
/// overlap exactly in the `N` tuples `(λ, -λ, -λ, λ)` and their images.
pub fn count_s4(freqs: &FrequencySet) -> u64 {
    let n = freqs.n_points() as u64;
    3 * n * n - 3 * n
}

/// `O(N³)` oracle for `|S_4|`: for each triple, test whether `-(λ₁+λ₂+λ₃) ∈ Λ`.
pub fn count_s4_bruteforce(freqs: &FrequencySet) -> u64 {
    let pts = freqs.points();
    let set: HashSet<[i64; 2]> = pts.iter().copied().collect();
    let mut count = 0;
    for a in pts {
        for b in pts {
            for c in pts {
                if set.contains(&[-(a[0] + b[0] + c[0]), -(a[1] + b[1] + c[1])]) {
                    count += 1;
                }
            }
        }
    }
    count
}

/// `r₃(v) = #{(λ₁,λ₂,λ₃) ∈ Λ³ : λ₁+λ₂+λ₃ = v}`.
pub fn three_sum_counts(freqs: &FrequencySet) -> HashMap<[i64; 2], u64> {
    let pts = freqs.points();
    let mut map: HashMap<[i64; 2], u64> = HashMap::with_capacity(pts.len().pow(3) / 4);
    for a in pts {
        for b in pts {
            let ab = [a[0] + b[0], a[1] + b[1]];
            for c in pts {
                *map.entry([ab[0] + c[0], ab[1] + c[1]]).or_default() += 1;
            }
        }
    }
    map
}

/// `|S_6(n)| = Σ_v r₃(v)²`, using `Λ = -Λ` so that `r₃(-v) = r₃(v)`.
pub fn count_s6(freqs: &FrequencySet, cap: usize) -> Result<u64> {
    if freqs.n_points() > cap {
        return Err(ArwError::CapExceeded {
            n_points: freqs.n_points(),
            cap,
        });
    }
    let total: u128 = three_sum_counts(freqs)
        .values()
        .map(|&c| u128::from(c) * u128::from(c))
        .sum();
    Ok(u64::try_from(total).expect("|S_6| ≤ 4N⁴ fits in 64 bits below the cap"))
}

/// `O(N⁵)` membership oracle for `|S_6|`.
pub fn count_s6_bruteforce(freqs: &FrequencySet) -> u64 {
    let pts = freqs.points();
    let set: HashSet<[i64; 2]> = pts.iter().copied().collect();
    let mut count = 0;
    for a in pts {
        for b in pts {
            let ab = [a[0] + b[0], a[1] + b[1]];
            for c in pts {
                let abc = [ab[0] + c[0], ab[1] + c[1]];
                for d in pts {
                    let abcd = [abc[0] + d[0], abc[1] + d[1]];
                    for e in pts {
                        if set.contains(&[-(abcd[0] + e[0]), -(abcd[1] + e[1])]) {
                            count += 1;
                        }
                    }
                }
            }
        }
    }
    count
}

/// Number of six-tuples over an `N`-point symmetric set (not containing 0) that split into
/// three pairs `λ_i = -λ_j`. Inclusion–exclusion over the 15 perfect matchings of six
/// positions: a family of matchings constrains the positions along the union graph, each
/// bipartite component contributes a free factor `N` and an odd cycle forces `λ = -λ`.
pub fn diagonal_type_count(n_points: u64) -> u64 {
    let matchings = perfect_matchings_of_six();
    let mut total: i128 = 0;
    for subset in 1u32..(1 << matchings.len()) {
        let mut edges = Vec::new();
        for (idx, m) in matchings.iter().enumerate() {
            if subset & (1 << idx) != 0 {
                edges.extend_from_slice(m);
            }
        }
        let term = match bipartite_components(6, &edges) {
            Some(c) => i128::from(n_points).pow(c),
            None => 0,
        };
        if subset.count_ones() % 2 == 1 {
            total += term;
        } else {
            total -= term;
        }
    }
    u64::try_from(total).expect("count is non-negative")
}

fn perfect_matchings_of_six() -> Vec<[(usize, usize); 3]> {
    let mut out = Vec::new();
    for b in 1..6 {
        let rest: Vec<usize> = (1..6).filter(|&x| x != b).collect();
        for c in 1..4 {
            let (p, q) = (rest[0], rest[c]);
            let others: Vec<usize> = rest[1..].iter().copied().filter(|&x| x != q).collect();
            out.push([(0, b), (p, q), (others[0], others[1])]);
        }
    }
    out
}

/// Number of connected components if the graph is bipartite.
fn bipartite_components(vertices: usize, edges: &[(usize, usize)]) -> Option<u32> {
    let mut colour: Vec<Option<bool>> = vec![None; vertices];
    let mut components = 0;
    for start in 0..vertices {
        if colour[start].is_some() {
            continue;
        }
        components += 1;
        colour[start] = Some(false);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            let cv = colour[v].expect("coloured");
            for &(a, b) in edges {
                let w = if a == v {
                    b
                } else if b == v {
                    a
                } else {
                    continue;
                };
                match colour[w] {
                    None => {
                        colour[w] = Some(!cv);
                        stack.push(w);
                    }
                    Some(cw) if cw == cv => return None,
                    Some(_) => {}
                }
            }
        }
    }
    Some(components)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdditiveEnergy {
    /// `|A|` for `A = (Λ + Λ) \ {0}`.
    pub set_size: usize,
    /// `E(A, A) = #{(y₁,y₂,y₃,y₄) ∈ A⁴ : y₁ + y₂ = y₃ + y₄}`.
    pub energy: u64,
}

pub fn sumset(freqs: &FrequencySet) -> Vec<[i64; 2]> {
    let pts = freqs.points();
    let mut a: Vec<[i64; 2]> = pts
        .iter()
        .flat_map(|p| pts.iter().map(move |q| [p[0] + q[0], p[1] + q[1]]))
        .filter(|v| *v != [0, 0])
        .collect();
    a.sort_unstable();
    a.dedup();
    a
}

pub fn additive_energy(freqs: &FrequencySet) -> AdditiveEnergy {
    let a = sumset(freqs);
    AdditiveEnergy {
        set_size: a.len(),
        energy: additive_energy_of(&a),
    }
}

/// `Σ_v r_{A+A}(v)²` for an arbitrary finite set.
pub fn additive_energy_of(a: &[[i64; 2]]) -> u64 {
    let mut reps: HashMap<[i64; 2], u64> = HashMap::with_capacity(a.len() * a.len());
    for p in a {
        for q in a {
            *reps.entry([p[0] + q[0], p[1] + q[1]]).or_default() += 1;
        }
    }
    reps.values().map(|c| c * c).sum()
}

/// Smallest grid side for which the rectangle rule integrates every `k`-fold product of
/// frequencies exactly, as used by the moment and identity checks: `2k⌈√n⌉ + 1`.
pub fn exact_grid_side(freqs: &FrequencySet, k: usize) -> usize {
    2 * k * freqs.radius_ceil() + 1
}

/// `r_n` on the `M×M` grid.
pub fn covariance_grid(freqs: &FrequencySet, m: usize) -> RealGrid {
    let w = 1.0 / freqs.n_points() as f64;
    let terms: Vec<([i64; 2], Complex64)> = freqs
        .points()
        .iter()
        .map(|&p| (p, Complex64::new(w, 0.0)))
        .collect();
    eval_grid(m, &terms)
}

/// Torus-grid average of `|r|^k`.
pub fn r_moment_grid(freqs: &FrequencySet, k: u32, m: usize) -> f64 {
    covariance_grid(freqs, m)
        .map(|r| r.abs().powi(k as i32))
        .mean()
}

/// `R_k(n)` for `k ∈ 2..=6`. Even `k` are exact from correlation counts; odd `k` use the grid
/// average on `grid_m` (default `2k⌈√n⌉+1`), accepted only if doubling the grid moves the
/// value by less than [`ODD_MOMENT_TOL`] relative.
pub fn r_moment(freqs: &FrequencySet, k: u32, grid_m: Option<usize>, cap: usize) -> Result<f64> {
    let nf = freqs.n_points() as f64;
    match k {
        2 => Ok(1.0 / nf),
        4 => Ok(count_s4(freqs) as f64 / nf.powi(4)),
        6 => Ok(count_s6(freqs, cap)? as f64 / nf.powi(6)),
        3 | 5 => {
            let min = exact_grid_side(freqs, k as usize);
            let m = grid_m.unwrap_or(min);
            if m < min {
                return Err(ArwError::GridTooSmall {
                    required: min,
                    got: m,
                });
            }
            let coarse = r_moment_grid(freqs, k, m);
            let fine = r_moment_grid(freqs, k, 2 * m);
            if (fine - coarse).abs() > ODD_MOMENT_TOL * fine.abs() {
                return Err(ArwError::NonConvergence { m, coarse, fine });
            }
            Ok(fine)
        }
        _ => Err(ArwError::InvalidParameter(format!(
            "moment order must be in 2..=6, got {k}"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S6Row {
    pub n: u64,
    pub n_points: usize,
    pub s6: u64,
    pub s6_over_n4: f64,
    pub s6_over_n3: f64,
}

impl S6Row {
    pub fn compute(n: u64, cap: usize) -> Result<Self> {
        let freqs = enumerate_lambda(n)?;
        let s6 = count_s6(&freqs, cap)?;
        let nf = freqs.n_points() as f64;
        Ok(S6Row {
            n,
            n_points: freqs.n_points(),
            s6,
            s6_over_n4: s6 as f64 / nf.powi(4),
            s6_over_n3: s6 as f64 / nf.powi(3),
        })
    }
}

/// Normalised six-fold counts along a sequence.
pub fn s6_decay_scan(seq: &EnergySequence, cap: usize) -> Result<Vec<S6Row>> {
    seq.terms.iter().map(|&n| S6Row::compute(n, cap)).collect()
}

/// Grid size used for the duality checks of `R_2`, `R_4`, `R_6`: the first 5-smooth side
/// at or above the exact bound.
pub fn duality_grid(freqs: &FrequencySet, k: usize) -> usize {
    smooth_at_least(exact_grid_side(freqs, k))
}
