use std::f64::consts::TAU;

use arw_core::correlation::{
    additive_energy_of, count_s4, count_s4_bruteforce, count_s6, count_s6_bruteforce,
    diagonal_type_count, duality_grid, exact_grid_side, r_moment, r_moment_grid, s6_decay_scan,
    DEFAULT_S6_CAP,
};
use arw_core::lattice::{build_sequence, enumerate_lambda, SequenceKind, DEFAULT_SEARCH_BOUND};
use arw_core::ArwError;
use proptest::prelude::*;

const SMALL_N: [u64; 8] = [1, 2, 5, 10, 25, 50, 65, 85];

/// Direct double sum `Σ_x r(x)^k / M²` with `r` from cosines, no transform.
fn r_moment_direct(n: u64, k: i32, m: usize) -> f64 {
    let set = enumerate_lambda(n).unwrap();
    let nf = set.n_points() as f64;
    let mut acc = 0.0;
    for j in 0..m {
        for l in 0..m {
            let x = [j as f64 / m as f64, l as f64 / m as f64];
            let r: f64 = set
                .points()
                .iter()
                .map(|p| (TAU * (p[0] as f64 * x[0] + p[1] as f64 * x[1])).cos())
                .sum::<f64>()
                / nf;
            acc += r.abs().powi(k);
        }
    }
    acc / (m * m) as f64
}

#[test]
fn s4_closed_form_and_bruteforce() {
    assert_eq!(count_s4(&enumerate_lambda(1).unwrap()), 36);
    for n in SMALL_N {
        let set = enumerate_lambda(n).unwrap();
        let nn = set.n_points() as u64;
        assert_eq!(count_s4(&set), 3 * nn * nn - 3 * nn);
        assert_eq!(count_s4_bruteforce(&set), count_s4(&set), "n = {n}");
    }
}

#[test]
fn s6_counts_and_diagonal_bound() {
    for n in SMALL_N {
        let set = enumerate_lambda(n).unwrap();
        let s6 = count_s6(&set, DEFAULT_S6_CAP).unwrap();
        assert_eq!(s6, count_s6_bruteforce(&set), "n = {n}");
        assert!(s6 >= diagonal_type_count(set.n_points() as u64));
    }
    // N = 4: every solution is of diagonal type
    let one = enumerate_lambda(1).unwrap();
    assert_eq!(
        count_s6(&one, DEFAULT_S6_CAP).unwrap(),
        diagonal_type_count(4)
    );
    let big = enumerate_lambda(32045).unwrap();
    assert_eq!(
        count_s6(&big, 16),
        Err(ArwError::CapExceeded {
            n_points: 64,
            cap: 16
        })
    );
}

#[test]
fn diagonal_type_small_cases() {
    assert_eq!(diagonal_type_count(0), 0);
    let d4 = diagonal_type_count(4);
    let d8 = diagonal_type_count(8);
    assert!(d8 > d4);
    // 15 perfect matchings, N³ choices each, minus overlaps
    let n = 64u64;
    let ratio = diagonal_type_count(n) as f64 / (15 * n * n * n) as f64;
    assert!(ratio > 0.8 && ratio < 1.0, "{ratio}");
}

#[test]
fn even_moments_are_counts() {
    for n in [5u64, 25, 65] {
        let set = enumerate_lambda(n).unwrap();
        let nf = set.n_points() as f64;
        for k in [2u32, 4, 6] {
            let exact = r_moment(&set, k, None, DEFAULT_S6_CAP).unwrap();
            let m = duality_grid(&set, k as usize);
            assert!(
                (exact - r_moment_grid(&set, k, m)).abs() < 1e-12,
                "n={n} k={k}"
            );
        }
        assert_eq!(r_moment(&set, 2, None, DEFAULT_S6_CAP).unwrap(), 1.0 / nf);
        let direct = r_moment_direct(n, 4, exact_grid_side(&set, 4));
        assert!((direct - count_s4(&set) as f64 / nf.powi(4)).abs() < 1e-12);
    }
}

#[test]
fn odd_moments_are_stable_and_ordered() {
    for n in [5u64, 25, 65] {
        let set = enumerate_lambda(n).unwrap();
        let r3 = r_moment(&set, 3, None, DEFAULT_S6_CAP).unwrap();
        let r4 = r_moment(&set, 4, None, DEFAULT_S6_CAP).unwrap();
        let r5 = r_moment(&set, 5, None, DEFAULT_S6_CAP).unwrap();
        let r6 = r_moment(&set, 6, None, DEFAULT_S6_CAP).unwrap();
        // Lyapunov: |r| ≤ 1 so the moments decrease
        assert!(r3 > r4 && r4 > r5 && r5 > r6, "n={n}");
        // log-convexity in k
        assert!(r4 * r4 <= r3 * r5 * (1.0 + 1e-9));
        let direct = r_moment_direct(n, 3, 2 * exact_grid_side(&set, 3));
        assert!((direct - r3).abs() < 1e-12 * r3.max(1.0));
    }
    let set = enumerate_lambda(25).unwrap();
    assert!(matches!(
        r_moment(&set, 7, None, DEFAULT_S6_CAP),
        Err(ArwError::InvalidParameter(_))
    ));
    assert!(matches!(
        r_moment(&set, 3, Some(3), DEFAULT_S6_CAP),
        Err(ArwError::GridTooSmall { .. })
    ));
}

#[test]
fn s6_decays_along_generic_sequence() {
    let seq = build_sequence(SequenceKind::Generic, 4, DEFAULT_SEARCH_BOUND).unwrap();
    let rows = s6_decay_scan(&seq, DEFAULT_S6_CAP).unwrap();
    assert_eq!(
        rows.iter().map(|r| r.n).collect::<Vec<_>>(),
        vec![5, 65, 1105, 32045]
    );
    assert!(rows.windows(2).all(|w| w[1].s6_over_n4 < w[0].s6_over_n4));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn s4_closed_form_holds(n in 1u64..3000) {
        if let Ok(set) = enumerate_lambda(n) {
            let nn = set.n_points() as u64;
            prop_assert_eq!(count_s4(&set), 3 * nn * nn - 3 * nn);
            if nn <= 16 {
                prop_assert_eq!(count_s4_bruteforce(&set), count_s4(&set));
            }
        }
    }

    #[test]
    fn s6_fast_matches_brute(n in 1u64..2000) {
        if let Ok(set) = enumerate_lambda(n) {
            if set.n_points() <= 16 {
                prop_assert_eq!(count_s6(&set, DEFAULT_S6_CAP).unwrap(), count_s6_bruteforce(&set));
            }
        }
    }

    #[test]
    fn additive_energy_bounds(pts in prop::collection::vec((-20i64..20, -20i64..20), 1..25)) {
        let mut a: Vec<[i64; 2]> = pts.into_iter().map(|(x, y)| [x, y]).collect();
        a.sort_unstable();
        a.dedup();
        let k = a.len() as u64;
        let e = additive_energy_of(&a);
        // trivial solutions y₁ = y₃, y₂ = y₄ give the lower bound, fixing three gives the upper
        prop_assert!(e >= 2 * k * k - k);
        prop_assert!(e <= k * k * k);
    }
}
