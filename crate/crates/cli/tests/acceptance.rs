//! Acceptance run: one verdict line per criterion, then a summary.
//!
//! Exits 0 whatever the verdicts so `cargo test` reports the run; set
//! `ARW_ACCEPTANCE_STRICT=1` to exit 1 when any criterion fails, and
//! `ARW_ACCEPTANCE_ONLY=1,5` to run a subset.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use arw_cli::commands::replay_records;
use arw_cli::identities::{exact_identities, lemma_checks, Status};
use arw_core::correlation::{diagonal_type_count, r_moment, s6_decay_scan, DEFAULT_S6_CAP};
use arw_core::kac_rice::{
    k2_exact, min_singular_grid, singular_set, taylor_samples, ScaledPerturbation,
    K2_INITIAL_NODES, SINGULAR_MEASURE_FIT, TAYLOR_ENVELOPE_CONSTANT,
};
use arw_core::lattice::{build_sequence, enumerate_lambda, DEFAULT_SEARCH_BOUND};
use arw_core::quadrature::{half_line_integral, GaussLegendre};
use arw_core::sampler::{run_experiment, ExperimentRecord};
use arw_core::SequenceKind;

// criterion 1
const IDENTITY_MAX_N: u64 = 4000;
const IDENTITY_MAX_POINTS: usize = 48;
const IDENTITY_BUDGET_SECS: f64 = 60.0;
// criterion 2
const LEMMA_LEVELS: [u64; 6] = [1, 5, 25, 65, 325, 1105];
// criterion 3
const K2_TOL: f64 = 1e-8;
const TAYLOR_LEVEL: u64 = 1105;
const TAYLOR_POINTS: usize = 1000;
// criterion 4
const SINGULAR_LEVELS: [u64; 3] = [25, 65, 325];
const SINGULAR_R_FLOOR: f64 = 5.0 / 16.0;
// criterion 5
const MEAN_CASES: [(u64, f64); 3] = [(1, 2.2214), (25, 11.1072), (65, 17.9094)];
const MEAN_TRIALS: usize = 500;
/// The listed means are rounded to four places and the n = 65 entry sits 4e-4 below
/// `π√(65/2)` = 17.90982, so they are matched loosely; the closed form is matched tightly.
const MEAN_EXPECTED_TOL: f64 = 5e-4;
const MEAN_ORACLE_TOL: f64 = 1e-12;
const SE_MULTIPLE: f64 = 3.0;
// criterion 6
const VARIANCE_TRIALS: usize = 2000;
const VARIANCE_BAND: (f64, f64) = (0.4, 2.5);
const VARIANCE_MIN_POINTS: usize = 12;
const GENERIC_LEVELS: [u64; 3] = [5, 65, 1105];
/// Matched-N pairs `(generic level, nu_a level)` for a = 0.3927.
const MATCHED_PAIRS: [(u64, u64); 2] = [(5, 17), (25, 1369)];
#[allow(clippy::approx_constant)]
const NU_A: f64 = 0.3927;
// criterion 7
const S6_LEVELS: [u64; 4] = [5, 65, 1105, 32045];
// criterion 8
const DETERMINISM_LEVEL: u64 = 65;
const DETERMINISM_TRIALS: usize = 200;
const THREAD_COUNTS: [usize; 2] = [1, 4];

const SEED: u64 = 2024;

struct Verdict {
    id: u32,
    pass: bool,
    summary: String,
}

fn report(id: u32, pass: bool, summary: String) -> Verdict {
    println!(
        "criterion {id}: {} {summary}",
        if pass { "PASS" } else { "FAIL" }
    );
    Verdict { id, pass, summary }
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut levels = 0;
    let mut checks = 0;
    let mut failures = Vec::new();
    for n in 1..=IDENTITY_MAX_N {
        let Ok(set) = enumerate_lambda(n) else {
            continue;
        };
        if set.n_points() > IDENTITY_MAX_POINTS {
            continue;
        }
        levels += 1;
        // ∫r² = 1/N from the count itself
        let count = r_moment(&set, 2, None, IDENTITY_MAX_POINTS).unwrap();
        checks += 1;
        if count != 1.0 / set.n_points() as f64 {
            failures.push(format!("n={n} int r^2 count {count}"));
        }
        for c in exact_identities(&set, IDENTITY_MAX_POINTS, n) {
            checks += 1;
            if c.status != Status::Pass {
                failures.push(format!("n={n} {} ({})", c.name, c.detail));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    for f in failures.iter().take(10) {
        println!("    {f}");
    }
    report(
        1,
        failures.is_empty() && secs < IDENTITY_BUDGET_SECS,
        format!(
            "exact identities over {levels} levels (n <= {IDENTITY_MAX_N}, N <= {IDENTITY_MAX_POINTS}): \
             {checks} checks, {} failed, {secs:.1} s (budget {IDENTITY_BUDGET_SECS} s)",
            failures.len()
        ),
    )
}

fn criterion_2() -> Verdict {
    let mut total = 0;
    let mut failed = Vec::new();
    for n in LEMMA_LEVELS {
        let set = enumerate_lambda(n).unwrap();
        for c in lemma_checks(&set, DEFAULT_S6_CAP).unwrap() {
            total += 1;
            if c.status != Status::Pass {
                println!("    n={n} {} {:?}: {}", c.name, c.status, c.detail);
                failed.push(c);
            }
        }
    }
    report(
        2,
        failed.is_empty(),
        format!(
            "lemma suite over n in {LEMMA_LEVELS:?}: {total} checks, {} failed",
            failed.len()
        ),
    )
}

fn criterion_3() -> Verdict {
    let zero = k2_exact(&ScaledPerturbation::zero(), 0.0).unwrap();
    let zero_ok = (zero - 0.25).abs() < K2_TOL;
    let rule = GaussLegendre::new(K2_INITIAL_NODES);
    let elementary = [
        (
            half_line_integral(&rule, |t| t / (1.0 + t) * t.powf(-1.5)),
            PI,
        ),
        (
            half_line_integral(&rule, |t| (1.0 + t).powi(-2) / t.sqrt()),
            FRAC_PI_2,
        ),
        (
            half_line_integral(&rule, |t| t.sqrt() / (1.0 + t).powi(3)),
            PI / 8.0,
        ),
    ];
    let elem_err = elementary
        .iter()
        .map(|(v, e)| (v - e).abs())
        .fold(0.0, f64::max);
    let samples = taylor_samples(
        &enumerate_lambda(TAYLOR_LEVEL).unwrap(),
        TAYLOR_POINTS,
        SEED,
    )
    .unwrap();
    let worst = samples.iter().map(|s| s.ratio()).fold(0.0, f64::max);
    println!(
        "    K2(0) - 1/4 = {:.2e}; elementary integrals max error {elem_err:.2e}",
        zero - 0.25
    );
    report(
        3,
        zero_ok && elem_err < K2_TOL && samples.len() == TAYLOR_POINTS && worst <= TAYLOR_ENVELOPE_CONSTANT,
        format!(
            "K2 engine: zero perturbation and pi, pi/2, pi/8 to {K2_TOL:e}; Taylor envelope at n = {TAYLOR_LEVEL} \
             over {} points, max ratio {worst:.4} <= C = {TAYLOR_ENVELOPE_CONSTANT}",
            samples.len()
        ),
    )
}

fn criterion_4() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in SINGULAR_LEVELS {
        let set = enumerate_lambda(n).unwrap();
        let rep = singular_set(&set, min_singular_grid(&set)).unwrap();
        let r6 = r_moment(&set, 6, None, DEFAULT_S6_CAP).unwrap();
        let min_r = rep.min_abs_r_on_b.unwrap_or(1.0);
        let ratio = rep.measure_estimate / r6;
        pass &= min_r >= SINGULAR_R_FLOOR && ratio <= SINGULAR_MEASURE_FIT;
        println!(
            "    n={n} M={} flagged {} min|r| {min_r:.4} measure {:.3e} R6 {r6:.3e} ratio {ratio:.3}",
            rep.grid_m, rep.singular_square_count, rep.measure_estimate
        );
        parts.push(format!("{ratio:.3}"));
    }
    report(
        4,
        pass,
        format!(
            "singular set for n in {SINGULAR_LEVELS:?}: |r| >= 5/16 on every flagged square, measure/R6 = [{}] <= C = {SINGULAR_MEASURE_FIT}",
            parts.join(", ")
        ),
    )
}

fn criterion_5() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, expected) in MEAN_CASES {
        let rec = run_experiment(&enumerate_lambda(n).unwrap(), MEAN_TRIALS, None, SEED).unwrap();
        let z = (rec.sample_mean_l - rec.theory_mean) / rec.se_mean;
        let oracle = PI * (n as f64 / 2.0).sqrt();
        pass &= (rec.theory_mean - oracle).abs() < MEAN_ORACLE_TOL * oracle
            && (rec.theory_mean - expected).abs() < MEAN_EXPECTED_TOL
            && z.abs() < SE_MULTIPLE;
        println!(
            "    n={n} M={} mean {:.4} ± {:.4} theory {:.5} (listed {expected}) z {z:+.2} ({:.1} s)",
            rec.grid_m, rec.sample_mean_l, rec.se_mean, rec.theory_mean, rec.wall_time
        );
        parts.push(format!("n={n}: z={z:+.2}"));
    }
    report(
        5,
        pass,
        format!(
            "Monte Carlo mean, {MEAN_TRIALS} trials: {} (within {SE_MULTIPLE} SE)",
            parts.join(", ")
        ),
    )
}

fn criterion_6() -> Verdict {
    let nu_a = build_sequence(SequenceKind::NuA { a: NU_A }, 2, DEFAULT_SEARCH_BOUND).unwrap();
    assert!(MATCHED_PAIRS.iter().all(|p| nu_a.terms.contains(&p.1)));
    let mut levels: Vec<u64> = GENERIC_LEVELS.to_vec();
    for (g, v) in MATCHED_PAIRS {
        levels.extend([g, v]);
    }
    levels.sort_unstable();
    levels.dedup();
    let records: Vec<ExperimentRecord> = levels
        .iter()
        .map(|&n| {
            let rec = run_experiment(&enumerate_lambda(n).unwrap(), VARIANCE_TRIALS, None, SEED).unwrap();
            println!(
                "    n={n} N={} M={} var {:.5} ± {:.5} c_n E/N^2 {:.5} ratio {:.3} ± {:.3} mu4 {:+.4} c_n {:.6} var/E {:.4e} ({:.0} s)",
                rec.n_points,
                rec.grid_m,
                rec.sample_var_l,
                rec.se_var,
                rec.theory_var_leading,
                rec.variance_ratio(),
                rec.se_var / rec.theory_var_leading,
                rec.mu4,
                rec.c_n,
                rec.sample_var_l / rec.energy,
                rec.wall_time
            );
            rec
        })
        .collect();
    let get = |n: u64| records.iter().find(|r| r.n == n).unwrap();

    let band: Vec<&ExperimentRecord> = records
        .iter()
        .filter(|r| r.n_points >= VARIANCE_MIN_POINTS)
        .collect();
    let out_of_band: Vec<String> = band
        .iter()
        .filter(|r| !(VARIANCE_BAND.0..=VARIANCE_BAND.1).contains(&r.variance_ratio()))
        .map(|r| format!("n={} ratio {:.3}", r.n, r.variance_ratio()))
        .collect();
    let a = out_of_band.is_empty();
    println!(
        "    (a) ratio in [{}, {}] for N >= {VARIANCE_MIN_POINTS}: {}",
        VARIANCE_BAND.0,
        VARIANCE_BAND.1,
        if a {
            "all inside".to_string()
        } else {
            format!("outside: {}", out_of_band.join(", "))
        }
    );

    let dist: Vec<f64> = GENERIC_LEVELS
        .iter()
        .map(|&n| (get(n).variance_ratio() - 1.0).abs())
        .collect();
    let b = dist.windows(2).all(|w| w[1] <= w[0]);
    println!("    (b) |ratio - 1| along {GENERIC_LEVELS:?}: {dist:.3?}");

    let mut c = true;
    for (g, v) in MATCHED_PAIRS {
        let (rg, rv) = (get(g), get(v));
        assert_eq!(rg.n_points, rv.n_points);
        let by_var = rg.sample_var_l < rv.sample_var_l;
        let by_c = rg.c_n < rv.c_n;
        let by_var_e = rg.sample_var_l / rg.energy < rv.sample_var_l / rv.energy;
        c &= by_var == by_c;
        println!(
            "    (c) N={}: var({g}) {} var({v}), c({g}) {} c({v}); per unit E the variances order {}",
            rg.n_points,
            if by_var { "<" } else { ">" },
            if by_c { "<" } else { ">" },
            if by_var_e == by_c { "the same way" } else { "the other way" }
        );
    }
    report(
        6,
        a && b && c,
        format!(
            "variance law at {VARIANCE_TRIALS} trials: (a) band {} (b) monotone distance {} (c) matched-N ordering {}",
            if a { "ok" } else { "FAILED" },
            if b { "ok" } else { "FAILED" },
            if c { "ok" } else { "FAILED" }
        ),
    )
}

fn criterion_7() -> Verdict {
    let seq = build_sequence(SequenceKind::Generic, S6_LEVELS.len(), DEFAULT_SEARCH_BOUND).unwrap();
    let rows = s6_decay_scan(&seq, DEFAULT_S6_CAP).unwrap();
    let levels_ok = rows.iter().map(|r| r.n).eq(S6_LEVELS);
    let decreasing = rows.windows(2).all(|w| w[1].s6_over_n4 < w[0].s6_over_n4);
    let diagonal = rows
        .iter()
        .all(|r| r.s6 >= diagonal_type_count(r.n_points as u64));
    let ratios: Vec<String> = rows
        .iter()
        .map(|r| format!("{:.4}", r.s6_over_n4))
        .collect();
    report(
        7,
        levels_ok && decreasing && diagonal,
        format!(
            "s6/N^4 along {S6_LEVELS:?} = [{}]; strictly decreasing: {decreasing}; s6 >= diagonal-type count: {diagonal}",
            ratios.join(", ")
        ),
    )
}

fn criterion_8() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("determinism.jsonl");
    let args = [
        "arw".to_string(),
        "experiment".into(),
        "--n".into(),
        DETERMINISM_LEVEL.to_string(),
        "--trials".into(),
        DETERMINISM_TRIALS.to_string(),
        "--seed".into(),
        SEED.to_string(),
        "--out".into(),
        path.display().to_string(),
    ];
    let code = arw_cli::run(args.to_vec());
    let stored = std::fs::read_to_string(&path).unwrap_or_default();
    let mut pass = code == 0 && !stored.is_empty();
    for threads in THREAD_COUNTS {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let (old, fresh) = pool.install(|| replay_records(&path)).unwrap();
        let same = old.len() == fresh.len()
            && old
                .iter()
                .zip(&fresh)
                .all(|(a, b)| a.timing_free_line().unwrap() == b.timing_free_line().unwrap());
        println!(
            "    replay with {threads} thread(s): {}",
            if same { "identical" } else { "DIFFERS" }
        );
        pass &= same;
    }
    report(
        8,
        pass,
        format!(
            "replay of n = {DETERMINISM_LEVEL}, {DETERMINISM_TRIALS} trials from its manifest is byte-identical \
             (wall_time excluded) at {THREAD_COUNTS:?} threads"
        ),
    )
}

fn main() {
    // `cargo test` passes harness flags; a name filter that matches nothing skips the run
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    if !filter.is_empty() && !filter.iter().any(|f| "acceptance".contains(f.as_str())) {
        return;
    }
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let start = Instant::now();
    let criteria: [(u32, fn() -> Verdict); 8] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (7, criterion_7),
        (8, criterion_8),
        (6, criterion_6),
    ];
    let only: Option<Vec<u32>> = std::env::var("ARW_ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let mut verdicts: Vec<Verdict> = criteria
        .iter()
        .filter(|(id, _)| only.as_ref().is_none_or(|o| o.contains(id)))
        .map(|(_, c)| c())
        .collect();
    verdicts.sort_by_key(|v| v.id);
    println!(
        "\nacceptance summary ({:.0} s)",
        start.elapsed().as_secs_f64()
    );
    for v in &verdicts {
        println!(
            "  [{}] criterion {}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.id,
            v.summary
        );
    }
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    println!(
        "{} of {} criteria pass",
        verdicts.len() - failed,
        verdicts.len()
    );
    let strict = std::env::var("ARW_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && failed > 0 {
        std::process::exit(1);
    }
}
