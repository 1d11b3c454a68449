use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use arw_core::correlation::{r_moment, s6_decay_scan, S6Row};
use arw_core::kac_rice::{
    covariance_jet, k2_exact, k2_taylor, min_singular_grid, perturbation, singular_set,
    taylor_envelope, SingularSetReport,
};
use arw_core::lattice::{build_sequence, enumerate_lambda, DEFAULT_SEARCH_BOUND};
use arw_core::sampler::{run_experiment_with, CrossingRule, ExperimentConfig, ExperimentRecord};
use arw_core::spectral::{b4_direct, c_n, c_n_exact, mu_hat, mu_hat_exact};
use arw_core::SequenceKind;
use serde::{Deserialize, Serialize};

use crate::args::{Command, ExperimentArgs, OutputArgs, SequenceArgs};
use crate::identities::{identity_suite, IdentityCheck, Status};
use crate::output::{append_lines, read_records, read_s6_csv, s6_csv, Envelope, RunManifest};

/// Bad invocation; maps to exit code 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()).into())
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_SUITE: i32 = 3;

pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<UsageError>().is_some() {
        EXIT_USAGE
    } else {
        EXIT_DOMAIN
    }
}

pub fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Lambda { level, n, out } => {
            cmd_lambda(level.or(n).expect("required by clap"), &out)
        }
        Command::Identities {
            levels,
            cap,
            seed,
            out,
        } => cmd_identities(&levels, cap, seed, &out),
        Command::ScanS6 { seq, cap, out } => cmd_scan_s6(&seq, cap, out.as_deref()),
        Command::Experiment(args) => cmd_experiment(&args),
        Command::SingularSet { n, grid, out } => cmd_singular_set(n, grid, &out),
        Command::K2Probe { n, points, out } => cmd_k2_probe(n, &points, &out),
    }
}

/// JSON lines to `--out` and, with `--json`, to stdout.
fn emit<T: Serialize>(manifest: &RunManifest, records: &[T], out: &OutputArgs) -> Result<()> {
    let lines = records
        .iter()
        .map(|r| Envelope::new(manifest.clone(), r).to_line())
        .collect::<Result<Vec<_>>>()?;
    if let Some(path) = &out.out {
        append_lines(path, &lines)?;
    }
    if out.json {
        let mut stdout = std::io::stdout().lock();
        for l in &lines {
            writeln!(stdout, "{l}")?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct LambdaRecord {
    pub n: u64,
    pub N: usize,
    pub E: f64,
    pub points: Vec<[i64; 2]>,
    pub mu4: f64,
    pub mu4_exact: String,
    pub c_n: f64,
    pub c_n_exact: String,
    pub b4: f64,
}

pub fn lambda_record(n: u64) -> Result<LambdaRecord> {
    let set = enumerate_lambda(n)?;
    Ok(LambdaRecord {
        n,
        N: set.n_points(),
        E: set.energy(),
        points: set.points().to_vec(),
        mu4: mu_hat(&set, 4),
        mu4_exact: mu_hat_exact(&set, 4)?.to_string(),
        c_n: c_n(&set),
        c_n_exact: c_n_exact(&set).to_string(),
        b4: b4_direct(&set),
    })
}

fn cmd_lambda(n: u64, out: &OutputArgs) -> Result<i32> {
    let rec = lambda_record(n)?;
    #[derive(Serialize)]
    struct Params {
        n: u64,
    }
    emit(
        &RunManifest::new("lambda", &Params { n }, out.out.as_deref())?,
        &[&rec],
        out,
    )?;
    if !out.json {
        let pts: Vec<String> = rec
            .points
            .iter()
            .map(|p| format!("({},{})", p[0], p[1]))
            .collect();
        println!("n       {}", rec.n);
        println!("N       {}", rec.N);
        println!("E       {:.6}", rec.E);
        println!("mu(4)   {:.4} = {}", rec.mu4, rec.mu4_exact);
        println!("c_n     {:.8} = {}", rec.c_n, rec.c_n_exact);
        println!("B4      {:.12}", rec.b4);
        println!("points  {}", pts.join(" "));
    }
    Ok(EXIT_OK)
}

fn cmd_identities(levels: &[u64], cap: usize, seed: u64, out: &OutputArgs) -> Result<i32> {
    if levels.is_empty() {
        return usage("identities needs at least one n");
    }
    #[derive(Serialize)]
    struct Params<'a> {
        levels: &'a [u64],
        cap: usize,
        seed: u64,
    }
    let manifest = RunManifest::new(
        "identities",
        &Params { levels, cap, seed },
        out.out.as_deref(),
    )?;
    let mut all: Vec<IdentityCheck> = Vec::new();
    for &n in levels {
        let set = enumerate_lambda(n)?;
        let checks = identity_suite(&set, cap, seed)?;
        if !out.json {
            for c in &checks {
                let tag = match c.status {
                    Status::Pass => "pass",
                    Status::Fail => "FAIL",
                    Status::Skip => "skip",
                };
                println!("{tag:4}  n={:<6} {:<28} {}", c.n, c.name, c.detail);
            }
        }
        all.extend(checks);
    }
    emit(&manifest, &all, out)?;
    let failed = all.iter().filter(|c| c.status == Status::Fail).count();
    if failed > 0 {
        eprintln!("{failed} identities failed");
        return Ok(EXIT_SUITE);
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanParams {
    pub sequence: SequenceKind,
    pub terms: usize,
    pub cap: usize,
}

fn sequence_kind(seq: &SequenceArgs) -> Result<SequenceKind> {
    match seq.kind() {
        Ok(k) => Ok(k),
        Err(msg) => usage(msg),
    }
}

/// Rows for `params`, reusing any already present in `existing`.
pub fn scan_rows(params: &ScanParams, existing: &[S6Row]) -> Result<Vec<S6Row>> {
    let seq = build_sequence(params.sequence, params.terms, DEFAULT_SEARCH_BOUND)?;
    let todo: Vec<u64> = seq
        .terms
        .iter()
        .copied()
        .filter(|n| existing.iter().all(|r| r.n != *n))
        .collect();
    let fresh = s6_decay_scan(&arw_core::EnergySequence { terms: todo, ..seq }, params.cap)?;
    Ok(fresh)
}

fn cmd_scan_s6(seq: &SequenceArgs, cap: usize, out: Option<&Path>) -> Result<i32> {
    let params = ScanParams {
        sequence: sequence_kind(seq)?,
        terms: seq.terms,
        cap,
    };
    match out {
        Some(path) if path.exists() => {
            let (_, existing) = read_s6_csv(path)?;
            let fresh = scan_rows(&params, &existing)?;
            if !fresh.is_empty() {
                std::fs::OpenOptions::new()
                    .append(true)
                    .open(path)?
                    .write_all(s6_csv(None, &fresh, false)?.as_bytes())?;
            }
            eprintln!("{} rows present, {} computed", existing.len(), fresh.len());
        }
        Some(path) => {
            let rows = scan_rows(&params, &[])?;
            let manifest = RunManifest::new("scan-s6", &params, Some(path))?;
            std::fs::write(path, s6_csv(Some(&manifest), &rows, true)?)?;
        }
        None => {
            let rows = scan_rows(&params, &[])?;
            let manifest = RunManifest::new("scan-s6", &params, None)?;
            print!("{}", s6_csv(Some(&manifest), &rows, true)?);
        }
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentParams {
    pub n: Option<u64>,
    pub sequence: Option<SequenceKind>,
    pub terms: Option<usize>,
    pub trials: usize,
    pub grid: Option<usize>,
    pub seed: u64,
    pub crossing_rule: CrossingRule,
}

impl ExperimentParams {
    pub fn levels(&self) -> Result<Vec<u64>> {
        match (self.n, self.sequence) {
            (Some(n), None) => Ok(vec![n]),
            (None, Some(kind)) => {
                Ok(build_sequence(kind, self.terms.unwrap_or(3), DEFAULT_SEARCH_BOUND)?.terms)
            }
            _ => usage("experiment needs exactly one of --n and --sequence"),
        }
    }
}

/// One record per level, in level order.
pub fn run_experiments(params: &ExperimentParams) -> Result<Vec<ExperimentRecord>> {
    let config = ExperimentConfig {
        grid_m: params.grid,
        crossing_rule: params.crossing_rule,
    };
    params
        .levels()?
        .into_iter()
        .map(|n| {
            let set = enumerate_lambda(n)?;
            Ok(run_experiment_with(
                &set,
                params.trials,
                params.seed,
                config,
            )?)
        })
        .collect()
}

pub type ExperimentLine = Envelope<ExperimentRecord>;

/// Re-runs each manifest of a record file, keeping the manifest verbatim.
pub fn replay_records(path: &Path) -> Result<(Vec<ExperimentLine>, Vec<ExperimentLine>)> {
    let old: Vec<Envelope<ExperimentRecord>> = read_records(path)?;
    let mut fresh = Vec::with_capacity(old.len());
    let mut i = 0;
    while i < old.len() {
        let manifest = &old[i].manifest;
        if manifest.command != "experiment" {
            bail!(
                "record {} was written by `{}`, not `experiment`",
                i + 1,
                manifest.command
            );
        }
        let params: ExperimentParams = manifest.params()?;
        for rec in run_experiments(&params)? {
            fresh.push(Envelope::new(manifest.clone(), rec));
        }
        let group = old[i..]
            .iter()
            .take_while(|e| &e.manifest == manifest)
            .count();
        i += group;
    }
    Ok((old, fresh))
}

fn print_summary(records: &[ExperimentRecord], to_stderr: bool) {
    let mut lines = vec![format!(
        "{:>8} {:>4} {:>6} {:>5} {:>12} {:>10} {:>12} {:>12} {:>8}",
        "n", "N", "trials", "M", "mean L", "theory", "var L", "c_n E/N^2", "ratio"
    )];
    for r in records {
        lines.push(format!(
            "{:>8} {:>4} {:>6} {:>5} {:>7.4}±{:.4} {:>10.4} {:>7.5}±{:.5} {:>12.5} {:>8.3}",
            r.n,
            r.n_points,
            r.trials,
            r.grid_m,
            r.sample_mean_l,
            r.se_mean,
            r.theory_mean,
            r.sample_var_l,
            r.se_var,
            r.theory_var_leading,
            r.variance_ratio()
        ));
    }
    for l in lines {
        if to_stderr {
            eprintln!("{l}");
        } else {
            println!("{l}");
        }
    }
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<i32> {
    if let Some(path) = &args.replay {
        let (old, fresh) = replay_records(path)?;
        if args.check {
            let mut mismatched = 0;
            for (i, (a, b)) in old.iter().zip(&fresh).enumerate() {
                if a.timing_free_line()? != b.timing_free_line()? {
                    println!("record {}: differs", i + 1);
                    mismatched += 1;
                }
            }
            if old.len() != fresh.len() {
                println!(
                    "record count differs: {} stored, {} replayed",
                    old.len(),
                    fresh.len()
                );
                mismatched += 1;
            }
            println!("{} records replayed, {mismatched} mismatched", fresh.len());
            return Ok(if mismatched == 0 { EXIT_OK } else { EXIT_SUITE });
        }
        return write_records(&fresh, args.out.as_deref());
    }
    let sequence = match args.sequence {
        Some(name) => Some(sequence_kind(&SequenceArgs {
            sequence: name,
            a: args.a,
            terms: args.terms,
        })?),
        None => None,
    };
    let params = ExperimentParams {
        n: args.n,
        sequence,
        terms: sequence.map(|_| args.terms),
        trials: args.trials,
        grid: args.grid,
        seed: args.seed,
        crossing_rule: args.rule.into(),
    };
    params.levels()?;
    if let Some(path) = &args.out {
        check_writable(path)?;
    }
    let manifest = RunManifest::new("experiment", &params, args.out.as_deref())?;
    let records = run_experiments(&params)?;
    let envs: Vec<_> = records
        .into_iter()
        .map(|r| Envelope::new(manifest.clone(), r))
        .collect();
    write_records(&envs, args.out.as_deref())
}

fn write_records(envs: &[Envelope<ExperimentRecord>], out: Option<&Path>) -> Result<i32> {
    let lines = envs
        .iter()
        .map(|e| e.to_line())
        .collect::<Result<Vec<_>>>()?;
    let records: Vec<ExperimentRecord> = envs.iter().map(|e| e.record.clone()).collect();
    match out {
        Some(path) => {
            append_lines(path, &lines)?;
            print_summary(&records, false);
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            for l in &lines {
                writeln!(stdout, "{l}")?;
            }
            print_summary(&records, true);
        }
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularRecord {
    pub report: SingularSetReport,
    pub r6: f64,
    pub measure_over_r6: f64,
}

fn cmd_singular_set(n: u64, grid: Option<usize>, out: &OutputArgs) -> Result<i32> {
    let set = enumerate_lambda(n)?;
    let m = grid.unwrap_or_else(|| min_singular_grid(&set));
    let report = singular_set(&set, m)?;
    let r6 = r_moment(&set, 6, None, usize::MAX)?;
    let rec = SingularRecord {
        measure_over_r6: report.measure_estimate / r6,
        report,
        r6,
    };
    #[derive(Serialize)]
    struct Params {
        n: u64,
        grid: usize,
    }
    emit(
        &RunManifest::new("singular-set", &Params { n, grid: m }, out.out.as_deref())?,
        &[&rec],
        out,
    )?;
    if !out.json {
        let r = &rec.report;
        println!("n               {n}");
        println!("grid M          {}", r.grid_m);
        println!(
            "flagged squares {} ({} positive, {} negative)",
            r.singular_square_count, r.positive_count, r.negative_count
        );
        println!("measure         {:.6e}", r.measure_estimate);
        println!("R6              {:.6e}", rec.r6);
        println!("measure / R6    {:.4}", rec.measure_over_r6);
        match r.min_abs_r_on_b {
            Some(v) => println!("min |r| on B    {v:.6}"),
            None => println!("min |r| on B    -"),
        }
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct K2Probe {
    pub x: [f64; 2],
    pub r: f64,
    /// `|r| ≥ 5/16`.
    pub singular: bool,
    pub k2_exact: f64,
    pub k2_taylor: f64,
    pub envelope: f64,
}

pub fn k2_probe(n: u64, x: [f64; 2]) -> Result<K2Probe> {
    let set = enumerate_lambda(n)?;
    let jet = covariance_jet(&set, x);
    let pert = perturbation(&jet, set.energy())?;
    Ok(K2Probe {
        x,
        r: jet.r,
        singular: jet.r.abs() >= 5.0 / 16.0,
        k2_exact: k2_exact(&pert, jet.r)?,
        k2_taylor: k2_taylor(&pert, jet.r),
        envelope: taylor_envelope(&pert, jet.r),
    })
}

fn cmd_k2_probe(n: u64, points: &[[f64; 2]], out: &OutputArgs) -> Result<i32> {
    let probes = points
        .iter()
        .map(|&x| k2_probe(n, x))
        .collect::<Result<Vec<_>>>()?;
    #[derive(Serialize)]
    struct Params<'a> {
        n: u64,
        points: &'a [[f64; 2]],
    }
    emit(
        &RunManifest::new("k2-probe", &Params { n, points }, out.out.as_deref())?,
        &probes,
        out,
    )?;
    if !out.json {
        println!(
            "{:>10} {:>10} {:>10} {:>14} {:>14} {:>12}",
            "x1", "x2", "r", "K2 exact", "K2 Taylor", "envelope"
        );
        for p in &probes {
            println!(
                "{:>10.6} {:>10.6} {:>10.6} {:>14.10} {:>14.10} {:>12.4e}{}",
                p.x[0],
                p.x[1],
                p.r,
                p.k2_exact,
                p.k2_taylor,
                p.envelope,
                if p.singular { "  (|r| >= 5/16)" } else { "" }
            );
        }
    }
    Ok(EXIT_OK)
}

/// Checks a path is writable before long runs.
pub fn check_writable(path: &Path) -> Result<()> {
    std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map(|_| ())
        .with_context(|| format!("cannot write {}", path.display()))
}
