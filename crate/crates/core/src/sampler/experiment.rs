use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::{default_grid, sample_field_with, EvalPath};
use super::nodal::{nodal_length_with, CrossingRule};
use crate::error::{ArwError, Result};
use crate::kac_rice::{mean_nodal_length, variance_leading};
use crate::lattice::FrequencySet;
use crate::spectral::{c_n, mu_hat};
use crate::stats::SampleMoments;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub n: u64,
    #[serde(rename = "N")]
    pub n_points: usize,
    #[serde(rename = "E")]
    pub energy: f64,
    pub seed: u64,
    pub trials: usize,
    pub grid_m: usize,
    pub crossing_rule: CrossingRule,
    /// Trials skipped on an exact zero at a grid point, by index.
    pub aborted: Vec<u64>,
    pub sample_mean_l: f64,
    pub sample_var_l: f64,
    pub se_mean: f64,
    pub se_var: f64,
    pub theory_mean: f64,
    pub theory_var_leading: f64,
    pub mu4: f64,
    pub c_n: f64,
    /// Seconds; the only field that differs between reruns.
    pub wall_time: f64,
}

impl ExperimentRecord {
    /// `sample_var · N² / (c_n E)`.
    pub fn variance_ratio(&self) -> f64 {
        self.sample_var_l / self.theory_var_leading
    }
}

/// Options beyond the frequency set and seed.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExperimentConfig {
    /// `None` selects [`default_grid`].
    pub grid_m: Option<usize>,
    pub crossing_rule: CrossingRule,
}

/// Nodal length of trial `index`: the field drawn from stream `index` of `seed`.
pub fn trial_length(
    freqs: &FrequencySet,
    grid_m: usize,
    seed: u64,
    index: u64,
    rule: CrossingRule,
) -> Result<f64> {
    let field = sample_field_with(
        freqs,
        freqs.half_lattice(),
        grid_m,
        seed,
        index,
        EvalPath::Transform,
    )?;
    Ok(nodal_length_with(&field, rule)?.total_length)
}

pub fn run_experiment(
    freqs: &FrequencySet,
    trials: usize,
    grid_m: Option<usize>,
    seed: u64,
) -> Result<ExperimentRecord> {
    run_experiment_with(
        freqs,
        trials,
        seed,
        ExperimentConfig {
            grid_m,
            ..Default::default()
        },
    )
}

pub fn run_experiment_with(
    freqs: &FrequencySet,
    trials: usize,
    seed: u64,
    config: ExperimentConfig,
) -> Result<ExperimentRecord> {
    if trials < 2 {
        return Err(ArwError::InvalidParameter(format!(
            "trials must be at least 2, got {trials}"
        )));
    }
    let start = Instant::now();
    let m = config.grid_m.unwrap_or_else(|| default_grid(freqs));
    let outcomes: Vec<Result<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| trial_length(freqs, m, seed, i, config.crossing_rule))
        .collect();
    let mut lengths = Vec::with_capacity(trials);
    let mut aborted = Vec::new();
    for (i, out) in outcomes.into_iter().enumerate() {
        match out {
            Ok(l) => lengths.push(l),
            Err(ArwError::ExactZero { .. }) => aborted.push(i as u64),
            Err(e) => return Err(e),
        }
    }
    // more than 1% aborted fails the run
    if 100 * aborted.len() > trials {
        return Err(ArwError::TooManyAborts {
            aborted: aborted.len(),
            trials,
        });
    }
    let stats = SampleMoments::from_samples(&lengths)
        .ok_or_else(|| ArwError::InvalidParameter("fewer than two completed trials".into()))?;
    Ok(ExperimentRecord {
        n: freqs.n(),
        n_points: freqs.n_points(),
        energy: freqs.energy(),
        seed,
        trials,
        grid_m: m,
        crossing_rule: config.crossing_rule,
        aborted,
        sample_mean_l: stats.mean,
        sample_var_l: stats.variance,
        se_mean: stats.se_mean,
        se_var: stats.se_variance,
        theory_mean: mean_nodal_length(freqs),
        theory_var_leading: variance_leading(freqs),
        mu4: mu_hat(freqs, 4),
        c_n: c_n(freqs),
        wall_time: start.elapsed().as_secs_f64(),
    })
}
