//! Field synthesis on torus grids, nodal-length extraction and the Monte Carlo engine.

mod experiment;
mod field;
mod nodal;

pub use experiment::{
    run_experiment, run_experiment_with, trial_length, ExperimentConfig, ExperimentRecord,
};
pub use field::{
    default_grid, draw_coefficients, min_field_grid, sample_field, sample_field_with, trial_rng,
    EvalPath, FieldGrid, FieldJet,
};
pub use nodal::{nodal_length, nodal_length_with, CrossingRule, NodalExtraction, NodalSegment};
