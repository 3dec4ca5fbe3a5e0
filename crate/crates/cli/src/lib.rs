//! Experiment harness for the reality-guided diffusion engine: synthetic
//! corpus generation, bicubic degradation, variant comparison and
//! ablation sweeps with deterministic, seed-derivable reports.

pub mod config;
pub mod corpus;
pub mod experiment;
pub mod report;

pub use config::{build_variant, ExperimentConfig, VariantInputs};
pub use corpus::gen_corpus;
pub use experiment::{
    image_seed, load_dataset, make_lr, run_experiment, run_seed, run_step_sweep, RunRecord,
};
