//! Experiment harness: scenario operating points, deterministic seed
//! derivation, configuration, dataset generation, and the experiment driver.

mod config;
mod dataset;
mod experiment;
mod scenario;
mod seed;

pub use config::{CnnSection, ExperimentConfig, GridSection, SvmSection, TftSection};
pub use dataset::{
    generate_dataset, generate_sample, load_manifest, manifest_path, transform_signal,
    write_manifest, DatasetManifest, ManifestHeader, ManifestRecord, MANIFEST_VERSION,
};
pub use experiment::{
    confusion_matrix, ensure_dataset, eval_report, load_features, load_tensor, run_experiment,
    split_dataset, train_eval_cnn, train_eval_svm, write_reports, EvalReport, ExperimentOutcome,
    N_CLASSES,
};
pub use scenario::ScenarioCase;
pub use seed::{sample_seed, split_hash, splitmix64};
