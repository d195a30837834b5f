//! Result bundles, plots and support statistics for the command-line tool.

pub mod bundle;
pub mod plot;
pub mod studies;
pub mod support;

pub use bundle::{
    aggregate, read_bundle, run_experiment, run_seed, write_bundle, AggregateRow, Algo, ExperimentConfig, ResultBundle, SeedRun,
};
pub use plot::{plot_bundle, render_svg};
pub use support::{support_counts, support_stats, write_support_table, SupportStats, SUPPORT_THRESHOLDS};
pub use studies::{estimator_study, EstimatorStudy};
