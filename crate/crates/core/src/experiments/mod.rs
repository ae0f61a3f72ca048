//! Experiment runners: each verifies one quantitative statement about
//! eigenpairs, maximizer geometry, or exit statistics, and emits a
//! reproducible [`report::ExperimentReport`].

pub mod families;
pub mod report;
pub mod runners;

pub use families::{DomainFamily, FamilySpec};
pub use report::{Environment, ExperimentReport, PlotData, ReportRow, Verdict};
pub use runners::{
    run_barta, run_faber_krahn, run_fatness, run_maximizer_distance, run_mc_crosscheck,
    run_nonexistence, run_obstacle, run_reverse_holder, run_simply_connected,
    standard_barta_trials, McSettings, ObstacleShape, EIG_TOL,
};
