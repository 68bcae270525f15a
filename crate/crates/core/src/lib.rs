//! belltest: a test bench for two-station correlation experiments.
//!
//! The crate builds a hidden-variable model in which a clock index shared by
//! two measurement stations selects, per run, one of sixteen product measures
//! on a 4x4 parameter square. The model reproduces the singlet correlation
//! -(a . b) at four analyzer settings, yet the conditional distribution of
//! each station's parameter depends on the *distant* analyzer setting — and
//! the bench proves it, with exact arithmetic where the claims are exact and
//! seeded Monte Carlo where they are statistical.
//!
//! The pieces:
//!
//! * [`kernels`] — reference models: the singlet statistics and a
//!   factorizable local foil;
//! * [`analysis`] — checkers for parameter independence, outcome
//!   independence, factorizability, the instrument-variable condition, and
//!   the CHSH statistic;
//! * [`table`] — the pattern tables, clock index, region synthesis by
//!   exhaustive backtracking, densities, and setting inference;
//! * [`outcomes`] — threshold outcome functions matching the correlation
//!   targets with unbiased averaged marginals;
//! * [`sim`] — the seeded two-station run simulator, signal decoding, and
//!   record export.
//!
//! Monte Carlo generation is data-parallel by default; build with
//! `--no-default-features` for the sequential fallback.

pub mod analysis;
pub mod direction;
pub mod error;
pub mod kernels;
pub mod outcomes;
pub mod report;
pub mod sim;
pub mod table;

pub use analysis::{
    averaged_correlation, check_distribution_independence, check_factorizability,
    check_marginal_distribution_independence, check_outcome_independence,
    check_parameter_independence, chsh, jarrett_equivalence, marginal_station1,
    marginal_station2, per_hidden_expectations, ConditionKind, ConditionReport, InstrumentModel,
    JointDist, JointKernel, OutcomeDist, Verdict, Witness, DEFAULT_TOL,
};
pub use direction::{Direction, Outcome, SettingMap, CANONICAL_ANGLES_DEG};
pub use error::{ConfigDefect, Error, Result};
pub use kernels::{
    local_foil_correlation, planar_angle_between, singlet_correlation, singlet_joint,
    singlet_joint_dist, LocalFoilKernel, SingletKernel, DEFAULT_FOIL_GRID,
};
pub use outcomes::{
    model_correlation, model_marginal, station1_outcome, station2_outcome, OutcomeFns, StationId,
    TableModelKernel, Thresholds,
};
pub use sim::{
    bit_error_rate, blind_decode, estimate_correlation, instrument_distribution, run_experiment,
    run_experiment_sequential, signal_decode, write_records_csv, BlindDecodeReport,
    BlindStation1Record, ClockMode, ColumnHistogram, CorrelationEstimate, RunRecord, Schedule,
    Station1Record, Station2Record,
};
pub use table::{
    synthesize_regions, BinarySetting, Cell, ClockIndex, InfeasibilityCertificate, PatternEntry,
    PatternTable, RegionConfig, SettingPair, StationParam, Synthesis, SynthesisOptions,
    TableInstrumentModel, Tier,
};
