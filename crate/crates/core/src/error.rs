use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A direction vector whose Euclidean norm deviates from 1 by more than 1e-12.
    #[error("direction ({x}, {y}, {z}) is not a unit vector (norm {norm})")]
    NonUnitDirection { x: f64, y: f64, z: f64, norm: f64 },

    /// The local-foil model needs directions in the z = 0 plane.
    #[error("direction has out-of-plane component {z}; the foil model is planar")]
    NonPlanarDirection { z: f64 },

    #[error("{what} = {value} is outside [{lo}, {hi})")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("{what} = {value} is not a valid value (expected one of {expected})")]
    InvalidDiscrete {
        what: &'static str,
        value: i64,
        expected: &'static str,
    },

    /// A conditional distribution failed validation (negative mass or bad total).
    #[error("invalid kernel distribution at {context}: {detail}")]
    InvalidKernel { context: String, detail: String },

    /// Setting inference hit a station-parameter value the clock index never produces.
    #[error("station parameter in {axis} {index} is not attainable under clock index {m}")]
    Unattainable {
        m: String,
        axis: &'static str,
        index: u8,
    },

    /// Setting inference found more than one candidate (only possible for
    /// configs built with the identifiability constraints relaxed).
    #[error("{axis} {index} is ambiguous under clock index {m}: {count} setting pairs match")]
    AmbiguousInference {
        m: String,
        axis: &'static str,
        index: u8,
        count: usize,
    },

    /// An outcome evaluator was handed a local setting inconsistent with (m, param).
    #[error("clock index {m} with {axis} {index} implies local setting {implied}, got {given}")]
    SettingMismatch {
        m: String,
        axis: &'static str,
        index: u8,
        implied: u8,
        given: u8,
    },

    #[error("no records match the requested selection")]
    EmptySelection,

    #[error("region config defect: {0}")]
    Config(#[from] ConfigDefect),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A violated invariant of a region config, with the offending coordinates.
#[derive(Debug, Error, PartialEq)]
pub enum ConfigDefect {
    #[error("mass for (m={m}, a={a}, b={b}) is {mass}, expected exactly 1")]
    Normalization { m: String, a: u8, b: u8, mass: u32 },

    #[error("cell ({col},{row}) for (m={m}, a={a}, b={b}) lies outside its pattern support")]
    SupportViolation {
        m: String,
        a: u8,
        b: u8,
        col: u8,
        row: u8,
    },

    #[error("clock index {m} reuses column {col} across setting pairs")]
    DuplicateColumn { m: String, col: u8 },

    #[error("clock index {m} reuses row {row} across setting pairs")]
    DuplicateRow { m: String, row: u8 },

    #[error("setting pair (a={a}, b={b}) covers cell ({col},{row}) {count} times, expected once")]
    NotBijective {
        a: u8,
        b: u8,
        col: u8,
        row: u8,
        count: u32,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
