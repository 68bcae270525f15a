//! Universal checkers for locality conditions of two-station kernels.
//!
//! A [`JointKernel`] is any conditional distribution over outcome pairs given
//! the two settings and a hidden state drawn from a finite grid; its hidden
//! weights may depend on the settings. The checkers test, over the whole
//! grid:
//!
//! * parameter independence — each station's conditional marginal ignores the
//!   distant setting;
//! * outcome independence — the conditional joint factorizes into its own
//!   marginals;
//! * factorizability — the joint equals a product of a distant-setting-free
//!   station-1 factor and a station-2 factor, tested directly by rebuilding
//!   the candidate factors from reference-setting marginals;
//! * the instrument-variable condition — the distribution of each station's
//!   hidden parameter ignores the distant setting.
//!
//! Factorizability and the conjunction of the first two are equivalent; the
//! bench re-derives both sides independently so the equivalence is a checked
//! property rather than a definition.

use crate::direction::Outcome;
use crate::error::{Error, Result};
use crate::report::Value;
use crate::table::BinarySetting;

/// Probability-mass tolerance used when validating kernel distributions.
const MASS_TOL: f64 = 1e-9;

/// Default comparison tolerance for closed-form kernels.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A distribution over the four outcome pairs, ordered
/// (+,+), (+,-), (-,+), (-,-).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointDist {
    probs: [f64; 4],
}

impl JointDist {
    pub fn from_probs(probs: [f64; 4]) -> Self {
        JointDist { probs }
    }

    /// Point mass on one outcome pair.
    pub fn point_mass(x: Outcome, y: Outcome) -> Self {
        let mut probs = [0.0; 4];
        probs[Self::slot(x, y)] = 1.0;
        JointDist { probs }
    }

    fn slot(x: Outcome, y: Outcome) -> usize {
        let xi = if x == Outcome::Plus { 0 } else { 1 };
        let yi = if y == Outcome::Plus { 0 } else { 1 };
        xi * 2 + yi
    }

    pub fn prob(&self, x: Outcome, y: Outcome) -> f64 {
        self.probs[Self::slot(x, y)]
    }

    pub fn probs(&self) -> [f64; 4] {
        self.probs
    }

    pub fn station1_marginal(&self) -> OutcomeDist {
        OutcomeDist {
            p_plus: self.probs[0] + self.probs[1],
            p_minus: self.probs[2] + self.probs[3],
        }
    }

    pub fn station2_marginal(&self) -> OutcomeDist {
        OutcomeDist {
            p_plus: self.probs[0] + self.probs[2],
            p_minus: self.probs[1] + self.probs[3],
        }
    }

    /// Expectation of the outcome product.
    pub fn correlation(&self) -> f64 {
        self.probs[0] - self.probs[1] - self.probs[2] + self.probs[3]
    }

    fn validate(&self, context: impl Fn() -> String) -> Result<()> {
        let sum: f64 = self.probs.iter().sum();
        if self.probs.iter().any(|&p| !(0.0..=1.0 + MASS_TOL).contains(&p))
            || (sum - 1.0).abs() > MASS_TOL
        {
            return Err(Error::InvalidKernel {
                context: context(),
                detail: format!("probs {:?} (sum {sum})", self.probs),
            });
        }
        Ok(())
    }
}

/// A distribution over a single station's two outcomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeDist {
    pub p_plus: f64,
    pub p_minus: f64,
}

impl OutcomeDist {
    pub fn prob(&self, x: Outcome) -> f64 {
        match x {
            Outcome::Plus => self.p_plus,
            Outcome::Minus => self.p_minus,
        }
    }

    pub fn total(&self) -> f64 {
        self.p_plus + self.p_minus
    }

    pub fn expectation(&self) -> f64 {
        self.p_plus - self.p_minus
    }
}

/// A conditional two-station model over a finite hidden grid.
pub trait JointKernel {
    fn hidden_count(&self) -> usize;

    fn hidden_label(&self, index: usize) -> String {
        format!("state-{index}")
    }

    /// Hidden-state weight; may legitimately depend on both settings, which
    /// is exactly what the instrument-variable condition separates out.
    fn weight(&self, a: BinarySetting, b: BinarySetting, index: usize) -> f64;

    /// Conditional distribution over outcome pairs.
    fn joint(&self, a: BinarySetting, b: BinarySetting, index: usize) -> JointDist;
}

/// Station-1 conditional marginal, validated.
pub fn marginal_station1(
    kernel: &dyn JointKernel,
    a: BinarySetting,
    b: BinarySetting,
    index: usize,
) -> Result<OutcomeDist> {
    let joint = kernel.joint(a, b, index);
    joint.validate(|| format!("joint(a={a}, b={b}, {})", kernel.hidden_label(index)))?;
    Ok(joint.station1_marginal())
}

/// Station-2 conditional marginal, validated.
pub fn marginal_station2(
    kernel: &dyn JointKernel,
    a: BinarySetting,
    b: BinarySetting,
    index: usize,
) -> Result<OutcomeDist> {
    let joint = kernel.joint(a, b, index);
    joint.validate(|| format!("joint(a={a}, b={b}, {})", kernel.hidden_label(index)))?;
    Ok(joint.station2_marginal())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Violated,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "HOLDS",
            Verdict::Violated => "VIOLATED",
        }
    }
}

/// Which condition a report refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionKind {
    ParameterIndependence,
    OutcomeIndependence,
    Factorizability,
    DistributionIndependence,
}

impl ConditionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConditionKind::ParameterIndependence => "parameter-independence",
            ConditionKind::OutcomeIndependence => "outcome-independence",
            ConditionKind::Factorizability => "factorizability",
            ConditionKind::DistributionIndependence => "distribution-independence",
        }
    }
}

/// The concrete violation a VIOLATED report carries: the first offending
/// comparison in scan order (hidden states ascending, then stations, then
/// settings, then outcomes), which is the lexicographically smallest witness.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub hidden_label: String,
    pub context: String,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub condition: ConditionKind,
    pub verdict: Verdict,
    pub tolerance: f64,
    pub max_deviation: f64,
    pub witness: Option<Witness>,
}

impl ConditionReport {
    fn holds(condition: ConditionKind, tolerance: f64, max_deviation: f64) -> Self {
        ConditionReport {
            condition,
            verdict: Verdict::Holds,
            tolerance,
            max_deviation,
            witness: None,
        }
    }

    pub fn to_value(&self) -> Value {
        let mut map = vec![
            ("condition".to_string(), Value::text(self.condition.as_str())),
            ("verdict".to_string(), Value::text(self.verdict.as_str())),
            ("tolerance".to_string(), Value::Float(self.tolerance)),
            ("max_deviation".to_string(), Value::Float(self.max_deviation)),
        ];
        if let Some(w) = &self.witness {
            map.push((
                "witness".to_string(),
                Value::Map(vec![
                    ("hidden".to_string(), Value::text(&w.hidden_label)),
                    ("context".to_string(), Value::text(&w.context)),
                    (
                        "left".to_string(),
                        Value::List(w.left.iter().map(|&x| Value::Float(x)).collect()),
                    ),
                    (
                        "right".to_string(),
                        Value::List(w.right.iter().map(|&x| Value::Float(x)).collect()),
                    ),
                    ("deviation".to_string(), Value::Float(w.deviation)),
                ]),
            ));
        }
        Value::Map(map)
    }
}

struct Scanner {
    tolerance: f64,
    max_deviation: f64,
    witness: Option<Witness>,
}

impl Scanner {
    fn new(tolerance: f64) -> Self {
        Scanner {
            tolerance,
            max_deviation: 0.0,
            witness: None,
        }
    }

    fn compare(
        &mut self,
        deviation: f64,
        hidden_label: impl Fn() -> String,
        context: impl Fn() -> String,
        left: impl Fn() -> Vec<f64>,
        right: impl Fn() -> Vec<f64>,
    ) {
        self.max_deviation = self.max_deviation.max(deviation);
        if deviation > self.tolerance && self.witness.is_none() {
            self.witness = Some(Witness {
                hidden_label: hidden_label(),
                context: context(),
                left: left(),
                right: right(),
                deviation,
            });
        }
    }

    fn finish(self, condition: ConditionKind) -> ConditionReport {
        match self.witness {
            Some(w) => ConditionReport {
                condition,
                verdict: Verdict::Violated,
                tolerance: self.tolerance,
                max_deviation: self.max_deviation,
                witness: Some(w),
            },
            None => ConditionReport::holds(condition, self.tolerance, self.max_deviation),
        }
    }
}

/// Parameter independence: for every hidden state, the station-1 marginal is
/// the same under both values of b, and symmetrically at station 2.
pub fn check_parameter_independence(
    kernel: &dyn JointKernel,
    tolerance: f64,
) -> Result<ConditionReport> {
    let mut scan = Scanner::new(tolerance);
    for index in 0..kernel.hidden_count() {
        for a in BinarySetting::BOTH {
            let m0 = marginal_station1(kernel, a, BinarySetting::Zero, index)?;
            let m1 = marginal_station1(kernel, a, BinarySetting::One, index)?;
            for x in Outcome::BOTH {
                let dev = (m0.prob(x) - m1.prob(x)).abs();
                scan.compare(
                    dev,
                    || kernel.hidden_label(index),
                    || format!("station 1, a={a}, outcome {x}, b=0 vs b=1"),
                    || vec![m0.p_plus, m0.p_minus],
                    || vec![m1.p_plus, m1.p_minus],
                );
            }
        }
        for b in BinarySetting::BOTH {
            let m0 = marginal_station2(kernel, BinarySetting::Zero, b, index)?;
            let m1 = marginal_station2(kernel, BinarySetting::One, b, index)?;
            for y in Outcome::BOTH {
                let dev = (m0.prob(y) - m1.prob(y)).abs();
                scan.compare(
                    dev,
                    || kernel.hidden_label(index),
                    || format!("station 2, b={b}, outcome {y}, a=0 vs a=1"),
                    || vec![m0.p_plus, m0.p_minus],
                    || vec![m1.p_plus, m1.p_minus],
                );
            }
        }
    }
    Ok(scan.finish(ConditionKind::ParameterIndependence))
}

/// Outcome independence: the conditional joint equals the product of its own
/// marginals for every hidden state and setting pair.
pub fn check_outcome_independence(
    kernel: &dyn JointKernel,
    tolerance: f64,
) -> Result<ConditionReport> {
    let mut scan = Scanner::new(tolerance);
    for index in 0..kernel.hidden_count() {
        for a in BinarySetting::BOTH {
            for b in BinarySetting::BOTH {
                let joint = kernel.joint(a, b, index);
                joint.validate(|| {
                    format!("joint(a={a}, b={b}, {})", kernel.hidden_label(index))
                })?;
                let m1 = joint.station1_marginal();
                let m2 = joint.station2_marginal();
                for x in Outcome::BOTH {
                    for y in Outcome::BOTH {
                        let dev = (joint.prob(x, y) - m1.prob(x) * m2.prob(y)).abs();
                        scan.compare(
                            dev,
                            || kernel.hidden_label(index),
                            || format!("a={a}, b={b}, outcomes ({x},{y})"),
                            || joint.probs().to_vec(),
                            || {
                                vec![
                                    m1.p_plus * m2.p_plus,
                                    m1.p_plus * m2.p_minus,
                                    m1.p_minus * m2.p_plus,
                                    m1.p_minus * m2.p_minus,
                                ]
                            },
                        );
                    }
                }
            }
        }
    }
    Ok(scan.finish(ConditionKind::OutcomeIndependence))
}

/// Factorizability, tested directly: candidate station factors are read off
/// at reference settings (station 1 at b=0, station 2 at a=0) and their
/// product is compared against the joint everywhere. If any factorization
/// exists these candidates realize one, so the direct test is complete.
pub fn check_factorizability(
    kernel: &dyn JointKernel,
    tolerance: f64,
) -> Result<ConditionReport> {
    let mut scan = Scanner::new(tolerance);
    let reference_b = BinarySetting::Zero;
    let reference_a = BinarySetting::Zero;
    for index in 0..kernel.hidden_count() {
        for a in BinarySetting::BOTH {
            let factor1 = marginal_station1(kernel, a, reference_b, index)?;
            for b in BinarySetting::BOTH {
                let factor2 = marginal_station2(kernel, reference_a, b, index)?;
                let joint = kernel.joint(a, b, index);
                joint.validate(|| {
                    format!("joint(a={a}, b={b}, {})", kernel.hidden_label(index))
                })?;
                for x in Outcome::BOTH {
                    for y in Outcome::BOTH {
                        let dev = (joint.prob(x, y) - factor1.prob(x) * factor2.prob(y)).abs();
                        scan.compare(
                            dev,
                            || kernel.hidden_label(index),
                            || format!("a={a}, b={b}, outcomes ({x},{y}) vs reference product"),
                            || joint.probs().to_vec(),
                            || {
                                vec![
                                    factor1.p_plus * factor2.p_plus,
                                    factor1.p_plus * factor2.p_minus,
                                    factor1.p_minus * factor2.p_plus,
                                    factor1.p_minus * factor2.p_minus,
                                ]
                            },
                        );
                    }
                }
            }
        }
    }
    Ok(scan.finish(ConditionKind::Factorizability))
}

/// Checks that the direct factorizability verdict agrees with the
/// conjunction of parameter and outcome independence. The two sides are
/// computed by independent routes, so this is a property of the analyzer,
/// not a tautology; it must hold for every kernel.
pub fn jarrett_equivalence(kernel: &dyn JointKernel, tolerance: f64) -> Result<bool> {
    let fact = check_factorizability(kernel, tolerance)?;
    let pi = check_parameter_independence(kernel, tolerance)?;
    let oi = check_outcome_independence(kernel, tolerance)?;
    Ok(fact.verdict.holds() == (pi.verdict.holds() && oi.verdict.holds()))
}

/// A model exposing the exact distributions of its station parameters,
/// as integer counts over the four unit intervals.
pub trait InstrumentModel {
    fn hidden_count(&self) -> usize;

    fn hidden_label(&self, index: usize) -> String {
        format!("state-{index}")
    }

    /// Column counts of the station-1 parameter given (hidden state, a, b).
    fn u_column_counts(&self, index: usize, a: BinarySetting, b: BinarySetting) -> [u32; 4];

    /// Row counts of the station-2 parameter given (hidden state, a, b).
    fn v_row_counts(&self, index: usize, a: BinarySetting, b: BinarySetting) -> [u32; 4];
}

fn counts_deviation(left: [u32; 4], right: [u32; 4]) -> f64 {
    let lt: u32 = left.iter().sum();
    let rt: u32 = right.iter().sum();
    if lt == 0 || rt == 0 {
        return if lt == rt { 0.0 } else { 1.0 };
    }
    // half the L1 distance between the normalized histograms
    left.iter()
        .zip(right.iter())
        .map(|(&l, &r)| (l as f64 / lt as f64 - r as f64 / rt as f64).abs())
        .sum::<f64>()
        / 2.0
}

/// The instrument-variable condition per hidden state: the distribution of u
/// must not depend on b and the distribution of v must not depend on a.
/// Exact comparison; violated whenever the histograms differ at all.
pub fn check_distribution_independence(model: &dyn InstrumentModel) -> ConditionReport {
    let mut scan = Scanner::new(0.0);
    for index in 0..model.hidden_count() {
        for a in BinarySetting::BOTH {
            let u0 = model.u_column_counts(index, a, BinarySetting::Zero);
            let u1 = model.u_column_counts(index, a, BinarySetting::One);
            if u0 != u1 {
                scan.compare(
                    counts_deviation(u0, u1),
                    || model.hidden_label(index),
                    || format!("u-distribution, a={a}, b=0 vs b=1"),
                    || u0.iter().map(|&c| c as f64).collect(),
                    || u1.iter().map(|&c| c as f64).collect(),
                );
            }
        }
        for b in BinarySetting::BOTH {
            let v0 = model.v_row_counts(index, BinarySetting::Zero, b);
            let v1 = model.v_row_counts(index, BinarySetting::One, b);
            if v0 != v1 {
                scan.compare(
                    counts_deviation(v0, v1),
                    || model.hidden_label(index),
                    || format!("v-distribution, b={b}, a=0 vs a=1"),
                    || v0.iter().map(|&c| c as f64).collect(),
                    || v1.iter().map(|&c| c as f64).collect(),
                );
            }
        }
    }
    scan.finish(ConditionKind::DistributionIndependence)
}

/// Same condition after marginalizing the hidden state out with equal
/// weights: histograms are summed over the grid before comparison.
pub fn check_marginal_distribution_independence(model: &dyn InstrumentModel) -> ConditionReport {
    let mut scan = Scanner::new(0.0);
    let sum_u = |a: BinarySetting, b: BinarySetting| -> [u32; 4] {
        let mut acc = [0u32; 4];
        for index in 0..model.hidden_count() {
            for (slot, c) in model.u_column_counts(index, a, b).into_iter().enumerate() {
                acc[slot] += c;
            }
        }
        acc
    };
    let sum_v = |a: BinarySetting, b: BinarySetting| -> [u32; 4] {
        let mut acc = [0u32; 4];
        for index in 0..model.hidden_count() {
            for (slot, c) in model.v_row_counts(index, a, b).into_iter().enumerate() {
                acc[slot] += c;
            }
        }
        acc
    };
    for a in BinarySetting::BOTH {
        let u0 = sum_u(a, BinarySetting::Zero);
        let u1 = sum_u(a, BinarySetting::One);
        if u0 != u1 {
            scan.compare(
                counts_deviation(u0, u1),
                || "mixture".to_string(),
                || format!("u-distribution, a={a}, b=0 vs b=1"),
                || u0.iter().map(|&c| c as f64).collect(),
                || u1.iter().map(|&c| c as f64).collect(),
            );
        }
    }
    for b in BinarySetting::BOTH {
        let v0 = sum_v(BinarySetting::Zero, b);
        let v1 = sum_v(BinarySetting::One, b);
        if v0 != v1 {
            scan.compare(
                counts_deviation(v0, v1),
                || "mixture".to_string(),
                || format!("v-distribution, b={b}, a=0 vs a=1"),
                || v0.iter().map(|&c| c as f64).collect(),
                || v1.iter().map(|&c| c as f64).collect(),
            );
        }
    }
    scan.finish(ConditionKind::DistributionIndependence)
}

/// Weighted correlation of per-state averaged outcomes: sum of
/// rho * abar * bbar over the grid. Rejects averaged outcomes outside
/// [-1, 1] and malformed weights.
pub fn averaged_correlation(rho: &[f64], abar: &[f64], bbar: &[f64]) -> Result<f64> {
    if rho.is_empty() || rho.len() != abar.len() || rho.len() != bbar.len() {
        return Err(Error::InvalidKernel {
            context: "averaged_correlation".to_string(),
            detail: format!(
                "length mismatch: rho {}, abar {}, bbar {}",
                rho.len(),
                abar.len(),
                bbar.len()
            ),
        });
    }
    let total: f64 = rho.iter().sum();
    if rho.iter().any(|&w| !(0.0..=1.0 + MASS_TOL).contains(&w)) || (total - 1.0).abs() > MASS_TOL
    {
        return Err(Error::InvalidKernel {
            context: "averaged_correlation".to_string(),
            detail: format!("weights must be a distribution (sum {total})"),
        });
    }
    for (label, values) in [("abar", abar), ("bbar", bbar)] {
        if let Some(&bad) = values.iter().find(|v| !v.is_finite() || v.abs() > 1.0 + 1e-12) {
            return Err(Error::OutOfRange {
                what: if label == "abar" {
                    "averaged station-1 outcome"
                } else {
                    "averaged station-2 outcome"
                },
                value: bad,
                lo: -1.0,
                hi: 1.0,
            });
        }
    }
    Ok(rho
        .iter()
        .zip(abar.iter().zip(bbar.iter()))
        .map(|(&w, (&x, &y))| w * x * y)
        .sum())
}

/// Per-state averaged outcomes of a kernel at fixed settings, for feeding
/// [`averaged_correlation`]: (weights, station-1 averages, station-2
/// averages).
pub fn per_hidden_expectations(
    kernel: &dyn JointKernel,
    a: BinarySetting,
    b: BinarySetting,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let n = kernel.hidden_count();
    let mut rho = Vec::with_capacity(n);
    let mut abar = Vec::with_capacity(n);
    let mut bbar = Vec::with_capacity(n);
    for index in 0..n {
        rho.push(kernel.weight(a, b, index));
        abar.push(marginal_station1(kernel, a, b, index)?.expectation());
        bbar.push(marginal_station2(kernel, a, b, index)?.expectation());
    }
    Ok((rho, abar, bbar))
}

/// The four-correlation statistic S = E00 - E01 + E10 + E11.
/// Inputs outside [-1, 1] are rejected; |S| <= 4 always.
pub fn chsh(e00: f64, e01: f64, e10: f64, e11: f64) -> Result<f64> {
    for (name, e) in [("E00", e00), ("E01", e01), ("E10", e10), ("E11", e11)] {
        if !e.is_finite() || e.abs() > 1.0 + 1e-12 {
            return Err(Error::OutOfRange {
                what: match name {
                    "E00" => "correlation E00",
                    "E01" => "correlation E01",
                    "E10" => "correlation E10",
                    _ => "correlation E11",
                },
                value: e,
                lo: -1.0,
                hi: 1.0,
            });
        }
    }
    Ok(e00 - e01 + e10 + e11)
}

/// Materialized kernels sampled from seeded flat-simplex draws, for property
/// tests of the analyzer itself.
pub mod random {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Default hidden-grid size for sampled kernels.
    pub const DEFAULT_GRID: usize = 8;

    /// Structural family of a sampled kernel.
    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub enum KernelKind {
        /// Joint distributions drawn freely from the simplex.
        General,
        /// Products of per-(a, b) station Bernoullis: outcome independence
        /// holds by construction, parameter independence generically fails.
        ProductForm,
        /// Products of station Bernoullis that read only the local setting:
        /// factorizable by construction.
        LocalProduct,
    }

    impl KernelKind {
        pub const ALL: [KernelKind; 3] = [
            KernelKind::General,
            KernelKind::ProductForm,
            KernelKind::LocalProduct,
        ];
    }

    /// A kernel with all conditionals tabulated; weights are
    /// setting-independent.
    #[derive(Debug, Clone)]
    pub struct SampledKernel {
        kind: KernelKind,
        weights: Vec<f64>,
        joints: Vec<[JointDist; 4]>, // per hidden state, per setting pair
    }

    impl JointKernel for SampledKernel {
        fn hidden_count(&self) -> usize {
            self.weights.len()
        }

        fn weight(&self, _a: BinarySetting, _b: BinarySetting, index: usize) -> f64 {
            self.weights[index]
        }

        fn joint(&self, a: BinarySetting, b: BinarySetting, index: usize) -> JointDist {
            self.joints[index][crate::table::SettingPair::new(a, b).index()]
        }
    }

    impl SampledKernel {
        pub fn kind(&self) -> KernelKind {
            self.kind
        }
    }

    fn simplex4(rng: &mut ChaCha8Rng) -> [f64; 4] {
        // flat Dirichlet via normalized exponentials
        let mut draws = [0.0; 4];
        for d in &mut draws {
            let u: f64 = rng.gen::<f64>();
            *d = -(1.0 - u).ln();
        }
        let total: f64 = draws.iter().sum();
        draws.map(|d| d / total)
    }

    /// Samples a kernel of the given family on a hidden grid of `grid`
    /// states; fully determined by the seed.
    pub fn sample_kernel(seed: u64, kind: KernelKind, grid: usize) -> SampledKernel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<f64> = (0..grid).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.into_iter().map(|w| w / total).collect();

        let joints = (0..grid)
            .map(|_| {
                let mut per_pair = [JointDist::from_probs([0.25; 4]); 4];
                match kind {
                    KernelKind::General => {
                        for slot in &mut per_pair {
                            *slot = JointDist::from_probs(simplex4(&mut rng));
                        }
                    }
                    KernelKind::ProductForm => {
                        for slot in &mut per_pair {
                            let px: f64 = rng.gen();
                            let py: f64 = rng.gen();
                            *slot = product_dist(px, py);
                        }
                    }
                    KernelKind::LocalProduct => {
                        let px = [rng.gen::<f64>(), rng.gen::<f64>()];
                        let py = [rng.gen::<f64>(), rng.gen::<f64>()];
                        for sp in crate::table::SettingPair::ALL {
                            per_pair[sp.index()] =
                                product_dist(px[sp.a.bit() as usize], py[sp.b.bit() as usize]);
                        }
                    }
                }
                per_pair
            })
            .collect();

        SampledKernel {
            kind,
            weights,
            joints,
        }
    }

    fn product_dist(px: f64, py: f64) -> JointDist {
        JointDist::from_probs([
            px * py,
            px * (1.0 - py),
            (1.0 - px) * py,
            (1.0 - px) * (1.0 - py),
        ])
    }
}
