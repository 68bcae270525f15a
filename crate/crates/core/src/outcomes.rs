//! Station outcome functions for the table model.
//!
//! For each setting pair the target correlation t = -(direction dot product)
//! is factored symmetrically into two station biases: 2p-1 = sign(t)*sqrt|t|
//! at station 1 and 2q-1 = sqrt|t| at station 2. Outcomes threshold the
//! fractional part of the local parameter against p or q; a fixed half of the
//! clock indices flips both stations' signs, which cancels in every product
//! while zeroing the averaged single-station expectations. Station 1 never
//! reads the distant setting: it recovers it from (m, u) through the region
//! config, which is exactly the point the bench exists to exhibit.

use crate::analysis::{JointDist, JointKernel};
use crate::direction::{Outcome, SettingMap};
use crate::error::{Error, Result};
use crate::table::{BinarySetting, ClockIndex, RegionConfig, SettingPair, StationParam};

/// The two cut points applied to the fractional parts inside a supported
/// cell: `station1` is the probability of +1 at station 1 before flipping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub station1: f64,
    pub station2: f64,
}

/// Per-setting-pair thresholds plus the flip set over clock indices.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeFns {
    thresholds: [Thresholds; 4],
    targets: [f64; 4],
    flips: [bool; 16],
}

impl OutcomeFns {
    /// Builds outcome functions whose exact expectations reproduce
    /// -(a dot b) for the four allowed setting combinations.
    pub fn for_settings(map: &SettingMap) -> Self {
        let targets: Vec<f64> = SettingPair::ALL
            .into_iter()
            .map(|sp| crate::kernels::singlet_correlation(map.station1(sp.a), map.station2(sp.b)))
            .collect();
        Self::from_targets([targets[0], targets[1], targets[2], targets[3]])
            .expect("dot products of unit vectors are in [-1, 1]")
    }

    /// Builds from raw per-pair targets in [-1, 1], canonical pair order.
    pub fn from_targets(targets: [f64; 4]) -> Result<Self> {
        let mut thresholds = [Thresholds { station1: 0.0, station2: 0.0 }; 4];
        for (k, &t) in targets.iter().enumerate() {
            if !t.is_finite() || t.abs() > 1.0 {
                return Err(Error::OutOfRange {
                    what: "correlation target",
                    value: t,
                    lo: -1.0,
                    hi: 1.0,
                });
            }
            let root = t.abs().sqrt();
            let signed_root = if t < 0.0 { -root } else { root };
            thresholds[k] = Thresholds {
                station1: (1.0 + signed_root) / 2.0,
                station2: (1.0 + root) / 2.0,
            };
        }
        // Flip exactly the eight clock indices whose row indices have equal
        // parity; balanced and independent of the settings.
        let mut flips = [false; 16];
        for m in ClockIndex::all() {
            flips[m.index0()] = (m.station1_row() + m.station2_row()) % 2 == 0;
        }
        Ok(OutcomeFns {
            thresholds,
            targets,
            flips,
        })
    }

    pub fn thresholds(&self, a: BinarySetting, b: BinarySetting) -> Thresholds {
        self.thresholds[SettingPair::new(a, b).index()]
    }

    pub fn target(&self, a: BinarySetting, b: BinarySetting) -> f64 {
        self.targets[SettingPair::new(a, b).index()]
    }

    pub fn is_flipped(&self, m: ClockIndex) -> bool {
        self.flips[m.index0()]
    }

    pub fn flip_set(&self) -> Vec<ClockIndex> {
        ClockIndex::all().filter(|m| self.is_flipped(*m)).collect()
    }

    fn sign(&self, m: ClockIndex) -> f64 {
        if self.is_flipped(m) {
            -1.0
        } else {
            1.0
        }
    }

    /// Serializes in the same text family as the region config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("# outcome functions: per setting pair, target and thresholds\n");
        for sp in SettingPair::ALL {
            let th = self.thresholds[sp.index()];
            out.push_str(&format!(
                "pair {} {}   target {:.17e}   p {:.17e}   q {:.17e}\n",
                sp.a,
                sp.b,
                self.targets[sp.index()],
                th.station1,
                th.station2
            ));
        }
        let flips: Vec<String> = self.flip_set().iter().map(|m| m.linear().to_string()).collect();
        out.push_str(&format!("flips: {}\n", flips.join(" ")));
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut targets = [f64::NAN; 4];
        let mut flips: Option<[bool; 16]> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let n = lineno + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("flips:") {
                let mut set = [false; 16];
                for tok in rest.split_whitespace() {
                    let lin: u8 = tok.parse().map_err(|e| Error::Parse {
                        line: n,
                        msg: format!("bad flip index '{tok}': {e}"),
                    })?;
                    let m = ClockIndex::from_linear(lin).map_err(|e| Error::Parse {
                        line: n,
                        msg: e.to_string(),
                    })?;
                    set[m.index0()] = true;
                }
                flips = Some(set);
                continue;
            }
            let Some(rest) = line.strip_prefix("pair ") else {
                return Err(Error::Parse {
                    line: n,
                    msg: format!("unrecognized line '{line}'"),
                });
            };
            let fields: Vec<&str> = rest.split_whitespace().collect();
            if fields.len() != 8 || fields[2] != "target" || fields[4] != "p" || fields[6] != "q" {
                return Err(Error::Parse {
                    line: n,
                    msg: "expected 'pair a b target T p P q Q'".to_string(),
                });
            }
            let bit = |s: &str| -> Result<BinarySetting> {
                let v: u8 = s.parse().map_err(|e| Error::Parse {
                    line: n,
                    msg: format!("bad setting '{s}': {e}"),
                })?;
                BinarySetting::from_bit(v)
            };
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|e| Error::Parse {
                    line: n,
                    msg: format!("bad real '{s}': {e}"),
                })
            };
            let sp = SettingPair::new(bit(fields[0])?, bit(fields[1])?);
            targets[sp.index()] = num(fields[3])?;
            // thresholds are re-derived from the target; p and q in the file
            // are cross-checked so a hand-edited file cannot drift
            let p = num(fields[5])?;
            let q = num(fields[7])?;
            let t = targets[sp.index()];
            let root = t.abs().sqrt();
            let signed_root = if t < 0.0 { -root } else { root };
            if (p - (1.0 + signed_root) / 2.0).abs() > 1e-15
                || (q - (1.0 + root) / 2.0).abs() > 1e-15
            {
                return Err(Error::Parse {
                    line: n,
                    msg: format!("thresholds for pair ({},{}) disagree with target", sp.a, sp.b),
                });
            }
        }
        if targets.iter().any(|t| t.is_nan()) {
            return Err(Error::Parse {
                line: 0,
                msg: "missing a 'pair' line".to_string(),
            });
        }
        let mut fns = Self::from_targets(targets)?;
        if let Some(set) = flips {
            fns.flips = set;
        }
        Ok(fns)
    }
}

/// Station-1 outcome A_m(a, u). Reads only the local setting and parameter;
/// the distant setting enters through what (m, u) reveal.
pub fn station1_outcome(
    m: ClockIndex,
    a: BinarySetting,
    u: StationParam,
    fns: &OutcomeFns,
    rc: &RegionConfig,
) -> Result<Outcome> {
    let (implied_a, b) = rc.infer_settings_from_u(m, u)?;
    if implied_a != a {
        return Err(Error::SettingMismatch {
            m: m.to_string(),
            axis: "column",
            index: u.column(),
            implied: implied_a.bit(),
            given: a.bit(),
        });
    }
    let p = fns.thresholds(a, b).station1;
    // boundary rule: the comparison is strict
    let bare = if u.frac() < p { Outcome::Plus } else { Outcome::Minus };
    Ok(if fns.is_flipped(m) { bare.flipped() } else { bare })
}

/// Station-2 outcome B_m(b, v), symmetric to [`station1_outcome`].
pub fn station2_outcome(
    m: ClockIndex,
    b: BinarySetting,
    v: StationParam,
    fns: &OutcomeFns,
    rc: &RegionConfig,
) -> Result<Outcome> {
    let (a, implied_b) = rc.infer_settings_from_v(m, v)?;
    if implied_b != b {
        return Err(Error::SettingMismatch {
            m: m.to_string(),
            axis: "row",
            index: v.column(),
            implied: implied_b.bit(),
            given: b.bit(),
        });
    }
    let q = fns.thresholds(a, b).station2;
    let bare = if v.frac() < q { Outcome::Plus } else { Outcome::Minus };
    Ok(if fns.is_flipped(m) { bare.flipped() } else { bare })
}

/// Exact model expectation of the outcome product at the given settings:
/// per clock index the cell integral factorizes into (2p-1)(2q-1) with the
/// flip signs cancelling, and the sixteen indices average to the target.
pub fn model_correlation(
    a: BinarySetting,
    b: BinarySetting,
    fns: &OutcomeFns,
    rc: &RegionConfig,
) -> f64 {
    let th = fns.thresholds(a, b);
    let mut sum = 0.0;
    for m in ClockIndex::all() {
        let _ = rc.supported_cell(m, a, b); // one unit cell per index carries the mass
        let sign = fns.sign(m);
        let e1 = sign * (2.0 * th.station1 - 1.0);
        let e2 = sign * (2.0 * th.station2 - 1.0);
        sum += e1 * e2;
    }
    sum / 16.0
}

/// Which station a single-station statistic refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StationId {
    One,
    Two,
}

/// Exact averaged single-station expectation; zero by the half-flip
/// construction (the signed terms cancel pairwise, exactly in f64).
pub fn model_marginal(
    a: BinarySetting,
    b: BinarySetting,
    station: StationId,
    fns: &OutcomeFns,
    rc: &RegionConfig,
) -> f64 {
    let th = fns.thresholds(a, b);
    let bias = match station {
        StationId::One => 2.0 * th.station1 - 1.0,
        StationId::Two => 2.0 * th.station2 - 1.0,
    };
    let mut sum = 0.0;
    for m in ClockIndex::all() {
        let _ = rc.supported_cell(m, a, b);
        sum += fns.sign(m) * bias;
    }
    sum / 16.0
}

/// The table model as a joint kernel over the sixteen clock indices: given
/// (m, a, b) the two outcomes are independent Bernoullis, so this kernel
/// satisfies outcome independence while its station-1 conditional depends on
/// the distant setting.
#[derive(Debug, Clone)]
pub struct TableModelKernel {
    fns: OutcomeFns,
}

impl TableModelKernel {
    pub fn new(fns: OutcomeFns) -> Self {
        TableModelKernel { fns }
    }

    fn plus_probability(&self, m: ClockIndex, th: f64) -> f64 {
        if self.fns.is_flipped(m) {
            1.0 - th
        } else {
            th
        }
    }
}

impl JointKernel for TableModelKernel {
    fn hidden_count(&self) -> usize {
        16
    }

    fn hidden_label(&self, index: usize) -> String {
        ClockIndex::from_linear(index as u8 + 1)
            .map(|m| format!("m{m}"))
            .unwrap_or_else(|_| format!("state-{index}"))
    }

    fn weight(&self, _a: BinarySetting, _b: BinarySetting, _index: usize) -> f64 {
        1.0 / 16.0
    }

    fn joint(&self, a: BinarySetting, b: BinarySetting, index: usize) -> JointDist {
        let m = ClockIndex::from_linear(index as u8 + 1).expect("index < 16");
        let th = self.fns.thresholds(a, b);
        let px = self.plus_probability(m, th.station1);
        let py = self.plus_probability(m, th.station2);
        JointDist::from_probs([
            px * py,
            px * (1.0 - py),
            (1.0 - px) * py,
            (1.0 - px) * (1.0 - py),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{synthesize_regions, PatternTable, SynthesisOptions};
    use approx::assert_abs_diff_eq;

    fn fixture() -> (PatternTable, RegionConfig, OutcomeFns) {
        let patterns = PatternTable::standard();
        let rc = synthesize_regions(SynthesisOptions::default(), &patterns)
            .feasible()
            .unwrap();
        let fns = OutcomeFns::for_settings(&SettingMap::canonical());
        (patterns, rc, fns)
    }

    #[test]
    fn threshold_solutions() {
        // parallel directions: t = -1
        let fns = OutcomeFns::from_targets([-1.0, 0.0, -0.5, 1.0]).unwrap();
        let th = fns.thresholds(BinarySetting::Zero, BinarySetting::Zero);
        assert_eq!(th.station1, 0.0);
        assert_eq!(th.station2, 1.0);
        // orthogonal: t = 0
        let th0 = fns.thresholds(BinarySetting::Zero, BinarySetting::One);
        assert_eq!(th0.station1, 0.5);
        assert_eq!(th0.station2, 0.5);
        // the canonical diagonal target
        let t = -(2.0f64.sqrt()) / 2.0;
        let fns = OutcomeFns::from_targets([t, 0.0, 0.0, 0.0]).unwrap();
        let th = fns.thresholds(BinarySetting::Zero, BinarySetting::Zero);
        assert_abs_diff_eq!(th.station1, 0.0795517923731427, epsilon = 1e-15);
        assert_abs_diff_eq!(th.station2, 0.9204482076268573, epsilon = 1e-15);
        assert_abs_diff_eq!(
            (2.0 * th.station1 - 1.0) * (2.0 * th.station2 - 1.0),
            t,
            epsilon = 1e-15
        );
        assert!(OutcomeFns::from_targets([1.5, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn product_of_biases_hits_every_target() {
        let fns = OutcomeFns::for_settings(&SettingMap::canonical());
        for sp in SettingPair::ALL {
            let th = fns.thresholds(sp.a, sp.b);
            let t = fns.target(sp.a, sp.b);
            assert_abs_diff_eq!(
                (2.0 * th.station1 - 1.0) * (2.0 * th.station2 - 1.0),
                t,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn flip_set_has_eight_members() {
        let fns = OutcomeFns::from_targets([0.0; 4]).unwrap();
        assert_eq!(fns.flip_set().len(), 8);
    }

    #[test]
    fn outcome_evaluation_edges() {
        let (_, rc, fns) = fixture();
        // find an unflipped m and aim inside a supported cell
        let m = ClockIndex::all().find(|&m| !fns.is_flipped(m)).unwrap();
        let a = BinarySetting::Zero;
        let (_, b) = {
            let cell = rc.supported_cell(m, a, BinarySetting::Zero);
            rc.infer_settings_from_u(m, StationParam::new(cell.col as f64).unwrap())
                .unwrap()
        };
        let cell = rc.supported_cell(m, a, b);
        let p = fns.thresholds(a, b).station1;
        assert!(p > 0.0);

        let at_zero = StationParam::new(cell.col as f64).unwrap();
        assert_eq!(station1_outcome(m, a, at_zero, &fns, &rc).unwrap(), Outcome::Plus);

        let near_one = StationParam::new(cell.col as f64 + 0.99).unwrap();
        if p < 0.99 {
            assert_eq!(
                station1_outcome(m, a, near_one, &fns, &rc).unwrap(),
                Outcome::Minus
            );
        }

        // a flipped m reverses the sign at the same fractional position
        let mf = ClockIndex::all().find(|&m| fns.is_flipped(m)).unwrap();
        let cell_f = rc.supported_cell(mf, a, b);
        // same (a, b) may live in a different column under mf; reconstruct
        let (a_f, b_f) = rc
            .infer_settings_from_u(mf, StationParam::new(cell_f.col as f64).unwrap())
            .unwrap();
        assert_eq!((a_f, b_f), (a, b));
        let at_zero_f = StationParam::new(cell_f.col as f64).unwrap();
        assert_eq!(
            station1_outcome(mf, a, at_zero_f, &fns, &rc).unwrap(),
            Outcome::Minus
        );

        // wrong local setting for this column is a contract violation
        let err = station1_outcome(m, a.flipped(), at_zero, &fns, &rc).unwrap_err();
        assert!(matches!(err, Error::SettingMismatch { .. }));
    }

    #[test]
    fn exact_correlation_matches_targets() {
        let (_, rc, fns) = fixture();
        let expected = [
            -(2.0f64.sqrt()) / 2.0,
            (2.0f64.sqrt()) / 2.0,
            -(2.0f64.sqrt()) / 2.0,
            -(2.0f64.sqrt()) / 2.0,
        ];
        for (sp, want) in SettingPair::ALL.into_iter().zip(expected) {
            let got = model_correlation(sp.a, sp.b, &fns, &rc);
            assert_abs_diff_eq!(got, want, epsilon = 1e-12);
        }
        // orthogonal target
        let fns0 = OutcomeFns::from_targets([0.0; 4]).unwrap();
        assert_eq!(
            model_correlation(BinarySetting::Zero, BinarySetting::Zero, &fns0, &rc),
            0.0
        );
    }

    #[test]
    fn averaged_marginals_vanish_exactly() {
        let (_, rc, fns) = fixture();
        for sp in SettingPair::ALL {
            assert_eq!(model_marginal(sp.a, sp.b, StationId::One, &fns, &rc), 0.0);
            assert_eq!(model_marginal(sp.a, sp.b, StationId::Two, &fns, &rc), 0.0);
        }
        // conditional on an unflipped m with t = -1, station 1 always reads -1
        let fns1 = OutcomeFns::from_targets([-1.0, 0.0, 0.0, 0.0]).unwrap();
        let m = ClockIndex::all().find(|&m| !fns1.is_flipped(m)).unwrap();
        let a = BinarySetting::Zero;
        let b = BinarySetting::Zero;
        let cell = rc.supported_cell(m, a, b);
        for frac in [0.0, 0.3, 0.9] {
            let u = StationParam::new(cell.col as f64 + frac).unwrap();
            assert_eq!(
                station1_outcome(m, a, u, &fns1, &rc).unwrap(),
                Outcome::Minus
            );
        }
    }

    #[test]
    fn table_kernel_violates_parameter_independence_but_not_outcome_independence() {
        use crate::analysis::{
            check_outcome_independence, check_parameter_independence, marginal_station1,
            Verdict, DEFAULT_TOL,
        };
        let fns = OutcomeFns::for_settings(&SettingMap::canonical());
        let kernel = TableModelKernel::new(fns.clone());

        // closed-form oracle for the station-1 conditional
        for m in ClockIndex::all() {
            for sp in SettingPair::ALL {
                let p = fns.thresholds(sp.a, sp.b).station1;
                let want = if fns.is_flipped(m) { 1.0 - p } else { p };
                let got = marginal_station1(&kernel, sp.a, sp.b, m.index0()).unwrap();
                assert_abs_diff_eq!(got.p_plus, want, epsilon = 1e-12);
            }
        }

        let pi = check_parameter_independence(&kernel, DEFAULT_TOL).unwrap();
        assert_eq!(pi.verdict, Verdict::Violated);
        let w = pi.witness.unwrap();
        // the conditional moves with the distant setting by |p(a,0) - p(a,1)|
        let p0 = fns.thresholds(BinarySetting::Zero, BinarySetting::Zero).station1;
        let p1 = fns.thresholds(BinarySetting::Zero, BinarySetting::One).station1;
        assert_abs_diff_eq!(w.deviation, (p0 - p1).abs(), epsilon = 1e-12);

        // outcomes are independent Bernoullis given (m, a, b)
        let oi = check_outcome_independence(&kernel, DEFAULT_TOL).unwrap();
        assert_eq!(oi.verdict, Verdict::Holds);
    }

    #[test]
    fn outcome_fns_text_round_trip() {
        let fns = OutcomeFns::for_settings(&SettingMap::canonical());
        let text = fns.to_text();
        let parsed = OutcomeFns::from_text(&text).unwrap();
        assert_eq!(parsed, fns);
        assert!(OutcomeFns::from_text("pair 0 0 target x p 0 q 0\n").is_err());
    }
}
