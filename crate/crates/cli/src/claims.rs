//! The verification claim catalog: every checkable model property, each with
//! its expected verdict. Claims whose expected verdict is VIOLATED pass when
//! the checker reports the violation.

use belltest::report::Value;
use belltest::{
    bit_error_rate, blind_decode, check_distribution_independence,
    check_marginal_distribution_independence, chsh, model_correlation, run_experiment,
    signal_decode, singlet_correlation, synthesize_regions, BinarySetting, BlindStation1Record,
    ClockIndex, ClockMode, OutcomeFns, PatternTable, RegionConfig, Schedule, SettingMap,
    SettingPair, Station1Record, StationParam, Synthesis, SynthesisOptions,
    TableInstrumentModel, Tier,
};

const TOL_EXACT: f64 = 1e-12;
const SIGMA_BAND: f64 = 4.0;

pub struct ClaimInputs<'a> {
    pub patterns: &'a PatternTable,
    pub rc: &'a RegionConfig,
    pub map: &'a SettingMap,
    pub runs: u64,
    pub seed: u64,
}

pub struct ClaimReport {
    pub id: &'static str,
    /// The property statement the claim checks.
    pub citation: &'static str,
    pub expected: String,
    pub observed: String,
    pub passed: bool,
    pub evidence: Value,
}

impl ClaimReport {
    pub fn to_value(&self) -> Value {
        Value::Map(vec![
            ("id".to_string(), Value::text(self.id)),
            ("citation".to_string(), Value::text(self.citation)),
            ("expected".to_string(), Value::text(&self.expected)),
            ("observed".to_string(), Value::text(&self.observed)),
            ("passed".to_string(), Value::Bool(self.passed)),
            ("evidence".to_string(), self.evidence.clone()),
        ])
    }
}

fn claim(
    id: &'static str,
    citation: &'static str,
    expected: impl Into<String>,
    observed: impl Into<String>,
    passed: bool,
    evidence: Value,
) -> ClaimReport {
    ClaimReport {
        id,
        citation,
        expected: expected.into(),
        observed: observed.into(),
        passed,
        evidence,
    }
}

pub fn run_catalog(inputs: &ClaimInputs) -> Vec<ClaimReport> {
    let mut claims = vec![
        normalization(inputs),
        single_cell_support(inputs),
        settings_from_u(inputs),
        settings_from_v(inputs),
        mixture_uniformity(inputs),
        correlation_match(inputs),
        shared_region_infeasibility(inputs),
        parameter_dependence_witness(inputs),
    ];
    // run generation assumes a structurally valid config; on a broken one
    // the statistical claims are reported as failed-by-skip instead
    if claims.iter().all(|c| c.passed) {
        let (signal, blind) = decoding_claims(inputs);
        claims.push(signal);
        claims.push(blind);
    } else {
        claims.push(skipped_claim(
            "signalling-ber",
            "with the clock index observable, station 1 reads the distant setting off (m, u) without error",
            "bit error rate exactly 0",
        ));
        claims.push(skipped_claim(
            "blind-ber",
            "with the clock index hidden the parameter marginal carries no setting information, so decoding is chance-level",
            "bit error rate at chance level",
        ));
    }
    claims
}

fn skipped_claim(
    id: &'static str,
    citation: &'static str,
    expected: &'static str,
) -> ClaimReport {
    claim(
        id,
        citation,
        expected,
        "skipped: structural claims failed, record generation is undefined",
        false,
        Value::Map(vec![]),
    )
}

fn normalization(inputs: &ClaimInputs) -> ClaimReport {
    let mut bad = Vec::new();
    for m in ClockIndex::all() {
        for sp in SettingPair::ALL {
            let mass = inputs.rc.normalization(inputs.patterns, m, sp.a, sp.b);
            if mass != 1 {
                bad.push(Value::text(format!(
                    "m{m} a={} b={} mass={mass}",
                    sp.a, sp.b
                )));
            }
        }
    }
    let passed = bad.is_empty();
    claim(
        "normalization",
        "each per-index density integrates to exactly 1 over the parameter square",
        "unit mass for all 64 (m,a,b)",
        if passed {
            "unit mass for all 64 (m,a,b)".to_string()
        } else {
            format!("{} deviations", bad.len())
        },
        passed,
        Value::Map(vec![("deviations".to_string(), Value::List(bad))]),
    )
}

fn single_cell_support(inputs: &ClaimInputs) -> ClaimReport {
    let mut bad = Vec::new();
    for m in ClockIndex::all() {
        for sp in SettingPair::ALL {
            let cell = inputs.rc.supported_cell(m, sp.a, sp.b);
            let mut supported = Vec::new();
            for col in 0..4u8 {
                for row in 0..4u8 {
                    if inputs.rc.density_at(inputs.patterns, m, sp.a, sp.b, col, row) == 1 {
                        supported.push((col, row));
                    }
                }
            }
            if supported != vec![(cell.col, cell.row)] {
                bad.push(Value::text(format!(
                    "m{m} a={} b={}: support {supported:?} vs cell {cell}",
                    sp.a, sp.b
                )));
            }
        }
    }
    let passed = bad.is_empty();
    claim(
        "single-cell-support",
        "each (m,a,b) puts its whole mass on exactly one unit cell",
        "one supported cell per (m,a,b), matching the config",
        if passed {
            "unique supported cell everywhere".to_string()
        } else {
            format!("{} mismatches", bad.len())
        },
        passed,
        Value::Map(vec![("mismatches".to_string(), Value::List(bad))]),
    )
}

fn settings_from_u(inputs: &ClaimInputs) -> ClaimReport {
    let mut failures = Vec::new();
    for m in ClockIndex::all() {
        for sp in SettingPair::ALL {
            let cell = inputs.rc.supported_cell(m, sp.a, sp.b);
            let u = StationParam::new(cell.col as f64 + 0.5).expect("in range");
            match inputs.rc.infer_settings_from_u(m, u) {
                Ok(pair) if pair == (sp.a, sp.b) => {}
                Ok(pair) => failures.push(Value::text(format!(
                    "m{m}: expected ({},{}), inferred ({},{})",
                    sp.a, sp.b, pair.0, pair.1
                ))),
                Err(e) => failures.push(Value::text(format!("m{m}: {e}"))),
            }
        }
    }
    let passed = failures.is_empty();
    claim(
        "settings-from-u",
        "the clock index and the station-1 parameter pin down both settings",
        "round-trip inference for all 64 (m,a,b)",
        if passed {
            "all 64 round trips correct".to_string()
        } else {
            format!("{} failures", failures.len())
        },
        passed,
        Value::Map(vec![("failures".to_string(), Value::List(failures))]),
    )
}

fn settings_from_v(inputs: &ClaimInputs) -> ClaimReport {
    let mut failures = Vec::new();
    for m in ClockIndex::all() {
        for sp in SettingPair::ALL {
            let cell = inputs.rc.supported_cell(m, sp.a, sp.b);
            let v = StationParam::new(cell.row as f64 + 0.5).expect("in range");
            match inputs.rc.infer_settings_from_v(m, v) {
                Ok(pair) if pair == (sp.a, sp.b) => {}
                Ok(pair) => failures.push(Value::text(format!(
                    "m{m}: expected ({},{}), inferred ({},{})",
                    sp.a, sp.b, pair.0, pair.1
                ))),
                Err(e) => failures.push(Value::text(format!("m{m}: {e}"))),
            }
        }
    }
    let passed = failures.is_empty();
    claim(
        "settings-from-v",
        "the clock index and the station-2 parameter pin down both settings",
        "round-trip inference for all 64 (m,a,b)",
        if passed {
            "all 64 round trips correct".to_string()
        } else {
            format!("{} failures", failures.len())
        },
        passed,
        Value::Map(vec![("failures".to_string(), Value::List(failures))]),
    )
}

fn mixture_uniformity(inputs: &ClaimInputs) -> ClaimReport {
    let mut bad = Vec::new();
    let reference = inputs
        .rc
        .covering_counts(inputs.patterns, BinarySetting::Zero, BinarySetting::Zero);
    for sp in SettingPair::ALL {
        let counts = inputs.rc.covering_counts(inputs.patterns, sp.a, sp.b);
        if counts != reference {
            bad.push(Value::text(format!(
                "covering counts differ at a={} b={}",
                sp.a, sp.b
            )));
        }
        for (col, col_counts) in counts.iter().enumerate() {
            for (row, &count) in col_counts.iter().enumerate() {
                if count != 1 {
                    bad.push(Value::text(format!(
                        "cell ({col},{row}) covered {count} times at a={} b={}",
                        sp.a, sp.b
                    )));
                }
            }
        }
    }
    let passed = bad.is_empty();
    let observed = if passed {
        "uniform mixture, identical across setting pairs".to_string()
    } else {
        format!("{} deviations", bad.len())
    };
    claim(
        "mixture-uniformity",
        "the equal-weight mixture over clock indices is uniform (1/16 per cell) and setting-independent",
        "density 1/16 on every cell for all four setting pairs",
        observed,
        passed,
        Value::Map(vec![("deviations".to_string(), Value::List(bad))]),
    )
}

fn correlation_match(inputs: &ClaimInputs) -> ClaimReport {
    let fns = OutcomeFns::for_settings(inputs.map);
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    let mut exact = [0.0f64; 4];
    for sp in SettingPair::ALL {
        let want = singlet_correlation(inputs.map.station1(sp.a), inputs.map.station2(sp.b));
        let got = model_correlation(sp.a, sp.b, &fns, inputs.rc);
        worst = worst.max((got - want).abs());
        exact[sp.index()] = got;
        rows.push(Value::Map(vec![
            ("a".to_string(), Value::Int(sp.a.bit() as i64)),
            ("b".to_string(), Value::Int(sp.b.bit() as i64)),
            ("model".to_string(), Value::Float(got)),
            ("target".to_string(), Value::Float(want)),
        ]));
    }
    let s = chsh(exact[0], exact[1], exact[2], exact[3]);
    let passed = worst <= TOL_EXACT && s.is_ok();
    let s_text = s
        .map(|v| format!("{v}"))
        .unwrap_or_else(|e| format!("error: {e}"));
    claim(
        "correlation-match",
        "exact model expectations equal the negative direction dot products at all four setting pairs",
        format!("deviation below {TOL_EXACT}"),
        format!("worst deviation {worst:.3e}, CHSH {s_text}"),
        passed,
        Value::Map(vec![
            ("pairs".to_string(), Value::List(rows)),
            ("chsh".to_string(), Value::text(s_text)),
        ]),
    )
}

fn shared_region_infeasibility(inputs: &ClaimInputs) -> ClaimReport {
    let synthesis = synthesize_regions(SynthesisOptions::tier(Tier::JOnly), inputs.patterns);
    match synthesis {
        Synthesis::Infeasible(cert) => claim(
            "shared-region-infeasibility",
            "regions shared across the station-1 row index cannot satisfy uniformity: duplicated pattern rows collapse the per-pair cell map",
            "exhaustive infeasibility certificate",
            format!(
                "infeasible after {} nodes (deepest level {})",
                cert.nodes_explored, cert.deepest_level
            ),
            true,
            Value::Map(vec![
                ("nodes".to_string(), Value::Int(cert.nodes_explored as i64)),
                (
                    "deepest_level".to_string(),
                    Value::Int(cert.deepest_level as i64),
                ),
                (
                    "tried_per_level".to_string(),
                    Value::List(
                        cert.tried_per_level
                            .iter()
                            .map(|&n| Value::Int(n as i64))
                            .collect(),
                    ),
                ),
                (
                    "first_conflict".to_string(),
                    Value::text(cert.first_conflict.unwrap_or_default()),
                ),
            ]),
        ),
        Synthesis::Feasible(_) => claim(
            "shared-region-infeasibility",
            "regions shared across the station-1 row index cannot satisfy uniformity: duplicated pattern rows collapse the per-pair cell map",
            "exhaustive infeasibility certificate",
            "a shared-region config was found".to_string(),
            false,
            Value::Map(vec![]),
        ),
    }
}

fn parameter_dependence_witness(inputs: &ClaimInputs) -> ClaimReport {
    let model = TableInstrumentModel::new(inputs.rc);
    let per_m = check_distribution_independence(&model);
    let marginal = check_marginal_distribution_independence(&model);

    // the same dependence seen by the conditional-kernel checker
    let kernel = belltest::TableModelKernel::new(OutcomeFns::for_settings(inputs.map));
    let pi = belltest::check_parameter_independence(&kernel, belltest::DEFAULT_TOL);
    let pi_violated = pi.as_ref().map(|r| !r.verdict.holds()).unwrap_or(false);

    // a witness for every clock index
    let mut witnesses = Vec::new();
    let mut all_witnessed = true;
    for m in ClockIndex::all() {
        let a = BinarySetting::Zero;
        let c0 = inputs.rc.supported_cell(m, a, BinarySetting::Zero).col;
        let c1 = inputs.rc.supported_cell(m, a, BinarySetting::One).col;
        if c0 == c1 {
            all_witnessed = false;
        }
        witnesses.push(Value::text(format!(
            "m{m}: a=0, u-column {c0} under b=0 vs {c1} under b=1"
        )));
    }

    let passed = !per_m.verdict.holds() && marginal.verdict.holds() && pi_violated && all_witnessed;
    claim(
        "parameter-dependence-witness",
        "per clock index the station parameter distributions and the conditional outcome marginals depend on the distant setting, while the m-marginal parameter distribution does not",
        "per-m instrument check VIOLATED with a witness per m; kernel PI check VIOLATED; marginal check HOLDS",
        format!(
            "per-m {}, kernel PI {}, marginal {}",
            per_m.verdict.as_str(),
            pi.as_ref()
                .map(|r| r.verdict.as_str())
                .unwrap_or("ERROR"),
            marginal.verdict.as_str()
        ),
        passed,
        Value::Map(vec![
            ("per_m_report".to_string(), per_m.to_value()),
            (
                "kernel_pi_report".to_string(),
                pi.map(|r| r.to_value())
                    .unwrap_or_else(|e| Value::text(format!("error: {e}"))),
            ),
            ("marginal_report".to_string(), marginal.to_value()),
            ("witnesses".to_string(), Value::List(witnesses)),
        ]),
    )
}

fn decoding_claims(inputs: &ClaimInputs) -> (ClaimReport, ClaimReport) {
    let fns = OutcomeFns::for_settings(inputs.map);
    let sched = Schedule::random_pairs(inputs.runs as usize, inputs.seed ^ 0x51, ClockMode::Cyclic)
        .expect("runs >= 1");
    let records = run_experiment(inputs.runs, &sched, inputs.seed, &fns, inputs.rc);
    let truth: Vec<BinarySetting> = records.iter().map(|r| r.b).collect();
    let views: Vec<Station1Record> = records.iter().map(|r| r.station1_view()).collect();

    let signal = match signal_decode(&views, inputs.rc) {
        Ok(decoded) => {
            let ber = bit_error_rate(&decoded, &truth);
            claim(
                "signalling-ber",
                "with the clock index observable, station 1 reads the distant setting off (m, u) without error",
                "bit error rate exactly 0",
                format!("bit error rate {ber} over {} runs", inputs.runs),
                ber == 0.0,
                Value::Map(vec![
                    ("runs".to_string(), Value::Int(inputs.runs as i64)),
                    ("ber".to_string(), Value::Float(ber)),
                ]),
            )
        }
        Err(e) => claim(
            "signalling-ber",
            "with the clock index observable, station 1 reads the distant setting off (m, u) without error",
            "bit error rate exactly 0",
            format!("decode error: {e}"),
            false,
            Value::Map(vec![]),
        ),
    };

    let blind_views: Vec<BlindStation1Record> = views.iter().map(|v| v.blind()).collect();
    let report = blind_decode(&blind_views, inputs.rc);
    let ber = bit_error_rate(&report.decoded, &truth);
    let sigma = 0.5 / (inputs.runs as f64).sqrt();
    let within = (ber - 0.5).abs() <= SIGMA_BAND * sigma;
    let likelihoods_tie = (0..2).all(|a| report.column_counts[a][0] == report.column_counts[a][1]);
    let blind = claim(
        "blind-ber",
        "with the clock index hidden the parameter marginal carries no setting information, so decoding is chance-level",
        format!("bit error rate within {SIGMA_BAND} sigma of 0.5"),
        format!("bit error rate {ber} (sigma {sigma:.4}), likelihood tables identical: {likelihoods_tie}"),
        within && likelihoods_tie,
        Value::Map(vec![
            ("runs".to_string(), Value::Int(inputs.runs as i64)),
            ("ber".to_string(), Value::Float(ber)),
            ("sigma".to_string(), Value::Float(sigma)),
        ]),
    );
    (signal, blind)
}
