//! Statistical checks of the run simulator against its exact counterparts.

use belltest::{
    estimate_correlation, model_correlation, run_experiment, BinarySetting, ClockMode,
    OutcomeFns, PatternTable, Schedule, SettingMap, SettingPair, StationId, SynthesisOptions,
};

const N: u64 = 1_000_000;
const SIGMA_BAND: f64 = 4.0;
const SEED: u64 = 0x0CC5;

#[test]
fn occupancy_and_marginals_at_one_million_runs() {
    let patterns = PatternTable::standard();
    let rc = belltest::synthesize_regions(SynthesisOptions::default(), &patterns)
        .feasible()
        .unwrap();
    let fns = OutcomeFns::for_settings(&SettingMap::canonical());

    let a = BinarySetting::Zero;
    let b = BinarySetting::One;
    let sched = Schedule::fixed(a, b, ClockMode::UniformRandom);
    let records = run_experiment(N, &sched, SEED, &fns, &rc);

    // cell occupancy: multinomial with p = 1/16 per cell
    let mut counts = [[0u64; 4]; 4];
    for r in &records {
        counts[r.u.column() as usize][r.v.column() as usize] += 1;
    }
    let p = 1.0 / 16.0;
    let mean = N as f64 * p;
    let sigma = (N as f64 * p * (1.0 - p)).sqrt();
    for (col, col_counts) in counts.iter().enumerate() {
        for (row, &count) in col_counts.iter().enumerate() {
            let dev = (count as f64 - mean).abs();
            assert!(
                dev <= SIGMA_BAND * sigma,
                "cell ({col},{row}) occupancy {count} deviates {dev:.1} (> {SIGMA_BAND} sigma)"
            );
        }
    }

    // single-station averages: exactly zero in the model, so the empirical
    // means sit within the statistical band around zero
    let exact_marginal = belltest::model_marginal(a, b, StationId::One, &fns, &rc);
    assert_eq!(exact_marginal, 0.0);
    let mean_x: f64 = records.iter().map(|r| r.x.value()).sum::<f64>() / N as f64;
    let mean_y: f64 = records.iter().map(|r| r.y.value()).sum::<f64>() / N as f64;
    let se = 1.0 / (N as f64).sqrt(); // outcomes are +/-1 so the variance is at most 1
    assert!(mean_x.abs() <= SIGMA_BAND * se, "station-1 mean {mean_x}");
    assert!(mean_y.abs() <= SIGMA_BAND * se, "station-2 mean {mean_y}");

    // the correlation estimate agrees with the exact model value
    let est = estimate_correlation(&records, a, b).unwrap();
    let exact = model_correlation(a, b, &fns, &rc);
    assert!(
        (est.mean - exact).abs() <= SIGMA_BAND * est.std_error,
        "estimate {} vs exact {exact}",
        est.mean
    );
}

#[test]
fn per_pair_sample_counts_follow_the_schedule() {
    let patterns = PatternTable::standard();
    let rc = belltest::synthesize_regions(SynthesisOptions::default(), &patterns)
        .feasible()
        .unwrap();
    let fns = OutcomeFns::for_settings(&SettingMap::canonical());
    let sched = Schedule::all_pairs_cycle(ClockMode::UniformRandom);
    let records = run_experiment(40_000, &sched, SEED ^ 1, &fns, &rc);
    for sp in SettingPair::ALL {
        let est = estimate_correlation(&records, sp.a, sp.b).unwrap();
        assert_eq!(est.samples, 10_000);
        assert!(est.se_defined());
    }
}
