//! Two-station run simulator.
//!
//! Every random draw is keyed by (seed, run index, channel) through
//! counter-based ChaCha streams, so runs are independent, order-free, and a
//! record stream is bit-identical whether generated sequentially or in
//! parallel.

use crate::direction::Outcome;
use crate::error::{Error, Result};
use crate::outcomes::{station1_outcome, station2_outcome, OutcomeFns};
use crate::table::{BinarySetting, ClockIndex, RegionConfig, SettingPair, StationParam};
use std::io::Write;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How the shared clock index advances across runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClockMode {
    /// m cycles deterministically through all sixteen values.
    Cyclic,
    /// m is drawn uniformly per run.
    UniformRandom,
}

/// Per-run setting choices plus the clock mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pairs: Vec<(BinarySetting, BinarySetting)>,
    clock: ClockMode,
}

impl Schedule {
    pub fn new(pairs: Vec<(BinarySetting, BinarySetting)>, clock: ClockMode) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidDiscrete {
                what: "schedule length",
                value: 0,
                expected: "at least one setting pair",
            });
        }
        Ok(Schedule { pairs, clock })
    }

    /// Cycles through the four setting pairs in canonical order.
    pub fn all_pairs_cycle(clock: ClockMode) -> Self {
        Schedule {
            pairs: SettingPair::ALL.iter().map(|sp| (sp.a, sp.b)).collect(),
            clock,
        }
    }

    /// A fixed setting pair for every run.
    pub fn fixed(a: BinarySetting, b: BinarySetting, clock: ClockMode) -> Self {
        Schedule {
            pairs: vec![(a, b)],
            clock,
        }
    }

    /// `n` setting pairs drawn iid uniform from the four combinations.
    pub fn random_pairs(n: usize, seed: u64, clock: ClockMode) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDiscrete {
                what: "schedule length",
                value: 0,
                expected: "at least one setting pair",
            });
        }
        let pairs = (0..n as u64)
            .map(|run| {
                let sp = SettingPair::ALL[(rng::draw_u64(seed, run, rng::CHANNEL_SCHEDULE) % 4) as usize];
                (sp.a, sp.b)
            })
            .collect();
        Ok(Schedule { pairs, clock })
    }

    /// Station-1 setting fixed, station-2 setting carrying one message bit
    /// per run (the signalling demo).
    pub fn message_in_b(a: BinarySetting, bits: &[u8], clock: ClockMode) -> Result<Self> {
        let pairs = bits
            .iter()
            .map(|&bit| Ok((a, BinarySetting::from_bit(bit)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(pairs, clock)
    }

    pub fn clock(&self) -> ClockMode {
        self.clock
    }

    pub fn pair(&self, run: u64) -> (BinarySetting, BinarySetting) {
        self.pairs[(run % self.pairs.len() as u64) as usize]
    }
}

/// One experimental run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRecord {
    pub run: u64,
    pub m: ClockIndex,
    pub u: StationParam,
    pub v: StationParam,
    pub a: BinarySetting,
    pub b: BinarySetting,
    pub x: Outcome,
    pub y: Outcome,
}

impl RunRecord {
    /// Verifies the structural invariant: (u, v) sits in the supported cell
    /// and the outcomes re-evaluate identically.
    pub fn check_invariant(&self, fns: &OutcomeFns, rc: &RegionConfig) -> Result<()> {
        let cell = rc.supported_cell(self.m, self.a, self.b);
        if !cell.contains(self.u, self.v) {
            return Err(Error::Unattainable {
                m: self.m.to_string(),
                axis: "column",
                index: self.u.column(),
            });
        }
        let x = station1_outcome(self.m, self.a, self.u, fns, rc)?;
        let y = station2_outcome(self.m, self.b, self.v, fns, rc)?;
        if x != self.x || y != self.y {
            return Err(Error::InvalidKernel {
                context: format!("run {}", self.run),
                detail: "recorded outcomes disagree with re-evaluation".to_string(),
            });
        }
        Ok(())
    }

    /// What station 1 can see: never the distant setting or parameter.
    pub fn station1_view(&self) -> Station1Record {
        Station1Record {
            run: self.run,
            m: self.m,
            u: self.u,
            a: self.a,
            x: self.x,
        }
    }

    /// What station 2 can see.
    pub fn station2_view(&self) -> Station2Record {
        Station2Record {
            run: self.run,
            m: self.m,
            v: self.v,
            b: self.b,
            y: self.y,
        }
    }
}

/// Station-1 local view of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Station1Record {
    pub run: u64,
    pub m: ClockIndex,
    pub u: StationParam,
    pub a: BinarySetting,
    pub x: Outcome,
}

impl Station1Record {
    /// Drops the clock index, modelling an observer who cannot read it.
    pub fn blind(self) -> BlindStation1Record {
        BlindStation1Record {
            run: self.run,
            u: self.u,
            a: self.a,
            x: self.x,
        }
    }
}

/// Station-2 local view of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Station2Record {
    pub run: u64,
    pub m: ClockIndex,
    pub v: StationParam,
    pub b: BinarySetting,
    pub y: Outcome,
}

/// Station-1 view with the clock index hidden.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlindStation1Record {
    pub run: u64,
    pub u: StationParam,
    pub a: BinarySetting,
    pub x: Outcome,
}

/// Counter-based random streams keyed by (seed, run, channel).
pub(crate) mod rng {
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub const CHANNEL_CLOCK: u64 = 0;
    pub const CHANNEL_U: u64 = 1;
    pub const CHANNEL_V: u64 = 2;
    pub const CHANNEL_SCHEDULE: u64 = 3;

    fn stream(seed: u64, run: u64, channel: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(run);
        // channels sit at fixed, far-apart keystream offsets
        rng.set_word_pos(channel as u128 * 1024);
        rng
    }

    pub fn draw_unit(seed: u64, run: u64, channel: u64) -> f64 {
        stream(seed, run, channel).gen::<f64>()
    }

    pub fn draw_u64(seed: u64, run: u64, channel: u64) -> u64 {
        stream(seed, run, channel).gen::<u64>()
    }
}

fn clock_for_run(run: u64, mode: ClockMode, seed: u64) -> ClockIndex {
    let linear = match mode {
        ClockMode::Cyclic => (run % 16) as u8 + 1,
        ClockMode::UniformRandom => (rng::draw_u64(seed, run, rng::CHANNEL_CLOCK) % 16) as u8 + 1,
    };
    ClockIndex::from_linear(linear).expect("1..=16")
}

fn build_record(run: u64, sched: &Schedule, seed: u64, fns: &OutcomeFns, rc: &RegionConfig) -> RunRecord {
    let (a, b) = sched.pair(run);
    let m = clock_for_run(run, sched.clock(), seed);
    let cell = rc.supported_cell(m, a, b);
    let u = StationParam::new(cell.col as f64 + rng::draw_unit(seed, run, rng::CHANNEL_U))
        .expect("col + [0,1) stays in [0,4)");
    let v = StationParam::new(cell.row as f64 + rng::draw_unit(seed, run, rng::CHANNEL_V))
        .expect("row + [0,1) stays in [0,4)");
    let x = station1_outcome(m, a, u, fns, rc).expect("(m, u) generated inside the support");
    let y = station2_outcome(m, b, v, fns, rc).expect("(m, v) generated inside the support");
    RunRecord { run, m, u, v, a, b, x, y }
}

/// Generates `n` runs. With the `parallel` feature (default) the work is
/// partitioned across threads; output order and content are identical to the
/// sequential path.
///
/// The config must satisfy its structural invariants (see
/// [`RegionConfig::validate`]); on a config that breaks identifiability the
/// outcome evaluators have no defined value and generation panics.
pub fn run_experiment(
    n: u64,
    sched: &Schedule,
    seed: u64,
    fns: &OutcomeFns,
    rc: &RegionConfig,
) -> Vec<RunRecord> {
    #[cfg(feature = "parallel")]
    {
        (0..n)
            .into_par_iter()
            .map(|run| build_record(run, sched, seed, fns, rc))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_experiment_sequential(n, sched, seed, fns, rc)
    }
}

/// The single-threaded generation path; always available for comparison.
pub fn run_experiment_sequential(
    n: u64,
    sched: &Schedule,
    seed: u64,
    fns: &OutcomeFns,
    rc: &RegionConfig,
) -> Vec<RunRecord> {
    (0..n)
        .map(|run| build_record(run, sched, seed, fns, rc))
        .collect()
}

/// Sample mean and standard error of the outcome product over the records
/// matching (a, b).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationEstimate {
    pub mean: f64,
    /// Zero when fewer than two samples exist; see [`Self::se_defined`].
    pub std_error: f64,
    pub samples: u64,
}

impl CorrelationEstimate {
    /// False for the degenerate single-sample estimate, whose standard
    /// error is reported as zero.
    pub fn se_defined(&self) -> bool {
        self.samples >= 2
    }
}

pub fn estimate_correlation(
    records: &[RunRecord],
    a: BinarySetting,
    b: BinarySetting,
) -> Result<CorrelationEstimate> {
    let mut n = 0u64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for r in records.iter().filter(|r| r.a == a && r.b == b) {
        let prod = r.x.value() * r.y.value();
        n += 1;
        sum += prod;
        sum_sq += prod * prod;
    }
    if n == 0 {
        return Err(Error::EmptySelection);
    }
    let mean = sum / n as f64;
    let std_error = if n >= 2 {
        let var = (sum_sq - sum * sum / n as f64) / (n as f64 - 1.0);
        (var.max(0.0) / n as f64).sqrt()
    } else {
        0.0
    };
    Ok(CorrelationEstimate {
        mean,
        std_error,
        samples: n,
    })
}

/// Decodes the distant setting from each station-1 view using the clock
/// index: (m, u) pin down the full setting pair exactly.
pub fn signal_decode(views: &[Station1Record], rc: &RegionConfig) -> Result<Vec<BinarySetting>> {
    views
        .iter()
        .map(|view| rc.infer_settings_from_u(view.m, view.u).map(|(_, b)| b))
        .collect()
}

/// Fraction of decoded bits disagreeing with the true schedule.
pub fn bit_error_rate(decoded: &[BinarySetting], truth: &[BinarySetting]) -> f64 {
    assert_eq!(decoded.len(), truth.len(), "length mismatch");
    if decoded.is_empty() {
        return 0.0;
    }
    let errors = decoded
        .iter()
        .zip(truth.iter())
        .filter(|(d, t)| d != t)
        .count();
    errors as f64 / decoded.len() as f64
}

/// What the best blind decoder has to work with, and what it guessed.
#[derive(Debug, Clone)]
pub struct BlindDecodeReport {
    pub decoded: Vec<BinarySetting>,
    /// Exact model column counts of u (out of 16) per station-1 setting and
    /// candidate b: `column_counts[a][b]`. Identical across b, which is why
    /// the decoder has no edge.
    pub column_counts: [[[u32; 4]; 2]; 2],
}

/// Maximum-likelihood decoding of b from (a, u) alone, with the clock index
/// hidden. The mixture column distribution of u is the same for both values
/// of b, so every likelihood comparison ties and the decoder falls back to a
/// fixed guess; its long-run error rate against a balanced schedule is 1/2.
pub fn blind_decode(views: &[BlindStation1Record], rc: &RegionConfig) -> BlindDecodeReport {
    let mut column_counts = [[[0u32; 4]; 2]; 2];
    for a in BinarySetting::BOTH {
        for b in BinarySetting::BOTH {
            column_counts[a.bit() as usize][b.bit() as usize] = rc.mixture_column_counts(a, b);
        }
    }
    let decoded = views
        .iter()
        .map(|view| {
            let col = view.u.column() as usize;
            let like0 = column_counts[view.a.bit() as usize][0][col];
            let like1 = column_counts[view.a.bit() as usize][1][col];
            if like1 > like0 {
                BinarySetting::One
            } else {
                BinarySetting::Zero
            }
        })
        .collect();
    BlindDecodeReport {
        decoded,
        column_counts,
    }
}

/// Empirical histogram of the station-1 parameter over the four columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnHistogram {
    pub counts: [u64; 4],
}

impl ColumnHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn fraction(&self, col: u8) -> f64 {
        self.counts[col as usize] as f64 / self.total() as f64
    }
}

/// Histogram of u-columns over records matching (m, a, b). For a valid
/// config this is a point mass on the supported column, and for fixed (m, a)
/// the mass moves when b changes.
pub fn instrument_distribution(
    records: &[RunRecord],
    m: ClockIndex,
    a: BinarySetting,
    b: BinarySetting,
) -> Result<ColumnHistogram> {
    let mut counts = [0u64; 4];
    let mut any = false;
    for r in records.iter().filter(|r| r.m == m && r.a == a && r.b == b) {
        counts[r.u.column() as usize] += 1;
        any = true;
    }
    if !any {
        return Err(Error::EmptySelection);
    }
    Ok(ColumnHistogram { counts })
}

/// Writes records as delimited text: one run per line in the fixed column
/// order `run,m,u,v,a,b,x,y`, with reals at 17 significant digits.
pub fn write_records_csv<W: Write>(mut w: W, records: &[RunRecord]) -> std::io::Result<()> {
    writeln!(w, "run,m,u,v,a,b,x,y")?;
    for r in records {
        writeln!(
            w,
            "{},{},{:.16e},{:.16e},{},{},{},{}",
            r.run,
            r.m.linear(),
            r.u.value(),
            r.v.value(),
            r.a,
            r.b,
            r.x,
            r.y
        )?;
    }
    Ok(())
}
