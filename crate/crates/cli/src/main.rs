//! Command-line driver: synthesize region configs, verify the claim catalog,
//! and run end-to-end experiments.
//!
//! Exit codes: 0 success, 1 claim failure, 2 usage, 3 I/O, 4 infeasible
//! synthesis.

mod claims;

use belltest::report::Value;
use belltest::{
    bit_error_rate, blind_decode, chsh, estimate_correlation, model_correlation, run_experiment,
    signal_decode, write_records_csv, BinarySetting, BlindStation1Record, ClockMode, OutcomeFns,
    PatternTable, RegionConfig, Schedule, SettingMap, SettingPair, Station1Record, Synthesis,
    SynthesisOptions, Tier,
};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_CLAIMS: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;

const DEFAULT_SEED: u64 = 0xBE11_7E57;

#[derive(Parser)]
#[command(
    name = "belltest",
    version,
    about = "Locality test bench for a clock-indexed two-station hidden-variable model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Analyzer angles in degrees: a0,a1,b0,b1
    #[arg(long, default_value = "0,90,45,135")]
    angles: String,

    /// Base seed for every random draw
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Emit key-value structured output instead of tables
    #[arg(long, alias = "json-like-structured-output")]
    structured: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a region config and write it (or the infeasibility
    /// certificate) to a file
    Synthesize {
        /// Constraint tier: per-m or j-only
        #[arg(long, default_value = "per-m")]
        tier: String,

        /// Drop the identifiability constraints
        #[arg(long)]
        relax_identifiability: bool,

        /// Drop the uniformity constraint
        #[arg(long)]
        relax_uniformity: bool,

        /// Where to write the result
        #[arg(long)]
        output: PathBuf,

        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run the full claim catalog against a config file
    Verify {
        /// Region config to audit
        #[arg(long)]
        config: PathBuf,

        /// Monte Carlo runs for the decoding claims
        #[arg(long, default_value_t = 10_000)]
        runs: u64,

        #[command(flatten)]
        common: CommonOpts,
    },
    /// Generate runs and report correlations, the CHSH statistic, and the
    /// decoding error rate
    Experiment {
        /// Number of runs
        #[arg(long, default_value_t = 1_000_000)]
        runs: u64,

        /// Load the region config from a file instead of synthesizing
        #[arg(long)]
        config: Option<PathBuf>,

        /// Hide the clock index from the decoder
        #[arg(long)]
        hide_m: bool,

        /// Also write the record stream as delimited text to this path
        #[arg(long)]
        csv: Option<PathBuf>,

        #[command(flatten)]
        common: CommonOpts,
    },
}

enum Failure {
    Usage(String),
    Io(String),
    Claims(usize),
    Infeasible,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Io(_) => EXIT_IO,
            Failure::Claims(_) => EXIT_CLAIMS,
            Failure::Infeasible => EXIT_INFEASIBLE,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Usage(msg) => eprintln!("usage error: {msg}"),
                Failure::Io(msg) => eprintln!("i/o error: {msg}"),
                Failure::Claims(n) => eprintln!("{n} claim(s) failed"),
                Failure::Infeasible => {}
            }
            ExitCode::from(failure.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Synthesize {
            tier,
            relax_identifiability,
            relax_uniformity,
            output,
            common,
        } => cmd_synthesize(
            &tier,
            relax_identifiability,
            relax_uniformity,
            &output,
            common.structured,
        ),
        Command::Verify {
            config,
            runs,
            common,
        } => cmd_verify(&config, runs, &common),
        Command::Experiment {
            runs,
            config,
            hide_m,
            csv,
            common,
        } => cmd_experiment(runs, config.as_deref(), hide_m, csv.as_deref(), &common),
    }
}

fn parse_angles(spec: &str) -> Result<SettingMap, Failure> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(Failure::Usage(format!(
            "--angles needs four comma-separated degrees, got '{spec}'"
        )));
    }
    let mut vals = [0.0f64; 4];
    for (slot, part) in vals.iter_mut().zip(&parts) {
        *slot = part
            .parse::<f64>()
            .map_err(|e| Failure::Usage(format!("bad angle '{part}': {e}")))?;
        if !slot.is_finite() {
            return Err(Failure::Usage(format!("angle '{part}' is not finite")));
        }
    }
    Ok(SettingMap::from_degrees(vals[0], vals[1], vals[2], vals[3]))
}

fn load_config(path: &Path) -> Result<RegionConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("reading {}: {e}", path.display())))?;
    RegionConfig::from_text(&text)
        .map_err(|e| Failure::Io(format!("parsing {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents)
        .map_err(|e| Failure::Io(format!("writing {}: {e}", path.display())))
}

fn cmd_synthesize(
    tier: &str,
    relax_identifiability: bool,
    relax_uniformity: bool,
    output: &Path,
    structured: bool,
) -> Result<(), Failure> {
    let tier = Tier::parse(tier)
        .ok_or_else(|| Failure::Usage(format!("unknown tier '{tier}' (per-m or j-only)")))?;
    let options = SynthesisOptions {
        tier,
        identifiability: !relax_identifiability,
        uniformity: !relax_uniformity,
    };
    let patterns = PatternTable::standard();
    match belltest::synthesize_regions(options, &patterns) {
        Synthesis::Feasible(rc) => {
            write_file(output, &rc.to_text())?;
            if structured {
                let value = Value::Map(vec![
                    ("result".to_string(), Value::text("feasible")),
                    ("tier".to_string(), Value::text(tier.as_str())),
                    ("output".to_string(), Value::text(output.display().to_string())),
                ]);
                println!("{}", value.render());
            } else {
                println!("feasible: wrote {} config to {}", tier.as_str(), output.display());
            }
            Ok(())
        }
        Synthesis::Infeasible(cert) => {
            write_file(output, &format!("{cert}\n"))?;
            if structured {
                let value = Value::Map(vec![
                    ("result".to_string(), Value::text("infeasible")),
                    ("tier".to_string(), Value::text(tier.as_str())),
                    ("nodes".to_string(), Value::Int(cert.nodes_explored as i64)),
                    (
                        "deepest_level".to_string(),
                        Value::Int(cert.deepest_level as i64),
                    ),
                    ("output".to_string(), Value::text(output.display().to_string())),
                ]);
                println!("{}", value.render());
            } else {
                println!("{cert}");
                println!("certificate written to {}", output.display());
            }
            Err(Failure::Infeasible)
        }
    }
}

fn cmd_verify(config: &Path, runs: u64, common: &CommonOpts) -> Result<(), Failure> {
    if runs == 0 {
        return Err(Failure::Usage("--runs must be at least 1".to_string()));
    }
    let map = parse_angles(&common.angles)?;
    let rc = load_config(config)?;
    let patterns = PatternTable::standard();
    let inputs = claims::ClaimInputs {
        patterns: &patterns,
        rc: &rc,
        map: &map,
        runs,
        seed: common.seed,
    };
    let reports = claims::run_catalog(&inputs);
    let failed = reports.iter().filter(|r| !r.passed).count();

    if common.structured {
        let value = Value::Map(vec![
            (
                "claims".to_string(),
                Value::List(reports.iter().map(|r| r.to_value()).collect()),
            ),
            ("failed".to_string(), Value::Int(failed as i64)),
            ("all_passed".to_string(), Value::Bool(failed == 0)),
        ]);
        println!("{}", value.render());
    } else {
        println!("claim catalog for {}:", config.display());
        for r in &reports {
            let mark = if r.passed { "ok  " } else { "FAIL" };
            println!("  [{mark}] {:<32} expected: {}", r.id, r.expected);
            println!("         {:<32} observed: {}", "", r.observed);
        }
        println!(
            "{} of {} claims passed",
            reports.len() - failed,
            reports.len()
        );
    }
    if failed > 0 {
        Err(Failure::Claims(failed))
    } else {
        Ok(())
    }
}

fn cmd_experiment(
    runs: u64,
    config: Option<&Path>,
    hide_m: bool,
    csv: Option<&Path>,
    common: &CommonOpts,
) -> Result<(), Failure> {
    if runs == 0 {
        return Err(Failure::Usage("--runs must be at least 1".to_string()));
    }
    let map = parse_angles(&common.angles)?;
    let patterns = PatternTable::standard();
    let rc = match config {
        Some(path) => load_config(path)?,
        None => belltest::synthesize_regions(SynthesisOptions::default(), &patterns)
            .feasible()
            .expect("default synthesis is feasible"),
    };
    let fns = OutcomeFns::for_settings(&map);
    let sched = Schedule::random_pairs(runs as usize, common.seed ^ 0x5C, ClockMode::Cyclic)
        .expect("runs >= 1");
    let records = run_experiment(runs, &sched, common.seed, &fns, &rc);

    let mut estimates = Vec::new();
    for sp in SettingPair::ALL {
        let exact = model_correlation(sp.a, sp.b, &fns, &rc);
        match estimate_correlation(&records, sp.a, sp.b) {
            Ok(est) => estimates.push((sp, est.mean, est.std_error, est.samples, exact)),
            Err(_) => estimates.push((sp, f64::NAN, f64::NAN, 0, exact)),
        }
    }
    let s_est = chsh(
        estimates[0].1.clamp(-1.0, 1.0),
        estimates[1].1.clamp(-1.0, 1.0),
        estimates[2].1.clamp(-1.0, 1.0),
        estimates[3].1.clamp(-1.0, 1.0),
    )
    .map_err(|e| Failure::Usage(e.to_string()))?;
    let s_exact = chsh(
        estimates[0].4,
        estimates[1].4,
        estimates[2].4,
        estimates[3].4,
    )
    .map_err(|e| Failure::Usage(e.to_string()))?;

    let truth: Vec<BinarySetting> = records.iter().map(|r| r.b).collect();
    let views: Vec<Station1Record> = records.iter().map(|r| r.station1_view()).collect();
    let (ber, decoder) = if hide_m {
        let blind_views: Vec<BlindStation1Record> = views.iter().map(|v| v.blind()).collect();
        let report = blind_decode(&blind_views, &rc);
        (bit_error_rate(&report.decoded, &truth), "blind (m hidden)")
    } else {
        let decoded = signal_decode(&views, &rc)
            .map_err(|e| Failure::Io(format!("decoding failed: {e}")))?;
        (bit_error_rate(&decoded, &truth), "signal (m observable)")
    };

    if let Some(path) = csv {
        let file = std::fs::File::create(path)
            .map_err(|e| Failure::Io(format!("creating {}: {e}", path.display())))?;
        let mut writer = std::io::BufWriter::new(file);
        write_records_csv(&mut writer, &records)
            .map_err(|e| Failure::Io(format!("writing {}: {e}", path.display())))?;
    }

    if common.structured {
        let pair_values = estimates
            .iter()
            .map(|(sp, mean, se, n, exact)| {
                Value::Map(vec![
                    ("a".to_string(), Value::Int(sp.a.bit() as i64)),
                    ("b".to_string(), Value::Int(sp.b.bit() as i64)),
                    ("estimate".to_string(), Value::Float(*mean)),
                    ("std_error".to_string(), Value::Float(*se)),
                    ("samples".to_string(), Value::Int(*n as i64)),
                    ("exact".to_string(), Value::Float(*exact)),
                ])
            })
            .collect();
        let value = Value::Map(vec![
            ("runs".to_string(), Value::Int(runs as i64)),
            ("seed".to_string(), Value::Int(common.seed as i64)),
            ("angles".to_string(), Value::text(&common.angles)),
            ("correlations".to_string(), Value::List(pair_values)),
            ("chsh_estimate".to_string(), Value::Float(s_est)),
            ("chsh_exact".to_string(), Value::Float(s_exact)),
            ("decoder".to_string(), Value::text(decoder)),
            ("bit_error_rate".to_string(), Value::Float(ber)),
        ]);
        println!("{}", value.render());
    } else {
        println!("experiment: {runs} runs, seed {}, angles {}", common.seed, common.angles);
        println!("  (a,b)   estimate      std err     samples   exact");
        for (sp, mean, se, n, exact) in &estimates {
            println!(
                "  ({},{})   {:+.6}    {:.6}    {:>7}   {:+.6}",
                sp.a, sp.b, mean, se, n, exact
            );
        }
        println!("  CHSH estimate {s_est:+.6}   exact {s_exact:+.6}");
        println!("  decoder: {decoder}, bit error rate {ber}");
        if let Some(path) = csv {
            println!("  records written to {}", path.display());
        }
    }
    Ok(())
}
