//! `qcomp` command-line front end.
//!
//! Exit codes: 0 success, 1 input error, 2 complementarity bound violated.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::complementarity::{self, EnsembleReport, MinVariantReport, DEFAULT_BINS};
use crate::error::{invalid, Error, Result};
use crate::keyrate::{self, KeyRateScenario};
use crate::measures::{Bipartition, MeasureKind};
use crate::states::{self, MultipartiteState, SamplerConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "qcomp", version, about = "Purity/correlation complementarity toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a state as JSON ({"dims": [...], "rho": [[re, im], ...]}).
    Generate(GenerateArgs),
    /// Sample fixed-rank ensembles and emit per-sample, aggregate and histogram tables.
    Ensemble(EnsembleArgs),
    /// Evaluate the complementarity relation on a state file.
    Check(CheckArgs),
    /// Secret key rate bound queries.
    Keyrate(KeyrateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    Ghz,
    Werner,
    Haar,
    HaarRanked,
}

#[derive(Debug, clap::Args)]
pub struct GenerateArgs {
    pub kind: StateKind,
    /// Werner mixing parameter.
    #[arg(long)]
    pub p: Option<f64>,
    /// Local dimensions for random states.
    #[arg(long, default_value = "2,2,2")]
    pub dims: String,
    #[arg(long)]
    pub rank: Option<usize>,
    /// Required for random states.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sample index within the seeded sequence.
    #[arg(long, default_value_t = 0)]
    pub index: u64,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, clap::Args)]
pub struct EnsembleArgs {
    #[arg(long, default_value = "1,2,3,4")]
    pub ranks: String,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value = "neg,logneg,qmi,mmi,discord,workdef")]
    pub measures: String,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    #[arg(long, default_value = "2,2,2")]
    pub dims: String,
    #[arg(long, default_value = "AB:C")]
    pub split: String,
    /// Output directory.
    #[arg(long, short, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Also tabulate P_AB + min(Q_A:C, Q_B:C) for neg and qmi (three parties only).
    #[arg(long)]
    pub min_variant: bool,
}

#[derive(Debug, clap::Args)]
pub struct CheckArgs {
    pub state: PathBuf,
    #[arg(long, default_value = "AB:C")]
    pub split: String,
    #[arg(long, default_value = "neg,logneg,qmi,mmi,discord,workdef")]
    pub measures: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KeyrateMode {
    Error,
    Werner,
    Threshold,
}

#[derive(Debug, clap::Args)]
pub struct KeyrateArgs {
    /// Defaults to `error`.
    pub mode: Option<KeyrateMode>,
    /// Bit error rate e in [0, 1/2].
    #[arg(long)]
    pub error: Option<f64>,
    /// Entropy S(rho_AB) in bits.
    #[arg(long, default_value_t = 0.0)]
    pub entropy: f64,
    /// Werner mixing parameter.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 4)]
    pub d_ab: usize,
    #[arg(long, default_value_t = 4)]
    pub d_e: usize,
    /// Complementarity constant; defaults to the bound for (d_ab, d_e).
    #[arg(long)]
    pub b: Option<f64>,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(&a, stdout),
        Command::Ensemble(a) => cmd_ensemble(&a, stdout),
        Command::Check(a) => cmd_check(&a, stdout),
        Command::Keyrate(a) => cmd_keyrate(&a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_INPUT
        }
    }
}

pub fn parse_usize_list(text: &str, what: &str) -> Result<Vec<usize>> {
    let values = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidInput(format!("bad {what} entry `{s}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return invalid(format!("empty {what} list"));
    }
    Ok(values)
}

fn cmd_generate(args: &GenerateArgs, stdout: &mut dyn Write) -> Result<i32> {
    let need_seed = || {
        args.seed
            .ok_or_else(|| Error::InvalidInput("random states require --seed".into()))
    };
    let state = match args.kind {
        StateKind::Ghz => states::ghz_state(),
        StateKind::Werner => {
            let p = args
                .p
                .ok_or_else(|| Error::InvalidInput("werner requires --p".into()))?;
            states::werner_state(p)?
        }
        StateKind::Haar => {
            let dims = parse_usize_list(&args.dims, "dimension")?;
            states::ranked_sample(&dims, 1, need_seed()?, args.index)?
        }
        StateKind::HaarRanked => {
            let dims = parse_usize_list(&args.dims, "dimension")?;
            let rank = args
                .rank
                .ok_or_else(|| Error::InvalidInput("haar-ranked requires --rank".into()))?;
            states::ranked_sample(&dims, rank, need_seed()?, args.index)?
        }
    };
    let text = state.to_json()?;
    match &args.out {
        Some(path) => fs::write(path, text + "\n")?,
        None => writeln!(stdout, "{text}")?,
    }
    Ok(EXIT_OK)
}

/// Everything `cmd_ensemble` writes, as `(file name, contents)` pairs.
pub fn ensemble_outputs(args: &EnsembleArgs) -> Result<Vec<(String, String)>> {
    let dims = parse_usize_list(&args.dims, "dimension")?;
    let ranks = parse_usize_list(&args.ranks, "rank")?;
    let kinds = MeasureKind::parse_list(&args.measures)?;
    let split = Bipartition::parse(&args.split, &dims)?;
    if args.min_variant && dims.len() != 3 {
        return invalid("--min-variant needs exactly three parties");
    }
    let configs = ranks
        .iter()
        .map(|&r| SamplerConfig::new(dims.clone(), r, args.seed, args.samples))
        .collect::<Result<Vec<_>>>()?;

    let compute = || -> Result<(Vec<EnsembleReport>, Vec<MinVariantReport>)> {
        let mut reports = Vec::new();
        let mut minvar = Vec::new();
        for cfg in &configs {
            reports.push(complementarity::ensemble_report(cfg, &split, &kinds, args.bins)?);
            if args.min_variant {
                minvar.push(complementarity::min_variant_report(
                    cfg,
                    &[MeasureKind::Negativity, MeasureKind::Qmi],
                    args.bins,
                )?);
            }
        }
        Ok((reports, minvar))
    };
    let (reports, minvar) = match args.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidInput(format!("cannot build thread pool: {e}")))?
            .install(compute)?,
        None => compute()?,
    };

    let mut files = Vec::new();
    match args.format {
        OutputFormat::Csv => {
            files.push(("aggregate.csv".to_string(), aggregate_csv(&reports)));
            for report in &reports {
                files.push((format!("rank{}_samples.csv", report.rank), samples_csv(report)));
                for (kind, hist) in &report.histogram {
                    files.push((
                        format!("rank{}_hist_{}.csv", report.rank, kind),
                        histogram_csv(&hist.edges, &hist.rel_freq),
                    ));
                }
            }
            for report in &minvar {
                files.push((format!("rank{}_minvar.csv", report.rank), minvar_csv(report)));
                for (kind, hist) in &report.histogram {
                    files.push((
                        format!("rank{}_minvar_hist_{}.csv", report.rank, kind),
                        histogram_csv(&hist.edges, &hist.rel_freq),
                    ));
                }
            }
        }
        OutputFormat::Json => {
            let doc = json!({
                "seed": args.seed,
                "split": split.to_string(),
                "dims": dims,
                "reports": reports,
                "min_variant": minvar,
            });
            files.push(("ensemble.json".to_string(), serde_json::to_string_pretty(&doc)? + "\n"));
        }
    }
    Ok(files)
}

fn cmd_ensemble(args: &EnsembleArgs, stdout: &mut dyn Write) -> Result<i32> {
    let files = ensemble_outputs(args)?;
    fs::create_dir_all(&args.out)?;
    for (name, contents) in &files {
        fs::write(args.out.join(name), contents)?;
    }
    if let Some((_, aggregate)) = files.iter().find(|(n, _)| n == "aggregate.csv") {
        write!(stdout, "{aggregate}")?;
    } else {
        writeln!(stdout, "{}", args.out.join("ensemble.json").display())?;
    }
    Ok(EXIT_OK)
}

pub fn aggregate_csv(reports: &[EnsembleReport]) -> String {
    let mut s = String::from("rank,measure,mean_distance,violations,samples\n");
    for r in reports {
        for k in &r.kinds {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                r.rank, k, r.mean_distance[k], r.violation_count[k], r.samples
            );
        }
    }
    s
}

pub fn samples_csv(report: &EnsembleReport) -> String {
    let mut header = vec!["sample_id".to_string(), "purity".to_string()];
    header.extend(report.kinds.iter().map(|k| k.to_string()));
    header.extend(report.kinds.iter().map(|k| format!("sum_{k}")));
    header.extend(report.kinds.iter().map(|k| format!("dist_{k}")));
    let mut s = header.join(",");
    s.push('\n');
    for (i, rec) in report.records.iter().enumerate() {
        let _ = write!(s, "{},{}", i, rec.purity);
        for map in [&rec.measure_values, &rec.sums, &rec.distances] {
            for k in &report.kinds {
                let _ = write!(s, ",{}", map[k]);
            }
        }
        s.push('\n');
    }
    s
}

pub fn histogram_csv(edges: &[f64], rel_freq: &[f64]) -> String {
    let mut s = String::from("bin_low,bin_high,rel_freq\n");
    for (i, f) in rel_freq.iter().enumerate() {
        let _ = writeln!(s, "{},{},{}", edges[i], edges[i + 1], f);
    }
    s
}

fn minvar_csv(report: &MinVariantReport) -> String {
    let kinds: Vec<&MeasureKind> = report.values.keys().collect();
    let mut s = String::from("sample_id");
    for k in &kinds {
        let _ = write!(s, ",min_{k}");
    }
    s.push('\n');
    for i in 0..report.samples {
        let _ = write!(s, "{i}");
        for k in &kinds {
            let _ = write!(s, ",{}", report.values[*k][i]);
        }
        s.push('\n');
    }
    s
}

fn read_state(path: &Path) -> Result<MultipartiteState> {
    MultipartiteState::from_json(&fs::read_to_string(path)?)
}

fn cmd_check(args: &CheckArgs, stdout: &mut dyn Write) -> Result<i32> {
    let state = read_state(&args.state)?;
    let split = Bipartition::parse(&args.split, state.dims())?;
    let kinds = MeasureKind::parse_list(&args.measures)?;
    let record = complementarity::evaluate(&state, &split, &kinds)?;
    let violations = record.violations();
    let measures: serde_json::Map<String, serde_json::Value> = kinds
        .iter()
        .map(|k| {
            (
                k.to_string(),
                json!({
                    "raw": record.raw_values[k],
                    "normalized": record.measure_values[k],
                    "sum": record.sums[k],
                    "distance": record.distances[k],
                }),
            )
        })
        .collect();
    let report = json!({
        "split": split.to_string(),
        "purity": record.purity,
        "bound": record.bound,
        "measures": measures,
        "violations": violations.iter().map(|k| k.tag()).collect::<Vec<_>>(),
        "side_condition_breaches": record.side_condition_breaches.iter().map(|k| k.tag()).collect::<Vec<_>>(),
    });
    writeln!(stdout, "{report}")?;
    Ok(if violations.is_empty() { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_keyrate(args: &KeyrateArgs, stdout: &mut dyn Write) -> Result<i32> {
    let mode = args.mode.unwrap_or(KeyrateMode::Error);
    let report = match mode {
        KeyrateMode::Threshold => {
            let threshold = keyrate::werner_threshold();
            let entropy = keyrate::werner_entropy_from_error(threshold)?;
            json!({
                "mode": "threshold",
                "threshold": threshold,
                "error_rate": threshold,
                "entropy_ab": entropy,
                "rate_lower_bound": keyrate::werner_rate(threshold)?,
            })
        }
        KeyrateMode::Werner => {
            let p = args
                .p
                .ok_or_else(|| Error::InvalidInput("werner mode requires --p".into()))?;
            let s = KeyRateScenario::werner(p)?;
            json!({
                "mode": "werner",
                "p": p,
                "error_rate": s.error_rate,
                "entropy_ab": s.entropy_ab,
                "rate_lower_bound": s.rate_lower_bound,
            })
        }
        KeyrateMode::Error => {
            let e = args
                .error
                .ok_or_else(|| Error::InvalidInput("error mode requires --error".into()))?;
            let b = args
                .b
                .unwrap_or_else(|| complementarity::bound_for(args.d_ab, args.d_e));
            let rate = keyrate::ck_rate_lower_bound(e, args.entropy, args.d_ab, args.d_e, b)?;
            json!({
                "mode": "error",
                "error_rate": e,
                "entropy_ab": args.entropy,
                "bound_b": b,
                "rate_lower_bound": rate,
            })
        }
    };
    writeln!(stdout, "{report}")?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("qcomp").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn list_parsing() {
        assert_eq!(parse_usize_list("2, 2,3", "dimension").unwrap(), vec![2, 2, 3]);
        assert!(parse_usize_list("2,x", "dimension").is_err());
        assert!(parse_usize_list("", "dimension").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_capture(&["frobnicate"]).0, EXIT_INPUT);
        assert_eq!(run_capture(&["generate", "haar"]).0, EXIT_INPUT);
        assert_eq!(run_capture(&["generate", "werner", "--p", "1.5"]).0, EXIT_INPUT);
        assert_eq!(run_capture(&["ensemble", "--samples", "1"]).0, EXIT_INPUT);
        assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn unknown_measure_lists_valid_tags() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let (code, _, err) = run_capture(&["ensemble", "--seed", "1", "--measures", "neg,bogus", "--out", out]);
        assert_eq!(code, EXIT_INPUT);
        assert!(err.contains("neg, logneg, qmi, mmi, discord, workdef"), "{err}");
    }

    #[test]
    fn keyrate_modes() {
        let (code, out, _) = run_capture(&["keyrate", "--error", "0"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["rate_lower_bound"], 1.0);
        assert_eq!(run_capture(&["keyrate", "--error", "0.7"]).0, EXIT_INPUT);
        assert_eq!(run_capture(&["keyrate", "werner"]).0, EXIT_INPUT);
    }
}
