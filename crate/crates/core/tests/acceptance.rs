//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Run with `cargo test -p qcomp --test acceptance`.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use qcomp::complementarity::{self, EnsembleReport, DEFAULT_BINS, OPTIMIZER_TOLERANCE, SPECTRAL_TOLERANCE};
use qcomp::measures::{self, basis_projectors, Bipartition, MeasureKind};
use qcomp::states::{self, SamplerConfig};

const SEED: u64 = 42;
const SAMPLES: usize = 10_000;
const DIMS: [usize; 3] = [2, 2, 2];

/// Mean perpendicular distances per rank 1..=4, rows in `MeasureKind::ALL` order.
const REFERENCE_DISTANCES: [(MeasureKind, [f64; 4]); 6] = [
    (MeasureKind::Negativity, [0.043, 0.390, 0.590, 0.706]),
    (MeasureKind::LogNegativity, [0.013, 0.338, 0.531, 0.651]),
    (MeasureKind::Qmi, [0.093, 0.354, 0.509, 0.612]),
    (MeasureKind::MeasuredMi, [0.093, 0.296, 0.481, 0.605]),
    (MeasureKind::Discord, [0.093, 0.412, 0.536, 0.619]),
    (MeasureKind::WorkDeficit, [0.093, 0.372, 0.504, 0.594]),
];
const RANK1_TOLERANCE: f64 = 0.005;
const HIGHER_RANK_TOLERANCE: f64 = 0.05;
const PAGE_TOLERANCE: f64 = 0.002;
const RUNTIME_LIMIT: Duration = Duration::from_secs(600);

struct Outcome {
    id: u32,
    name: &'static str,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn new(id: u32, name: &'static str) -> Self {
        Self {
            id,
            name,
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, msg: impl Into<String>) {
        if !ok {
            self.failures.push(msg.into());
        }
    }

    fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }

    fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn print(&self) {
        let tag = if self.passed() { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {}: {}", self.id, self.name);
        for n in &self.notes {
            println!("         {n}");
        }
        for f in &self.failures {
            println!("         failed: {f}");
        }
    }
}

fn ab_c() -> Bipartition {
    Bipartition::parse("AB:C", &DIMS).unwrap()
}

/// Mean entanglement entropy (bits) of the smaller factor of a Haar-random
/// pure state on C^m (x) C^n, m <= n.
fn page_average_bits(m: usize, n: usize) -> f64 {
    let nats: f64 = (n + 1..=m * n).map(|k| 1.0 / k as f64).sum::<f64>() - (m as f64 - 1.0) / (2.0 * n as f64);
    nats / std::f64::consts::LN_2
}

fn qcomp_bin() -> &'static str {
    env!("CARGO_BIN_EXE_qcomp")
}

struct Ensembles {
    reports: Vec<EnsembleReport>,
    rank1_elapsed: Duration,
}

fn run_ensembles() -> Ensembles {
    let split = ab_c();
    let mut reports = Vec::new();
    let mut rank1_elapsed = Duration::ZERO;
    for rank in 1..=4 {
        let start = Instant::now();
        let cfg = SamplerConfig::new(DIMS.to_vec(), rank, SEED, SAMPLES).unwrap();
        let report = complementarity::ensemble_report(&cfg, &split, &MeasureKind::ALL, DEFAULT_BINS).unwrap();
        let elapsed = start.elapsed();
        if rank == 1 {
            rank1_elapsed = elapsed;
        }
        println!("         (rank {rank}: {SAMPLES} samples evaluated in {elapsed:.1?})");
        reports.push(report);
    }
    Ensembles { reports, rank1_elapsed }
}

fn criterion_1(e: &Ensembles) -> Outcome {
    let mut o = Outcome::new(1, "rank-1 mean distances vs reference (10^4 Haar-pure 3-qubit states)");
    let rank1 = &e.reports[0];
    for (kind, row) in REFERENCE_DISTANCES {
        let got = rank1.mean_distance[&kind];
        o.note(format!("{kind:>8}: {got:.4} (reference {:.3} +- {RANK1_TOLERANCE})", row[0]));
        o.check((got - row[0]).abs() <= RANK1_TOLERANCE, format!("{kind} mean distance {got:.4}"));
    }
    o.note(format!("runtime {:.1?}", e.rank1_elapsed));
    o.check(e.rank1_elapsed < RUNTIME_LIMIT, format!("runtime {:.1?} over limit", e.rank1_elapsed));
    o
}

fn criterion_2(e: &Ensembles) -> Outcome {
    let mut o = Outcome::new(2, "rank-1 qmi mean distance vs Page-average oracle");
    let page = page_average_bits(2, 4);
    let oracle = (1.0 - page) / (2.0 * 2f64.sqrt());
    let got = e.reports[0].mean_distance[&MeasureKind::Qmi];
    o.note(format!("Page S_C = {page:.4} bits, oracle {oracle:.4}, Monte Carlo {got:.4}"));
    o.check((page - 0.7351).abs() < 1e-4, format!("Page average {page}"));
    o.check((got - oracle).abs() <= PAGE_TOLERANCE, format!("|{got} - {oracle}| > {PAGE_TOLERANCE}"));
    o
}

fn criterion_3(e: &Ensembles) -> Outcome {
    let mut o = Outcome::new(3, "ranks 2-4 vs reference: monotone in rank and within 0.05");
    for (kind, row) in REFERENCE_DISTANCES {
        let got: Vec<f64> = e.reports.iter().map(|r| r.mean_distance[&kind]).collect();
        o.note(format!(
            "{kind:>8}: {} (reference {})",
            got.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(" "),
            row.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(" ")
        ));
        o.check(got.windows(2).all(|w| w[1] > w[0]), format!("{kind} not increasing: {got:?}"));
        for rank in 2..=4 {
            let (g, t) = (got[rank - 1], row[rank - 1]);
            o.check((g - t).abs() <= HIGHER_RANK_TOLERANCE, format!("{kind} rank {rank}: {g:.4} vs {t}"));
        }
    }
    o
}

fn criterion_4() -> Outcome {
    let mut o = Outcome::new(4, "GHZ saturates P_AB + Q = 3/2 (logneg, qmi)");
    let r = complementarity::evaluate(&states::ghz_state(), &ab_c(), &[MeasureKind::LogNegativity, MeasureKind::Qmi])
        .unwrap();
    for (k, s) in &r.sums {
        o.note(format!("{k}: sum {s}"));
        o.check((s - 1.5).abs() <= 1e-9, format!("{k} sum {s}"));
    }
    o
}

fn criterion_5(e: &Ensembles) -> Outcome {
    let mut o = Outcome::new(5, "no complementarity violations (ranks 1-4, 4 x 10^4 states, incl. min-variant)");
    for report in &e.reports {
        for kind in MeasureKind::ALL {
            let tol = complementarity::tolerance_for(kind);
            let worst = report.records.iter().map(|r| r.sums[&kind]).fold(f64::NEG_INFINITY, f64::max);
            o.check(
                worst <= 1.5 + tol && report.violation_count[&kind] == 0,
                format!("rank {} {kind}: max sum {worst}", report.rank),
            );
        }
        let max_all = report
            .records
            .iter()
            .flat_map(|r| r.sums.values())
            .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        o.note(format!("rank {}: largest sum over all measures {max_all:.6}", report.rank));
    }
    for rank in 1..=4 {
        let cfg = SamplerConfig::new(DIMS.to_vec(), rank, SEED, SAMPLES).unwrap();
        let mv = complementarity::min_variant_report(&cfg, &[MeasureKind::Negativity, MeasureKind::Qmi], DEFAULT_BINS)
            .unwrap();
        for (kind, values) in &mv.values {
            let worst = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            o.note(format!("min-variant rank {rank} {kind}: largest value {worst:.6}"));
            o.check(worst <= 1.5 + SPECTRAL_TOLERANCE, format!("min-variant rank {rank} {kind}: {worst}"));
        }
    }
    o
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(qcomp_bin()).args(args).output().expect("run qcomp");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new(6, "Werner threshold about 3.6%, negative rate at e = 0.11");
    let (code, out) = run_cli(&["keyrate", "threshold"]);
    o.check(code == 0, format!("keyrate threshold exit {code}"));
    match serde_json::from_str::<serde_json::Value>(&out) {
        Ok(v) => {
            let t = v["threshold"].as_f64().unwrap_or(f64::NAN);
            o.note(format!("threshold {t:.5}"));
            o.check((t - 0.0357).abs() <= 0.001, format!("threshold {t}"));
        }
        Err(e) => o.check(false, format!("bad JSON from keyrate threshold: {e}")),
    }
    // p = 0.78 gives e = 0.11.
    let (code, out) = run_cli(&["keyrate", "werner", "--p", "0.78"]);
    o.check(code == 0, format!("keyrate werner exit {code}"));
    match serde_json::from_str::<serde_json::Value>(&out) {
        Ok(v) => {
            let e = v["error_rate"].as_f64().unwrap_or(f64::NAN);
            let rate = v["rate_lower_bound"].as_f64().unwrap_or(f64::NAN);
            o.note(format!("rate at e = {e:.3}: {rate:.4}"));
            o.check((e - 0.11).abs() < 1e-12 && rate < 0.0, format!("rate {rate} at e = {e}"));
        }
        Err(e) => o.check(false, format!("bad JSON from keyrate werner: {e}")),
    }
    o
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::new(7, "entropic property suite on 10^3 random bipartite states");
    let split = ab_c();
    let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
    let mut bump = |name: &'static str, excess: f64| {
        let e = worst.entry(name).or_insert(f64::NEG_INFINITY);
        *e = e.max(excess);
    };
    for i in 0..1000u64 {
        let rank = 1 + (i as usize % 8);
        let s = states::ranked_sample(&DIMS, rank, 7, i).unwrap();
        let sx = s.reduce(split.side_x()).unwrap().entropy().unwrap();
        let sy = s.reduce(split.side_y()).unwrap().entropy().unwrap();
        let sxy = s.entropy().unwrap();
        bump("araki_lieb", (sx - sy).abs() - sxy);
        bump("subadditivity", sxy - sx - sy);
        let m = measures::evaluate_measures(&s, &split, &MeasureKind::ALL).unwrap();
        let qmi = m[&MeasureKind::Qmi].raw;
        bump("qmi_vs_2min", qmi - 2.0 * sx.min(sy));
        bump("j_vs_qmi", m[&MeasureKind::MeasuredMi].raw - qmi);
        bump("discord_negative", -m[&MeasureKind::Discord].raw);
        let mut rng = states::sample_rng(1000 + i, 0);
        let px = basis_projectors(&states::haar_unitary(4, &mut rng));
        let py = basis_projectors(&states::haar_unitary(2, &mut rng));
        let cmi = measures::classical_mutual_information(&s, &split, &px, &py).unwrap();
        bump("classical_vs_qmi", cmi - qmi);
    }
    let limits = [
        ("araki_lieb", 1e-8),
        ("subadditivity", 1e-8),
        ("qmi_vs_2min", 1e-8),
        ("j_vs_qmi", OPTIMIZER_TOLERANCE),
        ("discord_negative", OPTIMIZER_TOLERANCE),
        ("classical_vs_qmi", 1e-9),
    ];
    for (name, limit) in limits {
        let w = worst[name];
        o.note(format!("{name}: worst excess {w:.3e} (limit {limit:e})"));
        o.check(w <= limit, format!("{name}: {w:e}"));
    }
    o
}

fn criterion_8() -> Outcome {
    let mut o = Outcome::new(8, "pure-state collapse of J, D, Delta to S_C and I' to 2 S_C");
    let split = ab_c();
    let (mut worst_opt, mut worst_qmi) = (0.0f64, 0.0f64);
    for i in 0..1000u64 {
        let s = states::ranked_sample(&DIMS, 1, 8, i).unwrap();
        let sc = s.reduce(&[2]).unwrap().entropy().unwrap();
        let m = measures::evaluate_measures(&s, &split, &MeasureKind::ALL).unwrap();
        for k in [MeasureKind::MeasuredMi, MeasureKind::Discord, MeasureKind::WorkDeficit] {
            worst_opt = worst_opt.max((m[&k].raw - sc).abs());
        }
        worst_qmi = worst_qmi.max((m[&MeasureKind::Qmi].raw - 2.0 * sc).abs());
    }
    o.note(format!("max |J, D, Delta - S_C| = {worst_opt:.3e}; max |I' - 2 S_C| = {worst_qmi:.3e}"));
    o.check(worst_opt <= 2e-3, format!("optimizer measures off by {worst_opt:e}"));
    o.check(worst_qmi <= 1e-8, format!("qmi off by {worst_qmi:e}"));
    o
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn criterion_9() -> Outcome {
    let mut o = Outcome::new(9, "ensemble --seed 42 is byte-identical across runs and worker counts");
    let root = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for (label, threads) in [("a", "1"), ("b", "1"), ("c", "3")] {
        let dir = root.path().join(label);
        let dir_s = dir.to_str().unwrap().to_string();
        let (code, _) = run_cli(&[
            "ensemble", "--seed", "42", "--ranks", "1,2,3,4", "--samples", "300", "--threads", threads,
            "--min-variant", "--out", &dir_s,
        ]);
        o.check(code == 0, format!("run {label} exit {code}"));
        runs.push(read_dir_sorted(&dir));
    }
    o.note(format!("{} files per run", runs[0].len()));
    o.check(!runs[0].is_empty(), "no output files");
    o.check(runs[0] == runs[1], "repeated single-thread runs differ");
    o.check(runs[0] == runs[2], "1-thread and 3-thread runs differ");
    o
}

fn main() {
    println!("running acceptance criteria");
    let ensembles = run_ensembles();
    let outcomes = vec![
        criterion_1(&ensembles),
        criterion_2(&ensembles),
        criterion_3(&ensembles),
        criterion_4(),
        criterion_5(&ensembles),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
    ];
    println!();
    for o in &outcomes {
        o.print();
    }
    let failed = outcomes.iter().filter(|o| !o.passed()).count();
    println!("\n{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
