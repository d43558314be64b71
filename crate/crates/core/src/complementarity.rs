//! Purity/correlation complementarity: bounds, per-state records and
//! fixed-rank ensemble statistics.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::measures::{self, Bipartition, MeasureKind};
use crate::states::{self, MultipartiteState, SamplerConfig};

/// Slack allowed above the bound for purely spectral measures.
pub const SPECTRAL_TOLERANCE: f64 = 1e-6;
/// Slack allowed above the bound for optimizer-based measures.
pub const OPTIMIZER_TOLERANCE: f64 = 1e-3;
pub const DEFAULT_BINS: usize = 50;

pub fn tolerance_for(kind: MeasureKind) -> f64 {
    if kind.is_optimized() {
        OPTIMIZER_TOLERANCE
    } else {
        SPECTRAL_TOLERANCE
    }
}

/// Right-hand side of `P_X + Q_{X:Y} <= b`: 1 when `d_x <= d_y`, otherwise
/// `2 - log2 d_y / log2 d_x`.
pub fn bound_for(d_x: usize, d_y: usize) -> f64 {
    if d_x <= d_y {
        1.0
    } else {
        2.0 - (d_y as f64).log2() / (d_x as f64).log2()
    }
}

/// Signed distance of a point with coordinate sum `sum` from the line `P + Q = bound`.
pub fn perpendicular_distance(sum: f64, bound: f64) -> f64 {
    (bound - sum) / std::f64::consts::SQRT_2
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComplementarityRecord {
    pub purity: f64,
    pub bound: f64,
    pub raw_values: BTreeMap<MeasureKind, f64>,
    pub measure_values: BTreeMap<MeasureKind, f64>,
    pub sums: BTreeMap<MeasureKind, f64>,
    pub distances: BTreeMap<MeasureKind, f64>,
    /// Measures whose raw value exceeded `log2 d_y` while `d_x > d_y`.
    pub side_condition_breaches: Vec<MeasureKind>,
}

impl ComplementarityRecord {
    /// Measures whose sum exceeds the bound by more than their tolerance.
    pub fn violations(&self) -> Vec<MeasureKind> {
        self.sums
            .iter()
            .filter(|(&k, &s)| s > self.bound + tolerance_for(k))
            .map(|(&k, _)| k)
            .collect()
    }
}

/// Purity of side X plus each normalized correlation across `split`.
pub fn evaluate(
    state: &MultipartiteState,
    split: &Bipartition,
    kinds: &[MeasureKind],
) -> Result<ComplementarityRecord> {
    let values = measures::evaluate_measures(state, split, kinds)?;
    let purity = measures::purity_normalized(state, split.side_x())?;
    let bound = bound_for(split.dim_x(), split.dim_y());
    let log_dy = (split.dim_y() as f64).log2();

    let mut record = ComplementarityRecord {
        purity,
        bound,
        raw_values: BTreeMap::new(),
        measure_values: BTreeMap::new(),
        sums: BTreeMap::new(),
        distances: BTreeMap::new(),
        side_condition_breaches: Vec::new(),
    };
    for (kind, v) in values {
        let sum = purity + v.normalized;
        record.raw_values.insert(kind, v.raw);
        record.measure_values.insert(kind, v.normalized);
        record.sums.insert(kind, sum);
        record.distances.insert(kind, perpendicular_distance(sum, bound));
        if kind != MeasureKind::Qmi
            && split.dim_x() > split.dim_y()
            && v.raw > log_dy + tolerance_for(kind)
        {
            record.side_condition_breaches.push(kind);
        }
    }
    Ok(record)
}

/// `P_AB + min(Q_{A:C}, Q_{B:C})` for a three-party state, each term on the
/// corresponding two-party reduction.
pub fn min_single_party_variant(state: &MultipartiteState, kind: MeasureKind) -> Result<f64> {
    if state.num_parties() != 3 {
        return invalid(format!(
            "the single-party variant needs three parties, got {}",
            state.num_parties()
        ));
    }
    let purity = measures::purity_normalized(state, &[0, 1])?;
    let mut smallest = f64::INFINITY;
    for keep in [[0, 2], [1, 2]] {
        let pair = state.reduce(&keep)?;
        let split = Bipartition::new(&[0], &[1], pair.dims())?;
        smallest = smallest.min(measures::measure(&pair, &split, kind)?.normalized);
    }
    Ok(purity + smallest)
}

/// Equal-width histogram of relative frequencies.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub rel_freq: Vec<f64>,
    /// Values below `edges[0]` or above the last edge by more than the
    /// tolerance given at construction; counted in the boundary bins.
    pub out_of_range: usize,
}

impl Histogram {
    pub fn new(values: &[f64], bins: usize, low: f64, high: f64, tolerance: f64) -> Result<Self> {
        if bins == 0 || !(high > low) {
            return invalid(format!("bad histogram layout: {bins} bins over [{low}, {high}]"));
        }
        let width = (high - low) / bins as f64;
        let edges: Vec<f64> = (0..=bins)
            .map(|i| if i == bins { high } else { low + width * i as f64 })
            .collect();
        let mut counts = vec![0usize; bins];
        let mut out_of_range = 0;
        for &v in values {
            if v < low - tolerance || v > high + tolerance || v.is_nan() {
                out_of_range += 1;
            }
            let bin = ((v - low) / width).floor();
            let bin = if bin.is_nan() || bin < 0.0 { 0 } else { (bin as usize).min(bins - 1) };
            counts[bin] += 1;
        }
        let n = values.len().max(1) as f64;
        Ok(Self {
            edges,
            rel_freq: counts.iter().map(|&c| c as f64 / n).collect(),
            out_of_range,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EnsembleReport {
    pub rank: usize,
    pub samples: usize,
    pub bound: f64,
    pub kinds: Vec<MeasureKind>,
    pub mean_distance: BTreeMap<MeasureKind, f64>,
    pub violation_count: BTreeMap<MeasureKind, usize>,
    pub histogram: BTreeMap<MeasureKind, Histogram>,
    pub records: Vec<ComplementarityRecord>,
}

/// Samples `cfg.count` states of rank `cfg.rank` and evaluates each one.
///
/// Samples are generated and evaluated on the current rayon pool, then
/// reduced in sample-index order, so the report does not depend on the
/// number of workers.
pub fn ensemble_report(
    cfg: &SamplerConfig,
    split: &Bipartition,
    kinds: &[MeasureKind],
    bins: usize,
) -> Result<EnsembleReport> {
    cfg.validate()?;
    if kinds.is_empty() {
        return invalid("no measures requested");
    }
    let mut kinds = kinds.to_vec();
    kinds.sort_unstable();
    kinds.dedup();

    let records: Vec<ComplementarityRecord> = (0..cfg.count as u64)
        .into_par_iter()
        .map(|i| {
            let state = states::ranked_sample(&cfg.dims, cfg.rank, cfg.seed, i)?;
            evaluate(&state, split, &kinds)
        })
        .collect::<Result<_>>()?;

    let bound = bound_for(split.dim_x(), split.dim_y());
    let n = records.len() as f64;
    let mut mean_distance = BTreeMap::new();
    let mut violation_count = BTreeMap::new();
    let mut histogram = BTreeMap::new();
    for &kind in &kinds {
        let sums: Vec<f64> = records.iter().map(|r| r.sums[&kind]).collect();
        let mean_sum = sums.iter().sum::<f64>() / n;
        let tol = tolerance_for(kind);
        mean_distance.insert(kind, perpendicular_distance(mean_sum, bound));
        violation_count.insert(kind, sums.iter().filter(|&&s| s > bound + tol).count());
        histogram.insert(kind, Histogram::new(&sums, bins, 0.0, bound, tol)?);
    }
    Ok(EnsembleReport {
        rank: cfg.rank,
        samples: records.len(),
        bound,
        kinds,
        mean_distance,
        violation_count,
        histogram,
        records,
    })
}

/// Ensemble statistics of `P_AB + min(Q_{A:C}, Q_{B:C})` on three-party states.
#[derive(Clone, Debug, Serialize)]
pub struct MinVariantReport {
    pub rank: usize,
    pub samples: usize,
    pub bound: f64,
    pub values: BTreeMap<MeasureKind, Vec<f64>>,
    pub violation_count: BTreeMap<MeasureKind, usize>,
    pub histogram: BTreeMap<MeasureKind, Histogram>,
}

pub fn min_variant_report(cfg: &SamplerConfig, kinds: &[MeasureKind], bins: usize) -> Result<MinVariantReport> {
    cfg.validate()?;
    if cfg.dims.len() != 3 {
        return invalid("the single-party variant needs three parties");
    }
    let bound = bound_for(cfg.dims[0] * cfg.dims[1], cfg.dims[2]);
    let per_sample: Vec<Vec<f64>> = (0..cfg.count as u64)
        .into_par_iter()
        .map(|i| {
            let state = states::ranked_sample(&cfg.dims, cfg.rank, cfg.seed, i)?;
            kinds.iter().map(|&k| min_single_party_variant(&state, k)).collect()
        })
        .collect::<Result<_>>()?;

    let mut values = BTreeMap::new();
    let mut violation_count = BTreeMap::new();
    let mut histogram = BTreeMap::new();
    for (idx, &kind) in kinds.iter().enumerate() {
        let column: Vec<f64> = per_sample.iter().map(|row| row[idx]).collect();
        let tol = tolerance_for(kind);
        violation_count.insert(kind, column.iter().filter(|&&v| v > bound + tol).count());
        histogram.insert(kind, Histogram::new(&column, bins, 0.0, bound, tol)?);
        values.insert(kind, column);
    }
    Ok(MinVariantReport {
        rank: cfg.rank,
        samples: cfg.count,
        bound,
        values,
        violation_count,
        histogram,
    })
}
