//! Normalized purity and bipartite correlation measures.
//!
//! Conventions:
//! - the partial transpose acts on the second side of a [`Bipartition`];
//! - measurement-based quantities (measured mutual information, discord,
//!   work deficit) measure the second side, which must be a single qubit;
//! - measurements are rank-1 projective, parameterized by a Bloch direction.

mod optimize;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::qla::{self, ComplexMatrix};
use crate::states::MultipartiteState;

pub use optimize::{optimize_measurement, GRID_PHI, GRID_THETA, REFINE_STARTS, REFINE_TOLERANCE};

/// Split of all parties into two disjoint nonempty sides `X : Y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipartition {
    side_x: Vec<usize>,
    side_y: Vec<usize>,
    dim_x: usize,
    dim_y: usize,
}

impl Bipartition {
    pub fn new(side_x: &[usize], side_y: &[usize], dims: &[usize]) -> Result<Self> {
        let n = dims.len();
        let mut x = side_x.to_vec();
        let mut y = side_y.to_vec();
        x.sort_unstable();
        x.dedup();
        y.sort_unstable();
        y.dedup();
        if x.is_empty() || y.is_empty() {
            return invalid("both sides of a bipartition must be nonempty");
        }
        let mut all: Vec<usize> = x.iter().chain(&y).copied().collect();
        all.sort_unstable();
        if all != (0..n).collect::<Vec<_>>() {
            return invalid(format!(
                "sides {x:?} and {y:?} must partition the {n} parties"
            ));
        }
        let dim_x = x.iter().map(|&p| dims[p]).product();
        let dim_y = y.iter().map(|&p| dims[p]).product();
        Ok(Self {
            side_x: x,
            side_y: y,
            dim_x,
            dim_y,
        })
    }

    /// Parses `AB:C`-style labels; party `A` is index 0.
    pub fn parse(label: &str, dims: &[usize]) -> Result<Self> {
        let (left, right) = label
            .split_once(':')
            .ok_or_else(|| Error::InvalidInput(format!("split `{label}` has no ':'")))?;
        let parties = |s: &str| -> Result<Vec<usize>> {
            s.trim()
                .chars()
                .map(|c| {
                    let upper = c.to_ascii_uppercase();
                    if upper.is_ascii_uppercase() {
                        Ok((upper as u8 - b'A') as usize)
                    } else {
                        invalid(format!("bad party letter `{c}` in split `{label}`"))
                    }
                })
                .collect()
        };
        Self::new(&parties(left)?, &parties(right)?, dims)
    }

    pub fn side_x(&self) -> &[usize] {
        &self.side_x
    }

    pub fn side_y(&self) -> &[usize] {
        &self.side_y
    }

    pub fn dim_x(&self) -> usize {
        self.dim_x
    }

    pub fn dim_y(&self) -> usize {
        self.dim_y
    }

    pub fn num_parties(&self) -> usize {
        self.side_x.len() + self.side_y.len()
    }

    /// `log2 min(d_x, d_y)`.
    pub fn min_log_dim(&self) -> f64 {
        (self.dim_x.min(self.dim_y) as f64).log2()
    }

    fn check_state(&self, state: &MultipartiteState) -> Result<()> {
        let dims = state.dims();
        let fits = dims.len() == self.num_parties()
            && self.side_x.iter().map(|&p| dims[p]).product::<usize>() == self.dim_x
            && self.side_y.iter().map(|&p| dims[p]).product::<usize>() == self.dim_y;
        if fits {
            Ok(())
        } else {
            invalid(format!("bipartition {self} does not fit state dimensions {dims:?}"))
        }
    }

    fn measured_qubit(&self, state: &MultipartiteState) -> Result<()> {
        self.check_state(state)?;
        if self.side_y.len() != 1 || self.dim_y != 2 {
            return Err(Error::Unsupported(format!(
                "measured side of {self} must be a single qubit (dimension {})",
                self.dim_y
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letters = |s: &[usize]| -> String { s.iter().map(|&p| (b'A' + p as u8) as char).collect() };
        write!(f, "{}:{}", letters(&self.side_x), letters(&self.side_y))
    }
}

/// The six correlation measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Negativity,
    LogNegativity,
    Qmi,
    MeasuredMi,
    Discord,
    WorkDeficit,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 6] = [
        MeasureKind::Negativity,
        MeasureKind::LogNegativity,
        MeasureKind::Qmi,
        MeasureKind::MeasuredMi,
        MeasureKind::Discord,
        MeasureKind::WorkDeficit,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            MeasureKind::Negativity => "neg",
            MeasureKind::LogNegativity => "logneg",
            MeasureKind::Qmi => "qmi",
            MeasureKind::MeasuredMi => "mmi",
            MeasureKind::Discord => "discord",
            MeasureKind::WorkDeficit => "workdef",
        }
    }

    /// Whether the value comes out of the measurement optimizer.
    pub fn is_optimized(self) -> bool {
        matches!(
            self,
            MeasureKind::MeasuredMi | MeasureKind::Discord | MeasureKind::WorkDeficit
        )
    }

    /// Denominator turning the raw value into the normalized one.
    pub fn normalizer(self, split: &Bipartition) -> f64 {
        let d_min = split.dim_x.min(split.dim_y);
        match self {
            MeasureKind::Negativity => (d_min as f64 - 1.0) / 2.0,
            MeasureKind::Qmi => 2.0 * split.min_log_dim(),
            _ => split.min_log_dim(),
        }
    }

    /// Parses a comma-separated tag list such as `neg,qmi`.
    pub fn parse_list(list: &str) -> Result<Vec<MeasureKind>> {
        let mut kinds: Vec<MeasureKind> = list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(str::parse)
            .collect::<Result<_>>()?;
        if kinds.is_empty() {
            return invalid("no measures given");
        }
        kinds.sort_unstable();
        kinds.dedup();
        Ok(kinds)
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        MeasureKind::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| {
                let valid: Vec<&str> = MeasureKind::ALL.iter().map(|k| k.tag()).collect();
                Error::InvalidInput(format!(
                    "unknown measure `{s}`; valid tags: {}",
                    valid.join(", ")
                ))
            })
    }
}

/// A measure in bits together with its normalized value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureValue {
    pub raw: f64,
    pub normalized: f64,
}

impl MeasureValue {
    fn new(kind: MeasureKind, raw: f64, split: &Bipartition) -> Self {
        let denominator = kind.normalizer(split);
        let normalized = if denominator > 0.0 { raw / denominator } else { 0.0 };
        Self { raw, normalized }
    }
}

/// Rank-1 projective measurement `{P+, P-}` of a qubit along a Bloch direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitMeasurement {
    pub theta: f64,
    pub phi: f64,
}

impl QubitMeasurement {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    /// Computational basis.
    pub fn z() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn bloch(&self) -> [f64; 3] {
        [
            self.theta.sin() * self.phi.cos(),
            self.theta.sin() * self.phi.sin(),
            self.theta.cos(),
        ]
    }

    /// Same direction with `theta` in `[0, pi]` and `phi` in `[0, 2 pi)`.
    pub fn canonical(&self) -> Self {
        let mut theta = self.theta.rem_euclid(2.0 * PI);
        let mut phi = self.phi;
        if theta > PI {
            theta = 2.0 * PI - theta;
            phi += PI;
        }
        let mut phi = phi.rem_euclid(2.0 * PI);
        if phi >= 2.0 * PI {
            phi = 0.0;
        }
        Self { theta, phi }
    }

    /// The two outcome kets `|m+>` and `|m->`.
    pub fn kets(&self) -> [[Complex64; 2]; 2] {
        let (s, c) = (0.5 * self.theta).sin_cos();
        let phase = Complex64::from_polar(1.0, self.phi);
        [
            [Complex64::new(c, 0.0), phase * s],
            [Complex64::new(s, 0.0), -phase * c],
        ]
    }

    pub fn projectors(&self) -> [ComplexMatrix; 2] {
        self.kets().map(|k| ComplexMatrix::projector(&k))
    }
}

/// `(log2 d - S(rho_part)) / log2 d` for the reduced state on `part`.
pub fn purity_normalized(state: &MultipartiteState, part: &[usize]) -> Result<f64> {
    if part.is_empty() {
        return invalid("purity needs a nonempty set of parties");
    }
    let reduced = state.reduce(part)?;
    let log_d = (reduced.dim() as f64).log2();
    if log_d <= 0.0 {
        return invalid("purity of a one-dimensional part is undefined");
    }
    Ok((log_d - reduced.entropy()?) / log_d)
}

fn partial_transpose_y(state: &MultipartiteState, split: &Bipartition) -> Result<ComplexMatrix> {
    split.side_y.iter().try_fold(state.rho().clone(), |m, &p| {
        qla::partial_transpose(&m, state.dims(), p)
    })
}

fn pt_trace_norm(state: &MultipartiteState, split: &Bipartition) -> Result<f64> {
    split.check_state(state)?;
    qla::trace_norm(&partial_transpose_y(state, split)?)
}

/// `N = (||rho^T_Y||_1 - 1)/2`, normalized by its maximum `(d_min - 1)/2`.
pub fn negativity(state: &MultipartiteState, split: &Bipartition) -> Result<MeasureValue> {
    let norm = pt_trace_norm(state, split)?;
    Ok(MeasureValue::new(MeasureKind::Negativity, (0.5 * (norm - 1.0)).max(0.0), split))
}

/// `E_N = log2 ||rho^T_Y||_1`, normalized by `log2 d_min`.
pub fn log_negativity(state: &MultipartiteState, split: &Bipartition) -> Result<MeasureValue> {
    let norm = pt_trace_norm(state, split)?;
    Ok(MeasureValue::new(MeasureKind::LogNegativity, norm.log2().max(0.0), split))
}

struct Entropies {
    x: f64,
    y: f64,
    xy: f64,
}

fn entropies(state: &MultipartiteState, split: &Bipartition) -> Result<Entropies> {
    split.check_state(state)?;
    Ok(Entropies {
        x: state.reduce(&split.side_x)?.entropy()?,
        y: state.reduce(&split.side_y)?.entropy()?,
        xy: state.entropy()?,
    })
}

/// `I' = S_X + S_Y - S_XY`, normalized by `2 log2 d_min`.
pub fn quantum_mutual_information(state: &MultipartiteState, split: &Bipartition) -> Result<MeasureValue> {
    let s = entropies(state, split)?;
    Ok(MeasureValue::new(MeasureKind::Qmi, s.x + s.y - s.xy, split))
}

/// Purification-style factor of a state with the measured qubit moved last:
/// `rho = G G^dagger`, `G` of shape `(2 d_x) x r`.
struct MeasuredQubitModel {
    dim_x: usize,
    rank: usize,
    /// Row-major `(2 d_x) x rank`.
    factor: Vec<Complex64>,
}

/// Post-measurement entropies at one measurement setting.
struct OutcomeEntropies {
    /// `H(p)` of the outcome distribution.
    outcome: f64,
    /// `-sum_k tr(rho~_k log2 rho~_k)` for the unnormalized conditional
    /// states `rho~_k`; equals the entropy of the dephased joint state.
    dephased: f64,
}

impl OutcomeEntropies {
    /// `sum_k p_k S(rho_X^k)`.
    fn conditional(&self) -> f64 {
        self.dephased - self.outcome
    }
}

impl MeasuredQubitModel {
    fn new(state: &MultipartiteState, split: &Bipartition) -> Result<Self> {
        split.measured_qubit(state)?;
        let order: Vec<usize> = split.side_x.iter().chain(&split.side_y).copied().collect();
        let rho = qla::permute_parties(state.rho(), state.dims(), &order)?;
        let (spectrum, vectors) = qla::hermitian_eigen(&rho)?;
        let d = rho.rows();
        let kept: Vec<(usize, f64)> = spectrum
            .eigenvalues()
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, l)| l > 1e-14)
            .collect();
        let rank = kept.len().max(1);
        let mut factor = vec![Complex64::new(0.0, 0.0); d * rank];
        for (a, &(k, lambda)) in kept.iter().enumerate() {
            let w = lambda.sqrt();
            for i in 0..d {
                factor[i * rank + a] = vectors[(i, k)] * w;
            }
        }
        Ok(Self {
            dim_x: split.dim_x,
            rank,
            factor,
        })
    }

    fn evaluate(&self, m: &QubitMeasurement) -> OutcomeEntropies {
        let (dx, r) = (self.dim_x, self.rank);
        let mut outcome = 0.0;
        let mut dephased = 0.0;
        let mut gk = vec![Complex64::new(0.0, 0.0); dx * r];
        for ket in m.kets() {
            let (b0, b1) = (ket[0].conj(), ket[1].conj());
            for x in 0..dx {
                for a in 0..r {
                    gk[x * r + a] = b0 * self.factor[(2 * x) * r + a] + b1 * self.factor[(2 * x + 1) * r + a];
                }
            }
            // Nonzero spectrum of G_k G_k^dagger from the smaller Gram matrix.
            let gram = if r <= dx {
                let mut g = ComplexMatrix::zeros(r, r);
                for a in 0..r {
                    for b in a..r {
                        let z: Complex64 = (0..dx).map(|x| gk[x * r + a].conj() * gk[x * r + b]).sum();
                        g[(a, b)] = z;
                        g[(b, a)] = z.conj();
                    }
                }
                g
            } else {
                let mut g = ComplexMatrix::zeros(dx, dx);
                for x in 0..dx {
                    for y in x..dx {
                        let z: Complex64 = (0..r).map(|a| gk[x * r + a] * gk[y * r + a].conj()).sum();
                        g[(x, y)] = z;
                        g[(y, x)] = z.conj();
                    }
                }
                g
            };
            let eigenvalues = qla::hermitian_eigenvalues_unchecked(&gram);
            let p: f64 = eigenvalues.iter().map(|l| l.max(0.0)).sum();
            outcome -= qla::xlog2x(p);
            dephased -= eigenvalues.iter().map(|&l| qla::xlog2x(l.max(0.0))).sum::<f64>();
        }
        OutcomeEntropies { outcome, dephased }
    }
}

/// Classical correlation `J = S_X - min sum_k p_k S(rho_X^k)` with the
/// minimum over projective measurements on the second side.
pub fn measured_mutual_information(state: &MultipartiteState, split: &Bipartition) -> Result<MeasureValue> {
    let model = MeasuredQubitModel::new(state, split)?;
    let s_x = state.reduce(&split.side_x)?.entropy()?;
    Ok(MeasureValue::new(MeasureKind::MeasuredMi, s_x - min_conditional_entropy(&model), split))
}

fn min_conditional_entropy(model: &MeasuredQubitModel) -> f64 {
    optimize_measurement(|m| model.evaluate(m).conditional()).1
}

fn min_dephased_entropy(model: &MeasuredQubitModel) -> f64 {
    optimize_measurement(|m| model.evaluate(m).dephased).1
}

/// `D = I' - J`.
pub fn quantum_discord(state: &MultipartiteState, split: &Bipartition) -> Result<MeasureValue> {
    let qmi = quantum_mutual_information(state, split)?;
    let j = measured_mutual_information(state, split)?;
    Ok(MeasureValue::new(MeasureKind::Discord, qmi.raw - j.raw, split))
}

/// One-way work deficit: `min S(sum_k (I x P_k) rho (I x P_k)) - S(rho)`.
pub fn work_deficit(state: &MultipartiteState, split: &Bipartition) -> Result<MeasureValue> {
    let model = MeasuredQubitModel::new(state, split)?;
    Ok(MeasureValue::new(
        MeasureKind::WorkDeficit,
        min_dephased_entropy(&model) - state.entropy()?,
        split,
    ))
}

/// Post-measurement conditional entropy `sum_k p_k S(rho_X^k)` for a fixed measurement.
pub fn conditional_entropy(state: &MultipartiteState, split: &Bipartition, m: &QubitMeasurement) -> Result<f64> {
    Ok(MeasuredQubitModel::new(state, split)?.evaluate(m).conditional())
}

/// Entropy of the state after dephasing the second side in the basis of `m`.
pub fn dephased_entropy(state: &MultipartiteState, split: &Bipartition, m: &QubitMeasurement) -> Result<f64> {
    Ok(MeasuredQubitModel::new(state, split)?.evaluate(m).dephased)
}

/// Rank-1 projectors onto the columns of a unitary.
pub fn basis_projectors(unitary: &ComplexMatrix) -> Vec<ComplexMatrix> {
    (0..unitary.cols())
        .map(|j| {
            let col: Vec<Complex64> = (0..unitary.rows()).map(|i| unitary[(i, j)]).collect();
            ComplexMatrix::projector(&col)
        })
        .collect()
}

fn check_complete(family: &[ComplexMatrix], dim: usize, side: &str) -> Result<()> {
    if family.is_empty() {
        return invalid(format!("empty measurement on side {side}"));
    }
    let mut total = ComplexMatrix::zeros(dim, dim);
    for p in family {
        if p.rows() != dim || p.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.rows(),
            });
        }
        total = total.add(p)?;
    }
    let defect = total.max_abs_diff(&ComplexMatrix::identity(dim));
    if defect > 1e-9 {
        return invalid(format!(
            "measurement on side {side} is incomplete (|sum P - I| = {defect:e})"
        ));
    }
    Ok(())
}

/// Mutual information `H(X) + H(Y) - H(X, Y)` of the outcome table obtained
/// by measuring `meas_x` on side X and `meas_y` on side Y.
pub fn classical_mutual_information(
    state: &MultipartiteState,
    split: &Bipartition,
    meas_x: &[ComplexMatrix],
    meas_y: &[ComplexMatrix],
) -> Result<f64> {
    split.check_state(state)?;
    check_complete(meas_x, split.dim_x, "X")?;
    check_complete(meas_y, split.dim_y, "Y")?;
    let order: Vec<usize> = split.side_x.iter().chain(&split.side_y).copied().collect();
    let rho = qla::permute_parties(state.rho(), state.dims(), &order)?;
    let d = rho.rows();

    let mut joint = vec![vec![0.0; meas_y.len()]; meas_x.len()];
    for (i, px) in meas_x.iter().enumerate() {
        for (j, py) in meas_y.iter().enumerate() {
            let op = qla::tensor_product(px, py);
            let mut p = Complex64::new(0.0, 0.0);
            for r in 0..d {
                for c in 0..d {
                    p += op[(r, c)] * rho[(c, r)];
                }
            }
            joint[i][j] = p.re.max(0.0);
        }
    }
    let h = |ps: &mut dyn Iterator<Item = f64>| -> f64 { -ps.map(qla::xlog2x).sum::<f64>() };
    let h_x = h(&mut joint.iter().map(|row| row.iter().sum()));
    let h_y = h(&mut (0..meas_y.len()).map(|j| joint.iter().map(|row| row[j]).sum()));
    let h_xy = h(&mut joint.iter().flatten().copied());
    Ok(h_x + h_y - h_xy)
}

/// Computes the requested measures, sharing spectra and the optimizer runs between them.
pub fn evaluate_measures(
    state: &MultipartiteState,
    split: &Bipartition,
    kinds: &[MeasureKind],
) -> Result<BTreeMap<MeasureKind, MeasureValue>> {
    split.check_state(state)?;
    let wants = |k: MeasureKind| kinds.contains(&k);
    let mut out = BTreeMap::new();

    if wants(MeasureKind::Negativity) || wants(MeasureKind::LogNegativity) {
        let norm = pt_trace_norm(state, split)?;
        if wants(MeasureKind::Negativity) {
            let raw = (0.5 * (norm - 1.0)).max(0.0);
            out.insert(MeasureKind::Negativity, MeasureValue::new(MeasureKind::Negativity, raw, split));
        }
        if wants(MeasureKind::LogNegativity) {
            let raw = norm.log2().max(0.0);
            out.insert(MeasureKind::LogNegativity, MeasureValue::new(MeasureKind::LogNegativity, raw, split));
        }
    }

    let needs_qmi = wants(MeasureKind::Qmi) || wants(MeasureKind::Discord);
    let needs_model = wants(MeasureKind::MeasuredMi) || wants(MeasureKind::Discord) || wants(MeasureKind::WorkDeficit);
    if needs_qmi || needs_model {
        let s = entropies(state, split)?;
        let qmi = s.x + s.y - s.xy;
        if wants(MeasureKind::Qmi) {
            out.insert(MeasureKind::Qmi, MeasureValue::new(MeasureKind::Qmi, qmi, split));
        }
        if needs_model {
            let model = MeasuredQubitModel::new(state, split)?;
            if wants(MeasureKind::MeasuredMi) || wants(MeasureKind::Discord) {
                let j = s.x - min_conditional_entropy(&model);
                if wants(MeasureKind::MeasuredMi) {
                    out.insert(MeasureKind::MeasuredMi, MeasureValue::new(MeasureKind::MeasuredMi, j, split));
                }
                if wants(MeasureKind::Discord) {
                    out.insert(MeasureKind::Discord, MeasureValue::new(MeasureKind::Discord, qmi - j, split));
                }
            }
            if wants(MeasureKind::WorkDeficit) {
                let raw = min_dephased_entropy(&model) - s.xy;
                out.insert(MeasureKind::WorkDeficit, MeasureValue::new(MeasureKind::WorkDeficit, raw, split));
            }
        }
    }
    Ok(out)
}

pub fn measure(state: &MultipartiteState, split: &Bipartition, kind: MeasureKind) -> Result<MeasureValue> {
    Ok(evaluate_measures(state, split, &[kind])?[&kind])
}
