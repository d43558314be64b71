//! Canonical states and seedable random density matrices.
//!
//! Random draws are keyed by `(seed, sample index)`: every sample owns a
//! ChaCha stream, so a batch can be generated in any order, on any number
//! of workers, and still come out bit-identical.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::qla::{self, ComplexMatrix, Spectrum};

/// A density matrix together with the local dimensions of its parties.
#[derive(Clone, Debug, PartialEq)]
pub struct MultipartiteState {
    rho: ComplexMatrix,
    dims: Vec<usize>,
}

impl MultipartiteState {
    /// Validates Hermiticity, positivity, unit trace and the dimension layout.
    pub fn new(rho: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        Self::check_dims(&dims, rho.rows())?;
        if !rho.is_square() {
            return Err(Error::DimensionMismatch {
                expected: rho.rows(),
                found: rho.cols(),
            });
        }
        qla::density_spectrum(&rho)?;
        Ok(Self { rho, dims })
    }

    /// Pure state `|psi><psi|`; `psi` is normalized here.
    pub fn from_pure(psi: &[Complex64], dims: Vec<usize>) -> Result<Self> {
        Self::check_dims(&dims, psi.len())?;
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return invalid("state vector has zero or non-finite norm");
        }
        let psi: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self {
            rho: ComplexMatrix::projector(&psi),
            dims,
        })
    }

    fn check_dims(dims: &[usize], total: usize) -> Result<()> {
        if dims.is_empty() || dims.contains(&0) {
            return invalid("local dimensions must be a nonempty list of positive integers");
        }
        let product: usize = dims.iter().product();
        if product != total {
            return Err(Error::DimensionMismatch {
                expected: product,
                found: total,
            });
        }
        Ok(())
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_parties(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self) -> usize {
        self.rho.rows()
    }

    /// Reduced state on `keep` (ascending party order).
    pub fn reduce(&self, keep: &[usize]) -> Result<Self> {
        let mut parties = keep.to_vec();
        parties.sort_unstable();
        parties.dedup();
        let rho = qla::partial_trace(&self.rho, &self.dims, &parties)?;
        let dims = parties.iter().map(|&p| self.dims[p]).collect();
        Ok(Self { rho, dims })
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        qla::hermitian_spectrum(&self.rho)
    }

    pub fn entropy(&self) -> Result<f64> {
        qla::von_neumann_entropy(&self.rho)
    }

    /// `U rho U^dagger`.
    pub fn conjugate_by(&self, unitary: &ComplexMatrix) -> Result<Self> {
        let rho = unitary.matmul(&self.rho)?.matmul(&unitary.adjoint())?;
        Ok(Self {
            rho,
            dims: self.dims.clone(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let file = StateFile {
            dims: self.dims.clone(),
            rho: self.rho.as_slice().iter().map(|z| [z.re, z.im]).collect(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: StateFile = serde_json::from_str(text)?;
        let n: usize = file.dims.iter().product();
        let data = file.rho.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        Self::new(ComplexMatrix::new(n.max(1), n.max(1), data)?, file.dims)
    }
}

/// On-disk state format: local dimensions and row-major `[re, im]` entries.
#[derive(Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub rho: Vec<[f64; 2]>,
}

/// Parameters of a fixed-rank random ensemble.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplerConfig {
    pub dims: Vec<usize>,
    pub rank: usize,
    pub seed: u64,
    pub count: usize,
}

impl SamplerConfig {
    pub fn new(dims: Vec<usize>, rank: usize, seed: u64, count: usize) -> Result<Self> {
        let cfg = Self {
            dims,
            rank,
            seed,
            count,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return invalid("local dimensions must be a nonempty list of positive integers");
        }
        let total: usize = self.dims.iter().product();
        if self.rank == 0 || self.rank > total {
            return invalid(format!(
                "rank {} must lie in 1..={total} for dimensions {:?}",
                self.rank, self.dims
            ));
        }
        if self.count == 0 {
            return invalid("sample count must be positive");
        }
        Ok(())
    }
}

/// RNG for sample `index` of the run keyed by `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `(|000> + |111>)/sqrt(2)` on three qubits.
pub fn ghz_state() -> MultipartiteState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut psi = vec![Complex64::new(0.0, 0.0); 8];
    psi[0] = Complex64::new(s, 0.0);
    psi[7] = Complex64::new(s, 0.0);
    MultipartiteState {
        rho: ComplexMatrix::projector(&psi),
        dims: vec![2, 2, 2],
    }
}

/// `p |phi+><phi+| + (1-p) I/4` on two qubits.
pub fn werner_state(p: f64) -> Result<MultipartiteState> {
    if !(0.0..=1.0).contains(&p) {
        return invalid(format!("Werner parameter {p} outside [0, 1]"));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let zero = Complex64::new(0.0, 0.0);
    let bell = ComplexMatrix::projector(&[Complex64::new(s, 0.0), zero, zero, Complex64::new(s, 0.0)]);
    let rho = bell.scale(p).add(&ComplexMatrix::identity(4).scale((1.0 - p) / 4.0))?;
    Ok(MultipartiteState {
        rho,
        dims: vec![2, 2],
    })
}

/// Product of computational basis states, e.g. `|011>` for labels `[0, 1, 1]`.
pub fn basis_product_state(labels: &[usize], dims: &[usize]) -> Result<MultipartiteState> {
    if labels.len() != dims.len() {
        return Err(Error::DimensionMismatch {
            expected: dims.len(),
            found: labels.len(),
        });
    }
    if let Some((l, d)) = labels.iter().zip(dims).find(|(l, d)| l >= d) {
        return invalid(format!("basis label {l} out of range for local dimension {d}"));
    }
    let total: usize = dims.iter().product();
    let idx = labels.iter().zip(dims).fold(0, |acc, (&l, &d)| acc * d + l);
    let mut psi = vec![Complex64::new(0.0, 0.0); total];
    psi[idx] = Complex64::new(1.0, 0.0);
    MultipartiteState::from_pure(&psi, dims.to_vec())
}

/// Haar-random pure state on the joint space.
pub fn haar_pure(dims: &[usize], seed: u64) -> Result<MultipartiteState> {
    ranked_sample(dims, 1, seed, 0)
}

/// Sample `index` of the rank-`rank` induced ensemble keyed by `seed`.
///
/// `rho = G G^dagger / tr(G G^dagger)` with `G` a `d x rank` matrix of
/// independent complex standard normals, which is the law of the reduced
/// state of a Haar-random pure state on (joint space) x (ancilla of dimension
/// `rank`). For `rank = 1` this is the Haar-pure ensemble.
pub fn ranked_sample(dims: &[usize], rank: usize, seed: u64, index: u64) -> Result<MultipartiteState> {
    if dims.is_empty() || dims.contains(&0) {
        return invalid("local dimensions must be a nonempty list of positive integers");
    }
    let d: usize = dims.iter().product();
    if rank == 0 || rank > d {
        return invalid(format!("rank {rank} must lie in 1..={d}"));
    }
    let mut rng = sample_rng(seed, index);
    // Row-major d x rank.
    let g: Vec<Complex64> = (0..d * rank).map(|_| complex_gaussian(&mut rng)).collect();
    let norm: f64 = g.iter().map(|z| z.norm_sqr()).sum();
    let mut rho = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..rank {
                acc += g[i * rank + a] * g[j * rank + a].conj();
            }
            acc /= norm;
            rho[(i, j)] = acc;
            rho[(j, i)] = acc.conj();
        }
        rho[(i, i)].im = 0.0;
    }
    Ok(MultipartiteState {
        rho,
        dims: dims.to_vec(),
    })
}

/// The whole ensemble described by `cfg`, in sample-index order.
pub fn haar_ranked(cfg: &SamplerConfig) -> Result<Vec<MultipartiteState>> {
    cfg.validate()?;
    (0..cfg.count as u64)
        .map(|i| ranked_sample(&cfg.dims, cfg.rank, cfg.seed, i))
        .collect()
}

/// Haar-random unitary of size `n` (QR of a complex Ginibre matrix with phase fix).
pub fn haar_unitary<R: Rng>(n: usize, rng: &mut R) -> ComplexMatrix {
    // Modified Gram-Schmidt over columns.
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|_| (0..n).map(|_| complex_gaussian(rng)).collect())
        .collect();
    for k in 0..n {
        for j in 0..k {
            let (done, rest) = cols.split_at_mut(k);
            let q = &done[j];
            let proj: Complex64 = q.iter().zip(&rest[0]).map(|(a, b)| a.conj() * b).sum();
            for (x, qi) in rest[0].iter_mut().zip(q) {
                *x -= proj * qi;
            }
        }
        let norm = cols[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in cols[k].iter_mut() {
            *x /= norm;
        }
    }
    let mut u = ComplexMatrix::zeros(n, n);
    for (j, col) in cols.iter().enumerate() {
        for (i, &z) in col.iter().enumerate() {
            u[(i, j)] = z;
        }
    }
    u
}
