//! Lower bound on the one-way (Csiszar-Korner) secret key rate for
//! individual attacks, obtained from the purity/mutual-information
//! complementarity of the Alice-Bob-Eve state.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::qla::{self, ProbabilityVector};

/// Bracket and iteration cap for the threshold bisection.
const THRESHOLD_BRACKET: (f64, f64) = (1e-6, 0.25);
const THRESHOLD_MAX_ITERATIONS: usize = 200;
const THRESHOLD_RESIDUAL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KeyRateScenario {
    pub error_rate: f64,
    pub entropy_ab: f64,
    pub bound_b: f64,
    pub rate_lower_bound: f64,
}

impl KeyRateScenario {
    /// The `d_AB <= d_E`, `b = 1` specialization `1 - h(e) - 2 S_AB`.
    pub fn new(error_rate: f64, entropy_ab: f64) -> Result<Self> {
        Ok(Self {
            error_rate,
            entropy_ab,
            bound_b: 1.0,
            rate_lower_bound: raw_key_mutual_information(error_rate)? - 2.0 * check_entropy(entropy_ab)?,
        })
    }

    /// Shared Werner state with parameter `p`.
    pub fn werner(p: f64) -> Result<Self> {
        let e = werner_error_rate(p)?;
        Self::new(e, werner_entropy_from_error(e)?)
    }
}

fn check_error_rate(e: f64) -> Result<f64> {
    if (0.0..=0.5).contains(&e) {
        Ok(e)
    } else {
        invalid(format!("bit error rate {e} outside [0, 1/2]"))
    }
}

fn check_entropy(s: f64) -> Result<f64> {
    if s >= 0.0 && s.is_finite() {
        Ok(s)
    } else {
        invalid(format!("entropy {s} must be a nonnegative number"))
    }
}

/// Mutual information of the raw key bits, `1 - h(e)`.
pub fn raw_key_mutual_information(e: f64) -> Result<f64> {
    Ok(1.0 - qla::binary_entropy(check_error_rate(e)?)?)
}

/// `1 - h(e) - 2 min(log2 d_ab, log2 d_e) (b - P_AB)` with
/// `P_AB = (log2 d_ab - s_ab) / log2 d_ab`. Negative values are returned as is.
pub fn ck_rate_lower_bound(e: f64, s_ab: f64, d_ab: usize, d_e: usize, b: f64) -> Result<f64> {
    if d_ab < 2 || d_e < 2 {
        return invalid(format!("dimensions must be at least 2 (got d_ab = {d_ab}, d_e = {d_e})"));
    }
    if !b.is_finite() {
        return invalid("bound constant must be finite");
    }
    let log_ab = (d_ab as f64).log2();
    let log_e = (d_e as f64).log2();
    let purity = (log_ab - check_entropy(s_ab)?) / log_ab;
    Ok(raw_key_mutual_information(e)? - 2.0 * log_ab.min(log_e) * (b - purity))
}

/// `e = (1 - p)/2` for a shared Werner state.
pub fn werner_error_rate(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return invalid(format!("Werner parameter {p} outside [0, 1]"));
    }
    Ok(0.5 * (1.0 - p))
}

/// Entropy of the Werner state with error rate `e`: `H(e/2, e/2, e/2, 1 - 3e/2)`.
pub fn werner_entropy_from_error(e: f64) -> Result<f64> {
    let e = check_error_rate(e)?;
    let p = ProbabilityVector::new(vec![e / 2.0, e / 2.0, e / 2.0, 1.0 - 1.5 * e])?;
    Ok(qla::shannon_entropy(&p))
}

/// Werner-state rate bound as a function of the error rate.
pub fn werner_rate(e: f64) -> Result<f64> {
    Ok(raw_key_mutual_information(e)? - 2.0 * werner_entropy_from_error(e)?)
}

/// Largest tolerable bit error rate for a shared Werner state: the root of
/// `1 - h(e) - 2 H(e/2, e/2, e/2, 1 - 3e/2)`, by bisection.
pub fn werner_threshold() -> f64 {
    let f = |e: f64| werner_rate(e).expect("bracket lies inside [0, 1/2]");
    let (mut lo, mut hi) = THRESHOLD_BRACKET;
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..THRESHOLD_MAX_ITERATIONS {
        mid = 0.5 * (lo + hi);
        let value = f(mid);
        if value.abs() < THRESHOLD_RESIDUAL || hi - lo < f64::EPSILON {
            break;
        }
        if value > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mid
}
