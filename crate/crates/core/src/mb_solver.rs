//! Maxwell-Boltzmann amplitude distributions fitted to a target entropy.
//!
//! `P(|X| = a) ∝ exp(-λ a²)` over the odd magnitudes `1, 3, ..`, with a
//! uniform sign. Entropy and energy both fall strictly as `λ` grows, so the
//! `λ` matching a target entropy is found by bisection.

use thiserror::Error;

/// Entropy tolerance of [`mb_fit`], in bits per 2D symbol.
pub const FIT_TOLERANCE: f64 = 1e-9;
pub const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MbError {
    #[error("target 2H = {target} is outside the attainable range ({low}, {high}]")]
    TargetOutOfRange { target: f64, low: f64, high: f64 },
    #[error("bits per QAM symbol must be even and at least 4, got {0}")]
    InvalidModulation(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MbDistribution {
    lambda: f64,
    amplitudes: Vec<f64>,
    pmf: Vec<f64>,
}

impl MbDistribution {
    /// Distribution for a given `λ` over the magnitudes of `2^(m/2)`-PAM.
    pub fn with_lambda(lambda: f64, m: usize) -> Self {
        let count = 1usize << (m / 2 - 1);
        let amplitudes: Vec<f64> = (0..count).map(|i| (2 * i + 1) as f64).collect();
        // shifted by the smallest energy so large λ does not underflow
        let weights: Vec<f64> = amplitudes
            .iter()
            .map(|a| (-lambda * (a * a - 1.0)).exp())
            .collect();
        let z: f64 = weights.iter().sum();
        let pmf = weights.iter().map(|w| w / z).collect();
        Self {
            lambda,
            amplitudes,
            pmf,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Magnitudes `1, 3, ..`.
    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    /// `P(|X| = a)` per magnitude.
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Signed PAM distribution, ordered from the most negative amplitude up.
    pub fn signed_pmf(&self) -> Vec<(f64, f64)> {
        let neg = self
            .amplitudes
            .iter()
            .zip(&self.pmf)
            .rev()
            .map(|(a, p)| (-a, p / 2.0));
        let pos = self
            .amplitudes
            .iter()
            .zip(&self.pmf)
            .map(|(a, p)| (*a, p / 2.0));
        neg.chain(pos).collect()
    }

    /// Mean QAM symbol energy (both dimensions).
    pub fn energy(&self) -> f64 {
        2.0 * self
            .amplitudes
            .iter()
            .zip(&self.pmf)
            .map(|(a, p)| p * a * a)
            .sum::<f64>()
    }

    /// Entropy of a 2D symbol, `2H(X)` with `H(X) = H(|X|) + 1`.
    pub fn two_h(&self) -> f64 {
        2.0 * (entropy(&self.pmf) + 1.0)
    }
}

pub(crate) fn entropy(pmf: &[f64]) -> f64 {
    pmf.iter()
        .filter(|&&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

/// Finds the MB distribution whose `2H(X)` equals `target_two_h` within
/// [`FIT_TOLERANCE`].
///
/// The attainable range is `(2, m]`: `λ = 0` gives the uniform distribution
/// and `λ → ∞` collapses onto the smallest magnitude (sign bit only).
pub fn mb_fit(target_two_h: f64, m: usize) -> Result<MbDistribution, MbError> {
    if m < 4 || !m.is_multiple_of(2) || m > 32 {
        return Err(MbError::InvalidModulation(m));
    }
    let (low, high) = (2.0, m as f64);
    if !(target_two_h > low && target_two_h <= high) {
        return Err(MbError::TargetOutOfRange {
            target: target_two_h,
            low,
            high,
        });
    }
    let at = |lambda: f64| MbDistribution::with_lambda(lambda, m);

    let uniform = at(0.0);
    if (uniform.two_h() - target_two_h).abs() <= FIT_TOLERANCE {
        return Ok(uniform);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while at(hi).two_h() > target_two_h {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(MbError::TargetOutOfRange {
                target: target_two_h,
                low,
                high,
            });
        }
    }
    let mut best = at(hi);
    for _ in 0..MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let dist = at(mid);
        let h = dist.two_h();
        if (h - target_two_h).abs() < (best.two_h() - target_two_h).abs() {
            best = dist;
        }
        if (h - target_two_h).abs() <= FIT_TOLERANCE {
            break;
        }
        if h > target_two_h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_lambda_is_uniform() {
        let d = MbDistribution::with_lambda(0.0, 8);
        assert!(d.pmf().iter().all(|&p| p == 0.125));
        assert_eq!(d.two_h(), 8.0);
        assert_eq!(d.energy(), 170.0);
        assert_eq!(mb_fit(8.0, 8).unwrap().lambda(), 0.0);
    }

    #[test]
    fn reference_fit() {
        let d = mb_fit(7.169, 8).unwrap();
        assert!((d.two_h() - 7.169).abs() <= FIT_TOLERANCE);
        assert!((d.energy() - 68.31).abs() <= 0.02, "E = {}", d.energy());
        let expected = [
            0.2628, 0.2355, 0.1891, 0.1360, 0.0877, 0.0506, 0.0262, 0.0121,
        ];
        for (p, e) in d.pmf().iter().zip(expected) {
            assert!((p - e).abs() <= 5e-4, "{p} vs {e}");
        }
        let total: f64 = d.pmf().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let signed = d.signed_pmf();
        assert_eq!(signed.len(), 16);
        assert_eq!(signed[0].0, -15.0);
        assert_eq!(signed[8], (1.0, d.pmf()[0] / 2.0));
    }

    #[test]
    fn near_lower_limit_concentrates_on_one() {
        let d = mb_fit(2.0 + 1e-6, 8).unwrap();
        assert!(d.pmf()[0] > 0.999_999);
        assert!((d.energy() - 2.0).abs() < 1e-4);
    }

    #[test]
    fn monotone_in_lambda() {
        let grid: Vec<MbDistribution> = (0..200)
            .map(|i| MbDistribution::with_lambda(i as f64 * 0.005, 8))
            .collect();
        for w in grid.windows(2) {
            assert!(w[1].two_h() < w[0].two_h());
            assert!(w[1].energy() < w[0].energy());
        }
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(
            mb_fit(2.0, 8),
            Err(MbError::TargetOutOfRange { .. })
        ));
        assert!(matches!(
            mb_fit(8.5, 8),
            Err(MbError::TargetOutOfRange { .. })
        ));
        assert!(matches!(
            mb_fit(f64::NAN, 8),
            Err(MbError::TargetOutOfRange { .. })
        ));
        assert!(matches!(mb_fit(5.0, 7), Err(MbError::InvalidModulation(7))));
    }
}
