//! High-influence coordinate extraction from Fourier or Influence samples.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::Unitary;
use crate::samplers::{FourierSampler, InfluenceSampler, QueryLedger};
use crate::subset::Subset;

/// Refuse to run extractions longer than this many sampler calls.
pub const MAX_ROUNDS: u64 = 1 << 30;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtractorConfig {
    pub k: usize,
    pub tau: f64,
    pub epsilon: f64,
    pub delta: f64,
}

impl ExtractorConfig {
    pub fn new(k: usize, tau: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Parameter("junta size k must be at least 1".into()));
        }
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::Parameter(format!("τ = {tau} outside (0, 1)")));
        }
        Ok(ExtractorConfig {
            k,
            tau,
            epsilon: 0.5,
            delta: 0.01,
        })
    }

    /// Number of sampler calls, `⌈(2k/(ε²τ²)) ln(k²/(δτ²))⌉`.
    pub fn t_rounds(&self) -> Result<u64> {
        let k = self.k as f64;
        let t2 = self.tau * self.tau;
        let e2 = self.epsilon * self.epsilon;
        let t = (2.0 * k / (e2 * t2) * (k * k / (self.delta * t2)).ln()).ceil();
        if !(t <= MAX_ROUNDS as f64) {
            return Err(Error::Capacity(format!(
                "extraction needs {t:.3e} samples (limit {MAX_ROUNDS})"
            )));
        }
        Ok(t.max(1.0) as u64)
    }

    /// Count threshold of the raw-count form, `(1−ε)Tτ²/k`.
    pub fn count_threshold(&self, rounds: u64) -> f64 {
        (1.0 - self.epsilon) * rounds as f64 * self.tau * self.tau / self.k as f64
    }

    /// Frequency threshold of the normalised form, `(1−ε)τ²/k`.
    pub fn frequency_threshold(&self) -> f64 {
        (1.0 - self.epsilon) * self.tau * self.tau / self.k as f64
    }

    /// Upper bound `2k²/τ²` on the size of any returned set.
    pub fn max_set_size(&self) -> f64 {
        2.0 * (self.k * self.k) as f64 / (self.tau * self.tau)
    }
}

/// Per-coordinate counts `e_i` over samples of weight at most `k`.
pub fn low_weight_counts(supports: impl IntoIterator<Item = Subset>, n: usize, k: usize) -> Vec<u64> {
    let mut e = vec![0u64; n];
    for s in supports {
        if s.len() <= k {
            for i in s.iter() {
                e[i] += 1;
            }
        }
    }
    e
}

/// Threshold step with raw counts: `{i : e_i ≥ (1−ε)Tτ²/k}`.
pub fn select_by_count(counts: &[u64], rounds: u64, config: &ExtractorConfig) -> Subset {
    let bar = config.count_threshold(rounds);
    Subset::from_indices((0..counts.len()).filter(|&i| counts[i] as f64 >= bar))
}

/// Threshold step with normalised counts: `{i : e_i/T ≥ (1−ε)τ²/k}`.
pub fn select_by_frequency(counts: &[u64], rounds: u64, config: &ExtractorConfig) -> Subset {
    let bar = config.frequency_threshold();
    Subset::from_indices((0..counts.len()).filter(|&i| counts[i] as f64 / rounds as f64 >= bar))
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::Parameter(format!("need 1 ≤ k < n, got k = {k}, n = {n}")));
    }
    Ok(())
}

/// Coordinate extraction with Fourier samples from a prepared sampler.
pub fn coordinate_extractor_with<R: Rng + ?Sized>(
    sampler: &FourierSampler,
    config: &ExtractorConfig,
    rng: &mut R,
    ledger: &mut QueryLedger,
) -> Result<Subset> {
    let n = sampler.num_qubits();
    check_k(config.k, n)?;
    let rounds = config.t_rounds()?;
    let draws = (0..rounds).map(|_| sampler.sample(rng, ledger).support());
    let counts = low_weight_counts(draws, n, config.k);
    Ok(select_by_count(&counts, rounds, config))
}

/// Returns coordinates whose degree-`k` influence is plausibly at least `τ²/k`.
///
/// Never returns more than `2k²/τ²` coordinates, and contains every coordinate with
/// `Inf_i^{≤k}[U] ≥ τ²/k` with probability at least 0.99.
pub fn coordinate_extractor<R: Rng + ?Sized>(
    u: &Unitary,
    k: usize,
    tau: f64,
    rng: &mut R,
    ledger: &mut QueryLedger,
) -> Result<Subset> {
    let config = ExtractorConfig::new(k, tau)?;
    check_k(k, u.num_qubits())?;
    config.t_rounds()?;
    let sampler = FourierSampler::from_unitary(u)?;
    coordinate_extractor_with(&sampler, &config, rng, ledger)
}

/// Coordinate extraction with Influence samples from a prepared sampler.
pub fn coordinate_extractor_local_with<R: Rng + ?Sized>(
    sampler: &InfluenceSampler,
    config: &ExtractorConfig,
    rng: &mut R,
    ledger: &mut QueryLedger,
) -> Result<Subset> {
    let n = sampler.num_qubits();
    check_k(config.k, n)?;
    let rounds = config.t_rounds()?;
    let draws = (0..rounds).map(|_| sampler.sample(rng, ledger));
    let counts = low_weight_counts(draws, n, config.k);
    Ok(select_by_frequency(&counts, rounds, config))
}

/// Single-qubit-operation variant of [`coordinate_extractor`].
pub fn coordinate_extractor_local<R: Rng + ?Sized>(
    u: &Unitary,
    k: usize,
    tau: f64,
    rng: &mut R,
    ledger: &mut QueryLedger,
) -> Result<Subset> {
    let config = ExtractorConfig::new(k, tau)?;
    check_k(k, u.num_qubits())?;
    config.t_rounds()?;
    let sampler = InfluenceSampler::new(u)?;
    coordinate_extractor_local_with(&sampler, &config, rng, ledger)
}
