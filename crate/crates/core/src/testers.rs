//! Tolerant junta testers.
//!
//! The constant-gap testers (unitary and Boolean, with Fourier or Influence samples)
//! share one pipeline: extract candidate coordinates, draw all `M` testing samples up
//! front, then scan every `k`-subset `T` of the candidates for the smallest empirical
//! `Inf_T̄`. The gapless tester replaces the influence statistic by a direct estimate
//! of the distance to `J_T` built from Hadamard tests.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::boolean::{embed_unitary, BooleanFunction};
use crate::error::{Error, Result};
use crate::extractors::{
    coordinate_extractor_local_with, coordinate_extractor_with, ExtractorConfig,
};
use crate::linalg::{nuclear_norm, ComplexMatrix, Unitary, C64};
use crate::pauli::{candidate_subsets, TIE_TOL};
use crate::samplers::{hadamard_counts, hadamard_shots, FourierSampler, InfluenceSampler, QueryLedger};
use crate::subset::{binomial, Subset};

/// Largest register the local testers accept.
pub const MAX_LOCAL_QUBITS: usize = 10;
/// Largest `|T|` the warmup estimator accepts.
pub const MAX_WARMUP_SUBSET: usize = 4;
/// Refuse testing phases longer than this many sampler calls.
pub const MAX_TEST_ROUNDS: u64 = 1 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Yes,
    No,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The five tester variants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TesterKind {
    /// Fourier samples on a unitary.
    Alg3,
    /// Fourier samples on a Boolean function's diagonal embedding.
    Alg3Bool,
    /// Influence samples on a unitary.
    Alg7,
    /// Influence samples on a Boolean function's diagonal embedding.
    Alg7Bool,
    /// Hadamard-test distance estimates, any `ε₁ < ε₂`.
    Alg8,
}

impl TesterKind {
    pub const ALL: [TesterKind; 5] = [
        TesterKind::Alg3,
        TesterKind::Alg3Bool,
        TesterKind::Alg7,
        TesterKind::Alg7Bool,
        TesterKind::Alg8,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TesterKind::Alg3 => "alg3",
            TesterKind::Alg3Bool => "alg3-bool",
            TesterKind::Alg7 => "alg7",
            TesterKind::Alg7Bool => "alg7-bool",
            TesterKind::Alg8 => "alg8",
        }
    }

    pub fn is_boolean(self) -> bool {
        matches!(self, TesterKind::Alg3Bool | TesterKind::Alg7Bool)
    }

    pub fn is_local(self) -> bool {
        matches!(self, TesterKind::Alg7 | TesterKind::Alg7Bool)
    }

    /// Checks the distance parameters against this variant's gap condition.
    pub fn check_gap(self, epsilon1: f64, epsilon2: f64) -> Result<()> {
        let (factor, label) = match self {
            TesterKind::Alg3 => (2.0 * std::f64::consts::SQRT_2, "2√2·ε₁"),
            TesterKind::Alg3Bool => (4.0, "4ε₁"),
            TesterKind::Alg7 => (2.0 * 3f64.sqrt(), "2√3·ε₁"),
            TesterKind::Alg7Bool => (6.0, "6ε₁"),
            TesterKind::Alg8 => (1.0, "ε₁"),
        };
        let ok = epsilon1 > 0.0 && factor * epsilon1 < epsilon2 && epsilon2 < 1.0;
        if !ok {
            return Err(Error::Parameter(format!(
                "{} needs 0 < {label} < ε₂ < 1, got ε₁ = {epsilon1}, ε₂ = {epsilon2}",
                self.name()
            )));
        }
        Ok(())
    }

    /// The slack `δ` of the constant-gap variants.
    pub fn delta(self, epsilon1: f64, epsilon2: f64) -> f64 {
        match self {
            TesterKind::Alg3 => (epsilon2 * epsilon2 / 4.0 - 2.0 * epsilon1 * epsilon1) / 3.0,
            TesterKind::Alg3Bool => (epsilon2 - 4.0 * epsilon1) / 3.0,
            TesterKind::Alg7 => (epsilon2 * epsilon2 / 6.0 - 2.0 * epsilon1 * epsilon1) / 3.0,
            TesterKind::Alg7Bool => (2.0 * epsilon2 / 3.0 - 4.0 * epsilon1) / 3.0,
            TesterKind::Alg8 => 0.01,
        }
    }

    /// Largest statistic that still yields `Yes`.
    pub fn threshold(self, epsilon1: f64, epsilon2: f64) -> f64 {
        let delta = self.delta(epsilon1, epsilon2);
        match self {
            TesterKind::Alg3 | TesterKind::Alg7 => 2.0 * epsilon1 * epsilon1 + 2.0 * delta,
            TesterKind::Alg3Bool | TesterKind::Alg7Bool => 4.0 * epsilon1 + 2.0 * delta,
            TesterKind::Alg8 => epsilon1 + (epsilon2 - epsilon1) / 2.0,
        }
    }
}

impl fmt::Display for TesterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TesterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TesterKind::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown tester `{s}`")))
    }
}

/// Parameters a tester run actually used.
#[derive(Clone, Debug, PartialEq)]
pub struct TesterParams {
    pub kind: TesterKind,
    pub k: usize,
    pub epsilon1: f64,
    pub epsilon2: f64,
    pub delta: f64,
    pub tau: f64,
    /// Extraction sample count.
    pub t_rounds: u64,
    /// Testing sample count (constant-gap) or warmup sample count per subset (gapless).
    pub m_rounds: u64,
    pub threshold: f64,
    /// Per-subset failure budget of the gapless tester.
    pub delta_prime: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TesterVerdict {
    pub verdict: Verdict,
    /// The subset attaining the minimum statistic.
    pub witness: Option<Subset>,
    /// `min_T s_T̄` or the minimum estimated distance.
    pub statistic: f64,
    /// Output of the coordinate extractor.
    pub extracted: Subset,
    pub queries: QueryLedger,
    pub params: TesterParams,
}

/// Testing sample count `⌈ln(200(C(|S|,k)+1)) / (2δ²)⌉`.
pub fn test_rounds(delta: f64, subsets: u128) -> Result<u64> {
    let m = ((200.0 * (subsets as f64 + 1.0)).ln() / (2.0 * delta * delta)).ceil();
    if !(m <= MAX_TEST_ROUNDS as f64) {
        return Err(Error::Capacity(format!("{m:.3e} testing samples")));
    }
    Ok(m as u64)
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::Parameter(format!("need 1 ≤ k < n, got k = {k}, n = {n}")));
    }
    Ok(())
}

enum Source<'a> {
    Fourier(&'a FourierSampler),
    Influence(&'a InfluenceSampler),
}

impl Source<'_> {
    fn num_qubits(&self) -> usize {
        match self {
            Source::Fourier(s) => s.num_qubits(),
            Source::Influence(s) => s.num_qubits(),
        }
    }

    fn extract<R: Rng + ?Sized>(
        &self,
        config: &ExtractorConfig,
        rng: &mut R,
        ledger: &mut QueryLedger,
    ) -> Result<Subset> {
        match self {
            Source::Fourier(s) => coordinate_extractor_with(s, config, rng, ledger),
            Source::Influence(s) => coordinate_extractor_local_with(s, config, rng, ledger),
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R, ledger: &mut QueryLedger) -> Subset {
        match self {
            Source::Fourier(s) => s.sample(rng, ledger).support(),
            Source::Influence(s) => s.sample(rng, ledger),
        }
    }
}

/// Smallest value with its subset; exact ties and near-ties keep the earlier subset.
fn lex_min(values: impl IntoIterator<Item = (Subset, f64)>) -> Option<(Subset, f64)> {
    let mut best: Option<(Subset, f64)> = None;
    for (t, v) in values {
        if best.is_none_or(|(_, b)| v < b - TIE_TOL) {
            best = Some((t, v));
        }
    }
    best
}

fn run_constant_gap<R: Rng + ?Sized>(
    kind: TesterKind,
    source: Source<'_>,
    k: usize,
    epsilon1: f64,
    epsilon2: f64,
    rng: &mut R,
) -> Result<TesterVerdict> {
    let n = source.num_qubits();
    kind.check_gap(epsilon1, epsilon2)?;
    check_k(k, n)?;
    let delta = kind.delta(epsilon1, epsilon2);
    let tau = delta.sqrt();
    let config = ExtractorConfig::new(k, tau)?;
    let t_rounds = config.t_rounds()?;

    let mut ledger = QueryLedger::new();
    let extracted = source.extract(&config, rng, &mut ledger)?;
    let candidates = candidate_subsets(extracted, k)?;
    let m_rounds = test_rounds(delta, binomial(extracted.len() as u64, k as u64))?;

    // every testing sample is drawn before any candidate subset is examined
    let samples: Vec<u32> = (0..m_rounds)
        .map(|_| source.draw(rng, &mut ledger).bits())
        .collect();
    let drawn = ledger;

    let statistic = |t: Subset| {
        let outside = !t.bits();
        let hits = samples.iter().filter(|&&x| x & outside != 0).count();
        hits as f64 / m_rounds as f64
    };
    let (witness, stat) = lex_min(candidates.iter().map(|&t| (t, statistic(t))))
        .expect("candidate list is never empty");
    debug_assert_eq!(drawn, ledger);

    let threshold = kind.threshold(epsilon1, epsilon2);
    Ok(TesterVerdict {
        verdict: if stat <= threshold { Verdict::Yes } else { Verdict::No },
        witness: Some(witness),
        statistic: stat,
        extracted,
        queries: ledger,
        params: TesterParams {
            kind,
            k,
            epsilon1,
            epsilon2,
            delta,
            tau,
            t_rounds,
            m_rounds,
            threshold,
            delta_prime: None,
        },
    })
}

/// Tolerant tester for unitaries from Fourier samples; requires `ε₂ > 2√2·ε₁`.
pub fn tolerant_junta_tester<R: Rng + ?Sized>(
    u: &Unitary,
    k: usize,
    epsilon1: f64,
    epsilon2: f64,
    rng: &mut R,
) -> Result<TesterVerdict> {
    TesterKind::Alg3.check_gap(epsilon1, epsilon2)?;
    check_k(k, u.num_qubits())?;
    let sampler = FourierSampler::from_unitary(u)?;
    run_constant_gap(TesterKind::Alg3, Source::Fourier(&sampler), k, epsilon1, epsilon2, rng)
}

/// Tolerant tester for Boolean functions from Fourier samples of `U_f`; requires `ε₂ > 4ε₁`.
pub fn tolerant_boolean_junta_tester<R: Rng + ?Sized>(
    f: &BooleanFunction,
    k: usize,
    epsilon1: f64,
    epsilon2: f64,
    rng: &mut R,
) -> Result<TesterVerdict> {
    TesterKind::Alg3Bool.check_gap(epsilon1, epsilon2)?;
    check_k(k, f.num_vars())?;
    let sampler = FourierSampler::from_unitary(&embed_unitary(f)?)?;
    run_constant_gap(TesterKind::Alg3Bool, Source::Fourier(&sampler), k, epsilon1, epsilon2, rng)
}

fn local_sampler(u: &Unitary) -> Result<InfluenceSampler> {
    if u.num_qubits() > MAX_LOCAL_QUBITS {
        return Err(Error::Capacity(format!(
            "local testers limited to {MAX_LOCAL_QUBITS} qubits"
        )));
    }
    InfluenceSampler::new(u)
}

/// Tolerant tester for unitaries from Influence samples; requires `ε₂ > 2√3·ε₁`.
pub fn tolerant_junta_tester_local<R: Rng + ?Sized>(
    u: &Unitary,
    k: usize,
    epsilon1: f64,
    epsilon2: f64,
    rng: &mut R,
) -> Result<TesterVerdict> {
    TesterKind::Alg7.check_gap(epsilon1, epsilon2)?;
    check_k(k, u.num_qubits())?;
    let sampler = local_sampler(u)?;
    run_constant_gap(TesterKind::Alg7, Source::Influence(&sampler), k, epsilon1, epsilon2, rng)
}

/// Tolerant tester for Boolean functions from Influence samples of `U_f`; requires `ε₂ > 6ε₁`.
pub fn tolerant_boolean_junta_tester_local<R: Rng + ?Sized>(
    f: &BooleanFunction,
    k: usize,
    epsilon1: f64,
    epsilon2: f64,
    rng: &mut R,
) -> Result<TesterVerdict> {
    TesterKind::Alg7Bool.check_gap(epsilon1, epsilon2)?;
    check_k(k, f.num_vars())?;
    let sampler = local_sampler(&embed_unitary(f)?)?;
    run_constant_gap(TesterKind::Alg7Bool, Source::Influence(&sampler), k, epsilon1, epsilon2, rng)
}

/// Sizing of one warmup estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WarmupPlan {
    pub k: usize,
    pub tau: f64,
    pub delta: f64,
    /// `M = ⌈(2^{k+1}/τ²) ln(4/δ)⌉` sampled assignments of the complement.
    pub m_rounds: u64,
    /// `τ / 2^{k/2+1}`.
    pub entry_precision: f64,
    /// `δ / (2·M·4^k)`.
    pub entry_failure: f64,
    /// Shots per quadrature of each amplitude estimate.
    pub shots_per_entry: u64,
}

impl WarmupPlan {
    pub fn new(k: usize, tau: f64, delta: f64) -> Result<Self> {
        if k > MAX_WARMUP_SUBSET {
            return Err(Error::Capacity(format!(
                "warmup estimator limited to |T| ≤ {MAX_WARMUP_SUBSET}"
            )));
        }
        if !(tau > 0.0 && tau < 1.0) || !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Parameter(format!(
                "warmup estimator needs τ, δ in (0, 1); got τ = {tau}, δ = {delta}"
            )));
        }
        let m = ((1u64 << (k + 1)) as f64 / (tau * tau) * (4.0 / delta).ln()).ceil();
        if !(m <= MAX_TEST_ROUNDS as f64) {
            return Err(Error::Capacity(format!("{m:.3e} warmup rounds")));
        }
        let m_rounds = m as u64;
        let entry_precision = tau / 2f64.powf(k as f64 / 2.0 + 1.0);
        let entry_failure = delta / (2.0 * m_rounds as f64 * (1u64 << (2 * k)) as f64);
        let shots_per_entry = hadamard_shots(entry_precision, entry_failure)?;
        Ok(WarmupPlan {
            k,
            tau,
            delta,
            m_rounds,
            entry_precision,
            entry_failure,
            shots_per_entry,
        })
    }

    /// Controlled applications of `U` used by one estimate, `M·4^k·2·m_shot`.
    pub fn controlled_applications(&self) -> u128 {
        self.m_rounds as u128 * (1u128 << (2 * self.k)) * 2 * self.shots_per_entry as u128
    }
}

/// Estimate of `dist(U, J_T)` within `√τ` with probability at least `1 − δ`.
pub fn warmup_estimator<R: Rng + ?Sized>(
    u: &Unitary,
    t: Subset,
    tau: f64,
    delta: f64,
    rng: &mut R,
    ledger: &mut QueryLedger,
) -> Result<f64> {
    let plan = WarmupPlan::new(t.len(), tau, delta)?;
    warmup_estimator_with_plan(u, t, &plan, rng, ledger)
}

/// Warmup estimate with a precomputed plan.
///
/// The `M` complement assignments are tallied per distinct value, and the shots of all
/// rounds sharing an assignment are drawn as one binomial per quadrature. This has the
/// same law as running every Hadamard test separately.
pub fn warmup_estimator_with_plan<R: Rng + ?Sized>(
    u: &Unitary,
    t: Subset,
    plan: &WarmupPlan,
    rng: &mut R,
    ledger: &mut QueryLedger,
) -> Result<f64> {
    let n = u.num_qubits();
    if !t.is_subset_of(Subset::full(n)) || t.len() != plan.k {
        return Err(Error::Argument(format!(
            "subset {t} does not match a plan for |T| = {} on {n} qubits",
            plan.k
        )));
    }
    let charge = u64::try_from(plan.controlled_applications())
        .ok()
        .and_then(|c| ledger.controlled_u_applications.checked_add(c))
        .ok_or_else(|| Error::Capacity("controlled-U count overflows the ledger".into()))?;

    let k = plan.k;
    let rest = t.complement(n);
    let cells = 1usize << (n - k);
    let side = 1usize << k;

    // multinomial tally of M uniform draws over the 2^{n-k} complement assignments
    let mut tally = vec![0u64; cells];
    let mut remaining = plan.m_rounds;
    for (c, slot) in tally.iter_mut().enumerate() {
        if remaining == 0 {
            break;
        }
        *slot = if c + 1 == cells {
            remaining
        } else {
            let p = 1.0 / (cells - c) as f64;
            Binomial::new(remaining, p).expect("valid binomial").sample(rng)
        };
        remaining -= *slot;
    }

    let mut sums = vec![C64::new(0.0, 0.0); side * side];
    let m_shot = plan.shots_per_entry;
    for (l, &count) in tally.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let shots = count
            .checked_mul(m_shot)
            .ok_or_else(|| Error::Capacity("aggregated shot count overflows".into()))?;
        let base = rest.scatter(l, n);
        for i in 0..side {
            let row = base | t.scatter(i, n);
            for j in 0..side {
                let col = base | t.scatter(j, n);
                let (re, im) = hadamard_counts(u.amplitude(row, col), shots, rng);
                // Σ over the `count` rounds of (2r/m − 1) + i(2s/m − 1)
                let m = m_shot as f64;
                sums[i * side + j] += C64::new(
                    2.0 * re as f64 / m - count as f64,
                    2.0 * im as f64 / m - count as f64,
                );
            }
        }
    }
    ledger.controlled_u_applications = charge;

    let scale = cells as f64 / plan.m_rounds as f64;
    let estimate = ComplexMatrix::from_vec(side, side, sums.iter().map(|s| s * scale).collect())?;
    let ratio = nuclear_norm(&estimate)? / u.dim() as f64;
    Ok((1.0 - ratio).max(0.0).sqrt())
}

/// Parameters of the gapless tester.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaplessConfig {
    pub k: usize,
    pub epsilon1: f64,
    pub epsilon2: f64,
    /// `ε₂ − ε₁`.
    pub epsilon: f64,
    /// `ε²/16`.
    pub tau: f64,
    pub delta: f64,
    /// Abort before estimation if the projected controlled-U count exceeds this.
    pub budget_ceiling: Option<u128>,
}

impl GaplessConfig {
    pub fn new(k: usize, epsilon1: f64, epsilon2: f64) -> Result<Self> {
        TesterKind::Alg8.check_gap(epsilon1, epsilon2)?;
        if k == 0 || k > MAX_WARMUP_SUBSET {
            return Err(Error::Parameter(format!(
                "gapless tester needs 1 ≤ k ≤ {MAX_WARMUP_SUBSET}, got {k}"
            )));
        }
        let epsilon = epsilon2 - epsilon1;
        Ok(GaplessConfig {
            k,
            epsilon1,
            epsilon2,
            epsilon,
            tau: epsilon * epsilon / 16.0,
            delta: 0.01,
            budget_ceiling: None,
        })
    }

    pub fn with_budget(mut self, ceiling: Option<u128>) -> Self {
        self.budget_ceiling = ceiling;
        self
    }

    pub fn extractor(&self) -> Result<ExtractorConfig> {
        ExtractorConfig::new(self.k, self.tau)
    }

    pub fn threshold(&self) -> f64 {
        self.epsilon1 + self.epsilon / 2.0
    }

    /// Warmup plan when the candidate pool (after padding) has `pool` coordinates.
    pub fn warmup_plan(&self, pool: usize) -> Result<WarmupPlan> {
        let subsets = binomial(pool.max(self.k) as u64, self.k as u64);
        WarmupPlan::new(self.k, self.tau, self.delta / subsets as f64)
    }

    /// Controlled-U applications of the estimation phase for a pool of `pool` coordinates.
    pub fn projected_cost(&self, pool: usize) -> Result<u128> {
        let pool = pool.max(self.k);
        let subsets = binomial(pool as u64, self.k as u64);
        Ok(subsets * self.warmup_plan(pool)?.controlled_applications())
    }

    /// Cost bound before extraction, taking `|S| = min(n, ⌊2k²/τ²⌋)`.
    pub fn worst_case_cost(&self, n: usize) -> Result<u128> {
        let cap = self.extractor()?.max_set_size().floor();
        let pool = if cap < n as f64 { cap as usize } else { n };
        self.projected_cost(pool)
    }

    fn check_budget(&self, projected: u128) -> Result<()> {
        match self.budget_ceiling {
            Some(ceiling) if projected > ceiling => Err(Error::Budget { projected, ceiling }),
            _ => Ok(()),
        }
    }
}

/// Adds the smallest unused coordinates of `[n]` until `s` has `k` members.
fn pad_to(s: Subset, k: usize, n: usize) -> Subset {
    (0..n)
        .filter(|&q| !s.contains(q))
        .take(k.saturating_sub(s.len()))
        .fold(s, Subset::with)
}

/// Gapless tolerant tester for any `0 < ε₁ < ε₂ < 1`.
pub fn gapless_tolerant_junta_tester<R: Rng + ?Sized>(
    u: &Unitary,
    k: usize,
    epsilon1: f64,
    epsilon2: f64,
    rng: &mut R,
) -> Result<TesterVerdict> {
    let config = GaplessConfig::new(k, epsilon1, epsilon2)?;
    gapless_tolerant_junta_tester_with(u, &config, rng)
}

/// Gapless tester with an explicit configuration (budget ceiling included).
pub fn gapless_tolerant_junta_tester_with<R: Rng + ?Sized>(
    u: &Unitary,
    config: &GaplessConfig,
    rng: &mut R,
) -> Result<TesterVerdict> {
    let n = u.num_qubits();
    let k = config.k;
    check_k(k, n)?;
    let extractor = config.extractor()?;
    let t_rounds = extractor.t_rounds()?;
    let sampler = FourierSampler::from_unitary(u)?;

    let mut ledger = QueryLedger::new();
    let extracted = coordinate_extractor_with(&sampler, &extractor, rng, &mut ledger)?;
    let pool = pad_to(extracted, k, n);
    let candidates = candidate_subsets(pool, k)?;
    config.check_budget(config.projected_cost(pool.len())?)?;
    let plan = config.warmup_plan(pool.len())?;

    let mut estimates = Vec::with_capacity(candidates.len());
    for &t in &candidates {
        estimates.push((t, warmup_estimator_with_plan(u, t, &plan, rng, &mut ledger)?));
    }
    let (witness, stat) = lex_min(estimates).expect("candidate list is never empty");
    let threshold = config.threshold();
    Ok(TesterVerdict {
        verdict: if stat <= threshold { Verdict::Yes } else { Verdict::No },
        witness: Some(witness),
        statistic: stat,
        extracted,
        queries: ledger,
        params: TesterParams {
            kind: TesterKind::Alg8,
            k,
            epsilon1: config.epsilon1,
            epsilon2: config.epsilon2,
            delta: config.delta,
            tau: config.tau,
            t_rounds,
            m_rounds: plan.m_rounds,
            threshold,
            delta_prime: Some(plan.delta),
        },
    })
}
