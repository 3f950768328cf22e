//! Simulated quantum subroutines with per-call query accounting.
//!
//! * Fourier sampling draws `x ∈ Z_4^n` from the exact law `|Û(x)|²`.
//! * Influence sampling simulates the single-qubit circuit `(V^⊗n)† U V^⊗n |y⟩`
//!   with `V` uniform over `{I, H, R}` and returns `y ⊕ y'`.
//! * The Hadamard test estimates `⟨bra|U|ket⟩` from simulated measurement shots.

use num_complex::Complex64 as C64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::linalg::{gates, ComplexMatrix, Unitary};
use crate::pauli::{pauli_spectrum, PauliSpectrum, PauliString};
use crate::subset::Subset;

/// Counts of simulated oracle uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QueryLedger {
    pub fourier_sample_calls: u64,
    pub influence_sample_calls: u64,
    pub controlled_u_applications: u64,
}

impl QueryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Total uses of `U` across all subroutines.
    pub fn total_queries(&self) -> u64 {
        self.fourier_sample_calls + self.influence_sample_calls + self.controlled_u_applications
    }
}

/// Seeded pseudorandom stream; identical seeds give identical transcripts.
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Stream for trial `index` of an experiment seeded with `seed` (`seed ⊕ index`).
    pub fn for_trial(seed: u64, index: u64) -> Self {
        Self::new(seed ^ index)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Categorical sampler over the Pauli weights of a fixed spectrum.
#[derive(Clone, Debug)]
pub struct FourierSampler {
    n: usize,
    cumulative: Vec<f64>,
}

impl FourierSampler {
    pub fn new(spectrum: &PauliSpectrum) -> Self {
        let mut acc = 0.0;
        let cumulative = spectrum
            .coefficients()
            .iter()
            .map(|c| {
                acc += c.norm_sqr();
                acc
            })
            .collect();
        FourierSampler {
            n: spectrum.num_qubits(),
            cumulative,
        }
    }

    pub fn from_unitary(u: &Unitary) -> Result<Self> {
        Ok(Self::new(&pauli_spectrum(u)?))
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// One call of Fourier-Sample.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, ledger: &mut QueryLedger) -> PauliString {
        ledger.fourier_sample_calls += 1;
        let total = *self.cumulative.last().expect("non-empty spectrum");
        let u = rng.random::<f64>() * total;
        let mut idx = self.cumulative.partition_point(|&c| c <= u);
        if idx >= self.cumulative.len() {
            // u landed in floating-point slack at the top; take the last outcome with mass
            idx = self.cumulative.len() - 1;
            while idx > 0 && self.cumulative[idx] == self.cumulative[idx - 1] {
                idx -= 1;
            }
        }
        PauliString::from_index(self.n, idx).expect("index within spectrum")
    }
}

/// Single Fourier-Sample draw from `spectrum`.
pub fn fourier_sample<R: Rng + ?Sized>(
    spectrum: &PauliSpectrum,
    rng: &mut R,
    ledger: &mut QueryLedger,
) -> PauliString {
    FourierSampler::new(spectrum).sample(rng, ledger)
}

/// Single-qubit basis changes available to Influence-Sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GateSet {
    /// `{I, H, R}` with `R = (1/√2)[[1, -i], [-i, 1]]`.
    #[default]
    Full,
    /// `{I, H}` only.
    WithoutR,
}

impl GateSet {
    pub fn gates(self) -> Vec<ComplexMatrix> {
        match self {
            GateSet::Full => vec![gates::identity(), gates::hadamard(), gates::r_gate()],
            GateSet::WithoutR => vec![gates::identity(), gates::hadamard()],
        }
    }
}

/// Largest register for which the conjugated unitaries are cached.
const MAX_CACHED_QUBITS: usize = 10;
/// Largest register for which the exact output law is enumerated.
pub const MAX_EXACT_INFLUENCE_QUBITS: usize = 6;

/// Circuit-level Influence-Sample simulator for a fixed `U`.
///
/// For `n ≤ 10` the three matrices `(V^⊗n)† U V^⊗n` are built once and each draw reads
/// one column; larger registers evolve `|y⟩` through the circuit on every draw.
#[derive(Clone, Debug)]
pub struct InfluenceSampler {
    n: usize,
    gates: Vec<ComplexMatrix>,
    conjugated: Option<Vec<ComplexMatrix>>,
    unitary: Unitary,
}

impl InfluenceSampler {
    pub fn new(u: &Unitary) -> Result<Self> {
        Self::with_gate_set(u, GateSet::Full)
    }

    pub fn with_gate_set(u: &Unitary, gate_set: GateSet) -> Result<Self> {
        let n = u.num_qubits();
        let gates = gate_set.gates();
        let conjugated = if n <= MAX_CACHED_QUBITS {
            Some(gates.iter().map(|v| conjugate_by_product(u, v)).collect())
        } else {
            None
        };
        Ok(InfluenceSampler {
            n,
            gates,
            conjugated,
            unitary: u.clone(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// One call of Influence-Sample; returns the support of `x = y ⊕ y'`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, ledger: &mut QueryLedger) -> Subset {
        ledger.influence_sample_calls += 1;
        let dim = 1usize << self.n;
        let y = rng.random_range(0..dim);
        let v = rng.random_range(0..self.gates.len());
        let y_out = match &self.conjugated {
            Some(ws) => {
                let w = &ws[v];
                sample_index(rng, (0..dim).map(|r| w[(r, y)].norm_sqr()))
            }
            None => {
                let state = self.evolve(y, &self.gates[v]);
                sample_index(rng, state.iter().map(|a| a.norm_sqr()))
            }
        };
        Subset::from_basis_bits(y ^ y_out, self.n)
    }

    fn evolve(&self, y: usize, v: &ComplexMatrix) -> Vec<C64> {
        let n = self.n;
        // V^⊗n |y⟩ is a product state: amplitude at r is Π_q V[r_q][y_q]
        let dim = 1usize << n;
        let mut psi: Vec<C64> = (0..dim)
            .map(|r| {
                (0..n)
                    .map(|q| {
                        let p = n - 1 - q;
                        v[(r >> p & 1, y >> p & 1)]
                    })
                    .product()
            })
            .collect();
        psi = self
            .unitary
            .matrix()
            .mul_vec(&psi)
            .expect("state matches unitary");
        let vd = v.adjoint();
        for q in 0..n {
            apply_single_qubit(&mut psi, n, q, &vd);
        }
        psi
    }
}

/// Draws an index with probability proportional to `weights`.
fn sample_index<R: Rng + ?Sized>(rng: &mut R, weights: impl Iterator<Item = f64> + Clone) -> usize {
    let total: f64 = weights.clone().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, w) in weights.enumerate() {
        if w > 0.0 {
            last_positive = i;
        }
        acc += w;
        if u < acc {
            return i;
        }
    }
    last_positive
}

/// Applies the 2x2 gate `g` to qubit `q` of an `n`-qubit state vector.
fn apply_single_qubit(psi: &mut [C64], n: usize, q: usize, g: &ComplexMatrix) {
    let bit = 1usize << (n - 1 - q);
    for r in 0..psi.len() {
        if r & bit == 0 {
            let (a0, a1) = (psi[r], psi[r | bit]);
            psi[r] = g[(0, 0)] * a0 + g[(0, 1)] * a1;
            psi[r | bit] = g[(1, 0)] * a0 + g[(1, 1)] * a1;
        }
    }
}

/// `(V^⊗n)† U V^⊗n`, built qubit by qubit.
fn conjugate_by_product(u: &Unitary, v: &ComplexMatrix) -> ComplexMatrix {
    let n = u.num_qubits();
    let dim = u.dim();
    let mut m = u.matrix().clone();
    // right-multiply by V on each qubit: rows transform as row vectors
    for q in 0..n {
        let bit = 1usize << (n - 1 - q);
        for r in 0..dim {
            for c in 0..dim {
                if c & bit == 0 {
                    let (a0, a1) = (m[(r, c)], m[(r, c | bit)]);
                    m[(r, c)] = a0 * v[(0, 0)] + a1 * v[(1, 0)];
                    m[(r, c | bit)] = a0 * v[(0, 1)] + a1 * v[(1, 1)];
                }
            }
        }
    }
    let vd = v.adjoint();
    let mut col = vec![C64::new(0.0, 0.0); dim];
    for c in 0..dim {
        for r in 0..dim {
            col[r] = m[(r, c)];
        }
        for q in 0..n {
            apply_single_qubit(&mut col, n, q, &vd);
        }
        for r in 0..dim {
            m[(r, c)] = col[r];
        }
    }
    m
}

/// Single Influence-Sample draw (builds the simulator for one use).
pub fn influence_sample<R: Rng + ?Sized>(
    u: &Unitary,
    rng: &mut R,
    ledger: &mut QueryLedger,
) -> Result<Subset> {
    Ok(InfluenceSampler::new(u)?.sample(rng, ledger))
}

/// Exact output law of Influence-Sample, indexed by the subset bitmask of `x`,
/// obtained by enumerating every gate choice, input `y`, and outcome `y'`.
pub fn influence_sample_exact_distribution(u: &Unitary, gate_set: GateSet) -> Result<Vec<f64>> {
    let n = u.num_qubits();
    if n > MAX_EXACT_INFLUENCE_QUBITS {
        return Err(Error::Capacity(format!(
            "exact Influence-Sample law limited to {MAX_EXACT_INFLUENCE_QUBITS} qubits"
        )));
    }
    let dim = u.dim();
    let gates = gate_set.gates();
    let branch = 1.0 / (gates.len() * dim) as f64;
    let mut law = vec![0.0; dim];
    for v in &gates {
        let w = conjugate_by_product(u, v);
        for y in 0..dim {
            for y_out in 0..dim {
                let x = Subset::from_basis_bits(y ^ y_out, n);
                law[x.bits() as usize] += branch * w[(y_out, y)].norm_sqr();
            }
        }
    }
    Ok(law)
}

/// Shots per quadrature of one Hadamard-test estimate: `⌈2 ln(4/δ) / (τ/√2)²⌉`.
pub fn hadamard_shots(tau: f64, delta: f64) -> Result<u64> {
    if !(tau > 0.0 && tau < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter(format!(
            "Hadamard test needs τ, δ in (0, 1); got τ = {tau}, δ = {delta}"
        )));
    }
    let per_quadrature = tau / std::f64::consts::SQRT_2;
    let m = (2.0 * (4.0 / delta).ln() / (per_quadrature * per_quadrature)).ceil();
    if m > u64::MAX as f64 / 4.0 {
        return Err(Error::Capacity(format!("{m} Hadamard-test shots")));
    }
    Ok(m as u64)
}

/// Simulates `shots` measurements of each Hadamard-test quadrature for an amplitude `a`,
/// returning the counts of outcome 0 for the real and imaginary circuits.
pub(crate) fn hadamard_counts<R: Rng + ?Sized>(a: C64, shots: u64, rng: &mut R) -> (u64, u64) {
    let draw = |p: f64, rng: &mut R| {
        let p = p.clamp(0.0, 1.0);
        Binomial::new(shots, p).expect("valid binomial").sample(rng)
    };
    let re = draw((1.0 + a.re) / 2.0, rng);
    let im = draw((1.0 + a.im) / 2.0, rng);
    (re, im)
}

/// Estimate of `⟨bra|U|ket⟩` within `τ` with probability at least `1 − δ`.
///
/// The true amplitude is read from `U`; each quadrature is estimated from `m` simulated
/// shots with outcome-0 probability `(1 + Re a)/2` (resp. `(1 + Im a)/2`), and the
/// ledger is charged `2m` controlled applications.
pub fn hadamard_test_estimate<R: Rng + ?Sized>(
    u: &Unitary,
    bra: usize,
    ket: usize,
    tau: f64,
    delta: f64,
    rng: &mut R,
    ledger: &mut QueryLedger,
) -> Result<C64> {
    if bra >= u.dim() || ket >= u.dim() {
        return Err(Error::Argument(format!(
            "basis index outside [0, {})",
            u.dim()
        )));
    }
    let shots = hadamard_shots(tau, delta)?;
    let (re, im) = hadamard_counts(u.amplitude(bra, ket), shots, rng);
    ledger.controlled_u_applications += 2 * shots;
    let m = shots as f64;
    Ok(C64::new(2.0 * re as f64 / m - 1.0, 2.0 * im as f64 / m - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_random_unitary, tensor_product};
    use crate::pauli::pauli_spectrum;
    use approx::assert_abs_diff_eq;

    fn unitary(m: ComplexMatrix) -> Unitary {
        Unitary::new(m).unwrap()
    }

    #[test]
    fn fourier_sample_of_identity_is_point_mass() {
        let s = pauli_spectrum(&Unitary::identity(3).unwrap()).unwrap();
        let sampler = FourierSampler::new(&s);
        let mut rng = RandomSource::new(1);
        let mut ledger = QueryLedger::new();
        for _ in 0..1000 {
            assert_eq!(sampler.sample(&mut rng, &mut ledger).index(), 0);
        }
        assert_eq!(ledger.fourier_sample_calls, 1000);
        assert_eq!(ledger.total_queries(), 1000);
    }

    #[test]
    fn fourier_sample_of_hadamard() {
        let s = pauli_spectrum(&unitary(gates::hadamard())).unwrap();
        let sampler = FourierSampler::new(&s);
        let mut rng = RandomSource::new(2);
        let mut ledger = QueryLedger::new();
        let draws = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..draws {
            counts[sampler.sample(&mut rng, &mut ledger).index()] += 1;
        }
        assert_eq!(counts[0] + counts[2], 0);
        let fx = counts[1] as f64 / draws as f64;
        assert!((fx - 0.5).abs() <= 0.01, "X frequency {fx}");
    }

    #[test]
    fn fourier_sample_single_call_helper() {
        let s = pauli_spectrum(&unitary(gates::pauli_y())).unwrap();
        let mut ledger = QueryLedger::new();
        let x = fourier_sample(&s, &mut RandomSource::new(0), &mut ledger);
        assert_eq!(x.to_string(), "Y");
        assert_eq!(ledger.fourier_sample_calls, 1);
    }

    #[test]
    fn influence_sample_identity_and_paulis() {
        let id = Unitary::identity(3).unwrap();
        let mut ledger = QueryLedger::new();
        let mut rng = RandomSource::new(3);
        let sampler = InfluenceSampler::new(&id).unwrap();
        for _ in 0..200 {
            assert!(sampler.sample(&mut rng, &mut ledger).is_empty());
        }
        assert_eq!(ledger.influence_sample_calls, 200);

        for g in [gates::pauli_z(), gates::pauli_x()] {
            let law = influence_sample_exact_distribution(&unitary(g), GateSet::Full).unwrap();
            assert_abs_diff_eq!(law[0], 1.0 / 3.0, epsilon = 1e-12);
            assert_abs_diff_eq!(law[1], 2.0 / 3.0, epsilon = 1e-12);
        }
        let law = influence_sample_exact_distribution(&unitary(gates::pauli_z()), GateSet::WithoutR)
            .unwrap();
        assert_abs_diff_eq!(law[1], 0.5, epsilon = 1e-12);
        let law = influence_sample_exact_distribution(&id, GateSet::Full).unwrap();
        assert_abs_diff_eq!(law[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn influence_sample_empirical_law_converges() {
        let mut rng = RandomSource::new(4);
        let u = haar_random_unitary(8, &mut rng).unwrap();
        let exact = influence_sample_exact_distribution(&u, GateSet::Full).unwrap();
        assert_abs_diff_eq!(exact.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
        let sampler = InfluenceSampler::new(&u).unwrap();
        let mut ledger = QueryLedger::new();
        let draws = 100_000;
        let mut counts = vec![0usize; 8];
        for _ in 0..draws {
            counts[sampler.sample(&mut rng, &mut ledger).bits() as usize] += 1;
        }
        let tv: f64 = counts
            .iter()
            .zip(&exact)
            .map(|(&c, &p)| (c as f64 / draws as f64 - p).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv <= 0.02, "TV distance {tv}");
    }

    #[test]
    fn uncached_path_matches_cached_law() {
        // force the per-draw circuit evolution and compare with the exact law
        let mut rng = RandomSource::new(5);
        let u = haar_random_unitary(4, &mut rng).unwrap();
        let mut sampler = InfluenceSampler::new(&u).unwrap();
        sampler.conjugated = None;
        let exact = influence_sample_exact_distribution(&u, GateSet::Full).unwrap();
        let mut ledger = QueryLedger::new();
        let draws = 60_000;
        let mut counts = vec![0usize; 4];
        for _ in 0..draws {
            counts[sampler.sample(&mut rng, &mut ledger).bits() as usize] += 1;
        }
        for (c, p) in counts.iter().zip(&exact) {
            assert!((*c as f64 / draws as f64 - p).abs() < 0.01);
        }
    }

    #[test]
    fn conjugation_matches_dense_product() {
        let mut rng = RandomSource::new(6);
        let u = haar_random_unitary(8, &mut rng).unwrap();
        for v in GateSet::Full.gates() {
            let mut a = ComplexMatrix::identity(1);
            for _ in 0..3 {
                a = tensor_product(&a, &v).unwrap();
            }
            let dense = a.adjoint().matmul(u.matrix()).unwrap().matmul(&a).unwrap();
            let fast = conjugate_by_product(&u, &v);
            assert!(dense.sub(&fast).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn hadamard_shot_count_formula() {
        // ⌈2 ln(400) / 0.005⌉ = ⌈2396.58…⌉
        assert_eq!(hadamard_shots(0.1, 0.01).unwrap(), 2397);
        assert!(hadamard_shots(0.0, 0.1).is_err());
        assert!(hadamard_shots(0.1, 1.0).is_err());
    }

    #[test]
    fn hadamard_test_estimates() {
        let id = Unitary::identity(2).unwrap();
        let mut rng = RandomSource::new(7);
        let mut ledger = QueryLedger::new();
        let (tau, delta) = (0.05, 0.01);
        let runs = 1000;
        let good = (0..runs)
            .filter(|_| {
                let est = hadamard_test_estimate(&id, 1, 1, tau, delta, &mut rng, &mut ledger)
                    .unwrap();
                (est - C64::new(1.0, 0.0)).norm() <= tau
            })
            .count();
        assert!(good as f64 >= 0.99 * runs as f64, "{good}/{runs}");
        let m = hadamard_shots(tau, delta).unwrap();
        assert_eq!(ledger.controlled_u_applications, 2 * m * runs as u64);

        let est = hadamard_test_estimate(&id, 0, 3, tau, delta, &mut rng, &mut ledger).unwrap();
        assert!(est.norm() <= tau);
        assert!(hadamard_test_estimate(&id, 0, 4, tau, delta, &mut rng, &mut ledger).is_err());
    }

    #[test]
    fn random_source_is_reproducible() {
        let a: Vec<u64> = {
            let mut r = RandomSource::new(99);
            (0..5).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = RandomSource::new(99);
            (0..5).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
        assert_eq!(RandomSource::for_trial(8, 3).seed(), 11);
    }
}
