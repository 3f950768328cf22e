//! Pauli-basis (Fourier) analysis of unitaries: spectra, influences, and exact
//! distances to junta classes.
//!
//! A Pauli string `x ∈ {0,1,2,3}^n` (`I, X, Y, Z`) is indexed densely by its base-4
//! encoding with qubit 0 as the most significant digit.

use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{gates, nuclear_norm, partial_trace, tensor_product, ComplexMatrix, Unitary};
use crate::subset::{binomial, combinations, Subset};

/// Largest register for which a dense `4^n` spectrum is built.
pub const MAX_SPECTRUM_QUBITS: usize = 8;
/// Largest junta support for which a partial trace is reduced by SVD.
pub const MAX_JUNTA_SUPPORT: usize = 6;
/// Largest number of candidate subsets enumerated by the exact minimisers.
pub const MAX_ENUMERATED_SUBSETS: u128 = 1 << 16;
/// Two distances closer than this are treated as tied.
pub(crate) const TIE_TOL: f64 = 1e-12;

/// An element of `Z_4^n`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    index: usize,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { n, index: 0 }
    }

    pub fn from_index(n: usize, index: usize) -> Result<Self> {
        if n > 16 || index >= 1usize << (2 * n) {
            return Err(Error::Argument(format!("index {index} is not a {n}-qubit Pauli")));
        }
        Ok(PauliString { n, index })
    }

    pub fn from_word(word: &[u8]) -> Result<Self> {
        if word.len() > 16 {
            return Err(Error::Capacity(format!("{}-qubit Pauli string", word.len())));
        }
        let mut index = 0usize;
        for &s in word {
            if s > 3 {
                return Err(Error::Argument(format!("Pauli symbol {s} outside 0..4")));
            }
            index = index << 2 | s as usize;
        }
        Ok(PauliString { n: word.len(), index })
    }

    /// Parses a label such as `"IXZY"`.
    pub fn parse(label: &str) -> Result<Self> {
        let word: Result<Vec<u8>> = label
            .chars()
            .map(|c| match c {
                'I' => Ok(0),
                'X' => Ok(1),
                'Y' => Ok(2),
                'Z' => Ok(3),
                _ => Err(Error::Parse(format!("bad Pauli symbol {c:?}"))),
            })
            .collect();
        Self::from_word(&word?)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn symbol(&self, q: usize) -> u8 {
        (self.index >> (2 * (self.n - 1 - q)) & 3) as u8
    }

    pub fn word(&self) -> Vec<u8> {
        (0..self.n).map(|q| self.symbol(q)).collect()
    }

    /// `supp(x) = {q : x_q ≠ 0}`.
    pub fn support(&self) -> Subset {
        support_of_index(self.index, self.n)
    }

    /// `|x| = |supp(x)|`.
    pub fn weight(&self) -> usize {
        self.support().len()
    }

    /// Dense `σ_x = σ_{x_0} ⊗ ... ⊗ σ_{x_{n-1}}`.
    pub fn matrix(&self) -> Result<ComplexMatrix> {
        let mut m = ComplexMatrix::identity(1);
        for q in 0..self.n {
            m = tensor_product(&m, &gates::pauli(self.symbol(q)))?;
        }
        Ok(m)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n {
            let c = ['I', 'X', 'Y', 'Z'][self.symbol(q) as usize];
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

/// Support of the Pauli string with dense index `index`.
#[inline]
pub fn support_of_index(index: usize, n: usize) -> Subset {
    let mut bits = 0u32;
    for q in 0..n {
        if index >> (2 * (n - 1 - q)) & 3 != 0 {
            bits |= 1 << q;
        }
    }
    Subset::from_bits(bits)
}

/// Coefficients `Û(x) = Tr(σ_x† U) / N` for every `x ∈ Z_4^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSpectrum {
    n: usize,
    coefficients: Vec<C64>,
}

impl PauliSpectrum {
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn coefficient(&self, x: &PauliString) -> C64 {
        debug_assert_eq!(x.num_qubits(), self.n);
        self.coefficients[x.index()]
    }

    /// `|Û(x)|²` for every `x`.
    pub fn weights(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.norm_sqr()).collect()
    }

    /// `Σ_x |Û(x)|²`, equal to 1 for a unitary.
    pub fn total_weight(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }

    fn weight_where(&self, pred: impl Fn(Subset) -> bool) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(idx, _)| pred(support_of_index(*idx, self.n)))
            .map(|(_, c)| c.norm_sqr())
            .sum()
    }

    fn check_qubit(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::Argument(format!("qubit {i} outside [0, {})", self.n)));
        }
        Ok(())
    }

    /// `Inf_i[U] = Σ_{x_i ≠ 0} |Û(x)|²`.
    pub fn influence_qubit(&self, i: usize) -> Result<f64> {
        self.check_qubit(i)?;
        Ok(self.weight_where(|s| s.contains(i)))
    }

    /// `Inf_i^{≤k}[U] = Σ_{|x| ≤ k, x_i ≠ 0} |Û(x)|²`.
    pub fn degree_k_influence(&self, i: usize, k: usize) -> Result<f64> {
        self.check_qubit(i)?;
        if k == 0 || k > self.n {
            return Err(Error::Argument(format!("degree bound {k} outside [1, {}]", self.n)));
        }
        Ok(self.weight_where(|s| s.contains(i) && s.len() <= k))
    }

    /// `Inf_T[U] = Σ_{supp(x) ∩ T ≠ ∅} |Û(x)|²`.
    pub fn influence_set(&self, t: Subset) -> f64 {
        self.weight_where(|s| s.intersects(t))
    }

    /// `Inf_T[U]` for every `T ⊆ [n]`, indexed by subset bitmask.
    pub fn influence_all_sets(&self) -> Vec<f64> {
        // weight per support mask, then Inf_T = 1·total − weight on supports disjoint from T
        let full = 1usize << self.n;
        let mut by_support = vec![0.0; full];
        for (idx, c) in self.coefficients.iter().enumerate() {
            by_support[support_of_index(idx, self.n).bits() as usize] += c.norm_sqr();
        }
        let total: f64 = by_support.iter().sum();
        (0..full)
            .map(|t| {
                let disjoint: f64 = by_support
                    .iter()
                    .enumerate()
                    .filter(|(s, _)| s & t == 0)
                    .map(|(_, w)| w)
                    .sum();
                total - disjoint
            })
            .collect()
    }
}

/// Walsh–Hadamard transform in place: `v[b] ← Σ_c (-1)^{b·c} v[c]`.
pub(crate) fn fwht<T>(v: &mut [T])
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T>,
{
    let len = v.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(2 * h) {
            for j in block..block + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Full Pauli spectrum of an `n ≤ 8` qubit unitary in `O(4^n · n)` time.
///
/// `σ_x` is a signed permutation: with X-mask `a` and Z-mask `b` over basis bits,
/// `σ_x[c ⊕ a][c] = i^{|a∧b|} (-1)^{b·c}`, so each fixed `a` reduces to one
/// Walsh–Hadamard transform of the diagonal `c ↦ U[c ⊕ a][c]`.
pub fn pauli_spectrum(u: &Unitary) -> Result<PauliSpectrum> {
    pauli_spectrum_matrix(u.matrix(), u.num_qubits())
}

/// [`pauli_spectrum`] for an arbitrary `2^n x 2^n` operator.
pub fn pauli_spectrum_matrix(m: &ComplexMatrix, n: usize) -> Result<PauliSpectrum> {
    if n > MAX_SPECTRUM_QUBITS {
        return Err(Error::Capacity(format!(
            "dense Pauli spectrum limited to {MAX_SPECTRUM_QUBITS} qubits, got {n}"
        )));
    }
    let dim = 1usize << n;
    if m.rows() != dim || m.cols() != dim {
        return Err(Error::Dimension(format!("matrix is not a {n}-qubit operator")));
    }
    let norm = 1.0 / dim as f64;
    let mut coefficients = vec![C64::new(0.0, 0.0); dim * dim];
    let mut buf = vec![C64::new(0.0, 0.0); dim];
    for a in 0..dim {
        for (c, slot) in buf.iter_mut().enumerate() {
            *slot = m[(c ^ a, c)];
        }
        fwht(&mut buf);
        for (b, &w) in buf.iter().enumerate() {
            let phase = match (a & b).count_ones() % 4 {
                0 => C64::new(1.0, 0.0),
                1 => C64::new(0.0, -1.0),
                2 => C64::new(-1.0, 0.0),
                _ => C64::new(0.0, 1.0),
            };
            coefficients[interleave(a, b, n)] = phase * w * norm;
        }
    }
    Ok(PauliSpectrum { n, coefficients })
}

/// Dense index of the Pauli string with X-mask `a` and Z-mask `b` (basis-bit order).
fn interleave(a: usize, b: usize, n: usize) -> usize {
    let mut idx = 0usize;
    for p in 0..n {
        let digit = match (a >> p & 1, b >> p & 1) {
            (0, 0) => 0,
            (1, 0) => 1,
            (1, 1) => 2,
            _ => 3,
        };
        idx |= digit << (2 * p);
    }
    idx
}

/// Choi–Jamiołkowski state `(1/√N) Σ_{ij} U[i,j] |i⟩|j⟩`, as a `N²` vector indexed `i·N + j`.
pub fn choi_state(u: &Unitary) -> Vec<C64> {
    let s = 1.0 / (u.dim() as f64).sqrt();
    u.matrix().as_slice().iter().map(|z| z * s).collect()
}

pub fn influence_qubit(u: &Unitary, i: usize) -> Result<f64> {
    pauli_spectrum(u)?.influence_qubit(i)
}

pub fn degree_k_influence(u: &Unitary, i: usize, k: usize) -> Result<f64> {
    pauli_spectrum(u)?.degree_k_influence(i, k)
}

pub fn influence_set(u: &Unitary, t: Subset) -> Result<f64> {
    Ok(pauli_spectrum(u)?.influence_set(t))
}

/// `dist(U, V) = sqrt(1 − |Tr(U†V)| / N)`, the phase-minimised normalised Frobenius distance.
pub fn dist_unitary(u: &Unitary, v: &Unitary) -> Result<f64> {
    if u.num_qubits() != v.num_qubits() {
        return Err(Error::Dimension(format!(
            "{}-qubit vs {}-qubit unitary",
            u.num_qubits(),
            v.num_qubits()
        )));
    }
    let overlap: C64 = u
        .matrix()
        .as_slice()
        .iter()
        .zip(v.matrix().as_slice())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok((1.0 - overlap.norm() / u.dim() as f64).max(0.0).sqrt())
}

/// `dist(U, J_T) = sqrt(1 − ‖Tr_{T̄} U‖_* / N)`.
pub fn dist_to_junta_on(u: &Unitary, t: Subset) -> Result<f64> {
    if t.len() > MAX_JUNTA_SUPPORT {
        return Err(Error::Capacity(format!(
            "junta support of {} qubits exceeds {MAX_JUNTA_SUPPORT}",
            t.len()
        )));
    }
    let reduced = partial_trace(u, t)?;
    let nuc = nuclear_norm(&reduced)?;
    Ok((1.0 - nuc / u.dim() as f64).max(0.0).sqrt())
}

/// Exact `dist(U, J_{S,k}) = min_{T ⊆ S, |T| = k} dist(U, J_T)` with its lexicographically
/// smallest minimiser. `candidates = None` means `S = [n]`; when `|S| < k` the single
/// set `T = S` is used.
pub fn dist_to_k_junta(u: &Unitary, k: usize, candidates: Option<Subset>) -> Result<(f64, Subset)> {
    let n = u.num_qubits();
    let pool = candidates.unwrap_or_else(|| Subset::full(n));
    if pool.max_index().is_some_and(|q| q >= n) {
        return Err(Error::Argument(format!("candidate set {pool} outside [0, {n})")));
    }
    if k > n {
        return Err(Error::Argument(format!("k = {k} exceeds n = {n}")));
    }
    let subsets = candidate_subsets(pool, k)?;
    if subsets.iter().any(|t| t.len() > MAX_JUNTA_SUPPORT) {
        return Err(Error::Capacity(format!(
            "junta support above {MAX_JUNTA_SUPPORT} qubits"
        )));
    }
    let mut best: Option<(f64, Subset)> = None;
    for t in subsets {
        let d = dist_to_junta_on(u, t)?;
        if best.is_none_or(|(b, _)| d < b - TIE_TOL) {
            best = Some((d, t));
        }
    }
    Ok(best.expect("at least one candidate subset"))
}

/// The subsets scanned for `J_{S,k}`: all `k`-subsets of `pool` in lexicographic order,
/// or `[pool]` itself when it has fewer than `k` members.
pub(crate) fn candidate_subsets(pool: Subset, k: usize) -> Result<Vec<Subset>> {
    if pool.len() < k {
        return Ok(vec![pool]);
    }
    let count = binomial(pool.len() as u64, k as u64);
    if count > MAX_ENUMERATED_SUBSETS {
        return Err(Error::Capacity(format!(
            "{count} candidate subsets exceeds {MAX_ENUMERATED_SUBSETS}"
        )));
    }
    Ok(combinations(pool, k))
}
