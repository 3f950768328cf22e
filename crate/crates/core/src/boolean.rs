//! Fourier analysis of Boolean functions `f : {±1}^n → {±1}`.
//!
//! A truth table is indexed by the input bit pattern with variable 0 as the most
//! significant bit; bit value 0 stands for input `+1` and bit value 1 for `-1`.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{Unitary, MAX_QUBITS};
use crate::pauli::{candidate_subsets, fwht, TIE_TOL};
use crate::subset::Subset;

pub const MAX_VARIABLES: usize = 14;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BooleanFunction {
    n: usize,
    table: Vec<i8>,
}

impl BooleanFunction {
    pub fn new(n: usize, table: Vec<i8>) -> Result<Self> {
        if n == 0 || n > MAX_VARIABLES {
            return Err(Error::Capacity(format!(
                "{n} variables outside [1, {MAX_VARIABLES}]"
            )));
        }
        if table.len() != 1 << n {
            return Err(Error::Dimension(format!(
                "truth table of length {} for {n} variables",
                table.len()
            )));
        }
        if let Some(v) = table.iter().find(|&&v| v != 1 && v != -1) {
            return Err(Error::Argument(format!("truth-table value {v} is not ±1")));
        }
        Ok(BooleanFunction { n, table })
    }

    /// Builds `f` from a predicate on the input bit pattern (`true` ↦ `-1`).
    pub fn from_bits_fn(n: usize, f: impl Fn(usize) -> bool) -> Result<Self> {
        if n == 0 || n > MAX_VARIABLES {
            return Err(Error::Capacity(format!("{n} variables")));
        }
        let table = (0..1usize << n).map(|x| if f(x) { -1 } else { 1 }).collect();
        Self::new(n, table)
    }

    pub fn constant(n: usize, value: i8) -> Result<Self> {
        Self::from_bits_fn(n, |_| value == -1).and_then(|f| {
            if value == 1 || value == -1 {
                Ok(f)
            } else {
                Err(Error::Argument(format!("truth-table value {value} is not ±1")))
            }
        })
    }

    /// `f(x) = x_i`.
    pub fn dictator(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::Argument(format!("variable {i} outside [0, {n})")));
        }
        Self::from_bits_fn(n, |x| x >> (n - 1 - i) & 1 == 1)
    }

    /// `χ_S(x) = Π_{i ∈ S} x_i`.
    pub fn parity(n: usize, s: Subset) -> Result<Self> {
        let mask = s.basis_mask(n);
        Self::from_bits_fn(n, |x| (x & mask).count_ones() % 2 == 1)
    }

    /// Majority of all `n` inputs (`n` odd).
    pub fn majority(n: usize) -> Result<Self> {
        if n % 2 == 0 {
            return Err(Error::Argument("majority needs an odd number of inputs".into()));
        }
        Self::from_bits_fn(n, |x| x.count_ones() as usize > n / 2)
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &[i8] {
        &self.table
    }

    pub fn value(&self, x: usize) -> i8 {
        self.table[x]
    }

    pub fn negate(&self) -> Self {
        BooleanFunction {
            n: self.n,
            table: self.table.iter().map(|v| -v).collect(),
        }
    }

    /// Flips the outputs at the given inputs.
    pub fn with_flipped(&self, inputs: &[usize]) -> Self {
        let mut table = self.table.clone();
        for &x in inputs {
            table[x] = -table[x];
        }
        BooleanFunction { n: self.n, table }
    }

    /// Pr_x[f(x) ≠ f(x ⊕ e_i)], computed by direct enumeration.
    pub fn flip_influence(&self, i: usize) -> Result<f64> {
        self.check_var(i)?;
        let bit = 1usize << (self.n - 1 - i);
        let differ = (0..self.table.len())
            .filter(|&x| self.table[x] != self.table[x ^ bit])
            .count();
        Ok(differ as f64 / self.table.len() as f64)
    }

    /// `2 Pr_{x,y}[f(x) ≠ f(x^{T̄} y^{T})]`, by enumeration over `x` and the `T`-part of `y`.
    pub fn resample_influence(&self, t: Subset) -> Result<f64> {
        self.check_subset(t)?;
        let mask = t.basis_mask(self.n);
        let mut differ = 0usize;
        for x in 0..self.table.len() {
            for sub in submasks(mask) {
                let y = (x & !mask) | sub;
                if self.table[x] != self.table[y] {
                    differ += 1;
                }
            }
        }
        let total = self.table.len() * (1usize << t.len());
        Ok(2.0 * differ as f64 / total as f64)
    }

    fn check_var(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::Argument(format!("variable {i} outside [0, {})", self.n)));
        }
        Ok(())
    }

    fn check_subset(&self, t: Subset) -> Result<()> {
        if t.max_index().is_some_and(|q| q >= self.n) {
            return Err(Error::Argument(format!("subset {t} outside [0, {})", self.n)));
        }
        Ok(())
    }

    /// One line of the truth-table file format (`+` for `+1`, `-` for `-1`).
    pub fn to_line(&self) -> String {
        self.table
            .iter()
            .map(|&v| if v == 1 { '+' } else { '-' })
            .collect()
    }

    /// Parses a truth-table line of `2^n` characters from `{+, -}` or `{0, 1}` (`0 ↦ +1`).
    pub fn parse_line(line: &str) -> Result<Self> {
        let table: Result<Vec<i8>> = line
            .trim()
            .chars()
            .map(|c| match c {
                '+' | '0' => Ok(1),
                '-' | '−' | '1' => Ok(-1),
                _ => Err(Error::Parse(format!("unexpected truth-table character {c:?}"))),
            })
            .collect();
        let table = table?;
        let len = table.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Parse(format!(
                "truth-table length {len} is not a power of two >= 2"
            )));
        }
        Self::new(len.trailing_zeros() as usize, table)
    }
}

impl fmt::Debug for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BooleanFunction(n={}, {})", self.n, self.to_line())
    }
}

/// Parses a truth-table file: one function per non-empty line; `#` starts a comment line.
pub fn parse_truth_tables(text: &str) -> Result<Vec<BooleanFunction>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(BooleanFunction::parse_line)
        .collect()
}

fn submasks(mask: usize) -> impl Iterator<Item = usize> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}

/// `f̂(S)` for every `S ⊆ [n]`, indexed by subset bitmask.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSpectrum {
    n: usize,
    coefficients: Vec<f64>,
}

impl FourierSpectrum {
    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficient(&self, s: Subset) -> f64 {
        self.coefficients[s.bits() as usize]
    }

    pub fn total_weight(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum()
    }

    fn weight_where(&self, pred: impl Fn(Subset) -> bool) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(s, _)| pred(Subset::from_bits(*s as u32)))
            .map(|(_, c)| c * c)
            .sum()
    }

    /// `Inf_i(f) = Σ_{S ∋ i} f̂(S)²`.
    pub fn influence_var(&self, i: usize) -> Result<f64> {
        if i >= self.n {
            return Err(Error::Argument(format!("variable {i} outside [0, {})", self.n)));
        }
        Ok(self.weight_where(|s| s.contains(i)))
    }

    /// `Inf_i^{≤k}(f) = Σ_{S ∋ i, |S| ≤ k} f̂(S)²`.
    pub fn degree_k_influence(&self, i: usize, k: usize) -> Result<f64> {
        if i >= self.n {
            return Err(Error::Argument(format!("variable {i} outside [0, {})", self.n)));
        }
        if k == 0 || k > self.n {
            return Err(Error::Argument(format!("degree bound {k} outside [1, {}]", self.n)));
        }
        Ok(self.weight_where(|s| s.contains(i) && s.len() <= k))
    }

    /// `Inf_T(f) = Σ_{S ∩ T ≠ ∅} f̂(S)²`.
    pub fn influence_set(&self, t: Subset) -> f64 {
        self.weight_where(|s| s.intersects(t))
    }
}

/// Exact spectrum by fast Walsh–Hadamard transform with `1/2^n` normalisation.
pub fn fourier_transform(f: &BooleanFunction) -> FourierSpectrum {
    let n = f.num_vars();
    let mut w: Vec<i64> = f.table().iter().map(|&v| v as i64).collect();
    fwht(&mut w);
    let norm = 1.0 / (1u64 << n) as f64;
    let mut coefficients = vec![0.0; w.len()];
    for (b, &v) in w.iter().enumerate() {
        coefficients[Subset::from_basis_bits(b, n).bits() as usize] = v as f64 * norm;
    }
    FourierSpectrum { n, coefficients }
}

pub fn influence_var(f: &BooleanFunction, i: usize) -> Result<f64> {
    fourier_transform(f).influence_var(i)
}

pub fn degree_k_influence(f: &BooleanFunction, i: usize, k: usize) -> Result<f64> {
    fourier_transform(f).degree_k_influence(i, k)
}

pub fn influence_set(f: &BooleanFunction, t: Subset) -> f64 {
    fourier_transform(f).influence_set(t)
}

fn check_same_arity(f: &BooleanFunction, g: &BooleanFunction) -> Result<()> {
    if f.num_vars() != g.num_vars() {
        return Err(Error::Dimension(format!(
            "{}-variable vs {}-variable function",
            f.num_vars(),
            g.num_vars()
        )));
    }
    Ok(())
}

/// `Pr_x[f(x) ≠ g(x)]`.
pub fn dist_boolean(f: &BooleanFunction, g: &BooleanFunction) -> Result<f64> {
    check_same_arity(f, g)?;
    let differ = f.table.iter().zip(&g.table).filter(|(a, b)| a != b).count();
    Ok(differ as f64 / f.table.len() as f64)
}

/// `E_x[f(x) g(x)]`.
pub fn corr_boolean(f: &BooleanFunction, g: &BooleanFunction) -> Result<f64> {
    check_same_arity(f, g)?;
    let sum: i64 = f
        .table
        .iter()
        .zip(&g.table)
        .map(|(&a, &b)| (a * b) as i64)
        .sum();
    Ok(sum as f64 / f.table.len() as f64)
}

/// Exact `dist(f, J_T)` and a minimiser: on each assignment `z` to `T` the minimiser
/// takes the plurality value of `f(z, ·)` (ties go to `+1`).
pub fn dist_to_junta_on_bool(f: &BooleanFunction, t: Subset) -> Result<(f64, BooleanFunction)> {
    let (dist, plurality) = plurality_on(f, t)?;
    let n = f.num_vars();
    let table = (0..f.table.len())
        .map(|x| plurality[t.gather(x, n)])
        .collect();
    Ok((dist, BooleanFunction { n, table }))
}

/// Distance to `J_T` plus the plurality table over assignments to `T`.
fn plurality_on(f: &BooleanFunction, t: Subset) -> Result<(f64, Vec<i8>)> {
    f.check_subset(t)?;
    let n = f.num_vars();
    let mut sums = vec![0i64; 1 << t.len()];
    for (x, &v) in f.table.iter().enumerate() {
        sums[t.gather(x, n)] += v as i64;
    }
    let block = (f.table.len() >> t.len()) as i64;
    let mismatches: i64 = sums.iter().map(|s| (block - s.abs()) / 2).sum();
    let plurality = sums.iter().map(|&s| if s >= 0 { 1 } else { -1 }).collect();
    Ok((mismatches as f64 / f.table.len() as f64, plurality))
}

/// Exact `dist(f, J_{S,k})` with its lexicographically smallest minimiser `T`.
/// `candidates = None` means `S = [n]`; if `|S| < k` the single set `T = S` is used.
pub fn dist_to_k_junta_bool(
    f: &BooleanFunction,
    k: usize,
    candidates: Option<Subset>,
) -> Result<(f64, Subset)> {
    let n = f.num_vars();
    let pool = candidates.unwrap_or_else(|| Subset::full(n));
    f.check_subset(pool)?;
    if k > n {
        return Err(Error::Argument(format!("k = {k} exceeds n = {n}")));
    }
    let mut best: Option<(f64, Subset)> = None;
    for t in candidate_subsets(pool, k)? {
        let (d, _) = plurality_on(f, t)?;
        if best.is_none_or(|(b, _)| d < b - TIE_TOL) {
            best = Some((d, t));
        }
    }
    Ok(best.expect("at least one candidate subset"))
}

/// Diagonal unitary `U_f = diag(f(x))`.
pub fn embed_unitary(f: &BooleanFunction) -> Result<Unitary> {
    if f.num_vars() > MAX_QUBITS {
        return Err(Error::Capacity(format!(
            "embedding limited to {MAX_QUBITS} variables"
        )));
    }
    Unitary::from_diagonal_signs(f.table())
}
