//! Subsets of qubit / variable indices.
//!
//! Indices are 0-based. Qubit (or variable) 0 is the most significant bit of a
//! basis index, so for `n` qubits qubit `q` lives at bit `n - 1 - q`.

use std::cmp::Ordering;
use std::fmt;

/// Maximum number of coordinates a [`Subset`] can address.
pub const MAX_COORDS: usize = 32;

/// A set of coordinate indices stored as a bitmask (bit `q` set iff `q` is a member).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Subset(u32);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn from_bits(bits: u32) -> Self {
        Subset(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// `{0, 1, ..., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_COORDS);
        if n == MAX_COORDS {
            Subset(u32::MAX)
        } else {
            Subset((1u32 << n) - 1)
        }
    }

    pub fn singleton(q: usize) -> Self {
        assert!(q < MAX_COORDS);
        Subset(1 << q)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        indices.into_iter().fold(Subset::EMPTY, |s, q| s.with(q))
    }

    pub fn with(self, q: usize) -> Self {
        assert!(q < MAX_COORDS);
        Subset(self.0 | (1 << q))
    }

    pub fn contains(self, q: usize) -> bool {
        q < MAX_COORDS && self.0 >> q & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Subset) -> Self {
        Subset(self.0 | other.0)
    }

    pub fn intersection(self, other: Subset) -> Self {
        Subset(self.0 & other.0)
    }

    pub fn difference(self, other: Subset) -> Self {
        Subset(self.0 & !other.0)
    }

    pub fn intersects(self, other: Subset) -> bool {
        self.0 & other.0 != 0
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    /// Complement within `{0, ..., n-1}`.
    pub fn complement(self, n: usize) -> Self {
        Subset(Subset::full(n).0 & !self.0)
    }

    /// Members in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let q = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(q)
            }
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn max_index(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(31 - self.0.leading_zeros() as usize)
        }
    }

    /// Lexicographic comparison of the ascending member lists.
    pub fn lex_cmp(self, other: Subset) -> Ordering {
        self.iter().cmp(other.iter())
    }

    /// Mask over basis-index bits for an `n`-coordinate register.
    pub fn basis_mask(self, n: usize) -> usize {
        self.iter().fold(0usize, |m, q| m | 1 << (n - 1 - q))
    }

    /// Reads the bits of `index` at this subset's coordinates and packs them into a
    /// `len()`-bit integer, lowest coordinate most significant.
    pub fn gather(self, index: usize, n: usize) -> usize {
        self.iter()
            .fold(0usize, |acc, q| (acc << 1) | (index >> (n - 1 - q) & 1))
    }

    /// Inverse of [`Subset::gather`]: spreads a packed `len()`-bit value onto this
    /// subset's coordinates of an `n`-coordinate basis index (other bits zero).
    pub fn scatter(self, packed: usize, n: usize) -> usize {
        let k = self.len();
        self.iter().enumerate().fold(0usize, |acc, (pos, q)| {
            acc | ((packed >> (k - 1 - pos)) & 1) << (n - 1 - q)
        })
    }

    /// Converts a basis-index bit pattern (as returned by a measurement) into the set
    /// of coordinates whose bit is 1.
    pub fn from_basis_bits(bits: usize, n: usize) -> Self {
        (0..n)
            .filter(|&q| bits >> (n - 1 - q) & 1 == 1)
            .fold(Subset::EMPTY, |s, q| s.with(q))
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, q) in self.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{q}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<usize> for Subset {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Subset::from_indices(iter)
    }
}

/// All `k`-element subsets of `pool`, in lexicographic order of their member lists.
pub fn combinations(pool: Subset, k: usize) -> Vec<Subset> {
    let elems = pool.to_vec();
    let m = elems.len();
    if k > m {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| elems[i]).collect());
        let Some(i) = (0..k).rev().find(|&i| idx[i] < i + m - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}
