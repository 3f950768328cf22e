//! Dense complex linear algebra for registers of up to 12 qubits.
//!
//! Matrices are stored row-major. Multi-qubit operators use big-endian qubit
//! ordering: qubit 0 is the most significant bit of a basis index.

use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::subset::Subset;

pub type C64 = Complex64;

/// Largest supported register.
pub const MAX_QUBITS: usize = 12;
/// Largest supported matrix side, `2^MAX_QUBITS`.
pub const MAX_DIM: usize = 1 << MAX_QUBITS;
/// Largest matrix side accepted by [`nuclear_norm`].
pub const MAX_NUCLEAR_DIM: usize = 64;
/// Unitarity tolerance enforced at construction.
pub const UNITARITY_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        ComplexMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Argument("matrix dimensions must be positive".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Argument("matrix has non-finite entries".into()));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::from_vec(r, c, rows.concat())
    }

    /// Real-valued convenience constructor.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
            for (k, &a) in self.row(r).iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} for a {}x{} matrix",
                v.len(),
                self.rows,
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> Result<Self> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> Result<Self> {
        self.zip_with(rhs, |a, b| a - b)
    }

    fn zip_with(&self, rhs: &ComplexMatrix, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                out[(r, c)] = m[(r, c)];
            }
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// An `n`-qubit unitary, `1 <= n <= 12`, certified at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Unitary {
    n: usize,
    matrix: ComplexMatrix,
}

impl Unitary {
    /// Wraps a `2^n x 2^n` matrix after checking `max |U†U - I| <= 1e-10`.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let n = qubits_for_dim(matrix.rows())?;
        if !matrix.is_square() {
            return Err(Error::Dimension("unitary must be square".into()));
        }
        let dev = unitarity_deviation(&matrix);
        if dev > UNITARITY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Unitary { n, matrix })
    }

    /// Diagonal unitary with entries `±1`; exact by construction.
    pub fn from_diagonal_signs(signs: &[i8]) -> Result<Self> {
        let n = qubits_for_dim(signs.len())?;
        let mut diag = Vec::with_capacity(signs.len());
        for &s in signs {
            match s {
                1 => diag.push(ONE),
                -1 => diag.push(-ONE),
                _ => return Err(Error::Argument(format!("diagonal sign {s} is not ±1"))),
            }
        }
        Ok(Unitary {
            n,
            matrix: ComplexMatrix::diagonal(&diag),
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Capacity(format!("{n} qubits")));
        }
        Ok(Unitary {
            n,
            matrix: ComplexMatrix::identity(1 << n),
        })
    }

    /// `small` acting on the qubits of `support` (in ascending order), identity elsewhere.
    pub fn junta(n: usize, support: Subset, small: &Unitary) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Capacity(format!("{n} qubits")));
        }
        if support.len() != small.n {
            return Err(Error::Dimension(format!(
                "{}-qubit block on a support of size {}",
                small.n,
                support.len()
            )));
        }
        if support.max_index().is_some_and(|q| q >= n) {
            return Err(Error::Argument(format!("support {support} outside [0, {n})")));
        }
        let dim = 1usize << n;
        let rest = support.complement(n).basis_mask(n);
        let mut m = ComplexMatrix::zeros(dim, dim);
        for r in 0..dim {
            let r_in = support.gather(r, n);
            let r_out = r & rest;
            for c_in in 0..1usize << small.n {
                let c = r_out | support.scatter(c_in, n);
                m[(r, c)] = small.matrix[(r_in, c_in)];
            }
        }
        Ok(Unitary { n, matrix: m })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Unitary {
        Unitary {
            n: self.n,
            matrix: self.matrix.adjoint(),
        }
    }

    /// Product `self · rhs`, re-certified.
    pub fn compose(&self, rhs: &Unitary) -> Result<Unitary> {
        Unitary::new(self.matrix.matmul(&rhs.matrix)?)
    }

    pub fn amplitude(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::Dimension(format!("dimension {dim} is not a power of two >= 2")));
    }
    let n = dim.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(Error::Capacity(format!("{n} qubits exceeds {MAX_QUBITS}")));
    }
    Ok(n)
}

/// `max_ij |(M†M - I)_ij|`.
pub fn unitarity_deviation(m: &ComplexMatrix) -> f64 {
    let dim = m.cols();
    let mut worst: f64 = 0.0;
    // (M†M)_ij = Σ_r conj(M_ri) M_rj
    let mut acc = vec![ZERO; dim];
    for i in 0..dim {
        acc.iter_mut().for_each(|z| *z = ZERO);
        for r in 0..m.rows() {
            let a = m[(r, i)].conj();
            if a == ZERO {
                continue;
            }
            for (z, &b) in acc.iter_mut().zip(m.row(r)) {
                *z += a * b;
            }
        }
        for (j, z) in acc.iter().enumerate() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((z - target).norm());
        }
    }
    worst
}

/// Kronecker product `A ⊗ B`; rows of `A` index the more significant bits.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a.rows().checked_mul(b.rows());
    let cols = a.cols().checked_mul(b.cols());
    let (rows, cols) = match (rows, cols) {
        (Some(r), Some(c)) if r <= MAX_DIM && c <= MAX_DIM => (r, c),
        _ => {
            return Err(Error::Capacity(format!(
                "tensor product larger than {MAX_DIM}x{MAX_DIM}"
            )))
        }
    };
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ar in 0..a.rows() {
        for ac in 0..a.cols() {
            let s = a[(ar, ac)];
            if s == ZERO {
                continue;
            }
            for br in 0..b.rows() {
                for bc in 0..b.cols() {
                    out[(ar * b.rows() + br, ac * b.cols() + bc)] = s * b[(br, bc)];
                }
            }
        }
    }
    Ok(out)
}

/// `Tr_{S̄}(U) = Σ_i (I_S ⊗ ⟨i|) U (I_S ⊗ |i⟩)`, a `2^|S| x 2^|S|` matrix whose qubits
/// follow the ascending order of `keep`. `keep = ∅` yields the 1x1 matrix `[Tr U]`.
pub fn partial_trace(u: &Unitary, keep: Subset) -> Result<ComplexMatrix> {
    partial_trace_matrix(u.matrix(), u.num_qubits(), keep)
}

/// [`partial_trace`] for any square `2^n x 2^n` matrix.
pub fn partial_trace_matrix(m: &ComplexMatrix, n: usize, keep: Subset) -> Result<ComplexMatrix> {
    if !m.is_square() || m.rows() != 1 << n {
        return Err(Error::Dimension(format!(
            "{}x{} matrix is not a {n}-qubit operator",
            m.rows(),
            m.cols()
        )));
    }
    if keep.max_index().is_some_and(|q| q >= n) {
        return Err(Error::Argument(format!("subset {keep} outside [0, {n})")));
    }
    let k = keep.len();
    let small = 1usize << k;
    let traced = keep.complement(n).basis_mask(n);
    let mut out = ComplexMatrix::zeros(small, small);
    for r in 0..m.rows() {
        let r_small = keep.gather(r, n);
        let r_env = r & traced;
        for c_small in 0..small {
            let c = r_env | keep.scatter(c_small, n);
            out[(r_small, c_small)] += m[(r, c)];
        }
    }
    Ok(out)
}

/// Singular values in descending order (one-sided Jacobi; deterministic).
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    // Work on columns of the wider-than-tall orientation's adjoint so that the
    // column count is the smaller side.
    let a = if m.rows() >= m.cols() {
        m.clone()
    } else {
        m.adjoint()
    };
    let (rows, cols) = (a.rows(), a.cols());
    let mut columns: Vec<Vec<C64>> = (0..cols)
        .map(|c| (0..rows).map(|r| a[(r, c)]).collect())
        .collect();

    const MAX_SWEEPS: usize = 80;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&columns[p], &columns[q]);
                    let alpha: f64 = cp.iter().map(|z| z.norm_sqr()).sum();
                    let beta: f64 = cq.iter().map(|z| z.norm_sqr()).sum();
                    let gamma: C64 = cp.iter().zip(cq).map(|(x, y)| x.conj() * y).sum();
                    (alpha, beta, gamma)
                };
                let g = gamma.norm();
                if g == 0.0 || g <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // rephase column q so the off-diagonal Gram entry is real and positive
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = columns.split_at_mut(q);
                let (cp, cq) = (&mut left[p], &mut right[0]);
                for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                    let yr = *y * phase.conj();
                    let nx = *x * c - yr * s;
                    let ny = *x * s + yr * c;
                    *x = nx;
                    *y = ny;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = columns
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Schatten-1 norm (sum of singular values) of a square matrix of side at most 64.
pub fn nuclear_norm(m: &ComplexMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::Argument(format!(
            "nuclear norm of a non-square {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if m.rows() > MAX_NUCLEAR_DIM {
        return Err(Error::Capacity(format!(
            "nuclear norm limited to {MAX_NUCLEAR_DIM}x{MAX_NUCLEAR_DIM}"
        )));
    }
    Ok(singular_values(m).iter().sum())
}

/// Matrix with i.i.d. standard complex Gaussian entries (`E|z|² = 1`).
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let data = (0..rows * cols)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re * scale, im * scale)
        })
        .collect();
    ComplexMatrix { rows, cols, data }
}

/// Haar-distributed unitary of side `dim`: QR of a Ginibre matrix with the phases of
/// `R`'s diagonal absorbed into `Q`.
pub fn haar_random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Unitary> {
    qubits_for_dim(dim)?;
    let g = ginibre(dim, dim, rng).to_nalgebra();
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..dim {
        let d = r[(c, c)];
        let norm = d.norm();
        let phase = if norm > 0.0 { d / norm } else { ONE };
        for row in 0..dim {
            q[(row, c)] *= phase;
        }
    }
    Unitary::new(ComplexMatrix::from_nalgebra(&q))
}

/// Spectral decomposition `H = V diag(λ) V†` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn new(h: &ComplexMatrix) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::Argument("Hermitian eigensolver needs a square matrix".into()));
        }
        let herm_dev = h.sub(&h.adjoint())?.max_abs();
        if herm_dev > 1e-9 * (1.0 + h.max_abs()) {
            return Err(Error::Argument(format!("matrix is not Hermitian ({herm_dev:e})")));
        }
        let eig = nalgebra::SymmetricEigen::new(h.to_nalgebra());
        Ok(HermitianEigen {
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: ComplexMatrix::from_nalgebra(&eig.eigenvectors),
        })
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max)
    }

    /// `exp(iθH) = V diag(e^{iθλ}) V†`.
    pub fn exp_i(&self, theta: f64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let dim = v.rows();
        let mut scaled = v.clone();
        for c in 0..dim {
            let ph = C64::from_polar(1.0, theta * self.eigenvalues[c]);
            for r in 0..dim {
                scaled[(r, c)] *= ph;
            }
        }
        scaled
            .matmul(&v.adjoint())
            .expect("eigenvector matrix is square")
    }
}

/// Common one- and two-qubit gates.
pub mod gates {
    use super::*;

    fn real(rows: &[&[f64]]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(rows).expect("static gate")
    }

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn pauli_x() -> ComplexMatrix {
        real(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn pauli_y() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[
            vec![ZERO, C64::new(0.0, -1.0)],
            vec![C64::new(0.0, 1.0), ZERO],
        ])
        .expect("static gate")
    }

    pub fn pauli_z() -> ComplexMatrix {
        real(&[&[1.0, 0.0], &[0.0, -1.0]])
    }

    /// `σ_0..σ_3 = I, X, Y, Z`.
    pub fn pauli(symbol: u8) -> ComplexMatrix {
        match symbol {
            0 => identity(),
            1 => pauli_x(),
            2 => pauli_y(),
            3 => pauli_z(),
            _ => panic!("Pauli symbol {symbol} outside 0..4"),
        }
    }

    pub fn hadamard() -> ComplexMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        real(&[&[h, h], &[h, -h]])
    }

    /// `(1/√2) [[1, -i], [-i, 1]]`.
    pub fn r_gate() -> ComplexMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_rows(&[
            vec![C64::new(h, 0.0), C64::new(0.0, -h)],
            vec![C64::new(0.0, -h), C64::new(h, 0.0)],
        ])
        .expect("static gate")
    }

    /// Control on qubit 0, target qubit 1.
    pub fn cnot() -> ComplexMatrix {
        real(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ])
    }

    pub fn swap() -> ComplexMatrix {
        real(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
        ])
    }

    pub fn unitary(m: ComplexMatrix) -> Unitary {
        Unitary::new(m).expect("static gate is unitary")
    }
}
