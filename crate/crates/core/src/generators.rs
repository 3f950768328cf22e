//! Certified instance construction.
//!
//! Every generator that promises a distance checks it with the exact oracles before
//! returning; failures are resampled up to [`MAX_ATTEMPTS`] times.

use rand::seq::index::sample as sample_indices;
use rand::Rng;

use crate::boolean::{dist_to_k_junta_bool, BooleanFunction, MAX_VARIABLES};
use crate::error::{Error, Result};
use crate::linalg::{ginibre, haar_random_unitary, ComplexMatrix, HermitianEigen, Unitary, C64};
use crate::oracles::{certify_instance_boolean, certify_instance_unitary, Certificate, Classification};
use crate::pauli::dist_to_k_junta;
use crate::subset::Subset;

/// Resampling limit of every rejection loop.
pub const MAX_ATTEMPTS: usize = 100;
/// Bisection steps per perturbation attempt.
pub const MAX_BISECTIONS: usize = 40;
/// Largest register for perturbed instances.
pub const MAX_PERTURBED_QUBITS: usize = 6;

/// Uniformly random `k`-subset of `[n]`.
pub fn random_subset<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Subset {
    Subset::from_indices(sample_indices(rng, n, k).into_iter())
}

fn check_sizes(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::Parameter(format!("need 1 ≤ k ≤ n, got k = {k}, n = {n}")));
    }
    Ok(())
}

/// Haar-random unitary on a uniformly random `k`-subset, identity elsewhere.
pub fn random_k_junta_unitary<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<(Unitary, Subset)> {
    check_sizes(n, k)?;
    let support = random_subset(n, k, rng);
    let small = haar_random_unitary(1 << k, rng)?;
    Ok((Unitary::junta(n, support, &small)?, support))
}

/// A unitary with its exact distance to the `k`-junta class.
#[derive(Clone, Debug)]
pub struct CertifiedUnitary {
    pub unitary: Unitary,
    pub certificate: Certificate,
    /// Draws consumed, including rejected ones.
    pub attempts: usize,
}

/// A Boolean function with its exact distance to the `k`-junta class.
#[derive(Clone, Debug)]
pub struct CertifiedBoolean {
    pub function: BooleanFunction,
    pub certificate: Certificate,
    pub attempts: usize,
}

/// Gaussian Hermitian matrix scaled to unit operator norm.
pub fn random_hermitian_direction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<HermitianEigen> {
    let a = ginibre(dim, dim, rng);
    let h = a.add(&a.adjoint())?.scale(C64::new(0.5, 0.0));
    let eig = HermitianEigen::new(&h)?;
    let r = eig.spectral_radius();
    Ok(HermitianEigen {
        eigenvalues: eig.eigenvalues.iter().map(|v| v / r).collect(),
        eigenvectors: eig.eigenvectors,
    })
}

/// A random `k`-junta pushed off the class: `U = W·exp(iθG)` with the exact distance
/// in `[ε/2, ε]`.
pub fn perturbed_junta_unitary<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    epsilon: f64,
    rng: &mut R,
) -> Result<CertifiedUnitary> {
    check_sizes(n, k)?;
    if n > MAX_PERTURBED_QUBITS {
        return Err(Error::Capacity(format!(
            "perturbed instances limited to {MAX_PERTURBED_QUBITS} qubits"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Parameter(format!("target distance {epsilon} outside (0, 1)")));
    }
    let dim = 1usize << n;
    for attempt in 1..=MAX_ATTEMPTS {
        let (w, _) = random_k_junta_unitary(n, k, rng)?;
        let g = random_hermitian_direction(dim, rng)?;
        let at = |theta: f64| -> Result<(Unitary, (f64, Subset))> {
            let u = Unitary::new(w.matrix().matmul(&g.exp_i(theta))?)?;
            let d = dist_to_k_junta(&u, k, None)?;
            Ok((u, d))
        };
        let (mut lo, mut hi) = (0.0, std::f64::consts::PI);
        if at(hi)?.1 .0 < epsilon / 2.0 {
            continue;
        }
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            let (u, (d, support)) = at(mid)?;
            if d > epsilon {
                hi = mid;
            } else if d < epsilon / 2.0 {
                lo = mid;
            } else {
                return Ok(CertifiedUnitary {
                    unitary: u,
                    certificate: Certificate {
                        class: Classification::Yes,
                        distance: d,
                        support,
                    },
                    attempts: attempt,
                });
            }
        }
    }
    Err(Error::Generation(format!(
        "no perturbation landed in [{}, {epsilon}] after {MAX_ATTEMPTS} attempts",
        epsilon / 2.0
    )))
}

/// Rejection-samples Haar unitaries until one is certified `ε₂`-far from every `k`-junta.
pub fn far_instance_unitary<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    epsilon2: f64,
    rng: &mut R,
) -> Result<CertifiedUnitary> {
    check_sizes(n, k)?;
    let mut max_seen: f64 = 0.0;
    for attempt in 1..=MAX_ATTEMPTS {
        let u = haar_random_unitary(1 << n, rng)?;
        let certificate = certify_instance_unitary(&u, k, 0.0, epsilon2)?;
        if certificate.class == Classification::No {
            return Ok(CertifiedUnitary {
                unitary: u,
                certificate,
                attempts: attempt,
            });
        }
        max_seen = max_seen.max(certificate.distance);
    }
    Err(Error::Generation(format!(
        "no Haar unitary on {n} qubits was {epsilon2}-far from {k}-juntas in \
         {MAX_ATTEMPTS} draws (largest distance {max_seen:.4})"
    )))
}

/// Uniformly random function of the inputs in a uniformly random `k`-subset.
pub fn random_k_junta_boolean<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<(BooleanFunction, Subset)> {
    check_sizes(n, k)?;
    let support = random_subset(n, k, rng);
    let inner: Vec<bool> = (0..1usize << k).map(|_| rng.random()).collect();
    let f = BooleanFunction::from_bits_fn(n, |x| inner[support.gather(x, n)])?;
    Ok((f, support))
}

/// A random `k`-junta with `⌊ε·2ⁿ⌋` distinct outputs flipped, certified `ε`-close.
pub fn perturbed_junta_boolean<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    epsilon: f64,
    rng: &mut R,
) -> Result<CertifiedBoolean> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::Parameter(format!("flip fraction {epsilon} outside [0, 1)")));
    }
    let (g, _) = random_k_junta_boolean(n, k, rng)?;
    let size = 1usize << n;
    let flips = (epsilon * size as f64).floor() as usize;
    let f = g.with_flipped(&sample_indices(rng, size, flips).into_vec());
    let certificate = certify_instance_boolean(&f, k, epsilon, 1.0)?;
    if certificate.class != Classification::Yes {
        return Err(Error::Generation("flipped junta failed certification".into()));
    }
    Ok(CertifiedBoolean {
        function: f,
        certificate,
        attempts: 1,
    })
}

/// Rejection-samples uniform Boolean functions until one is certified `ε₂`-far.
pub fn far_instance_boolean<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    epsilon2: f64,
    rng: &mut R,
) -> Result<CertifiedBoolean> {
    check_sizes(n, k)?;
    let mut max_seen: f64 = 0.0;
    for attempt in 1..=MAX_ATTEMPTS {
        let table = (0..1usize << n).map(|_| if rng.random() { -1 } else { 1 }).collect();
        let f = BooleanFunction::new(n, table)?;
        let certificate = certify_instance_boolean(&f, k, 0.0, epsilon2)?;
        if certificate.class == Classification::No {
            return Ok(CertifiedBoolean {
                function: f,
                certificate,
                attempts: attempt,
            });
        }
        max_seen = max_seen.max(certificate.distance);
    }
    Err(Error::Generation(format!(
        "no random function on {n} variables was {epsilon2}-far from {k}-juntas in \
         {MAX_ATTEMPTS} draws (largest distance {max_seen:.4})"
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HardSide {
    Yes,
    No,
}

/// The weight-band functions on `a` action variables; output bit 1 maps to `−1`.
///
/// With `w = |x|` and the middle band `[a/2 − c₁, a/2 + c₁]`:
/// `(+,0)` is constant 0, `(+,1)` is 1 outside the middle band, `(−,0)` is 1 above it
/// and `(−,1)` is 1 below it.
pub fn band_function(a: usize, c1: f64, sign: Sign, bit: u8) -> Result<BooleanFunction> {
    if a == 0 || a > MAX_VARIABLES {
        return Err(Error::Parameter(format!("a = {a} outside [1, {MAX_VARIABLES}]")));
    }
    if !(c1 > 0.0 && c1 <= 0.1 * (a as f64).sqrt()) {
        return Err(Error::Parameter(format!("c₁ = {c1} outside (0, 0.1√a]")));
    }
    if bit > 1 {
        return Err(Error::Parameter(format!("selector bit {bit} is not 0 or 1")));
    }
    let half = a as f64 / 2.0;
    BooleanFunction::from_bits_fn(a, |z| {
        let w = z.count_ones() as f64;
        let above = w > half + c1;
        let below = w < half - c1;
        match (sign, bit) {
            (Sign::Plus, 0) => false,
            (Sign::Plus, _) => above || below,
            (Sign::Minus, 0) => above,
            (Sign::Minus, _) => below,
        }
    })
}

/// One hard instance together with its hidden structure.
#[derive(Clone, Debug)]
pub struct HardInstance {
    pub function: BooleanFunction,
    /// The action variables `A`.
    pub action: Subset,
    /// The control function `r` on the `k` variables outside `A` (ascending order).
    pub control: BooleanFunction,
}

/// Draws from the yes or no distribution on `n = k + a` variables.
pub fn sample_dyes_dno<R: Rng + ?Sized>(
    k: usize,
    a: usize,
    c1: f64,
    side: HardSide,
    rng: &mut R,
) -> Result<HardInstance> {
    let n = k + a;
    if k == 0 || n > MAX_VARIABLES {
        return Err(Error::Capacity(format!("k = {k}, a = {a} gives {n} variables")));
    }
    let sign = match side {
        HardSide::Yes => Sign::Plus,
        HardSide::No => Sign::Minus,
    };
    let h0 = band_function(a, c1, sign, 0)?;
    let h1 = band_function(a, c1, sign, 1)?;
    let action = random_subset(n, a, rng);
    let control_set = action.complement(n);
    let r = (0..1usize << k).map(|_| if rng.random() { -1 } else { 1 }).collect();
    let control = BooleanFunction::new(k, r)?;
    let function = BooleanFunction::from_bits_fn(n, |x| {
        let za = action.gather(x, n);
        let h = if control.value(control_set.gather(x, n)) == -1 { &h1 } else { &h0 };
        h.value(za) == -1
    })?;
    Ok(HardInstance {
        function,
        action,
        control,
    })
}

/// Exact distance of a hard-instance draw to the `k`-junta class.
pub fn hard_instance_distance(sample: &HardInstance, k: usize) -> Result<f64> {
    Ok(dist_to_k_junta_bool(&sample.function, k, None)?.0)
}

/// Complex-CSV dump: one matrix row per line, `2N` numbers alternating real and imaginary parts.
pub fn matrix_to_csv(m: &ComplexMatrix) -> String {
    let mut out = String::new();
    for r in 0..m.rows() {
        let line: Vec<String> = m
            .row(r)
            .iter()
            .flat_map(|z| [z.re.to_string(), z.im.to_string()])
            .collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Parses the format written by [`matrix_to_csv`]; blank lines and `#` comments are skipped.
pub fn matrix_from_csv(text: &str) -> Result<ComplexMatrix> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let values = line
            .split(',')
            .map(|v| {
                v.trim().parse::<f64>().map_err(|e| {
                    Error::Parse(format!("line {}: `{}`: {e}", lineno + 1, v.trim()))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() % 2 != 0 {
            return Err(Error::Parse(format!(
                "line {}: odd number of values",
                lineno + 1
            )));
        }
        rows.push(values.chunks(2).map(|p| C64::new(p[0], p[1])).collect());
    }
    if rows.is_empty() {
        return Err(Error::Parse("no matrix rows".into()));
    }
    ComplexMatrix::from_rows(&rows)
}
