//! Exact ground truth for certification and post-hoc checks.

use std::fmt;

use crate::boolean::{dist_to_k_junta_bool, fourier_transform, BooleanFunction};
use crate::error::{Error, Result};
use crate::linalg::Unitary;
use crate::pauli::{dist_to_k_junta, pauli_spectrum};
use crate::subset::{binomial, Subset};

/// Largest register certified for unitaries.
pub const MAX_CERTIFY_QUBITS: usize = 6;
/// Largest input length certified for Boolean functions.
pub const MAX_CERTIFY_VARIABLES: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    /// Within `ε₁` of some `k`-junta.
    Yes,
    /// At least `ε₂` from every `k`-junta.
    No,
    /// Neither promise holds.
    Neither,
}

impl Classification {
    pub fn from_distance(d: f64, epsilon1: f64, epsilon2: f64) -> Self {
        if d <= epsilon1 {
            Classification::Yes
        } else if d >= epsilon2 {
            Classification::No
        } else {
            Classification::Neither
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Yes => "yes",
            Classification::No => "no",
            Classification::Neither => "neither",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Exact distance to the `k`-junta class with the promise class it falls into.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certificate {
    pub class: Classification,
    pub distance: f64,
    /// A closest junta support (lexicographically first on ties).
    pub support: Subset,
}

fn check_epsilons(epsilon1: f64, epsilon2: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&epsilon1) || !(epsilon1..=1.0).contains(&epsilon2) {
        return Err(Error::Parameter(format!(
            "need 0 ≤ ε₁ ≤ ε₂ ≤ 1, got ε₁ = {epsilon1}, ε₂ = {epsilon2}"
        )));
    }
    Ok(())
}

pub fn certify_instance_unitary(
    u: &Unitary,
    k: usize,
    epsilon1: f64,
    epsilon2: f64,
) -> Result<Certificate> {
    check_epsilons(epsilon1, epsilon2)?;
    if u.num_qubits() > MAX_CERTIFY_QUBITS {
        return Err(Error::Capacity(format!(
            "unitary certification limited to {MAX_CERTIFY_QUBITS} qubits"
        )));
    }
    let (distance, support) = dist_to_k_junta(u, k, None)?;
    Ok(Certificate {
        class: Classification::from_distance(distance, epsilon1, epsilon2),
        distance,
        support,
    })
}

pub fn certify_instance_boolean(
    f: &BooleanFunction,
    k: usize,
    epsilon1: f64,
    epsilon2: f64,
) -> Result<Certificate> {
    check_epsilons(epsilon1, epsilon2)?;
    let n = f.num_vars();
    if n > MAX_CERTIFY_VARIABLES {
        return Err(Error::Capacity(format!(
            "Boolean certification limited to {MAX_CERTIFY_VARIABLES} variables"
        )));
    }
    if binomial(n as u64, k as u64) > 1 << 12 {
        return Err(Error::Capacity(format!("C({n}, {k}) subsets")));
    }
    let (distance, support) = dist_to_k_junta_bool(f, k, None)?;
    Ok(Certificate {
        class: Classification::from_distance(distance, epsilon1, epsilon2),
        distance,
        support,
    })
}

/// `Inf_i` and `Inf_i^{≤k}` for one coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoordinateInfluence {
    pub total: f64,
    pub low_degree: f64,
}

pub fn exact_influence_profile_unitary(u: &Unitary, k: usize) -> Result<Vec<CoordinateInfluence>> {
    let spectrum = pauli_spectrum(u)?;
    (0..u.num_qubits())
        .map(|i| {
            Ok(CoordinateInfluence {
                total: spectrum.influence_qubit(i)?,
                low_degree: spectrum.degree_k_influence(i, k)?,
            })
        })
        .collect()
}

pub fn exact_influence_profile_boolean(
    f: &BooleanFunction,
    k: usize,
) -> Result<Vec<CoordinateInfluence>> {
    let spectrum = fourier_transform(f);
    (0..f.num_vars())
        .map(|i| {
            Ok(CoordinateInfluence {
                total: spectrum.influence_var(i)?,
                low_degree: spectrum.degree_k_influence(i, k)?,
            })
        })
        .collect()
}

/// Coordinates an extractor with threshold `τ²/k` is obliged to return.
pub fn heavy_coordinates(profile: &[CoordinateInfluence], k: usize, tau: f64) -> Subset {
    let bar = tau * tau / k as f64;
    Subset::from_indices((0..profile.len()).filter(|&i| profile[i].low_degree >= bar))
}
