//! Objective functions computed from computational-basis statistics.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ansatz::AnsatzParams;
use crate::error::{Error, Result};
use crate::state::{basis_probabilities, evolve_unchecked, sample_distribution, BasisDistribution, DensityMatrix};

/// Which objective drives the optimization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObjectiveKind {
    /// Sum of squared basis probabilities; maximized.
    #[serde(rename = "global-d")]
    GlobalD,
    /// Polynomial in single-qubit zero-state probabilities; minimized.
    #[serde(rename = "local-l")]
    LocalL,
    /// Zero-state probability of a single qubit; minimized.
    #[serde(rename = "single-qubit-pi")]
    SingleQubitPi,
}

impl ObjectiveKind {
    pub fn name(self) -> &'static str {
        match self {
            ObjectiveKind::GlobalD => "global-d",
            ObjectiveKind::LocalL => "local-l",
            ObjectiveKind::SingleQubitPi => "single-qubit-pi",
        }
    }

    pub fn maximizes(self) -> bool {
        matches!(self, ObjectiveKind::GlobalD)
    }

    /// Maps a natural objective value onto the minimization convention.
    #[inline]
    pub fn to_minimized(self, value: f64) -> f64 {
        if self.maximizes() {
            -value
        } else {
            value
        }
    }

    pub fn check_qubits(self, n_qubits: usize) -> Result<()> {
        if self == ObjectiveKind::SingleQubitPi && n_qubits != 1 {
            return Err(Error::InvalidArgument(format!(
                "single-qubit-pi needs exactly one qubit, got {n_qubits}"
            )));
        }
        Ok(())
    }

    /// Natural objective value of a basis distribution.
    pub fn value(self, dist: &BasisDistribution) -> Result<f64> {
        self.value_from_probs(dist.n_qubits(), dist.probs())
    }

    pub(crate) fn value_from_probs(self, n_qubits: usize, probs: &[f64]) -> Result<f64> {
        match self {
            ObjectiveKind::GlobalD => Ok(probs.iter().map(|p| p * p).sum()),
            ObjectiveKind::LocalL => local_objective(&zero_marginals(n_qubits, probs)),
            ObjectiveKind::SingleQubitPi => {
                self.check_qubits(n_qubits)?;
                Ok(probs[0])
            }
        }
    }

    /// Derivatives of the minimized objective with respect to each basis
    /// probability.
    pub(crate) fn minimized_weights(self, n_qubits: usize, probs: &[f64]) -> Result<Vec<f64>> {
        match self {
            ObjectiveKind::GlobalD => Ok(probs.iter().map(|p| -2.0 * p).collect()),
            ObjectiveKind::SingleQubitPi => {
                self.check_qubits(n_qubits)?;
                Ok(vec![1.0, 0.0])
            }
            ObjectiveKind::LocalL => {
                let pis = zero_marginals(n_qubits, probs);
                // dL/dpi_q = sum_{k=1}^{N-q+1} k pi_q^{k-1}
                let dpi: Vec<f64> = pis
                    .iter()
                    .enumerate()
                    .map(|(idx, &pi)| {
                        let degree = n_qubits - idx;
                        (1..=degree).map(|k| k as f64 * pi.powi(k as i32 - 1)).sum()
                    })
                    .collect();
                Ok((0..probs.len())
                    .map(|b| {
                        (0..n_qubits)
                            .filter(|&idx| (b >> (n_qubits - 1 - idx)) & 1 == 0)
                            .map(|idx| dpi[idx])
                            .sum()
                    })
                    .collect())
            }
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global-d" => Ok(ObjectiveKind::GlobalD),
            "local-l" => Ok(ObjectiveKind::LocalL),
            "single-qubit-pi" => Ok(ObjectiveKind::SingleQubitPi),
            other => Err(Error::InvalidArgument(format!("unknown objective {other:?}"))),
        }
    }
}

fn zero_marginals(n_qubits: usize, probs: &[f64]) -> Vec<f64> {
    (0..n_qubits)
        .map(|idx| {
            let shift = n_qubits - 1 - idx;
            probs
                .iter()
                .enumerate()
                .filter(|(b, _)| (b >> shift) & 1 == 0)
                .map(|(_, p)| p)
                .sum()
        })
        .collect()
}

/// Sum of squared basis probabilities.
pub fn global_objective(dist: &BasisDistribution) -> f64 {
    dist.probs().iter().map(|p| p * p).sum()
}

/// `sum_{q=1}^{N} sum_{n=1}^{N-q+1} pi_q^n`.
pub fn local_objective(pi: &[f64]) -> Result<f64> {
    let n = pi.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty probability vector".into()));
    }
    let mut total = 0.0;
    for (idx, &p) in pi.iter().enumerate() {
        if !(-1e-9..=1.0 + 1e-9).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "zero-state probability {p} of qubit {} outside [0, 1]",
                idx + 1
            )));
        }
        let degree = n - idx;
        let mut power = 1.0;
        for _ in 0..degree {
            power *= p;
            total += power;
        }
    }
    Ok(total)
}

/// Zero-state probability of a one-qubit state.
pub fn single_qubit_objective(rho_prime: &DensityMatrix) -> Result<f64> {
    ObjectiveKind::SingleQubitPi.check_qubits(rho_prime.n_qubits())?;
    Ok(rho_prime.matrix()[(0, 0)].re)
}

fn check_compatible(rho: &DensityMatrix, params: &AnsatzParams, kind: ObjectiveKind) -> Result<()> {
    if params.descriptor().n_qubits != rho.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "{}-qubit ansatz for a {}-qubit state",
            params.descriptor().n_qubits,
            rho.n_qubits()
        )));
    }
    kind.check_qubits(rho.n_qubits())
}

/// Builds the circuit, evolves `rho` and returns the objective from exact
/// basis probabilities.
pub fn evaluate(rho: &DensityMatrix, params: &AnsatzParams, kind: ObjectiveKind) -> Result<f64> {
    check_compatible(rho, params, kind)?;
    let u = params.unitary()?;
    let evolved = evolve_unchecked(rho, &u);
    kind.value(&basis_probabilities(&evolved))
}

/// As [`evaluate`], but from `shots` simulated measurements.
pub fn evaluate_sampled(
    rho: &DensityMatrix,
    params: &AnsatzParams,
    kind: ObjectiveKind,
    shots: u64,
    seed: u64,
) -> Result<f64> {
    check_compatible(rho, params, kind)?;
    let u = params.unitary()?;
    let evolved = evolve_unchecked(rho, &u);
    let dist = sample_distribution(&basis_probabilities(&evolved), shots, seed)?;
    kind.value(&dist)
}
