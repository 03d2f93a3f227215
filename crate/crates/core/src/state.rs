//! Density matrices and the measurement statistics computed from them.
//!
//! Basis index convention: qubit 1 is the most significant bit, so basis index
//! `b` of an `n`-qubit register has qubit `q` in bit `n - q`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, eigh, ComplexMatrix, HERMITIAN_TOL};

/// Trace tolerance for [`DensityMatrix`] validation.
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted as positive semidefinite.
pub const PSD_TOL: f64 = 1e-9;
/// Tolerance of [`evolve`]'s unitarity check.
pub const UNITARY_TOL: f64 = 1e-8;
/// Probabilities this far outside `[0, 1]` are treated as roundoff and clamped.
pub const PROB_CLAMP_TOL: f64 = 1e-12;

/// Hermitian, unit-trace, positive-semidefinite matrix on `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates all density-matrix invariants, including positivity.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let rho = Self::checked_shape(matrix)?;
        let min_eig = eigh(&rho.matrix)?.eigenvalues[0];
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite (min eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(rho)
    }

    /// Checks shape, Hermiticity and trace but skips the eigenvalue test. Used
    /// for states obtained from a valid state by unitary conjugation.
    pub(crate) fn checked_shape(matrix: ComplexMatrix) -> Result<Self> {
        matrix.require_square()?;
        let dim = matrix.rows();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::InvalidState(format!(
                "dimension {dim} is not 2^n with n >= 1"
            )));
        }
        let dev = matrix.hermitian_deviation()?;
        if dev.is_nan() || dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = linalg::trace(&matrix)?;
        if !((tr.re - 1.0).abs() <= TRACE_TOL && tr.im.abs() <= TRACE_TOL) {
            return Err(Error::InvalidState(format!(
                "trace is {:.12}{:+.3e}i, expected 1",
                tr.re, tr.im
            )));
        }
        Ok(Self {
            n_qubits: dim.trailing_zeros() as usize,
            matrix,
        })
    }

    /// `|b><b|` for computational-basis index `b`.
    pub fn basis_state(n_qubits: usize, b: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if n_qubits == 0 || b >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {b} out of range for {n_qubits} qubits"
            )));
        }
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(b, b)] = linalg::ONE;
        Self::checked_shape(m)
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument("need at least one qubit".into()));
        }
        let dim = 1usize << n_qubits;
        Self::checked_shape(ComplexMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0)))
    }

    /// `|psi><psi|` for a (not necessarily normalized) state vector.
    pub fn pure(amplitudes: &[Complex64]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if norm.is_nan() || norm <= 0.0 {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        let dim = amplitudes.len();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = amplitudes[i] * amplitudes[j].conj() / norm;
            }
        }
        Self::checked_shape(m)
    }

    /// Tensor product `self (x) other`; `self` holds the leading qubits.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            n_qubits: self.n_qubits + other.n_qubits,
            matrix: linalg::kron(&self.matrix, &other.matrix),
        }
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(eigh(&self.matrix)?.eigenvalues)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityRepr {
    n_qubits: usize,
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let data = self.matrix.as_slice();
        DensityRepr {
            n_qubits: self.n_qubits,
            rows: self.matrix.rows(),
            cols: self.matrix.cols(),
            re: data.iter().map(|z| z.re).collect(),
            im: data.iter().map(|z| z.im).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = DensityRepr::deserialize(d)?;
        if repr.re.len() != repr.im.len() {
            return Err(D::Error::custom("`re` and `im` lengths differ"));
        }
        let data = repr
            .re
            .iter()
            .zip(&repr.im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        let matrix = ComplexMatrix::from_vec(repr.rows, repr.cols, data).map_err(D::Error::custom)?;
        let rho = DensityMatrix::new(matrix).map_err(D::Error::custom)?;
        if rho.n_qubits != repr.n_qubits {
            return Err(D::Error::custom(format!(
                "n_qubits = {} but matrix is {}x{}",
                repr.n_qubits, repr.rows, repr.cols
            )));
        }
        Ok(rho)
    }
}

/// Computational-basis outcome distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisDistribution {
    n_qubits: usize,
    probs: Vec<f64>,
}

impl BasisDistribution {
    /// Clamps roundoff-level excursions outside `[0, 1]` and renormalizes.
    pub fn new(n_qubits: usize, probs: Vec<f64>) -> Result<Self> {
        if n_qubits == 0 || probs.len() != 1usize << n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "{} probabilities for {n_qubits} qubits",
                probs.len()
            )));
        }
        let mut probs = probs;
        for p in probs.iter_mut() {
            if !(*p >= -PROB_CLAMP_TOL && *p <= 1.0 + PROB_CLAMP_TOL) {
                return Err(Error::InvalidArgument(format!("probability {p} out of range")));
            }
            *p = p.clamp(0.0, 1.0);
        }
        let total: f64 = probs.iter().sum();
        if total.is_nan() || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}")));
        }
        for p in probs.iter_mut() {
            *p /= total;
        }
        Ok(Self { n_qubits, probs })
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Bit-string label of basis index `b`, qubit 1 first.
    pub fn label(&self, b: usize) -> String {
        basis_label(self.n_qubits, b)
    }

    /// Marginal probability that qubit `q` (1-based) reads 0.
    pub fn qubit_zero_probability(&self, q: usize) -> Result<f64> {
        if q == 0 || q > self.n_qubits {
            return Err(Error::InvalidArgument(format!(
                "qubit index {q} out of range 1..={}",
                self.n_qubits
            )));
        }
        let shift = self.n_qubits - q;
        Ok(self
            .probs
            .iter()
            .enumerate()
            .filter(|(b, _)| (b >> shift) & 1 == 0)
            .map(|(_, p)| p)
            .sum())
    }

    /// Zero-state marginals for qubits `1..=n`.
    pub fn zero_marginals(&self) -> Vec<f64> {
        (1..=self.n_qubits)
            .map(|q| self.qubit_zero_probability(q).expect("in range"))
            .collect()
    }

    /// Two-column table `basis,probability` with a header row.
    pub fn to_table(&self) -> String {
        let mut out = String::from("basis,probability\n");
        for (b, p) in self.probs.iter().enumerate() {
            out.push_str(&format!("{},{:.17e}\n", self.label(b), p));
        }
        out
    }
}

pub fn basis_label(n_qubits: usize, b: usize) -> String {
    format!("{:0width$b}", b, width = n_qubits)
}

/// Random state `G G^dagger / Tr(G G^dagger)` with `G` a `2^n x rank` matrix of
/// standard complex Gaussians.
pub fn random_density_matrix(n: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    if n == 0 || n > 10 {
        return Err(Error::InvalidArgument(format!("qubit count {n} out of range 1..=10")));
    }
    let dim = 1usize << n;
    if rank == 0 || rank > dim {
        return Err(Error::InvalidArgument(format!("rank {rank} out of range 1..={dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = ComplexMatrix::zeros(dim, rank);
    for z in g.as_mut_slice() {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        *z = Complex64::new(re, im);
    }
    let mut m = linalg::mul(&g, &linalg::adjoint(&g))?;
    let tr = linalg::trace(&m)?.re;
    for z in m.as_mut_slice() {
        *z /= tr;
    }
    // Enforce exact Hermiticity after the division.
    for i in 0..dim {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..dim {
            m[(j, i)] = m[(i, j)].conj();
        }
    }
    DensityMatrix::new(m)
}

/// `u rho u^dagger`.
pub fn evolve(rho: &DensityMatrix, u: &ComplexMatrix) -> Result<DensityMatrix> {
    if u.rows() != rho.dim() || u.cols() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} unitary for a {}-dimensional state",
            u.rows(),
            u.cols(),
            rho.dim()
        )));
    }
    let dev = u.unitary_deviation()?;
    if dev.is_nan() || dev > UNITARY_TOL {
        return Err(Error::NotUnitary(dev));
    }
    Ok(evolve_unchecked(rho, u))
}

/// `u rho u^dagger` for a `u` already known to be unitary.
pub(crate) fn evolve_unchecked(rho: &DensityMatrix, u: &ComplexMatrix) -> DensityMatrix {
    let mut m = linalg::conjugate(u, &rho.matrix).expect("dimensions checked");
    let dim = m.rows();
    for i in 0..dim {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..dim {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
    DensityMatrix {
        n_qubits: rho.n_qubits,
        matrix: m,
    }
}

/// `Tr(rho^2)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    // Tr(rho^2) = sum_ij |rho_ij|^2 for Hermitian rho.
    rho.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
}

pub fn basis_probabilities(rho: &DensityMatrix) -> BasisDistribution {
    let probs = rho.matrix.diag().iter().map(|z| z.re).collect();
    BasisDistribution::new(rho.n_qubits, probs).expect("valid density matrix has a valid diagonal")
}

/// Probability that qubit `q` (1-based, qubit 1 most significant) reads 0.
pub fn qubit_zero_probability(rho: &DensityMatrix, q: usize) -> Result<f64> {
    basis_probabilities(rho).qubit_zero_probability(q)
}

/// Mean modulus of the off-diagonal entries.
pub fn off_diagonal_average(rho: &DensityMatrix) -> f64 {
    off_diagonal_average_matrix(&rho.matrix)
}

pub(crate) fn off_diagonal_average_matrix(m: &ComplexMatrix) -> f64 {
    let dim = m.rows();
    let mut total = 0.0;
    for i in 0..dim {
        for (j, z) in m.row(i).iter().enumerate() {
            if i != j {
                total += z.norm();
            }
        }
    }
    total / (dim * (dim - 1)) as f64
}

/// Empirical outcome frequencies over `shots` simulated measurements.
pub fn sample_probabilities(rho: &DensityMatrix, shots: u64, seed: u64) -> Result<BasisDistribution> {
    sample_distribution(&basis_probabilities(rho), shots, seed)
}

/// Multinomial sampling by sequential conditional binomials.
pub fn sample_distribution(exact: &BasisDistribution, shots: u64, seed: u64) -> Result<BasisDistribution> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shot count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probs = exact.probs();
    let mut counts = vec![0u64; probs.len()];
    let mut remaining_shots = shots;
    let mut remaining_mass = 1.0f64;
    for (b, &p) in probs.iter().enumerate() {
        if remaining_shots == 0 {
            break;
        }
        if b == probs.len() - 1 || remaining_mass <= 0.0 {
            counts[b] = remaining_shots;
            break;
        }
        let cond = (p / remaining_mass).clamp(0.0, 1.0);
        let k = Binomial::new(remaining_shots, cond)
            .expect("probability within [0, 1]")
            .sample(&mut rng);
        counts[b] = k;
        remaining_shots -= k;
        remaining_mass -= p;
    }
    let freqs = counts.iter().map(|&c| c as f64 / shots as f64).collect();
    BasisDistribution::new(exact.n_qubits(), freqs)
}
