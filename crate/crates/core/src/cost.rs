//! The training cost: a fixed input state, an ansatz shape and an objective,
//! evaluated as a function of the flat parameter vector.
//!
//! Gradients come in two flavours:
//!
//! * central finite differences (the default). For brick-wall circuits the
//!   `6 N m` probe evaluations reuse cached prefix states and suffix unitaries,
//!   so each probe costs one `2^N`-dimensional matrix product instead of a full
//!   circuit rebuild. The probes are the same central differences that
//!   [`finite_diff_gradient`] computes, up to rounding.
//! * an exact spectral gradient for the universal ansatz, differentiating
//!   `exp(-i H)` through the eigendecomposition of `H`.

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ansatz::{
    cnot_ladder_permutation, gate_entries, permute_rows, single_qubit_layer, AnsatzDescriptor, AnsatzKind,
    AnsatzParams, GATE_PARAMS,
};
use crate::error::{Error, Result};
use crate::linalg::{adjoint, eigh, mul, ComplexMatrix, ZERO};
use crate::objective::ObjectiveKind;
use crate::optimizer::finite_diff_gradient;
use crate::pauli::{build_generator, enumerate_pauli_group, PauliString};
use crate::state::{evolve_unchecked, sample_distribution, BasisDistribution, DensityMatrix};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMethod {
    #[default]
    FiniteDifference,
    /// Exact derivative of the matrix exponential; universal ansatz only.
    Analytic,
}

impl fmt::Display for GradientMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GradientMethod::FiniteDifference => "finite-difference",
            GradientMethod::Analytic => "analytic",
        })
    }
}

impl FromStr for GradientMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "finite-difference" => Ok(GradientMethod::FiniteDifference),
            "analytic" => Ok(GradientMethod::Analytic),
            other => Err(Error::InvalidArgument(format!("unknown gradient method {other:?}"))),
        }
    }
}

/// Objective of `U(theta) rho U(theta)^dagger` for a fixed `rho`.
pub struct CostFunction {
    rho: DensityMatrix,
    descriptor: AnsatzDescriptor,
    kind: ObjectiveKind,
    shots: u64,
    shot_seed: u64,
    draws: Cell<u64>,
    paulis: Vec<PauliString>,
    ladder: Vec<usize>,
}

impl CostFunction {
    /// Exact-probability cost.
    pub fn new(rho: DensityMatrix, descriptor: AnsatzDescriptor, kind: ObjectiveKind) -> Result<Self> {
        Self::with_shots(rho, descriptor, kind, 0, 0)
    }

    /// Cost estimated from `shots` measurements per evaluation (`0` = exact).
    /// Successive evaluations draw from a deterministic seed sequence.
    pub fn with_shots(
        rho: DensityMatrix,
        descriptor: AnsatzDescriptor,
        kind: ObjectiveKind,
        shots: u64,
        shot_seed: u64,
    ) -> Result<Self> {
        descriptor.validate()?;
        if descriptor.n_qubits != rho.n_qubits() {
            return Err(Error::DimensionMismatch(format!(
                "{}-qubit ansatz for a {}-qubit state",
                descriptor.n_qubits,
                rho.n_qubits()
            )));
        }
        kind.check_qubits(rho.n_qubits())?;
        let paulis = match descriptor.kind {
            AnsatzKind::UniversalPauli => enumerate_pauli_group(descriptor.n_qubits)?,
            AnsatzKind::BrickWall => Vec::new(),
        };
        Ok(Self {
            ladder: cnot_ladder_permutation(descriptor.n_qubits),
            rho,
            descriptor,
            kind,
            shots,
            shot_seed,
            draws: Cell::new(0),
            paulis,
        })
    }

    pub fn descriptor(&self) -> &AnsatzDescriptor {
        &self.descriptor
    }

    pub fn kind(&self) -> ObjectiveKind {
        self.kind
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    /// Same cost with a different number of brick-wall blocks.
    pub fn with_blocks(&self, blocks: usize) -> Result<Self> {
        let descriptor = AnsatzDescriptor::brick_wall(self.descriptor.n_qubits, blocks)?;
        Self::with_shots(self.rho.clone(), descriptor, self.kind, self.shots, self.shot_seed)
    }

    fn check_len(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.descriptor.param_count() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} parameters, got {}",
                self.descriptor.param_count(),
                theta.len()
            )));
        }
        Ok(())
    }

    pub fn params(&self, theta: &[f64]) -> Result<AnsatzParams> {
        AnsatzParams::new(self.descriptor, theta.to_vec())
    }

    pub fn unitary(&self, theta: &[f64]) -> Result<ComplexMatrix> {
        self.check_len(theta)?;
        match self.descriptor.kind {
            AnsatzKind::UniversalPauli => {
                let h = build_generator(theta, &self.paulis)?;
                let eig = eigh(&h)?;
                Ok(eig.apply_function(|l| Complex64::new(0.0, -l).exp()))
            }
            AnsatzKind::BrickWall => {
                let n = self.descriptor.n_qubits;
                let mut u = ComplexMatrix::identity(self.descriptor.dim());
                for block in theta.chunks(GATE_PARAMS * n) {
                    let layer = single_qubit_layer(n, block);
                    u = permute_rows(&mul(&layer, &u)?, &self.ladder);
                }
                Ok(u)
            }
        }
    }

    pub fn evolved(&self, theta: &[f64]) -> Result<DensityMatrix> {
        Ok(evolve_unchecked(&self.rho, &self.unitary(theta)?))
    }

    fn exact_probs(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let evolved = self.evolved(theta)?;
        Ok(evolved.matrix().diag().iter().map(|z| z.re).collect())
    }

    fn value_from_probs(&self, probs: Vec<f64>) -> Result<f64> {
        let n = self.descriptor.n_qubits;
        let dist = BasisDistribution::new(n, probs)?;
        let value = if self.shots > 0 {
            let draw = self.draws.get();
            self.draws.set(draw + 1);
            let seed = splitmix64(self.shot_seed ^ splitmix64(draw));
            self.kind.value(&sample_distribution(&dist, self.shots, seed)?)?
        } else {
            self.kind.value(&dist)?
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonFinite)
        }
    }

    /// Objective in its natural direction.
    pub fn value(&self, theta: &[f64]) -> Result<f64> {
        self.check_len(theta)?;
        self.value_from_probs(self.exact_probs(theta)?)
    }

    /// Objective in the minimization convention used by the optimizer.
    pub fn minimized(&self, theta: &[f64]) -> Result<f64> {
        Ok(self.kind.to_minimized(self.value(theta)?))
    }

    /// Gradient of [`Self::minimized`].
    pub fn gradient(&self, theta: &[f64], method: GradientMethod, h: f64) -> Result<Vec<f64>> {
        self.check_len(theta)?;
        match (method, self.descriptor.kind) {
            (GradientMethod::Analytic, _) if self.shots > 0 => Err(Error::InvalidArgument(
                "analytic gradients need exact probabilities (shots = 0)".into(),
            )),
            (GradientMethod::Analytic, AnsatzKind::UniversalPauli) => self.spectral_gradient(theta),
            (GradientMethod::Analytic, AnsatzKind::BrickWall) => Err(Error::InvalidArgument(
                "analytic gradients are only available for the universal-pauli ansatz".into(),
            )),
            (GradientMethod::FiniteDifference, AnsatzKind::BrickWall) if self.shots == 0 => {
                self.brick_wall_fd_gradient(theta, h)
            }
            (GradientMethod::FiniteDifference, _) => finite_diff_gradient(|t| self.minimized(t), theta, h),
        }
    }

    /// Central differences for the brick-wall circuit with cached intermediates.
    fn brick_wall_fd_gradient(&self, theta: &[f64], h: f64) -> Result<Vec<f64>> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {h}")));
        }
        let n = self.descriptor.n_qubits;
        let dim = self.descriptor.dim();
        let per_block = GATE_PARAMS * n;
        let gates: Vec<[Complex64; 4]> = theta
            .chunks(GATE_PARAMS)
            .map(|g| gate_entries(g[0], g[1], g[2]))
            .collect();

        // sigma_j = layer_j rho_{j-1} layer_j^dagger, with rho_j = L sigma_j L^dagger.
        let mut sigmas = Vec::with_capacity(self.descriptor.blocks);
        let mut rho = self.rho.matrix().clone();
        for block in gates.chunks(n) {
            for (q, g) in block.iter().enumerate() {
                let shift = n - 1 - q;
                rho = apply_on_rows(&rho, g, shift);
                rho = apply_on_columns(&rho, &gate_adjoint(g), shift);
            }
            let next = permute_rows(&adjoint(&permute_rows(&rho, &self.ladder)), &self.ladder);
            sigmas.push(std::mem::replace(&mut rho, next));
        }

        // suffix[j] = B_m ... B_{j+1} L, i.e. everything applied after block j's layer.
        let mut suffixes = vec![ComplexMatrix::zeros(1, 1); self.descriptor.blocks];
        let mut tail = ComplexMatrix::identity(dim);
        for (j, block) in gates.chunks(n).enumerate().rev() {
            let mut with_ladder = ComplexMatrix::zeros(dim, dim);
            for r in 0..dim {
                for (b, &pb) in self.ladder.iter().enumerate() {
                    with_ladder[(r, b)] = tail[(r, pb)];
                }
            }
            tail = with_ladder.clone();
            for (q, g) in block.iter().enumerate() {
                tail = apply_on_columns(&tail, g, n - 1 - q);
            }
            suffixes[j] = with_ladder;
        }

        let mut grad = vec![0.0; theta.len()];
        let mut probs = vec![0.0; dim];
        for j in 0..self.descriptor.blocks {
            for q in 0..n {
                let response = GateResponse::new(&suffixes[j], &sigmas[j], n - 1 - q);
                let offset = j * per_block + GATE_PARAMS * q;
                let base = &theta[offset..offset + GATE_PARAMS];
                let g0_dag = gate_adjoint(&gates[j * n + q]);
                for a in 0..GATE_PARAMS {
                    let mut values = [0.0; 2];
                    for (slot, sign) in [1.0, -1.0].into_iter().enumerate() {
                        let mut p = [base[0], base[1], base[2]];
                        p[a] += sign * h;
                        // delta = G' G^dagger acts on qubit q only
                        let delta = mul_2x2(&gate_entries(p[0], p[1], p[2]), &g0_dag);
                        response.probabilities(&delta, &mut probs);
                        values[slot] = self.kind.to_minimized(self.value_from_probs(probs.clone())?);
                    }
                    grad[offset + a] = (values[0] - values[1]) / (2.0 * h);
                }
            }
        }
        Ok(grad)
    }

    /// Exact gradient of the minimized objective for `U = exp(-i sum_g theta_g P_g)`.
    fn spectral_gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let n = self.descriptor.n_qubits;
        let dim = self.descriptor.dim();
        let h = build_generator(theta, &self.paulis)?;
        let eig = eigh(&h)?;
        let v = &eig.eigenvectors;
        let lambda = &eig.eigenvalues;
        let u = eig.apply_function(|l| Complex64::new(0.0, -l).exp());
        let rho = self.rho.matrix();
        let rho_u_dag = mul(rho, &adjoint(&u))?;
        let evolved = mul(&u, &rho_u_dag)?;
        let probs: Vec<f64> = evolved.diag().iter().map(|z| z.re).collect();
        let weights = self.kind.minimized_weights(n, &probs)?;

        // dF = 2 Re Tr(dU K), K = rho U^dagger diag(w)
        let mut k = rho_u_dag;
        for r in 0..dim {
            for (c, w) in weights.iter().enumerate() {
                k[(r, c)] *= w;
            }
        }
        let k_eig = mul(&adjoint(v), &mul(&k, v)?)?;
        // dU = V (Gamma o V^dagger P V) V^dagger,
        // Gamma_kl = (e^{-i l_k} - e^{-i l_l}) / (l_k - l_l)
        let mut c = ComplexMatrix::zeros(dim, dim);
        for a in 0..dim {
            for b in 0..dim {
                let half_diff = (lambda[a] - lambda[b]) / 2.0;
                let sinc = if half_diff == 0.0 { 1.0 } else { half_diff.sin() / half_diff };
                let gamma = Complex64::new(0.0, -1.0) * Complex64::from_polar(sinc, -(lambda[a] + lambda[b]) / 2.0);
                c[(a, b)] = k_eig[(b, a)] * gamma;
            }
        }
        // T = conj(V) C V^T, so that sum_kl C_kl (V^dagger P V)_kl = sum_ab P_ab T_ab
        let v_conj = ComplexMatrix::from_vec(dim, dim, v.as_slice().iter().map(|z| z.conj()).collect())?;
        let mut v_t = ComplexMatrix::zeros(dim, dim);
        for r in 0..dim {
            for col in 0..dim {
                v_t[(r, col)] = v[(col, r)];
            }
        }
        let t = mul(&v_conj, &mul(&c, &v_t)?)?;
        let grad = self
            .paulis
            .iter()
            .map(|p| {
                let mut acc = ZERO;
                for col in 0..dim {
                    let (row, phase) = p.action(col);
                    acc += phase * t[(row, col)];
                }
                2.0 * acc.re
            })
            .collect();
        Ok(grad)
    }
}

fn gate_adjoint(g: &[Complex64; 4]) -> [Complex64; 4] {
    [g[0].conj(), g[2].conj(), g[1].conj(), g[3].conj()]
}

fn mul_2x2(a: &[Complex64; 4], b: &[Complex64; 4]) -> [Complex64; 4] {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

/// `g` (row-major 2x2) applied to the bit at `shift` from the left.
fn apply_on_rows(m: &ComplexMatrix, g: &[Complex64; 4], shift: usize) -> ComplexMatrix {
    let mask = 1usize << shift;
    let mut out = m.clone();
    for r0 in (0..m.rows()).filter(|r| r & mask == 0) {
        let r1 = r0 | mask;
        for c in 0..m.cols() {
            let (x0, x1) = (m[(r0, c)], m[(r1, c)]);
            out[(r0, c)] = g[0] * x0 + g[1] * x1;
            out[(r1, c)] = g[2] * x0 + g[3] * x1;
        }
    }
    out
}

/// `m` times `g` acting on the bit at `shift`.
fn apply_on_columns(m: &ComplexMatrix, g: &[Complex64; 4], shift: usize) -> ComplexMatrix {
    let mask = 1usize << shift;
    let mut out = m.clone();
    for r in 0..m.rows() {
        let src = m.row(r);
        let dst = &mut out.as_mut_slice()[r * m.cols()..(r + 1) * m.cols()];
        for k0 in (0..src.len()).filter(|k| k & mask == 0) {
            let k1 = k0 | mask;
            let (x0, x1) = (src[k0], src[k1]);
            dst[k0] = x0 * g[0] + x1 * g[2];
            dst[k1] = x0 * g[1] + x1 * g[3];
        }
    }
    out
}

/// Diagonal of `S D sigma D^dagger S^dagger` as a quadratic form in a 2x2
/// matrix `D` acting on one qubit, so that each probe costs `O(dim)`.
struct GateResponse {
    /// `z[b][((c * 2 + a) * 2 + c') * 2 + a']`
    z: Vec<[Complex64; 16]>,
}

impl GateResponse {
    fn new(suffix: &ComplexMatrix, sigma: &ComplexMatrix, shift: usize) -> Self {
        let dim = suffix.rows();
        let half = dim / 2;
        let low = (1usize << shift) - 1;
        let index = |bit: usize, r: usize| ((r & !low) << 1) | (bit << shift) | (r & low);
        // sigma split into 2x2 blocks of half x half matrices
        let mut blocks = vec![vec![ZERO; half * half]; 4];
        for (a, a2) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let block = &mut blocks[a * 2 + a2];
            for r in 0..half {
                let row = sigma.row(index(a, r));
                for r2 in 0..half {
                    block[r * half + r2] = row[index(a2, r2)];
                }
            }
        }
        let mut z = vec![[ZERO; 16]; dim];
        let mut halves = [vec![ZERO; half], vec![ZERO; half]];
        let mut w = vec![ZERO; half];
        for (b, zb) in z.iter_mut().enumerate() {
            let row = suffix.row(b);
            for (c, v) in halves.iter_mut().enumerate() {
                for (r, x) in v.iter_mut().enumerate() {
                    *x = row[index(c, r)];
                }
            }
            for c in 0..2 {
                for a in 0..2 {
                    for a2 in 0..2 {
                        let block = &blocks[a * 2 + a2];
                        w.iter_mut().for_each(|x| *x = ZERO);
                        for (r, &s) in halves[c].iter().enumerate() {
                            if s == ZERO {
                                continue;
                            }
                            for (acc, &x) in w.iter_mut().zip(&block[r * half..(r + 1) * half]) {
                                *acc += s * x;
                            }
                        }
                        for c2 in 0..2 {
                            let dot: Complex64 = w.iter().zip(&halves[c2]).map(|(x, y)| x * y.conj()).sum();
                            zb[((c * 2 + a) * 2 + c2) * 2 + a2] = dot;
                        }
                    }
                }
            }
        }
        Self { z }
    }

    fn probabilities(&self, delta: &[Complex64; 4], out: &mut [f64]) {
        let mut coef = [ZERO; 16];
        for (i, c) in coef.iter_mut().enumerate() {
            *c = delta[i >> 2] * delta[i & 3].conj();
        }
        for (p, zb) in out.iter_mut().zip(&self.z) {
            *p = coef.iter().zip(zb).map(|(c, z)| (c * z).re).sum();
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
