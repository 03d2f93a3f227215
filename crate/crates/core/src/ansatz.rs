//! Parameterized unitaries: the universal Pauli-exponential ansatz and the
//! hardware-efficient brick-wall circuit.
//!
//! Brick-wall parameters are packed block-major, then by qubit, then as
//! `(phi, theta, omega)`. Block 1 acts on the state first.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{adjoint, eigh, expm_hermitian_generator, kron, mul, trace, ComplexMatrix, ONE};
use crate::pauli::{build_generator, enumerate_pauli_group, MAX_PAULI_QUBITS};

/// Parameters per single-qubit gate.
pub const GATE_PARAMS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnsatzKind {
    UniversalPauli,
    BrickWall,
}

impl AnsatzKind {
    pub fn name(self) -> &'static str {
        match self {
            AnsatzKind::UniversalPauli => "universal-pauli",
            AnsatzKind::BrickWall => "brick-wall",
        }
    }
}

impl fmt::Display for AnsatzKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AnsatzKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "universal-pauli" => Ok(AnsatzKind::UniversalPauli),
            "brick-wall" => Ok(AnsatzKind::BrickWall),
            other => Err(Error::InvalidArgument(format!("unknown ansatz kind {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AnsatzDescriptor {
    pub kind: AnsatzKind,
    pub n_qubits: usize,
    /// Number of brick-wall blocks; zero for the universal ansatz.
    pub blocks: usize,
}

impl AnsatzDescriptor {
    pub fn universal(n_qubits: usize) -> Result<Self> {
        let d = Self {
            kind: AnsatzKind::UniversalPauli,
            n_qubits,
            blocks: 0,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn brick_wall(n_qubits: usize, blocks: usize) -> Result<Self> {
        let d = Self {
            kind: AnsatzKind::BrickWall,
            n_qubits,
            blocks,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            AnsatzKind::UniversalPauli => {
                if !(1..=MAX_PAULI_QUBITS).contains(&self.n_qubits) {
                    return Err(Error::InvalidArgument(format!(
                        "universal ansatz supports 1..={MAX_PAULI_QUBITS} qubits, got {}",
                        self.n_qubits
                    )));
                }
            }
            AnsatzKind::BrickWall => {
                if !(1..=10).contains(&self.n_qubits) {
                    return Err(Error::InvalidArgument(format!(
                        "brick-wall ansatz supports 1..=10 qubits, got {}",
                        self.n_qubits
                    )));
                }
                if self.blocks == 0 {
                    return Err(Error::InvalidArgument("brick-wall ansatz needs at least one block".into()));
                }
            }
        }
        Ok(())
    }

    /// `4^N - 1` for the universal ansatz, `3 N m` for the brick wall.
    pub fn param_count(&self) -> usize {
        match self.kind {
            AnsatzKind::UniversalPauli => (1usize << (2 * self.n_qubits)) - 1,
            AnsatzKind::BrickWall => GATE_PARAMS * self.n_qubits * self.blocks,
        }
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }
}

/// A descriptor together with its flat parameter vector.
#[derive(Clone, Debug, PartialEq)]
pub struct AnsatzParams {
    descriptor: AnsatzDescriptor,
    theta: Vec<f64>,
}

impl AnsatzParams {
    pub fn new(descriptor: AnsatzDescriptor, theta: Vec<f64>) -> Result<Self> {
        descriptor.validate()?;
        if theta.len() != descriptor.param_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} ansatz on {} qubits needs {} parameters, got {}",
                descriptor.kind,
                descriptor.n_qubits,
                descriptor.param_count(),
                theta.len()
            )));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("non-finite ansatz parameter".into()));
        }
        Ok(Self { descriptor, theta })
    }

    pub fn zeros(descriptor: AnsatzDescriptor) -> Result<Self> {
        Self::new(descriptor, vec![0.0; descriptor.param_count()])
    }

    #[inline]
    pub fn descriptor(&self) -> &AnsatzDescriptor {
        &self.descriptor
    }

    #[inline]
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn into_theta(self) -> Vec<f64> {
        self.theta
    }

    /// The circuit unitary, whichever kind this is.
    pub fn unitary(&self) -> Result<ComplexMatrix> {
        match self.descriptor.kind {
            AnsatzKind::UniversalPauli => universal_pauli_circuit(self),
            AnsatzKind::BrickWall => brick_wall_circuit(self),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsRepr {
    kind: AnsatzKind,
    n_qubits: usize,
    #[serde(default)]
    blocks: usize,
    theta: Vec<f64>,
}

impl Serialize for AnsatzParams {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ParamsRepr {
            kind: self.descriptor.kind,
            n_qubits: self.descriptor.n_qubits,
            blocks: self.descriptor.blocks,
            theta: self.theta.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AnsatzParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = ParamsRepr::deserialize(d)?;
        let blocks = match r.kind {
            AnsatzKind::UniversalPauli => 0,
            AnsatzKind::BrickWall => r.blocks,
        };
        let descriptor = AnsatzDescriptor {
            kind: r.kind,
            n_qubits: r.n_qubits,
            blocks,
        };
        AnsatzParams::new(descriptor, r.theta).map_err(D::Error::custom)
    }
}

/// General single-qubit unitary
/// `[[c e^{-i(phi+omega)/2}, -s e^{i(phi-omega)/2}], [s e^{-i(phi-omega)/2}, c e^{i(phi+omega)/2}]]`
/// with `c = cos(theta/2)`, `s = sin(theta/2)`.
pub fn single_qubit_gate(phi: f64, theta: f64, omega: f64) -> ComplexMatrix {
    let g = gate_entries(phi, theta, omega);
    ComplexMatrix::from_rows(&[[g[0], g[1]], [g[2], g[3]]])
}

/// Row-major entries of [`single_qubit_gate`].
#[inline]
pub(crate) fn gate_entries(phi: f64, theta: f64, omega: f64) -> [Complex64; 4] {
    let (s, c) = (theta / 2.0).sin_cos();
    let sum = (phi + omega) / 2.0;
    let diff = (phi - omega) / 2.0;
    [
        Complex64::from_polar(c, -sum),
        Complex64::from_polar(-s, diff),
        Complex64::from_polar(s, -diff),
        Complex64::from_polar(c, sum),
    ]
}

/// Basis permutation of the CNOT ladder: `CNOT(1,2)` first, `CNOT(N-1,N)` last.
/// Returns `perm` with `L |b> = |perm[b]>`.
pub fn cnot_ladder_permutation(n: usize) -> Vec<usize> {
    let dim = 1usize << n;
    (0..dim)
        .map(|mut b| {
            for control in 1..n {
                let c_shift = n - control;
                let t_shift = n - control - 1;
                if (b >> c_shift) & 1 == 1 {
                    b ^= 1 << t_shift;
                }
            }
            b
        })
        .collect()
}

/// Left-multiplies `m` by the permutation matrix of `perm`.
pub(crate) fn permute_rows(m: &ComplexMatrix, perm: &[usize]) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(m.rows(), m.cols());
    let cols = m.cols();
    for (src, &dst) in perm.iter().enumerate() {
        out.as_mut_slice()[dst * cols..(dst + 1) * cols].copy_from_slice(m.row(src));
    }
    out
}

/// `G_1 (x) ... (x) G_N` for one block's parameters.
pub(crate) fn single_qubit_layer(n: usize, block_params: &[f64]) -> ComplexMatrix {
    let mut layer = ComplexMatrix::identity(1);
    for q in 0..n {
        let p = &block_params[GATE_PARAMS * q..GATE_PARAMS * (q + 1)];
        layer = kron(&layer, &single_qubit_gate(p[0], p[1], p[2]));
    }
    layer
}

/// One block: a layer of single-qubit gates followed by the CNOT ladder.
pub fn brick_wall_block(n: usize, block_params: &[f64]) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one qubit".into()));
    }
    if block_params.len() != GATE_PARAMS * n {
        return Err(Error::DimensionMismatch(format!(
            "block on {n} qubits needs {} parameters, got {}",
            GATE_PARAMS * n,
            block_params.len()
        )));
    }
    let layer = single_qubit_layer(n, block_params);
    Ok(permute_rows(&layer, &cnot_ladder_permutation(n)))
}

/// `B(Theta_m) ... B(Theta_1)`.
pub fn brick_wall_circuit(params: &AnsatzParams) -> Result<ComplexMatrix> {
    let d = params.descriptor;
    if d.kind != AnsatzKind::BrickWall {
        return Err(Error::InvalidArgument(format!(
            "expected a brick-wall ansatz, got {}",
            d.kind
        )));
    }
    let per_block = GATE_PARAMS * d.n_qubits;
    let mut u = ComplexMatrix::identity(d.dim());
    for block in params.theta.chunks(per_block) {
        u = mul(&brick_wall_block(d.n_qubits, block)?, &u)?;
    }
    Ok(u)
}

/// `exp(-i sum_g theta_g P_g)` over all non-identity Pauli strings.
pub fn universal_pauli_circuit(params: &AnsatzParams) -> Result<ComplexMatrix> {
    let d = params.descriptor;
    if d.kind != AnsatzKind::UniversalPauli {
        return Err(Error::InvalidArgument(format!(
            "expected a universal-pauli ansatz, got {}",
            d.kind
        )));
    }
    let group = enumerate_pauli_group(d.n_qubits)?;
    let h = build_generator(&params.theta, &group)?;
    expm_hermitian_generator(&h)
}

/// Universal-ansatz parameters `theta` with `exp(-i sum_g theta_g P_g) = u` up to a
/// global phase.
pub fn universal_params_from_unitary(u: &ComplexMatrix) -> Result<AnsatzParams> {
    u.require_square()?;
    let dim = u.rows();
    if !dim.is_power_of_two() || dim < 2 {
        return Err(Error::DimensionMismatch(format!("{dim} is not a multi-qubit dimension")));
    }
    let dev = u.unitary_deviation()?;
    if dev > 1e-8 {
        return Err(Error::NotUnitary(dev));
    }
    let n = dim.trailing_zeros() as usize;
    let descriptor = AnsatzDescriptor::universal(n)?;
    // The Hermitian and anti-Hermitian parts commute; a generic real mix of the
    // two shares the eigenvectors of `u` without merging distinct phases.
    let u_dag = adjoint(u);
    let herm = u.add(&u_dag)?.scale(Complex64::new(0.5, 0.0));
    let anti = u.sub(&u_dag)?.scale(Complex64::new(0.0, -0.5));
    let mix = herm.add(&anti.scale(Complex64::new(0.618_033_988_749_895, 0.0)))?;
    let eig = eigh(&mix)?;
    let v = &eig.eigenvectors;
    let uv = mul(u, v)?;
    let phases: Vec<f64> = (0..dim)
        .map(|k| {
            let mut z = Complex64::new(0.0, 0.0);
            for r in 0..dim {
                z += v[(r, k)].conj() * uv[(r, k)];
            }
            z.arg()
        })
        .collect();
    // u = V diag(e^{i a}) V^dagger = exp(-i H) with H = V diag(-a) V^dagger
    let mut h = ComplexMatrix::zeros(dim, dim);
    for (k, a) in phases.iter().enumerate() {
        for r in 0..dim {
            for c in 0..dim {
                h[(r, c)] -= v[(r, k)] * v[(c, k)].conj() * *a;
            }
        }
    }
    let group = enumerate_pauli_group(n)?;
    let theta: Vec<f64> = group
        .iter()
        .map(|p| {
            let mut acc = Complex64::new(0.0, 0.0);
            for col in 0..dim {
                let (row, phase) = p.action(col);
                acc += phase.conj() * h[(row, col)];
            }
            acc.re / dim as f64
        })
        .collect();
    let params = AnsatzParams::new(descriptor, theta)?;
    let rebuilt = params.unitary()?;
    let overlap = trace(&mul(&adjoint(&rebuilt), u)?)?;
    let phase = overlap / overlap.norm();
    let gap = rebuilt.scale(phase).max_abs_diff(u)?;
    if gap > 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "could not recover a Pauli generator for the unitary (residual {gap:.3e})"
        )));
    }
    Ok(params)
}

/// Dense CNOT with 1-based control and target.
pub fn cnot_matrix(n: usize, control: usize, target: usize) -> ComplexMatrix {
    let dim = 1usize << n;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for b in 0..dim {
        let flipped = if (b >> (n - control)) & 1 == 1 {
            b ^ (1 << (n - target))
        } else {
            b
        };
        m[(flipped, b)] = ONE;
    }
    m
}
