//! N-qubit Pauli strings and the Hermitian generator of the universal ansatz.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix, ONE, ZERO};

/// Largest qubit count accepted by [`enumerate_pauli_group`].
pub const MAX_PAULI_QUBITS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_digit(d: usize) -> Pauli {
        Self::ALL[d]
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn matrix(self) -> ComplexMatrix {
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => ComplexMatrix::identity(2),
            Pauli::X => ComplexMatrix::from_rows(&[[ZERO, ONE], [ONE, ZERO]]),
            Pauli::Y => ComplexMatrix::from_rows(&[[ZERO, -i], [i, ZERO]]),
            Pauli::Z => ComplexMatrix::from_rows(&[[ONE, ZERO], [ZERO, -ONE]]),
        }
    }

    /// Action on a single computational-basis bit: `sigma |b> = phase |b'>`.
    #[inline]
    fn act(self, bit: bool) -> (bool, Complex64) {
        match (self, bit) {
            (Pauli::I, b) => (b, ONE),
            (Pauli::X, b) => (!b, ONE),
            (Pauli::Y, false) => (true, Complex64::new(0.0, 1.0)),
            (Pauli::Y, true) => (false, Complex64::new(0.0, -1.0)),
            (Pauli::Z, false) => (false, ONE),
            (Pauli::Z, true) => (true, -ONE),
        }
    }
}

/// A tensor product of single-qubit Paulis. Letter 0 acts on qubit 1, the most
/// significant bit of a basis index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidArgument("empty Pauli string".into()));
        }
        Ok(Self { letters })
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    /// Column action: `P |col> = phase |row>`. Every Pauli string is a
    /// monomial matrix, so this is its whole content.
    pub fn action(&self, col: usize) -> (usize, Complex64) {
        let n = self.letters.len();
        let mut row = 0usize;
        let mut phase = ONE;
        for (k, &p) in self.letters.iter().enumerate() {
            let shift = n - 1 - k;
            let (bit, ph) = p.act((col >> shift) & 1 == 1);
            row |= (bit as usize) << shift;
            phase *= ph;
        }
        (row, phase)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|ch| match ch {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::InvalidArgument(format!("invalid Pauli letter {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        PauliString::new(letters)
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// All non-identity Pauli strings on `n` qubits in base-4 counting order
/// (I=0, X=1, Y=2, Z=3, last letter least significant).
pub fn enumerate_pauli_group(n: usize) -> Result<Vec<PauliString>> {
    if !(1..=MAX_PAULI_QUBITS).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "Pauli enumeration needs 1 <= n <= {MAX_PAULI_QUBITS}, got {n}"
        )));
    }
    let count = 1usize << (2 * n);
    Ok((1..count)
        .map(|g| {
            let letters = (0..n)
                .map(|k| Pauli::from_digit((g >> (2 * (n - 1 - k))) & 3))
                .collect();
            PauliString { letters }
        })
        .collect())
}

/// Dense matrix by left-to-right Kronecker products.
pub fn pauli_to_matrix(p: &PauliString) -> ComplexMatrix {
    let mut iter = p.letters.iter();
    let first = iter.next().expect("non-empty").matrix();
    iter.fold(first, |acc, q| kron(&acc, &q.matrix()))
}

/// `sum_g theta_g P_g`.
pub fn build_generator(thetas: &[f64], strings: &[PauliString]) -> Result<ComplexMatrix> {
    if thetas.len() != strings.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} Pauli strings",
            thetas.len(),
            strings.len()
        )));
    }
    let Some(first) = strings.first() else {
        return Err(Error::InvalidArgument("no Pauli strings supplied".into()));
    };
    let n = first.n_qubits();
    if strings.iter().any(|s| s.n_qubits() != n) {
        return Err(Error::DimensionMismatch("Pauli strings of mixed length".into()));
    }
    let dim = 1usize << n;
    let mut h = ComplexMatrix::zeros(dim, dim);
    for (&theta, p) in thetas.iter().zip(strings) {
        if theta == 0.0 {
            continue;
        }
        for col in 0..dim {
            let (row, phase) = p.action(col);
            h[(row, col)] += phase * theta;
        }
    }
    Ok(h)
}
