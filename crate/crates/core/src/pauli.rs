//! Pauli strings over one or two qubits.
//!
//! The first character acts on qubit 0, the top wire of a circuit diagram,
//! which is also the most significant bit of a basis index: `|q0 q1⟩` has
//! index `2·q0 + q1`.

use std::fmt;
use std::str::FromStr;

use crate::linalg::{pauli_i, pauli_x, pauli_y, pauli_z, ComplexMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> ComplexMatrix {
        match self {
            Pauli::I => pauli_i(),
            Pauli::X => pauli_x(),
            Pauli::Y => pauli_y(),
            Pauli::Z => pauli_z(),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// Symplectic (x, z) bits, with Y = (1, 1).
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(paulis: Vec<Pauli>) -> Result<Self> {
        if paulis.is_empty() {
            return Err(Error::InvalidPauli(String::new()));
        }
        Ok(Self(paulis))
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self(vec![Pauli::I; n_qubits])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn paulis(&self) -> &[Pauli] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    /// Dense matrix; qubit 0 is the most significant tensor factor.
    pub fn matrix(&self) -> ComplexMatrix {
        self.0
            .iter()
            .skip(1)
            .fold(self.0[0].matrix(), |acc, p| acc.kron(&p.matrix()))
    }

    /// All 4^n strings on `n` qubits in lexicographic I < X < Y < Z order.
    pub fn all(n_qubits: usize) -> Vec<PauliString> {
        let mut out = vec![Vec::new()];
        for _ in 0..n_qubits {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<Pauli>| {
                    Pauli::ALL.iter().map(move |&p| {
                        let mut v = prefix.clone();
                        v.push(p);
                        v
                    })
                })
                .collect();
        }
        out.into_iter().map(PauliString).collect()
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let paulis: Option<Vec<Pauli>> = s.chars().map(Pauli::from_char).collect();
        match paulis {
            Some(p) if !p.is_empty() => Ok(Self(p)),
            _ => Err(Error::InvalidPauli(s.to_string())),
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}
