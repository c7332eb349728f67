//! Density-matrix states for one or two qubits.

use rand::Rng as _;

use crate::linalg::{ComplexMatrix, C64};
use crate::pauli::PauliString;
use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Unitarity tolerance for gate matrices handed to the simulator.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

fn check_qubits(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > 2 {
        return Err(Error::UnsupportedQubitCount(n_qubits));
    }
    Ok(())
}

pub fn check_targets(targets: &[usize], n_qubits: usize) -> Result<()> {
    let bad = targets.is_empty()
        || targets.iter().any(|&t| t >= n_qubits)
        || (1..targets.len()).any(|i| targets[..i].contains(&targets[i]));
    if bad {
        return Err(Error::BadTargets {
            targets: targets.to_vec(),
            n_qubits,
        });
    }
    Ok(())
}

/// Lifts a `2^k × 2^k` operator on `targets` to the full `n_qubits`
/// register. `targets[0]` is the most significant bit of the local index.
pub fn embed(u: &ComplexMatrix, targets: &[usize], n_qubits: usize) -> ComplexMatrix {
    let dim = 1usize << n_qubits;
    if targets.len() == n_qubits && targets.iter().enumerate().all(|(i, &t)| i == t) {
        return u.clone();
    }
    let bit = |idx: usize, q: usize| (idx >> (n_qubits - 1 - q)) & 1;
    let local = |idx: usize| targets.iter().fold(0usize, |acc, &t| (acc << 1) | bit(idx, t));
    let target_mask: usize = targets.iter().map(|&t| 1usize << (n_qubits - 1 - t)).sum();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            if r & !target_mask == c & !target_mask {
                out[(r, c)] = u[(local(r), local(c))];
            }
        }
    }
    out
}

/// `U ρ U†` for a full-register unitary.
pub fn conjugate(rho: &ComplexMatrix, u: &ComplexMatrix) -> ComplexMatrix {
    &(u * rho) * &u.adjoint()
}

/// Depolarizing map on `targets` applied to an arbitrary operator:
/// `(1 − p)ρ + p · 4^{-k} Σ_P P ρ P`, which equals `(1 − p)ρ + p · I/2^k ⊗ Tr_targets ρ`.
pub fn depolarize_operator(rho: &ComplexMatrix, p: f64, targets: &[usize], n_qubits: usize) -> ComplexMatrix {
    if p == 0.0 {
        return rho.clone();
    }
    let strings = PauliString::all(targets.len());
    let weight = p / strings.len() as f64;
    let mut out = rho.scale_real(1.0 - p);
    for s in &strings {
        let full = embed(&s.matrix(), targets, n_qubits);
        out = &out + &conjugate(rho, &full).scale_real(weight);
    }
    out
}

impl DensityMatrix {
    /// Pure computational basis state `|basis_index⟩⟨basis_index|`.
    pub fn new(n_qubits: usize, basis_index: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        if basis_index >= dim {
            return Err(Error::BasisIndexOutOfRange {
                index: basis_index,
                n_qubits,
            });
        }
        let mut matrix = ComplexMatrix::zeros(dim, dim);
        matrix[(basis_index, basis_index)] = C64::new(1.0, 0.0);
        Ok(Self { n_qubits, matrix })
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        Ok(Self {
            n_qubits,
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        })
    }

    pub fn from_pure(amplitudes: &[C64]) -> Result<Self> {
        let n_qubits = match amplitudes.len() {
            2 => 1,
            4 => 2,
            other => return Err(Error::DimensionMismatch { expected: 4, actual: other }),
        };
        Self::from_matrix(ComplexMatrix::outer(amplitudes, amplitudes))
            .map(|dm| Self { n_qubits, ..dm })
    }

    /// Validates Hermiticity (1e-12), unit trace (1e-9) and positivity (−1e-9).
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        let n_qubits = match (matrix.rows(), matrix.cols()) {
            (2, 2) => 1,
            (4, 4) => 2,
            (r, _) => return Err(Error::DimensionMismatch { expected: 4, actual: r }),
        };
        matrix.require_hermitian(1e-12)?;
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("density matrix trace {tr} != 1")));
        }
        let (values, _) = crate::linalg::eig_herm(&matrix)?;
        if values[0] < -1e-9 {
            return Err(Error::InvalidParameter(format!(
                "density matrix has negative eigenvalue {}",
                values[0]
            )));
        }
        Ok(Self { n_qubits, matrix })
    }

    /// Wraps a matrix produced by a trace-preserving channel without
    /// re-running the positivity check.
    pub(crate) fn from_channel_output(n_qubits: usize, matrix: ComplexMatrix) -> Self {
        debug_assert!((matrix.trace().re - 1.0).abs() < 1e-8);
        Self { n_qubits, matrix }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn apply_unitary(&self, u: &ComplexMatrix, targets: &[usize]) -> Result<Self> {
        check_targets(targets, self.n_qubits)?;
        let local_dim = 1usize << targets.len();
        if u.rows() != local_dim || u.cols() != local_dim {
            return Err(Error::DimensionMismatch {
                expected: local_dim,
                actual: u.rows(),
            });
        }
        u.require_unitary(UNITARY_TOL)?;
        let full = embed(u, targets, self.n_qubits);
        Ok(Self {
            n_qubits: self.n_qubits,
            matrix: conjugate(&self.matrix, &full),
        })
    }

    pub fn apply_depolarizing(&self, p: f64, targets: &[usize]) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
        check_targets(targets, self.n_qubits)?;
        Ok(Self {
            n_qubits: self.n_qubits,
            matrix: depolarize_operator(&self.matrix, p, targets, self.n_qubits),
        })
    }

    /// `Tr(P ρ)`.
    pub fn expectation(&self, pauli: &PauliString) -> Result<f64> {
        if pauli.len() != self.n_qubits {
            return Err(Error::PauliLengthMismatch {
                expected: self.n_qubits,
                actual: pauli.len(),
            });
        }
        let value = (&pauli.matrix() * &self.matrix).trace();
        assert!(value.im.abs() < 1e-9, "expectation has imaginary part {}", value.im);
        Ok(value.re)
    }

    pub fn population(&self, basis_index: usize) -> Result<f64> {
        if basis_index >= self.dim() {
            return Err(Error::BasisIndexOutOfRange {
                index: basis_index,
                n_qubits: self.n_qubits,
            });
        }
        Ok(self.matrix[(basis_index, basis_index)].re)
    }

    /// Diagonal of ρ clamped to [0, 1] and renormalized.
    pub fn probabilities(&self) -> Vec<f64> {
        let raw: Vec<f64> = (0..self.dim())
            .map(|i| self.matrix[(i, i)].re.clamp(0.0, 1.0))
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / total).collect()
    }

    /// Multinomial sample of `shots` measurements in the computational
    /// basis, by inverse CDF on the diagonal. Entry `i` counts outcome `i`.
    pub fn sample_counts(&self, shots: u64, rng_seed: u64) -> Vec<u64> {
        let mut rng = rng_from_seed(rng_seed);
        self.sample_counts_with(shots, &mut rng)
    }

    pub fn sample_counts_with(&self, shots: u64, rng: &mut crate::rng::Rng) -> Vec<u64> {
        let probs = self.probabilities();
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cdf.push(acc);
        }
        let mut counts = vec![0u64; probs.len()];
        for _ in 0..shots {
            let u: f64 = rng.random();
            let idx = cdf.iter().position(|&c| u < c).unwrap_or_else(|| {
                // u landed above a cdf that summed to 1 − ulp; take the last
                // outcome with nonzero weight.
                probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
            });
            counts[idx] += 1;
        }
        counts
    }
}
