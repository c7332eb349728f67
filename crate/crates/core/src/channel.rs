//! Mixed-unitary channels with trailing depolarizing noise, and channel
//! fidelity.

use crate::density::{check_targets, conjugate, depolarize_operator, embed, DensityMatrix, UNITARY_TOL};
use crate::linalg::{ComplexMatrix, C64};
use crate::{Error, Result};

/// `ρ ↦ D_p(Σ_k w_k U_k ρ U_k†)` on `log2(dim)` qubits, where `D_p` is the
/// depolarizing map with probability `p`.
///
/// Completely positive and trace preserving by construction: the weights
/// are a probability distribution and every branch is unitary.
#[derive(Debug, Clone)]
pub struct MixedUnitaryChannel {
    branches: Vec<(f64, ComplexMatrix)>,
    depolarizing: f64,
    n_qubits: usize,
}

impl MixedUnitaryChannel {
    pub fn new(branches: Vec<(f64, ComplexMatrix)>, depolarizing: f64) -> Result<Self> {
        let Some((_, first)) = branches.first() else {
            return Err(Error::InvalidParameter("channel needs at least one branch".into()));
        };
        let dim = first.rows();
        let n_qubits = dim.trailing_zeros() as usize;
        if dim == 0 || 1 << n_qubits != dim {
            return Err(Error::DimensionMismatch { expected: 2, actual: dim });
        }
        if !(0.0..=1.0).contains(&depolarizing) {
            return Err(Error::ProbabilityOutOfRange(depolarizing));
        }
        let mut total = 0.0;
        for (w, u) in &branches {
            if !(0.0..=1.0).contains(w) {
                return Err(Error::ProbabilityOutOfRange(*w));
            }
            if u.rows() != dim || u.cols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: u.rows() });
            }
            u.require_unitary(UNITARY_TOL)?;
            total += w;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("branch weights sum to {total}, not 1")));
        }
        Ok(Self {
            branches,
            depolarizing,
            n_qubits,
        })
    }

    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![(1.0, u)], 0.0)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn branches(&self) -> &[(f64, ComplexMatrix)] {
        &self.branches
    }

    pub fn depolarizing(&self) -> f64 {
        self.depolarizing
    }

    /// Applies the channel to an arbitrary (not necessarily physical)
    /// operator on an `n_qubits` register. Linear in `rho`.
    pub fn apply_operator(&self, rho: &ComplexMatrix, targets: &[usize], n_qubits: usize) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(rho.rows(), rho.cols());
        for (w, u) in &self.branches {
            let full = embed(u, targets, n_qubits);
            out = &out + &conjugate(rho, &full).scale_real(*w);
        }
        depolarize_operator(&out, self.depolarizing, targets, n_qubits)
    }

    pub fn apply(&self, dm: &DensityMatrix, targets: &[usize]) -> Result<DensityMatrix> {
        check_targets(targets, dm.n_qubits())?;
        if targets.len() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                actual: targets.len(),
            });
        }
        let out = self.apply_operator(dm.matrix(), targets, dm.n_qubits());
        Ok(DensityMatrix::from_channel_output(dm.n_qubits(), out))
    }
}

/// Entanglement fidelity of `channel` against the ideal unitary:
/// `F_e = d^{-2} Σ_{ij} ⟨i| U† E(|i⟩⟨j|) U |j⟩`.
pub fn entanglement_fidelity<F>(channel: F, ideal: &ComplexMatrix) -> f64
where
    F: Fn(&ComplexMatrix) -> ComplexMatrix,
{
    let d = ideal.rows();
    let u_dag = ideal.adjoint();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            let mut basis = ComplexMatrix::zeros(d, d);
            basis[(i, j)] = C64::new(1.0, 0.0);
            let out = &(&u_dag * &channel(&basis)) * ideal;
            acc += out[(i, j)];
        }
    }
    acc.re / (d * d) as f64
}

/// Average gate fidelity `(d·F_e + 1)/(d + 1)`.
pub fn avg_gate_fidelity(channel: &MixedUnitaryChannel, ideal: &ComplexMatrix) -> Result<f64> {
    let d = 1usize << channel.n_qubits();
    if ideal.rows() != d || ideal.cols() != d {
        return Err(Error::DimensionMismatch { expected: d, actual: ideal.rows() });
    }
    let targets: Vec<usize> = (0..channel.n_qubits()).collect();
    let fe = entanglement_fidelity(|m| channel.apply_operator(m, &targets, channel.n_qubits()), ideal);
    Ok((d as f64 * fe + 1.0) / (d as f64 + 1.0))
}
