//! Pauli-twirl oracle built from process matrices, independent of the
//! circuit module's frame machinery.
//!
//! A noisy CNOT block `C` is written as `N ∘ CNOT` with `N = C ∘ CNOT⁻¹`.
//! Twirling `C` over the two-qubit Paulis leaves `CNOT` alone and replaces
//! `N` by its Pauli-diagonal part `ρ ↦ Σ_Q λ_Q Tr(Qρ)/4 · Q`, where
//! `λ_Q = Tr(Q N(Q))/4`.

#![allow(dead_code)]

use std::f64::consts::PI;

use hinv::circuit::{simulate_operator, Circuit, CompileMode};
use hinv::gates::{cnot_inverse, cnot_native, Gate, MsNoiseParams, SqNoiseParams};
use hinv::vqe::{energy, h2_hamiltonian, ExpectationSet};
use hinv::{ComplexMatrix, DensityMatrix, PauliString};

/// CNOT with control qubit 1 and target qubit 0 (qubit 0 most significant).
pub fn cnot_bottom_control() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4, 4);
    for (i, j) in [(0, 0), (1, 3), (2, 2), (3, 1)] {
        m[(i, j)] = hinv::C64::new(1.0, 0.0);
    }
    m
}

fn circuit_of(gates: &[Gate]) -> Circuit {
    let mut c = Circuit::new(2, CompileMode::Default).unwrap();
    for g in gates {
        c.push_gate(g.clone()).unwrap();
    }
    c
}

fn apply(c: &Circuit, ms: &MsNoiseParams, rho: &ComplexMatrix) -> ComplexMatrix {
    simulate_operator(c, &SqNoiseParams::zero(), ms, rho).unwrap()
}

/// Pauli-twirled version of a noisy CNOT block, as a map on 4×4 operators.
pub struct TwirledBlock {
    lambdas: Vec<(PauliString, f64)>,
    cnot: ComplexMatrix,
}

impl TwirledBlock {
    pub fn new(block: &[Gate], ms: &MsNoiseParams) -> Self {
        let c = circuit_of(block);
        let cnot = cnot_bottom_control();
        let lambdas = PauliString::all(2)
            .into_iter()
            .map(|q| {
                let qm = q.matrix();
                // N(Q) = C(CNOT† Q CNOT)
                let pre = &(&cnot.adjoint() * &qm) * &cnot;
                let nq = apply(&c, ms, &pre);
                let lambda = (&qm * &nq).trace().re / 4.0;
                (q, lambda)
            })
            .collect();
        Self { lambdas, cnot }
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let after = &(&self.cnot * rho) * &self.cnot.adjoint();
        self.lambdas.iter().fold(ComplexMatrix::zeros(4, 4), |acc, (q, l)| {
            let qm = q.matrix();
            let coeff = (&qm * &after).trace() * (l / 4.0);
            &acc + &qm.scale(coeff)
        })
    }

    pub fn lambdas(&self) -> &[(PauliString, f64)] {
        &self.lambdas
    }
}

/// The ansatz split around its two CNOT blocks.
pub struct AnsatzParts {
    pub pre: Vec<Gate>,
    pub first: Vec<Gate>,
    pub mid: Vec<Gate>,
    pub second: Vec<Gate>,
    pub post: Vec<Gate>,
}

pub fn ansatz_parts(alpha: f64, mode: CompileMode) -> AnsatzParts {
    AnsatzParts {
        pre: vec![Gate::rx(1, PI), Gate::ry(1, PI / 2.0), Gate::rx(0, -PI / 2.0)],
        first: cnot_native(1, 0).unwrap().into_gates(),
        mid: vec![Gate::rz(0, alpha)],
        second: match mode {
            CompileMode::Default => cnot_native(1, 0).unwrap().into_gates(),
            CompileMode::HiddenInverse => cnot_inverse(1, 0).unwrap().into_gates(),
        },
        post: vec![Gate::rx(0, PI / 2.0), Gate::ry(1, -PI / 2.0)],
    }
}

/// Final state of the ansatz with both CNOT blocks replaced by their Pauli
/// twirls.
pub fn twirled_ansatz_state(alpha: f64, mode: CompileMode, ms: &MsNoiseParams) -> DensityMatrix {
    let parts = ansatz_parts(alpha, mode);
    let ideal = MsNoiseParams::ideal();
    let mut rho = DensityMatrix::new(2, 0).unwrap().into_matrix();
    rho = apply(&circuit_of(&parts.pre), &ideal, &rho);
    rho = TwirledBlock::new(&parts.first, ms).apply(&rho);
    rho = apply(&circuit_of(&parts.mid), &ideal, &rho);
    rho = TwirledBlock::new(&parts.second, ms).apply(&rho);
    rho = apply(&circuit_of(&parts.post), &ideal, &rho);
    DensityMatrix::from_matrix(rho).unwrap()
}

pub fn twirled_ansatz_energy(alpha: f64, mode: CompileMode, ms: &MsNoiseParams) -> f64 {
    let dm = twirled_ansatz_state(alpha, mode, ms);
    energy(&ExpectationSet::from_density(&dm).unwrap(), &h2_hamiltonian()).unwrap()
}
