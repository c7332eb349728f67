//! Circuit IR, density-matrix simulation, and Pauli twirling of hard gates.
//!
//! A [`Circuit`] is a list of native gates. Composite two-qubit gates (the
//! CNOT blocks) are fenced by `HardBegin`/`HardEnd` markers so randomized
//! compiling can surround them with Pauli frames. Frames are applied as
//! ideal Pauli operators.
//!
//! # Text form
//!
//! One instruction per line, whitespace separated:
//!
//! ```text
//! QUBITS 2
//! MODE default
//! RX -1.5707963267948966 0
//! HARD_BEGIN 1 0
//! XX 1.5707963267948966 1 0
//! HARD_END
//! FRAME XZ 0 1
//! ```
//!
//! `QUBITS` and `MODE` (`default` or `hidden_inverse`) head the file. Gate
//! lines are `KIND angle targets...` with `KIND` one of `RX RY RZ XX` and the
//! angle in radians printed in shortest round-trip form. `HARD_BEGIN control
//! target` and `HARD_END` fence a CNOT block. `FRAME paulis qubits...`
//! applies an ideal Pauli string, one letter per listed qubit. Blank lines
//! and lines starting with `#` are ignored.

use std::fmt::Write as _;

use rand::seq::index;

use crate::density::{check_targets, conjugate, embed, DensityMatrix};
use crate::gates::{noisy_xx_channel, xx_for_phonon, Gate, GateKind, GateSeq, MsMode, MsNoiseParams, SqNoiseParams};
use crate::linalg::ComplexMatrix;
use crate::pauli::{Pauli, PauliString};
use crate::rng::rng_from_seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CompileMode {
    #[default]
    Default,
    HiddenInverse,
}

impl CompileMode {
    pub fn name(self) -> &'static str {
        match self {
            CompileMode::Default => "default",
            CompileMode::HiddenInverse => "hidden_inverse",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "default" => Some(CompileMode::Default),
            "hidden_inverse" => Some(CompileMode::HiddenInverse),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    Gate(Gate),
    HardBegin { control: usize, target: usize },
    HardEnd,
    Frame { paulis: PauliString, qubits: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    ops: Vec<Op>,
    mode: CompileMode,
}

/// Location of one fenced hard gate in a circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HardGate {
    pub begin: usize,
    pub end: usize,
    pub control: usize,
    pub target: usize,
}

impl Circuit {
    pub fn new(n_qubits: usize, mode: CompileMode) -> Result<Self> {
        if n_qubits == 0 || n_qubits > 2 {
            return Err(Error::UnsupportedQubitCount(n_qubits));
        }
        Ok(Self {
            n_qubits,
            ops: Vec::new(),
            mode,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn mode(&self) -> CompileMode {
        self.mode
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn gate_count(&self) -> usize {
        self.ops.iter().filter(|op| matches!(op, Op::Gate(_))).count()
    }

    pub fn push_gate(&mut self, gate: Gate) -> Result<()> {
        check_targets(&gate.targets, self.n_qubits)?;
        if gate.targets.len() != gate.kind.arity() {
            return Err(Error::BadTargets { targets: gate.targets, n_qubits: self.n_qubits });
        }
        self.ops.push(Op::Gate(gate));
        Ok(())
    }

    pub fn push_seq(&mut self, seq: &GateSeq) -> Result<()> {
        for g in seq.gates() {
            self.push_gate(g.clone())?;
        }
        Ok(())
    }

    /// Appends a CNOT decomposition fenced as a hard gate.
    pub fn push_hard(&mut self, control: usize, target: usize, seq: &GateSeq) -> Result<()> {
        check_targets(&[control, target], self.n_qubits)?;
        self.ops.push(Op::HardBegin { control, target });
        self.push_seq(seq)?;
        self.ops.push(Op::HardEnd);
        Ok(())
    }

    pub fn push_frame(&mut self, paulis: PauliString, qubits: Vec<usize>) -> Result<()> {
        check_targets(&qubits, self.n_qubits)?;
        if paulis.len() != qubits.len() {
            return Err(Error::PauliLengthMismatch { expected: qubits.len(), actual: paulis.len() });
        }
        self.ops.push(Op::Frame { paulis, qubits });
        Ok(())
    }

    /// Concatenates `other` after `self`.
    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, actual: other.n_qubits });
        }
        self.ops.extend(other.ops.iter().cloned());
        Ok(())
    }

    /// Hard-gate fences in order. Fails if the markers are unbalanced.
    pub fn hard_gates(&self) -> Result<Vec<HardGate>> {
        let mut out = Vec::new();
        let mut open: Option<(usize, usize, usize)> = None;
        for (i, op) in self.ops.iter().enumerate() {
            match op {
                Op::HardBegin { control, target } => {
                    if open.is_some() {
                        return Err(Error::InvalidParameter("nested hard-gate fence".into()));
                    }
                    open = Some((i, *control, *target));
                }
                Op::HardEnd => {
                    let (begin, control, target) = open
                        .take()
                        .ok_or_else(|| Error::InvalidParameter("unmatched HARD_END".into()))?;
                    out.push(HardGate { begin, end: i, control, target });
                }
                _ => {}
            }
        }
        if open.is_some() {
            return Err(Error::InvalidParameter("unterminated hard-gate fence".into()));
        }
        Ok(out)
    }

    /// Full-register unitary with coherent single-qubit noise and ideal MS
    /// gates. Frames are included.
    pub fn unitary(&self, sq: &SqNoiseParams) -> ComplexMatrix {
        let mut u = ComplexMatrix::identity(1 << self.n_qubits);
        for op in &self.ops {
            let local = match op {
                Op::Gate(g) => Some((g.noisy_matrix(sq), g.targets.as_slice())),
                Op::Frame { paulis, qubits } => Some((paulis.matrix(), qubits.as_slice())),
                _ => None,
            };
            if let Some((m, targets)) = local {
                u = &embed(&m, targets, self.n_qubits) * &u;
            }
        }
        u
    }

    /// Inserts one twirl frame per hard gate. `frames.len()` must equal the
    /// number of hard gates.
    pub fn twirled(&self, frames: &[TwirlFrame]) -> Result<Circuit> {
        let hard = self.hard_gates()?;
        if hard.len() != frames.len() {
            return Err(Error::DimensionMismatch { expected: hard.len(), actual: frames.len() });
        }
        let all_qubits: Vec<usize> = (0..self.n_qubits).collect();
        let mut ops = Vec::with_capacity(self.ops.len() + 2 * frames.len());
        let mut k = 0;
        for (i, op) in self.ops.iter().enumerate() {
            if k < hard.len() && hard[k].begin == i {
                ops.push(Op::Frame { paulis: frames[k].pre.clone(), qubits: all_qubits.clone() });
            }
            ops.push(op.clone());
            if k < hard.len() && hard[k].end == i {
                ops.push(Op::Frame { paulis: frames[k].post.clone(), qubits: all_qubits.clone() });
                k += 1;
            }
        }
        Ok(Circuit { n_qubits: self.n_qubits, ops, mode: self.mode })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "QUBITS {}", self.n_qubits).unwrap();
        writeln!(s, "MODE {}", self.mode.name()).unwrap();
        for op in &self.ops {
            match op {
                Op::Gate(g) => {
                    write!(s, "{} {:?}", g.kind.name(), g.angle).unwrap();
                    for t in &g.targets {
                        write!(s, " {t}").unwrap();
                    }
                    s.push('\n');
                }
                Op::HardBegin { control, target } => writeln!(s, "HARD_BEGIN {control} {target}").unwrap(),
                Op::HardEnd => s.push_str("HARD_END\n"),
                Op::Frame { paulis, qubits } => {
                    write!(s, "FRAME {paulis}").unwrap();
                    for q in qubits {
                        write!(s, " {q}").unwrap();
                    }
                    s.push('\n');
                }
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let err = |line: usize, message: &str| Error::CircuitParse { line, message: message.to_string() };
        let parse_usize = |line: usize, tok: &str| tok.parse::<usize>().map_err(|_| err(line, &format!("bad qubit index {tok:?}")));
        let mut n_qubits = None;
        let mut mode = CompileMode::Default;
        let mut circuit: Option<Circuit> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[0] {
                "QUBITS" => {
                    let n = toks.get(1).ok_or_else(|| err(line_no, "QUBITS needs a count"))?;
                    n_qubits = Some(parse_usize(line_no, n)?);
                }
                "MODE" => {
                    let m = toks.get(1).ok_or_else(|| err(line_no, "MODE needs a value"))?;
                    mode = CompileMode::from_name(m).ok_or_else(|| err(line_no, "unknown MODE"))?;
                }
                kw => {
                    if circuit.is_none() {
                        let n = n_qubits.ok_or_else(|| err(line_no, "QUBITS header missing"))?;
                        circuit = Some(Circuit::new(n, mode).map_err(|e| err(line_no, &e.to_string()))?);
                    }
                    let c = circuit.as_mut().unwrap();
                    let wrap = |e: Error| err(line_no, &e.to_string());
                    match kw {
                        "HARD_BEGIN" if toks.len() == 3 => {
                            let control = parse_usize(line_no, toks[1])?;
                            let target = parse_usize(line_no, toks[2])?;
                            check_targets(&[control, target], c.n_qubits).map_err(wrap)?;
                            c.ops.push(Op::HardBegin { control, target });
                        }
                        "HARD_END" if toks.len() == 1 => c.ops.push(Op::HardEnd),
                        "FRAME" if toks.len() >= 3 => {
                            let paulis: PauliString = toks[1].parse().map_err(wrap)?;
                            let qubits = toks[2..]
                                .iter()
                                .map(|t| parse_usize(line_no, t))
                                .collect::<Result<Vec<_>>>()?;
                            c.push_frame(paulis, qubits).map_err(wrap)?;
                        }
                        _ => {
                            let kind = GateKind::from_name(kw).ok_or_else(|| err(line_no, &format!("unknown instruction {kw:?}")))?;
                            if toks.len() != 2 + kind.arity() {
                                return Err(err(line_no, "wrong number of operands"));
                            }
                            let angle: f64 = toks[1].parse().map_err(|_| err(line_no, "bad angle"))?;
                            let targets = toks[2..]
                                .iter()
                                .map(|t| parse_usize(line_no, t))
                                .collect::<Result<Vec<_>>>()?;
                            c.push_gate(Gate { kind, angle, targets }).map_err(wrap)?;
                        }
                    }
                }
            }
        }
        let circuit = match circuit {
            Some(c) => c,
            None => Circuit::new(n_qubits.ok_or_else(|| err(0, "QUBITS header missing"))?, mode)?,
        };
        circuit.hard_gates().map_err(|e| err(0, &e.to_string()))?;
        Ok(circuit)
    }
}

fn apply_ops(
    circuit: &Circuit,
    sq: &SqNoiseParams,
    ms: &MsNoiseParams,
    phonon: Option<usize>,
    rho: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let n = circuit.n_qubits;
    let mut rho = rho.clone();
    for op in &circuit.ops {
        match op {
            Op::Gate(g) if g.kind == GateKind::Xx => {
                let ch = match phonon {
                    Some(k) => xx_for_phonon(g.angle, ms, k)?,
                    None => noisy_xx_channel(g.angle, ms)?,
                };
                rho = ch.apply_operator(&rho, &g.targets, n);
            }
            Op::Gate(g) => rho = conjugate(&rho, &embed(&g.noisy_matrix(sq), &g.targets, n)),
            Op::Frame { paulis, qubits } => rho = conjugate(&rho, &embed(&paulis.matrix(), qubits, n)),
            Op::HardBegin { .. } | Op::HardEnd => {}
        }
    }
    Ok(rho)
}

/// Runs `circuit` on `initial`, left to right.
///
/// RX/RY carry the coherent single-qubit noise `sq`; RZ and frames are
/// ideal; XX gates go through the MS channel. With [`MsMode::Sampled`] the
/// result is the shot-ensemble average, in which every MS gate of a shot
/// shares one thermal phonon number.
pub fn simulate(
    circuit: &Circuit,
    sq: &SqNoiseParams,
    ms: &MsNoiseParams,
    initial: &DensityMatrix,
) -> Result<DensityMatrix> {
    let out = simulate_operator(circuit, sq, ms, initial.matrix())?;
    Ok(DensityMatrix::from_channel_output(circuit.n_qubits, out))
}

/// The linear map of [`simulate`] applied to an arbitrary operator.
pub fn simulate_operator(
    circuit: &Circuit,
    sq: &SqNoiseParams,
    ms: &MsNoiseParams,
    rho: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let dim = 1usize << circuit.n_qubits;
    if rho.rows() != dim || rho.cols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, actual: rho.rows() });
    }
    sq.validate()?;
    ms.validate()?;
    if ms.mode == MsMode::Sampled && !ms.is_ideal() && has_xx(circuit) {
        let dist = ms.phonon_distribution();
        let total: f64 = dist.iter().map(|(_, p)| p).sum();
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for (n, p) in dist {
            let out = apply_ops(circuit, sq, ms, Some(n), rho)?;
            acc = &acc + &out.scale_real(p / total);
        }
        return Ok(acc);
    }
    apply_ops(circuit, sq, ms, None, rho)
}

/// Simulation with every MS gate driven at a fixed phonon number.
pub fn simulate_with_phonon(
    circuit: &Circuit,
    sq: &SqNoiseParams,
    ms: &MsNoiseParams,
    initial: &DensityMatrix,
    phonon: usize,
) -> Result<DensityMatrix> {
    let dim = 1usize << circuit.n_qubits;
    if initial.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, actual: initial.dim() });
    }
    let out = apply_ops(circuit, sq, ms, Some(phonon), initial.matrix())?;
    Ok(DensityMatrix::from_channel_output(circuit.n_qubits, out))
}

fn has_xx(circuit: &Circuit) -> bool {
    circuit
        .ops
        .iter()
        .any(|op| matches!(op, Op::Gate(g) if g.kind == GateKind::Xx))
}

/// `CNOT · P · CNOT† = sign · P'` for a two-qubit Pauli string `p` in
/// register order (first letter on qubit 0).
///
/// Uses symplectic bit updates (`x_t ^= x_c`, `z_c ^= z_t`) with the
/// Aaronson–Gottesman phase rule.
pub fn conjugate_pauli_through_cnot(p: &PauliString, control: usize, target: usize) -> Result<(PauliString, i8)> {
    if p.len() != 2 {
        return Err(Error::PauliLengthMismatch { expected: 2, actual: p.len() });
    }
    if control > 1 || target > 1 || control == target {
        return Err(Error::BadTargets { targets: vec![control, target], n_qubits: 2 });
    }
    let (xc, zc) = p.paulis()[control].bits();
    let (xt, zt) = p.paulis()[target].bits();
    let flip = xc && zt && !(xt ^ zc);
    let new_c = Pauli::from_bits(xc, zc ^ zt);
    let new_t = Pauli::from_bits(xt ^ xc, zt);
    let mut out = vec![Pauli::I; 2];
    out[control] = new_c;
    out[target] = new_t;
    Ok((PauliString::new(out)?, if flip { -1 } else { 1 }))
}

/// Pauli frame around one hard gate: `pre` before, `post` after, with
/// `post · CNOT · pre = sign · CNOT`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwirlFrame {
    pub pre: PauliString,
    pub post: PauliString,
    pub sign: i8,
}

impl TwirlFrame {
    pub fn for_cnot(pre: PauliString, control: usize, target: usize) -> Result<Self> {
        let (post, sign) = conjugate_pauli_through_cnot(&pre, control, target)?;
        Ok(Self { pre, post, sign })
    }
}

/// Maximum number of hard gates accepted by [`enumerate_twirls`].
pub const MAX_TWIRLED_HARD_GATES: usize = 2;

/// All `16^k` Pauli-twirled variants of a circuit with `k ≤ 2` hard gates,
/// in lexicographic frame order (first hard gate slowest).
pub fn enumerate_twirls(circuit: &Circuit) -> Result<Vec<Circuit>> {
    let hard = circuit.hard_gates()?;
    if hard.len() > MAX_TWIRLED_HARD_GATES {
        return Err(Error::TooManyHardGates(hard.len()));
    }
    if hard.is_empty() {
        return Ok(vec![circuit.clone()]);
    }
    if circuit.n_qubits != 2 {
        return Err(Error::UnsupportedQubitCount(circuit.n_qubits));
    }
    let paulis = PauliString::all(2);
    let mut combos: Vec<Vec<TwirlFrame>> = vec![Vec::new()];
    for h in &hard {
        let mut next = Vec::with_capacity(combos.len() * paulis.len());
        for prefix in &combos {
            for p in &paulis {
                let mut v = prefix.clone();
                v.push(TwirlFrame::for_cnot(p.clone(), h.control, h.target)?);
                next.push(v);
            }
        }
        combos = next;
    }
    combos.iter().map(|frames| circuit.twirled(frames)).collect()
}

/// Uniform sample of `m` items without replacement, deterministic in
/// `rng_seed`.
pub fn sample_twirls(all: &[Circuit], m: usize, rng_seed: u64) -> Result<Vec<Circuit>> {
    if m > all.len() {
        return Err(Error::SampleTooLarge { requested: m, available: all.len() });
    }
    let mut rng = rng_from_seed(rng_seed);
    Ok(index::sample(&mut rng, all.len(), m)
        .into_iter()
        .map(|i| all[i].clone())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{cnot_inverse, cnot_native, h_native};
    use crate::linalg::C64;
    use std::f64::consts::PI;

    fn two_cnot_circuit(mode: CompileMode) -> Circuit {
        let mut c = Circuit::new(2, mode).unwrap();
        c.push_gate(Gate::ry(1, 0.3)).unwrap();
        c.push_hard(1, 0, &cnot_native(1, 0).unwrap()).unwrap();
        c.push_gate(Gate::rz(0, 0.7)).unwrap();
        let second = match mode {
            CompileMode::Default => cnot_native(1, 0).unwrap(),
            CompileMode::HiddenInverse => cnot_inverse(1, 0).unwrap(),
        };
        c.push_hard(1, 0, &second).unwrap();
        c.push_gate(Gate::rx(0, 0.2)).unwrap();
        c
    }

    #[test]
    fn empty_circuit_is_identity() {
        let c = Circuit::new(2, CompileMode::Default).unwrap();
        let rho = DensityMatrix::new(2, 2).unwrap();
        let out = simulate(&c, &SqNoiseParams::zero(), &MsNoiseParams::ideal(), &rho).unwrap();
        assert!(out.matrix().approx_eq(rho.matrix(), 0.0));
    }

    #[test]
    fn hadamard_squared() {
        let mut c = Circuit::new(1, CompileMode::Default).unwrap();
        c.push_seq(&h_native()).unwrap();
        c.push_seq(&h_native()).unwrap();
        let out = simulate(&c, &SqNoiseParams::zero(), &MsNoiseParams::ideal(), &DensityMatrix::new(1, 0).unwrap()).unwrap();
        assert!((out.population(0).unwrap() - 1.0).abs() < 1e-12);
    }

    /// Oracle: C P C† by dense matrices, matched against ±Pauli strings.
    fn conjugate_by_matrix(p: &PauliString, control: usize, target: usize) -> (PauliString, i8) {
        let cnot = cnot_native(control, target).unwrap().compose(2, &SqNoiseParams::zero()).unwrap();
        let image = &(&cnot * &p.matrix()) * &cnot.adjoint();
        for q in PauliString::all(2) {
            let overlap = (&q.matrix() * &image).trace() / C64::new(4.0, 0.0);
            if (overlap.re.abs() - 1.0).abs() < 1e-9 {
                return (q, overlap.re.signum() as i8);
            }
        }
        panic!("image is not a Pauli");
    }

    #[test]
    fn pauli_conjugation_matches_matrix_oracle() {
        for (c, t) in [(0, 1), (1, 0)] {
            for p in PauliString::all(2) {
                assert_eq!(conjugate_pauli_through_cnot(&p, c, t).unwrap(), conjugate_by_matrix(&p, c, t), "{p}");
            }
        }
        let xi: PauliString = "XI".parse().unwrap();
        assert_eq!(conjugate_pauli_through_cnot(&xi, 0, 1).unwrap().0.to_string(), "XX");
        let iz: PauliString = "IZ".parse().unwrap();
        assert_eq!(conjugate_pauli_through_cnot(&iz, 0, 1).unwrap().0.to_string(), "ZZ");
        let ii = PauliString::identity(2);
        assert_eq!(conjugate_pauli_through_cnot(&ii, 0, 1).unwrap(), (ii.clone(), 1));
    }

    #[test]
    fn twirl_counts_and_identity_frame() {
        let c = two_cnot_circuit(CompileMode::Default);
        let all = enumerate_twirls(&c).unwrap();
        assert_eq!(all.len(), 256);
        let stripped: Vec<Op> = all[0]
            .ops()
            .iter()
            .filter(|op| !matches!(op, Op::Frame { paulis, .. } if paulis.is_identity()))
            .cloned()
            .collect();
        assert_eq!(stripped, c.ops());

        let mut plain = Circuit::new(2, CompileMode::Default).unwrap();
        plain.push_gate(Gate::rx(0, 0.1)).unwrap();
        assert_eq!(enumerate_twirls(&plain).unwrap(), vec![plain.clone()]);

        let mut three = two_cnot_circuit(CompileMode::Default);
        three.push_hard(0, 1, &cnot_native(0, 1).unwrap()).unwrap();
        assert!(matches!(enumerate_twirls(&three), Err(Error::TooManyHardGates(3))));
    }

    #[test]
    fn twirled_circuits_preserve_noiseless_unitary() {
        for mode in [CompileMode::Default, CompileMode::HiddenInverse] {
            let c = two_cnot_circuit(mode);
            let reference = c.unitary(&SqNoiseParams::zero());
            for t in enumerate_twirls(&c).unwrap() {
                assert!(t.unitary(&SqNoiseParams::zero()).phase_insensitive_diff(&reference) < 1e-10);
            }
        }
    }

    #[test]
    fn sampling_twirls() {
        let all = enumerate_twirls(&two_cnot_circuit(CompileMode::Default)).unwrap();
        assert_eq!(sample_twirls(&all, 256, 3).unwrap().len(), 256);
        let a = sample_twirls(&all, 10, 3).unwrap();
        assert_eq!(a.len(), 10);
        assert_eq!(a, sample_twirls(&all, 10, 3).unwrap());
        assert_ne!(a, sample_twirls(&all, 10, 4).unwrap());
        assert!(sample_twirls(&all, 0, 3).unwrap().is_empty());
        assert!(sample_twirls(&all, 257, 3).is_err());
    }

    #[test]
    fn text_round_trip() {
        let c = enumerate_twirls(&two_cnot_circuit(CompileMode::HiddenInverse)).unwrap()[77].clone();
        let text = c.to_text();
        assert_eq!(Circuit::from_text(&text).unwrap(), c);
        assert!(text.starts_with("QUBITS 2\nMODE hidden_inverse\n"));
        assert!(Circuit::from_text("QUBITS 2\nFOO 1 0\n").is_err());
        assert!(matches!(
            Circuit::from_text("QUBITS 1\nRX 0.5 3\n"),
            Err(Error::CircuitParse { line: 2, .. })
        ));
        assert!(Circuit::from_text("QUBITS 2\nHARD_BEGIN 0 1\n").is_err());
    }

    #[test]
    fn simulate_validates_dimensions() {
        let c = two_cnot_circuit(CompileMode::Default);
        let one = DensityMatrix::new(1, 0).unwrap();
        assert!(simulate(&c, &SqNoiseParams::zero(), &MsNoiseParams::ideal(), &one).is_err());
    }

    #[test]
    fn sampled_mode_averages_over_shared_phonons() {
        // One MS gate: shot-correlated and per-gate mixtures coincide.
        let mut c = Circuit::new(2, CompileMode::Default).unwrap();
        c.push_gate(Gate::xx(0, 1, PI / 2.0)).unwrap();
        let analytic = MsNoiseParams::new(0.5, 0.1, 0.02, 0.3, MsMode::Analytic).unwrap();
        let sampled = MsNoiseParams { mode: MsMode::Sampled, ..analytic };
        let rho = DensityMatrix::new(2, 0).unwrap();
        let a = simulate(&c, &SqNoiseParams::zero(), &analytic, &rho).unwrap();
        let s = simulate(&c, &SqNoiseParams::zero(), &sampled, &rho).unwrap();
        assert!(a.matrix().max_abs_diff(s.matrix()) < 1e-12);
        // Two gates: they differ because the shot shares one phonon number.
        c.push_gate(Gate::xx(0, 1, PI / 2.0)).unwrap();
        let a = simulate(&c, &SqNoiseParams::zero(), &analytic, &rho).unwrap();
        let s = simulate(&c, &SqNoiseParams::zero(), &sampled, &rho).unwrap();
        assert!(a.matrix().max_abs_diff(s.matrix()) > 1e-6);
        assert!((s.matrix().trace().re - 1.0).abs() < 1e-12);
    }
}
