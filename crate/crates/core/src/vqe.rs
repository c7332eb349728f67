//! Two-qubit tapered H2 VQE: Hamiltonian, one-parameter ansatz, energy
//! estimation, randomized compiling and purification.
//!
//! Qubit 0 is the top wire and the first letter of every Pauli label. The
//! ansatz prepares `|01⟩` (bottom qubit flipped) at α = 0, the Hartree–Fock
//! state, and rotates within the one-particle span of `|01⟩` and `|10⟩`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::circuit::{enumerate_twirls, sample_twirls, simulate, simulate_with_phonon, Circuit, CompileMode};
use crate::density::DensityMatrix;
use crate::gates::{cnot_inverse, cnot_native, Gate, MsMode, MsNoiseParams, SqNoiseParams};
use crate::linalg::{eig_herm, ComplexMatrix};
use crate::pauli::PauliString;
use crate::rng::{derive_seed, rng_from_seed};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PauliHamiltonian {
    terms: Vec<(f64, PauliString)>,
}

impl PauliHamiltonian {
    pub fn new(terms: Vec<(f64, PauliString)>) -> Result<Self> {
        for (c, p) in &terms {
            if !c.is_finite() {
                return Err(Error::InvalidParameter(format!("coefficient of {p} is not finite")));
            }
            if p.len() != 2 {
                return Err(Error::PauliLengthMismatch { expected: 2, actual: p.len() });
            }
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn coefficient(&self, label: &str) -> f64 {
        self.terms
            .iter()
            .filter(|(_, p)| p.to_string() == label)
            .map(|(c, _)| c)
            .sum()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        self.terms
            .iter()
            .fold(ComplexMatrix::zeros(4, 4), |acc, (c, p)| &acc + &p.matrix().scale_real(*c))
    }
}

/// The tapered two-qubit H2 Hamiltonian in Hartree.
pub fn h2_hamiltonian() -> PauliHamiltonian {
    let terms = [
        (0.304794, "II"),
        (0.3555426, "IZ"),
        (-0.485486, "ZI"),
        (0.581232, "ZZ"),
        (0.0895, "XX"),
        (0.0895, "YY"),
    ];
    PauliHamiltonian::new(
        terms
            .iter()
            .map(|&(c, s)| (c, s.parse().expect("valid label")))
            .collect(),
    )
    .expect("valid Hamiltonian")
}

/// Lowest eigenvalue of the Hamiltonian matrix.
pub fn exact_ground_energy(h: &PauliHamiltonian) -> Result<f64> {
    let (values, _) = eig_herm(&h.matrix())?;
    Ok(values[0])
}

/// Lowest eigenvalue of `h` restricted to the span of `|01⟩` and `|10⟩`.
pub fn one_particle_ground_energy(h: &PauliHamiltonian) -> Result<f64> {
    let m = h.matrix();
    let block = ComplexMatrix::from_vec(2, 2, vec![m[(1, 1)], m[(1, 2)], m[(2, 1)], m[(2, 2)]])?;
    Ok(eig_herm(&block)?.0[0])
}

/// Two-qubit Pauli expectation values needed for the H2 energy.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExpectationSet {
    pub iz: f64,
    pub zi: f64,
    pub zz: f64,
    pub xx: f64,
    pub yy: f64,
}

impl ExpectationSet {
    pub fn new(iz: f64, zi: f64, zz: f64, xx: f64, yy: f64) -> Self {
        Self { iz, zi, zz, xx, yy }
    }

    /// Exact expectations of a density matrix.
    pub fn from_density(dm: &DensityMatrix) -> Result<Self> {
        let e = |s: &str| dm.expectation(&s.parse().expect("valid label"));
        Ok(Self {
            iz: e("IZ")?,
            zi: e("ZI")?,
            zz: e("ZZ")?,
            xx: e("XX")?,
            yy: e("YY")?,
        })
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.iz, self.zi, self.zz, self.xx, self.yy]
    }

    /// Values clamped to [−1, 1]; the flag reports whether any moved.
    pub fn clamped(&self) -> (Self, bool) {
        let c = |x: f64| x.clamp(-1.0, 1.0);
        let out = Self::new(c(self.iz), c(self.zi), c(self.zz), c(self.xx), c(self.yy));
        (out, out != *self)
    }

    fn get(&self, label: &str) -> Option<f64> {
        Some(match label {
            "II" => 1.0,
            "IZ" => self.iz,
            "ZI" => self.zi,
            "ZZ" => self.zz,
            "XX" => self.xx,
            "YY" => self.yy,
            _ => return None,
        })
    }

    fn mean(sets: &[Self]) -> Self {
        let n = sets.len() as f64;
        let mut acc = [0.0; 5];
        for s in sets {
            for (a, v) in acc.iter_mut().zip(s.as_array()) {
                *a += v;
            }
        }
        Self::new(acc[0] / n, acc[1] / n, acc[2] / n, acc[3] / n, acc[4] / n)
    }
}

/// `Σ c_P ⟨P⟩` with `⟨II⟩ = 1`.
pub fn energy(exps: &ExpectationSet, h: &PauliHamiltonian) -> Result<f64> {
    h.terms().iter().try_fold(0.0, |acc, (c, p)| {
        let label = p.to_string();
        exps.get(&label)
            .map(|v| acc + c * v)
            .ok_or_else(|| Error::InvalidParameter(format!("no expectation value for term {label}")))
    })
}

/// Measurement setting. ZZ yields `iz`, `zi` and `zz`; XX and YY yield the
/// corresponding parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasBasis {
    ZZ,
    XX,
    YY,
}

impl MeasBasis {
    pub const ALL: [Self; 3] = [Self::ZZ, Self::XX, Self::YY];

    /// Gates appended before a computational-basis readout so that `Z` on
    /// each qubit reports the basis Pauli: `Ry(−π/2)† Z Ry(−π/2) = X` and
    /// `Rx(π/2)† Z Rx(π/2) = Y`.
    pub fn rotation(self) -> Vec<Gate> {
        match self {
            Self::ZZ => Vec::new(),
            Self::XX => vec![Gate::ry(0, -PI / 2.0), Gate::ry(1, -PI / 2.0)],
            Self::YY => vec![Gate::rx(0, PI / 2.0), Gate::rx(1, PI / 2.0)],
        }
    }

    fn index(self) -> u64 {
        self as u64
    }
}

/// Expectations readable from one basis, from outcome probabilities or
/// normalized counts indexed `2·q0 + q1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasisEstimate {
    ZZ { iz: f64, zi: f64, zz: f64 },
    XX(f64),
    YY(f64),
}

impl BasisEstimate {
    pub fn from_probabilities(basis: MeasBasis, p: &[f64]) -> Self {
        let parity = p[0] - p[1] - p[2] + p[3];
        match basis {
            MeasBasis::ZZ => BasisEstimate::ZZ {
                iz: p[0] - p[1] + p[2] - p[3],
                zi: p[0] + p[1] - p[2] - p[3],
                zz: parity,
            },
            MeasBasis::XX => BasisEstimate::XX(parity),
            MeasBasis::YY => BasisEstimate::YY(parity),
        }
    }
}

fn merge(estimates: &[BasisEstimate]) -> ExpectationSet {
    let mut out = ExpectationSet::default();
    for e in estimates {
        match *e {
            BasisEstimate::ZZ { iz, zi, zz } => {
                out.iz = iz;
                out.zi = zi;
                out.zz = zz;
            }
            BasisEstimate::XX(v) => out.xx = v,
            BasisEstimate::YY(v) => out.yy = v,
        }
    }
    out
}

/// The ansatz in time order, with qubit 0 on top:
///
/// 1. `RX(π)` then `RY(π/2)` on qubit 1, `RX(−π/2)` on qubit 0
/// 2. CNOT, control 1, target 0
/// 3. `RZ(α)` on qubit 0
/// 4. CNOT, control 1, target 0; the CNOT† form in hidden-inverse mode
/// 5. `RX(π/2)` on qubit 0, `RY(−π/2)` on qubit 1
pub fn ansatz(alpha: f64, mode: CompileMode) -> Result<Circuit> {
    if !(alpha.is_finite() && alpha.abs() <= PI / 2.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} outside [−π/2, π/2]")));
    }
    let mut c = Circuit::new(2, mode)?;
    c.push_gate(Gate::rx(1, PI))?;
    c.push_gate(Gate::ry(1, PI / 2.0))?;
    c.push_gate(Gate::rx(0, -PI / 2.0))?;
    c.push_hard(1, 0, &cnot_native(1, 0)?)?;
    c.push_gate(Gate::rz(0, alpha))?;
    let second = match mode {
        CompileMode::Default => cnot_native(1, 0)?,
        CompileMode::HiddenInverse => cnot_inverse(1, 0)?,
    };
    c.push_hard(1, 0, &second)?;
    c.push_gate(Gate::rx(0, PI / 2.0))?;
    c.push_gate(Gate::ry(1, -PI / 2.0))?;
    Ok(c)
}

fn with_rotation(circuit: &Circuit, basis: MeasBasis) -> Result<Circuit> {
    let mut c = circuit.clone();
    for g in basis.rotation() {
        c.push_gate(g)?;
    }
    Ok(c)
}

/// Exact outcome probabilities of `circuit` from `|00⟩` measured in `basis`.
pub fn measurement_probabilities(
    circuit: &Circuit,
    sq: &SqNoiseParams,
    ms: &MsNoiseParams,
    basis: MeasBasis,
) -> Result<Vec<f64>> {
    let c = with_rotation(circuit, basis)?;
    Ok(simulate(&c, sq, ms, &DensityMatrix::new(2, 0)?)?.probabilities())
}

/// Runs `circuit` from `|00⟩` and reads out `basis`.
///
/// `shots == 0` returns the infinite-shot value. With a sampled MS mode,
/// each shot draws its own phonon number, shared by every MS gate in it.
pub fn measure_set(
    circuit: &Circuit,
    sq: &SqNoiseParams,
    ms: &MsNoiseParams,
    shots: u64,
    rng_seed: u64,
    basis: MeasBasis,
) -> Result<BasisEstimate> {
    if circuit.n_qubits() != 2 {
        return Err(Error::UnsupportedQubitCount(circuit.n_qubits()));
    }
    if shots == 0 {
        let p = measurement_probabilities(circuit, sq, ms, basis)?;
        return Ok(BasisEstimate::from_probabilities(basis, &p));
    }
    let c = with_rotation(circuit, basis)?;
    let initial = DensityMatrix::new(2, 0)?;
    let mut rng = rng_from_seed(rng_seed);
    let counts = if ms.mode == MsMode::Sampled && !ms.is_ideal() {
        let mut phonons: Vec<usize> = (0..shots).map(|_| ms.sample_phonon(&mut rng)).collect();
        phonons.sort_unstable();
        let mut counts = vec![0u64; 4];
        for group in phonons.chunk_by(|a, b| a == b) {
            let dm = simulate_with_phonon(&c, sq, ms, &initial, group[0])?;
            for (acc, k) in counts.iter_mut().zip(dm.sample_counts_with(group.len() as u64, &mut rng)) {
                *acc += k;
            }
        }
        counts
    } else {
        simulate(&c, sq, ms, &initial)?.sample_counts_with(shots, &mut rng)
    };
    let freq: Vec<f64> = counts.iter().map(|&k| k as f64 / shots as f64).collect();
    Ok(BasisEstimate::from_probabilities(basis, &freq))
}

/// All five expectations from the three bases; basis `b` samples with
/// `derive_seed(rng_seed, [b])`.
pub fn measure_all(
    circuit: &Circuit,
    sq: &SqNoiseParams,
    ms: &MsNoiseParams,
    shots: u64,
    rng_seed: u64,
) -> Result<ExpectationSet> {
    let estimates = MeasBasis::ALL
        .iter()
        .map(|&b| measure_set(circuit, sq, ms, shots, derive_seed(rng_seed, &[b.index()]), b))
        .collect::<Result<Vec<_>>>()?;
    Ok(merge(&estimates))
}

/// Infinite-shot energy of the ansatz.
pub fn analytic_energy(
    alpha: f64,
    mode: CompileMode,
    sq: &SqNoiseParams,
    ms: &MsNoiseParams,
    h: &PauliHamiltonian,
) -> Result<f64> {
    energy(&measure_all(&ansatz(alpha, mode)?, sq, ms, 0, 0)?, h)
}

/// Randomized-compiling estimate of the expectations.
///
/// Draws `m_circuits` of the 256 Pauli-twirled ansatz circuits without
/// replacement (seed `derive_seed(rng_seed, [0])`), runs each with
/// `shots_total / m_circuits` shots per basis (twirl `i` seeded by
/// `derive_seed(rng_seed, [1, i])`), and averages the expectations per
/// basis. `shots_total == 0` averages exact expectations.
pub fn rc_expectations(
    alpha: f64,
    mode: CompileMode,
    sq: &SqNoiseParams,
    ms: &MsNoiseParams,
    shots_total: u64,
    m_circuits: usize,
    rng_seed: u64,
) -> Result<ExpectationSet> {
    if m_circuits == 0 {
        return Err(Error::InvalidParameter("randomized compiling needs at least one circuit".into()));
    }
    if !shots_total.is_multiple_of(m_circuits as u64) {
        return Err(Error::InvalidParameter(format!(
            "{m_circuits} circuits do not divide {shots_total} shots"
        )));
    }
    let all = enumerate_twirls(&ansatz(alpha, mode)?)?;
    let chosen = sample_twirls(&all, m_circuits, derive_seed(rng_seed, &[0]))?;
    let per = shots_total / m_circuits as u64;
    let sets = chosen
        .par_iter()
        .enumerate()
        .map(|(i, c)| measure_all(c, sq, ms, per, derive_seed(rng_seed, &[1, i as u64])))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExpectationSet::mean(&sets))
}

pub fn rc_energy(
    alpha: f64,
    mode: CompileMode,
    sq: &SqNoiseParams,
    ms: &MsNoiseParams,
    shots_total: u64,
    m_circuits: usize,
    rng_seed: u64,
) -> Result<f64> {
    energy(
        &rc_expectations(alpha, mode, sq, ms, shots_total, m_circuits, rng_seed)?,
        &h2_hamiltonian(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Purified {
    pub expectations: ExpectationSet,
    /// The two eigenvalues were equal and the eigenvector was chosen by
    /// tie-break.
    pub degenerate: bool,
}

/// Projects the one-particle reduced density matrix
///
/// ```text
/// ρ = [ (1 − ⟨IZ⟩)/2       (⟨XX⟩ + ⟨YY⟩)/4 ]
///     [ (⟨XX⟩ + ⟨YY⟩)/4    (1 − ⟨ZI⟩)/2    ]
/// ```
///
/// onto its dominant eigenvector `v` (first component non-negative) and
/// reads the expectations back from `vvᵀ`. ρ is not trace-normalized; its
/// diagonal is clamped to [0, 1]. `zz` is −1 on the one-particle span. On a
/// tie the eigenvector with the larger first component wins.
pub fn purify(exps: &ExpectationSet) -> Purified {
    let a = ((1.0 - exps.iz) / 2.0).clamp(0.0, 1.0);
    let d = ((1.0 - exps.zi) / 2.0).clamp(0.0, 1.0);
    let b = (exps.xx + exps.yy) / 4.0;
    let gap = ((a - d) / 2.0).hypot(b);
    let degenerate = gap <= 1e-12;
    // Dominant eigenvector (cos t, sin t) with tan 2t = 2b / (a − d).
    let two_t = if degenerate { 0.0 } else { (2.0 * b).atan2(a - d) };
    let (s2, c2) = two_t.sin_cos();
    Purified {
        expectations: ExpectationSet::new(-c2, c2, -1.0, s2, s2),
        degenerate,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mitigation {
    None,
    Rc,
}

impl Mitigation {
    pub fn name(self) -> &'static str {
        match self {
            Mitigation::None => "none",
            Mitigation::Rc => "rc",
        }
    }
}

impl fmt::Display for Mitigation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mitigation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Mitigation::None),
            "rc" => Ok(Mitigation::Rc),
            _ => Err(Error::InvalidParameter(format!("unknown mitigation {s:?}"))),
        }
    }
}

/// Settings for one landscape sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapeSpec {
    pub mode: CompileMode,
    pub mitigation: Mitigation,
    /// Shots per basis per α; 0 for exact expectations.
    pub shots: u64,
    /// Twirled circuits per α under randomized compiling.
    pub rc_circuits: usize,
}

impl Default for LandscapeSpec {
    fn default() -> Self {
        Self {
            mode: CompileMode::Default,
            mitigation: Mitigation::None,
            shots: 200,
            rc_circuits: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapePoint {
    pub alpha: f64,
    pub energy: f64,
    pub mode: CompileMode,
    pub mitigation: Mitigation,
    pub purified: bool,
    pub shots: u64,
}

/// `n` equally spaced angles on [−π/2, π/2].
pub fn alpha_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| -PI / 2.0 + PI * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Raw and purified energies at every α, in α order (raw first).
///
/// Point `i` uses seed `derive_seed(seed, [i])`, so the output does not
/// depend on evaluation order.
pub fn landscape(
    alphas: &[f64],
    spec: &LandscapeSpec,
    sq: &SqNoiseParams,
    ms: &MsNoiseParams,
    seed: u64,
) -> Result<Vec<LandscapePoint>> {
    let h = h2_hamiltonian();
    let per_alpha = alphas
        .par_iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let s = derive_seed(seed, &[i as u64]);
            let exps = match spec.mitigation {
                Mitigation::None => measure_all(&ansatz(alpha, spec.mode)?, sq, ms, spec.shots, s)?,
                Mitigation::Rc => {
                    rc_expectations(alpha, spec.mode, sq, ms, spec.shots, spec.rc_circuits, s)?
                }
            };
            let point = |energy, purified| LandscapePoint {
                alpha,
                energy,
                mode: spec.mode,
                mitigation: spec.mitigation,
                purified,
                shots: spec.shots,
            };
            Ok([
                point(energy(&exps, &h)?, false),
                point(energy(&purify(&exps).expectations, &h)?, true),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_alpha.into_iter().flatten().collect())
}

/// Minimizes `f` on `[lo, hi]` by a dense scan followed by golden-section
/// refinement around the best scan point.
pub fn minimize_scalar<F>(f: F, lo: f64, hi: f64, n_scan: usize) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let n = n_scan.max(3);
    let xs: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let mut best = (xs[0], f(xs[0])?);
    for &x in &xs[1..] {
        let v = f(x)?;
        if v < best.1 {
            best = (x, v);
        }
    }
    let step = (hi - lo) / (n - 1) as f64;
    let (mut a, mut b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a).abs() > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    let x = (a + b) / 2.0;
    let v = f(x)?;
    Ok(if v <= best.1 { (x, v) } else { best })
}

/// Minimum of the infinite-shot landscape over |α| ≤ π/2.
pub fn landscape_minimum(
    mode: CompileMode,
    sq: &SqNoiseParams,
    ms: &MsNoiseParams,
    h: &PauliHamiltonian,
) -> Result<(f64, f64)> {
    minimize_scalar(|a| analytic_energy(a, mode, sq, ms, h), -PI / 2.0, PI / 2.0, 181)
}
