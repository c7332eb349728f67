use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand_distr::Binomial;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, CompileMode};
use crate::gates::{h_inverse_on, h_native_on, noisy_rx, noisy_ry, rz, Gate, SqNoiseParams};
use crate::linalg::ComplexMatrix;
use crate::rng::{derive_seed, rng_from_seed};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RotationAxis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Compilation {
    /// Closing Hadamard uses the same decomposition as the opening one.
    Native,
    /// Closing Hadamard is the hidden inverse H†.
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SweepVariant {
    pub axis: RotationAxis,
    pub compilation: Compilation,
}

impl SweepVariant {
    pub const INVERSE_XZ: Self = Self { axis: RotationAxis::X, compilation: Compilation::Inverse };
    pub const NATIVE_XZ: Self = Self { axis: RotationAxis::X, compilation: Compilation::Native };
    pub const INVERSE_YZ: Self = Self { axis: RotationAxis::Y, compilation: Compilation::Inverse };
    pub const NATIVE_YZ: Self = Self { axis: RotationAxis::Y, compilation: Compilation::Native };

    pub const ALL: [Self; 4] = [Self::NATIVE_XZ, Self::INVERSE_XZ, Self::NATIVE_YZ, Self::INVERSE_YZ];
}

impl fmt::Display for SweepVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self.compilation {
            Compilation::Native => "native",
            Compilation::Inverse => "inverse",
        };
        let a = match self.axis {
            RotationAxis::X => "XZ",
            RotationAxis::Y => "YZ",
        };
        write!(f, "{c}-{a}")
    }
}

impl FromStr for SweepVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown sweep variant {s:?}")))
    }
}

/// Phase-space sweep settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub variant: SweepVariant,
    pub reps: u32,
    pub n_points: usize,
    /// Grid spans `[−half_range, +half_range]` on both axes.
    pub half_range: f64,
    pub shots: u64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            variant: SweepVariant::INVERSE_XZ,
            reps: 100,
            n_points: 21,
            half_range: PI / 36.0,
            shots: 200,
        }
    }
}

impl SweepSpec {
    pub fn with_variant(variant: SweepVariant) -> Self {
        Self { variant, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(Error::InvalidParameter("grid needs at least 2 points per axis".into()));
        }
        if self.reps < 1 {
            return Err(Error::InvalidParameter("reps must be ≥ 1".into()));
        }
        if !(self.half_range.is_finite() && self.half_range > 0.0) {
            return Err(Error::InvalidParameter("grid range must be positive and finite".into()));
        }
        Ok(())
    }

    /// Equally spaced axis values from `−half_range` to `+half_range`.
    pub fn axis_values(&self) -> Vec<f64> {
        let n = self.n_points;
        (0..n)
            .map(|i| -self.half_range + 2.0 * self.half_range * i as f64 / (n - 1) as f64)
            .collect()
    }

    /// Grid points in Θ-major order.
    pub fn grid_points(&self) -> Vec<(f64, f64)> {
        let axis = self.axis_values();
        axis.iter()
            .flat_map(|&t| axis.iter().map(move |&p| (t, p)))
            .collect()
    }
}

/// `reps` repetitions of `[H, X(Θ)|Y(Θ), Z(Φ), H|H†]` on one qubit.
pub fn build_sweep_circuit(spec: &SweepSpec, theta: f64, phi: f64) -> Result<Circuit> {
    spec.validate()?;
    let mode = match spec.variant.compilation {
        Compilation::Native => CompileMode::Default,
        Compilation::Inverse => CompileMode::HiddenInverse,
    };
    let mut c = Circuit::new(1, mode)?;
    for _ in 0..spec.reps {
        c.push_seq(&h_native_on(0))?;
        c.push_gate(match spec.variant.axis {
            RotationAxis::X => Gate::rx(0, theta),
            RotationAxis::Y => Gate::ry(0, theta),
        })?;
        c.push_gate(Gate::rz(0, phi))?;
        match spec.variant.compilation {
            Compilation::Native => c.push_seq(&h_native_on(0))?,
            Compilation::Inverse => c.push_seq(&h_inverse_on(0))?,
        }
    }
    Ok(c)
}

fn block_unitary(spec: &SweepSpec, theta: f64, phi: f64, p: &SqNoiseParams) -> ComplexMatrix {
    let h_open = &noisy_rx(PI, p) * &noisy_ry(PI / 2.0, p);
    let rot = match spec.variant.axis {
        RotationAxis::X => noisy_rx(theta, p),
        RotationAxis::Y => noisy_ry(theta, p),
    };
    let h_close = match spec.variant.compilation {
        Compilation::Native => h_open.clone(),
        Compilation::Inverse => &noisy_ry(-PI / 2.0, p) * &noisy_rx(-PI, p),
    };
    &(&(&h_close * &rz(phi)) * &rot) * &h_open
}

/// Infinite-shot |0⟩ population of the sweep circuit at (Θ, Φ).
///
/// The noise model is coherent, so the repeated block is evaluated as a
/// 2×2 unitary power rather than a density-matrix simulation.
pub fn predict_p0(spec: &SweepSpec, theta: f64, phi: f64, p: &SqNoiseParams) -> f64 {
    let u = block_unitary(spec, theta, phi, p).pow(spec.reps);
    u[(0, 0)].norm_sqr()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridMode {
    Analytic,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Simulated,
    Ingested,
}

/// One grid point. `shots == 0` marks an infinite-shot (analytic) value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    #[serde(rename = "theta_rad")]
    pub theta: f64,
    #[serde(rename = "phi_rad")]
    pub phi: f64,
    pub p0: f64,
    pub shots: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceMap {
    pub n_points: usize,
    /// Θ-major order.
    pub records: Vec<GridRecord>,
    pub provenance: Provenance,
    /// Order in which grid indices were measured, for sampled maps.
    pub visit_order: Option<Vec<usize>>,
}

impl PhaseSpaceMap {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.records.len() == self.n_points * self.n_points
    }

    pub fn populations(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.p0).collect()
    }
}

/// Evaluates the sweep on every grid point.
///
/// Sampled maps draw `spec.shots` binomial shots per point from a seed
/// derived from `(rng_seed, grid index)`, so values do not depend on the
/// randomized visit order or on thread scheduling.
pub fn run_grid(spec: &SweepSpec, p: &SqNoiseParams, mode: GridMode, rng_seed: u64) -> Result<PhaseSpaceMap> {
    spec.validate()?;
    p.validate()?;
    if mode == GridMode::Sampled && spec.shots == 0 {
        return Err(Error::InvalidParameter("sampled grids need shots ≥ 1".into()));
    }
    let points = spec.grid_points();
    let records: Vec<GridRecord> = points
        .par_iter()
        .enumerate()
        .map(|(i, &(theta, phi))| {
            let exact = predict_p0(spec, theta, phi, p).clamp(0.0, 1.0);
            match mode {
                GridMode::Analytic => GridRecord { theta, phi, p0: exact, shots: 0 },
                GridMode::Sampled => {
                    let mut rng = rng_from_seed(derive_seed(rng_seed, &[1, i as u64]));
                    let k = Binomial::new(spec.shots, exact).expect("valid binomial").sample(&mut rng);
                    GridRecord { theta, phi, p0: k as f64 / spec.shots as f64, shots: spec.shots }
                }
            }
        })
        .collect();
    let visit_order = (mode == GridMode::Sampled).then(|| {
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.shuffle(&mut rng_from_seed(derive_seed(rng_seed, &[0])));
        order
    });
    Ok(PhaseSpaceMap {
        n_points: spec.n_points,
        records,
        provenance: Provenance::Simulated,
        visit_order,
    })
}
