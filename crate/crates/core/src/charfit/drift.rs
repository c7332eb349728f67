use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::fit::{lm_fit_joint, Bounds, FitOptions, FitResult};
use super::sweep::{run_grid, GridMode, SweepSpec};
use crate::gates::SqNoiseParams;
use crate::rng::{derive_seed, rng_from_seed};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DriftScenario {
    /// ε follows a seeded Gaussian random walk.
    Natural,
    /// Parameters held at their calibrated values.
    Recalibrated,
    /// ε ramps linearly across the runs.
    AmpInjected,
    /// φ ramps linearly across the runs.
    PhaseInjected,
}

impl DriftScenario {
    pub const ALL: [Self; 4] = [Self::Natural, Self::Recalibrated, Self::AmpInjected, Self::PhaseInjected];

    pub fn name(self) -> &'static str {
        match self {
            Self::Natural => "natural",
            Self::Recalibrated => "recalibrated",
            Self::AmpInjected => "amp_injected",
            Self::PhaseInjected => "phase_injected",
        }
    }
}

impl fmt::Display for DriftScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DriftScenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s.replace('-', "_"))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown drift scenario {s:?}")))
    }
}

/// Per-run truth parameters for a scenario.
///
/// `amount` is the total ramp for the injected scenarios (reached on the
/// last run) and the per-run step standard deviation of the natural random
/// walk. It is ignored for `Recalibrated`.
pub fn drift_schedule(
    scenario: DriftScenario,
    base: &SqNoiseParams,
    n_runs: usize,
    amount: f64,
    seed: u64,
) -> Result<Vec<SqNoiseParams>> {
    if n_runs == 0 {
        return Err(Error::InvalidParameter("drift needs at least one run".into()));
    }
    if !amount.is_finite() {
        return Err(Error::InvalidParameter("drift amount must be finite".into()));
    }
    base.validate()?;
    let frac = |k: usize| if n_runs == 1 { 0.0 } else { k as f64 / (n_runs - 1) as f64 };
    let out: Vec<SqNoiseParams> = match scenario {
        DriftScenario::Recalibrated => vec![*base; n_runs],
        DriftScenario::AmpInjected => (0..n_runs)
            .map(|k| SqNoiseParams { epsilon: base.epsilon + amount * frac(k), ..*base })
            .collect(),
        DriftScenario::PhaseInjected => (0..n_runs)
            .map(|k| SqNoiseParams { phase: base.phase + amount * frac(k), ..*base })
            .collect(),
        DriftScenario::Natural => {
            let step = Normal::new(0.0, amount.abs()).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let mut rng = rng_from_seed(derive_seed(seed, &[3]));
            let mut eps = base.epsilon;
            (0..n_runs)
                .map(|k| {
                    if k > 0 {
                        eps += step.sample(&mut rng);
                    }
                    SqNoiseParams { epsilon: eps, ..*base }
                })
                .collect()
        }
    };
    for p in &out {
        p.validate()?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftPoint {
    pub run: usize,
    pub truth: SqNoiseParams,
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftSeries {
    pub scenario: DriftScenario,
    pub points: Vec<DriftPoint>,
}

/// Simulates and fits one sampled grid per run of `schedule`.
///
/// Run `k` samples with seed `derive_seed(seed, [2, k])`; runs are
/// independent and evaluated in parallel, then ordered by run index.
pub fn track_drift(
    scenario: DriftScenario,
    schedule: &[SqNoiseParams],
    spec: &SweepSpec,
    seed: u64,
) -> Result<DriftSeries> {
    if schedule.is_empty() {
        return Err(Error::InvalidParameter("drift needs at least one run".into()));
    }
    spec.validate()?;
    let points = schedule
        .par_iter()
        .enumerate()
        .map(|(run, truth)| {
            let map = run_grid(spec, truth, GridMode::Sampled, derive_seed(seed, &[2, run as u64]))?;
            let fit = lm_fit_joint(&[(&map, spec)], &SqNoiseParams::zero(), &Bounds::default(), &FitOptions::default())?;
            Ok(DriftPoint { run, truth: *truth, fit })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DriftSeries { scenario, points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules() {
        let base = SqNoiseParams::new(0.0, 0.001, 0.0).unwrap();
        let amp = drift_schedule(DriftScenario::AmpInjected, &base, 10, 0.02, 0).unwrap();
        assert_eq!(amp.len(), 10);
        assert_eq!(amp[0].epsilon, 0.0);
        assert!((amp[9].epsilon - 0.02).abs() < 1e-15);
        assert!(amp.iter().all(|p| p.phase == 0.001));

        let ph = drift_schedule(DriftScenario::PhaseInjected, &base, 5, 0.01, 0).unwrap();
        assert!((ph[4].phase - 0.011).abs() < 1e-15);
        assert!(ph.iter().all(|p| p.epsilon == 0.0));

        let flat = drift_schedule(DriftScenario::Recalibrated, &base, 3, 0.5, 0).unwrap();
        assert!(flat.iter().all(|p| *p == base));

        let a = drift_schedule(DriftScenario::Natural, &base, 8, 0.001, 7).unwrap();
        let b = drift_schedule(DriftScenario::Natural, &base, 8, 0.001, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0], base);
        assert!(a.windows(2).any(|w| w[0].epsilon != w[1].epsilon));

        assert!(drift_schedule(DriftScenario::Natural, &base, 0, 0.001, 7).is_err());
    }

    #[test]
    fn scenario_names() {
        for s in DriftScenario::ALL {
            assert_eq!(s.name().parse::<DriftScenario>().unwrap(), s);
        }
        assert_eq!("amp-injected".parse::<DriftScenario>().unwrap(), DriftScenario::AmpInjected);
    }

    #[test]
    fn recalibrated_series_is_flat() {
        let spec = SweepSpec::default();
        let base = SqNoiseParams::new(0.01, 0.0, 0.0).unwrap();
        let sched = drift_schedule(DriftScenario::Recalibrated, &base, 3, 0.0, 0).unwrap();
        let series = track_drift(DriftScenario::Recalibrated, &sched, &spec, 11).unwrap();
        assert_eq!(series.points.iter().map(|p| p.run).collect::<Vec<_>>(), vec![0, 1, 2]);
        for p in &series.points {
            assert!((p.fit.params.epsilon - 0.01).abs() < 2e-3, "{:?}", p.fit);
        }
    }
}
