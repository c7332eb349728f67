use rayon::prelude::*;
use serde::Serialize;

use super::sweep::{predict_p0, PhaseSpaceMap, SweepSpec};
use crate::gates::SqNoiseParams;
use crate::{Error, Result};

/// Box constraints on (ε, φ, δ/Ω).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: [f64; 3],
    pub upper: [f64; 3],
}

impl Default for Bounds {
    fn default() -> Self {
        Self { lower: [-0.2; 3], upper: [0.2; 3] }
    }
}

impl Bounds {
    fn clamp(&self, x: [f64; 3]) -> [f64; 3] {
        let mut out = x;
        for i in 0..3 {
            out[i] = x[i].clamp(self.lower[i], self.upper[i]);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Forward-difference step for the Jacobian.
    pub jacobian_step: f64,
    /// Convergence threshold on the Euclidean parameter-step norm.
    pub step_tolerance: f64,
    pub initial_damping: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            jacobian_step: 1e-6,
            step_tolerance: 1e-10,
            initial_damping: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: SqNoiseParams,
    /// Euclidean norm of the residual vector at the optimum.
    pub residual_norm: f64,
    /// Residual-variance-scaled `(JᵀJ)⁻¹`; `None` when `JᵀJ` is singular.
    pub covariance: Option<[[f64; 3]; 3]>,
    pub iterations: usize,
    pub converged: bool,
    /// Why the fit did not converge, when it did not.
    pub message: Option<String>,
    /// Residual norm after each accepted step, starting from the initial point.
    pub residual_history: Vec<f64>,
}

impl FitResult {
    /// One-sigma uncertainties from the covariance diagonal.
    pub fn std_errors(&self) -> Option<[f64; 3]> {
        self.covariance.map(|c| [c[0][0].sqrt(), c[1][1].sqrt(), c[2][2].sqrt()])
    }

    pub fn report(&self) -> FitReport {
        FitReport {
            epsilon: self.params.epsilon,
            phase: self.params.phase,
            detuning_ratio: self.params.detuning_ratio,
            residual_norm: self.residual_norm,
            covariance: self.covariance.map(|c| c.iter().flatten().copied().collect()),
            iterations: self.iterations,
            converged: self.converged,
        }
    }
}

/// Flat JSON form of a [`FitResult`]; `covariance` is row-major or `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub epsilon: f64,
    pub phase: f64,
    pub detuning_ratio: f64,
    pub residual_norm: f64,
    pub covariance: Option<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
}

struct Problem<'a> {
    data: Vec<(&'a PhaseSpaceMap, &'a SweepSpec)>,
    n_residuals: usize,
}

impl Problem<'_> {
    fn residuals(&self, x: [f64; 3]) -> Vec<f64> {
        let p = SqNoiseParams::from_array(x);
        let mut out = Vec::with_capacity(self.n_residuals);
        for (map, spec) in &self.data {
            let part: Vec<f64> = map
                .records
                .par_iter()
                .map(|r| r.p0 - predict_p0(spec, r.theta, r.phi, &p))
                .collect();
            out.extend(part);
        }
        out
    }

    /// Forward differences, stepping backwards at an upper bound.
    fn jacobian(&self, x: [f64; 3], r0: &[f64], h: f64, bounds: &Bounds) -> Vec<[f64; 3]> {
        let mut jac = vec![[0.0; 3]; r0.len()];
        for k in 0..3 {
            let step = if x[k] + h > bounds.upper[k] { -h } else { h };
            let mut xk = x;
            xk[k] += step;
            let rk = self.residuals(xk);
            for (row, (a, b)) in jac.iter_mut().zip(rk.iter().zip(r0)) {
                row[k] = (a - b) / step;
            }
        }
        jac
    }
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

fn normal_equations(jac: &[[f64; 3]], r: &[f64]) -> ([[f64; 3]; 3], [f64; 3]) {
    let mut a = [[0.0; 3]; 3];
    let mut g = [0.0; 3];
    for (row, &ri) in jac.iter().zip(r) {
        for i in 0..3 {
            g[i] += row[i] * ri;
            for j in 0..3 {
                a[i][j] += row[i] * row[j];
            }
        }
    }
    (a, g)
}

/// Gauss–Jordan inverse with partial pivoting; `None` if numerically singular.
fn invert3(m: [[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let scale = m.iter().flatten().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if scale == 0.0 {
        return None;
    }
    let mut a = m;
    let mut inv = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let d = a[col][col];
        for k in 0..3 {
            a[col][k] /= d;
            inv[col][k] /= d;
        }
        for row in 0..3 {
            if row != col {
                let f = a[row][col];
                for k in 0..3 {
                    a[row][k] -= f * a[col][k];
                    inv[row][k] -= f * inv[col][k];
                }
            }
        }
    }
    Some(inv)
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let inv = invert3(a)?;
    let mut x = [0.0; 3];
    for i in 0..3 {
        x[i] = (0..3).map(|j| inv[i][j] * b[j]).sum();
    }
    Some(x)
}

/// Levenberg–Marquardt fit of (ε, φ, δ/Ω) to one phase-space map.
pub fn lm_fit(map: &PhaseSpaceMap, spec: &SweepSpec, initial: &SqNoiseParams, bounds: &Bounds) -> Result<FitResult> {
    lm_fit_joint(&[(map, spec)], initial, bounds, &FitOptions::default())
}

/// Fits several maps at once, concatenating their residuals.
///
/// Minimizes `Σ (p0_observed − p0_model)²` with the analytic forward model,
/// scaling the damping by `diag(JᵀJ)`, dividing it by 10 on an accepted step
/// and multiplying by 10 on a rejected one. Stops once a proposed step is
/// shorter than `step_tolerance` or after `max_iterations` Jacobians.
pub fn lm_fit_joint(
    data: &[(&PhaseSpaceMap, &SweepSpec)],
    initial: &SqNoiseParams,
    bounds: &Bounds,
    options: &FitOptions,
) -> Result<FitResult> {
    if data.is_empty() {
        return Err(Error::InvalidParameter("nothing to fit".into()));
    }
    for (map, spec) in data {
        spec.validate()?;
        if !map.is_complete() || map.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "incomplete grid: {} records for {} points per axis",
                map.len(),
                map.n_points
            )));
        }
    }
    let problem = Problem {
        n_residuals: data.iter().map(|(m, _)| m.len()).sum(),
        data: data.to_vec(),
    };
    let mut x = bounds.clamp(initial.as_array());

    let observed: Vec<f64> = data.iter().flat_map(|(m, _)| m.populations()).collect();
    let spread = observed.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - observed.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread <= 1e-12 {
        let r = problem.residuals(x);
        let norm = sum_sq(&r).sqrt();
        return Ok(FitResult {
            params: SqNoiseParams::from_array(x),
            residual_norm: norm,
            covariance: None,
            iterations: 0,
            converged: false,
            message: Some("degenerate grid: every population is identical, parameters are not identifiable".into()),
            residual_history: vec![norm],
        });
    }

    let mut r = problem.residuals(x);
    let mut cost = sum_sq(&r);
    let mut history = vec![cost.sqrt()];
    let mut lambda = options.initial_damping;
    let mut converged = false;
    let mut iterations = 0;

    'outer: while iterations < options.max_iterations {
        iterations += 1;
        let jac = problem.jacobian(x, &r, options.jacobian_step, bounds);
        let (a, g) = normal_equations(&jac, &r);
        let diag_floor = 1e-12 * (0..3).map(|i| a[i][i]).fold(0.0, f64::max).max(1e-300);
        loop {
            let mut damped = a;
            for i in 0..3 {
                damped[i][i] += lambda * a[i][i].max(diag_floor);
            }
            // r = observed − model, so J here is −∂model; the descent step
            // solves (A + λD)δ = −Jᵀr.
            let Some(delta) = solve3(damped, [-g[0], -g[1], -g[2]]) else {
                lambda *= 10.0;
                if lambda > 1e20 {
                    break 'outer;
                }
                continue;
            };
            let candidate = bounds.clamp([x[0] + delta[0], x[1] + delta[1], x[2] + delta[2]]);
            let step_norm = (0..3).map(|i| (candidate[i] - x[i]).powi(2)).sum::<f64>().sqrt();
            if step_norm < options.step_tolerance {
                converged = true;
                break 'outer;
            }
            let r_new = problem.residuals(candidate);
            let cost_new = sum_sq(&r_new);
            if cost_new < cost {
                x = candidate;
                r = r_new;
                debug_assert!(cost_new <= cost);
                cost = cost_new;
                history.push(cost.sqrt());
                lambda = (lambda / 10.0).max(1e-15);
                break;
            }
            lambda *= 10.0;
            if lambda > 1e20 {
                // No representable descent direction left.
                converged = true;
                break 'outer;
            }
        }
    }

    let jac = problem.jacobian(x, &r, options.jacobian_step, bounds);
    let (a, _) = normal_equations(&jac, &r);
    let dof = problem.n_residuals.saturating_sub(3).max(1) as f64;
    let s2 = cost / dof;
    let covariance = invert3(a).map(|inv| {
        let mut c = inv;
        for row in c.iter_mut() {
            for v in row.iter_mut() {
                *v *= s2;
            }
        }
        c
    });
    let message = (!converged).then(|| format!("no convergence after {iterations} iterations"));
    Ok(FitResult {
        params: SqNoiseParams::from_array(x),
        residual_norm: cost.sqrt(),
        covariance,
        iterations,
        converged,
        message,
        residual_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfit::sweep::{run_grid, GridMode, SweepVariant};

    #[test]
    fn invert3_round_trip() {
        let m = [[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]];
        let inv = invert3(m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| m[i][k] * inv[k][j]).sum();
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        assert!(invert3([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]]).is_none());
    }

    #[test]
    fn recovers_analytic_truth() {
        let spec = SweepSpec::default();
        let truth = SqNoiseParams::new(0.01, 0.005, 0.002).unwrap();
        let map = run_grid(&spec, &truth, GridMode::Analytic, 0).unwrap();
        let fit = lm_fit(&map, &spec, &SqNoiseParams::zero(), &Bounds::default()).unwrap();
        assert!(fit.converged, "{fit:?}");
        for (a, b) in fit.params.as_array().iter().zip(truth.as_array()) {
            assert!((a - b).abs() < 1e-4, "{fit:?}");
        }
        assert!(fit.residual_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn zero_noise_fit_stays_at_zero() {
        let spec = SweepSpec::default();
        let map = run_grid(&spec, &SqNoiseParams::zero(), GridMode::Analytic, 0).unwrap();
        let fit = lm_fit(&map, &spec, &SqNoiseParams::zero(), &Bounds::default()).unwrap();
        for v in fit.params.as_array() {
            assert!(v.abs() < 1e-6, "{fit:?}");
        }
    }

    #[test]
    fn joint_fit_over_variants() {
        let truth = SqNoiseParams::new(-0.008, 0.01, -0.003).unwrap();
        let specs: Vec<SweepSpec> = SweepVariant::ALL.iter().map(|&v| SweepSpec::with_variant(v)).collect();
        let maps: Vec<PhaseSpaceMap> = specs
            .iter()
            .map(|s| run_grid(s, &truth, GridMode::Analytic, 0).unwrap())
            .collect();
        let data: Vec<_> = maps.iter().zip(&specs).collect();
        let fit = lm_fit_joint(&data, &SqNoiseParams::zero(), &Bounds::default(), &FitOptions::default()).unwrap();
        for (a, b) in fit.params.as_array().iter().zip(truth.as_array()) {
            assert!((a - b).abs() < 1e-5, "{fit:?}");
        }
    }

    #[test]
    fn degenerate_grid_is_reported() {
        let spec = SweepSpec { n_points: 3, ..SweepSpec::default() };
        let mut map = run_grid(&spec, &SqNoiseParams::zero(), GridMode::Analytic, 0).unwrap();
        for r in &mut map.records {
            r.p0 = 0.5;
        }
        let fit = lm_fit(&map, &spec, &SqNoiseParams::zero(), &Bounds::default()).unwrap();
        assert!(!fit.converged);
        assert!(fit.message.unwrap().contains("degenerate"));
    }

    #[test]
    fn incomplete_grid_is_rejected() {
        let spec = SweepSpec { n_points: 3, ..SweepSpec::default() };
        let mut map = run_grid(&spec, &SqNoiseParams::zero(), GridMode::Analytic, 0).unwrap();
        map.records.pop();
        assert!(lm_fit(&map, &spec, &SqNoiseParams::zero(), &Bounds::default()).is_err());
    }

    #[test]
    fn report_shape() {
        let spec = SweepSpec::default();
        let truth = SqNoiseParams::new(0.01, 0.0, 0.0).unwrap();
        let map = run_grid(&spec, &truth, GridMode::Sampled, 4).unwrap();
        let fit = lm_fit(&map, &spec, &SqNoiseParams::zero(), &Bounds::default()).unwrap();
        let report = fit.report();
        assert_eq!(report.covariance.as_ref().map(|c| c.len()), Some(9));
        let cov = fit.covariance.unwrap();
        for i in 0..3 {
            assert!(cov[i][i] >= 0.0);
            for j in 0..3 {
                assert!((cov[i][j] - cov[j][i]).abs() <= 1e-12 * cov[i][i].abs().max(cov[j][j].abs()).max(1e-30));
            }
        }
    }
}
