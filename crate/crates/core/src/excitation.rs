//! Numerical verification of the finite-excitation condition.
//!
//! A regressor is finitely and continuously exciting over `[t_r⁺, t_e]` when
//! the Gram integral over the whole window and over every sliding `Ts`-window
//! inside it stays uniformly positive definite. Both levels are measured here
//! for the raw regressor and for its lifted counterpart, the latter because
//! the lift is assumed (not proved) to preserve excitation and the achieved
//! level enters the bound constants.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lift::lift;
use crate::mixing::min_max_eigenvalues;
use crate::signals::Scenario;

/// A regressor sampled on a uniform time grid.
#[derive(Debug, Clone)]
pub struct RegressorTrace {
    pub t0: f64,
    pub dt: f64,
    pub samples: Vec<DMatrix<f64>>,
}

impl RegressorTrace {
    pub fn t_end(&self) -> f64 {
        self.t0 + self.dt * (self.samples.len().saturating_sub(1)) as f64
    }

    fn index_of(&self, t: f64) -> Result<usize> {
        let idx = (t - self.t0) / self.dt;
        let rounded = idx.round();
        if (idx - rounded).abs() > 1e-6 || rounded < 0.0 || rounded as usize >= self.samples.len() {
            return Err(Error::WindowOutOfRange {
                t_a: t,
                t_b: t,
                t0: self.t0,
                t1: self.t_end(),
            });
        }
        Ok(rounded as usize)
    }
}

/// Sample the raw regressor `ω(t)` at the scenario step over `[t0, t1]`.
pub fn sample_regressor(scenario: &Scenario, t0: f64, t1: f64) -> Result<RegressorTrace> {
    let steps = ((t1 - t0) / scenario.dt).round() as usize;
    let mut samples = Vec::with_capacity(steps + 1);
    for s in 0..=steps {
        let t = t0 + s as f64 * scenario.dt;
        samples.push(scenario.eval_regressor(t.min(scenario.t_end))?);
    }
    Ok(RegressorTrace { t0, dt: scenario.dt, samples })
}

/// Sample the lifted regressor `ω̄(t)` on the scenario's grid over `[t0, t1]`.
pub fn sample_lifted(scenario: &Scenario, t0: f64, t1: f64) -> Result<RegressorTrace> {
    let steps = ((t1 - t0) / scenario.dt).round() as usize;
    let mut samples = Vec::with_capacity(steps + 1);
    for s in 0..=steps {
        let t = t0 + s as f64 * scenario.dt;
        let omega = scenario.eval_regressor(t.min(scenario.t_end))?;
        let (_, t_i) = scenario.grid.interval_index(t);
        samples.push(lift(&omega, t, t_i));
    }
    Ok(RegressorTrace { t0, dt: scenario.dt, samples })
}

/// Trapezoidal Gram integral `∫_{t_a}^{t_b} φ(τ)φᵀ(τ) dτ` at the trace
/// resolution.
pub fn gram(trace: &RegressorTrace, t_a: f64, t_b: f64) -> Result<DMatrix<f64>> {
    if t_a >= t_b {
        return Err(Error::WindowOutOfRange {
            t_a,
            t_b,
            t0: trace.t0,
            t1: trace.t_end(),
        });
    }
    let ia = trace.index_of(t_a)?;
    let ib = trace.index_of(t_b)?;
    let rows = trace.samples[0].nrows();
    let mut acc = DMatrix::zeros(rows, rows);
    for s in ia..ib {
        let g0 = &trace.samples[s] * trace.samples[s].transpose();
        let g1 = &trace.samples[s + 1] * trace.samples[s + 1].transpose();
        acc += (g0 + g1) * (trace.dt / 2.0);
    }
    Ok(acc)
}

/// Excitation levels measured for one regressor.
#[derive(Debug, Clone, Copy)]
pub struct ExcitationLevels {
    /// Regressor row dimension.
    pub dim: usize,
    /// `λ_min` of the full-window Gram.
    pub alpha1: f64,
    /// Minimum over all window starts of `λ_min` of the sliding Gram.
    pub alpha2: f64,
    /// `λ_max` of the full-window Gram (scale reference).
    pub lambda_max_full: f64,
    /// Positivity threshold used for `satisfied`, `1e−9·max(1, λ_max)`.
    pub threshold: f64,
    /// Both levels clear the threshold.
    pub satisfied: bool,
}

/// Excitation report over `[t_r⁺, t_e]` for the raw and lifted regressors.
#[derive(Debug, Clone)]
pub struct ExcitationReport {
    pub t_r_plus: f64,
    pub t_e: f64,
    pub ts: f64,
    pub raw: ExcitationLevels,
    pub lifted: ExcitationLevels,
}

/// Verify the finite-excitation condition on `[t_r⁺, t_e]` with sliding
/// windows of width `ts`.
///
/// Window starts are swept at the trace resolution: the sliding level is a
/// minimum, and coarse sampling would overestimate it. Prefix-summed Grams
/// make each window O(1) after one pass.
pub fn check_fe(scenario: &Scenario, t_r_plus: f64, t_e: f64, ts: f64) -> Result<ExcitationReport> {
    if t_e - t_r_plus < ts {
        return Err(Error::InvalidScenario(format!(
            "excitation window [{t_r_plus}, {t_e}] is narrower than the sliding width {ts}"
        )));
    }
    let raw_trace = sample_regressor(scenario, t_r_plus, t_e)?;
    let lifted_trace = sample_lifted(scenario, t_r_plus, t_e)?;
    let window_steps = (ts / scenario.dt).round() as usize;
    let raw = levels(&raw_trace, window_steps)?;
    let lifted = levels(&lifted_trace, window_steps)?;
    Ok(ExcitationReport {
        t_r_plus,
        t_e,
        ts,
        raw,
        lifted,
    })
}

fn levels(trace: &RegressorTrace, window_steps: usize) -> Result<ExcitationLevels> {
    let dim = trace.samples[0].nrows();
    let count = trace.samples.len();

    // Prefix trapezoid sums of the instantaneous Grams.
    let mut prefix = Vec::with_capacity(count);
    prefix.push(DMatrix::<f64>::zeros(dim, dim));
    let mut instant: Vec<DMatrix<f64>> = trace
        .samples
        .iter()
        .map(|s| s * s.transpose())
        .collect();
    for s in 1..count {
        let step = (instant[s - 1].clone() + &instant[s]) * (trace.dt / 2.0);
        let acc = prefix[s - 1].clone() + step;
        prefix.push(acc);
    }
    instant.clear();

    let full = prefix[count - 1].clone() - &prefix[0];
    let (alpha1, lambda_max_full) = min_max_eigenvalues(&full)?;

    let mut alpha2 = f64::INFINITY;
    for start in 0..count - window_steps {
        let window = prefix[start + window_steps].clone() - &prefix[start];
        let (lo, _) = min_max_eigenvalues(&window)?;
        alpha2 = alpha2.min(lo);
    }

    let threshold = 1e-9 * lambda_max_full.max(1.0);
    Ok(ExcitationLevels {
        dim,
        alpha1,
        alpha2,
        lambda_max_full,
        threshold,
        satisfied: alpha1 > threshold && alpha2 > threshold,
    })
}

impl fmt::Display for ExcitationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "excitation report")?;
        writeln!(f, "  window: [{:.6}, {:.6}] s", self.t_r_plus, self.t_e)?;
        writeln!(f, "  sliding width ts: {:.6} s", self.ts)?;
        for (name, lv) in [("raw", &self.raw), ("lifted", &self.lifted)] {
            writeln!(f, "  {name} regressor (dim {})", lv.dim)?;
            writeln!(f, "    alpha1 (full-window lambda_min): {:.6e}", lv.alpha1)?;
            writeln!(f, "    alpha2 (sliding-window minimum): {:.6e}", lv.alpha2)?;
            writeln!(f, "    lambda_max (full window):        {:.6e}", lv.lambda_max_full)?;
            writeln!(f, "    positivity threshold:            {:.6e}", lv.threshold)?;
            writeln!(f, "    satisfied: {}", lv.satisfied)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{preset, Preset};
    use crate::signals::{DisturbanceSpec, SignalExpr};

    #[test]
    fn gram_of_zero_regressor_vanishes() {
        let mut sc = preset(Preset::Experiment1);
        sc.regressor = vec![SignalExpr::constant(0.0), SignalExpr::constant(0.0)];
        sc.disturbance = DisturbanceSpec::None;
        let trace = sample_regressor(&sc, 0.0, 1.0).unwrap();
        let g = gram(&trace, 0.0, 1.0).unwrap();
        assert_eq!(g.norm(), 0.0);

        let report = check_fe(&sc, 0.0, 1.0, 0.1).unwrap();
        assert!(!report.raw.satisfied);
    }

    #[test]
    fn gram_of_constant_regressor_is_scaled_outer_product() {
        let mut sc = preset(Preset::Experiment1);
        sc.regressor = vec![SignalExpr::constant(2.0), SignalExpr::constant(-1.0)];
        let trace = sample_regressor(&sc, 0.0, 2.0).unwrap();
        let g = gram(&trace, 0.5, 1.5).unwrap();
        let v = DMatrix::from_column_slice(2, 1, &[2.0, -1.0]);
        let expected = &v * v.transpose();
        assert!((g - expected).norm() < 1e-10);
    }

    #[test]
    fn gram_rejects_bad_windows() {
        let sc = preset(Preset::Experiment1);
        let trace = sample_regressor(&sc, 0.0, 1.0).unwrap();
        assert!(gram(&trace, 0.5, 0.5).is_err());
        assert!(gram(&trace, 0.0, 2.0).is_err());
        assert!(gram(&trace, -0.5, 0.5).is_err());
    }

    #[test]
    fn experiment_regressor_full_window_level() {
        // ∫₀¹⁰ of [3sin(4πτ); 2.5][..]ᵀ is diag(45, 62.5): twenty whole
        // periods kill the off-diagonal terms.
        let sc = preset(Preset::Experiment1);
        let trace = sample_regressor(&sc, 0.0, 10.0).unwrap();
        let g = gram(&trace, 0.0, 10.0).unwrap();
        let (lo, hi) = min_max_eigenvalues(&g).unwrap();
        assert!((lo - 45.0).abs() < 0.02 * 45.0, "alpha1 = {lo}");
        assert!((hi - 62.5).abs() < 0.02 * 62.5);
    }

    #[test]
    fn experiment_regressor_loses_excitation_after_switch() {
        let sc = preset(Preset::Experiment1);
        let trace = sample_regressor(&sc, 10.0, 20.0).unwrap();
        let g = gram(&trace, 10.0, 20.0).unwrap();
        let (lo, _) = min_max_eigenvalues(&g).unwrap();
        // Rows are linearly dependent there; only rounding noise remains.
        assert!(lo.abs() < 1e-8, "lambda_min = {lo}");
    }

    #[test]
    fn windows_are_symmetric_psd() {
        let sc = preset(Preset::Experiment1);
        let trace = sample_regressor(&sc, 0.0, 2.0).unwrap();
        for k in 0..10 {
            let a = 0.13 * k as f64;
            // Snap to the sample grid.
            let a = (a / sc.dt).round() * sc.dt;
            let g = gram(&trace, a, a + 0.5).unwrap();
            assert!((g.clone() - g.transpose()).amax() < 1e-12);
            let (lo, _) = min_max_eigenvalues(&g).unwrap();
            assert!(lo > -1e-10);
        }
    }
}
