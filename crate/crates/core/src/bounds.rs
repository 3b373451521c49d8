//! Theoretical error-bound constants and trace audits.
//!
//! Everything here evaluates the bound expressions of the convergence
//! analysis literally from scenario-derived suprema and run observations, so
//! a finished trace can be checked against "observed error ≤ theoretical
//! bound". The bounds are audited as upper bounds only; they are conservative
//! by construction, often by many orders of magnitude.
//!
//! Two interpretation notes apply everywhere and are repeated in the reports:
//! determinant-related exponents use the true lifted Gram size `2n`, and the
//! interpolation-matrix supremum `Λ_max` is measured numerically as the
//! largest spectral norm of `Λ(t, t_i)` over one interval.

use std::fmt;

use crate::error::Result;
use crate::harness::Trace;
use crate::lift::{lambda_matrix, lift};
use crate::mixing::min_max_eigenvalues;
use crate::signals::{DisturbanceSpec, Scenario, TruthEval};

/// Scenario- and trace-derived quantities feeding the bound constants.
#[derive(Debug, Clone, Copy)]
pub struct BoundInputs {
    /// Parameter dimension `n`.
    pub dim: usize,
    pub omega_max: f64,
    pub theta_max: f64,
    pub theta_dot_max: f64,
    pub theta_ddot_max: f64,
    pub d_max: f64,
    /// Sliding-window excitation level measured for the lifted regressor.
    pub alpha2_lifted: f64,
    /// Worst per-interval supremum of `λ_max(ω̄ω̄ᵀ)`.
    pub delta_sup: f64,
    /// Supremum of the interpolation-matrix spectral norm over an interval.
    pub lambda_interp_sup: f64,
    /// Grid interval width `T`.
    pub t_interval: f64,
    pub beta: f64,
    pub gamma0: f64,
    pub sigma: f64,
    /// Extreme eigenvalues of the gradient gain `Γ`.
    pub gamma_eig_min: f64,
    pub gamma_eig_max: f64,
    /// Worst observed crossing offset `T₀ₖ − t_i` (the interval width when
    /// the scalar regressor never crossed the threshold).
    pub t0k_offset: f64,
    /// Smallest observed `Ω(T₀ₖ)` across intervals (zero when never crossed).
    pub omega_t0k: f64,
    /// Largest true-parameter jump between grid points.
    pub delta1_max: f64,
}

/// Asymptotic error bound, finite only under the contraction condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AsymptoticBound {
    Finite(f64),
    /// Contraction condition violated (or the floor is infinite): the bound
    /// expression carries no information.
    Vacuous,
}

impl AsymptoticBound {
    pub fn value(&self) -> f64 {
        match self {
            AsymptoticBound::Finite(v) => *v,
            AsymptoticBound::Vacuous => f64::INFINITY,
        }
    }
}

/// Every constant of the convergence analysis, evaluated literally.
#[derive(Debug, Clone, Copy)]
pub struct BoundConstants {
    /// `a₁ = sqrt(λ_max(Γ⁻¹)/λ_min(Γ⁻¹))`
    pub a1: f64,
    /// `η = σ/(2 λ_max(Γ⁻¹))`
    pub eta: f64,
    /// `b₁ = a₁((d_max + T·Θ̇_max·ω_max) + √σ·Θ_max)/√σ`
    pub b1: f64,
    /// `a = a₁·e^{−η(T₀ₖ − t_i)}`
    pub a: f64,
    /// `ΔT = (t_i + T − T₀ₖ)/2`
    pub delta_t: f64,
    /// `b = e^{−γ₀ΔT}·b₁ + μ_max/Ω(T₀ₖ)`
    pub b: f64,
    /// `μ_max = (0.5T²Θ̈_max·ω_max² + d_max·ω_max)·δ·Λ_max·√(2n)/β²`
    pub mu_max: f64,
    /// `Ω_LB = e^{−2nβT}·α₂^{2n}` with the lifted excitation level.
    pub omega_lb: f64,
    /// `Ω_UB = (δ/β)^{2n}`
    pub omega_ub: f64,
    /// Lift residual bound `ε_max = 0.5·Θ̈_max·T²·ω_max + d_max`.
    pub eps_max: f64,
    /// Gain threshold `γ₀ > (1/ΔT)·ln(1/a)` for a finite asymptotic bound.
    pub gamma0_min: f64,
    /// Per-interval contraction factor `a·e^{−γ₀ΔT}` during excitation.
    pub contraction_fe: f64,
    /// Per-interval factor `a₁·e^{−ηT}` after excitation is lost.
    pub contraction_post: f64,
    /// Zero-order interpolation floor `Θ̇_max·T`.
    pub drift_term: f64,
    /// Asymptotic bound at the inputs' `Δ₁max`.
    pub asymptotic: AsymptoticBound,
    /// Grid interval width (carried for the post-excitation recursion).
    pub t_interval: f64,
    pub gamma0: f64,
}

/// Evaluate all bound constants from the inputs.
pub fn compute_constants(inputs: &BoundInputs) -> BoundConstants {
    let two_n = 2 * inputs.dim as i32;
    // λ(Γ⁻¹) extremes come from the extremes of Γ itself.
    let inv_gamma_max = 1.0 / inputs.gamma_eig_min;
    let inv_gamma_min = 1.0 / inputs.gamma_eig_max;
    let a1 = (inv_gamma_max / inv_gamma_min).sqrt();
    let eta = inputs.sigma / (2.0 * inv_gamma_max);
    let sqrt_sigma = inputs.sigma.sqrt();
    let b1 = a1
        * ((inputs.d_max + inputs.t_interval * inputs.theta_dot_max * inputs.omega_max)
            + sqrt_sigma * inputs.theta_max)
        / sqrt_sigma;

    let a = a1 * (-eta * inputs.t0k_offset).exp();
    let delta_t = (inputs.t_interval - inputs.t0k_offset) / 2.0;
    let mu_max = (0.5 * inputs.t_interval.powi(2) * inputs.theta_ddot_max * inputs.omega_max.powi(2)
        + inputs.d_max * inputs.omega_max)
        * inputs.delta_sup
        * inputs.lambda_interp_sup
        * (two_n as f64).sqrt()
        / inputs.beta.powi(2);
    let b = if inputs.omega_t0k > 0.0 {
        (-inputs.gamma0 * delta_t).exp() * b1 + mu_max / inputs.omega_t0k
    } else {
        f64::INFINITY
    };

    let omega_lb = (-(two_n as f64) * inputs.beta * inputs.t_interval).exp()
        * inputs.alpha2_lifted.max(0.0).powi(two_n);
    let omega_ub = (inputs.delta_sup / inputs.beta).powi(two_n);
    let eps_max =
        0.5 * inputs.theta_ddot_max * inputs.t_interval.powi(2) * inputs.omega_max + inputs.d_max;

    let gamma0_min = if delta_t > 0.0 {
        (1.0 / delta_t) * (1.0 / a).ln()
    } else {
        f64::INFINITY
    };
    let contraction_fe = a * (-inputs.gamma0 * delta_t).exp();
    let contraction_post = a1 * (-eta * inputs.t_interval).exp();
    let drift_term = inputs.theta_dot_max * inputs.t_interval;

    let mut constants = BoundConstants {
        a1,
        eta,
        b1,
        a,
        delta_t,
        b,
        mu_max,
        omega_lb,
        omega_ub,
        eps_max,
        gamma0_min,
        contraction_fe,
        contraction_post,
        drift_term,
        asymptotic: AsymptoticBound::Vacuous,
        t_interval: inputs.t_interval,
        gamma0: inputs.gamma0,
    };
    constants.asymptotic = asymptotic_bound(&constants, inputs.delta1_max);
    constants
}

/// Partial geometric sum `1 + q + … + q^{j−1}`.
fn geometric_partial(q: f64, j: usize) -> f64 {
    if (q - 1.0).abs() < 1e-12 {
        j as f64
    } else {
        (q.powi(j as i32) - 1.0) / (q - 1.0)
    }
}

/// Error bound after `k + 1` excited intervals:
///
/// `q^{k+1}·‖Θ̃(t_r⁺)‖ + (1 + … + q^{k−1})·q·Δ₁max + (1 + … + q^k)·b + Θ̇_max·T`
///
/// with `q = a·e^{−γ₀ΔT}`.
pub fn error_bound_fe(
    k: usize,
    theta_tilde_0: f64,
    constants: &BoundConstants,
    delta1_max: f64,
) -> f64 {
    let q = constants.contraction_fe;
    q.powi(k as i32 + 1) * theta_tilde_0
        + geometric_partial(q, k) * q * delta1_max
        + geometric_partial(q, k + 1) * constants.b
        + constants.drift_term
}

/// Limit of the excited-interval bound, finite when `a·e^{−γ₀ΔT} < 1`.
pub fn asymptotic_bound(constants: &BoundConstants, delta1_max: f64) -> AsymptoticBound {
    let q = constants.contraction_fe;
    if q >= 1.0 || !constants.b.is_finite() {
        return AsymptoticBound::Vacuous;
    }
    AsymptoticBound::Finite(
        (q * delta1_max + constants.b) / (1.0 - q) + constants.drift_term,
    )
}

/// Error bound `i + 1` intervals after excitation was lost, same recursion
/// with `(a₁, e^{−ηT}, b₁)`.
pub fn error_bound_post(
    i: usize,
    theta_tilde_te: f64,
    constants: &BoundConstants,
    delta1_max: f64,
) -> f64 {
    let q = constants.contraction_post;
    q.powi(i as i32 + 1) * theta_tilde_te
        + geometric_partial(q, i) * q * delta1_max
        + geometric_partial(q, i + 1) * constants.b1
        + constants.drift_term
}

/// Per-interval results of the scalar-regressor audit.
#[derive(Debug, Clone, Copy)]
pub struct IntervalAudit {
    pub index: usize,
    pub t_start: f64,
    pub t_end: f64,
    /// Steps where `Ω < 0` (must be zero).
    pub nonneg_violations: usize,
    /// Steps where `Ω` decreased within the interval beyond rounding.
    pub mono_violations: usize,
    /// Offset of the first threshold crossing, `T₀ₖ − t_i`.
    pub t0k_offset: Option<f64>,
    pub omega_at_t0k: Option<f64>,
    pub omega_end: f64,
    pub omega_peak: f64,
    /// Interval supremum of `λ_max(ω̄ω̄ᵀ)`.
    pub delta_k: f64,
    /// `(δ_k/β)^{2n}`
    pub omega_ub: f64,
    /// Steps where `Ω` exceeded the upper bound.
    pub ub_violations: usize,
    /// Largest observed `‖Y − Ω·Θ_i‖` (noise-free runs only).
    pub mu_peak: Option<f64>,
}

/// Structural audit of the scalar regressor over a full trace.
#[derive(Debug, Clone)]
pub struct ScalarRegressorAudit {
    pub kappa: f64,
    pub intervals: Vec<IntervalAudit>,
    pub total_nonneg_violations: usize,
    pub total_mono_violations: usize,
    pub total_ub_violations: usize,
    /// Worst crossing offset among intervals that crossed.
    pub worst_t0k_offset: Option<f64>,
    /// Smallest `Ω(T₀ₖ)` among intervals that crossed.
    pub min_omega_t0k: Option<f64>,
    /// Largest `‖Y − Ω·Θ_i‖` over the run (noise-free runs only).
    pub mu_peak: Option<f64>,
}

/// Audit the logged scalar regressor against its structural guarantees:
/// nonnegativity, within-interval monotonicity, the per-interval upper bound,
/// threshold crossings, and (noise-free runs) the mixed-perturbation proxy
/// `μ = Y − Ω·Θ_i`.
pub fn audit_scalar_regressor(scenario: &Scenario, trace: &Trace) -> Result<ScalarRegressorAudit> {
    let truth = TruthEval::new(scenario);
    let noise_free = matches!(scenario.disturbance, DisturbanceSpec::None);
    let kappa = scenario.gains.kappa;
    let two_n = 2 * scenario.n as i32;

    let mut intervals = Vec::new();
    let mut start = 0usize;
    while start < trace.len() {
        let id = trace.interval[start];
        let mut end = start;
        while end + 1 < trace.len() && trace.interval[end + 1] == id {
            end += 1;
        }

        let t_start = trace.t[start];
        let (theta_i, _, _) = truth.eval(t_start);
        let omega_peak = trace.omega_det[start..=end].iter().fold(0.0f64, |a, &b| a.max(b));

        let mut audit = IntervalAudit {
            index: id,
            t_start,
            t_end: trace.t[end],
            nonneg_violations: 0,
            mono_violations: 0,
            t0k_offset: None,
            omega_at_t0k: None,
            omega_end: trace.omega_det[end],
            omega_peak,
            delta_k: 0.0,
            omega_ub: 0.0,
            ub_violations: 0,
            mu_peak: None,
        };

        for s in start..=end {
            let omega = trace.omega_det[s];
            if omega < 0.0 {
                audit.nonneg_violations += 1;
            }
            // The determinant of the filtered Gram is evaluated with an
            // absolute rounding scale of order ‖ω_f‖^{2n}·ε, which dwarfs
            // the per-step increments for much of an interval; a decrease
            // only counts once it clears that scale.
            let mono_tol = 1e-9 * trace.gram_norm[s].powi(two_n).max(1.0);
            if s > start && omega < trace.omega_det[s - 1] - mono_tol {
                audit.mono_violations += 1;
            }
            if audit.t0k_offset.is_none() && omega >= kappa {
                audit.t0k_offset = Some(trace.t[s] - t_start);
                audit.omega_at_t0k = Some(omega);
            }
            // δ_k from the lifted regressor along the interval.
            let omega_row = scenario.eval_regressor(trace.t[s])?;
            let bar = lift(&omega_row, trace.t[s], t_start);
            let small_gram = bar.transpose() * &bar;
            let (_, lam_max) = min_max_eigenvalues(&small_gram)?;
            audit.delta_k = audit.delta_k.max(lam_max);

            if noise_free {
                let mu = trace.mixed_y_at(s) - &theta_i * omega;
                let peak = audit.mu_peak.unwrap_or(0.0).max(mu.norm());
                audit.mu_peak = Some(peak);
            }
        }

        audit.omega_ub = (audit.delta_k / scenario.beta).powi(two_n);
        for s in start..=end {
            if trace.omega_det[s] > audit.omega_ub * (1.0 + 1e-9) {
                audit.ub_violations += 1;
            }
        }

        intervals.push(audit);
        start = end + 1;
    }

    let total_nonneg_violations = intervals.iter().map(|a| a.nonneg_violations).sum();
    let total_mono_violations = intervals.iter().map(|a| a.mono_violations).sum();
    let total_ub_violations = intervals.iter().map(|a| a.ub_violations).sum();
    let worst_t0k_offset = intervals
        .iter()
        .filter_map(|a| a.t0k_offset)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    let min_omega_t0k = intervals
        .iter()
        .filter_map(|a| a.omega_at_t0k)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))));
    let mu_peak = intervals
        .iter()
        .filter_map(|a| a.mu_peak)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));

    Ok(ScalarRegressorAudit {
        kappa,
        intervals,
        total_nonneg_violations,
        total_mono_violations,
        total_ub_violations,
        worst_t0k_offset,
        min_omega_t0k,
        mu_peak,
    })
}

/// Interval-end parameter errors extracted from a trace.
#[derive(Debug, Clone, Copy)]
pub struct IntervalEndError {
    /// Index of the interval that just ended.
    pub index: usize,
    /// Boundary time `t_i + T`.
    pub t_boundary: f64,
    /// `‖Θ̂(t_i + T) − Θ(t_i)‖`, the piecewise-approximation error.
    pub err_vs_interval_start: f64,
    /// `‖Θ̂(t_i + T) − Θ(t_i + T)‖`, the same estimate against the current
    /// truth.
    pub err_vs_boundary: f64,
}

/// Collect both interval-end error readings at every grid boundary.
pub fn interval_end_errors(scenario: &Scenario, trace: &Trace) -> Vec<IntervalEndError> {
    let truth = TruthEval::new(scenario);
    let mut out = Vec::new();
    let mut interval_start_t = trace.t.first().copied().unwrap_or(0.0);
    for s in 1..trace.len() {
        if trace.interval[s] != trace.interval[s - 1] {
            let theta_hat = trace.theta_hat_at(s);
            let (theta_start, _, _) = truth.eval(interval_start_t);
            let (theta_now, _, _) = truth.eval(trace.t[s]);
            out.push(IntervalEndError {
                index: trace.interval[s - 1],
                t_boundary: trace.t[s],
                err_vs_interval_start: (&theta_hat - theta_start).norm(),
                err_vs_boundary: (&theta_hat - theta_now).norm(),
            });
            interval_start_t = trace.t[s];
        }
    }
    out
}

/// Assemble bound inputs from a finished run.
///
/// `alpha2_lifted` comes from an excitation report over the window
/// `[t_r⁺, fe_end]`; the crossing statistics come from the trace audit,
/// restricted to intervals that lie inside the excitation window. When no
/// interval crossed the threshold the pessimistic fallback (`T₀ₖ` at the
/// interval end, `Ω(T₀ₖ) = 0`) makes the bounds vacuous rather than wrong.
pub fn bound_inputs_from_run(
    scenario: &Scenario,
    trace: &Trace,
    alpha2_lifted: f64,
    fe_end: f64,
) -> Result<BoundInputs> {
    let sup = scenario.suprema();
    let audit = audit_scalar_regressor(scenario, trace)?;
    let in_window = |a: &&IntervalAudit| a.t_start >= scenario.grid.t_r_plus - 1e-12
        && a.t_end <= fe_end + 1e-12;
    let t0k_offset = audit
        .intervals
        .iter()
        .filter(in_window)
        .map(|a| a.t0k_offset.unwrap_or(scenario.grid.interval))
        .fold(0.0f64, f64::max);
    let omega_t0k = audit
        .intervals
        .iter()
        .filter(in_window)
        .map(|a| a.omega_at_t0k.unwrap_or(0.0))
        .fold(f64::INFINITY, f64::min);
    let omega_t0k = if omega_t0k.is_finite() { omega_t0k } else { 0.0 };
    let delta_sup = audit
        .intervals
        .iter()
        .filter(in_window)
        .map(|a| a.delta_k)
        .fold(0.0f64, f64::max);

    // Λ_max over one interval, sampled at the trace step.
    let mut lambda_interp_sup = 0.0f64;
    let steps = (scenario.grid.interval / scenario.dt).round() as usize;
    for s in 0..=steps {
        let offset = s as f64 * scenario.dt;
        let lam = lambda_matrix(offset, 0.0, scenario.n);
        let (_, top) = min_max_eigenvalues(&(&lam * lam.transpose()))?;
        lambda_interp_sup = lambda_interp_sup.max(top.sqrt());
    }

    let (gamma_eig_min, gamma_eig_max) = scenario.gains.gamma_eigenvalues()?;
    Ok(BoundInputs {
        dim: scenario.n,
        omega_max: sup.omega_max,
        theta_max: sup.theta_max,
        theta_dot_max: sup.theta_dot_max,
        theta_ddot_max: sup.theta_ddot_max,
        d_max: sup.d_max,
        alpha2_lifted,
        delta_sup,
        lambda_interp_sup,
        t_interval: scenario.grid.interval,
        beta: scenario.beta,
        gamma0: scenario.gains.gamma0,
        sigma: scenario.gains.sigma,
        gamma_eig_min,
        gamma_eig_max,
        t0k_offset,
        omega_t0k,
        delta1_max: scenario.delta1_max(),
    })
}

impl fmt::Display for BoundConstants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "bound constants")?;
        writeln!(f, "  a1:               {:.12e}", self.a1)?;
        writeln!(f, "  eta:              {:.12e}", self.eta)?;
        writeln!(f, "  b1:               {:.12e}", self.b1)?;
        writeln!(f, "  a:                {:.12e}", self.a)?;
        writeln!(f, "  delta_t:          {:.12e}", self.delta_t)?;
        writeln!(f, "  b:                {:.12e}", self.b)?;
        writeln!(f, "  mu_max:           {:.12e}", self.mu_max)?;
        writeln!(f, "  omega_lb:         {:.12e}", self.omega_lb)?;
        writeln!(f, "  omega_ub:         {:.12e}", self.omega_ub)?;
        writeln!(f, "  eps_max:          {:.12e}", self.eps_max)?;
        writeln!(f, "  gamma0_min:       {:.12e}", self.gamma0_min)?;
        writeln!(f, "  contraction_fe:   {:.12e}", self.contraction_fe)?;
        writeln!(f, "  contraction_post: {:.12e}", self.contraction_post)?;
        writeln!(f, "  drift_term:       {:.12e}", self.drift_term)?;
        match self.asymptotic {
            AsymptoticBound::Finite(v) => writeln!(f, "  asymptotic bound: {v:.12e}")?,
            AsymptoticBound::Vacuous => {
                writeln!(f, "  asymptotic bound: vacuous (contraction condition not met)")?
            }
        }
        writeln!(f, "notes")?;
        writeln!(f, "  - determinant exponents use the lifted Gram size 2n")?;
        writeln!(
            f,
            "  - Lambda_max is the sampled supremum of the interpolation-matrix spectral norm"
        )?;
        Ok(())
    }
}

impl fmt::Display for ScalarRegressorAudit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scalar regressor audit (kappa = {:.3e})", self.kappa)?;
        writeln!(f, "  intervals:              {}", self.intervals.len())?;
        writeln!(f, "  nonnegativity breaches: {}", self.total_nonneg_violations)?;
        writeln!(f, "  monotonicity breaches:  {}", self.total_mono_violations)?;
        writeln!(f, "  upper-bound breaches:   {}", self.total_ub_violations)?;
        match self.worst_t0k_offset {
            Some(v) => writeln!(f, "  worst crossing offset:  {v:.6e} s")?,
            None => writeln!(f, "  worst crossing offset:  never crossed")?,
        }
        match self.min_omega_t0k {
            Some(v) => writeln!(f, "  min Omega at crossing:  {v:.6e}")?,
            None => writeln!(f, "  min Omega at crossing:  never crossed")?,
        }
        if let Some(mu) = self.mu_peak {
            writeln!(f, "  peak ||Y - Omega*Theta_i||: {mu:.6e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn reference_inputs() -> BoundInputs {
        BoundInputs {
            dim: 2,
            omega_max: 3.9,
            theta_max: 4.9,
            theta_dot_max: 1.118,
            theta_ddot_max: 1.016,
            d_max: 0.0,
            alpha2_lifted: 1e-3,
            delta_sup: 16.2,
            lambda_interp_sup: 1.031,
            t_interval: 0.25,
            beta: 0.2,
            gamma0: 100.0,
            sigma: 1e-4,
            gamma_eig_min: 0.75,
            gamma_eig_max: 0.75,
            t0k_offset: 0.05,
            omega_t0k: 1e-9,
            delta1_max: 0.28,
        }
    }

    #[test]
    fn scalar_gamma_gives_unit_a1() {
        let c = compute_constants(&reference_inputs());
        assert!((c.a1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eta_closed_form() {
        // η = σ/(2·λ_max(Γ⁻¹)) = 1e-4/(2·(4/3)) = 3.75e-5 for Γ = 0.75 I.
        let c = compute_constants(&reference_inputs());
        assert!(((c.eta - 3.75e-5) / 3.75e-5).abs() < 1e-12);
    }

    #[test]
    fn b1_matches_symbolic_evaluation() {
        let inputs = reference_inputs();
        let c = compute_constants(&inputs);
        let sqrt_sigma = inputs.sigma.sqrt();
        let expected = ((inputs.d_max + inputs.t_interval * inputs.theta_dot_max * inputs.omega_max)
            + sqrt_sigma * inputs.theta_max)
            / sqrt_sigma;
        assert!(((c.b1 - expected) / expected).abs() < 1e-12);
    }

    #[test]
    fn single_interval_bound_collapses() {
        // k = 0, Δ₁max = 0, b = 0 → q·θ̃₀ + drift.
        let mut c = compute_constants(&reference_inputs());
        c.b = 0.0;
        let theta0 = 4.47;
        let expected = c.contraction_fe * theta0 + c.drift_term;
        let got = error_bound_fe(0, theta0, &c, 0.0);
        assert!(((got - expected) / expected).abs() < 1e-12);
    }

    #[test]
    fn zero_contraction_leaves_only_floor() {
        let mut c = compute_constants(&reference_inputs());
        c.contraction_fe = 0.0;
        let got = error_bound_fe(5, 100.0, &c, 0.7);
        // One b-term survives in the partial sum.
        assert!(((got - (c.b + c.drift_term)) / got).abs() < 1e-12);
    }

    #[test]
    fn asymptotic_bound_examples() {
        let mut c = compute_constants(&reference_inputs());
        c.b = 0.0;
        c.contraction_fe = 0.0;
        match asymptotic_bound(&c, 0.0) {
            AsymptoticBound::Finite(v) => assert!((v - c.drift_term).abs() < 1e-15),
            AsymptoticBound::Vacuous => panic!("bound should be finite"),
        }

        c.contraction_fe = 1.0;
        assert_eq!(asymptotic_bound(&c, 0.0), AsymptoticBound::Vacuous);
    }

    #[test]
    fn asymptotic_bound_tightens_with_gamma0() {
        let mut prev = f64::INFINITY;
        for gamma0 in [10.0, 100.0, 1000.0] {
            let mut inputs = reference_inputs();
            inputs.gamma0 = gamma0;
            let c = compute_constants(&inputs);
            let v = c.asymptotic.value();
            assert!(v < prev, "bound must shrink as gamma0 grows");
            prev = v;
        }
    }

    #[test]
    fn drift_term_scales_linearly_with_interval() {
        let mut narrow = reference_inputs();
        narrow.t_interval = 0.125;
        let wide = compute_constants(&reference_inputs());
        let tight = compute_constants(&narrow);
        assert!((wide.drift_term - 2.0 * tight.drift_term).abs() < 1e-12);
    }

    #[test]
    fn post_bound_single_interval_collapse() {
        let c = compute_constants(&reference_inputs());
        let theta_te = 0.5;
        let expected = c.contraction_post * theta_te + c.b1 + c.drift_term;
        let got = error_bound_post(0, theta_te, &c, 0.0);
        assert!(((got - expected) / expected).abs() < 1e-12);
    }

    #[test]
    fn post_bound_is_floor_dominated_for_large_eta() {
        let mut c = compute_constants(&reference_inputs());
        c.contraction_post = 1e-30;
        let got = error_bound_post(7, 123.0, &c, 0.0);
        assert!(((got - (c.b1 + c.drift_term)) / got).abs() < 1e-9);
    }

    #[test]
    fn never_crossing_makes_bounds_vacuous() {
        let mut inputs = reference_inputs();
        inputs.omega_t0k = 0.0;
        inputs.t0k_offset = inputs.t_interval;
        let c = compute_constants(&inputs);
        assert!(c.b.is_infinite());
        assert_eq!(c.delta_t, 0.0);
        assert_eq!(c.asymptotic, AsymptoticBound::Vacuous);
    }

    #[test]
    fn gamma_eigen_extraction_matches_diag() {
        let gains = crate::estimator::EstimatorGains {
            gamma0: 1.0,
            gamma: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, 2.0])),
            sigma: 1.0,
            kappa: 1.0,
        };
        let (lo, hi) = gains.gamma_eigenvalues().unwrap();
        assert!((lo - 0.5).abs() < 1e-12 && (hi - 2.0).abs() < 1e-12);
    }
}
