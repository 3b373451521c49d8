//! Two-branch switching estimation law.
//!
//! While the scalar regressor is excited (`Ω ≥ κ`) the estimate is driven by
//! the mixed regression at gain `γ₀`; otherwise a gradient step on the raw
//! regression with σ-modification leakage keeps it bounded. The estimate is
//! never reset, so it stays continuous across interval boundaries.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mixing::{min_max_eigenvalues, MixedRegression};

/// Which side of the switching law produced the step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// High-gain branch on the mixed scalar regression (`Ω ≥ κ`).
    Drem,
    /// Gradient flow with σ-modification leakage (`Ω < κ`).
    SigmaMod,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Drem => "drem",
            Branch::SigmaMod => "sigma",
        }
    }
}

/// Gains of the switching law.
#[derive(Debug, Clone)]
pub struct EstimatorGains {
    /// High-gain branch rate `γ₀ > 0`.
    pub gamma0: f64,
    /// Gradient branch gain matrix `Γ ≻ 0`.
    pub gamma: DMatrix<f64>,
    /// Leakage coefficient `σ > 0`.
    pub sigma: f64,
    /// Branch switching threshold `κ > 0` on the scalar regressor.
    pub kappa: f64,
}

impl EstimatorGains {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidScenario(msg));
        if !self.gamma0.is_finite() || self.gamma0 <= 0.0 {
            return fail(format!("gamma0 = {} must be positive", self.gamma0));
        }
        if !self.sigma.is_finite() || self.sigma <= 0.0 {
            return fail(format!("sigma = {} must be positive", self.sigma));
        }
        if !self.kappa.is_finite() || self.kappa <= 0.0 {
            return fail(format!("kappa = {} must be positive", self.kappa));
        }
        if self.gamma.nrows() != self.gamma.ncols() {
            return fail("gain matrix Gamma must be square".into());
        }
        let (lo, _) = min_max_eigenvalues(&self.gamma)
            .map_err(|_| Error::InvalidScenario("gain matrix Gamma must be symmetric".into()))?;
        if lo <= 0.0 {
            return fail(format!(
                "gain matrix Gamma must be positive definite (λ_min = {lo:.3e})"
            ));
        }
        Ok(())
    }

    /// Extreme eigenvalues of `Γ` (needed by the bound constants).
    pub fn gamma_eigenvalues(&self) -> Result<(f64, f64)> {
        min_max_eigenvalues(&self.gamma)
    }
}

/// Current estimate and the branch that produced the last step.
#[derive(Debug, Clone)]
pub struct EstimatorState {
    pub theta_hat: DVector<f64>,
    pub branch: Branch,
    pub t: f64,
}

impl EstimatorState {
    pub fn new(theta_hat0: DVector<f64>) -> Self {
        Self {
            theta_hat: theta_hat0,
            branch: Branch::SigmaMod,
            t: 0.0,
        }
    }
}

/// Outcome bookkeeping of one integration step.
#[derive(Debug, Clone, Copy)]
pub struct StepOutcome {
    /// Branch active over the step (decided at the step start).
    pub branch: Branch,
    /// Largest slope norm among the RK4 stages; bounds the estimate jump by
    /// `dt * max_slope`.
    pub max_slope: f64,
}

/// Right-hand side of the switching law.
///
/// The excited branch is evaluated in the algebraically equivalent form
/// `−γ₀(Θ̂ − Y/Ω)`, which avoids squaring a tiny `Ω`.
pub fn rhs(
    theta_hat: &DVector<f64>,
    omega_det: f64,
    y_mixed: &DVector<f64>,
    omega: &DMatrix<f64>,
    y: &DVector<f64>,
    gains: &EstimatorGains,
) -> Result<(DVector<f64>, Branch)> {
    if !omega_det.is_finite() {
        return Err(Error::NonFinite { what: "scalar regressor Omega" });
    }
    if theta_hat.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "estimate theta_hat" });
    }
    if y_mixed.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "measured outputs" });
    }
    if omega.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "regressor omega" });
    }

    if omega_det >= gains.kappa {
        let target = y_mixed / omega_det;
        Ok(((theta_hat - target) * (-gains.gamma0), Branch::Drem))
    } else {
        let residual = omega.transpose() * theta_hat - y;
        let dtheta = -(&gains.gamma * omega) * residual - &gains.gamma * theta_hat * gains.sigma;
        Ok((dtheta, Branch::SigmaMod))
    }
}

/// Advance the estimate by one explicit RK4 step, holding `(Ω, Y, ω, y)`
/// constant over the step (they are only available at sample instants).
pub fn step(
    state: &mut EstimatorState,
    mixed: &MixedRegression,
    omega: &DMatrix<f64>,
    y: &DVector<f64>,
    gains: &EstimatorGains,
    dt: f64,
) -> Result<StepOutcome> {
    let eval = |th: &DVector<f64>| rhs(th, mixed.omega, &mixed.y, omega, y, gains);

    let (k1, branch) = eval(&state.theta_hat)?;
    let (k2, _) = eval(&(&state.theta_hat + &k1 * (dt / 2.0)))?;
    let (k3, _) = eval(&(&state.theta_hat + &k2 * (dt / 2.0)))?;
    let (k4, _) = eval(&(&state.theta_hat + &k3 * dt))?;

    let max_slope = k1
        .norm()
        .max(k2.norm())
        .max(k3.norm())
        .max(k4.norm());

    state.theta_hat += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    state.branch = branch;
    state.t += dt;
    Ok(StepOutcome { branch, max_slope })
}

/// Euclidean parameter error `‖Θ̂ − Θ‖`.
pub fn parameter_error(theta_hat: &DVector<f64>, theta_true: &DVector<f64>) -> f64 {
    (theta_hat - theta_true).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gains(gamma0: f64, gamma_diag: f64, sigma: f64, kappa: f64) -> EstimatorGains {
        EstimatorGains {
            gamma0,
            gamma: DMatrix::identity(2, 2) * gamma_diag,
            sigma,
            kappa,
        }
    }

    #[test]
    fn rhs_pure_leakage_when_idle() {
        let g = gains(100.0, 0.75, 1e-4, 1e-9);
        let theta = DVector::from_vec(vec![2.0, -1.0]);
        let (d, branch) = rhs(
            &theta,
            0.0,
            &DVector::zeros(2),
            &DMatrix::zeros(2, 1),
            &DVector::zeros(1),
            &g,
        )
        .unwrap();
        assert_eq!(branch, Branch::SigmaMod);
        let expected = &g.gamma * &theta * (-g.sigma);
        assert!((d - expected).norm() < 1e-15);
    }

    #[test]
    fn rhs_drem_fixed_point() {
        let g = gains(100.0, 0.75, 1e-4, 1e-9);
        let theta = DVector::from_vec(vec![1.5, 0.5]);
        // Ω = 1, Y = Θ̂: already at the branch fixed point.
        let (d, branch) = rhs(
            &theta,
            1.0,
            &theta.clone(),
            &DMatrix::zeros(2, 1),
            &DVector::zeros(1),
            &g,
        )
        .unwrap();
        assert_eq!(branch, Branch::Drem);
        assert!(d.norm() < 1e-12);
    }

    #[test]
    fn rhs_drem_hand_value() {
        // Ω = 2, κ = 1, γ₀ = 100, Θ̂ = [1;0], Y = [4;0] → dΘ̂ = [100; 0].
        let g = gains(100.0, 0.75, 1e-4, 1.0);
        let (d, branch) = rhs(
            &DVector::from_vec(vec![1.0, 0.0]),
            2.0,
            &DVector::from_vec(vec![4.0, 0.0]),
            &DMatrix::zeros(2, 1),
            &DVector::zeros(1),
            &g,
        )
        .unwrap();
        assert_eq!(branch, Branch::Drem);
        assert!((d[0] - 100.0).abs() < 1e-12);
        assert!(d[1].abs() < 1e-12);
    }

    #[test]
    fn rhs_rejects_non_finite() {
        let g = gains(100.0, 0.75, 1e-4, 1e-9);
        let theta = DVector::from_vec(vec![f64::NAN, 0.0]);
        assert!(matches!(
            rhs(&theta, 0.0, &DVector::zeros(2), &DMatrix::zeros(2, 1), &DVector::zeros(1), &g),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn step_is_identity_when_rhs_vanishes() {
        let g = gains(100.0, 0.75, 1e-4, 1e-9);
        let theta0 = DVector::from_vec(vec![0.7, -0.3]);
        let mut state = EstimatorState::new(theta0.clone());
        let mixed = MixedRegression {
            omega: 1.0,
            y_bar: DVector::zeros(4),
            y: theta0.clone(),
        };
        let out = step(
            &mut state,
            &mixed,
            &DMatrix::zeros(2, 1),
            &DVector::zeros(1),
            &g,
            1e-3,
        )
        .unwrap();
        assert!((state.theta_hat - theta0).norm() < 1e-14);
        assert!(out.max_slope < 1e-12);
    }

    #[test]
    fn sigma_branch_matches_linear_decay() {
        // ω = 0 ⇒ Θ̂' = −σΓΘ̂; with diagonal Γ the solution decays
        // componentwise as e^{−σΓ_ii t}.
        let sigma = 0.5;
        let gdiag = 0.75;
        let g = gains(100.0, gdiag, sigma, 1e-9);
        let theta0 = DVector::from_vec(vec![3.0, -2.0]);
        let mut state = EstimatorState::new(theta0.clone());
        let mixed = MixedRegression { omega: 0.0, y_bar: DVector::zeros(4), y: DVector::zeros(2) };
        let dt = 1e-3;
        let steps = 1000;
        for _ in 0..steps {
            step(&mut state, &mixed, &DMatrix::zeros(2, 1), &DVector::zeros(1), &g, dt).unwrap();
        }
        let t = dt * steps as f64;
        let decay = (-sigma * gdiag * t).exp();
        for i in 0..2 {
            let expected = theta0[i] * decay;
            assert!(
                (state.theta_hat[i] - expected).abs() < 1e-8,
                "component {i}: {} vs {expected}",
                state.theta_hat[i]
            );
        }
    }

    #[test]
    fn drem_branch_converges_to_target_at_gamma0_rate() {
        let gamma0 = 100.0;
        let g = gains(gamma0, 0.75, 1e-4, 1e-9);
        let target = DVector::from_vec(vec![2.0, -1.0]);
        let omega_det = 2.0;
        let mixed = MixedRegression {
            omega: omega_det,
            y_bar: DVector::zeros(4),
            y: &target * omega_det,
        };
        let mut state = EstimatorState::new(DVector::zeros(2));
        let dt = 1e-4;
        let steps = 500; // five time constants at γ₀ = 100
        for _ in 0..steps {
            step(&mut state, &mixed, &DMatrix::zeros(2, 1), &DVector::zeros(1), &g, dt).unwrap();
        }
        let t = dt * steps as f64;
        let remaining = (state.theta_hat.clone() - &target).norm();
        let expected = (DVector::zeros(2) - &target).norm() * (-gamma0 * t).exp();
        assert!(
            (remaining - expected).abs() <= 0.01 * expected,
            "decay {remaining:e} vs e^(-γ₀t) prediction {expected:e}"
        );
    }

    #[test]
    fn parameter_error_examples() {
        let a = DVector::from_vec(vec![1.0, 0.0]);
        assert_eq!(parameter_error(&a, &a), 0.0);
        assert_eq!(parameter_error(&a, &DVector::zeros(2)), 1.0);
        let b = DVector::from_vec(vec![3.0, 4.0]);
        assert_eq!(parameter_error(&b, &DVector::zeros(2)), 5.0);
    }

    #[test]
    fn gains_validation() {
        let mut g = gains(100.0, 0.75, 1e-4, 1e-9);
        assert!(g.validate().is_ok());
        g.sigma = 0.0;
        assert!(g.validate().is_err());

        let mut g = gains(100.0, 0.75, 1e-4, 1e-9);
        g.gamma[(0, 0)] = -1.0;
        assert!(g.validate().is_err());
    }
}
