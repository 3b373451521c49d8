//! Ground-truth signal model: the regression `y(t) = Θᵀ(t)ω(t) + d(t)`.
//!
//! Signal definitions are a small closed set of primitives (constant, phased
//! sine, sum, time switch) that is closed under differentiation, so the true
//! parameter trajectory can report its first and second derivatives exactly.
//! Arbitrary expression evaluation is deliberately not supported.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::estimator::EstimatorGains;
use crate::lift::TimeGrid;
use crate::rng;

/// Scalar signal of time built from a closed set of primitives.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalExpr {
    Constant(f64),
    /// `amp * sin(freq * t + phase)`
    Sine { amp: f64, freq: f64, phase: f64 },
    Sum(Vec<SignalExpr>),
    /// `before` for `t < at`, `after` from `t >= at` on.
    Switch {
        at: f64,
        before: Box<SignalExpr>,
        after: Box<SignalExpr>,
    },
}

impl SignalExpr {
    pub fn constant(c: f64) -> Self {
        SignalExpr::Constant(c)
    }

    pub fn sine(amp: f64, freq: f64) -> Self {
        SignalExpr::Sine { amp, freq, phase: 0.0 }
    }

    pub fn sine_phased(amp: f64, freq: f64, phase: f64) -> Self {
        SignalExpr::Sine { amp, freq, phase }
    }

    /// `amp * cos(freq * t)`, expressed as a quarter-turn phased sine.
    pub fn cosine(amp: f64, freq: f64) -> Self {
        SignalExpr::Sine {
            amp,
            freq,
            phase: std::f64::consts::FRAC_PI_2,
        }
    }

    pub fn sum(terms: Vec<SignalExpr>) -> Self {
        SignalExpr::Sum(terms)
    }

    pub fn switch_at(at: f64, before: SignalExpr, after: SignalExpr) -> Self {
        SignalExpr::Switch {
            at,
            before: Box::new(before),
            after: Box::new(after),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            SignalExpr::Constant(c) => *c,
            SignalExpr::Sine { amp, freq, phase } => amp * (freq * t + phase).sin(),
            SignalExpr::Sum(terms) => terms.iter().map(|e| e.eval(t)).sum(),
            SignalExpr::Switch { at, before, after } => {
                if t < *at {
                    before.eval(t)
                } else {
                    after.eval(t)
                }
            }
        }
    }

    /// Exact derivative within the closed primitive set.
    ///
    /// Switches differentiate branch-wise; the jump at the switch instant is
    /// not represented. Parameter trajectories that must report derivatives
    /// should therefore be smooth across any switch they contain.
    pub fn derivative(&self) -> SignalExpr {
        match self {
            SignalExpr::Constant(_) => SignalExpr::Constant(0.0),
            SignalExpr::Sine { amp, freq, phase } => SignalExpr::Sine {
                amp: amp * freq,
                freq: *freq,
                phase: phase + std::f64::consts::FRAC_PI_2,
            },
            SignalExpr::Sum(terms) => {
                SignalExpr::Sum(terms.iter().map(|e| e.derivative()).collect())
            }
            SignalExpr::Switch { at, before, after } => SignalExpr::Switch {
                at: *at,
                before: Box::new(before.derivative()),
                after: Box::new(after.derivative()),
            },
        }
    }
}

/// Bounded disturbance model for `d(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum DisturbanceSpec {
    None,
    /// Per-component uniform draw, held constant within each integration step.
    Uniform { lo: f64, hi: f64 },
    /// Per-step values cycled from a fixed table (applied to every component).
    Tabulated(Vec<f64>),
}

impl DisturbanceSpec {
    /// Supremum of `‖d‖` implied by the disturbance model, for an
    /// m-component output.
    pub fn bound(&self, m: usize) -> f64 {
        match self {
            DisturbanceSpec::None => 0.0,
            DisturbanceSpec::Uniform { lo, hi } => lo.abs().max(hi.abs()) * (m as f64).sqrt(),
            DisturbanceSpec::Tabulated(values) => {
                let peak = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
                peak * (m as f64).sqrt()
            }
        }
    }
}

/// Full experiment description: dimensions, signals, gains, integration setup.
#[derive(Debug, Clone)]
pub struct Scenario {
    /// Parameter dimension.
    pub n: usize,
    /// Output dimension, `m <= n`.
    pub m: usize,
    /// Regressor `ω(t) ∈ R^{n×m}`, row-major.
    pub regressor: Vec<SignalExpr>,
    /// True parameter trajectory `Θ(t) ∈ R^n`.
    pub theta: Vec<SignalExpr>,
    pub disturbance: DisturbanceSpec,
    /// Simulation horizon (s).
    pub t_end: f64,
    /// Integration step (s). Must divide the grid interval exactly.
    pub dt: f64,
    pub seed: u64,
    pub grid: TimeGrid,
    pub gains: EstimatorGains,
    /// Forgetting factor (1/s) of the interval filters.
    pub beta: f64,
    /// Initial estimate `Θ̂(0)`.
    pub theta_hat0: DVector<f64>,
    /// End of the excitation window, when known (used by audits; defaults to `t_end`).
    pub fe_end: Option<f64>,
}

/// One instant of the generated regression.
#[derive(Debug, Clone)]
pub struct Sample {
    pub t: f64,
    pub omega: DMatrix<f64>,
    /// Measured output, `y = Θᵀω + d` (stored as a length-m vector).
    pub y: DVector<f64>,
    pub theta_true: DVector<f64>,
    pub theta_dot_true: DVector<f64>,
    pub disturbance: DVector<f64>,
}

/// Horizon suprema of the signal norms (Assumptions on boundedness, measured
/// by dense sampling at `dt / 10`).
#[derive(Debug, Clone, Copy)]
pub struct Suprema {
    pub omega_max: f64,
    pub theta_max: f64,
    pub theta_dot_max: f64,
    pub theta_ddot_max: f64,
    pub d_max: f64,
}

/// Evaluator for `Θ, Θ̇, Θ̈` with the derivative expressions built once.
#[derive(Debug, Clone)]
pub struct TruthEval {
    f: Vec<SignalExpr>,
    df: Vec<SignalExpr>,
    ddf: Vec<SignalExpr>,
}

impl TruthEval {
    pub fn new(scenario: &Scenario) -> Self {
        let df: Vec<_> = scenario.theta.iter().map(|e| e.derivative()).collect();
        let ddf: Vec<_> = df.iter().map(|e| e.derivative()).collect();
        Self {
            f: scenario.theta.clone(),
            df,
            ddf,
        }
    }

    pub fn eval(&self, t: f64) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let n = self.f.len();
        (
            DVector::from_fn(n, |i, _| self.f[i].eval(t)),
            DVector::from_fn(n, |i, _| self.df[i].eval(t)),
            DVector::from_fn(n, |i, _| self.ddf[i].eval(t)),
        )
    }

    pub fn eval_into(
        &self,
        t: f64,
        theta: &mut DVector<f64>,
        dot: &mut DVector<f64>,
        ddot: &mut DVector<f64>,
    ) {
        for i in 0..self.f.len() {
            theta[i] = self.f[i].eval(t);
            dot[i] = self.df[i].eval(t);
            ddot[i] = self.ddf[i].eval(t);
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidScenario(msg));
        if self.n == 0 {
            return fail("parameter dimension n must be positive".into());
        }
        if self.m == 0 || self.m > self.n {
            return fail(format!("output dimension m = {} must satisfy 1 <= m <= n = {}", self.m, self.n));
        }
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return fail(format!("dt = {} must be positive", self.dt));
        }
        if !self.t_end.is_finite() || self.t_end <= 0.0 {
            return fail(format!("t_end = {} must be positive", self.t_end));
        }
        if !self.beta.is_finite() || self.beta <= 0.0 {
            return fail(format!("beta = {} must be positive", self.beta));
        }
        if self.regressor.len() != self.n * self.m {
            return fail(format!(
                "regressor spec has {} entries, expected n*m = {}",
                self.regressor.len(),
                self.n * self.m
            ));
        }
        if self.theta.len() != self.n {
            return fail(format!("theta spec has {} entries, expected n = {}", self.theta.len(), self.n));
        }
        if self.theta_hat0.len() != self.n {
            return fail(format!(
                "theta_hat0 has {} entries, expected n = {}",
                self.theta_hat0.len(),
                self.n
            ));
        }
        if let DisturbanceSpec::Tabulated(values) = &self.disturbance {
            if values.is_empty() {
                return fail("tabulated disturbance requires at least one value".into());
            }
        }
        if let Some(fe) = self.fe_end {
            if !fe.is_finite() || fe <= 0.0 || fe > self.t_end {
                return fail(format!("fe_end = {} must lie in (0, t_end]", fe));
            }
        }
        self.grid.validate()?;
        self.gains.validate()?;
        // Grid crossings must land exactly on integration steps.
        divides(self.grid.interval, self.dt, "grid interval T", "dt")?;
        divides(self.t_end, self.dt, "t_end", "dt")?;
        if self.grid.t_r_plus > 0.0 {
            divides(self.grid.t_r_plus, self.dt, "grid excitation start t_r_plus", "dt")?;
        }
        Ok(())
    }

    /// Number of integration steps over the horizon.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// Evaluate `ω(t)`. Deterministic for fixed `t`.
    pub fn eval_regressor(&self, t: f64) -> Result<DMatrix<f64>> {
        self.check_horizon(t)?;
        let mut omega = DMatrix::zeros(self.n, self.m);
        self.eval_regressor_into(t, &mut omega);
        Ok(omega)
    }

    pub(crate) fn eval_regressor_into(&self, t: f64, omega: &mut DMatrix<f64>) {
        for r in 0..self.n {
            for c in 0..self.m {
                omega[(r, c)] = self.regressor[r * self.m + c].eval(t);
            }
        }
    }

    /// Evaluate `(Θ(t), Θ̇(t), Θ̈(t))` analytically.
    pub fn eval_truth(&self, t: f64) -> Result<(DVector<f64>, DVector<f64>, DVector<f64>)> {
        self.check_horizon(t)?;
        Ok(TruthEval::new(self).eval(t))
    }

    /// Evaluate `d(t)` as a length-m vector.
    ///
    /// Draws are keyed by `(seed, step index)` with the step index taken as
    /// `floor(t / dt)`, so the value is held constant within each integration
    /// step and identical whenever the same instant is queried again.
    pub fn eval_disturbance(&self, t: f64) -> DVector<f64> {
        let step = self.step_index(t);
        match &self.disturbance {
            DisturbanceSpec::None => DVector::zeros(self.m),
            DisturbanceSpec::Uniform { lo, hi } => {
                DVector::from_fn(self.m, |c, _| rng::uniform(self.seed, step, c as u64, *lo, *hi))
            }
            DisturbanceSpec::Tabulated(values) => {
                let v = values[(step as usize) % values.len()];
                DVector::from_element(self.m, v)
            }
        }
    }

    /// Generate the full regression sample at `t`, with `y = Θᵀω + d` exact
    /// by construction.
    pub fn sample(&self, t: f64) -> Result<Sample> {
        let omega = self.eval_regressor(t)?;
        let (theta_true, theta_dot_true, _) = self.eval_truth(t)?;
        let disturbance = self.eval_disturbance(t);
        let y = omega.transpose() * &theta_true + &disturbance;
        Ok(Sample {
            t,
            omega,
            y,
            theta_true,
            theta_dot_true,
            disturbance,
        })
    }

    /// Norm suprema over the horizon by dense sampling at `dt / 10`.
    pub fn suprema(&self) -> Suprema {
        let truth = TruthEval::new(self);
        let fine = self.dt / 10.0;
        let steps = (self.t_end / fine).round() as usize;
        let mut omega = DMatrix::zeros(self.n, self.m);
        let mut th = DVector::zeros(self.n);
        let mut dot = DVector::zeros(self.n);
        let mut ddot = DVector::zeros(self.n);
        let mut sup = Suprema {
            omega_max: 0.0,
            theta_max: 0.0,
            theta_dot_max: 0.0,
            theta_ddot_max: 0.0,
            d_max: self.disturbance.bound(self.m),
        };
        for s in 0..=steps {
            let t = s as f64 * fine;
            self.eval_regressor_into(t, &mut omega);
            truth.eval_into(t, &mut th, &mut dot, &mut ddot);
            sup.omega_max = sup.omega_max.max(omega.norm());
            sup.theta_max = sup.theta_max.max(th.norm());
            sup.theta_dot_max = sup.theta_dot_max.max(dot.norm());
            sup.theta_ddot_max = sup.theta_ddot_max.max(ddot.norm());
        }
        sup
    }

    /// Largest true-parameter jump between consecutive grid points,
    /// `max_i ‖Θ(t_{i+1}) − Θ(t_i)‖` (available in simulation only).
    pub fn delta1_max(&self) -> f64 {
        let truth = TruthEval::new(self);
        let t_width = self.grid.interval;
        let mut worst = 0.0f64;
        let mut t = self.grid.t_r_plus;
        while t + t_width <= self.t_end + 1e-12 {
            let (a, _, _) = truth.eval(t);
            let (b, _, _) = truth.eval(t + t_width);
            worst = worst.max((b - a).norm());
            t += t_width;
        }
        worst
    }

    fn step_index(&self, t: f64) -> u64 {
        ((t / self.dt) + 1e-9).floor().max(0.0) as u64
    }

    fn check_horizon(&self, t: f64) -> Result<()> {
        if t < 0.0 || t > self.t_end {
            return Err(Error::TimeOutOfRange { t, t_end: self.t_end });
        }
        Ok(())
    }
}

fn divides(whole: f64, part: f64, whole_name: &str, part_name: &str) -> Result<()> {
    let ratio = whole / part;
    if (ratio - ratio.round()).abs() > 1e-6 * ratio.max(1.0) || ratio.round() < 1.0 {
        return Err(Error::InvalidScenario(format!(
            "{whole_name} = {whole} must be an exact multiple of {part_name} = {part}"
        )));
    }
    Ok(())
}

/// Normalize a scalar-output regression so the regressor norm drops below one:
/// returns `(n_s·y, n_s·ω)` with `n_s = 1 / (1 + ωᵀω)`.
///
/// Only defined for `m = 1`; the matrix-output analogue is not specified.
pub fn normalize(y: &DVector<f64>, omega: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if omega.ncols() != 1 || y.len() != 1 {
        return Err(Error::UnsupportedConfiguration { m: omega.ncols().max(y.len()) });
    }
    let ns = 1.0 / (1.0 + omega.norm_squared());
    Ok((y * ns, omega * ns))
}
