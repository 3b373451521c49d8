//! Simulation harness: the fixed-step loop wiring signals → lift → filter →
//! mixing → estimator, the two shipped experiment presets, and parameter
//! sweeps.

pub mod config;
mod trace;

pub use config::{parse_scenario, ConfigError};
pub use trace::{write_csv, Trace, TraceRow};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::estimator::{self, EstimatorGains, EstimatorState};
use crate::filter::{FilterSample, FilterState};
use crate::lift::{lift, TimeGrid};
use crate::mixing::mix;
use crate::rng;
use crate::signals::{DisturbanceSpec, Scenario, SignalExpr};

/// The two experiments shipped as presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Disturbance-free run.
    Experiment1,
    /// Same signals with a uniform disturbance on `[-0.5, 0.5)`.
    Experiment2,
}

impl Preset {
    pub fn from_number(number: u8) -> Option<Preset> {
        match number {
            1 => Some(Preset::Experiment1),
            2 => Some(Preset::Experiment2),
            _ => None,
        }
    }
}

/// Build a preset scenario.
///
/// Signals: `ω = [3 sin(4πt); 2.5]`, the second row switching to
/// `2.5 sin(4πt)` at `t = 10` (excitation lost), and
/// `Θ = [2 + sin t; 3 + cos 0.5t]`. Settings: `T = 0.25`, `β = 0.05/T`,
/// `γ₀ = 100`, `κ = 1e−9`, `Γ = 0.75·I`, `σ = 1e−4`, `Θ̂(0) = 0`,
/// `dt = 1e−4`, horizon 20 s.
pub fn preset(which: Preset) -> Scenario {
    let four_pi = 4.0 * std::f64::consts::PI;
    let t_width = 0.25;
    let n = 2;
    Scenario {
        n,
        m: 1,
        regressor: vec![
            SignalExpr::sine(3.0, four_pi),
            SignalExpr::switch_at(10.0, SignalExpr::constant(2.5), SignalExpr::sine(2.5, four_pi)),
        ],
        theta: vec![
            SignalExpr::sum(vec![SignalExpr::constant(2.0), SignalExpr::sine(1.0, 1.0)]),
            SignalExpr::sum(vec![SignalExpr::constant(3.0), SignalExpr::cosine(1.0, 0.5)]),
        ],
        disturbance: match which {
            Preset::Experiment1 => DisturbanceSpec::None,
            Preset::Experiment2 => DisturbanceSpec::Uniform { lo: -0.5, hi: 0.5 },
        },
        t_end: 20.0,
        dt: 1e-4,
        seed: 1,
        grid: TimeGrid::new(t_width, 0.0),
        gains: EstimatorGains {
            gamma0: 100.0,
            gamma: DMatrix::identity(n, n) * 0.75,
            sigma: 1e-4,
            kappa: 1e-9,
        },
        beta: 0.05 / t_width,
        theta_hat0: DVector::zeros(n),
        fe_end: Some(10.0),
    }
}

/// Run the fixed-step simulation loop over the whole horizon and log every
/// step.
///
/// Per step: evaluate the signals, reset the filters when a grid point is
/// crossed (then lift with the new interval start), advance the filters by a
/// trapezoidal step, mix, and advance the estimate by one RK4 step holding
/// the step-start quantities. Grid crossings land exactly on steps because
/// `dt` divides `T`.
pub fn run_scenario(scenario: &Scenario) -> Result<Trace> {
    scenario.validate()?;
    let n = scenario.n;
    let dt = scenario.dt;
    let steps = scenario.steps();
    let steps_per_interval = (scenario.grid.interval / dt).round() as usize;
    let offset_steps = (scenario.grid.t_r_plus / dt).round() as usize;

    let mut filter = FilterState::new(2 * n, scenario.grid.interval);
    let mut est = EstimatorState::new(scenario.theta_hat0.clone());
    let mut trace = Trace::with_capacity(n, scenario.m, dt, steps + 1);

    let is_crossing =
        |s: usize| s >= offset_steps && (s - offset_steps).is_multiple_of(steps_per_interval);
    let interval_of = |s: usize| {
        if s < offset_steps {
            0
        } else {
            (s - offset_steps) / steps_per_interval
        }
    };

    let mut t_i = 0.0;
    let mut cur = scenario.sample(0.0)?;
    for s in 0..=steps {
        let t = s as f64 * dt;
        if is_crossing(s) {
            filter.reset(t);
            t_i = t;
        }

        let lifted = FilterSample {
            omega_bar: lift(&cur.omega, t, t_i),
            y: cur.y.clone(),
        };
        let mixed = mix(&filter, n).map_err(|e| e.at_time(t))?;
        let err = estimator::parameter_error(&est.theta_hat, &cur.theta_true);
        let branch = if mixed.omega >= scenario.gains.kappa {
            crate::estimator::Branch::Drem
        } else {
            crate::estimator::Branch::SigmaMod
        };

        trace.t.push(t);
        trace.theta_true.extend(cur.theta_true.iter());
        trace.theta_hat.extend(est.theta_hat.iter());
        trace.omega_col0.extend(cur.omega.column(0).iter());
        trace.y.extend(cur.y.iter());
        trace.omega_det.push(mixed.omega);
        trace.branch.push(branch);
        trace.err_inst.push(err);
        trace.interval.push(interval_of(s));
        trace.mixed_y.extend(mixed.y.iter());
        trace.max_slope.push(0.0);
        trace.gram_norm.push(filter.omega_f.norm());

        if s == steps {
            break;
        }

        // Signals at the step end; the lift keeps the current interval start
        // so the trapezoid closes the integral up to the boundary.
        let t_next = (s + 1) as f64 * dt;
        let next = scenario.sample(t_next)?;
        let lifted_next = FilterSample {
            omega_bar: lift(&next.omega, t_next, t_i),
            y: next.y.clone(),
        };
        filter
            .step(&lifted, &lifted_next, scenario.beta, dt)
            .map_err(|e| e.at_time(t))?;

        let outcome = estimator::step(&mut est, &mixed, &cur.omega, &cur.y, &scenario.gains, dt)
            .map_err(|e| e.at_time(t))?;
        debug_assert_eq!(outcome.branch, branch);
        *trace.max_slope.last_mut().unwrap() = outcome.max_slope;

        cur = next;
    }
    Ok(trace)
}

/// Parameter swept by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Grid interval width `T`.
    IntervalWidth,
    /// High-gain branch rate `γ₀`.
    Gamma0,
}

impl SweepParam {
    pub fn parse(name: &str) -> Option<SweepParam> {
        match name {
            "T" => Some(SweepParam::IntervalWidth),
            "gamma0" => Some(SweepParam::Gamma0),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParam::IntervalWidth => "T",
            SweepParam::Gamma0 => "gamma0",
        }
    }
}

/// One sweep run: the parameter value and the steady-state error metric
/// (largest instantaneous error over the last two seconds of the excitation
/// window).
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub value: f64,
    pub steady_state_error: f64,
}

/// Run the scenario once per parameter value and collect the steady-state
/// error metric. Each run gets an independent seed derived from the base seed
/// and its index.
pub fn sweep(base: &Scenario, param: SweepParam, values: &[f64]) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(values.len());
    for (idx, &value) in values.iter().enumerate() {
        let mut scenario = base.clone();
        match param {
            SweepParam::IntervalWidth => scenario.grid.interval = value,
            SweepParam::Gamma0 => scenario.gains.gamma0 = value,
        }
        scenario.seed = rng::derive_seed(base.seed, idx as u64);
        scenario.validate().map_err(|e| {
            Error::InvalidScenario(format!("sweep value {value} for {}: {e}", param.as_str()))
        })?;
        let trace = run_scenario(&scenario)?;
        let fe_end = scenario.fe_end.unwrap_or(scenario.t_end);
        rows.push(SweepRow {
            value,
            steady_state_error: trace.max_error_in(fe_end - 2.0, fe_end),
        });
    }
    Ok(rows)
}
