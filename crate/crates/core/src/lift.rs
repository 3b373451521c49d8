//! Regular time grid and the first-order lift of the regression.
//!
//! On each grid interval `[t_i, t_i + T)` the time-varying parameter vector is
//! replaced by the constant block vector `θ_i = [Θ(t_i); Θ̇(t_i)]` acting on an
//! extended regressor `ω̄ = Λᵀ(t, t_i)·ω`, with the interpolation matrix
//! `Λ = [I, (t − t_i)·I]`. The Θ-rows sit first so projecting back to the
//! original dimension selects the leading n entries.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::signals::Sample;

/// Regular grid of lift intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    /// Interval width `T` (s).
    pub interval: f64,
    /// Excitation start `t_r⁺` (s); grid points sit at `t_r⁺ + i·T`.
    pub t_r_plus: f64,
}

impl TimeGrid {
    pub fn new(interval: f64, t_r_plus: f64) -> Self {
        Self { interval, t_r_plus }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.interval.is_finite() || self.interval <= 0.0 {
            return Err(Error::InvalidScenario(format!(
                "grid interval T = {} must be positive",
                self.interval
            )));
        }
        if self.t_r_plus < 0.0 {
            return Err(Error::InvalidScenario(format!(
                "grid t_r_plus = {} must be nonnegative",
                self.t_r_plus
            )));
        }
        Ok(())
    }

    /// Interval index and start time containing `t`.
    ///
    /// Intervals are half-open: `t = t_i + T` already belongs to interval
    /// `i + 1`. Before the excitation start the grid degenerates to a single
    /// interval anchored at zero, `(0, 0.0)`.
    pub fn interval_index(&self, t: f64) -> (usize, f64) {
        if t < self.t_r_plus {
            return (0, 0.0);
        }
        let i = ((t - self.t_r_plus) / self.interval).floor();
        let i = if i < 0.0 { 0.0 } else { i };
        (i as usize, self.t_r_plus + i * self.interval)
    }

    /// Soft sanity check that the lift window fits the excitation setup:
    /// `Ts < T` and `T` well inside the excitation range. Returns a warning
    /// string rather than an error.
    pub fn excitation_fit_warning(&self, ts: f64, t_e: f64) -> Option<String> {
        let range = t_e - self.t_r_plus;
        if ts >= self.interval {
            return Some(format!(
                "sliding window Ts = {ts} should be smaller than the grid interval T = {}",
                self.interval
            ));
        }
        if self.interval * 10.0 > range {
            return Some(format!(
                "grid interval T = {} is not small against the excitation range {range}; \
                 expected T << t_e - t_r_plus",
                self.interval
            ));
        }
        None
    }
}

/// Interpolation matrix `Λ(t, t_i) = [I_n, (t − t_i)·I_n] ∈ R^{n×2n}`, so that
/// `Λ·[Θ_i; Θ̇_i] = Θ_i + (t − t_i)·Θ̇_i`.
pub fn lambda_matrix(t: f64, t_i: f64, n: usize) -> DMatrix<f64> {
    let s = t - t_i;
    DMatrix::from_fn(n, 2 * n, |r, c| {
        if c == r {
            1.0
        } else if c == r + n {
            s
        } else {
            0.0
        }
    })
}

/// Lifted regressor `ω̄ = Λᵀ(t, t_i)·ω ∈ R^{2n×m}`: original rows first, the
/// `(t − t_i)`-scaled copy below.
pub fn lift(omega: &DMatrix<f64>, t: f64, t_i: f64) -> DMatrix<f64> {
    let (n, m) = omega.shape();
    let s = t - t_i;
    let mut out = DMatrix::zeros(2 * n, m);
    for r in 0..n {
        for c in 0..m {
            out[(r, c)] = omega[(r, c)];
            out[(r + n, c)] = s * omega[(r, c)];
        }
    }
    out
}

/// A regression sample mapped onto the lift grid.
#[derive(Debug, Clone)]
pub struct LiftedSample {
    pub t: f64,
    pub interval: usize,
    pub t_start: f64,
    pub omega_bar: DMatrix<f64>,
    pub y: DVector<f64>,
}

impl LiftedSample {
    pub fn from_sample(sample: &Sample, grid: &TimeGrid) -> Self {
        let (interval, t_start) = grid.interval_index(sample.t);
        LiftedSample {
            t: sample.t,
            interval,
            t_start,
            omega_bar: lift(&sample.omega, sample.t, t_start),
            y: sample.y.clone(),
        }
    }
}
