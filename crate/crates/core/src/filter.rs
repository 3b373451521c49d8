//! Interval-reset integral filters with exponential forgetting.
//!
//! Between grid points the filters accumulate
//!
//! ```text
//! ω_f(t) = ∫_{t_i}^{t} w(τ)·ω̄(τ)ω̄ᵀ(τ) dτ,    y_f(t) = ∫_{t_i}^{t} w(τ)·ω̄(τ)yᵀ(τ) dτ,
//! ```
//!
//! with the forgetting kernel `w(τ) = e^{−β(τ − t_i)}` anchored at the current
//! interval start, so `e^{−βT} ≤ w ≤ 1` holds within every interval. Both
//! integrals reset hard to zero at each grid point. Quadrature is the
//! trapezoidal rule on the weighted integrand, which is why a step takes the
//! signals at both of its endpoints.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Signals entering the filter at one step endpoint.
#[derive(Debug, Clone)]
pub struct FilterSample {
    /// Lifted regressor `ω̄ ∈ R^{2n×m}`.
    pub omega_bar: DMatrix<f64>,
    /// Measured output as a length-m vector.
    pub y: DVector<f64>,
}

/// Filtered Gram matrix and output, plus interval bookkeeping.
#[derive(Debug, Clone)]
pub struct FilterState {
    /// `ω_f ∈ R^{2n×2n}`, symmetric positive semidefinite.
    pub omega_f: DMatrix<f64>,
    /// `y_f ∈ R^{2n}`.
    pub y_f: DVector<f64>,
    /// Current interval start.
    pub t_i: f64,
    /// Time integrated since the last reset.
    pub elapsed: f64,
    /// Interval width `T`; steps may not run past `t_i + T`.
    pub interval_width: f64,
}

impl FilterState {
    /// Fresh zeroed filter for a lifted dimension `2n` on a grid of width `T`.
    pub fn new(dim: usize, interval_width: f64) -> Self {
        Self {
            omega_f: DMatrix::zeros(dim, dim),
            y_f: DVector::zeros(dim),
            t_i: 0.0,
            elapsed: 0.0,
            interval_width,
        }
    }

    /// Hard reset at a grid point: `ω_f = 0`, `y_f = 0`, `elapsed = 0`.
    pub fn reset(&mut self, t_i: f64) {
        self.omega_f.fill(0.0);
        self.y_f.fill(0.0);
        self.t_i = t_i;
        self.elapsed = 0.0;
    }

    /// Advance both integrals by one trapezoidal step of width `dt`, given
    /// the signals at the step start and end.
    ///
    /// Errors if the step would cross the interval boundary; the caller is
    /// expected to align steps with the grid and reset first.
    pub fn step(
        &mut self,
        start: &FilterSample,
        end: &FilterSample,
        beta: f64,
        dt: f64,
    ) -> Result<()> {
        if self.elapsed + dt > self.interval_width * (1.0 + 1e-9) + 1e-12 {
            return Err(Error::GridBoundaryCrossed {
                elapsed: self.elapsed,
                dt,
                interval: self.interval_width,
            });
        }
        let w0 = (-beta * self.elapsed).exp();
        let w1 = (-beta * (self.elapsed + dt)).exp();
        let half = dt / 2.0;

        let gram0 = &start.omega_bar * start.omega_bar.transpose();
        let gram1 = &end.omega_bar * end.omega_bar.transpose();
        self.omega_f += gram0 * (half * w0) + gram1 * (half * w1);
        // Re-symmetrize to keep determinant signs stable downstream.
        let sym = (&self.omega_f + self.omega_f.transpose()) * 0.5;
        self.omega_f = sym;

        self.y_f += &start.omega_bar * &start.y * (half * w0) + &end.omega_bar * &end.y * (half * w1);
        self.elapsed += dt;
        Ok(())
    }
}
