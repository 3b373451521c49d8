//! Column-oriented run trace and its CSV serialization.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::estimator::Branch;

/// Full-rate log of one simulation run, stored column-wise.
///
/// Vector-valued columns are flat with one chunk of `n` (or `m`) values per
/// step. Rows are strictly increasing in `t` with the scenario step; CSV
/// output may subsample by a stride, the in-memory trace never does (the
/// audits need every step).
#[derive(Debug, Clone)]
pub struct Trace {
    pub n: usize,
    pub m: usize,
    pub dt: f64,
    pub t: Vec<f64>,
    pub theta_true: Vec<f64>,
    pub theta_hat: Vec<f64>,
    /// First column of the regressor at each step.
    pub omega_col0: Vec<f64>,
    pub y: Vec<f64>,
    /// Scalar regressor `Ω`.
    pub omega_det: Vec<f64>,
    /// Branch active on the step starting at this row.
    pub branch: Vec<Branch>,
    /// Instantaneous error `‖Θ̂ − Θ‖`.
    pub err_inst: Vec<f64>,
    /// Lift interval index (counts filter resets; equals the grid index when
    /// the excitation start is zero).
    pub interval: Vec<usize>,
    /// Mixed output `Y` at each step (audit bookkeeping, not serialized).
    pub mixed_y: Vec<f64>,
    /// Largest RK4 stage slope of the step starting at this row (audit
    /// bookkeeping, not serialized).
    pub max_slope: Vec<f64>,
    /// Frobenius norm of the filtered Gram at this row (audit bookkeeping,
    /// not serialized; sets the rounding scale of the determinant).
    pub gram_norm: Vec<f64>,
}

/// Borrowed view of one trace row.
#[derive(Debug, Clone, Copy)]
pub struct TraceRow<'a> {
    pub t: f64,
    pub theta_true: &'a [f64],
    pub theta_hat: &'a [f64],
    pub omega_col0: &'a [f64],
    pub y: &'a [f64],
    pub omega_det: f64,
    pub branch: Branch,
    pub err_inst: f64,
    pub interval: usize,
}

impl Trace {
    pub fn new(n: usize, m: usize, dt: f64) -> Self {
        Self {
            n,
            m,
            dt,
            t: Vec::new(),
            theta_true: Vec::new(),
            theta_hat: Vec::new(),
            omega_col0: Vec::new(),
            y: Vec::new(),
            omega_det: Vec::new(),
            branch: Vec::new(),
            err_inst: Vec::new(),
            interval: Vec::new(),
            mixed_y: Vec::new(),
            max_slope: Vec::new(),
            gram_norm: Vec::new(),
        }
    }

    pub fn with_capacity(n: usize, m: usize, dt: f64, rows: usize) -> Self {
        let mut trace = Self::new(n, m, dt);
        trace.t.reserve(rows);
        trace.theta_true.reserve(rows * n);
        trace.theta_hat.reserve(rows * n);
        trace.omega_col0.reserve(rows * n);
        trace.y.reserve(rows * m);
        trace.omega_det.reserve(rows);
        trace.branch.reserve(rows);
        trace.err_inst.reserve(rows);
        trace.interval.reserve(rows);
        trace.mixed_y.reserve(rows * n);
        trace.max_slope.reserve(rows);
        trace.gram_norm.reserve(rows);
        trace
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn row(&self, s: usize) -> TraceRow<'_> {
        let n = self.n;
        let m = self.m;
        TraceRow {
            t: self.t[s],
            theta_true: &self.theta_true[s * n..(s + 1) * n],
            theta_hat: &self.theta_hat[s * n..(s + 1) * n],
            omega_col0: &self.omega_col0[s * n..(s + 1) * n],
            y: &self.y[s * m..(s + 1) * m],
            omega_det: self.omega_det[s],
            branch: self.branch[s],
            err_inst: self.err_inst[s],
            interval: self.interval[s],
        }
    }

    pub fn theta_hat_at(&self, s: usize) -> DVector<f64> {
        DVector::from_column_slice(&self.theta_hat[s * self.n..(s + 1) * self.n])
    }

    pub fn mixed_y_at(&self, s: usize) -> DVector<f64> {
        DVector::from_column_slice(&self.mixed_y[s * self.n..(s + 1) * self.n])
    }

    /// Index of the row closest to `t`.
    pub fn row_at_time(&self, t: f64) -> Option<usize> {
        if self.is_empty() {
            return None;
        }
        let idx = ((t - self.t[0]) / self.dt).round();
        if idx < 0.0 || idx as usize >= self.len() {
            return None;
        }
        Some(idx as usize)
    }

    /// Largest instantaneous error over `t ∈ [from, to]`.
    pub fn max_error_in(&self, from: f64, to: f64) -> f64 {
        self.t
            .iter()
            .zip(&self.err_inst)
            .filter(|(t, _)| **t >= from - 1e-12 && **t <= to + 1e-12)
            .map(|(_, e)| *e)
            .fold(0.0, f64::max)
    }

    pub fn csv_header(&self) -> String {
        let mut header = String::from("t");
        for i in 0..self.n {
            write!(header, ",theta_true_{i}").unwrap();
        }
        for i in 0..self.n {
            write!(header, ",theta_hat_{i}").unwrap();
        }
        for i in 0..self.n {
            write!(header, ",omega_{i}").unwrap();
        }
        for i in 0..self.m {
            write!(header, ",y_{i}").unwrap();
        }
        header.push_str(",Omega,branch,err_inst,interval");
        header
    }

    fn csv_row(&self, s: usize) -> String {
        let row = self.row(s);
        let mut line = format!("{:.16e}", row.t);
        for v in row
            .theta_true
            .iter()
            .chain(row.theta_hat)
            .chain(row.omega_col0)
            .chain(row.y)
        {
            write!(line, ",{v:.16e}").unwrap();
        }
        write!(
            line,
            ",{:.16e},{},{:.16e},{}",
            row.omega_det,
            row.branch.as_str(),
            row.err_inst,
            row.interval
        )
        .unwrap();
        line
    }
}

/// Write the trace as CSV: header row, comma separators, line-feed endings,
/// floats at 17 significant digits so values round-trip bit-exactly. A stride
/// of `k` keeps every k-th row (the first row always included).
pub fn write_csv(trace: &Trace, path: &Path, stride: usize) -> Result<()> {
    let stride = stride.max(1);
    let mut out = String::with_capacity(64 * (trace.len() / stride + 2));
    out.push_str(&trace.csv_header());
    out.push('\n');
    for s in (0..trace.len()).step_by(stride) {
        out.push_str(&trace.csv_row(s));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_trace(rows: usize) -> Trace {
        let mut trace = Trace::new(2, 1, 0.5);
        for s in 0..rows {
            trace.t.push(s as f64 * 0.5);
            trace.theta_true.extend([1.0 + s as f64, -2.0]);
            trace.theta_hat.extend([0.5, 0.25 * s as f64]);
            trace.omega_col0.extend([0.1, 2.5]);
            trace.y.push(3.0_f64.powi(s as i32) / 7.0);
            trace.omega_det.push(1e-9 * s as f64);
            trace.branch.push(if s % 2 == 0 { Branch::SigmaMod } else { Branch::Drem });
            trace.err_inst.push(0.125 * s as f64);
            trace.interval.push(s / 2);
            trace.mixed_y.extend([0.0, 0.0]);
            trace.max_slope.push(0.0);
            trace.gram_norm.push(1.0);
        }
        trace
    }

    #[test]
    fn empty_trace_is_header_only() {
        let dir = std::env::temp_dir().join("idrem_trace_test_empty");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("empty.csv");
        write_csv(&tiny_trace(0), &path, 1).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("t,theta_true_0"));
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn three_rows_make_four_lines() {
        let dir = std::env::temp_dir().join("idrem_trace_test_rows");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("three.csv");
        write_csv(&tiny_trace(3), &path, 1).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn csv_round_trips_bit_exactly() {
        let trace = tiny_trace(5);
        let dir = std::env::temp_dir().join("idrem_trace_test_roundtrip");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("roundtrip.csv");
        write_csv(&trace, &path, 1).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        for (s, line) in text.lines().skip(1).enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            let row = trace.row(s);
            assert_eq!(fields[0].parse::<f64>().unwrap().to_bits(), row.t.to_bits());
            assert_eq!(
                fields[7].parse::<f64>().unwrap().to_bits(),
                row.y[0].to_bits(),
                "y column must round-trip"
            );
            assert_eq!(fields[8].parse::<f64>().unwrap().to_bits(), row.omega_det.to_bits());
            assert_eq!(fields[9], row.branch.as_str());
            assert_eq!(fields[11].parse::<usize>().unwrap(), row.interval);
        }
    }

    #[test]
    fn stride_subsamples_rows() {
        let dir = std::env::temp_dir().join("idrem_trace_test_stride");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("strided.csv");
        write_csv(&tiny_trace(10), &path, 4).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        // Rows 0, 4, 8 plus the header.
        assert_eq!(text.lines().count(), 4);
    }
}
