//! Small dense kernels for the mixing step: determinant and adjugate in one
//! Faddeev–LeVerrier pass, Jacobi eigenvalues, and the scalar regression
//! `(Ω, Ȳ, Y)` formed from the filtered Gram.
//!
//! Faddeev–LeVerrier needs no division by the determinant, so the adjugate is
//! well defined for singular input — which the filtered Gram is at every
//! interval start. Matrices here are tiny (`2n ≤ 16`), accuracy over
//! asymptotics.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::filter::FilterState;

/// Determinant and adjugate together via the Faddeev–LeVerrier recursion:
///
/// ```text
/// M₁ = I,  P_j = A·M_j,  c_j = −tr(P_j)/j,  M_{j+1} = P_j + c_j·I,
/// det A = (−1)^k·c_k,  adj A = (−1)^{k−1}·M_k.
/// ```
pub fn det_adjugate(a: &DMatrix<f64>) -> (f64, DMatrix<f64>) {
    let k = a.nrows();
    assert_eq!(k, a.ncols(), "det_adjugate requires a square matrix");
    assert!(k >= 1, "det_adjugate requires k >= 1");

    let mut m = DMatrix::<f64>::identity(k, k);
    let mut c = 0.0;
    for j in 1..=k {
        let p = a * &m;
        c = -p.trace() / j as f64;
        if j < k {
            m = p;
            for i in 0..k {
                m[(i, i)] += c;
            }
        }
    }
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    (sign * c, -sign * m)
}

pub fn determinant(a: &DMatrix<f64>) -> f64 {
    det_adjugate(a).0
}

pub fn adjugate(a: &DMatrix<f64>) -> DMatrix<f64> {
    det_adjugate(a).1
}

/// All eigenvalues of a symmetric matrix by cyclic Jacobi sweeps, ascending.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let k = a.nrows();
    let scale = a.norm().max(1.0);
    let tol = 1e-9 * scale;
    let asymmetry = (a - a.transpose()).amax();
    if asymmetry > tol {
        return Err(Error::NotSymmetric { asymmetry, tolerance: tol });
    }

    let mut m = (a + a.transpose()) * 0.5;
    let target = 1e-11 * scale;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..k {
            for q in (p + 1)..k {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() <= target {
            break;
        }
        for p in 0..k {
            for q in (p + 1)..k {
                let apq = m[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let tau = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let cos = 1.0 / (1.0 + t * t).sqrt();
                let sin = t * cos;
                for i in 0..k {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = cos * mip - sin * miq;
                    m[(i, q)] = sin * mip + cos * miq;
                }
                for i in 0..k {
                    let mpi = m[(p, i)];
                    let mqi = m[(q, i)];
                    m[(p, i)] = cos * mpi - sin * mqi;
                    m[(q, i)] = sin * mpi + cos * mqi;
                }
            }
        }
    }
    let mut evs: Vec<f64> = (0..k).map(|i| m[(i, i)]).collect();
    evs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(evs)
}

/// Extreme eigenvalues `(λ_min, λ_max)` of a symmetric matrix.
pub fn min_max_eigenvalues(a: &DMatrix<f64>) -> Result<(f64, f64)> {
    let evs = symmetric_eigenvalues(a)?;
    Ok((evs[0], *evs.last().unwrap()))
}

/// The mixed scalar regression `Y = Ω·Θ_i + μ`.
#[derive(Debug, Clone)]
pub struct MixedRegression {
    /// Scalar regressor `Ω = det(ω_f)`, clamped to zero when within the
    /// rounding window below zero.
    pub omega: f64,
    /// `Ȳ = adj(ω_f)·y_f ∈ R^{2n}`.
    pub y_bar: DVector<f64>,
    /// `Y = H·Ȳ ∈ R^n`, the leading block of `Ȳ`.
    pub y: DVector<f64>,
}

/// Form the mixed regression from the current filter state.
///
/// A determinant materially below zero means the PSD invariant of the filtered
/// Gram was broken upstream and is reported as an error rather than clamped.
pub fn mix(state: &FilterState, n: usize) -> Result<MixedRegression> {
    let (det, adj) = det_adjugate(&state.omega_f);
    let dim = state.omega_f.nrows() as i32;
    let tolerance = 1e-9 * state.omega_f.norm().powi(dim).max(1.0);
    if det < -tolerance {
        return Err(Error::IndefiniteGram { omega: det, tolerance });
    }
    let y_bar = &adj * &state.y_f;
    let y = y_bar.rows(0, n).into_owned();
    Ok(MixedRegression {
        omega: det.max(0.0),
        y_bar,
        y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn random_symmetric(k: usize, rng: &mut SplitMix64) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let v = rng.next_f64(-1.0, 1.0);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        a
    }

    #[test]
    fn determinant_of_scaled_identity() {
        for k in 1..=6 {
            let a = DMatrix::<f64>::identity(k, k) * 2.0;
            let expected = 2.0f64.powi(k as i32);
            assert!((determinant(&a) - expected).abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn determinant_2x2_hand_value() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        assert!((determinant(&a) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn determinant_matches_lu_on_random_spd() {
        let mut rng = SplitMix64::new(11);
        for _ in 0..50 {
            let b = DMatrix::from_fn(4, 4, |_, _| rng.next_f64(-1.0, 1.0));
            let a = &b * b.transpose() + DMatrix::identity(4, 4) * 0.5;
            let lu = a.clone().lu().determinant();
            let fl = determinant(&a);
            assert!(
                (fl - lu).abs() <= 1e-10 * lu.abs(),
                "FL {fl} vs LU {lu}"
            );
        }
    }

    #[test]
    fn adjugate_2x2_cofactors() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let adj = adjugate(&a);
        let expected = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        assert!((adj - expected).norm() < 1e-14);
    }

    #[test]
    fn adjugate_of_identity_is_identity() {
        for k in 1..=5 {
            let adj = adjugate(&DMatrix::identity(k, k));
            assert!((adj - DMatrix::<f64>::identity(k, k)).norm() < 1e-13);
        }
    }

    #[test]
    fn adjugate_of_rank_one_vanishes_for_k_at_least_3() {
        let mut rng = SplitMix64::new(5);
        for k in 3..=8 {
            let v = DMatrix::from_fn(k, 1, |_, _| rng.next_f64(-1.0, 1.0));
            let a = &v * v.transpose();
            assert!(
                adjugate(&a).amax() < 1e-12,
                "rank-1 adjugate should vanish for k = {k}"
            );
        }
    }

    #[test]
    fn adjugate_identity_property_on_random_matrices() {
        let mut rng = SplitMix64::new(99);
        for k in 2..=8 {
            for _ in 0..20 {
                let a = random_symmetric(k, &mut rng);
                let (det, adj) = det_adjugate(&a);
                let residual = (&adj * &a - DMatrix::identity(k, k) * det).amax();
                let scale = a.norm().powi(k as i32).max(1.0);
                assert!(residual <= 1e-9 * scale, "k = {k}, residual {residual:e}");
            }
        }
    }

    #[test]
    fn eigenvalues_of_diagonal_and_2x2() {
        let (lo, hi) = min_max_eigenvalues(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 3.0])).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 3.0).abs() < 1e-12);

        let (lo, hi) = min_max_eigenvalues(&DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        assert!((lo - 1.0).abs() < 1e-10 && (hi - 3.0).abs() < 1e-10);
    }

    #[test]
    fn eigenvalues_reject_asymmetric_input() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 5.0, -5.0, 1.0]);
        assert!(matches!(
            symmetric_eigenvalues(&a),
            Err(Error::NotSymmetric { .. })
        ));
    }

    /// Count of eigenvalues below `lam` from the sign changes in the leading
    /// principal minors of `A − λI` (Jacobi–Sylvester inertia), with the
    /// minors evaluated through LU factorizations — a characteristic-
    /// polynomial route independent of both the Jacobi sweep and the
    /// Faddeev–LeVerrier recursion.
    fn eigenvalues_below(a: &DMatrix<f64>, lam: f64) -> usize {
        let k = a.nrows();
        let shifted = a - DMatrix::identity(k, k) * lam;
        let mut changes = 0;
        let mut prev = 1.0f64;
        for j in 1..=k {
            let minor = shifted.view((0, 0), (j, j)).into_owned().lu().determinant();
            let sign = if minor >= 0.0 { 1.0 } else { -1.0 };
            if sign != prev {
                changes += 1;
            }
            prev = sign;
        }
        changes
    }

    /// Bisection on the inertia count between Gershgorin bounds.
    fn bisect_extreme(a: &DMatrix<f64>, smallest: bool) -> f64 {
        let k = a.nrows();
        let bound = (0..k)
            .map(|i| (0..k).map(|j| a[(i, j)].abs()).sum::<f64>())
            .fold(0.0f64, f64::max)
            + 1.0;
        let (mut lo, mut hi) = (-bound, bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let below = eigenvalues_below(a, mid);
            let past_target = if smallest { below >= 1 } else { below >= k };
            if past_target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn jacobi_matches_bisection_oracle() {
        let mut rng = SplitMix64::new(2024);
        for _ in 0..20 {
            let a = random_symmetric(4, &mut rng);
            let (lo, hi) = min_max_eigenvalues(&a).unwrap();
            let lo_ref = bisect_extreme(&a, true);
            let hi_ref = bisect_extreme(&a, false);
            assert!((lo - lo_ref).abs() < 1e-8, "λ_min {lo} vs oracle {lo_ref}");
            assert!((hi - hi_ref).abs() < 1e-8, "λ_max {hi} vs oracle {hi_ref}");
        }
    }

    #[test]
    fn mix_identity_and_zero_cases() {
        let n = 2;
        let mut state = FilterState::new(2 * n, 1.0);
        state.omega_f = DMatrix::identity(4, 4);
        state.y_f = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        let mixed = mix(&state, n).unwrap();
        assert!((mixed.omega - 1.0).abs() < 1e-12);
        assert!((mixed.y_bar.clone() - state.y_f.clone()).norm() < 1e-12);
        assert_eq!(mixed.y.len(), 2);
        assert!((mixed.y[0] - 1.0).abs() < 1e-12 && (mixed.y[1] - 2.0).abs() < 1e-12);

        state.omega_f.fill(0.0);
        state.y_f.fill(1.0);
        let mixed = mix(&state, n).unwrap();
        assert_eq!(mixed.omega, 0.0);
        assert_eq!(mixed.y_bar.norm(), 0.0);
    }

    #[test]
    fn mix_of_rank_deficient_gram_has_zero_omega() {
        // Constant lifted regressor accumulates a rank-1 Gram.
        let v = DMatrix::from_column_slice(4, 1, &[1.0, 2.0, 0.5, -1.0]);
        let mut state = FilterState::new(4, 1.0);
        state.omega_f = &v * v.transpose() * 0.37;
        let mixed = mix(&state, 2).unwrap();
        assert_eq!(mixed.omega, 0.0);
    }

    #[test]
    fn mix_flags_indefinite_gram() {
        let mut state = FilterState::new(2, 1.0);
        state.omega_f = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(mix(&state, 1), Err(Error::IndefiniteGram { .. })));
    }
}
