//! Stationary distributions of finite row-stochastic matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{AoiError, Result};

pub const RESIDUAL_TOL: f64 = 1e-10;
pub const POWER_ITER_TOL: f64 = 1e-12;
pub const POWER_ITER_MAX: usize = 1_000_000;

/// `max_j |(pi P)_j - pi_j|`.
pub fn fixed_point_residual(transition: &DMatrix<f64>, pi: &DVector<f64>) -> f64 {
    let next = transition.tr_mul(pi);
    (next - pi).amax()
}

/// Solve `pi P = pi`, `sum(pi) = 1`.
///
/// The last balance equation is replaced by the normalization constraint and the system is
/// solved by LU decomposition. If that system is singular or the result misses the residual
/// tolerance, power iteration from the uniform vector takes over.
pub fn stationary_distribution(transition: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = transition.nrows();
    if n == 0 || transition.ncols() != n {
        return Err(AoiError::OutOfRange(format!(
            "transition matrix must be square and non-empty (got {}x{})",
            transition.nrows(),
            transition.ncols()
        )));
    }
    if let Some(pi) = direct_solve(transition) {
        if fixed_point_residual(transition, &pi) <= RESIDUAL_TOL {
            return Ok(pi);
        }
    }
    power_iteration(transition)
}

fn direct_solve(transition: &DMatrix<f64>) -> Option<DVector<f64>> {
    let n = transition.nrows();
    let mut system = transition.transpose() - DMatrix::identity(n, n);
    system.row_mut(n - 1).fill(1.0);
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let mut pi = system.lu().solve(&rhs)?;
    if pi.iter().any(|p| !p.is_finite() || *p < -RESIDUAL_TOL) {
        return None;
    }
    pi.iter_mut().for_each(|p| *p = p.max(0.0));
    let total = pi.sum();
    Some(pi / total)
}

fn power_iteration(transition: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = transition.nrows();
    let mut pi = DVector::from_element(n, 1.0 / n as f64);
    for _ in 0..POWER_ITER_MAX {
        let mut next = transition.tr_mul(&pi);
        let total = next.sum();
        next /= total;
        let delta = (&next - &pi).amax();
        pi = next;
        if delta <= POWER_ITER_TOL {
            return Ok(pi);
        }
    }
    Err(AoiError::NonConvergence(format!(
        "power iteration did not settle within {POWER_ITER_MAX} steps; the chain may be reducible or periodic"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_state_textbook_chain() {
        let p = DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.5, 0.5]);
        let pi = stationary_distribution(&p).unwrap();
        assert_abs_diff_eq!(pi[0], 5.0 / 6.0, epsilon = 1e-14);
        assert_abs_diff_eq!(pi[1], 1.0 / 6.0, epsilon = 1e-14);
    }

    #[test]
    fn absorbing_state_collects_all_mass() {
        let p = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let pi = stationary_distribution(&p).unwrap();
        assert_eq!(pi.as_slice(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn singular_system_falls_back_to_power_iteration() {
        // Two disjoint two-cycles: the balance system is singular, and the uniform start is
        // already a fixed point of the iteration.
        let p = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0,
            ],
        );
        let pi = stationary_distribution(&p).unwrap();
        assert!(fixed_point_residual(&p, &pi) <= RESIDUAL_TOL);
    }

    #[test]
    fn reducible_periodic_chain_reports_non_convergence() {
        // {0, 1} is a two-cycle, 2 is absorbing and 3 feeds the cycle.
        let p = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0,
            ],
        );
        assert!(matches!(
            stationary_distribution(&p),
            Err(AoiError::NonConvergence(_))
        ));
    }

    #[test]
    fn non_square_input_is_rejected() {
        let p = DMatrix::from_row_slice(1, 2, &[0.5, 0.5]);
        assert!(stationary_distribution(&p).is_err());
    }
}
