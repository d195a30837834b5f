//! Maximum-entropy distribution under linear constraints,
//!
//! ```text
//!     maximise  -sum x ln x   s.t.  A_E x = b_E,  A_I x <= b_I,  1' x = 1,
//! ```
//!
//! through its dual `min log sum_i exp(-(A'y)_i) + b'y` over `y_I >= 0`,
//! whose minimiser gives `x = softmax(-A'y)`. A log barrier on `y_I` is
//! driven to zero with damped Newton steps; every barrier minimiser is
//! strictly feasible for the inequality rows. The problem must have a
//! feasible point with full support that is strict on the inequality rows.

use nalgebra::{DMatrix, DVector};

use super::ipm::{Factor, Matrix};
use crate::error::Result;

const BARRIER_START: f64 = 0.01;
const BARRIER_SHRINK: f64 = 0.01;
const BARRIER_END: f64 = 1e-12;
const NEWTON_TOLERANCE: f64 = 1e-16;
// below this a rejected full step means the line search only sees rounding
const NOISE_DECREMENT: f64 = 1e-10;
const MAX_NEWTON_STEPS: usize = 200;
const ARMIJO: f64 = 0.25;

pub(crate) fn solve(num_vars: usize, cols: &[f64], b: &[f64], equality: &[bool]) -> Result<Vec<f64>> {
    let matrix = Matrix {
        num_vars,
        num_rows: b.len(),
        cols,
    };
    let ineq: Vec<usize> = (0..b.len()).filter(|&r| !equality[r]).collect();
    let mut y: Vec<f64> = equality.iter().map(|&e| if e { 0.0 } else { BARRIER_START }).collect();
    let mut t = BARRIER_START;
    loop {
        let hessian = newton(&matrix, b, &ineq, &mut y, t)?;
        let next = t * BARRIER_SHRINK;
        if next < BARRIER_END {
            break;
        }
        // first-order move along the central path, y(next) ~ y - (t - next) y'(t)
        if let Some(hessian) = hessian {
            let tangent = hessian.solve(DVector::from_iterator(
                y.len(),
                equality.iter().zip(&y).map(|(&e, &v)| if e { 0.0 } else { 1.0 / v }),
            ));
            let mut alpha: f64 = 1.0;
            for &r in &ineq {
                let d = -(t - next) * tangent[r];
                if d < 0.0 {
                    alpha = alpha.min(-0.9 * y[r] / d);
                }
            }
            for (v, d) in y.iter_mut().zip(tangent.iter()) {
                *v -= alpha * (t - next) * d;
            }
        }
        t = next;
    }
    Ok(primal(&matrix, &y).0)
}

/// `softmax(-A'y)` and `log sum exp(-A'y)`.
fn primal(matrix: &Matrix<'_>, y: &[f64]) -> (Vec<f64>, f64) {
    let u = matrix.at_times(y);
    let top = u.iter().fold(f64::NEG_INFINITY, |m, v| m.max(-v));
    let w: Vec<f64> = u.iter().map(|v| (-v - top).exp()).collect();
    let total: f64 = w.iter().sum();
    (w.iter().map(|v| v / total).collect(), top + total.ln())
}

fn barrier_value(matrix: &Matrix<'_>, b: &[f64], ineq: &[usize], y: &[f64], t: f64) -> f64 {
    if ineq.iter().any(|&r| !(y[r] > 0.0)) {
        return f64::INFINITY;
    }
    let lse = primal(matrix, y).1;
    let by: f64 = b.iter().zip(y).map(|(b, y)| b * y).sum();
    lse + by - t * ineq.iter().map(|&r| y[r].ln()).sum::<f64>()
}

/// Centre `y` for barrier weight `t`; returns the factored Hessian at the
/// last point where it was formed.
fn newton(matrix: &Matrix<'_>, b: &[f64], ineq: &[usize], y: &mut [f64], t: f64) -> Result<Option<Factor>> {
    let m = matrix.num_rows;
    let mut last = None;
    for _ in 0..MAX_NEWTON_STEPS {
        let (x, _) = primal(matrix, y);
        let ax = matrix.a_times(&x);
        let mut grad: Vec<f64> = (0..m).map(|r| b[r] - ax[r]).collect();
        for &r in ineq {
            grad[r] -= t / y[r];
        }
        let moments = matrix.normal_matrix(&x);
        let mut hessian = DMatrix::from_fn(m, m, |r, c| moments[(r, c)] - ax[r] * ax[c]);
        for &r in ineq {
            hessian[(r, r)] += t / (y[r] * y[r]);
        }
        let factor = Factor::new(hessian)?;
        let step = factor.solve(DVector::from_iterator(m, grad.iter().map(|g| -g)));
        last = Some(factor);
        let decrement: f64 = -grad.iter().zip(step.iter()).map(|(g, d)| g * d).sum::<f64>();
        if !(decrement > NEWTON_TOLERANCE) {
            return Ok(last);
        }
        let mut alpha: f64 = 1.0;
        for &r in ineq {
            if step[r] < 0.0 {
                alpha = alpha.min(-0.99 * y[r] / step[r]);
            }
        }
        let current = barrier_value(matrix, b, ineq, y, t);
        let mut trial = y.to_vec();
        loop {
            for r in 0..m {
                trial[r] = y[r] + alpha * step[r];
            }
            if barrier_value(matrix, b, ineq, &trial, t) <= current - ARMIJO * alpha * decrement {
                break;
            }
            alpha *= 0.5;
            if decrement < NOISE_DECREMENT || alpha < 1e-16 {
                // no representable decrease left
                return Ok(last);
            }
        }
        y.copy_from_slice(&trial);
    }
    Ok(last)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cap_spreads_the_remaining_mass() {
        // x0 <= 0.1 over four outcomes
        let x = solve(4, &[1.0, 0.0, 0.0, 0.0], &[0.1], &[false]).unwrap();
        assert!((x[0] - 0.1).abs() < 1e-9);
        for v in &x[1..] {
            assert!((v - 0.3).abs() < 1e-9);
        }
    }

    #[test]
    fn slack_row_leaves_uniform() {
        let x = solve(3, &[1.0, 0.0, 0.0], &[0.9], &[false]).unwrap();
        for v in &x {
            assert!((v - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn equality_rows_hold() {
        // x0 - x1 = 0.2 with a redundant copy of the same row
        let cols = [1.0, 1.0, -1.0, -1.0, 0.0, 0.0];
        let x = solve(3, &cols, &[0.2, 0.2], &[true, true]).unwrap();
        assert!((x[0] - x[1] - 0.2).abs() < 1e-9);
        // maximiser of the entropy on that line
        let h = |a: f64| {
            let v = [a + 0.2, a, 0.8 - 2.0 * a];
            -v.iter().map(|p| p * p.ln()).sum::<f64>()
        };
        assert!(h(x[1]) >= h(x[1] + 1e-6) && h(x[1]) >= h(x[1] - 1e-6));
    }
}
