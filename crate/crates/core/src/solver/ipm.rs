//! Primal-dual interior point method for
//!
//! ```text
//!     minimise  f(x)         (separable, convex)
//!     s.t.      A x <= b
//!               1' x  = 1
//!               x    >= 0
//! ```
//!
//! with few inequality rows and many variables. Each Newton step reduces to
//! an (m + 1) x (m + 1) normal-equation system, so the cost per iteration is
//! O(n m^2). Mehrotra predictor-corrector with a common primal/dual step.

use nalgebra::{DMatrix, DMatrixView, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 300;
const STEP_FRACTION: f64 = 0.995;
const CHUNK: usize = 2048;
const NEIGHBOURHOOD: f64 = 1e-6;

#[derive(Clone, Debug)]
pub(crate) enum Separable {
    /// scale / 2 * sum x^2
    Quadratic { scale: f64 },
    /// c' x
    Linear { c: Vec<f64> },
}

impl Separable {
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Separable::Quadratic { scale } => {
                for (o, xi) in out.iter_mut().zip(x) {
                    *o = scale * xi;
                }
            }
            Separable::Linear { c } => out.copy_from_slice(c),
        }
    }

    fn hessian(&self, out: &mut [f64]) {
        match self {
            Separable::Quadratic { scale } => out.fill(*scale),
            Separable::Linear { .. } => out.fill(0.0),
        }
    }
}

/// Constraint matrix stored column-major: `cols[i * m + r] = A[r][i]`.
pub(crate) struct Problem<'a> {
    pub num_vars: usize,
    pub num_rows: usize,
    pub cols: &'a [f64],
    pub b: &'a [f64],
    pub objective: Separable,
}

struct Direction {
    dx: Vec<f64>,
    ds: Vec<f64>,
    dy: Vec<f64>,
    dz: Vec<f64>,
    dmu: f64,
}

/// Column-major view of a constraint matrix.
pub(super) struct Matrix<'a> {
    pub num_vars: usize,
    pub num_rows: usize,
    pub cols: &'a [f64],
}

impl Problem<'_> {
    fn matrix(&self) -> Matrix<'_> {
        Matrix {
            num_vars: self.num_vars,
            num_rows: self.num_rows,
            cols: self.cols,
        }
    }
}

impl Matrix<'_> {
    fn column(&self, i: usize) -> &[f64] {
        &self.cols[i * self.num_rows..(i + 1) * self.num_rows]
    }

    pub(super) fn a_times(&self, x: &[f64]) -> Vec<f64> {
        let m = self.num_rows;
        let partials: Vec<Vec<f64>> = x
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(c, xs)| {
                let mut acc = vec![0.0; m];
                for (k, &xi) in xs.iter().enumerate() {
                    if xi != 0.0 {
                        for (a, v) in acc.iter_mut().zip(self.column(c * CHUNK + k)) {
                            *a += v * xi;
                        }
                    }
                }
                acc
            })
            .collect();
        let mut out = vec![0.0; m];
        for p in partials {
            for (o, v) in out.iter_mut().zip(p) {
                *o += v;
            }
        }
        out
    }

    pub(super) fn at_times(&self, y: &[f64]) -> Vec<f64> {
        (0..self.num_vars)
            .into_par_iter()
            .map(|i| self.column(i).iter().zip(y).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// [A; 1'] diag(w) [A; 1']' as a dense matrix.
    pub(super) fn normal_matrix(&self, w: &[f64]) -> DMatrix<f64> {
        let m = self.num_rows;
        let k = m + 1;
        let partials: Vec<DMatrix<f64>> = w
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(c, ws)| {
                let first = c * CHUNK;
                let block = DMatrixView::from_slice(&self.cols[first * m..(first + ws.len()) * m], m, ws.len());
                let mut ext = DMatrix::from_element(k, ws.len(), 1.0);
                ext.rows_mut(0, m).copy_from(&block);
                let mut scaled = ext.clone();
                for (j, &wj) in ws.iter().enumerate() {
                    scaled.column_mut(j).scale_mut(wj);
                }
                scaled * ext.transpose()
            })
            .collect();
        partials.into_iter().fold(DMatrix::zeros(k, k), |acc, p| acc + p)
    }
}

pub(super) enum Factor {
    Cholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl Factor {
    pub(super) fn new(mut m: DMatrix<f64>) -> Result<Self> {
        let scale = (0..m.nrows()).map(|i| m[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
        for attempt in 0..6 {
            if let Some(ch) = m.clone().cholesky() {
                return Ok(Factor::Cholesky(ch));
            }
            let reg = scale * 1e-14 * 100f64.powi(attempt);
            for i in 0..m.nrows() {
                m[(i, i)] += reg;
            }
        }
        let lu = m.lu();
        if lu.is_invertible() {
            Ok(Factor::Lu(lu))
        } else {
            Err(Error::Solver("singular normal equations".into()))
        }
    }

    pub(super) fn solve(&self, rhs: DVector<f64>) -> DVector<f64> {
        match self {
            Factor::Cholesky(ch) => ch.solve(&rhs),
            Factor::Lu(lu) => lu.solve(&rhs).unwrap_or_else(|| DVector::zeros(rhs.len())),
        }
    }
}

fn max_step(v: &[f64], dv: &[f64]) -> f64 {
    v.iter()
        .zip(dv)
        .filter(|(_, &d)| d < 0.0)
        .map(|(&x, &d)| -x / d)
        .fold(f64::INFINITY, f64::min)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Primal point, the multipliers `z` of `x >= 0`, and the row slacks `s`
/// with their multipliers `y`.
pub(crate) struct Solution {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub s: Vec<f64>,
    pub y: Vec<f64>,
}

pub(crate) fn solve(problem: &Problem<'_>) -> Result<Vec<f64>> {
    solve_with_multipliers(problem).map(|s| s.x)
}

pub(crate) fn solve_with_multipliers(problem: &Problem<'_>) -> Result<Solution> {
    let n = problem.num_vars;
    let m = problem.num_rows;
    if n == 0 {
        return Err(Error::Solver("no variables".into()));
    }
    let mut x = vec![1.0 / n as f64; n];
    let mut z = vec![1.0; n];
    let mut s = vec![1.0; m];
    let mut y = vec![1.0; m];
    let mut mu = 0.0;
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let matrix = problem.matrix();
    let b_scale = 1.0 + inf_norm(problem.b);
    // infeasibility-to-complementarity ratio allowed along the path
    let mut ratio_cap: Option<f64> = None;
    let mut best: Option<(f64, Solution)> = None;

    for _ in 0..MAX_ITERATIONS {
        problem.objective.gradient(&x, &mut grad);
        problem.objective.hessian(&mut hess);
        let aty = matrix.at_times(&y);
        let r_d: Vec<f64> = (0..n).map(|i| grad[i] + aty[i] + mu - z[i]).collect();
        let ax = matrix.a_times(&x);
        let r_p: Vec<f64> = (0..m).map(|r| ax[r] + s[r] - problem.b[r]).collect();
        let r_e: f64 = x.iter().sum::<f64>() - 1.0;
        let gap = complementarity(&x, &z, &s, &y);

        let dual_scale = 1.0 + inf_norm(&grad);
        let primal = (inf_norm(&r_p) / b_scale).max(r_e.abs());
        let dual = inf_norm(&r_d) / dual_scale;
        let scaled_gap = gap / dual_scale;
        if primal <= 1e-11 && dual <= 1e-10 && scaled_gap <= 1e-13 {
            return Ok(Solution { x, z, s, y });
        }
        let merit = primal.max(dual).max(scaled_gap);
        if primal <= 1e-9 && best.as_ref().is_none_or(|(b, _)| merit < *b) {
            best = Some((
                merit,
                Solution {
                    x: x.clone(),
                    z: z.clone(),
                    s: s.clone(),
                    y: y.clone(),
                },
            ));
        }
        let infeasibility = primal.max(dual);
        let cap = *ratio_cap.get_or_insert((infeasibility / gap).max(1.0));

        let d: Vec<f64> = (0..n).map(|i| hess[i] + z[i] / x[i]).collect();
        let d_inv: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
        let mut normal = matrix.normal_matrix(&d_inv);
        for r in 0..m {
            normal[(r, r)] += s[r] / y[r];
        }
        let factor = match Factor::new(normal) {
            Ok(f) => f,
            Err(e) => return best.map(|(_, sol)| sol).ok_or(e),
        };

        let direction = |rxz: &[f64], rsy: &[f64]| -> Direction {
            let r1: Vec<f64> = (0..n).map(|i| -r_d[i] - rxz[i] / x[i]).collect();
            let scaled: Vec<f64> = (0..n).map(|i| r1[i] * d_inv[i]).collect();
            let a_scaled = matrix.a_times(&scaled);
            let mut rhs = DVector::zeros(m + 1);
            for r in 0..m {
                rhs[r] = a_scaled[r] - (-r_p[r] + rsy[r] / y[r]);
            }
            rhs[m] = scaled.iter().sum::<f64>() + r_e;
            let sol = factor.solve(rhs);
            let dy: Vec<f64> = sol.iter().take(m).copied().collect();
            let dmu = sol[m];
            let atdy = matrix.at_times(&dy);
            let dx: Vec<f64> = (0..n).map(|i| (r1[i] - atdy[i] - dmu) * d_inv[i]).collect();
            let ds: Vec<f64> = (0..m).map(|r| (-rsy[r] - s[r] * dy[r]) / y[r]).collect();
            let dz: Vec<f64> = (0..n).map(|i| (-rxz[i] - z[i] * dx[i]) / x[i]).collect();
            Direction { dx, ds, dy, dz, dmu }
        };

        let rxz: Vec<f64> = (0..n).map(|i| x[i] * z[i]).collect();
        let rsy: Vec<f64> = (0..m).map(|r| s[r] * y[r]).collect();
        let aff = direction(&rxz, &rsy);
        let alpha_aff = step_bound(&x, &z, &s, &y, &aff).min(1.0);
        let gap_aff = trial_gap(&x, &z, &s, &y, &aff, alpha_aff);
        let centering = (gap_aff / gap).clamp(0.0, 1.0).powi(3).max(1e-3);
        let target = centering * gap;

        let rxz: Vec<f64> = (0..n).map(|i| x[i] * z[i] + aff.dx[i] * aff.dz[i] - target).collect();
        let rsy: Vec<f64> = (0..m).map(|r| s[r] * y[r] + aff.ds[r] * aff.dy[r] - target).collect();
        let dir = direction(&rxz, &rsy);
        let mut alpha = 1f64.min(STEP_FRACTION * step_bound(&x, &z, &s, &y, &dir));

        // Backtrack into a wide neighbourhood of the central path: no
        // product may fall far below the average, and infeasibility must
        // shrink at least as fast as complementarity.
        loop {
            if !alpha.is_finite() || alpha < 1e-14 {
                return best
                    .map(|(_, sol)| sol)
                    .ok_or_else(|| Error::Solver("interior point step collapsed".into()));
            }
            let g = trial_gap(&x, &z, &s, &y, &dir, alpha);
            let min_product = (0..n)
                .map(|i| (x[i] + alpha * dir.dx[i]) * (z[i] + alpha * dir.dz[i]))
                .chain((0..m).map(|r| (s[r] + alpha * dir.ds[r]) * (y[r] + alpha * dir.dy[r])))
                .fold(f64::INFINITY, f64::min);
            if min_product >= NEIGHBOURHOOD * g && (1.0 - alpha) * infeasibility <= cap * g {
                break;
            }
            alpha *= 0.9;
        }
        for i in 0..n {
            x[i] += alpha * dir.dx[i];
            z[i] += alpha * dir.dz[i];
        }
        for r in 0..m {
            s[r] += alpha * dir.ds[r];
            y[r] += alpha * dir.dy[r];
        }
        mu += alpha * dir.dmu;
        if x.iter().chain(&z).chain(&s).chain(&y).any(|v| !v.is_finite() || *v <= 0.0) {
            return best
                .map(|(_, sol)| sol)
                .ok_or_else(|| Error::Solver("interior point iterate left the interior".into()));
        }
    }
    best.map(|(_, sol)| sol)
        .ok_or_else(|| Error::Solver(format!("no convergence in {MAX_ITERATIONS} iterations")))
}

fn complementarity(x: &[f64], z: &[f64], s: &[f64], y: &[f64]) -> f64 {
    (x.iter().zip(z).map(|(a, b)| a * b).sum::<f64>() + s.iter().zip(y).map(|(a, b)| a * b).sum::<f64>())
        / (x.len() + s.len()) as f64
}

fn step_bound(x: &[f64], z: &[f64], s: &[f64], y: &[f64], d: &Direction) -> f64 {
    max_step(x, &d.dx)
        .min(max_step(z, &d.dz))
        .min(max_step(s, &d.ds))
        .min(max_step(y, &d.dy))
}

fn trial_gap(x: &[f64], z: &[f64], s: &[f64], y: &[f64], d: &Direction, alpha: f64) -> f64 {
    let xz: f64 = (0..x.len())
        .map(|i| (x[i] + alpha * d.dx[i]) * (z[i] + alpha * d.dz[i]))
        .sum();
    let sy: f64 = (0..s.len())
        .map(|r| (s[r] + alpha * d.ds[r]) * (y[r] + alpha * d.dy[r]))
        .sum();
    (xz + sy) / (x.len() + s.len()) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unconstrained_gini_is_uniform() {
        let cols = vec![0.0; 5];
        let b = [1.0];
        let x = solve(&Problem {
            num_vars: 5,
            num_rows: 1,
            cols: &cols,
            b: &b,
            objective: Separable::Quadratic { scale: 5.0 },
        })
        .unwrap();
        assert!(x.iter().all(|v| (v - 0.2).abs() < 1e-9));
    }

    #[test]
    fn linear_picks_cheapest_vertex() {
        // min x0 + 2 x1 + 3 x2 on the simplex, x0 <= 0.25
        let cols = vec![1.0, 0.0, 0.0];
        let b = [0.25];
        let x = solve(&Problem {
            num_vars: 3,
            num_rows: 1,
            cols: &cols,
            b: &b,
            objective: Separable::Linear { c: vec![1.0, 2.0, 3.0] },
        })
        .unwrap();
        assert!((x[0] - 0.25).abs() < 1e-8);
        assert!((x[1] - 0.75).abs() < 1e-8);
        assert!(x[2].abs() < 1e-8);
    }
}
