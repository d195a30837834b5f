//! Meta-strategy solver: epsilon-CCE of a restricted metagame.

mod entropy;
mod ipm;
mod joint;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metagame::PayoffTensor;

pub use joint::{deviation_gains, restricted_gap, verify_certificate, CoPlayerDistribution, JointDistribution};

/// Slack allowed on top of epsilon when checking a solver output.
pub const CERTIFICATE_SLACK: f64 = 1e-6;
const CLEAN_THRESHOLD: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    #[value(name = "max_gini")]
    MaxGini,
    #[value(name = "max_welfare")]
    MaxWelfare,
    #[value(name = "max_entropy")]
    MaxEntropy,
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::MaxGini => "max_gini",
            Objective::MaxWelfare => "max_welfare",
            Objective::MaxEntropy => "max_entropy",
        })
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "max_gini" => Ok(Objective::MaxGini),
            "max_welfare" => Ok(Objective::MaxWelfare),
            "max_entropy" => Ok(Objective::MaxEntropy),
            _ => Err(Error::Parse(format!("unknown objective {s:?}"))),
        }
    }
}

/// Solve for an epsilon-CCE of `tensor` optimising `objective`.
///
/// One linear constraint per player per restricted deviation:
/// `sum_a sigma(a) (G_p(d, a_-p) - G_p(a)) <= epsilon`. The returned
/// distribution has already been checked against that certificate.
pub fn solve_cce(tensor: &PayoffTensor, objective: Objective, epsilon: f64) -> Result<JointDistribution> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidConfig(format!("solver epsilon must be finite and >= 0, got {epsilon}")));
    }
    let shape = tensor.shape().clone();
    let n_vars = shape.len();
    if n_vars == 1 {
        let sigma = JointDistribution::new(shape, vec![1.0], epsilon)?;
        verify_certificate(tensor, &sigma, epsilon, CERTIFICATE_SLACK)?;
        return Ok(sigma);
    }
    let dims = shape.dims().to_vec();
    let n_rows: usize = dims.iter().sum();
    let mut cols = vec![0.0; n_vars * n_rows];
    for (flat, col) in cols.chunks_mut(n_rows).enumerate() {
        let mut index = shape.unravel(flat);
        let mut row = 0;
        for (p, &size) in dims.iter().enumerate() {
            let own = index[p];
            let current = tensor.payoff(flat, p);
            for d in 0..size {
                index[p] = d;
                col[row] = tensor.payoff(shape.ravel(&index), p) - current;
                row += 1;
            }
            index[p] = own;
        }
    }
    let b = vec![epsilon; n_rows];
    let problem = |objective: ipm::Separable| {
        ipm::solve(&ipm::Problem {
            num_vars: n_vars,
            num_rows: n_rows,
            cols: &cols,
            b: &b,
            objective,
        })
    };
    let raw = match objective {
        Objective::MaxGini => problem(ipm::Separable::Quadratic { scale: n_vars as f64 })?,
        Objective::MaxWelfare => problem(ipm::Separable::Linear {
            c: (0..n_vars).map(|flat| -tensor.payoffs(flat).iter().sum::<f64>()).collect(),
        })?,
        Objective::MaxEntropy => {
            // Entries that are zero in every epsilon-CCE, and rows that are
            // tight at every one, leave the entropy problem without an
            // interior. The feasibility problem's interior-point limit is
            // strictly complementary, so it finds both: the largest support
            // of any feasible point and the rows no feasible point slackens.
            let feasible = ipm::solve_with_multipliers(&ipm::Problem {
                num_vars: n_vars,
                num_rows: n_rows,
                cols: &cols,
                b: &b,
                objective: ipm::Separable::Linear { c: vec![0.0; n_vars] },
            })?;
            let support: Vec<usize> = (0..n_vars).filter(|&i| feasible.x[i] > feasible.z[i]).collect();
            if support.is_empty() {
                return Err(Error::Solver("empty feasible support".into()));
            }
            let sub_cols: Vec<f64> = support
                .iter()
                .flat_map(|&i| cols[i * n_rows..(i + 1) * n_rows].iter().copied())
                .collect();
            let tight: Vec<bool> = (0..n_rows).map(|r| feasible.y[r] > feasible.s[r]).collect();
            let x = entropy::solve(support.len(), &sub_cols, &b, &tight)?;
            let mut full = vec![0.0; n_vars];
            for (&i, v) in support.iter().zip(x) {
                full[i] = v;
            }
            full
        }
    };

    let normalise = |mut v: Vec<f64>| {
        for x in v.iter_mut() {
            *x = x.max(0.0);
        }
        let total: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= total);
        v
    };
    let cleaned = normalise(raw.iter().map(|&x| if x < CLEAN_THRESHOLD { 0.0 } else { x }).collect());
    let sigma = JointDistribution::new(shape.clone(), cleaned, epsilon)?;
    if verify_certificate(tensor, &sigma, epsilon, CERTIFICATE_SLACK).is_ok() {
        return Ok(sigma);
    }
    let sigma = JointDistribution::new(shape, normalise(raw), epsilon)?;
    verify_certificate(tensor, &sigma, epsilon, CERTIFICATE_SLACK)?;
    Ok(sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metagame::{Provenance, Shape};

    fn matrix_tensor(rows: &[&[(f64, f64)]]) -> PayoffTensor {
        let shape = Shape(vec![rows.len(), rows[0].len()]);
        let values = rows.iter().flat_map(|r| r.iter().flat_map(|&(a, b)| [a, b])).collect();
        PayoffTensor::from_values(shape, values, Provenance::Exact).unwrap()
    }

    fn rps() -> PayoffTensor {
        let w = (1.0, -1.0);
        let l = (-1.0, 1.0);
        let t = (0.0, 0.0);
        matrix_tensor(&[&[t, l, w], &[w, t, l], &[l, w, t]])
    }

    #[test]
    fn rps_gini_is_uniform() {
        let s = solve_cce(&rps(), Objective::MaxGini, 0.0).unwrap();
        for p in s.probs() {
            assert!((p - 1.0 / 9.0).abs() < 1e-6, "{p}");
        }
    }

    #[test]
    fn single_entry_is_point_mass() {
        let t = matrix_tensor(&[&[(3.0, -3.0)]]);
        for obj in [Objective::MaxGini, Objective::MaxWelfare, Objective::MaxEntropy] {
            assert_eq!(solve_cce(&t, obj, 0.01).unwrap().probs(), &[1.0]);
        }
    }

    #[test]
    fn diagonal_welfare() {
        let t = matrix_tensor(&[&[(1.0, 1.0), (0.0, 0.0)], &[(0.0, 0.0), (1.0, 1.0)]]);
        let s = solve_cce(&t, Objective::MaxWelfare, 0.0).unwrap();
        let welfare: f64 = t.expected_values(s.probs()).iter().sum::<f64>() / 2.0;
        assert!((welfare - 1.0).abs() < 1e-8);
        assert!(s.prob(&[0, 1]) < 1e-8 && s.prob(&[1, 0]) < 1e-8);
    }

    #[test]
    fn all_objectives_certify_and_zero_sum_values_cancel() {
        let t = rps();
        for obj in [Objective::MaxGini, Objective::MaxWelfare, Objective::MaxEntropy] {
            for eps in [0.0, 0.01, 0.3] {
                let s = solve_cce(&t, obj, eps).unwrap();
                verify_certificate(&t, &s, eps, CERTIFICATE_SLACK).unwrap();
                assert!(restricted_gap(&t, &s).unwrap() <= 2.0 * eps + 1e-6);
                let v = t.expected_values(s.probs());
                assert!((v[0] + v[1]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn entropy_on_a_face_without_interior() {
        // prisoner's dilemma: the only CCE is (defect, defect)
        let pd = matrix_tensor(&[&[(3.0, 3.0), (0.0, 5.0)], &[(5.0, 0.0), (1.0, 1.0)]]);
        let s = solve_cce(&pd, Objective::MaxEntropy, 0.0).unwrap();
        assert!((s.prob(&[1, 1]) - 1.0).abs() < 1e-9, "{:?}", s.probs());

        // row 0 strictly dominated, column player indifferent: uniform over row 1
        let t = matrix_tensor(&[&[(0.0, 0.0), (0.0, 0.0), (0.0, 0.0)], &[(1.0, 0.0), (1.0, 0.0), (1.0, 0.0)]]);
        let s = solve_cce(&t, Objective::MaxEntropy, 0.0).unwrap();
        for j in 0..3 {
            assert_eq!(s.prob(&[0, j]), 0.0);
            assert!((s.prob(&[1, j]) - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn gini_is_permutation_invariant() {
        // an asymmetric general-sum game, solved before and after permuting rows/cols
        let base: Vec<Vec<(f64, f64)>> = vec![
            vec![(2.0, 1.0), (0.0, 0.0), (1.0, 3.0)],
            vec![(0.0, 0.5), (1.0, 2.0), (3.0, 0.0)],
        ];
        let refs: Vec<&[(f64, f64)]> = base.iter().map(|r| r.as_slice()).collect();
        let t = matrix_tensor(&refs);
        let rp = [1usize, 0];
        let cp = [2usize, 0, 1];
        let permuted: Vec<Vec<(f64, f64)>> = rp.iter().map(|&r| cp.iter().map(|&c| base[r][c]).collect()).collect();
        let prefs: Vec<&[(f64, f64)]> = permuted.iter().map(|r| r.as_slice()).collect();
        let tp = matrix_tensor(&prefs);
        let a = solve_cce(&t, Objective::MaxGini, 0.01).unwrap();
        let b = solve_cce(&tp, Objective::MaxGini, 0.01).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                assert!((b.prob(&[i, j]) - a.prob(&[rp[i], cp[j]])).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn objective_parsing() {
        assert_eq!("max_gini".parse::<Objective>().unwrap(), Objective::MaxGini);
        assert_eq!("max-entropy".parse::<Objective>().unwrap(), Objective::MaxEntropy);
        assert!("min_gini".parse::<Objective>().is_err());
        assert_eq!(Objective::MaxWelfare.to_string(), "max_welfare");
    }
}
