use crate::error::{Error, Result};
use crate::metagame::{PayoffTensor, Shape};

/// A probability distribution over joint metagame actions.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct JointDistribution {
    shape: Shape,
    probs: Vec<f64>,
    solver_epsilon: f64,
}

/// sigma marginalised onto the co-players of `focal`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoPlayerDistribution {
    pub focal: usize,
    /// Shape over the co-players, in player order with `focal` removed.
    pub shape: Shape,
    pub probs: Vec<f64>,
}

impl CoPlayerDistribution {
    /// (co-player index tuple, probability) for every entry with positive mass.
    pub fn support(&self) -> Vec<(Vec<usize>, f64)> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(flat, &p)| (self.shape.unravel(flat), p))
            .collect()
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
struct SparseForm {
    shape: Vec<usize>,
    solver_epsilon: f64,
    entries: Vec<(Vec<usize>, f64)>,
}

impl JointDistribution {
    pub fn new(shape: Shape, probs: Vec<f64>, solver_epsilon: f64) -> Result<Self> {
        if probs.len() != shape.len() || shape.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{} probabilities for shape {:?}",
                probs.len(),
                shape.dims()
            )));
        }
        if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidMixture("negative or non-finite probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidMixture(format!("probabilities sum to {total}")));
        }
        Ok(JointDistribution {
            shape,
            probs,
            solver_epsilon,
        })
    }

    pub fn point_mass(shape: Shape, index: &[usize]) -> Result<Self> {
        let mut probs = vec![0.0; shape.len()];
        probs[shape.ravel(index)] = 1.0;
        Self::new(shape, probs, 0.0)
    }

    pub fn uniform(shape: Shape) -> Result<Self> {
        let n = shape.len();
        Self::new(shape, vec![1.0 / n as f64; n], 0.0)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, index: &[usize]) -> f64 {
        self.probs[self.shape.ravel(index)]
    }

    pub fn solver_epsilon(&self) -> f64 {
        self.solver_epsilon
    }

    pub fn num_players(&self) -> usize {
        self.shape.dims().len()
    }

    /// Distribution over co-player joint indices: sums out `player`.
    pub fn marginal(&self, player: usize) -> Result<CoPlayerDistribution> {
        if player >= self.num_players() {
            return Err(Error::PlayerOutOfRange {
                player,
                num_players: self.num_players(),
            });
        }
        let co_shape = self.shape.without(player);
        let mut probs = vec![0.0; co_shape.len()];
        for (flat, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut index = self.shape.unravel(flat);
            index.remove(player);
            probs[co_shape.ravel(&index)] += p;
        }
        Ok(CoPlayerDistribution {
            focal: player,
            shape: co_shape,
            probs,
        })
    }

    /// Marginal distribution over one player's own strategies.
    pub fn own_marginal(&self, player: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.shape.dims()[player]];
        for (flat, &p) in self.probs.iter().enumerate() {
            out[self.shape.unravel(flat)[player]] += p;
        }
        out
    }

    /// Embed into a larger shape, giving new joint entries zero mass.
    pub fn embed(&self, shape: &Shape) -> Result<Self> {
        if shape.dims().len() != self.num_players()
            || shape.dims().iter().zip(self.shape.dims()).any(|(n, o)| n < o)
        {
            return Err(Error::DimensionMismatch("can only embed into a larger shape".into()));
        }
        let mut probs = vec![0.0; shape.len()];
        for (flat, &p) in self.probs.iter().enumerate() {
            probs[shape.ravel(&self.shape.unravel(flat))] = p;
        }
        Ok(JointDistribution {
            shape: shape.clone(),
            probs,
            solver_epsilon: self.solver_epsilon,
        })
    }

    /// JSON list of (joint index, probability) pairs with a shape header.
    /// Zero-probability entries are omitted.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_sparse())?)
    }

    fn to_sparse(&self) -> SparseForm {
        SparseForm {
            shape: self.shape.dims().to_vec(),
            solver_epsilon: self.solver_epsilon,
            entries: self
                .probs
                .iter()
                .enumerate()
                .filter(|(_, &p)| p != 0.0)
                .map(|(flat, &p)| (self.shape.unravel(flat), p))
                .collect(),
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self.to_sparse()).expect("sparse form serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let sparse: SparseForm = serde_json::from_str(text)?;
        Self::from_sparse(sparse)
    }

    pub fn from_json_value(value: serde_json::Value) -> Result<Self> {
        Self::from_sparse(serde_json::from_value(value)?)
    }

    fn from_sparse(sparse: SparseForm) -> Result<Self> {
        let shape = Shape(sparse.shape);
        let mut probs = vec![0.0; shape.len()];
        for (index, p) in sparse.entries {
            if index.len() != shape.dims().len() || index.iter().zip(shape.dims()).any(|(i, d)| i >= d) {
                return Err(Error::DimensionMismatch(format!("index {index:?} outside shape")));
            }
            probs[shape.ravel(&index)] = p;
        }
        Self::new(shape, probs, sparse.solver_epsilon)
    }

    /// Number of joint actions with probability above `threshold`.
    pub fn support_size(&self, threshold: f64) -> usize {
        self.probs.iter().filter(|&&p| p > threshold).count()
    }
}

/// Largest expected gain of each player from switching to each of its
/// restricted strategies, before clipping: gains[p][d].
pub fn deviation_gains(tensor: &PayoffTensor, sigma: &JointDistribution) -> Result<Vec<Vec<f64>>> {
    if tensor.shape() != sigma.shape() {
        return Err(Error::DimensionMismatch(format!(
            "tensor shape {:?} vs sigma shape {:?}",
            tensor.shape().dims(),
            sigma.shape().dims()
        )));
    }
    let shape = tensor.shape();
    let n = tensor.num_players();
    let mut gains: Vec<Vec<f64>> = shape.dims().iter().map(|&d| vec![0.0; d]).collect();
    for (flat, &p) in sigma.probs().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let mut index = shape.unravel(flat);
        for player in 0..n {
            let own = index[player];
            let current = tensor.payoff(flat, player);
            for d in 0..shape.dims()[player] {
                index[player] = d;
                gains[player][d] += p * (tensor.payoff(shape.ravel(&index), player) - current);
            }
            index[player] = own;
        }
    }
    Ok(gains)
}

/// Sum over players of the best restricted deviation gain, clipped at 0.
pub fn restricted_gap(tensor: &PayoffTensor, sigma: &JointDistribution) -> Result<f64> {
    Ok(deviation_gains(tensor, sigma)?
        .iter()
        .map(|g| g.iter().copied().fold(0.0, f64::max))
        .sum())
}

/// Check the solver certificate: every restricted deviation gains at most
/// `epsilon + slack`.
pub fn verify_certificate(tensor: &PayoffTensor, sigma: &JointDistribution, epsilon: f64, slack: f64) -> Result<()> {
    let gains = deviation_gains(tensor, sigma)?;
    for (p, g) in gains.iter().enumerate() {
        for (d, &v) in g.iter().enumerate() {
            if v > epsilon + slack {
                return Err(Error::Solver(format!(
                    "certificate violated: player {p} gains {v:e} by deviating to {d} (epsilon {epsilon:e})"
                )));
            }
        }
    }
    Ok(())
}
