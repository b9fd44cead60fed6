//! Poincaré-ball embeddings trained with Riemannian SGD and negative sampling.
//!
//! For every observed edge `(u, v)` the loss is the softmax cross-entropy of
//! `v` against sampled non-neighbors `N(u)` under negative hyperbolic
//! distance:
//!
//! ```text
//! L = d(u, v) + log sum_{w in {v} + N(u)} exp(-d(u, w))
//! ```
//!
//! Euclidean gradients are rescaled by `(1 - |x|^2)^2 / 4` and iterates are
//! projected back to `|x| <= 1 - eps`.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::embedding::{dot, EmbeddingMatrix};
use crate::graph::Graph;
use crate::{seeded, Error, Result};

pub const DEFAULT_BALL_EPS: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct PoincareConfig {
    pub dim: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub negatives: usize,
    pub burn_in_epochs: usize,
    pub burn_in_factor: f64,
    pub ball_eps: f64,
    pub seed: u64,
}

impl Default for PoincareConfig {
    fn default() -> Self {
        PoincareConfig {
            dim: 128,
            epochs: 50,
            learning_rate: 0.01,
            negatives: 10,
            burn_in_epochs: 10,
            burn_in_factor: 0.1,
            ball_eps: DEFAULT_BALL_EPS,
            seed: 0,
        }
    }
}

impl PoincareConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::Config("poincare dim must be >= 2".into()));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 || self.negatives == 0 {
            return Err(Error::Config(
                "poincare learning_rate must be > 0 and negatives >= 1".into(),
            ));
        }
        if !(self.ball_eps > 0.0 && self.ball_eps < 1.0) {
            return Err(Error::Config("ball_eps must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

fn check_inside(x: &[f64]) -> Result<f64> {
    let sq = dot(x, x);
    if sq.is_finite() && sq < 1.0 {
        Ok(sq)
    } else {
        Err(Error::OutsideBall { norm: sq.sqrt() })
    }
}

/// `arcosh(1 + 2|u-v|^2 / ((1-|u|^2)(1-|v|^2)))`; errors for points not strictly inside the unit ball.
pub fn poincare_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    let uu = check_inside(u)?;
    let vv = check_inside(v)?;
    Ok(distance_unchecked(u, v, uu, vv))
}

fn sq_dist(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn distance_arg(u: &[f64], v: &[f64], uu: f64, vv: f64) -> f64 {
    (1.0 + 2.0 * sq_dist(u, v) / ((1.0 - uu) * (1.0 - vv))).max(1.0)
}

fn distance_unchecked(u: &[f64], v: &[f64], uu: f64, vv: f64) -> f64 {
    distance_arg(u, v, uu, vv).acosh()
}

/// Accumulate `scale * d/du distance(u, v)` into `out`.
fn add_distance_grad(u: &[f64], v: &[f64], uu: f64, vv: f64, scale: f64, out: &mut [f64]) {
    let alpha = 1.0 - uu;
    let beta = 1.0 - vv;
    let delta = sq_dist(u, v);
    let x = 1.0 + 2.0 * delta / (alpha * beta);
    let z = x * x - 1.0;
    if z <= 1e-30 {
        return;
    }
    let outer = scale / z.sqrt();
    let a = 4.0 / (alpha * beta);
    let b = 4.0 * delta / (alpha * alpha * beta);
    for ((o, &ui), &vi) in out.iter_mut().zip(u).zip(v) {
        *o += outer * (a * (ui - vi) + b * ui);
    }
}

/// Riemannian rescaling of a Euclidean gradient at `theta`.
pub fn riemannian_scale(euclidean_grad: &[f64], theta: &[f64]) -> Vec<f64> {
    let factor = riemannian_factor(theta);
    euclidean_grad.iter().map(|g| g * factor).collect()
}

fn riemannian_factor(theta: &[f64]) -> f64 {
    let s = 1.0 - dot(theta, theta);
    s * s / 4.0
}

/// Pull `x` back inside the ball of radius `1 - eps` if it has reached its boundary.
///
/// Projected points land a few ulps inside the boundary so the strict
/// invariant `|x| < 1 - eps` survives rounding.
pub fn project_ball(x: &mut [f64], eps: f64) {
    let norm = dot(x, x).sqrt();
    let max = 1.0 - eps;
    if norm >= max {
        let s = max / norm * (1.0 - 4.0 * f64::EPSILON);
        for xi in x.iter_mut() {
            *xi *= s;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoincareGradient {
    pub loss: f64,
    /// Euclidean gradient per distinct touched row, in first-touch order.
    pub rows: Vec<(usize, Vec<f64>)>,
}

/// Loss for one observed edge `(u, v)` against `negatives`, with its Euclidean gradient.
pub fn edge_loss_and_grad(
    emb: &EmbeddingMatrix,
    u: usize,
    v: usize,
    negatives: &[usize],
) -> PoincareGradient {
    let dim = emb.dim();
    let pu = emb.row(u);
    let uu = dot(pu, pu);
    let others: Vec<usize> = std::iter::once(v).chain(negatives.iter().copied()).collect();
    let sq: Vec<f64> = others.iter().map(|&w| dot(emb.row(w), emb.row(w))).collect();
    let dists: Vec<f64> = others
        .iter()
        .zip(&sq)
        .map(|(&w, &ww)| distance_unchecked(pu, emb.row(w), uu, ww))
        .collect();
    let min = dists.iter().copied().fold(f64::INFINITY, f64::min);
    let exps: Vec<f64> = dists.iter().map(|d| (-(d - min)).exp()).collect();
    let z: f64 = exps.iter().sum();
    let loss = dists[0] - min + z.ln();

    let mut rows: Vec<(usize, Vec<f64>)> = vec![(u, vec![0.0; dim])];
    for (k, (&w, &ww)) in others.iter().zip(&sq).enumerate() {
        let soft = exps[k] / z;
        let coef = if k == 0 { 1.0 - soft } else { -soft };
        let pw = emb.row(w);
        add_distance_grad(pu, pw, uu, ww, coef, &mut rows[0].1);
        let slot = match rows.iter().position(|(r, _)| *r == w) {
            Some(i) => i,
            None => {
                rows.push((w, vec![0.0; dim]));
                rows.len() - 1
            }
        };
        add_distance_grad(pw, pu, ww, uu, coef, &mut rows[slot].1);
    }
    PoincareGradient { loss, rows }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoincareModel {
    pub embedding: EmbeddingMatrix,
    /// Mean loss per epoch.
    pub epoch_losses: Vec<f64>,
}

fn sample_negatives(
    graph: &Graph,
    u: usize,
    count: usize,
    rng: &mut crate::Rng,
    out: &mut Vec<usize>,
) {
    out.clear();
    let n = graph.node_count();
    if graph.degree(u) + 1 >= n {
        return;
    }
    let mut tries = 0;
    while out.len() < count && tries < 20 * count {
        tries += 1;
        let w = rng.random_range(0..n);
        if w != u && !graph.has_edge(u, w) {
            out.push(w);
        }
    }
}

/// Train on every edge in both directions; burn-in epochs use a reduced rate.
pub fn train_poincare(graph: &Graph, config: &PoincareConfig) -> Result<PoincareModel> {
    config.validate()?;
    if graph.is_empty() {
        return Err(Error::InsufficientData("graph has no nodes".into()));
    }
    let mut rng = seeded(config.seed);
    let n = graph.node_count();
    let init: Vec<f64> = (0..n * config.dim)
        .map(|_| rng.random_range(-0.001..=0.001))
        .collect();
    let mut emb = EmbeddingMatrix::from_vec(n, config.dim, init)?;

    let mut pairs: Vec<(usize, usize)> = graph
        .edges()
        .into_iter()
        .flat_map(|(u, v)| [(u, v), (v, u)])
        .collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut negs = Vec::with_capacity(config.negatives);
    for epoch in 0..config.epochs {
        let lr = if epoch < config.burn_in_epochs {
            config.learning_rate * config.burn_in_factor
        } else {
            config.learning_rate
        };
        pairs.shuffle(&mut rng);
        let mut total = 0.0;
        for &(u, v) in &pairs {
            sample_negatives(graph, u, config.negatives, &mut rng, &mut negs);
            let grad = edge_loss_and_grad(&emb, u, v, &negs);
            total += grad.loss;
            for (row, g) in &grad.rows {
                let theta = emb.row_mut(*row);
                let factor = riemannian_factor(theta);
                for (t, gi) in theta.iter_mut().zip(g) {
                    *t -= lr * factor * gi;
                }
                project_ball(theta, config.ball_eps);
            }
        }
        epoch_losses.push(if pairs.is_empty() {
            0.0
        } else {
            total / pairs.len() as f64
        });
    }
    if !emb.is_finite() {
        return Err(Error::Config("poincare training diverged".into()));
    }
    Ok(PoincareModel {
        embedding: emb,
        epoch_losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_to_origin() {
        let d = poincare_distance(&[0.5, 0.0], &[0.0, 0.0]).unwrap();
        assert!((d - 3f64.ln()).abs() < 1e-12);
        assert!(((5.0f64 / 3.0).acosh() - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn distance_identity_and_errors() {
        let x = [0.3, -0.2, 0.1];
        assert_eq!(poincare_distance(&x, &x).unwrap(), 0.0);
        assert!(matches!(
            poincare_distance(&[1.0, 0.0], &[0.0, 0.0]),
            Err(Error::OutsideBall { .. })
        ));
        assert!(poincare_distance(&[0.0, 0.0], &[0.0, 1.5]).is_err());
        assert!(poincare_distance(&[0.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn scale_factor() {
        assert_eq!(riemannian_scale(&[4.0, -8.0], &[0.0, 0.0]), vec![1.0, -2.0]);
        let theta = [0.99f64.sqrt(), 0.0];
        let s = riemannian_scale(&[1.0, 0.0], &theta);
        assert!((s[0] - 2.5e-5).abs() < 1e-15);
        assert_eq!(riemannian_scale(&[0.0, 0.0], &theta), vec![0.0, 0.0]);
    }

    #[test]
    fn projection() {
        let mut x = [0.3, 0.0];
        project_ball(&mut x, 1e-5);
        assert_eq!(x, [0.3, 0.0]);
        let mut x = [2.0, 0.0];
        project_ball(&mut x, 1e-5);
        assert!((x[0] - 0.99999).abs() < 1e-15 && x[1] == 0.0);
        let mut z = [0.0, 0.0];
        project_ball(&mut z, 1e-5);
        assert_eq!(z, [0.0, 0.0]);
    }

    #[test]
    fn complete_graph_has_no_negatives() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let mut rng = seeded(0);
        let mut out = vec![9];
        sample_negatives(&g, 0, 5, &mut rng, &mut out);
        assert!(out.is_empty());
    }

    #[test]
    fn rows_stay_inside_ball() {
        let g = Graph::from_edges(6, &[(0, 1), (0, 2), (1, 3), (1, 4), (2, 5)]).unwrap();
        let cfg = PoincareConfig {
            dim: 3,
            epochs: 30,
            learning_rate: 5.0,
            negatives: 3,
            burn_in_epochs: 2,
            ..PoincareConfig::default()
        };
        let m = train_poincare(&g, &cfg).unwrap();
        for i in 0..6 {
            let r = m.embedding.row(i);
            assert!(dot(r, r).sqrt() < 1.0 - 1e-5);
        }
        assert_eq!(m.epoch_losses.len(), 30);
    }
}
