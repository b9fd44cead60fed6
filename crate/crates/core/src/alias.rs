//! Vose alias tables for O(1) sampling from a fixed discrete distribution.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<usize>,
}

impl AliasTable {
    /// Build a table from nonnegative weights with a positive sum.
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("empty weight list".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidWeights(format!("bad weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidWeights("all weights are zero".into()));
        }

        let n = weights.len();
        let mut scaled: Vec<f64> = weights.iter().map(|w| w * n as f64 / total).collect();
        let mut prob = vec![0.0; n];
        let mut alias: Vec<usize> = (0..n).collect();
        let (mut small, mut large): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| scaled[i] < 1.0);

        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            prob[s] = scaled[s];
            alias[s] = l;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // leftovers are 1 up to rounding
        for i in large.into_iter().chain(small) {
            prob[i] = 1.0;
        }
        Ok(AliasTable { prob, alias })
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    pub fn prob(&self) -> &[f64] {
        &self.prob
    }

    pub fn alias(&self) -> &[usize] {
        &self.alias
    }

    #[inline]
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let i = rng.random_range(0..self.prob.len());
        if rng.random::<f64>() < self.prob[i] {
            i
        } else {
            self.alias[i]
        }
    }

    /// The exact distribution implied by `(prob, alias)`.
    pub fn implied_distribution(&self) -> Vec<f64> {
        let n = self.prob.len() as f64;
        let mut dist = vec![0.0; self.prob.len()];
        for (i, (&p, &a)) in self.prob.iter().zip(&self.alias).enumerate() {
            dist[i] += p / n;
            dist[a] += (1.0 - p) / n;
        }
        dist
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn uniform_pair() {
        let t = AliasTable::new(&[1.0, 1.0]).unwrap();
        assert!(close(&t.implied_distribution(), &[0.5, 0.5], 1e-15));
    }

    #[test]
    fn one_to_three() {
        let t = AliasTable::new(&[1.0, 3.0]).unwrap();
        // scaled (0.5, 1.5): slot 0 keeps 0.5 and aliases to 1
        assert_eq!(t.prob(), &[0.5, 1.0]);
        assert_eq!(t.alias()[0], 1);
        assert!(close(&t.implied_distribution(), &[0.25, 0.75], 1e-15));
    }

    #[test]
    fn single_weight_always_zero() {
        let t = AliasTable::new(&[5.0]).unwrap();
        let mut rng = crate::seeded(3);
        assert!((0..1000).all(|_| t.sample(&mut rng) == 0));
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(AliasTable::new(&[]).is_err());
        assert!(AliasTable::new(&[0.0, 0.0]).is_err());
        assert!(AliasTable::new(&[1.0, -0.5]).is_err());
        assert!(AliasTable::new(&[f64::NAN]).is_err());
    }

    #[test]
    fn zero_weight_never_sampled() {
        let t = AliasTable::new(&[0.0, 2.0, 0.0, 1.0]).unwrap();
        let mut rng = crate::seeded(11);
        for _ in 0..10_000 {
            let s = t.sample(&mut rng);
            assert!(s == 1 || s == 3);
        }
    }

    proptest! {
        #[test]
        fn reconstruction_matches_weights(ws in prop::collection::vec(0.0f64..100.0, 1..40)) {
            let total: f64 = ws.iter().sum();
            prop_assume!(total > 1e-6);
            let t = AliasTable::new(&ws).unwrap();
            let expected: Vec<f64> = ws.iter().map(|w| w / total).collect();
            prop_assert!(close(&t.implied_distribution(), &expected, 1e-12));
        }
    }
}
