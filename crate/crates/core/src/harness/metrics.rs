use crate::{Error, Result};

/// Binary classification scores with class 1 as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Metrics {
    pub fn mean(items: &[Metrics]) -> Metrics {
        let n = items.len().max(1) as f64;
        let sum = |f: fn(&Metrics) -> f64| items.iter().map(f).sum::<f64>() / n;
        Metrics {
            accuracy: sum(|m| m.accuracy),
            precision: sum(|m| m.precision),
            recall: sum(|m| m.recall),
            f1: sum(|m| m.f1),
        }
    }
}

/// Accuracy, precision, recall and F1. Undefined ratios (no predicted or no
/// actual positives) are reported as 0.
pub fn compute_metrics(y_true: &[u8], y_pred: &[u8]) -> Result<Metrics> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            got: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::InsufficientData("no predictions to score".into()));
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0usize, 0usize, 0usize, 0usize);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => tp += 1,
            (0, 1) => fp += 1,
            (1, 0) => fn_ += 1,
            (0, 0) => tn += 1,
            _ => return Err(Error::Config(format!("non-binary label pair ({t}, {p})"))),
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(Metrics {
        accuracy: ratio(tp + tn, y_true.len()),
        precision,
        recall,
        f1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect() {
        let y = [1, 0, 1, 1, 0];
        let m = compute_metrics(&y, &y).unwrap();
        assert_eq!((m.accuracy, m.precision, m.recall, m.f1), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn confusion_counts() {
        // TP=5, FP=1, FN=2, TN=12
        let mut t = Vec::new();
        let mut p = Vec::new();
        for (tv, pv, n) in [(1, 1, 5), (0, 1, 1), (1, 0, 2), (0, 0, 12)] {
            t.extend(std::iter::repeat_n(tv, n));
            p.extend(std::iter::repeat_n(pv, n));
        }
        let m = compute_metrics(&t, &p).unwrap();
        assert!((m.accuracy - 0.85).abs() < 1e-12);
        assert!((m.precision - 5.0 / 6.0).abs() < 1e-12);
        assert!((m.recall - 5.0 / 7.0).abs() < 1e-12);
        assert!((m.f1 - 10.0 / 13.0).abs() < 1e-12);
        assert!((m.precision - 0.8333).abs() < 1e-4 && (m.f1 - 0.7692).abs() < 1e-4);
    }

    #[test]
    fn no_predicted_positives() {
        let m = compute_metrics(&[1, 0, 1], &[0, 0, 0]).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
        assert!(compute_metrics(&[1, 0], &[1]).is_err());
        assert!(compute_metrics(&[], &[]).is_err());
    }
}
