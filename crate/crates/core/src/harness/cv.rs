use rand::seq::SliceRandom;

use crate::{seeded, Error, Result};

/// Split indices into `k` folds that each keep the global class proportion.
///
/// Each class is shuffled and dealt round-robin; the deal for the second
/// class resumes where the first stopped, so fold sizes differ by at most one
/// as well. Folds are returned with sorted indices.
pub fn stratified_kfold(labels: &[u8], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Config("k must be >= 2".into()));
    }
    let mut rng = seeded(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for class in [1u8, 0u8] {
        let mut members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        if members.len() < k {
            return Err(Error::InsufficientData(format!(
                "class {class} has {} members, need at least {k}",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for i in members {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::Config(format!("label {bad} is not binary")));
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Indices not in `fold`, ascending.
pub fn complement(n: usize, fold: &[usize]) -> Vec<usize> {
    let mut in_fold = vec![false; n];
    for &i in fold {
        in_fold[i] = true;
    }
    (0..n).filter(|&i| !in_fold[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eight_samples_four_folds() {
        let labels = [1, 0, 1, 0, 1, 0, 1, 0];
        let folds = stratified_kfold(&labels, 4, 3).unwrap();
        for f in &folds {
            assert_eq!(f.len(), 2);
            assert_eq!(f.iter().filter(|&&i| labels[i] == 1).count(), 1);
        }
    }

    #[test]
    fn vfestival_sized_split() {
        // 46% of 649 rounds to 299 positives
        let positives = (0.46f64 * 649.0).round() as usize;
        assert_eq!(positives, 299);
        let labels: Vec<u8> = (0..649).map(|i| u8::from(i < positives)).collect();
        let folds = stratified_kfold(&labels, 4, 11).unwrap();
        let mut sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![162, 162, 162, 163]);
        let pos: Vec<usize> = folds
            .iter()
            .map(|f| f.iter().filter(|&&i| labels[i] == 1).count())
            .collect();
        assert!(pos.iter().max().unwrap() - pos.iter().min().unwrap() <= 1);
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..649).collect::<Vec<_>>());
    }

    #[test]
    fn errors() {
        assert!(stratified_kfold(&[1, 1, 1, 0, 0, 0], 4, 0).is_err());
        assert!(stratified_kfold(&[1, 0], 1, 0).is_err());
        assert!(stratified_kfold(&[1, 0, 1, 0, 2, 0], 2, 0).is_err());
    }

    #[test]
    fn deterministic_and_complement() {
        let labels: Vec<u8> = (0..40).map(|i| u8::from(i % 3 == 0)).collect();
        let a = stratified_kfold(&labels, 4, 9).unwrap();
        assert_eq!(a, stratified_kfold(&labels, 4, 9).unwrap());
        let rest = complement(40, &a[0]);
        assert_eq!(rest.len() + a[0].len(), 40);
        assert!(rest.iter().all(|i| !a[0].contains(i)));
    }
}
