//! Deterministic train/validation/test splitting.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{MinerError, TapRecord};

/// Partitions TAPs into train/validation/test by the given ratios.
///
/// The partition is disjoint, exhaustive, and a pure function of
/// `(taps, ratios, seed)`. Sizes match the ratios to within one element:
/// train and validation sizes are rounded, test takes the remainder.
pub fn split_dataset(
    taps: Vec<TapRecord>,
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<(Vec<TapRecord>, Vec<TapRecord>, Vec<TapRecord>), MinerError> {
    let (r_train, r_val, r_test) = ratios;
    let sum = r_train + r_val + r_test;
    if (sum - 1.0).abs() > 1e-9 || r_train < 0.0 || r_val < 0.0 || r_test < 0.0 {
        return Err(MinerError::InvalidRatios([r_train, r_val, r_test]));
    }
    if taps.is_empty() {
        return Err(MinerError::EmptyDataset);
    }

    let n = taps.len();
    let mut shuffled = taps;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);

    let n_train = ((n as f64) * r_train).round() as usize;
    let n_val = ((n as f64) * r_val).round() as usize;
    let n_train = n_train.min(n);
    let n_val = n_val.min(n - n_train);

    let test = shuffled.split_off(n_train + n_val);
    let val = shuffled.split_off(n_train);
    Ok((shuffled, val, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn taps(n: usize) -> Vec<TapRecord> {
        (0..n)
            .map(|i| {
                TapRecord::new(
                    vec![format!("ctx{i}")],
                    vec![format!("tgt{i}")],
                    None,
                )
            })
            .collect()
    }

    #[test]
    fn sizes_match_ratios() {
        let (train, val, test) = split_dataset(taps(10), (0.8, 0.1, 0.1), 7).unwrap();
        assert_eq!((train.len(), val.len(), test.len()), (8, 1, 1));
    }

    #[test]
    fn partition_is_disjoint_and_exhaustive() {
        let input = taps(37);
        let all_ids: BTreeSet<String> = input.iter().map(|t| t.id.clone()).collect();
        let (train, val, test) = split_dataset(input, (0.6, 0.2, 0.2), 3).unwrap();
        let mut seen = BTreeSet::new();
        for t in train.iter().chain(&val).chain(&test) {
            assert!(seen.insert(t.id.clone()), "id appears in two splits");
        }
        assert_eq!(seen, all_ids);
    }

    #[test]
    fn same_seed_reproduces_the_partition() {
        let a = split_dataset(taps(50), (0.8, 0.1, 0.1), 42).unwrap();
        let b = split_dataset(taps(50), (0.8, 0.1, 0.1), 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seed_changes_the_partition() {
        let a = split_dataset(taps(50), (0.8, 0.1, 0.1), 1).unwrap();
        let b = split_dataset(taps(50), (0.8, 0.1, 0.1), 2).unwrap();
        assert_ne!(a.0, b.0);
    }

    #[test]
    fn bad_ratios_error() {
        assert!(matches!(
            split_dataset(taps(4), (0.5, 0.5, 0.1), 0),
            Err(MinerError::InvalidRatios(_))
        ));
    }

    #[test]
    fn empty_dataset_errors() {
        assert!(matches!(
            split_dataset(Vec::new(), (0.8, 0.1, 0.1), 0),
            Err(MinerError::EmptyDataset)
        ));
    }
}
