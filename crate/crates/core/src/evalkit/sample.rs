//! Deterministic sampling of imperfect predictions into BLEU score
//! buckets, for manual inspection files.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bleu::bleu4;

/// Default draw size per bucket.
pub const DEFAULT_BUCKET_SAMPLE: usize = 25;

/// Human-readable bucket labels, in order.
pub const BUCKET_LABELS: [&str; 4] = ["0-24", "25-49", "50-74", "75-100"];

/// One imperfect top-candidate prediction with its gold target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImperfectPrediction {
    pub id: String,
    pub prediction: Vec<String>,
    pub gold: Vec<String>,
}

fn bucket_of(score: f64) -> usize {
    if score < 25.0 {
        0
    } else if score < 50.0 {
        1
    } else if score < 75.0 {
        2
    } else {
        3
    }
}

/// Partitions imperfect predictions by BLEU-4 into four ranges and draws
/// `n_per_bucket` from each, deterministically by seed. A bucket with too
/// few members is returned whole (with a warning in the log).
pub fn bleu_bucket_sample(
    items: &[ImperfectPrediction],
    n_per_bucket: usize,
    seed: u64,
) -> [Vec<ImperfectPrediction>; 4] {
    let mut buckets: [Vec<&ImperfectPrediction>; 4] = Default::default();
    for item in items {
        buckets[bucket_of(bleu4(&item.prediction, &item.gold))].push(item);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: [Vec<ImperfectPrediction>; 4] = Default::default();
    for (i, bucket) in buckets.into_iter().enumerate() {
        if bucket.len() <= n_per_bucket {
            if bucket.len() < n_per_bucket {
                log::warn!(
                    "BLEU bucket {} holds only {} of the requested {} samples",
                    BUCKET_LABELS[i],
                    bucket.len(),
                    n_per_bucket
                );
            }
            out[i] = bucket.into_iter().cloned().collect();
        } else {
            let mut refs = bucket;
            refs.shuffle(&mut rng);
            refs.truncate(n_per_bucket);
            out[i] = refs.into_iter().cloned().collect();
        }
    }
    out
}
