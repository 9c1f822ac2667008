use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Povm;
use crate::error::{Error, Result};
use crate::numerics::CVec;

/// Born-rule outcome counts for `shots` measurements of `state`.
///
/// Identical seeds give identical counts.
pub fn sample_outcomes<const N: usize>(p: &Povm<N>, state: &CVec<N>, shots: u64, seed: u64) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(Error::DomainError("shots must be at least 1".into()));
    }
    let probs: Vec<f64> = p.probabilities(state).into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let total: f64 = probs.iter().sum();
    if !((total - 1.0).abs() <= 1e-8) {
        return Err(Error::InvalidPovm(format!("outcome probabilities sum to {total}")));
    }
    let dist = WeightedIndex::new(&probs).map_err(|e| Error::InvalidPovm(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..shots {
        counts[dist.sample(&mut rng)] += 1;
    }
    Ok(counts)
}
