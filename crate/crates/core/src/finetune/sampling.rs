use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::qa::QAPair;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot sample {requested} pairs from a population of {population}")]
pub struct SampleError {
    pub requested: usize,
    pub population: usize,
}

/// Portable seeded generator: ChaCha8 keyed by `seed_from_u64`, with bounded
/// draws by Lemire's multiply-and-reject method. The stream depends only on
/// the seed, never on platform or pointer width.
pub struct SampleRng(ChaCha8Rng);

impl SampleRng {
    pub fn new(seed: u64) -> Self {
        SampleRng(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform in `0..n`. `n` must be non-zero.
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        let mut m = u128::from(self.0.next_u64()) * u128::from(n);
        if (m as u64) < n {
            let threshold = n.wrapping_neg() % n;
            while (m as u64) < threshold {
                m = u128::from(self.0.next_u64()) * u128::from(n);
            }
        }
        (m >> 64) as u64
    }

    /// The first `k` positions of a Fisher-Yates shuffle of `0..n`.
    pub fn partial_shuffle(&mut self, n: usize, k: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..k.min(n) {
            let j = i + self.below((n - i) as u64) as usize;
            idx.swap(i, j);
        }
        idx.truncate(k);
        idx
    }
}

/// Draws `size` distinct pairs without replacement. The result (including
/// its order) is a pure function of the input order, `size` and `seed`.
pub fn sample_training_set(pairs: &[QAPair], size: usize, seed: u64) -> Result<Vec<QAPair>, SampleError> {
    Ok(split_training_set(pairs, size, seed)?.0)
}

/// Like [`sample_training_set`], also returning the pairs that were not
/// drawn, in their original order.
pub fn split_training_set(pairs: &[QAPair], size: usize, seed: u64) -> Result<(Vec<QAPair>, Vec<QAPair>), SampleError> {
    if size > pairs.len() {
        return Err(SampleError { requested: size, population: pairs.len() });
    }
    let chosen = SampleRng::new(seed).partial_shuffle(pairs.len(), size);
    let mut taken = vec![false; pairs.len()];
    for &i in &chosen {
        taken[i] = true;
    }
    let sampled = chosen.iter().map(|&i| pairs[i].clone()).collect();
    let rest = pairs.iter().zip(&taken).filter(|(_, &t)| !t).map(|(p, _)| p.clone()).collect();
    Ok((sampled, rest))
}
