//! Seeded train/test partition of a corpus.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tdgmine_core::Corpus;

/// Number of training proofs: `n * fraction` rounded half up.
pub fn train_count(n: usize, fraction: f64) -> usize {
    ((n as f64 * fraction + 0.5).floor() as usize).min(n)
}

/// Picks `train_count` proofs at random for training and leaves the rest for
/// testing. Both halves keep the original proof order and the corpus's
/// tactic definitions.
pub fn split_corpus(corpus: &Corpus, train_fraction: f64, seed: u64) -> (Corpus, Corpus) {
    let n = corpus.proofs.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut in_train = vec![false; n];
    for &i in &idx[..train_count(n, train_fraction)] {
        in_train[i] = true;
    }
    let (mut train, mut test) = (Corpus::default(), Corpus::default());
    train.tactics = corpus.tactics.clone();
    test.tactics = corpus.tactics.clone();
    for (p, &t) in corpus.proofs.iter().zip(&in_train) {
        if t {
            train.proofs.push(p.clone());
        } else {
            test.proofs.push(p.clone());
        }
    }
    (train, test)
}
