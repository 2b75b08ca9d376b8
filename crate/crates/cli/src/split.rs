//! Seeded train/test splitting.
//!
//! The generator is ChaCha8 seeded with `seed_from_u64(seed)`, so a split
//! depends on nothing but the seed, the fraction and the dataset. For a
//! categorical target the cases of each class (in category-code order) are
//! shuffled with one Fisher-Yates pass of the shared generator and the first
//! `round(fraction · n_c)` go to training, keeping at least one case on each
//! side when the class has two or more. Otherwise all cases are shuffled
//! once and split by `round(fraction · n)`. Both id lists come back sorted.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use surprisal_core::Dataset;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn cut(n: usize, fraction: f64) -> usize {
    let m = (fraction * n as f64).round() as usize;
    if n >= 2 {
        m.clamp(1, n - 1)
    } else {
        m.min(n)
    }
}

pub fn train_test_split(dataset: &Dataset, fraction: f64, seed: u64) -> CliResult<Split> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(CliError::Config(format!("split fraction must lie in (0, 1), got {fraction}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stratify = dataset.target().filter(|&t| dataset.specs()[t].kind.is_categorical());
    let mut train = Vec::new();
    let mut test = Vec::new();
    match stratify {
        Some(t) => {
            let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
            for case in dataset.cases() {
                groups.entry(case.values[t] as u64).or_default().push(case.id);
            }
            for ids in groups.values_mut() {
                ids.shuffle(&mut rng);
                let m = cut(ids.len(), fraction);
                train.extend_from_slice(&ids[..m]);
                test.extend_from_slice(&ids[m..]);
            }
        }
        None => {
            let mut ids: Vec<usize> = (0..dataset.len()).collect();
            ids.shuffle(&mut rng);
            let m = cut(ids.len(), fraction);
            train.extend_from_slice(&ids[..m]);
            test.extend_from_slice(&ids[m..]);
        }
    }
    train.sort_unstable();
    test.sort_unstable();
    if train.len() < 2 || test.is_empty() {
        return Err(CliError::Data(format!(
            "split of {} cases at {fraction} leaves {} training and {} test cases",
            dataset.len(),
            train.len(),
            test.len()
        )));
    }
    Ok(Split { train, test })
}
