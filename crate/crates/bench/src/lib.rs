//! Synthetic streams for benchmarking the sampler.
//!
//! Item popularity follows a Zipf-like law over `alphabet` items so that
//! instances share patterns the way real transaction data does.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rps_core::{Batch, Instance, InstanceKind, ItemId, Itemset, WeightedItemset};

/// Shape of a synthetic stream.
#[derive(Clone, Copy, Debug)]
pub struct StreamShape {
    pub kind: InstanceKind,
    pub batches: usize,
    pub batch_size: usize,
    pub alphabet: u32,
    /// Items per itemset instance, or itemsets per sequence.
    pub length: usize,
    /// Items per sequence element.
    pub element_size: usize,
}

impl StreamShape {
    pub fn new(kind: InstanceKind, batches: usize, batch_size: usize) -> Self {
        Self {
            kind,
            batches,
            batch_size,
            alphabet: 200,
            length: 8,
            element_size: 2,
        }
    }
}

fn zipf_item<R: Rng>(rng: &mut R, alphabet: u32) -> ItemId {
    // Inverse of a continuous 1/x density on [1, alphabet + 1).
    let u: f64 = rng.random();
    let x = ((alphabet as f64 + 1.0).ln() * u).exp() - 1.0;
    ItemId((x as u32).min(alphabet - 1))
}

fn items<R: Rng>(rng: &mut R, alphabet: u32, n: usize) -> Vec<ItemId> {
    let mut out: Vec<ItemId> = Vec::with_capacity(n);
    while out.len() < n.min(alphabet as usize) {
        let i = zipf_item(rng, alphabet);
        if !out.contains(&i) {
            out.push(i);
        }
    }
    out
}

pub fn instance<R: Rng>(rng: &mut R, shape: &StreamShape) -> Instance {
    let len = rng.random_range(1..=shape.length);
    match shape.kind {
        InstanceKind::PlainItemset => Instance::plain(items(rng, shape.alphabet, len)).unwrap(),
        InstanceKind::WeightedItemset => {
            let pairs: Vec<_> = items(rng, shape.alphabet, len)
                .into_iter()
                .map(|i| (i, rng.random_range(1..=10) as f64))
                .collect();
            Instance::Weighted(WeightedItemset::new(pairs).unwrap())
        }
        InstanceKind::Sequence => {
            let sets = (0..len)
                .map(|_| {
                    let size = rng.random_range(1..=shape.element_size);
                    Itemset::new(items(rng, shape.alphabet, size))
                })
                .collect();
            Instance::sequence(sets).unwrap()
        }
    }
}

/// Batches with ordinal timestamps `1..=batches`.
pub fn stream(shape: &StreamShape, seed: u64) -> Vec<Batch> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (1..=shape.batches)
        .map(|t| {
            let instances = (0..shape.batch_size).map(|_| instance(&mut rng, shape)).collect();
            Batch::new(t as f64, instances)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_sized() {
        for kind in [
            InstanceKind::PlainItemset,
            InstanceKind::WeightedItemset,
            InstanceKind::Sequence,
        ] {
            let shape = StreamShape::new(kind, 3, 7);
            let s = stream(&shape, 1);
            assert_eq!(s, stream(&shape, 1));
            assert_eq!(s.len(), 3);
            assert!(s.iter().all(|b| b.len() == 7 && b.kind().unwrap() == Some(kind)));
        }
    }
}
