//! Random instance generators and run helpers shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rps_core::{
    Batch, Catalog, DampingSpec, Instance, InstanceKind, ItemId, Itemset, MaxNorm, MeasureSpec,
    Pattern, RealisationMode, Sampler, SamplerConfig, WeightedItemset,
};
use std::collections::HashMap;

pub const KINDS: [InstanceKind; 3] = [
    InstanceKind::PlainItemset,
    InstanceKind::WeightedItemset,
    InstanceKind::Sequence,
];

/// Catalog with items `i0..i{n-1}` interned as ids `0..n-1`.
pub fn catalog(n: u32) -> Catalog {
    let mut c = Catalog::new();
    for i in 0..n {
        c.intern(&i.to_string());
    }
    c
}

fn distinct_items<R: Rng>(rng: &mut R, alphabet: u32, len: usize) -> Vec<ItemId> {
    let len = len.min(alphabet as usize);
    let mut pool: Vec<u32> = (0..alphabet).collect();
    for i in 0..len {
        let j = rng.random_range(i..pool.len());
        pool.swap(i, j);
    }
    pool[..len].iter().map(|&i| ItemId(i)).collect()
}

/// Sequence of norm in `1..=max_norm` with itemsets of size `1..=max_set`.
pub fn sequence<R: Rng>(rng: &mut R, alphabet: u32, max_norm: usize, max_set: usize) -> Instance {
    let target = rng.random_range(1..=max_norm);
    let mut sets = Vec::new();
    let mut norm = 0;
    while norm < target {
        let size = rng.random_range(1..=max_set.min(target - norm));
        let set = Itemset::new(distinct_items(rng, alphabet, size));
        norm += set.len();
        sets.push(set);
    }
    Instance::sequence(sets).unwrap()
}

pub fn plain<R: Rng>(rng: &mut R, alphabet: u32, max_len: usize) -> Instance {
    let len = rng.random_range(1..=max_len);
    Instance::plain(distinct_items(rng, alphabet, len)).unwrap()
}

pub fn weighted<R: Rng>(rng: &mut R, alphabet: u32, max_len: usize) -> Instance {
    let len = rng.random_range(1..=max_len);
    let pairs = distinct_items(rng, alphabet, len)
        .into_iter()
        .map(|i| (i, rng.random_range(0.1..5.0)));
    Instance::Weighted(WeightedItemset::new(pairs).unwrap())
}

/// One random instance of `kind` with norm at most `max_norm`.
pub fn instance<R: Rng>(rng: &mut R, kind: InstanceKind, alphabet: u32, max_norm: usize) -> Instance {
    match kind {
        InstanceKind::PlainItemset => plain(rng, alphabet, max_norm),
        InstanceKind::WeightedItemset => weighted(rng, alphabet, max_norm),
        InstanceKind::Sequence => sequence(rng, alphabet, max_norm, 3),
    }
}

pub fn batch<R: Rng>(
    rng: &mut R,
    kind: InstanceKind,
    t: f64,
    instances: usize,
    alphabet: u32,
    max_norm: usize,
) -> Batch {
    Batch::new(
        t,
        (0..instances)
            .map(|_| instance(rng, kind, alphabet, max_norm))
            .collect(),
    )
}

pub fn unbounded() -> MaxNorm {
    MaxNorm::Unbounded
}

/// Runs `runs` samplers with seeds `seed0..seed0+runs` over `stream` and
/// pools the final reservoir contents.
pub fn pooled_reservoirs(
    stream: &[Batch],
    spec: MeasureSpec,
    gamma: f64,
    k: usize,
    mode: RealisationMode,
    seed0: u64,
    runs: u64,
) -> HashMap<Pattern, u64> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()) as u64;
    let chunk = runs.div_ceil(threads);
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                s.spawn(move || {
                    let mut counts: HashMap<Pattern, u64> = HashMap::new();
                    let lo = t * chunk;
                    let hi = ((t + 1) * chunk).min(runs);
                    for run in lo..hi {
                        let cfg = SamplerConfig::new(spec, k, seed0 + run)
                            .with_damping(DampingSpec::new(gamma).unwrap())
                            .with_mode(mode);
                        let mut sampler = Sampler::new(cfg).unwrap();
                        for b in stream {
                            sampler.process_batch(b).unwrap();
                        }
                        for e in sampler.snapshot() {
                            *counts.entry(e.pattern).or_default() += 1;
                        }
                    }
                    counts
                })
            })
            .collect();
        let mut total: HashMap<Pattern, u64> = HashMap::new();
        for h in handles {
            for (x, c) in h.join().unwrap() {
                *total.entry(x).or_default() += c;
            }
        }
        total
    })
}

/// Counts of `n` draws.
pub fn tally(draws: impl IntoIterator<Item = Pattern>) -> HashMap<Pattern, u64> {
    let mut counts = HashMap::new();
    for x in draws {
        *counts.entry(x).or_default() += 1;
    }
    counts
}

/// `|a - b| <= tol * max(|a|, |b|)`, or exact equality.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}
