//! Drawing patterns from a batch proportionally to their utility.
//!
//! One draw consumes, in order: one uniform for the instance, one for the
//! norm, then the draws of the variant-specific pattern step.

use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};
use crate::measure::MeasureSpec;
use crate::model::{Batch, Instance, Itemset, Pattern};
use crate::weighting::{self, norm_weights, InstanceWeights, NormWeightTable, SequenceCountDP};

/// Below this many candidate subsets an itemset step enumerates them all.
const ENUMERATION_LIMIT: u64 = 1024;
const REJECTION_ATTEMPTS: usize = 1_000_000;

/// Prefix sums over non-negative weights for inverse-CDF index draws.
#[derive(Clone, Debug)]
pub struct CumulativeWeights {
    prefix: Vec<f64>,
}

impl CumulativeWeights {
    pub fn new(weights: impl IntoIterator<Item = f64>) -> Self {
        let mut acc = 0.0;
        let prefix = weights
            .into_iter()
            .map(|w| {
                debug_assert!(w >= 0.0);
                acc += w;
                acc
            })
            .collect();
        Self { prefix }
    }

    pub fn total(&self) -> f64 {
        self.prefix.last().copied().unwrap_or(0.0)
    }

    /// Index `i` with probability `w_i / total`; `None` when the total is zero.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        let total = self.total();
        if !(total > 0.0) {
            return None;
        }
        let u = rng.random::<f64>() * total;
        let i = self.prefix.partition_point(|&c| c <= u);
        if i < self.prefix.len() {
            return Some(i);
        }
        // Rounding put `u` on the total: take the last entry with mass.
        let last = self.prefix.len() - 1;
        let mut i = last;
        while i > 0 && self.prefix[i - 1] == self.prefix[last] {
            i -= 1;
        }
        Some(i)
    }
}

/// Instance index drawn proportionally to `weights`.
pub fn draw_instance<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<usize> {
    CumulativeWeights::new(weights.iter().copied())
        .sample(rng)
        .ok_or_else(|| Error::InvalidArgument("all instance weights are zero".into()))
}

/// Norm drawn proportionally to the table entries.
pub fn draw_norm<R: Rng + ?Sized>(table: &NormWeightTable, rng: &mut R) -> Result<usize> {
    CumulativeWeights::new(table.weights().iter().copied())
        .sample(rng)
        .map(|i| table.first_norm() + i)
        .ok_or_else(|| Error::InvalidArgument("norm weight table has no mass".into()))
}

/// `k` distinct indices of `0..n`, uniformly, by partial Fisher-Yates.
pub(crate) fn sample_indices<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    assert!(k <= n);
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}

fn subset_of(items: &Itemset, picks: &[usize]) -> Itemset {
    Itemset::new(picks.iter().map(|&i| items.items()[i]))
}

/// Draws a pattern of norm `ell` from `z` with probability `m(x, z) / w(ell)`.
///
/// `dp` is reused for sequences when given and rebuilt otherwise.
pub fn draw_pattern_of_norm<R: Rng + ?Sized>(
    z: &Instance,
    ell: usize,
    spec: &MeasureSpec,
    dp: Option<&SequenceCountDP>,
    rng: &mut R,
) -> Result<Pattern> {
    if ell == 0 || ell > z.norm() || spec.norm_utility(ell) == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "norm {ell} carries no weight in this instance"
        )));
    }
    match z {
        Instance::Plain(set) => {
            let picks = sample_indices(set.len(), ell, rng);
            Ok(Pattern::from_elements_unchecked(vec![subset_of(set, &picks)]))
        }
        Instance::Weighted(w) => {
            // Pivot with probability w_i / W, then a uniform (ell-1)-subset of
            // the others: P(x) = sum_{i in x} w_i / (W * C(n-1, ell-1)).
            let pivot = CumulativeWeights::new(w.weights().iter().copied())
                .sample(rng)
                .expect("weights are positive");
            let n = w.len();
            let mut picks: Vec<usize> = sample_indices(n - 1, ell - 1, rng)
                .into_iter()
                .map(|i| if i >= pivot { i + 1 } else { i })
                .collect();
            picks.push(pivot);
            Ok(Pattern::from_elements_unchecked(vec![subset_of(
                w.itemset(),
                &picks,
            )]))
        }
        Instance::Sequence(seq) => match dp {
            Some(dp) if dp.max_norm() >= ell => walk_first_occurrence(dp, ell, rng),
            _ => walk_first_occurrence(&SequenceCountDP::new(seq, ell), ell, rng),
        },
    }
}

/// Uniform draw among the distinct patterns of norm `ell`: each step picks the
/// next itemset and element size proportionally to the number of completions.
fn walk_first_occurrence<R: Rng + ?Sized>(
    dp: &SequenceCountDP,
    ell: usize,
    rng: &mut R,
) -> Result<Pattern> {
    if dp.distinct_count(ell).is_zero() {
        return Err(Error::InvalidArgument(format!("no pattern of norm {ell}")));
    }
    let mut at = 0;
    let mut remaining = ell;
    let mut elements = Vec::new();
    while remaining > 0 {
        let mut moves = Vec::new();
        let mut counts = Vec::new();
        for (ti, t) in dp.transitions(at).iter().enumerate() {
            let qmax = remaining.min(t.admissible.len() - 1);
            for q in 1..=qmax {
                let c = &t.admissible[q] * dp.completions(t.to, remaining - q);
                if !c.is_zero() {
                    moves.push((ti, q));
                    counts.push(c);
                }
            }
        }
        let pick = sample_big(&counts, rng);
        let (ti, q) = moves[pick];
        let t = &dp.transitions(at)[ti];
        let itemset = &dp.itemsets()[t.to - 1];
        elements.push(admissible_subset(itemset, q, &t.gaps, rng));
        at = t.to;
        remaining -= q;
    }
    Ok(Pattern::from_elements_unchecked(elements))
}

/// Index drawn proportionally to exact counts, via 53-bit ratios.
fn sample_big<R: Rng + ?Sized>(counts: &[BigUint], rng: &mut R) -> usize {
    let total: BigUint = counts.iter().sum();
    let shift = total.bits().saturating_sub(960);
    CumulativeWeights::new(counts.iter().map(|c| weighting::big_to_f64(&(c >> shift))))
        .sample(rng)
        .expect("positive completion count")
}

/// Uniform `q`-subset of `items` not contained in any of `gaps`.
fn admissible_subset<R: Rng + ?Sized>(
    items: &Itemset,
    q: usize,
    gaps: &[Itemset],
    rng: &mut R,
) -> Itemset {
    let ok = |s: &Itemset| !gaps.iter().any(|g| s.is_subset_of(g));
    let n = items.len();
    let candidates = weighting::binomial(n, q);
    let small = candidates <= BigUint::from(ENUMERATION_LIMIT);
    if !small {
        for _ in 0..REJECTION_ATTEMPTS {
            let s = subset_of(items, &sample_indices(n, q, rng));
            if ok(&s) {
                return s;
            }
        }
    }
    let admissible: Vec<Itemset> = combinations(n, q)
        .map(|picks| subset_of(items, &picks))
        .filter(ok)
        .collect();
    admissible[rng.random_range(0..admissible.len())].clone()
}

/// Index combinations of `0..n` of size `k` in lexicographic order.
fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut current: Option<Vec<usize>> = (k <= n).then(|| (0..k).collect());
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let mut next = out.clone();
        let mut i = k;
        let advanced = loop {
            if i == 0 {
                break false;
            }
            i -= 1;
            if next[i] < n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                break true;
            }
        };
        current = advanced.then_some(next);
        Some(out)
    })
}

/// Weight tables of a batch, computed once and reused across draws.
#[derive(Debug)]
pub struct BatchSampler<'a> {
    batch: &'a Batch,
    spec: MeasureSpec,
    weights: Vec<InstanceWeights>,
    instances: CumulativeWeights,
}

impl<'a> BatchSampler<'a> {
    pub fn new(batch: &'a Batch, spec: &MeasureSpec) -> Result<Self> {
        if let Some(kind) = batch.kind()? {
            spec.check_kind(kind)?;
        }
        let weights = batch
            .instances
            .iter()
            .map(|z| norm_weights(z, spec))
            .collect::<Result<Vec<_>>>()?;
        let instances = CumulativeWeights::new(weights.iter().map(InstanceWeights::total));
        Ok(Self {
            batch,
            spec: *spec,
            weights,
            instances,
        })
    }

    /// Batch weight `w(B)`.
    pub fn total(&self) -> f64 {
        self.instances.total()
    }

    pub fn instance_weights(&self) -> &[InstanceWeights] {
        &self.weights
    }

    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Pattern> {
        let i = self
            .instances
            .sample(rng)
            .ok_or_else(|| Error::InvalidArgument("batch has zero weight".into()))?;
        let w = &self.weights[i];
        let ell = draw_norm(&w.table, rng)?;
        draw_pattern_of_norm(&self.batch.instances[i], ell, &self.spec, w.dp.as_ref(), rng)
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<Pattern>> {
        if n > 0 && !(self.total() > 0.0) {
            return Err(Error::InvalidArgument("batch has zero weight".into()));
        }
        (0..n).map(|_| self.sample_one(rng)).collect()
    }
}

/// `n` independent draws with replacement from `batch`.
pub fn sample_from_batch<R: Rng + ?Sized>(
    batch: &Batch,
    spec: &MeasureSpec,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Pattern>> {
    BatchSampler::new(batch, spec)?.sample(n, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::BaseMeasure;
    use crate::model::fixtures::{pat, seq, set};
    use crate::model::{matches, ItemId, WeightedItemset};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    fn within_3_sigma(hits: usize, n: usize, p: f64) -> bool {
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        (hits as f64 - n as f64 * p).abs() <= 3.0 * sigma.max(1e-9)
    }

    #[test]
    fn instance_draw_frequencies() {
        let mut r = rng();
        let n = 1_000_000;
        let hits = (0..n).filter(|_| draw_instance(&[7.0, 3.0], &mut r).unwrap() == 0).count();
        assert!(within_3_sigma(hits, n, 0.7), "{hits}");
        assert!((0..100).all(|_| draw_instance(&[5.0], &mut r).unwrap() == 0));
        let mut counts = [0usize; 4];
        for _ in 0..100_000 {
            counts[draw_instance(&[1.0; 4], &mut r).unwrap()] += 1;
        }
        assert!(counts.iter().all(|&c| within_3_sigma(c, 100_000, 0.25)));
        assert!(draw_instance(&[0.0, 0.0], &mut r).is_err());
    }

    #[test]
    fn zero_weights_are_never_drawn() {
        let mut r = rng();
        let w = CumulativeWeights::new([0.0, 2.0, 0.0, 0.0, 1.0, 0.0]);
        for _ in 0..10_000 {
            let i = w.sample(&mut r).unwrap();
            assert!(i == 1 || i == 4);
        }
    }

    #[test]
    fn norm_draw_frequencies() {
        let mut r = rng();
        let freq = weighting::norm_weights_plain(&set("ABC"), &MeasureSpec::unconstrained(BaseMeasure::Freq)).unwrap();
        let n = 200_000;
        let hits = (0..n).filter(|_| draw_norm(&freq, &mut r).unwrap() == 2).count();
        assert!(within_3_sigma(hits, n, 3.0 / 7.0));
        let area = weighting::norm_weights_plain(&set("ABC"), &MeasureSpec::unconstrained(BaseMeasure::Area)).unwrap();
        let hits = (0..n).filter(|_| draw_norm(&area, &mut r).unwrap() == 2).count();
        assert!(within_3_sigma(hits, n, 0.5));
        let single = weighting::norm_weights_plain(&set("A"), &MeasureSpec::unconstrained(BaseMeasure::Freq)).unwrap();
        assert_eq!(draw_norm(&single, &mut r).unwrap(), 1);
    }

    #[test]
    fn weighted_pivot_scheme() {
        let mut r = rng();
        let z = Instance::Weighted(
            WeightedItemset::new([(ItemId(0), 2.0), (ItemId(1), 1.5), (ItemId(2), 2.0)]).unwrap(),
        );
        let util = MeasureSpec::unconstrained(BaseMeasure::Util);
        let n = 300_000;
        let ac = pat(&["AC"]);
        let hits = (0..n)
            .filter(|_| draw_pattern_of_norm(&z, 2, &util, None, &mut r).unwrap() == ac)
            .count();
        assert!(within_3_sigma(hits, n, 4.0 / 11.0), "{hits}");
    }

    #[test]
    fn full_norm_returns_the_instance() {
        let mut r = rng();
        let freq = MeasureSpec::unconstrained(BaseMeasure::Freq);
        let z = Instance::Plain(set("ABC"));
        for _ in 0..20 {
            assert_eq!(draw_pattern_of_norm(&z, 3, &freq, None, &mut r).unwrap(), pat(&["ABC"]));
        }
        assert!(draw_pattern_of_norm(&z, 4, &freq, None, &mut r).is_err());
    }

    #[test]
    fn sequence_draws_are_uniform_over_distinct_patterns() {
        let mut r = rng();
        let freq = MeasureSpec::unconstrained(BaseMeasure::Freq);
        let z3 = seq(&["B", "AC", "A"]);
        let n = 200_000;
        let mut counts: HashMap<Pattern, usize> = HashMap::new();
        for _ in 0..n {
            let x = draw_pattern_of_norm(&z3, 2, &freq, None, &mut r).unwrap();
            assert_eq!(x.norm(), 2);
            assert!(matches(&x, &z3));
            *counts.entry(x).or_default() += 1;
        }
        let expected = [
            pat(&["AC"]),
            pat(&["B", "A"]),
            pat(&["B", "C"]),
            pat(&["A", "A"]),
            pat(&["C", "A"]),
        ];
        assert_eq!(counts.len(), 5);
        for p in expected {
            assert!(within_3_sigma(counts[&p], n, 0.2), "{p:?} {}", counts[&p]);
        }
    }

    #[test]
    fn large_itemsets_use_rejection() {
        let mut r = rng();
        // 20 choose 10 candidates; the gap {0..9} forbids exactly one subset.
        let items = Itemset::new((0..20).map(ItemId));
        let gap = Itemset::new((0..10).map(ItemId));
        for _ in 0..200 {
            let s = admissible_subset(&items, 10, std::slice::from_ref(&gap), &mut r);
            assert_eq!(s.len(), 10);
            assert_ne!(s, gap);
        }
    }

    #[test]
    fn combinations_enumerate_all() {
        let all: Vec<_> = combinations(4, 2).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 1]);
        assert_eq!(all[5], vec![2, 3]);
        assert_eq!(combinations(3, 0).count(), 1);
        assert_eq!(combinations(2, 3).count(), 0);
    }

    #[test]
    fn batch_sampling_contracts() {
        let mut r = rng();
        let freq = MeasureSpec::unconstrained(BaseMeasure::Freq);
        let b = Batch::new(1.0, vec![Instance::Plain(set("A"))]);
        assert!(sample_from_batch(&b, &freq, 0, &mut r).unwrap().is_empty());
        assert_eq!(sample_from_batch(&b, &freq, 3, &mut r).unwrap(), vec![pat(&["A"]); 3]);
        let high = MeasureSpec::new(BaseMeasure::Freq, 3, crate::measure::MaxNorm::Unbounded).unwrap();
        assert!(sample_from_batch(&b, &high, 1, &mut r).is_err());
        let util = MeasureSpec::unconstrained(BaseMeasure::Util);
        assert!(matches!(BatchSampler::new(&b, &util), Err(Error::Config(_))));
    }
}
