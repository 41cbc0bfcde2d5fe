//! Per-norm weight tables `w(ell)` of single instances and the instance and
//! batch weights built from them.
//!
//! Itemsets use closed forms over binomial coefficients. Sequences count
//! distinct sub-patterns through their unique first occurrence: an embedding
//! `(i_1, e_1) .. (i_n, e_n)` is the first one of its pattern iff no position
//! strictly between `i_{j-1}` and `i_j` (or before `i_1`) already contains
//! `e_j`. [`SequenceCountDP`] counts those embeddings by norm and keeps the
//! transition counts needed to sample one uniformly.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::measure::{BaseMeasure, MeasureSpec};
use crate::model::{Batch, Instance, Itemset, WeightedItemset};

/// Utility mass per pattern norm for one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct NormWeightTable {
    first_norm: usize,
    weights: Vec<f64>,
    total: f64,
}

impl NormWeightTable {
    fn from_weights(first_norm: usize, weights: Vec<f64>) -> Self {
        let total = weights.iter().sum();
        Self {
            first_norm,
            weights,
            total,
        }
    }

    fn empty() -> Self {
        Self {
            first_norm: 1,
            weights: Vec::new(),
            total: 0.0,
        }
    }

    /// Weight of norm `ell`; zero outside the table.
    pub fn get(&self, ell: usize) -> f64 {
        ell.checked_sub(self.first_norm)
            .and_then(|i| self.weights.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// `(norm, weight)` pairs in increasing norm order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .map(move |(i, &w)| (self.first_norm + i, w))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub(crate) fn first_norm(&self) -> usize {
        self.first_norm
    }

    pub(crate) fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// `C(n, k)` exactly.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `C(n, 0..=kmax)` by the multiplicative recurrence.
fn binomial_row(n: usize, kmax: usize) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(kmax + 1);
    let mut acc = BigUint::one();
    row.push(acc.clone());
    for k in 1..=kmax {
        if k > n {
            acc = BigUint::zero();
        } else {
            acc = acc * (n - k + 1) / k;
        }
        row.push(acc.clone());
    }
    row
}

pub(crate) fn big_to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// Table of an itemset without weights: `C(n, ell) * f(ell)`.
pub fn norm_weights_plain(z: &Itemset, spec: &MeasureSpec) -> Result<NormWeightTable> {
    if spec.base().is_utility_based() {
        return Err(Error::Config(format!(
            "measure {} needs weighted itemsets",
            spec.base()
        )));
    }
    let range = spec.norm_range(z.len());
    if range.is_empty() {
        return Ok(NormWeightTable::empty());
    }
    let row = binomial_row(z.len(), *range.end());
    let weights = range
        .clone()
        .map(|ell| big_to_f64(&row[ell]) * spec.norm_utility(ell))
        .collect();
    Ok(NormWeightTable::from_weights(*range.start(), weights))
}

/// Table of a weighted transaction: every item lies in `C(n-1, ell-1)` of the
/// `ell`-subsets, so the summed utility is `W * C(n-1, ell-1) * f(ell)`.
pub fn norm_weights_weighted(z: &WeightedItemset, spec: &MeasureSpec) -> Result<NormWeightTable> {
    if !spec.base().is_utility_based() {
        return Err(Error::Config(format!(
            "measure {} does not apply to weighted itemsets",
            spec.base()
        )));
    }
    let n = z.len();
    let range = spec.norm_range(n);
    if range.is_empty() {
        return Ok(NormWeightTable::empty());
    }
    let total = z.total_weight();
    let row = binomial_row(n - 1, *range.end() - 1);
    let weights = range
        .clone()
        .map(|ell| {
            let c = big_to_f64(&row[ell - 1]);
            match spec.base() {
                BaseMeasure::AvgUtil => total * c / ell as f64,
                _ => total * c * spec.norm_utility(ell),
            }
        })
        .collect();
    Ok(NormWeightTable::from_weights(*range.start(), weights))
}

/// A move of the first-occurrence walk: from position `from` (0 is the
/// sentinel before the sequence) the next pattern element is taken from
/// itemset `to`.
#[derive(Clone, Debug)]
pub(crate) struct Transition {
    pub to: usize,
    /// `admissible[q]`: q-subsets of itemset `to` not contained in any gap set.
    pub admissible: Vec<BigUint>,
    /// Maximal intersections of itemset `to` with the itemsets strictly between.
    pub gaps: Vec<Itemset>,
}

/// Distinct sub-pattern counts of a sequence by norm, plus the memo the
/// uniform sampler walks.
#[derive(Clone, Debug)]
pub struct SequenceCountDP {
    itemsets: Vec<Itemset>,
    max_norm: usize,
    transitions: Vec<Vec<Transition>>,
    /// `completions[i][r]`: distinct continuations of norm `r` after position `i`.
    completions: Vec<Vec<BigUint>>,
}

impl SequenceCountDP {
    /// Counts for every norm up to `max_norm` (capped at the sequence norm).
    pub fn new(itemsets: &[Itemset], max_norm: usize) -> Self {
        let n = itemsets.len();
        let max_norm = max_norm.min(itemsets.iter().map(Itemset::len).sum());
        let mut transitions: Vec<Vec<Transition>> = vec![Vec::new(); n + 1];

        // Positions are 1-based; position 0 is the sentinel start.
        for to in 1..=n {
            let target = &itemsets[to - 1];
            let size = target.len();
            let choose = binomial_row(size, size);
            let mut family = GapFamily::default();
            for from in (0..to).rev() {
                let admissible = family.admissible_counts(&choose);
                if admissible.iter().any(|c| !c.is_zero()) {
                    transitions[from].push(Transition {
                        to,
                        admissible,
                        gaps: family.maximal.clone(),
                    });
                }
                if from == 0 {
                    break;
                }
                let gap = target.intersection(&itemsets[from - 1]);
                if gap.len() == size {
                    // Every element drawn from `to` already occurs at `from`.
                    break;
                }
                family.add(gap);
            }
        }
        for list in &mut transitions {
            list.sort_by_key(|t| t.to);
        }

        let mut completions = vec![vec![BigUint::zero(); max_norm + 1]; n + 1];
        for from in (0..=n).rev() {
            completions[from][0] = BigUint::one();
            for r in 1..=max_norm {
                let mut acc = BigUint::zero();
                for t in &transitions[from] {
                    let qmax = r.min(t.admissible.len() - 1);
                    for q in 1..=qmax {
                        if !t.admissible[q].is_zero() {
                            acc += &t.admissible[q] * &completions[t.to][r - q];
                        }
                    }
                }
                completions[from][r] = acc;
            }
        }

        Self {
            itemsets: itemsets.to_vec(),
            max_norm,
            transitions,
            completions,
        }
    }

    /// Number of distinct patterns of norm `ell` generalizing the sequence.
    pub fn distinct_count(&self, ell: usize) -> BigUint {
        if ell == 0 || ell > self.max_norm {
            BigUint::zero()
        } else {
            self.completions[0][ell].clone()
        }
    }

    pub fn max_norm(&self) -> usize {
        self.max_norm
    }

    pub(crate) fn itemsets(&self) -> &[Itemset] {
        &self.itemsets
    }

    pub(crate) fn transitions(&self, from: usize) -> &[Transition] {
        &self.transitions[from]
    }

    pub(crate) fn completions(&self, at: usize, remaining: usize) -> &BigUint {
        &self.completions[at][remaining]
    }
}

/// Union of down-sets of gap intersections, kept as inclusion-exclusion terms
/// `(intersection, signed multiplicity)`.
#[derive(Default)]
struct GapFamily {
    maximal: Vec<Itemset>,
    terms: HashMap<Itemset, i64>,
}

impl GapFamily {
    fn add(&mut self, gap: Itemset) {
        if gap.is_empty() || self.maximal.iter().any(|m| gap.is_subset_of(m)) {
            return;
        }
        self.maximal.retain(|m| !m.is_subset_of(&gap));
        // |U ∪ D(g)| = |U| + |D(g)| - |U ∩ D(g)|, and D(S) ∩ D(g) = D(S ∩ g).
        let mut next: HashMap<Itemset, i64> = self.terms.clone();
        for (set, coeff) in &self.terms {
            let inter = set.intersection(&gap);
            if !inter.is_empty() {
                *next.entry(inter).or_insert(0) -= coeff;
            }
        }
        *next.entry(gap.clone()).or_insert(0) += 1;
        next.retain(|_, c| *c != 0);
        self.terms = next;
        self.maximal.push(gap);
    }

    /// `C(s, q) - |{f : |f| = q, f inside some gap}|` for `q = 0..=s`.
    fn admissible_counts(&self, choose: &[BigUint]) -> Vec<BigUint> {
        let size = choose.len() - 1;
        let mut out = Vec::with_capacity(size + 1);
        out.push(BigUint::zero());
        for q in 1..=size {
            let mut count = BigInt::from(choose[q].clone());
            for (set, &coeff) in &self.terms {
                if set.len() >= q {
                    count -= BigInt::from(coeff) * BigInt::from(binomial(set.len(), q));
                }
            }
            debug_assert!(!count.is_negative());
            out.push(count.to_biguint().unwrap_or_default());
        }
        out
    }
}

/// Table of a sequence: distinct-pattern count per norm times `f(ell)`.
pub fn norm_weights_sequence(
    z: &[Itemset],
    spec: &MeasureSpec,
) -> Result<(NormWeightTable, SequenceCountDP)> {
    if spec.base().is_utility_based() {
        return Err(Error::Config(format!(
            "measure {} does not apply to sequences",
            spec.base()
        )));
    }
    let norm: usize = z.iter().map(Itemset::len).sum();
    let range = spec.norm_range(norm);
    let dp = SequenceCountDP::new(z, *range.end());
    if range.is_empty() {
        return Ok((NormWeightTable::empty(), dp));
    }
    let weights = range
        .clone()
        .map(|ell| big_to_f64(&dp.distinct_count(ell)) * spec.norm_utility(ell))
        .collect();
    Ok((NormWeightTable::from_weights(*range.start(), weights), dp))
}

/// Weight table of one instance, with the sequence memo when relevant.
#[derive(Clone, Debug)]
pub struct InstanceWeights {
    pub table: NormWeightTable,
    pub dp: Option<SequenceCountDP>,
}

impl InstanceWeights {
    pub fn total(&self) -> f64 {
        self.table.total()
    }
}

pub fn norm_weights(z: &Instance, spec: &MeasureSpec) -> Result<InstanceWeights> {
    match z {
        Instance::Plain(set) => Ok(InstanceWeights {
            table: norm_weights_plain(set, spec)?,
            dp: None,
        }),
        Instance::Weighted(w) => Ok(InstanceWeights {
            table: norm_weights_weighted(w, spec)?,
            dp: None,
        }),
        Instance::Sequence(seq) => {
            let (table, dp) = norm_weights_sequence(seq, spec)?;
            Ok(InstanceWeights {
                table,
                dp: Some(dp),
            })
        }
    }
}

/// Total utility of all patterns generalizing `z`.
pub fn instance_weight(z: &Instance, spec: &MeasureSpec) -> Result<f64> {
    Ok(norm_weights(z, spec)?.total())
}

pub fn batch_weight(batch: &Batch, spec: &MeasureSpec) -> Result<f64> {
    batch
        .instances
        .iter()
        .map(|z| instance_weight(z, spec))
        .sum()
}
