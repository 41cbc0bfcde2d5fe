//! Brute-force ground truth for tests and acceptance checks.
//!
//! Everything here enumerates explicitly and shares no code path with
//! [`crate::weighting`] or [`crate::draw`]. Only desk-scale inputs are accepted.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::measure::{damping, MaxNorm, MeasureSpec};
use crate::model::{Batch, Instance, Itemset, Pattern};

/// Largest instance norm the enumeration accepts.
pub const MAX_ENUMERATION_NORM: usize = 14;

/// Exact pattern law: pattern to probability.
pub type PatternLaw = BTreeMap<Pattern, f64>;

/// Every distinct pattern `x` generalizing `z` with `norm(x) <= max_norm`,
/// mapped to its transaction utility `u(x, z)` (1, or the summed item weights).
pub fn enumerate_patterns(z: &Instance, max_norm: MaxNorm) -> Result<BTreeMap<Pattern, f64>> {
    let norm = z.norm();
    if norm > MAX_ENUMERATION_NORM {
        return Err(Error::EnumerationGuard {
            norm,
            limit: MAX_ENUMERATION_NORM,
        });
    }
    // Flatten item occurrences as (itemset position, item, weight).
    let mut slots = Vec::with_capacity(norm);
    for (pos, set) in z.itemsets().iter().enumerate() {
        for &item in set.items() {
            let weight = match z {
                Instance::Weighted(w) => w.weight_of(item).expect("item of the transaction"),
                _ => 1.0,
            };
            slots.push((pos, item, weight));
        }
    }
    let mut out = BTreeMap::new();
    for mask in 1u32..(1u32 << norm) {
        if !max_norm.admits(mask.count_ones() as usize) {
            continue;
        }
        let mut elements: Vec<Vec<_>> = vec![Vec::new(); z.itemsets().len()];
        let mut utility = 0.0;
        for (bit, &(pos, item, weight)) in slots.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                elements[pos].push(item);
                utility += weight;
            }
        }
        let elements: Vec<Itemset> = elements
            .into_iter()
            .filter(|e| !e.is_empty())
            .map(Itemset::new)
            .collect();
        let pattern = Pattern::new(elements)?;
        let u = match z {
            Instance::Weighted(_) => utility,
            _ => 1.0,
        };
        out.insert(pattern, u);
    }
    Ok(out)
}

/// Containment by trying every strictly increasing index sequence.
pub fn contains_exhaustive(x: &Pattern, z: &Instance) -> bool {
    fn embeds(p: &[Itemset], z: &[Itemset]) -> bool {
        match p.split_first() {
            None => true,
            Some((head, tail)) => (0..z.len()).any(|i| {
                head.items().iter().all(|it| z[i].items().contains(it)) && embeds(tail, &z[i + 1..])
            }),
        }
    }
    match z {
        Instance::Sequence(seq) => embeds(x.elements(), seq),
        _ => x.elements().len() == 1 && embeds(x.elements(), z.itemsets()),
    }
}

/// `m(x, z) = u(x, z) * f(norm(x))`, zero when `x` does not generalize `z`.
pub fn pattern_utility(x: &Pattern, z: &Instance, spec: &MeasureSpec) -> f64 {
    if !contains_exhaustive(x, z) {
        return 0.0;
    }
    let u = match z {
        Instance::Weighted(w) => x.elements()[0]
            .items()
            .iter()
            .map(|&i| w.weight_of(i).expect("contained item"))
            .sum(),
        _ => 1.0,
    };
    u * spec.norm_utility(x.norm())
}

/// Damped global utility of `x` over `stream` at time `t_now`.
pub fn global_utility(
    stream: &[Batch],
    x: &Pattern,
    spec: &MeasureSpec,
    gamma: f64,
    t_now: f64,
) -> Result<f64> {
    let mut total = 0.0;
    for batch in stream {
        let local: f64 = batch
            .instances
            .iter()
            .map(|z| pattern_utility(x, z, spec))
            .sum();
        total += local * damping(gamma, t_now, batch.timestamp)?;
    }
    Ok(total)
}

/// Damped global utility of every pattern with positive utility.
pub fn global_utilities(
    stream: &[Batch],
    spec: &MeasureSpec,
    gamma: f64,
    t_now: f64,
) -> Result<PatternLaw> {
    let mut mass = PatternLaw::new();
    for batch in stream {
        let bias = damping(gamma, t_now, batch.timestamp)?;
        for z in &batch.instances {
            for (x, u) in enumerate_patterns(z, spec.max_norm())? {
                let m = u * spec.norm_utility(x.norm());
                if m > 0.0 {
                    *mass.entry(x).or_insert(0.0) += m * bias;
                }
            }
        }
    }
    Ok(mass)
}

/// Probability of each pattern proportional to its damped global utility.
pub fn exact_stream_law(
    stream: &[Batch],
    spec: &MeasureSpec,
    gamma: f64,
    t_now: f64,
) -> Result<PatternLaw> {
    let mut law = global_utilities(stream, spec, gamma, t_now)?;
    let total: f64 = law.values().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroMass);
    }
    law.values_mut().for_each(|v| *v /= total);
    Ok(law)
}

/// `m(x, B) / w(B)` for one batch.
pub fn exact_batch_law(batch: &Batch, spec: &MeasureSpec) -> Result<PatternLaw> {
    exact_stream_law(std::slice::from_ref(batch), spec, 0.0, batch.timestamp)
}

/// Brute-force `w(B)`.
pub fn batch_mass(batch: &Batch, spec: &MeasureSpec) -> Result<f64> {
    Ok(global_utilities(std::slice::from_ref(batch), spec, 0.0, batch.timestamp)?
        .values()
        .sum())
}

/// Brute-force per-norm table `sum_{x <= z, norm(x) = ell} m(x, z)`.
pub fn norm_table(z: &Instance, spec: &MeasureSpec) -> Result<BTreeMap<usize, f64>> {
    let mut table = BTreeMap::new();
    for (x, u) in enumerate_patterns(z, spec.max_norm())? {
        let m = u * spec.norm_utility(x.norm());
        if spec.admits(x.norm()) {
            *table.entry(x.norm()).or_insert(0.0) += m;
        }
    }
    Ok(table)
}

/// Total-variation distance between observed counts and an exact law.
pub fn total_variation(law: &PatternLaw, counts: &HashMap<Pattern, u64>) -> f64 {
    let n: u64 = counts.values().sum();
    if n == 0 {
        return 1.0;
    }
    let n = n as f64;
    let mut tv = 0.0;
    for (x, &p) in law {
        let q = counts.get(x).copied().unwrap_or(0) as f64 / n;
        tv += (p - q).abs();
    }
    for (x, &c) in counts {
        if !law.contains_key(x) {
            tv += c as f64 / n;
        }
    }
    tv / 2.0
}

/// Expected total-variation distance of `n` i.i.d. draws from `law`, by the
/// normal approximation of each cell's absolute deviation.
pub fn expected_sampling_tv(law: &PatternLaw, n: u64) -> f64 {
    let scale = (2.0 / std::f64::consts::PI).sqrt() / 2.0;
    law.values()
        .map(|&p| scale * (p * (1.0 - p) / n as f64).sqrt())
        .sum()
}


/// The two toy streams used throughout the tests: three sequences in two
/// batches, and three weighted transactions in two batches. Items `A..E`
/// are interned first, in that order; timestamps are the batch ordinals.
pub mod toy {
    use crate::model::{Batch, Catalog, Instance, Itemset, WeightedItemset};

    pub fn catalog() -> Catalog {
        let mut c = Catalog::new();
        for t in ["A", "B", "C", "D", "E"] {
            c.intern(t);
        }
        c
    }

    fn set(c: &mut Catalog, letters: &str) -> Itemset {
        Itemset::new(letters.chars().map(|ch| c.intern(&ch.to_string())))
    }

    fn seq(c: &mut Catalog, parts: &[&str]) -> Instance {
        Instance::sequence(parts.iter().map(|p| set(c, p)).collect()).expect("non-empty")
    }

    fn weighted(c: &mut Catalog, letters: &str, weights: &[f64]) -> Instance {
        let pairs = letters
            .chars()
            .zip(weights)
            .map(|(ch, &w)| (c.intern(&ch.to_string()), w));
        Instance::Weighted(WeightedItemset::new(pairs).expect("positive weights"))
    }

    /// `B1 = [<{A}{B}{A,C}{B}>, <{A,B,C}{C}{A,C}>]` at 1, `B2 = [<{B}{A,C}{A}>]` at 2.
    pub fn sequences() -> (Catalog, Vec<Batch>) {
        let mut c = catalog();
        let z1 = seq(&mut c, &["A", "B", "AC", "B"]);
        let z2 = seq(&mut c, &["ABC", "C", "AC"]);
        let z3 = seq(&mut c, &["B", "AC", "A"]);
        (c, vec![Batch::new(1.0, vec![z1, z2]), Batch::new(2.0, vec![z3])])
    }

    /// `B1 = [{A:2, B:1.5, C:2}]` at 1, `B2 = [{A:3, C:3}, {B:2, C:1, D:2, E:1}]` at 2.
    pub fn weighted_itemsets() -> (Catalog, Vec<Batch>) {
        let mut c = catalog();
        let z1 = weighted(&mut c, "ABC", &[2.0, 1.5, 2.0]);
        let z2 = weighted(&mut c, "AC", &[3.0, 3.0]);
        let z3 = weighted(&mut c, "BCDE", &[2.0, 1.0, 2.0, 1.0]);
        (c, vec![Batch::new(1.0, vec![z1]), Batch::new(2.0, vec![z2, z3])])
    }

    /// [`weighted_itemsets`] with the weights dropped.
    pub fn plain_itemsets() -> (Catalog, Vec<Batch>) {
        let (c, batches) = weighted_itemsets();
        let batches = batches
            .into_iter()
            .map(|b| {
                let instances = b
                    .instances
                    .iter()
                    .map(|z| Instance::Plain(z.itemsets()[0].clone()))
                    .collect();
                Batch::new(b.timestamp, instances)
            })
            .collect();
        (c, batches)
    }
}
