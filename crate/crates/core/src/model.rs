//! Items, instances, batches, patterns and the reservoir.
//!
//! Every itemset is kept in canonical form (strictly ascending [`ItemId`]s) so
//! pattern equality, ordering and hashing are exact value comparisons.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Dense index of an interned item token.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ItemId(pub u32);

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Bijective map between external item tokens and [`ItemId`]s.
///
/// Ids are handed out in first-seen order and never reused.
#[derive(Clone, Debug, Default)]
pub struct Catalog {
    tokens: Vec<String>,
    index: HashMap<String, ItemId>,
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, token: &str) -> ItemId {
        if let Some(&id) = self.index.get(token) {
            return id;
        }
        let id = ItemId(self.tokens.len() as u32);
        self.tokens.push(token.to_owned());
        self.index.insert(token.to_owned(), id);
        id
    }

    pub fn get(&self, token: &str) -> Option<ItemId> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: ItemId) -> Option<&str> {
        self.tokens.get(id.0 as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// A set of items stored sorted and without duplicates.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Itemset(Vec<ItemId>);

impl Itemset {
    /// Builds the canonical form of `items`; order and repeats are irrelevant.
    pub fn new(items: impl IntoIterator<Item = ItemId>) -> Self {
        let mut items: Vec<ItemId> = items.into_iter().collect();
        items.sort_unstable();
        items.dedup();
        Itemset(items)
    }

    pub fn items(&self) -> &[ItemId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, item: ItemId) -> bool {
        self.0.binary_search(&item).is_ok()
    }

    /// Linear merge subset test.
    pub fn is_subset_of(&self, other: &Itemset) -> bool {
        if self.0.len() > other.0.len() {
            return false;
        }
        let mut rest = other.0.iter();
        'outer: for item in &self.0 {
            for candidate in rest.by_ref() {
                match candidate.cmp(item) {
                    std::cmp::Ordering::Less => continue,
                    std::cmp::Ordering::Equal => continue 'outer,
                    std::cmp::Ordering::Greater => return false,
                }
            }
            return false;
        }
        true
    }

    pub fn intersection(&self, other: &Itemset) -> Itemset {
        let (mut a, mut b) = (0, 0);
        let mut out = Vec::new();
        while a < self.0.len() && b < other.0.len() {
            match self.0[a].cmp(&other.0[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    out.push(self.0[a]);
                    a += 1;
                    b += 1;
                }
            }
        }
        Itemset(out)
    }
}

impl FromIterator<ItemId> for Itemset {
    fn from_iter<T: IntoIterator<Item = ItemId>>(iter: T) -> Self {
        Itemset::new(iter)
    }
}

/// A transaction whose items carry strictly positive, transaction-local weights.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedItemset {
    items: Itemset,
    weights: Vec<f64>,
}

impl WeightedItemset {
    /// Rejects empty input, repeated items and non-positive or non-finite weights.
    pub fn new(pairs: impl IntoIterator<Item = (ItemId, f64)>) -> Result<Self> {
        let mut pairs: Vec<(ItemId, f64)> = pairs.into_iter().collect();
        if pairs.is_empty() {
            return Err(Error::InvalidArgument("weighted itemset is empty".into()));
        }
        pairs.sort_by_key(|&(id, _)| id);
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidArgument(format!("item {} repeated", w[0].0)));
            }
        }
        if let Some(&(id, w)) = pairs.iter().find(|(_, w)| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "item {id} has non-positive weight {w}"
            )));
        }
        let (items, weights) = pairs.into_iter().unzip();
        Ok(Self {
            items: Itemset(items),
            weights,
        })
    }

    pub fn itemset(&self) -> &Itemset {
        &self.items
    }

    /// Weights aligned with `itemset().items()`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn weight_of(&self, item: ItemId) -> Option<f64> {
        self.items
            .0
            .binary_search(&item)
            .ok()
            .map(|pos| self.weights[pos])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InstanceKind {
    PlainItemset,
    WeightedItemset,
    Sequence,
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InstanceKind::PlainItemset => "itemset",
            InstanceKind::WeightedItemset => "weighted itemset",
            InstanceKind::Sequence => "sequence",
        })
    }
}

/// One stream element.
#[derive(Clone, Debug, PartialEq)]
pub enum Instance {
    Plain(Itemset),
    Weighted(WeightedItemset),
    Sequence(Vec<Itemset>),
}

impl Instance {
    pub fn plain(items: impl IntoIterator<Item = ItemId>) -> Result<Self> {
        let set = Itemset::new(items);
        if set.is_empty() {
            return Err(Error::InvalidArgument("itemset instance is empty".into()));
        }
        Ok(Instance::Plain(set))
    }

    /// Builds a sequence instance; every itemset must be non-empty.
    pub fn sequence(itemsets: Vec<Itemset>) -> Result<Self> {
        if itemsets.is_empty() || itemsets.iter().any(Itemset::is_empty) {
            return Err(Error::InvalidArgument(
                "sequence must hold at least one itemset and no empty itemsets".into(),
            ));
        }
        Ok(Instance::Sequence(itemsets))
    }

    pub fn kind(&self) -> InstanceKind {
        match self {
            Instance::Plain(_) => InstanceKind::PlainItemset,
            Instance::Weighted(_) => InstanceKind::WeightedItemset,
            Instance::Sequence(_) => InstanceKind::Sequence,
        }
    }

    /// The itemsets of the instance in order; a single one for itemset variants.
    pub fn itemsets(&self) -> &[Itemset] {
        match self {
            Instance::Plain(set) => std::slice::from_ref(set),
            Instance::Weighted(w) => std::slice::from_ref(&w.items),
            Instance::Sequence(seq) => seq,
        }
    }

    pub fn norm(&self) -> usize {
        self.itemsets().iter().map(Itemset::len).sum()
    }
}

/// A timestamped group of instances of one variant.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub timestamp: f64,
    pub instances: Vec<Instance>,
    /// Class tokens aligned with `instances`; only the featurizer reads them.
    pub labels: Vec<Option<String>>,
}

impl Batch {
    pub fn new(timestamp: f64, instances: Vec<Instance>) -> Self {
        let labels = vec![None; instances.len()];
        Self {
            timestamp,
            instances,
            labels,
        }
    }

    pub fn with_labels(
        timestamp: f64,
        instances: Vec<Instance>,
        labels: Vec<Option<String>>,
    ) -> Result<Self> {
        if labels.len() != instances.len() {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {} instances",
                labels.len(),
                instances.len()
            )));
        }
        Ok(Self {
            timestamp,
            instances,
            labels,
        })
    }

    /// The shared variant of the batch, `None` when it is empty.
    pub fn kind(&self) -> Result<Option<InstanceKind>> {
        let mut kinds = self.instances.iter().map(Instance::kind);
        let Some(first) = kinds.next() else {
            return Ok(None);
        };
        if let Some(other) = kinds.find(|k| *k != first) {
            return Err(Error::Config(format!(
                "batch mixes {first} and {other} instances"
            )));
        }
        Ok(Some(first))
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

/// A generalization of an instance: an ordered list of non-empty itemsets.
/// Itemset patterns are the one-element case.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern {
    elements: Vec<Itemset>,
}

impl Pattern {
    pub fn new(elements: Vec<Itemset>) -> Result<Self> {
        if elements.is_empty() || elements.iter().any(Itemset::is_empty) {
            return Err(Error::InvalidArgument(
                "pattern elements must be non-empty".into(),
            ));
        }
        Ok(Self { elements })
    }

    pub(crate) fn from_elements_unchecked(elements: Vec<Itemset>) -> Self {
        debug_assert!(!elements.is_empty() && elements.iter().all(|e| !e.is_empty()));
        Self { elements }
    }

    pub fn itemset(items: impl IntoIterator<Item = ItemId>) -> Result<Self> {
        Self::new(vec![Itemset::new(items)])
    }

    /// The pattern equal to `instance` itself (weights dropped).
    pub fn of_instance(instance: &Instance) -> Self {
        Self {
            elements: instance.itemsets().to_vec(),
        }
    }

    pub fn elements(&self) -> &[Itemset] {
        &self.elements
    }

    pub fn norm(&self) -> usize {
        self.elements.iter().map(Itemset::len).sum()
    }
}

/// Whether `pattern` generalizes `instance`.
///
/// For itemset instances this is the subset test. For sequences the leftmost
/// greedy embedding is tried, which finds an embedding whenever one exists.
pub fn matches(pattern: &Pattern, instance: &Instance) -> bool {
    match instance {
        Instance::Plain(set) => {
            pattern.elements.len() == 1 && pattern.elements[0].is_subset_of(set)
        }
        Instance::Weighted(w) => {
            pattern.elements.len() == 1 && pattern.elements[0].is_subset_of(&w.items)
        }
        Instance::Sequence(seq) => {
            let mut positions = seq.iter();
            pattern
                .elements
                .iter()
                .all(|element| positions.any(|itemset| element.is_subset_of(itemset)))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReservoirEntry {
    pub timestamp: f64,
    pub pattern: Pattern,
}

/// Fixed-capacity sample of patterns; duplicates allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct Reservoir {
    capacity: usize,
    entries: Vec<ReservoirEntry>,
}

impl Reservoir {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("reservoir capacity must be positive".into()));
        }
        Ok(Self {
            capacity,
            entries: Vec::with_capacity(capacity),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() == self.capacity
    }

    pub fn entries(&self) -> &[ReservoirEntry] {
        &self.entries
    }

    pub(crate) fn push(&mut self, entry: ReservoirEntry) {
        assert!(self.entries.len() < self.capacity, "reservoir overflow");
        self.entries.push(entry);
    }

    pub(crate) fn replace(&mut self, slot: usize, entry: ReservoirEntry) {
        self.entries[slot] = entry;
    }
}
