//! The streaming reservoir sampler.
//!
//! Per batch: compute the batch weight `w`, update the rescaled normalization
//! `S <- S * exp(-gamma * (t - t_last)) + w` and set `p = w / S`. `S` equals
//! `Z * exp(-gamma * t)` for the unscaled running sum
//! `Z = sum_i w_i * exp(gamma * t_i)`, so `p = w * exp(gamma * t) / Z` without
//! ever forming `exp(gamma * t)`.
//!
//! Randomness comes from one ChaCha8 generator seeded at construction and is
//! consumed per batch in this order:
//! 1. the acceptance uniform `x`;
//! 2. [`RealisationMode::Conditioned`] only: one uniform for the count;
//! 3. one draw per evicted slot (partial Fisher-Yates over the slots), skipped
//!    while the reservoir is being filled;
//! 4. the pattern draws, one after the other (see [`crate::draw`]).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::beta::RealisationMode;
use crate::draw::{sample_indices, BatchSampler};
use crate::error::{Error, Result};
use crate::measure::{DampingSpec, MeasureSpec};
use crate::model::{matches, Batch, Instance, InstanceKind, Reservoir, ReservoirEntry};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplerConfig {
    pub measure: MeasureSpec,
    pub damping: DampingSpec,
    pub capacity: usize,
    pub seed: u64,
    pub mode: RealisationMode,
}

impl SamplerConfig {
    pub fn new(measure: MeasureSpec, capacity: usize, seed: u64) -> Self {
        Self {
            measure,
            damping: DampingSpec::landmark(),
            capacity,
            seed,
            mode: RealisationMode::default(),
        }
    }

    pub fn with_damping(mut self, damping: DampingSpec) -> Self {
        self.damping = damping;
        self
    }

    pub fn with_mode(mut self, mode: RealisationMode) -> Self {
        self.mode = mode;
        self
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Counters {
    pub batches_seen: u64,
    pub batches_accepted: u64,
    pub insertions: u64,
}

/// Outcome of one [`Sampler::process_batch`] call.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchReport {
    pub weight: f64,
    /// `p = w / S`; zero for skipped zero-weight batches.
    pub acceptance_probability: f64,
    pub accepted: bool,
    pub realisations: usize,
    /// Replaced slots, in the order the new patterns were written.
    pub evicted: Vec<usize>,
}

impl BatchReport {
    fn skipped() -> Self {
        Self {
            weight: 0.0,
            acceptance_probability: 0.0,
            accepted: false,
            realisations: 0,
            evicted: Vec::new(),
        }
    }
}

/// One binary containment feature per reservoir slot, plus the label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureVector {
    pub bits: Vec<bool>,
    pub label: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Sampler {
    config: SamplerConfig,
    reservoir: Reservoir,
    norm_scaled: f64,
    t_last: Option<f64>,
    t_seen: Option<f64>,
    kind: Option<InstanceKind>,
    counters: Counters,
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(config: SamplerConfig) -> Result<Self> {
        Ok(Self {
            reservoir: Reservoir::new(config.capacity)?,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            norm_scaled: 0.0,
            t_last: None,
            t_seen: None,
            kind: None,
            counters: Counters::default(),
        })
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn reservoir(&self) -> &Reservoir {
        &self.reservoir
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    /// `Z * exp(-gamma * t_last)`.
    pub fn norm_scaled(&self) -> f64 {
        self.norm_scaled
    }

    /// Timestamp of the last batch with positive weight.
    pub fn t_last(&self) -> Option<f64> {
        self.t_last
    }

    fn check_batch(&mut self, batch: &Batch) -> Result<()> {
        if !batch.timestamp.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "timestamp {} is not finite",
                batch.timestamp
            )));
        }
        if let Some(previous) = self.t_seen {
            if batch.timestamp <= previous {
                return Err(Error::Ordering {
                    previous,
                    got: batch.timestamp,
                });
            }
        }
        if let Some(kind) = batch.kind()? {
            self.config.measure.check_kind(kind)?;
            match self.kind {
                Some(seen) if seen != kind => {
                    return Err(Error::Config(format!(
                        "{kind} batch in a stream of {seen} batches"
                    )))
                }
                _ => self.kind = Some(kind),
            }
        }
        Ok(())
    }

    pub fn process_batch(&mut self, batch: &Batch) -> Result<BatchReport> {
        self.check_batch(batch)?;
        let t = batch.timestamp;
        self.t_seen = Some(t);
        self.counters.batches_seen += 1;

        let sampler = BatchSampler::new(batch, &self.config.measure)?;
        let w = sampler.total();
        if !(w > 0.0) {
            // No pattern mass: the normalization and t_last stay untouched.
            return Ok(BatchReport::skipped());
        }
        let decay = match self.t_last {
            Some(t_last) => (-(t - t_last) * self.config.damping.gamma()).exp(),
            None => 0.0,
        };
        self.norm_scaled = self.norm_scaled * decay + w;
        self.t_last = Some(t);
        let p = (w / self.norm_scaled).min(1.0);

        let k = self.reservoir.capacity();
        let x: f64 = self.rng.random();
        let n_r = self
            .config
            .mode
            .realisations(k as u64, p, x, &mut self.rng)? as usize;
        let mut report = BatchReport {
            weight: w,
            acceptance_probability: p,
            accepted: n_r > 0,
            realisations: n_r,
            evicted: Vec::new(),
        };
        if n_r == 0 {
            return Ok(report);
        }
        self.counters.batches_accepted += 1;
        self.counters.insertions += n_r as u64;

        if self.reservoir.is_full() {
            report.evicted = sample_indices(k, n_r, &mut self.rng);
            let patterns = sampler.sample(n_r, &mut self.rng)?;
            for (&slot, pattern) in report.evicted.iter().zip(patterns) {
                self.reservoir.replace(slot, ReservoirEntry { timestamp: t, pattern });
            }
        } else {
            // Only the first weighted batch gets here, with p = 1 and n_r = k.
            debug_assert!(self.reservoir.is_empty() && n_r == k);
            let start = self.reservoir.len();
            for pattern in sampler.sample(n_r.min(k - start), &mut self.rng)? {
                self.reservoir.push(ReservoirEntry { timestamp: t, pattern });
            }
            report.evicted = (start..self.reservoir.len()).collect();
        }
        Ok(report)
    }

    /// Reservoir entries in slot order.
    pub fn snapshot(&self) -> Vec<ReservoirEntry> {
        self.reservoir.entries().to_vec()
    }

    /// Bit `j` is set iff the pattern in slot `j` generalizes `z`.
    pub fn featurize(&self, z: &Instance, label: Option<&str>) -> Result<FeatureVector> {
        featurize_entries(self.reservoir.entries(), self.reservoir.capacity(), z, label)
    }
}

/// [`Sampler::featurize`] against a stored reservoir of `capacity` slots.
pub fn featurize_entries(
    entries: &[ReservoirEntry],
    capacity: usize,
    z: &Instance,
    label: Option<&str>,
) -> Result<FeatureVector> {
    if entries.len() < capacity || entries.is_empty() {
        return Err(Error::ReservoirNotFull {
            len: entries.len(),
            capacity,
        });
    }
    Ok(FeatureVector {
        bits: entries.iter().map(|e| matches(&e.pattern, z)).collect(),
        label: label.map(str::to_owned),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::BaseMeasure;
    use crate::model::fixtures::{pat, seq, set};

    fn plain(letters: &[&str]) -> Vec<Instance> {
        letters.iter().map(|l| Instance::Plain(set(l))).collect()
    }

    fn freq_sampler(k: usize, gamma: f64, seed: u64) -> Sampler {
        let cfg = SamplerConfig::new(MeasureSpec::unconstrained(BaseMeasure::Freq), k, seed)
            .with_damping(DampingSpec::new(gamma).unwrap());
        Sampler::new(cfg).unwrap()
    }

    #[test]
    fn first_batch_fills_the_reservoir() {
        let mut s = freq_sampler(5, 0.0, 1);
        assert!(s.snapshot().is_empty());
        let r = s.process_batch(&Batch::new(1.0, plain(&["ABC", "AC"]))).unwrap();
        assert_eq!(r.acceptance_probability, 1.0);
        assert!(r.accepted);
        assert_eq!(r.realisations, 5);
        let snap = s.snapshot();
        assert_eq!(snap.len(), 5);
        assert!(snap.iter().all(|e| e.timestamp == 1.0));
    }

    #[test]
    fn acceptance_probability_landmark() {
        let mut s = freq_sampler(3, 0.0, 1);
        s.process_batch(&Batch::new(1.0, plain(&["ABC", "AC"]))).unwrap();
        let r = s.process_batch(&Batch::new(2.0, plain(&["AB"]))).unwrap();
        assert_eq!(r.weight, 3.0);
        assert!((r.acceptance_probability - 3.0 / 13.0).abs() < 1e-15);
    }

    #[test]
    fn acceptance_probability_damped() {
        let mut s = freq_sampler(3, 0.1, 1);
        s.process_batch(&Batch::new(1.0, plain(&["A"]))).unwrap();
        let r = s.process_batch(&Batch::new(2.0, plain(&["B"]))).unwrap();
        let expected = 1.0 / ((-0.1f64).exp() + 1.0);
        assert!((r.acceptance_probability - expected).abs() < 1e-15);
        assert!((r.acceptance_probability - 0.5250).abs() < 5e-5);
    }

    #[test]
    fn ordering_and_variant_errors() {
        let mut s = freq_sampler(2, 0.0, 1);
        s.process_batch(&Batch::new(2.0, plain(&["A"]))).unwrap();
        assert!(matches!(
            s.process_batch(&Batch::new(2.0, plain(&["A"]))),
            Err(Error::Ordering { .. })
        ));
        assert!(matches!(
            s.process_batch(&Batch::new(3.0, vec![seq(&["A"])])),
            Err(Error::Config(_))
        ));
        let util = SamplerConfig::new(MeasureSpec::unconstrained(BaseMeasure::Util), 2, 0);
        let mut s = Sampler::new(util).unwrap();
        assert!(matches!(
            s.process_batch(&Batch::new(1.0, plain(&["A"]))),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn zero_weight_batches_are_skipped() {
        let spec = MeasureSpec::new(BaseMeasure::Freq, 3, crate::measure::MaxNorm::Unbounded).unwrap();
        let mut s = Sampler::new(SamplerConfig::new(spec, 2, 0)).unwrap();
        let r = s.process_batch(&Batch::new(1.0, plain(&["AB"]))).unwrap();
        assert!(!r.accepted);
        assert_eq!(s.norm_scaled(), 0.0);
        assert_eq!(s.t_last(), None);
        let r = s.process_batch(&Batch::new(2.0, plain(&["ABC"]))).unwrap();
        assert_eq!(r.realisations, 2);
        assert_eq!(s.counters().batches_seen, 2);
        assert_eq!(s.counters().batches_accepted, 1);
        let r = s.process_batch(&Batch::new(3.0, vec![])).unwrap();
        assert!(!r.accepted);
        assert_eq!(s.t_last(), Some(2.0));
    }

    #[test]
    fn evicted_slots_are_distinct_and_receive_the_new_patterns() {
        let mut s = freq_sampler(8, 0.5, 3);
        s.process_batch(&Batch::new(1.0, plain(&["A"]))).unwrap();
        let mut t = 2.0;
        loop {
            let r = s.process_batch(&Batch::new(t, plain(&["B"]))).unwrap();
            t += 1.0;
            if r.accepted {
                let mut slots = r.evicted.clone();
                slots.sort_unstable();
                slots.dedup();
                assert_eq!(slots.len(), r.realisations);
                for slot in r.evicted {
                    assert_eq!(s.snapshot()[slot].pattern, pat(&["B"]));
                    assert_eq!(s.snapshot()[slot].timestamp, t - 1.0);
                }
                break;
            }
        }
        assert_eq!(s.snapshot().len(), 8);
    }

    #[test]
    fn featurize_checks_fullness() {
        let s = freq_sampler(2, 0.0, 0);
        assert!(matches!(
            s.featurize(&seq(&["A"]), None),
            Err(Error::ReservoirNotFull { len: 0, capacity: 2 })
        ));
    }

    #[test]
    fn featurize_bits() {
        let entries = vec![
            ReservoirEntry { timestamp: 1.0, pattern: pat(&["A", "C"]) },
            ReservoirEntry { timestamp: 1.0, pattern: pat(&["B"]) },
        ];
        let z3 = seq(&["B", "AC", "A"]);
        let f = featurize_entries(&entries, 2, &z3, Some("x")).unwrap();
        assert_eq!(f.bits, vec![false, true]);
        assert_eq!(f.label.as_deref(), Some("x"));
        let f = featurize_entries(&entries, 2, &seq(&["D", "E"]), None).unwrap();
        assert_eq!(f.bits, vec![false, false]);
    }
}
