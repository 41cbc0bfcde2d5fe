//! Reservoir-based sampling of patterns from a stream of batches.
//!
//! A [`Sampler`] keeps `k` patterns drawn with replacement, each with
//! probability proportional to its damped global utility under a norm-based
//! measure ([`MeasureSpec`]). Instances are plain itemsets, weighted itemsets
//! or sequences of itemsets.
//!
//! ```
//! use rps_core::{Batch, BaseMeasure, Catalog, Instance, MeasureSpec, Sampler, SamplerConfig};
//!
//! let mut catalog = Catalog::new();
//! let (a, b) = (catalog.intern("a"), catalog.intern("b"));
//! let spec = MeasureSpec::unconstrained(BaseMeasure::Area);
//! let mut sampler = Sampler::new(SamplerConfig::new(spec, 4, 42)).unwrap();
//! let batch = Batch::new(1.0, vec![Instance::plain([a, b]).unwrap()]);
//! sampler.process_batch(&batch).unwrap();
//! assert_eq!(sampler.snapshot().len(), 4);
//! ```

pub mod beta;
pub mod draw;
pub mod engine;
pub mod error;
pub mod io;
pub mod measure;
pub mod model;
pub mod oracle;
pub mod weighting;

pub use beta::{binomial_survival, inv_draw_realisations, reg_inc_beta, RealisationMode};
pub use draw::{draw_instance, draw_norm, draw_pattern_of_norm, sample_from_batch, BatchSampler};
pub use engine::{featurize_entries, BatchReport, Counters, FeatureVector, Sampler, SamplerConfig};
pub use error::{Error, Result};
pub use measure::{damping, BaseMeasure, DampingSpec, MaxNorm, MeasureSpec};
pub use model::{
    matches, Batch, Catalog, Instance, InstanceKind, ItemId, Itemset, Pattern, Reservoir,
    ReservoirEntry, WeightedItemset,
};
pub use weighting::{
    batch_weight, instance_weight, norm_weights, norm_weights_plain, norm_weights_sequence,
    norm_weights_weighted, InstanceWeights, NormWeightTable, SequenceCountDP,
};
