//! Job-recommendation domain: the schema, collaborative `comm*` predicates,
//! example construction from recommendation logs, mode presets, and a
//! synthetic data generator with a planted matching rule.

mod comm;
mod dataset;
mod domain;
mod examples;
mod synth;

pub use comm::{induce_comm, shared_attribute_pairs};
pub use dataset::{
    modes_file, read_text, write_atomic, DatasetSplit, FACTS_TEST, FACTS_TRAIN, NEG_TEST,
    NEG_TRAIN, POS_TEST, POS_TRAIN, SCHEMA_FILE, SYNTH_CONFIG,
};
pub use domain::{
    discretize_distance, mode_preset, mode_preset_text, rec_schema, PresetKind, APPLIED,
    COMM_SOURCES, DISTANCE, DIST_BUCKETS, RECOMMENDED, TARGET,
};
pub use examples::{build_examples, generate_negatives, parse_examples, render_examples};
pub use synth::{
    synth_generate, synth_generate_with_truth, truth_of, CountRange, PlantedWorld, SynthConfig,
};
