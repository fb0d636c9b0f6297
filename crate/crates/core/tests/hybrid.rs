use relboost::boost::{train, TrainConfig, TrainInput};
use relboost::factstore::serialize_facts;
use relboost::hybrid::{
    mode_preset, render_examples, synth_generate, synth_generate_with_truth, truth_of,
    DatasetSplit, PresetKind, SynthConfig, APPLIED,
};
use relboost::metrics::{auc_roc, score_examples};

/// Fully observed, noiseless world whose rule fits in a single node test.
fn noiseless() -> SynthConfig {
    SynthConfig {
        n_users: 200,
        n_jobs: 800,
        skill_visibility: 1.0,
        apply_noise: 0.0,
        rec_rate: 1.0,
        min_shared_skills: 1,
        max_dist_bucket: 2,
        region_miles: 100.0,
        seed: 2,
        ..Default::default()
    }
}

#[test]
fn noiseless_labels_follow_the_planted_rule() {
    let (split, world) = synth_generate_with_truth(&noiseless()).unwrap();
    for ex in split.train_pos.iter().chain(&split.test_pos) {
        assert_eq!(truth_of(&world, &split.universe, ex), Some(true));
    }
    for ex in split.train_neg.iter().chain(&split.test_neg) {
        assert_eq!(truth_of(&world, &split.universe, ex), Some(false));
    }
}

#[test]
fn hybrid_recovers_the_planted_rule() {
    let split = synth_generate(&noiseless()).unwrap();
    assert!(!split.train_pos.is_empty() && !split.train_neg.is_empty());
    let modes = mode_preset(split.universe.schema(), PresetKind::Hybrid).unwrap();
    let input = TrainInput {
        universe: &split.universe,
        fb: &split.fb_train,
        pos: &split.train_pos,
        neg: &split.train_neg,
        modes: &modes,
        mask: split.universe.schema().pred_id(APPLIED),
    };
    let (model, _) = train(
        input,
        &TrainConfig::<f64> {
            n_stages: 10,
            ..Default::default()
        },
    )
    .unwrap();
    let examples: Vec<_> = split
        .train_pos
        .iter()
        .chain(&split.train_neg)
        .cloned()
        .collect();
    let auc = auc_roc(&score_examples(&model, &examples, &split.fb_train).unwrap()).unwrap();
    assert!(auc >= 0.95, "training AUC {auc}");
}

fn fingerprint(split: &DatasetSplit) -> Vec<String> {
    vec![
        serialize_facts(&split.fb_train, &split.universe),
        serialize_facts(&split.fb_test, &split.universe),
        render_examples(&split.train_pos, &split.universe),
        render_examples(&split.train_neg, &split.universe),
        render_examples(&split.test_pos, &split.universe),
        render_examples(&split.test_neg, &split.universe),
    ]
}

#[test]
fn same_seed_same_dataset() {
    let cfg = SynthConfig {
        seed: 9,
        ..Default::default()
    };
    assert_eq!(
        fingerprint(&synth_generate(&cfg).unwrap()),
        fingerprint(&synth_generate(&cfg).unwrap())
    );
    let other = SynthConfig {
        seed: 10,
        ..Default::default()
    };
    assert_ne!(
        fingerprint(&synth_generate(&cfg).unwrap()),
        fingerprint(&synth_generate(&other).unwrap())
    );
}

#[test]
fn split_is_by_user_and_self_contained() {
    let split = synth_generate(&SynthConfig::default()).unwrap();
    split.check().unwrap();
    let users = |exs: &[relboost::boost::LabeledExample]| {
        exs.iter()
            .map(|e| e.target.args[0])
            .collect::<std::collections::BTreeSet<_>>()
    };
    let train: std::collections::BTreeSet<_> = users(&split.train_pos)
        .union(&users(&split.train_neg))
        .copied()
        .collect();
    let test: std::collections::BTreeSet<_> = users(&split.test_pos)
        .union(&users(&split.test_neg))
        .copied()
        .collect();
    assert!(train.is_disjoint(&test));
}

#[test]
fn dataset_directory_roundtrip() {
    let cfg = SynthConfig {
        n_users: 80,
        n_jobs: 300,
        seed: 4,
        ..Default::default()
    };
    let split = synth_generate(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    split.write_dir(dir.path(), Some(&cfg)).unwrap();
    let back = DatasetSplit::read_dir(dir.path()).unwrap();
    assert_eq!(fingerprint(&split), fingerprint(&back));
}

#[test]
fn infeasible_config_is_rejected() {
    let cfg = SynthConfig {
        n_skills: 5,
        ..Default::default()
    };
    assert!(matches!(
        synth_generate(&cfg),
        Err(relboost::Error::Config(_))
    ));
    let cfg = SynthConfig {
        class_affinity: 1.0,
        n_classes: 20,
        ..Default::default()
    };
    assert!(matches!(
        synth_generate(&cfg),
        Err(relboost::Error::Config(_))
    ));
    let cfg = SynthConfig {
        n_users: 0,
        ..Default::default()
    };
    assert!(matches!(
        synth_generate(&cfg),
        Err(relboost::Error::Config(_))
    ));
}
