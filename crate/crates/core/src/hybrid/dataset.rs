use std::fs;
use std::io::Write;
use std::path::Path;

use crate::boost::{Label, LabeledExample};
use crate::error::{Error, Result};
use crate::factstore::{parse_facts, serialize_facts, FactBase, Schema, Universe};

use super::domain::{mode_preset_text, PresetKind};
use super::examples::{parse_examples, render_examples};
use super::synth::SynthConfig;

pub const SCHEMA_FILE: &str = "schema.txt";
pub const FACTS_TRAIN: &str = "facts_train.txt";
pub const FACTS_TEST: &str = "facts_test.txt";
pub const POS_TRAIN: &str = "pos_train.txt";
pub const NEG_TRAIN: &str = "neg_train.txt";
pub const POS_TEST: &str = "pos_test.txt";
pub const NEG_TEST: &str = "neg_test.txt";
pub const SYNTH_CONFIG: &str = "synth_config.txt";

pub fn modes_file(kind: PresetKind) -> String {
    format!("modes_{}.txt", kind.name())
}

/// Train and test sides over one shared universe. Every user's examples sit
/// on exactly one side; job facts appear on both.
#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub universe: Universe,
    pub fb_train: FactBase,
    pub fb_test: FactBase,
    pub train_pos: Vec<LabeledExample>,
    pub train_neg: Vec<LabeledExample>,
    pub test_pos: Vec<LabeledExample>,
    pub test_neg: Vec<LabeledExample>,
}

/// Writes `contents` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("{}: not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(contents).map_err(io)?;
    f.sync_all().map_err(io)?;
    drop(f);
    fs::rename(&tmp, path).map_err(io)
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn tag(file: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| e.in_file(file)
}

impl DatasetSplit {
    /// Writes the dataset directory, including both mode presets and, when
    /// given, the generator config.
    pub fn write_dir(&self, dir: &Path, synth: Option<&SynthConfig>) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        let u = &self.universe;
        let mut files: Vec<(String, String)> = vec![
            (SCHEMA_FILE.into(), u.schema().to_text()),
            (FACTS_TRAIN.into(), serialize_facts(&self.fb_train, u)),
            (FACTS_TEST.into(), serialize_facts(&self.fb_test, u)),
            (POS_TRAIN.into(), render_examples(&self.train_pos, u)),
            (NEG_TRAIN.into(), render_examples(&self.train_neg, u)),
            (POS_TEST.into(), render_examples(&self.test_pos, u)),
            (NEG_TEST.into(), render_examples(&self.test_neg, u)),
        ];
        for kind in [PresetKind::Content, PresetKind::Hybrid] {
            files.push((modes_file(kind), mode_preset_text(kind)));
        }
        if let Some(cfg) = synth {
            files.push((SYNTH_CONFIG.into(), cfg.to_text()));
        }
        for (name, text) in files {
            write_atomic(&dir.join(name), text.as_bytes())?;
        }
        Ok(())
    }

    /// Loads a dataset directory; both fact bases come back frozen.
    pub fn read_dir(dir: &Path) -> Result<Self> {
        let schema =
            Schema::parse(&read_text(&dir.join(SCHEMA_FILE))?).map_err(tag(SCHEMA_FILE))?;
        let mut universe = Universe::new(schema);
        let mut fb_train = parse_facts(&read_text(&dir.join(FACTS_TRAIN))?, &mut universe)
            .map_err(tag(FACTS_TRAIN))?;
        let mut fb_test = parse_facts(&read_text(&dir.join(FACTS_TEST))?, &mut universe)
            .map_err(tag(FACTS_TEST))?;
        fb_train.freeze();
        fb_test.freeze();
        let mut examples = |file: &str, label| -> Result<Vec<LabeledExample>> {
            parse_examples(&read_text(&dir.join(file))?, &mut universe, label).map_err(tag(file))
        };
        let train_pos = examples(POS_TRAIN, Label::Match)?;
        let train_neg = examples(NEG_TRAIN, Label::MisMatch)?;
        let test_pos = examples(POS_TEST, Label::Match)?;
        let test_neg = examples(NEG_TEST, Label::MisMatch)?;
        Ok(Self {
            universe,
            fb_train,
            fb_test,
            train_pos,
            train_neg,
            test_pos,
            test_neg,
        })
    }

    /// Checks the split invariants: no example on both sides and every
    /// example constant present in its side's fact base.
    pub fn check(&self) -> Result<()> {
        let train: rustc_hash::FxHashSet<_> = self
            .train_pos
            .iter()
            .chain(&self.train_neg)
            .map(|e| &e.target)
            .collect();
        if let Some(e) = self
            .test_pos
            .iter()
            .chain(&self.test_neg)
            .find(|e| train.contains(&e.target))
        {
            return Err(Error::Training(format!(
                "example `{}` is on both sides of the split",
                self.universe.render_atom(&e.target)
            )));
        }
        let sides = [
            (&self.fb_train, self.train_pos.iter().chain(&self.train_neg)),
            (&self.fb_test, self.test_pos.iter().chain(&self.test_neg)),
        ];
        for (fb, examples) in sides {
            let present: rustc_hash::FxHashSet<_> = fb.facts().flat_map(|f| f.args).collect();
            for e in examples {
                if let Some(c) = e.target.args.iter().find(|c| !present.contains(c)) {
                    return Err(Error::Training(format!(
                        "constant `{}` of `{}` does not occur in its fact base",
                        self.universe.const_name(*c),
                        self.universe.render_atom(&e.target)
                    )));
                }
            }
        }
        Ok(())
    }
}
