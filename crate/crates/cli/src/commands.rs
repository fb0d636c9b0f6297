use std::path::{Path, PathBuf};

use relboost::boost::{
    parse_model, render_model, train, BoostedModel, CostParams, TrainConfig, TrainInput, TrainLog,
};
use relboost::hybrid::{
    induce_comm, modes_file, read_text, synth_generate, write_atomic, DatasetSplit, PresetKind,
    SynthConfig, APPLIED, SYNTH_CONFIG,
};
use relboost::metrics::{
    evaluate, render_report_csv, render_report_table, render_scores, score_examples, sweep,
    ReportRow, ScoredExample,
};
use relboost::treelearn::{parse_modes, TreeParams};
use relboost::{Error, Result};

use crate::{Command, Split, TrainArgs};

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Gen { config, seed, out } => gen(config.as_deref(), seed, &out),
        Command::Induce { data, out } => induce(&data, &out),
        Command::Train { data, model, train } => train_cmd(&data, &model, &train),
        Command::Predict {
            data,
            model,
            out,
            split,
        } => predict(&data, &model, &out, split),
        Command::Eval {
            data,
            model,
            out,
            threshold,
            split,
        } => eval(&data, &model, &out, threshold, split),
        Command::Sweep {
            data,
            alphas,
            betas,
            out,
            threshold,
            train,
        } => sweep_cmd(&data, &alphas, &betas, &out, threshold, &train),
    }
}

fn gen(config: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<()> {
    let mut cfg = match config {
        Some(p) => {
            SynthConfig::parse(&read_text(p)?).map_err(|e| e.in_file(&p.display().to_string()))?
        }
        None => SynthConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let split = synth_generate(&cfg)?;
    split.write_dir(out, Some(&cfg))
}

fn same_dir(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

fn induce(data: &Path, out: &Path) -> Result<()> {
    if same_dir(data, out) {
        return Err(Error::Config(
            "induce writes a new dataset; --out must differ from --data".into(),
        ));
    }
    let mut split = DatasetSplit::read_dir(data)?;
    split.fb_train = induce_comm(&split.fb_train, &split.universe)?;
    split.fb_test = induce_comm(&split.fb_test, &split.universe)?;
    let synth = data.join(SYNTH_CONFIG);
    let cfg = if synth.exists() {
        Some(SynthConfig::parse(&read_text(&synth)?).map_err(|e| e.in_file(SYNTH_CONFIG))?)
    } else {
        None
    };
    split.write_dir(out, cfg.as_ref())
}

fn train_config(args: &TrainArgs, cost: CostParams<f64>) -> TrainConfig<f64> {
    TrainConfig {
        tree: TreeParams {
            max_depth: args.depth,
            min_leaf_examples: args.min_leaf,
            ..Default::default()
        },
        cost,
        n_stages: args.stages,
        seed: args.seed,
        ..Default::default()
    }
}

fn fit(
    data: &Path,
    split: &DatasetSplit,
    args: &TrainArgs,
    cost: CostParams<f64>,
) -> Result<(BoostedModel<f64>, TrainLog<f64>)> {
    let config = train_config(args, cost);
    config.validate()?;
    let kind: PresetKind = args.preset.parse()?;
    let file = modes_file(kind);
    let modes = parse_modes(split.universe.schema(), &read_text(&data.join(&file))?)
        .map_err(|e| e.in_file(&file))?;
    let input = TrainInput {
        universe: &split.universe,
        fb: &split.fb_train,
        pos: &split.train_pos,
        neg: &split.train_neg,
        modes: &modes,
        mask: split.universe.schema().pred_id(APPLIED),
    };
    train(input, &config)
}

fn log_path(model: &Path) -> PathBuf {
    let mut s = model.as_os_str().to_owned();
    s.push(".log");
    PathBuf::from(s)
}

fn train_cmd(data: &Path, model_path: &Path, args: &TrainArgs) -> Result<()> {
    let cost = CostParams::new(args.alpha, args.beta)?;
    // Reject bad settings before reading any data.
    train_config(args, cost).validate()?;
    args.preset.parse::<PresetKind>()?;
    let split = DatasetSplit::read_dir(data)?;
    let (model, log) = fit(data, &split, args, cost)?;
    write_atomic(model_path, render_model(&model, &split.universe).as_bytes())?;
    write_atomic(&log_path(model_path), log.render().as_bytes())
}

fn load_model(path: &Path, split: &mut DatasetSplit) -> Result<BoostedModel<f64>> {
    let text = read_text(path)?;
    parse_model(&text, &mut split.universe).map_err(|e| e.in_file(&path.display().to_string()))
}

fn score_split(
    model: &BoostedModel<f64>,
    split: &DatasetSplit,
    which: Split,
) -> Result<Vec<ScoredExample<f64>>> {
    let (fb, pos, neg) = match which {
        Split::Train => (&split.fb_train, &split.train_pos, &split.train_neg),
        Split::Test => (&split.fb_test, &split.test_pos, &split.test_neg),
    };
    let examples: Vec<_> = pos.iter().chain(neg).cloned().collect();
    score_examples(model, &examples, fb)
}

fn predict(data: &Path, model_path: &Path, out: &Path, which: Split) -> Result<()> {
    let mut split = DatasetSplit::read_dir(data)?;
    let model = load_model(model_path, &mut split)?;
    let scored = score_split(&model, &split, which)?;
    write_atomic(out, render_scores(&scored, &split.universe).as_bytes())
}

fn csv_path(out: &Path) -> PathBuf {
    out.with_extension("csv")
}

fn write_report(out: &Path, rows: &[ReportRow<f64>]) -> Result<()> {
    if csv_path(out) == out {
        return Err(Error::Config(
            "report path must not end in .csv; the CSV is written next to it".into(),
        ));
    }
    write_atomic(out, render_report_table(rows).as_bytes())?;
    write_atomic(&csv_path(out), render_report_csv(rows).as_bytes())
}

fn eval(data: &Path, model_path: &Path, out: &Path, threshold: f64, which: Split) -> Result<()> {
    let mut split = DatasetSplit::read_dir(data)?;
    let model = load_model(model_path, &mut split)?;
    let scored = score_split(&model, &split, which)?;
    let name = model_path.file_stem().map_or_else(
        || "model".to_string(),
        |s| s.to_string_lossy().replace(',', "_"),
    );
    let row = ReportRow {
        name,
        cost: model.config.cost,
        eval: evaluate(&scored, threshold)?,
    };
    write_report(out, &[row])
}

fn parse_grid(text: &str, flag: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Config(format!("--{flag}: bad value `{v}`")))
        })
        .collect()
}

fn sweep_cmd(
    data: &Path,
    alphas: &str,
    betas: &str,
    out: &Path,
    threshold: f64,
    args: &TrainArgs,
) -> Result<()> {
    let alphas = parse_grid(alphas, "alphas")?;
    let betas = parse_grid(betas, "betas")?;
    train_config(args, CostParams::default()).validate()?;
    args.preset.parse::<PresetKind>()?;
    let split = DatasetSplit::read_dir(data)?;
    let rows = sweep(&alphas, &betas, threshold, |cost| {
        let (model, _) = fit(data, &split, args, cost)?;
        score_split(&model, &split, Split::Test)
    })?;
    let rows: Vec<ReportRow<f64>> = rows
        .into_iter()
        .map(|r| ReportRow {
            name: format!(
                "{} alpha={} beta={}",
                args.preset, r.cost.alpha, r.cost.beta
            ),
            cost: r.cost,
            eval: r.eval,
        })
        .collect();
    write_report(out, &rows)
}
