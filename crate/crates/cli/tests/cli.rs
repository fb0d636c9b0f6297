use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &str = "\
n_users=60
n_jobs=200
open_fraction=0.5
candidates_per_user=10
seed=3
";

fn relboost(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relboost"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = relboost(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn code(args: &[&str]) -> i32 {
    relboost(args).status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_dataset(dir: &Path) -> PathBuf {
    let cfg = dir.join("small.cfg");
    fs::write(&cfg, SMALL).unwrap();
    let data = dir.join("data");
    ok(&["gen", "--config", s(&cfg), "--out", s(&data)]);
    data
}

fn run_pipeline(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let data = small_dataset(dir);
    let model = dir.join("model.txt");
    let report = dir.join("report.txt");
    ok(&[
        "train",
        "--data",
        s(&data),
        "--model",
        s(&model),
        "--stages",
        "4",
        "--beta",
        "1",
    ]);
    ok(&[
        "eval",
        "--data",
        s(&data),
        "--model",
        s(&model),
        "--out",
        s(&report),
    ]);
    let mut files = BTreeMap::new();
    for sub in [dir.to_path_buf(), data] {
        for entry in fs::read_dir(&sub).unwrap() {
            let p = entry.unwrap().path();
            if p.is_file() {
                files.insert(
                    p.strip_prefix(dir).unwrap().display().to_string(),
                    fs::read(&p).unwrap(),
                );
            }
        }
    }
    files
}

#[test]
fn pipeline_is_byte_identical_across_runs() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let first = run_pipeline(a.path());
    let second = run_pipeline(b.path());
    for name in [
        "model.txt",
        "model.txt.log",
        "report.txt",
        "report.csv",
        "data/facts_train.txt",
    ] {
        assert!(first.contains_key(name), "missing {name}");
    }
    assert_eq!(
        first.keys().collect::<Vec<_>>(),
        second.keys().collect::<Vec<_>>()
    );
    for (name, bytes) in &first {
        assert!(bytes == &second[name], "{name} differs between runs");
    }
}

fn lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(str::to_string)
        .filter(|l| !l.trim().is_empty())
        .collect()
}

/// `pred(a, b, ...)` split into predicate name and arguments.
fn split_atom(line: &str) -> (String, Vec<String>) {
    let line = line.trim().trim_end_matches('.');
    let (name, rest) = line.split_once('(').unwrap();
    let args = rest
        .trim_end_matches(')')
        .split(',')
        .map(|a| a.trim().to_string())
        .collect();
    (name.trim().to_string(), args)
}

fn facts_by_pred(path: &Path) -> BTreeMap<String, Vec<Vec<String>>> {
    let mut out: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
    for l in lines(path) {
        let (p, args) = split_atom(&l);
        out.entry(p).or_default().push(args);
    }
    out
}

#[test]
fn generated_counts_match_the_config() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("data");
    ok(&["gen", "--seed", "5", "--out", s(&data)]);
    let cfg: BTreeMap<String, String> = lines(&data.join("synth_config.txt"))
        .iter()
        .map(|l| {
            let (k, v) = l.split_once('=').unwrap();
            (k.to_string(), v.to_string())
        })
        .collect();
    let num = |k: &str| cfg[k].parse::<f64>().unwrap();
    let range = |k: &str| {
        let (lo, hi) = cfg[k].split_once("..").unwrap();
        (lo.parse::<usize>().unwrap(), hi.parse::<usize>().unwrap())
    };
    assert_eq!(cfg["seed"], "5");
    let (n_users, n_jobs) = (num("n_users") as usize, num("n_jobs") as usize);
    let n_test = (n_users as f64 * num("test_fraction")).round() as usize;
    let (job_lo, job_hi) = range("skills_per_job");
    let (_, user_hi) = range("skills_per_user");

    let mut all_users = BTreeSet::new();
    for (side, users_expected) in [("train", n_users - n_test), ("test", n_test)] {
        let facts = facts_by_pred(&data.join(format!("facts_{side}.txt")));
        let count = |p: &str| facts.get(p).map_or(0, Vec::len);
        let users: BTreeSet<String> = facts["userClass"].iter().map(|a| a[0].clone()).collect();
        assert_eq!(users.len(), users_expected);
        assert!(
            all_users.is_disjoint(&users),
            "a user appears on both sides"
        );
        all_users.extend(users);
        for p in [
            "userClass",
            "userCity",
            "mostRecentCompany",
            "mostRecentJobTitle",
        ] {
            assert_eq!(count(p), users_expected, "{side} {p}");
        }
        assert_eq!(count("jobClass"), n_jobs);
        assert!((n_jobs * job_lo..=n_jobs * job_hi).contains(&count("jobSkill")));
        assert!(count("userSkill") <= users_expected * user_hi);

        let pos = lines(&data.join(format!("pos_{side}.txt")));
        let neg = lines(&data.join(format!("neg_{side}.txt")));
        assert_eq!(count("prAppliedJob"), pos.len());
        assert_eq!(count("recommended"), pos.len() + neg.len());
        assert_eq!(count("userJobDis"), count("recommended"));
        let applied: BTreeSet<Vec<String>> = facts["prAppliedJob"].iter().cloned().collect();
        let recommended: BTreeSet<Vec<String>> = facts["recommended"].iter().cloned().collect();
        assert!(applied.is_subset(&recommended));
        let negs: BTreeSet<Vec<String>> = neg.iter().map(|l| split_atom(l).1).collect();
        assert_eq!(negs, recommended.difference(&applied).cloned().collect());

        // Comm facts recomputed from the attribute facts.
        for (comm, attr) in [
            ("commSkill", "userSkill"),
            ("commClass", "userClass"),
            ("commCity", "userCity"),
        ] {
            let mut holders: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
            for a in &facts[attr] {
                holders
                    .entry(a[1].as_str())
                    .or_default()
                    .insert(a[0].as_str());
            }
            let mut want = BTreeSet::new();
            for us in holders.values() {
                for x in us {
                    for y in us {
                        if x != y {
                            want.insert(vec![x.to_string(), y.to_string()]);
                        }
                    }
                }
            }
            let got: BTreeSet<Vec<String>> =
                facts.get(comm).into_iter().flatten().cloned().collect();
            assert_eq!(got, want, "{side} {comm}");
        }
    }
    assert_eq!(all_users.len(), n_users);
}

#[test]
fn config_errors_exit_with_code_2() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(dir.path());
    let model = dir.path().join("m.txt");
    assert_eq!(
        code(&[
            "train",
            "--data",
            s(&data),
            "--model",
            s(&model),
            "--stages",
            "0"
        ]),
        2
    );
    assert!(!model.exists());
    assert_eq!(
        code(&[
            "train",
            "--data",
            s(&data),
            "--model",
            s(&model),
            "--preset",
            "social"
        ]),
        2
    );
    assert_eq!(
        code(&[
            "train",
            "--data",
            s(&data),
            "--model",
            s(&model),
            "--alpha",
            "nan"
        ]),
        2
    );
    assert_eq!(code(&["induce", "--data", s(&data), "--out", s(&data)]), 2);
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "apply_noise=1.5\n").unwrap();
    assert_eq!(
        code(&[
            "gen",
            "--config",
            s(&bad),
            "--out",
            s(&dir.path().join("x"))
        ]),
        2
    );
}

#[test]
fn other_errors_have_distinct_codes() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(dir.path());
    let model = dir.path().join("m.txt");
    assert_eq!(
        code(&[
            "train",
            "--data",
            s(&dir.path().join("missing")),
            "--model",
            s(&model)
        ]),
        9
    );
    ok(&[
        "train",
        "--data",
        s(&data),
        "--model",
        s(&model),
        "--stages",
        "2",
    ]);
    let out = dir.path().join("r.txt");
    assert_eq!(
        code(&[
            "eval",
            "--data",
            s(&data),
            "--model",
            s(&model),
            "--out",
            s(&out),
            "--threshold",
            "1.5"
        ]),
        6
    );
    let broken = dir.path().join("broken.txt");
    fs::write(&broken, "not a model\n").unwrap();
    assert_eq!(
        code(&[
            "eval",
            "--data",
            s(&data),
            "--model",
            s(&broken),
            "--out",
            s(&out)
        ]),
        7
    );
    fs::write(data.join("pos_train.txt"), "match(u0, j0\n").unwrap();
    assert_eq!(
        code(&["train", "--data", s(&data), "--model", s(&model)]),
        3
    );
}

#[test]
fn predict_scores_every_test_example() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(dir.path());
    let model = dir.path().join("m.txt");
    let preds = dir.path().join("preds.tsv");
    ok(&[
        "train",
        "--data",
        s(&data),
        "--model",
        s(&model),
        "--stages",
        "3",
        "--preset",
        "content",
    ]);
    ok(&[
        "predict",
        "--data",
        s(&data),
        "--model",
        s(&model),
        "--out",
        s(&preds),
    ]);
    let n_examples =
        lines(&data.join("pos_test.txt")).len() + lines(&data.join("neg_test.txt")).len();
    let rows = lines(&preds);
    assert_eq!(rows.len(), n_examples);
    for r in rows {
        let cols: Vec<&str> = r.split('\t').collect();
        assert_eq!(cols.len(), 3);
        assert!(cols[0].starts_with("match("));
        let p: f64 = cols[2].parse().unwrap();
        assert!((0.0..=1.0).contains(&p));
    }
    let log = lines(&dir.path().join("m.txt.log"));
    assert_eq!(log.len(), 1 + 1 + 3);
}

#[test]
fn induce_on_generated_data_is_a_fixpoint() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(dir.path());
    let out = dir.path().join("induced");
    ok(&["induce", "--data", s(&data), "--out", s(&out)]);
    for f in [
        "facts_train.txt",
        "facts_test.txt",
        "pos_test.txt",
        "neg_train.txt",
    ] {
        assert_eq!(
            fs::read(data.join(f)).unwrap(),
            fs::read(out.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn sweep_reports_one_row_per_grid_point() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(dir.path());
    let out = dir.path().join("sweep.txt");
    ok(&[
        "sweep",
        "--data",
        s(&data),
        "--betas",
        "0,2",
        "--out",
        s(&out),
        "--stages",
        "2",
    ]);
    let csv = lines(&dir.path().join("sweep.csv"));
    assert_eq!(csv.len(), 3);
    assert!(csv[1].contains("beta=0") && csv[2].contains("beta=2"));
    assert_eq!(lines(&out).len(), 4);
}
