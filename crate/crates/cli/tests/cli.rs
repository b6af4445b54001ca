//! Black-box checks of the installed binary: subcommand wiring, artifact
//! emission, and the exit-code contract (0 ok, 2 usage, 3 data, 4 numeric).

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_genephen"))
}

fn run_ok(args: &[&str]) {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "args {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn exit_code(args: &[&str]) -> i32 {
    bin().args(args).output().unwrap().status.code().unwrap()
}

#[test]
fn end_to_end_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).display().to_string();

    run_ok(&[
        "synth", "--samples", "80", "--features", "12", "--informative", "4", "--separation",
        "1.5", "--seed", "7", "--out", &p("data.csv"),
    ]);
    assert!(dir.path().join("data.csv").exists());
    assert!(dir.path().join("data.meta.json").exists());

    run_ok(&[
        "train", "--data", &p("data.csv"), "--model", "mlp", "--hidden", "8", "--epochs", "40",
        "--seed", "1", "--out", &p("model.json"),
    ]);
    run_ok(&["eval", "--data", &p("data.csv"), "--model", &p("model.json")]);
    run_ok(&[
        "predict", "--data", &p("data.csv"), "--model", &p("model.json"), "--out", &p("preds.csv"),
    ]);
    let preds = std::fs::read_to_string(dir.path().join("preds.csv")).unwrap();
    assert_eq!(preds.lines().count(), 81);
    assert!(preds.starts_with("id,probability,prediction\n"));

    run_ok(&[
        "cluster", "--data", &p("data.csv"), "--model", &p("model.json"), "--k", "2", "--seed",
        "3", "--out-dir", &p("clust"),
    ]);
    assert!(dir.path().join("clust/cluster_assignments.csv").exists());
    assert!(dir.path().join("clust/cluster_summary.json").exists());

    run_ok(&[
        "rank-features", "--data", &p("data.csv"), "--top", "5", "--out", &p("corr.csv"),
        "--svg", &p("corr.svg"),
    ]);
    let corr = std::fs::read_to_string(dir.path().join("corr.csv")).unwrap();
    assert_eq!(corr.lines().count(), 6);
    assert!(std::fs::read_to_string(dir.path().join("corr.svg")).unwrap().starts_with("<svg"));

    std::fs::write(dir.path().join("target.txt"), "s0000\ns0001\ns0002\n").unwrap();
    let ids: String = (0..80).map(|i| format!("s{i:04}\n")).collect();
    std::fs::write(dir.path().join("background.txt"), ids).unwrap();
    std::fs::write(
        dir.path().join("ann.tsv"),
        "term_id\tterm_name\tnamespace\tgene_id\nGO:1\talpha\tprocess\ts0000\nGO:1\talpha\tprocess\ts0005\n",
    )
    .unwrap();
    run_ok(&[
        "enrich", "--target", &p("target.txt"), "--background", &p("background.txt"),
        "--annotations", &p("ann.tsv"), "--namespace", "process", "--out", &p("enr.csv"),
    ]);
    let enr = std::fs::read_to_string(dir.path().join("enr.csv")).unwrap();
    assert!(enr.starts_with("term_id,term_name,namespace,k,K,n,N,p_value,q_value\n"));
}

#[test]
fn pipeline_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let config = serde_json::json!({
        "data": {"kind": "synth", "config": {
            "n_samples": 100, "n_features": 15, "n_informative": 5,
            "positive_fraction": 0.3, "class_separation": 1.5, "seed": 4
        }},
        "model": {"kind": "mlp", "hidden": [8], "train": {
            "epochs": 30, "batch_size": 16, "learning_rate": 0.05, "l2": 0.0, "seed": 2
        }},
        "split_seed": 9,
        "out_dir": out_dir,
    });
    let config_path = dir.path().join("run.json");
    std::fs::write(&config_path, serde_json::to_string(&config).unwrap()).unwrap();
    run_ok(&["pipeline", "--config", &config_path.display().to_string()]);
    for artifact in [
        "dataset.csv",
        "metrics.json",
        "model.json",
        "cluster_assignments.csv",
        "cluster_summary.json",
        "correlations.csv",
        "correlations.svg",
        "manifest.json",
    ] {
        assert!(out_dir.join(artifact).exists(), "missing {artifact}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let run = |args: &[&str]| exit_code(args);

    // 2: usage errors (unknown subcommand, missing flags, bad hyperparameters)
    assert_eq!(run(&["no-such-command"]), 2);
    assert_eq!(run(&["train"]), 2);
    Command::new(env!("CARGO_BIN_EXE_genephen"))
        .args([
            "synth", "--samples", "40", "--features", "6", "--informative", "2", "--seed", "1",
            "--out", &data.display().to_string(),
        ])
        .status()
        .unwrap();
    assert_eq!(
        run(&[
            "synth", "--samples", "10", "--features", "4", "--informative", "2",
            "--positive-fraction", "1.5", "--seed", "1", "--out",
            &dir.path().join("x.csv").display().to_string(),
        ]),
        2
    );

    // 3: data errors (missing file, malformed cell, missing column)
    assert_eq!(
        run(&["eval", "--data", "/nonexistent.csv", "--model", "/nonexistent.json"]),
        3
    );
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "id,f0,label\nr0,notanumber,1\n").unwrap();
    assert_eq!(
        run(&[
            "rank-features", "--data", &bad.display().to_string(), "--out",
            &dir.path().join("c.csv").display().to_string(),
        ]),
        3
    );
    assert_eq!(
        run(&[
            "rank-features", "--data", &data.display().to_string(), "--label-col", "missing",
            "--out", &dir.path().join("c.csv").display().to_string(),
        ]),
        3
    );

    // 4: numeric failure (training diverges to non-finite loss)
    assert_eq!(
        run(&[
            "train", "--data", &data.display().to_string(), "--model", "mlp", "--hidden", "8",
            "--learning-rate", "1e12", "--epochs", "50", "--seed", "1", "--out",
            &dir.path().join("m.json").display().to_string(),
        ]),
        4
    );
}
