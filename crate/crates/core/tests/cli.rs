use std::path::Path;
use std::process::Command;

use rnn_dynamics::experiment::{cmd_eval, cmd_generate, cmd_train, Experiment, ExperimentConfig};
use rnn_dynamics::rnn::rmse;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rnn-dynamics"));
    c.env("RUST_LOG", "error");
    c
}

fn code(c: &mut Command) -> i32 {
    c.output().unwrap().status.code().unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(bin().arg("--help")), 0);
    assert_eq!(code(bin().arg("frobnicate")), 1);
    assert_eq!(code(bin().args(["generate", "weather"])), 1);
    assert_eq!(code(bin().args(["--out", out, "train", "lorenz", "--desk"])), 2);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "version = 1\nexperiment = \"lorenz\"\n").unwrap();
    assert_eq!(code(bin().args(["--config", bad.to_str().unwrap(), "generate"])), 1);

    // a learning rate this large overflows the network on the first epoch
    let mut cfg = ExperimentConfig::desk(Experiment::Swarm);
    cfg.rnn.learning_rate = 1e6;
    cfg.rnn.max_epochs = 3;
    cfg.rnn.hidden_activation = rnn_dynamics::rnn::Activation::Relu;
    cfg.output_dir = dir.path().join("diverge");
    let path = dir.path().join("diverge.toml");
    cfg.save(&path).unwrap();
    assert_eq!(code(bin().args(["--config", path.to_str().unwrap(), "generate"])), 0);
    assert_eq!(code(bin().args(["--config", path.to_str().unwrap(), "train"])), 3);
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn generate_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for (exp, args) in [("lorenz", vec!["--eta", "5"]), ("swarm", vec!["--sigma", "0.4"]), ("hydro", vec![])] {
        let mut files = Vec::new();
        for run in ["a", "b"] {
            let out = dir.path().join(format!("{exp}-{run}"));
            let st = bin()
                .args(["--desk", "--out", out.to_str().unwrap(), "generate", exp])
                .args(&args)
                .output()
                .unwrap();
            assert!(st.status.success());
            let mut names: Vec<_> = std::fs::read_dir(out.join("data")).unwrap().map(|e| e.unwrap().path()).collect();
            names.sort();
            files.push(names);
        }
        assert_eq!(files[0].len(), files[1].len());
        for (a, b) in files[0].iter().zip(&files[1]) {
            if a.file_name().unwrap() == "manifest.json" || a.file_name().unwrap() == "config.toml" {
                continue; // these echo the output directory
            }
            assert_eq!(read(a), read(b), "{}", a.display());
        }
        let names: Vec<_> = files[0].iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
        assert!(names.contains(&"manifest.json".to_string()), "{names:?}");
    }
}

#[test]
fn train_report_is_recomputable_and_eval_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::desk(Experiment::Lorenz);
    {
        let s = cfg.lorenz.as_mut().unwrap();
        s.n_orbits = 6;
        s.n_train = 4;
        s.system.steps = 40;
    }
    cfg.rnn.seq_len = 40;
    cfg.rnn.hidden_size = 6;
    cfg.rnn.max_epochs = 15;
    cfg.output_dir = dir.path().join("run");
    let cfg_path = dir.path().join("cfg.toml");
    cfg.save(&cfg_path).unwrap();
    let c = cfg_path.to_str().unwrap();
    assert_eq!(code(bin().args(["--config", c, "generate"])), 0);
    assert_eq!(code(bin().args(["--config", c, "train"])), 0);
    let report = cfg.output_dir.join("report.json");
    let out = bin().args(["verify-report", report.to_str().unwrap()]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));

    // re-running from the report's config echo reproduces the report up to timing
    let first = rnn_dynamics::experiment::RunReport::load(&report).unwrap();
    let again = cmd_train(&first.config, &cfg.output_dir.join("data"), &dir.path().join("again")).unwrap();
    assert_eq!(again.loss_history, first.loss_history);
    assert_eq!((again.train_rmse, again.test_rmse), (first.train_rmse, first.test_rmse));

    let summary = cmd_eval(&cfg, &cfg.output_dir.join("checkpoint.json"), &cfg.output_dir.join("data"), &dir.path().join("eval")).unwrap();
    assert_eq!(summary.rows[0].2, first.test_rmse);

    // tampering with a prediction is caught
    let preds = cfg.output_dir.join("predictions_test.csv");
    let text = std::fs::read_to_string(&preds).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[5] = {
        let mut f: Vec<&str> = lines[5].split(',').collect();
        f[2] = "1.0e3";
        f.join(",")
    };
    std::fs::write(&preds, lines.join("\n") + "\n").unwrap();
    assert_eq!(code(bin().args(["verify-report", report.to_str().unwrap()])), 2);
}

#[test]
fn labels_as_predictions_score_zero() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::desk(Experiment::Swarm);
    cfg.swarm.as_mut().unwrap().simulation.n_agents = 4;
    cfg.swarm.as_mut().unwrap().n_train = 3;
    cmd_generate(&cfg, dir.path()).unwrap();
    let clean = rnn_dynamics::experiment::read_trajectories(&dir.path().join("trajectories_clean.csv")).unwrap();
    assert_eq!(rmse(&clean.seqs, &clean.seqs).unwrap(), 0.0);
}
