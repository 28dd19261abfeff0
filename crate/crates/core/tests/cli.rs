use std::path::Path;

use scddq::cli::{gen_data, run, EXIT_OK, EXIT_USAGE};
use scddq::goal::default_goal_counts;

fn s(p: &Path) -> String {
    p.display().to_string()
}

fn small_config(dir: &Path, extra: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    let text = format!(
        r#"{{"method": "SC-DDQ", "schedule": "EMD", "seed": 1, "epochs": 4,
            "real_dialogs_per_epoch": 3, "planning_rounds": 1, "warm_start_dialogs": 5,
            "warm_start_batches": 2, "update_batches": 2, "eval_episodes": 5, "kb_size": 80,
            "write_checkpoints": true, "out_dir": "{}"{extra}}}"#,
        s(&dir.join("runs"))
    );
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn gen_data_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(gen_data(7, 991, &default_goal_counts(), &a).unwrap(), (61, 33, 43));
    assert_eq!(run(["scddq", "gen-data", "--out-dir", &s(&b)]), EXIT_OK);
    for f in ["kb.json", "goals.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
}

#[test]
fn train_writes_a_named_run_directory_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    assert_eq!(run(["scddq", "train", "--config", &s(&cfg)]), EXIT_OK);
    let run_dir = dir.path().join("runs/SC-DDQ_EMD_1");
    let eval = std::fs::read_to_string(run_dir.join("eval.csv")).unwrap();
    assert_eq!(eval.lines().count(), 1 + 4);
    assert!(eval.starts_with("run_id,checkpoint_epoch,success_rate,avg_turns"));
    let metrics = std::fs::read_to_string(run_dir.join("metrics.csv")).unwrap();
    assert!(metrics.starts_with(
        "run_id,method,schedule,seed,epoch,stage,train_success,mean_reward,dqn_loss,world_loss,curiosity_loss"
    ));
    let actions = std::fs::read_to_string(run_dir.join("actions.csv")).unwrap();
    assert_eq!(actions.lines().count(), 1 + 4 * 29);
    for e in [1, 2, 3, 4] {
        assert!(run_dir.join(format!("checkpoints/epoch_{e}/agent.json")).is_file());
    }

    assert_eq!(run(["scddq", "train", "--config", &s(&cfg)]), EXIT_OK);
    assert_eq!(std::fs::read_to_string(run_dir.join("eval.csv")).unwrap(), eval);

    let ckpt = run_dir.join("checkpoints/epoch_4/agent.json");
    assert_eq!(
        run(["scddq", "eval", "--config", &s(&cfg), "--checkpoint", &s(&ckpt), "--episodes", "5"]),
        EXIT_OK
    );
    assert_eq!(run(["scddq", "eval", "--config", &s(&cfg), "--rule", "--level", "easy"]), EXIT_OK);

    let report = dir.path().join("report");
    assert_eq!(
        run(["scddq", "report", "--runs", &s(&dir.path().join("runs")), "--out", &s(&report)]),
        EXIT_OK
    );
    let table4 = std::fs::read_to_string(report.join("table4.csv")).unwrap();
    assert_eq!(table4.lines().count(), 2);
    assert!(table4.lines().nth(1).unwrap().starts_with("SC-DDQ_EMD,"));
    let corr = std::fs::read_to_string(report.join("correlation.csv")).unwrap();
    assert_eq!(corr.lines().count(), 5);
    assert!(corr.lines().skip(1).all(|l| l.ends_with(",,1")));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), r#", "kb_path": "/definitely/missing.json""#);
    assert_eq!(run(["scddq", "train", "--config", &s(&cfg)]), EXIT_USAGE);
    let cfg = small_config(dir.path(), r#", "schedule": "RANDOM""#);
    assert_eq!(run(["scddq", "train", "--config", &s(&cfg)]), EXIT_USAGE);
    assert_eq!(run(["scddq", "train", "--config", "/definitely/missing.json"]), EXIT_USAGE);
}

#[test]
fn report_on_empty_dir_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run(["scddq", "report", "--runs", &s(dir.path()), "--out", &s(&dir.path().join("out"))]),
        EXIT_USAGE
    );
}

#[test]
fn empty_matrix_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("matrix.json");
    std::fs::write(&path, r#"{"methods": [], "seeds": [1]}"#).unwrap();
    assert_eq!(run(["scddq", "matrix", "--config", &s(&path)]), EXIT_OK);
}

#[test]
fn matrix_results_do_not_depend_on_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let mut evals = Vec::new();
    for jobs in ["1", "3"] {
        let out = dir.path().join(format!("j{jobs}"));
        let path = dir.path().join(format!("matrix{jobs}.json"));
        let text = format!(
            r#"{{"base": {{"epochs": 4, "real_dialogs_per_epoch": 2, "planning_rounds": 1,
                "warm_start_dialogs": 3, "warm_start_batches": 1, "update_batches": 1,
                "eval_episodes": 3, "kb_size": 80, "write_checkpoints": false, "out_dir": "{}"}},
                "methods": ["DQN", "S-DDQ"], "schedules": ["EMD", "DME"], "seeds": [1], "master_seed": 9}}"#,
            s(&out)
        );
        std::fs::write(&path, text).unwrap();
        assert_eq!(run(["scddq", "matrix", "--config", &s(&path), "--jobs", jobs]), EXIT_OK);
        let mut files: Vec<(String, String)> = std::fs::read_dir(&out)
            .unwrap()
            .map(|e| {
                let p = e.unwrap().path();
                (
                    p.file_name().unwrap().to_string_lossy().into_owned(),
                    std::fs::read_to_string(p.join("eval.csv")).unwrap(),
                )
            })
            .collect();
        files.sort();
        evals.push(files);
    }
    assert_eq!(evals[0].len(), 3);
    assert_eq!(evals[0], evals[1]);
}
