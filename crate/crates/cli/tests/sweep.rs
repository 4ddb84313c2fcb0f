use std::path::Path;
use std::process::Command;

use betadqn_cli::config::{ExperimentConfig, RESOLVED_CONFIG};
use betadqn_cli::output::{list_runs, read_metrics};
use betadqn_cli::report::{aggregate, eval_points, mean_stderr, report_dir};
use betadqn_cli::run::run_sweep;

fn config(dir: &Path, agents: &str) -> String {
    format!(
        r#"
output_dir = "{}"

[env]
kind = "cliffwalk"

[agent]
total_steps = 4000
eval_period = 1000
eval_episodes = 3

[sweep]
agents = [{agents}]
seeds = [0, 1]
workers = 2
"#,
        dir.display()
    )
}

fn csv_text(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn sweep_writes_runs_report_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        let cfg: ExperimentConfig = config(dir, r#""beta-dqn", "dqn""#).parse().unwrap();
        let outcome = run_sweep(&cfg).unwrap();
        assert!(outcome.ok(), "{:?}", outcome.failures);
        assert_eq!(outcome.written.len(), 4);
    }

    let runs = list_runs(&a).unwrap();
    assert_eq!(runs.len(), 4);
    for f in &runs {
        let name = f.path.file_name().unwrap();
        assert_eq!(csv_text(&f.path), csv_text(&b.join(name)), "{name:?}");
        assert_eq!(csv_text(&f.visits_path()), csv_text(&b.join(f.visits_path().file_name().unwrap())));
    }

    let rep = report_dir(&a);
    for name in ["aggregate.csv", "summary.csv", "beta-dqn_heatmap_mean.csv", "beta-dqn_seed0_selection.csv"] {
        assert!(rep.join(name).exists(), "{name}");
    }
    let heat = csv_text(&rep.join("dqn_seed1_heatmap.csv"));
    let lines: Vec<&str> = heat.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines.iter().all(|l| l.split(',').count() == 12));

    // Recompute the aggregate from the raw files.
    let loaded: Vec<_> = runs.iter().map(|f| (f.clone(), read_metrics(&f.path).unwrap())).collect();
    let agg = aggregate(&loaded).unwrap();
    let mut rdr = csv::Reader::from_path(rep.join("aggregate.csv")).unwrap();
    let written: Vec<betadqn_cli::report::CheckpointStat> = rdr.deserialize().map(|r| r.unwrap()).collect();
    assert_eq!(written, agg.checkpoints);
    for stat in &agg.checkpoints {
        let returns: Vec<f64> = loaded
            .iter()
            .filter(|(f, _)| f.agent == stat.agent)
            .map(|(_, rows)| eval_points(rows).into_iter().find(|p| p.0 == stat.step).unwrap().1)
            .collect();
        let (m, se) = mean_stderr(&returns);
        assert!((m - stat.return_mean).abs() < 1e-12 && (se - stat.return_stderr).abs() < 1e-12);
    }

    let resolved = ExperimentConfig::load(&a.join(RESOLVED_CONFIG)).unwrap();
    assert_eq!(resolved, config(&a, r#""beta-dqn", "dqn""#).parse().unwrap());
}

#[test]
fn constant_values_have_zero_stderr() {
    assert_eq!(mean_stderr(&[0.7; 5]), (0.7, 0.0));
    let (m, se) = mean_stderr(&[1.0, 3.0]);
    assert_eq!(m, 2.0);
    assert!((se - 1.0).abs() < 1e-12);
}

#[test]
fn binary_rejects_unknown_agent() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.toml");
    std::fs::write(&path, config(&tmp.path().join("out"), r#""beta-dqn", "ppo""#)).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_betadqn")).arg("run").arg(&path).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("ppo"));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn binary_runs_and_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let path = tmp.path().join("ok.toml");
    std::fs::write(&path, config(&out_dir, r#""ez-greedy""#)).unwrap();
    let bin = env!("CARGO_BIN_EXE_betadqn");
    let run = Command::new(bin).arg("run").arg(&path).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(out_dir.join("ez-greedy_seed0.csv").exists());
    std::fs::remove_dir_all(report_dir(&out_dir)).unwrap();
    let rep = Command::new(bin).arg("report").arg(&out_dir).output().unwrap();
    assert!(rep.status.success());
    assert!(report_dir(&out_dir).join("summary.csv").exists());
}
