use std::fs;
use std::path::Path;
use std::process::Command;

use asyadmm_cli::config::{ExperimentConfig, Mode, TopologySpec};
use asyadmm_cli::experiment::{execute, run_once, sweep, SweepRow};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_asyadmm"))
}

fn small(out: &Path) -> ExperimentConfig {
    ExperimentConfig {
        nodes: 8,
        edge_prob: 0.3,
        kmax: 40,
        out: out.to_path_buf(),
        ..ExperimentConfig::default()
    }
}

#[test]
fn missing_topology_file_exits_2_and_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no_such_graph.txt");
    let out = bin()
        .args(["run", "--topology"])
        .arg(format!("file:{}", missing.display()))
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no_such_graph.txt"), "{stderr}");
}

#[test]
fn invalid_flag_value_exits_2() {
    let out = bin().args(["run", "--epsilon", "-1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn binary_run_writes_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["run", "--nodes", "6", "--kmax", "20", "--trace", "--out"])
        .arg(dir.path())
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    for f in ["run.csv", "summary.csv", "config.txt", "trace.csv"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("k,sender,receiver,kind\n"));
}

#[test]
fn identical_config_gives_identical_csvs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_once(&small(a.path())).unwrap();
    run_once(&small(b.path())).unwrap();
    for f in ["run.csv", "summary.csv"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn baseline_gap_matches_near_exact_asynchronous_run() {
    let dir = tempfile::tempdir().unwrap();
    let base = ExperimentConfig {
        tau_bar: 0,
        epsilon: 1e-13,
        step_cap: 100_000,
        ..small(dir.path())
    };
    let asy = execute(&base).unwrap();
    let sync = execute(&ExperimentConfig {
        mode: Mode::SyncBaseline,
        ..base.clone()
    })
    .unwrap();
    assert_eq!(asy.record.iterations.len(), sync.record.iterations.len());
    for (a, s) in asy.record.iterations.iter().zip(&sync.record.iterations) {
        assert!(
            (a.gap - s.gap).abs() <= 1e-9,
            "k={}: {} vs {}",
            a.k,
            a.gap,
            s.gap
        );
    }
}

#[test]
fn singleton_sweep_equals_run_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path());
    let rows = sweep(&cfg, &[cfg.epsilon], &[cfg.tau_bar]).unwrap();
    assert_eq!(rows.len(), 1);
    let summary = run_once(&cfg).unwrap().summary;
    assert_eq!(
        rows[0],
        SweepRow {
            epsilon: cfg.epsilon,
            tau_bar: cfg.tau_bar,
            outcome: Ok(summary)
        }
    );
}

#[test]
fn sweep_grid_orders_rows_and_steps_grow_with_tau() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        nodes: 20,
        out: dir.path().to_path_buf(),
        ..ExperimentConfig::default()
    };
    let rows = sweep(&cfg, &[0.1, 0.01], &[3, 5, 10]).unwrap();
    assert_eq!(rows.len(), 6);
    let keys: Vec<_> = rows.iter().map(|r| (r.epsilon, r.tau_bar)).collect();
    assert_eq!(
        keys,
        [
            (0.1, 3),
            (0.1, 5),
            (0.1, 10),
            (0.01, 3),
            (0.01, 5),
            (0.01, 10)
        ]
    );
    for chunk in rows.chunks(3) {
        let steps: Vec<f64> = chunk
            .iter()
            .map(|r| r.outcome.as_ref().unwrap().mean_consensus_steps)
            .collect();
        assert!(steps.windows(2).all(|w| w[0] <= w[1]), "{steps:?}");
    }
}

#[test]
fn failing_cell_is_recorded_and_sweep_continues() {
    let dir = tempfile::tempdir().unwrap();
    let rows = sweep(&small(dir.path()), &[0.1, -1.0], &[3]).unwrap();
    assert!(rows[0].outcome.is_ok());
    assert!(rows[1].outcome.is_err());
    assert!(rows[1].to_csv_line().starts_with("-1,3,,"));
}

#[test]
fn empty_sweep_lists_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert!(sweep(&small(dir.path()), &[], &[3]).is_err());
}

#[test]
fn saved_config_reproduces_run() {
    let a = tempfile::tempdir().unwrap();
    let cfg = small(a.path());
    let first = run_once(&cfg).unwrap();
    let reloaded = ExperimentConfig::load(&a.path().join("config.txt")).unwrap();
    assert_eq!(reloaded, cfg);
    let second = execute(&reloaded).unwrap();
    assert_eq!(first.record, second.record);
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let graph_path = dir.path().join("g.txt");
    let g = bin()
        .args(["graph", "--nodes", "7", "--seed", "4", "--output"])
        .arg(&graph_path)
        .output()
        .unwrap()
        .status;
    assert!(g.success());
    let cfg_path = dir.path().join("cfg.txt");
    fs::write(
        &cfg_path,
        format!(
            "topology=file:{}\nkmax=15\nepsilon=0.05\n",
            graph_path.display()
        ),
    )
    .unwrap();
    let out = dir.path().join("o");
    let status = bin()
        .arg("run")
        .arg("--config")
        .arg(&cfg_path)
        .args(["--tau-bar", "1", "--out"])
        .arg(&out)
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let saved = ExperimentConfig::load(&out.join("config.txt")).unwrap();
    assert_eq!(saved.topology, TopologySpec::File(graph_path));
    assert_eq!((saved.kmax, saved.epsilon, saved.tau_bar), (15, 0.05, 1));
}

#[test]
fn csv_numeric_fields_are_finite() {
    let dir = tempfile::tempdir().unwrap();
    run_once(&small(dir.path())).unwrap();
    for f in ["run.csv", "summary.csv"] {
        let text = fs::read_to_string(dir.path().join(f)).unwrap();
        for line in text.lines().skip(1) {
            for field in line.split(',') {
                if let Ok(v) = field.parse::<f64>() {
                    assert!(v.is_finite(), "{f}: {line}");
                } else {
                    assert!(field == "asyadmm", "{f}: unexpected field {field:?}");
                }
            }
        }
    }
}

#[test]
fn instance_export_parses_back() {
    let out = bin()
        .args(["instance", "--nodes", "5", "--dim", "2", "--seed", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let inst = asyadmm::problems::LeastSquaresInstance::parse(&text).unwrap();
    assert_eq!((inst.node_count(), inst.dim(), inst.rows()), (5, 2, 2));
}
