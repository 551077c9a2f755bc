//! Single runs and (ε, τ̄) sweeps, with CSV output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use asyadmm::admm::{self, RunRecord};
use asyadmm::consensus::Topology;
use asyadmm::oracle::{centralized_solution, GroundTruth};
use asyadmm::problems::generate_ls;

use crate::config::ExperimentConfig;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub iterations: usize,
    pub final_objective: f64,
    pub oracle_objective: f64,
    pub relative_error: f64,
    pub max_node_err: f64,
    pub total_consensus_steps: u64,
    pub mean_consensus_steps: f64,
    pub cap_events: usize,
}

impl Summary {
    pub const CSV_HEADER: &'static str = "mode,epsilon,tau_bar,iterations,final_objective,\
oracle_objective,relative_error,max_node_err,total_consensus_steps,mean_consensus_steps,cap_events";

    fn from_record(record: &RunRecord, truth: &GroundTruth) -> Self {
        let last = record
            .iterations
            .last()
            .expect("a run records at least one iteration");
        let total = record.total_consensus_steps();
        Self {
            iterations: record.iterations.len(),
            final_objective: last.objective,
            oracle_objective: truth.objective,
            relative_error: (last.objective - truth.objective).abs() / truth.objective.abs(),
            max_node_err: last.max_node_err,
            total_consensus_steps: total,
            mean_consensus_steps: total as f64 / record.iterations.len() as f64,
            cap_events: record.cap_events(),
        }
    }

    pub fn to_csv(&self, cfg: &ExperimentConfig) -> String {
        format!(
            "{}\n{},{},{},{},{},{},{},{},{},{},{}\n",
            Self::CSV_HEADER,
            cfg.mode,
            cfg.epsilon,
            cfg.tau_bar,
            self.iterations,
            self.final_objective,
            self.oracle_objective,
            self.relative_error,
            self.max_node_err,
            self.total_consensus_steps,
            self.mean_consensus_steps,
            self.cap_events
        )
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub record: RunRecord,
    pub truth: GroundTruth,
    pub summary: Summary,
    pub diameter: usize,
    pub elapsed: Duration,
}

/// Builds the graph and instance described by `cfg`, solves it and compares
/// against the centralized optimum. Nothing is written to disk.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    cfg.validate()?;
    let graph = cfg.build_graph()?;
    let topology = Topology::new(graph)?;
    let instance = generate_ls(topology.node_count(), cfg.dim, cfg.rows, cfg.problem_seed())?;
    let truth = centralized_solution(&instance)?;
    let started = Instant::now();
    let record = admm::run(
        instance.costs(),
        &topology,
        &cfg.solver_config(),
        Some(&truth),
    )?;
    let elapsed = started.elapsed();
    let summary = Summary::from_record(&record, &truth);
    Ok(RunOutput {
        record,
        truth,
        summary,
        diameter: topology.diameter(),
        elapsed,
    })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Output {
        path: dir.to_path_buf(),
        source,
    })
}

/// Writes `run.csv`, `summary.csv`, `config.txt` and, with tracing on,
/// `trace.csv` into `cfg.out`.
pub fn run_once(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let output = execute(cfg)?;
    ensure_dir(&cfg.out)?;
    let mut run_csv = Vec::new();
    output
        .record
        .write_csv(&mut run_csv)
        .map_err(|source| CliError::Output {
            path: cfg.out.join("run.csv"),
            source,
        })?;
    write_file(&cfg.out.join("run.csv"), &run_csv)?;
    write_file(
        &cfg.out.join("summary.csv"),
        output.summary.to_csv(cfg).as_bytes(),
    )?;
    write_file(&cfg.out.join("config.txt"), cfg.to_text().as_bytes())?;
    if cfg.trace {
        let mut text = String::from("k,sender,receiver,kind\n");
        for r in &output.record.trace {
            let _ = writeln!(text, "{r}");
        }
        write_file(&cfg.out.join("trace.csv"), text.as_bytes())?;
    }
    Ok(output)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    pub tau_bar: u64,
    pub outcome: Result<Summary, String>,
}

pub const SWEEP_HEADER: &str =
    "epsilon,tau_bar,relative_error,mean_consensus_steps,cap_events,iterations,max_node_err,error";

impl SweepRow {
    pub fn to_csv_line(&self) -> String {
        match &self.outcome {
            Ok(s) => format!(
                "{},{},{},{},{},{},{},",
                self.epsilon,
                self.tau_bar,
                s.relative_error,
                s.mean_consensus_steps,
                s.cap_events,
                s.iterations,
                s.max_node_err
            ),
            Err(e) => format!(
                "{},{},,,,,,{}",
                self.epsilon,
                self.tau_bar,
                e.replace([',', '\n'], ";")
            ),
        }
    }
}

/// Runs every `(ε, τ̄)` cell on its own thread. Rows come back ordered by
/// ε (as listed) then τ̄ (as listed); a failing cell records its error and
/// the rest continue.
pub fn sweep(
    base: &ExperimentConfig,
    epsilons: &[f64],
    tau_bars: &[u64],
) -> Result<Vec<SweepRow>, CliError> {
    if epsilons.is_empty() || tau_bars.is_empty() {
        return Err(CliError::Config(
            "sweep needs at least one epsilon and one tau-bar".into(),
        ));
    }
    let cells: Vec<ExperimentConfig> = epsilons
        .iter()
        .flat_map(|&epsilon| {
            tau_bars.iter().map(move |&tau_bar| ExperimentConfig {
                epsilon,
                tau_bar,
                trace: false,
                ..base.clone()
            })
        })
        .collect();
    let rows = std::thread::scope(|scope| {
        let handles: Vec<_> = cells
            .iter()
            .map(|cfg| scope.spawn(move || execute(cfg).map(|o| o.summary)))
            .collect();
        handles
            .into_iter()
            .zip(&cells)
            .map(|(h, cfg)| SweepRow {
                epsilon: cfg.epsilon,
                tau_bar: cfg.tau_bar,
                outcome: h
                    .join()
                    .unwrap_or_else(|_| Err(CliError::Config("worker panicked".into())))
                    .map_err(|e| e.to_string()),
            })
            .collect()
    });
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = format!("{SWEEP_HEADER}\n");
    for r in rows {
        s.push_str(&r.to_csv_line());
        s.push('\n');
    }
    s
}

/// Writes `sweep.csv` and `config.txt` into `base.out`.
pub fn run_sweep(
    base: &ExperimentConfig,
    epsilons: &[f64],
    tau_bars: &[u64],
) -> Result<Vec<SweepRow>, CliError> {
    base.validate()?;
    let rows = sweep(base, epsilons, tau_bars)?;
    ensure_dir(&base.out)?;
    write_file(&base.out.join("sweep.csv"), sweep_csv(&rows).as_bytes())?;
    write_file(&base.out.join("config.txt"), base.to_text().as_bytes())?;
    Ok(rows)
}

/// Steps per outer iteration reported for the 600-node network, for side-by-side
/// printing only: `(ε, τ̄, steps)`, where 1000 is the step cap.
pub const REFERENCE_STEPS_N600: [(f64, u64, u64); 6] = [
    (0.1, 3, 9),
    (0.1, 5, 13),
    (0.1, 10, 23),
    (0.01, 3, 1000),
    (0.01, 5, 1000),
    (0.01, 10, 1000),
];
