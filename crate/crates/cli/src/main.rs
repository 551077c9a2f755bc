use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use asyadmm::problems::generate_ls;
use asyadmm_cli::config::ExperimentConfig;
use asyadmm_cli::experiment::{run_once, run_sweep, REFERENCE_STEPS_N600};
use asyadmm_cli::CliError;

#[derive(Parser)]
#[command(
    name = "asyadmm",
    version,
    about = "Asynchronous distributed ADMM over digraphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and write run.csv, summary.csv and config.txt.
    Run(Common),
    /// Solve the same instance over a grid of epsilon and tau-bar values.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.01])]
        epsilons: Vec<f64>,
        #[arg(long = "tau-bars", value_delimiter = ',', default_values_t = [3, 5, 10])]
        tau_bars: Vec<u64>,
    },
    /// Write the communication graph as an edge list.
    Graph {
        #[command(flatten)]
        common: Common,
        /// Destination file; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write the least-squares instance in text form.
    Instance {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Default)]
struct Common {
    /// key=value file; explicit flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `random` or `file:<path>`.
    #[arg(long)]
    topology: Option<String>,
    #[arg(long)]
    nodes: Option<String>,
    #[arg(long = "edge-prob")]
    edge_prob: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    rows: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long = "tau-bar")]
    tau_bar: Option<String>,
    /// `uniform`, `per-link` or `zero`.
    #[arg(long)]
    delay: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    #[arg(long)]
    kmax: Option<String>,
    #[arg(long = "eps-abs")]
    eps_abs: Option<String>,
    #[arg(long = "eps-rel")]
    eps_rel: Option<String>,
    #[arg(long = "step-cap")]
    step_cap: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// `asyadmm` or `sync_baseline`.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    trace: bool,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let dim_given = self.dim.is_some();
        let flags = [
            ("topology", &self.topology),
            ("nodes", &self.nodes),
            ("edge-prob", &self.edge_prob),
            ("dim", &self.dim),
            ("rows", &self.rows),
            ("epsilon", &self.epsilon),
            ("tau-bar", &self.tau_bar),
            ("delay", &self.delay),
            ("rho", &self.rho),
            ("kmax", &self.kmax),
            ("eps-abs", &self.eps_abs),
            ("eps-rel", &self.eps_rel),
            ("step-cap", &self.step_cap),
            ("seed", &self.seed),
            ("mode", &self.mode),
            ("out", &self.out),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if dim_given && self.rows.is_none() {
            cfg.rows = cfg.dim;
        }
        if self.trace {
            cfg.trace = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Output {
            path: path.clone(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(common) => {
            let cfg = common.resolve()?;
            let out = run_once(&cfg)?;
            let s = &out.summary;
            println!(
                "iterations={} relative_error={:.3e} max_node_err={:.3e} mean_consensus_steps={:.1} cap_events={}",
                s.iterations, s.relative_error, s.max_node_err, s.mean_consensus_steps, s.cap_events
            );
            println!("wrote {}", cfg.out.display());
            eprintln!("runtime {:.3}s", out.elapsed.as_secs_f64());
        }
        Command::Sweep {
            common,
            epsilons,
            tau_bars,
        } => {
            let cfg = common.resolve()?;
            let rows = run_sweep(&cfg, &epsilons, &tau_bars)?;
            println!("epsilon tau_bar mean_steps cap_events relative_error | steps at n=600");
            for r in &rows {
                let reference = REFERENCE_STEPS_N600
                    .iter()
                    .find(|(e, t, _)| *e == r.epsilon && *t == r.tau_bar)
                    .map_or_else(|| "-".to_string(), |(_, _, s)| s.to_string());
                match &r.outcome {
                    Ok(s) => println!(
                        "{} {} {:.1} {} {:.3e} | {}",
                        r.epsilon,
                        r.tau_bar,
                        s.mean_consensus_steps,
                        s.cap_events,
                        s.relative_error,
                        reference
                    ),
                    Err(e) => println!("{} {} failed: {e} | {}", r.epsilon, r.tau_bar, reference),
                }
            }
            println!("wrote {}", cfg.out.join("sweep.csv").display());
        }
        Command::Graph { common, output } => {
            let cfg = common.resolve()?;
            emit(&cfg.build_graph()?.to_edge_list(), output.as_ref())?;
        }
        Command::Instance { common, output } => {
            let cfg = common.resolve()?;
            let n = cfg.build_graph()?.node_count();
            let inst = generate_ls(n, cfg.dim, cfg.rows, cfg.problem_seed())?;
            emit(&inst.to_text(), output.as_ref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
