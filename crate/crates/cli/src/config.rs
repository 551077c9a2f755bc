//! Experiment configuration: a flat `key=value` file whose keys are the
//! command-line flag names without the leading dashes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use asyadmm::admm::{SolverConfig, ZUpdate};
use asyadmm::digraph::{random_strongly_connected, Digraph};
use asyadmm::netsim::DelayDistribution;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum TopologySpec {
    Random,
    File(PathBuf),
}

impl FromStr for TopologySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(TopologySpec::Random),
            _ => s
                .strip_prefix("file:")
                .filter(|p| !p.is_empty())
                .map(|p| TopologySpec::File(PathBuf::from(p)))
                .ok_or_else(|| format!("topology must be `random` or `file:<path>`, got {s:?}")),
        }
    }
}

impl std::fmt::Display for TopologySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TopologySpec::Random => f.write_str("random"),
            TopologySpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    AsyAdmm,
    SyncBaseline,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "asyadmm" => Ok(Mode::AsyAdmm),
            "sync_baseline" => Ok(Mode::SyncBaseline),
            _ => Err(format!(
                "mode must be `asyadmm` or `sync_baseline`, got {s:?}"
            )),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::AsyAdmm => "asyadmm",
            Mode::SyncBaseline => "sync_baseline",
        })
    }
}

pub fn parse_delay(s: &str) -> Result<DelayDistribution, String> {
    match s {
        "uniform" => Ok(DelayDistribution::Uniform),
        "per-link" => Ok(DelayDistribution::PerLink),
        "zero" => Ok(DelayDistribution::Zero),
        _ => Err(format!(
            "delay must be `uniform`, `per-link` or `zero`, got {s:?}"
        )),
    }
}

fn delay_name(d: DelayDistribution) -> &'static str {
    match d {
        DelayDistribution::Uniform => "uniform",
        DelayDistribution::PerLink => "per-link",
        DelayDistribution::Zero => "zero",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub topology: TopologySpec,
    pub nodes: usize,
    pub edge_prob: f64,
    pub dim: usize,
    pub rows: usize,
    pub epsilon: f64,
    pub tau_bar: u64,
    pub delay: DelayDistribution,
    pub rho: f64,
    pub kmax: usize,
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub step_cap: u64,
    pub seed: u64,
    pub mode: Mode,
    pub out: PathBuf,
    pub trace: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            topology: TopologySpec::Random,
            nodes: 20,
            edge_prob: 0.2,
            dim: 3,
            rows: 3,
            epsilon: 0.1,
            tau_bar: 3,
            delay: DelayDistribution::Uniform,
            rho: 1.0,
            kmax: 200,
            eps_abs: 1e-4,
            eps_rel: 1e-2,
            step_cap: 1000,
            seed: 1,
            mode: Mode::AsyAdmm,
            out: PathBuf::from("out"),
            trace: false,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::Config(format!("{key}: {e}")))
}

impl ExperimentConfig {
    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "topology" => self.topology = value.parse().map_err(CliError::Config)?,
            "nodes" => self.nodes = parse_value(key, value)?,
            "edge-prob" => self.edge_prob = parse_value(key, value)?,
            "dim" => self.dim = parse_value(key, value)?,
            "rows" => self.rows = parse_value(key, value)?,
            "epsilon" => self.epsilon = parse_value(key, value)?,
            "tau-bar" => self.tau_bar = parse_value(key, value)?,
            "delay" => self.delay = parse_delay(value).map_err(CliError::Config)?,
            "rho" => self.rho = parse_value(key, value)?,
            "kmax" => self.kmax = parse_value(key, value)?,
            "eps-abs" => self.eps_abs = parse_value(key, value)?,
            "eps-rel" => self.eps_rel = parse_value(key, value)?,
            "step-cap" => self.step_cap = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "mode" => self.mode = value.parse().map_err(CliError::Config)?,
            "out" => self.out = PathBuf::from(value),
            "trace" => self.trace = parse_value(key, value)?,
            _ => return Err(CliError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        let mut rows_given = false;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected key=value, got {line:?}", i + 1))
            })?;
            let key = key.trim();
            rows_given |= key == "rows";
            cfg.set(key, value.trim())?;
        }
        if !rows_given {
            cfg.rows = cfg.dim;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Input {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k}={v}");
        };
        kv("topology", self.topology.to_string());
        kv("nodes", self.nodes.to_string());
        kv("edge-prob", self.edge_prob.to_string());
        kv("dim", self.dim.to_string());
        kv("rows", self.rows.to_string());
        kv("epsilon", self.epsilon.to_string());
        kv("tau-bar", self.tau_bar.to_string());
        kv("delay", delay_name(self.delay).to_string());
        kv("rho", self.rho.to_string());
        kv("kmax", self.kmax.to_string());
        kv("eps-abs", self.eps_abs.to_string());
        kv("eps-rel", self.eps_rel.to_string());
        kv("step-cap", self.step_cap.to_string());
        kv("seed", self.seed.to_string());
        kv("mode", self.mode.to_string());
        kv("out", self.out.display().to_string());
        kv("trace", self.trace.to_string());
        s
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.topology == TopologySpec::Random && self.nodes < 2 {
            return bad(format!("nodes must be at least 2, got {}", self.nodes));
        }
        if !(0.0..=1.0).contains(&self.edge_prob) {
            return bad(format!(
                "edge-prob must lie in [0, 1], got {}",
                self.edge_prob
            ));
        }
        if self.dim == 0 || self.rows == 0 {
            return bad("dim and rows must be positive".into());
        }
        if (self.epsilon.is_nan() || self.epsilon <= 0.0) && self.mode == Mode::AsyAdmm {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.rho.is_nan() || self.rho <= 0.0 {
            return bad(format!("rho must be positive, got {}", self.rho));
        }
        if self.kmax == 0 {
            return bad("kmax must be at least 1".into());
        }
        if !(self.eps_abs >= 0.0 && self.eps_rel >= 0.0) {
            return bad("eps-abs and eps-rel must be nonnegative".into());
        }
        Ok(())
    }

    pub fn graph_seed(&self) -> u64 {
        self.seed
    }

    pub fn problem_seed(&self) -> u64 {
        self.seed.wrapping_add(1)
    }

    pub fn solver_seed(&self) -> u64 {
        self.seed.wrapping_add(2)
    }

    pub fn build_graph(&self) -> Result<Digraph, CliError> {
        match &self.topology {
            TopologySpec::Random => Ok(random_strongly_connected(
                self.nodes,
                self.edge_prob,
                self.graph_seed(),
            )?),
            TopologySpec::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Input {
                    path: path.clone(),
                    source,
                })?;
                Digraph::parse_edge_list(&text)
                    .map_err(|e| CliError::Config(format!("topology file {}: {e}", path.display())))
            }
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let baseline = self.mode == Mode::SyncBaseline;
        SolverConfig {
            rho: self.rho,
            epsilon: self.epsilon,
            tau_bar: if baseline { 0 } else { self.tau_bar },
            delay: if baseline {
                DelayDistribution::Zero
            } else {
                self.delay
            },
            k_max: self.kmax,
            eps_abs: self.eps_abs,
            eps_rel: self.eps_rel,
            step_cap: self.step_cap,
            seed: self.solver_seed(),
            z_update: if baseline {
                ZUpdate::ExactAverage
            } else {
                ZUpdate::Consensus
            },
            trace: self.trace && !baseline,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let cfg = ExperimentConfig {
            topology: TopologySpec::File("graphs/g.txt".into()),
            epsilon: 0.01,
            tau_bar: 10,
            eps_abs: 3e-7,
            delay: DelayDistribution::PerLink,
            mode: Mode::SyncBaseline,
            trace: true,
            ..ExperimentConfig::default()
        };
        assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn rows_default_to_dim() {
        let cfg = ExperimentConfig::parse("dim=5\n# comment\n\nseed = 9\n").unwrap();
        assert_eq!((cfg.dim, cfg.rows, cfg.seed), (5, 5, 9));
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(ExperimentConfig::parse("colour=blue").is_err());
        assert!(ExperimentConfig::parse("nodes").is_err());
        assert!(ExperimentConfig::parse("nodes=abc").is_err());
        assert!(ExperimentConfig::parse("topology=grid").is_err());
        assert!(ExperimentConfig::parse("mode=fast").is_err());
    }

    #[test]
    fn validation() {
        assert!(ExperimentConfig::default().validate().is_ok());
        let bad = [
            ExperimentConfig {
                nodes: 1,
                ..Default::default()
            },
            ExperimentConfig {
                edge_prob: 2.0,
                ..Default::default()
            },
            ExperimentConfig {
                epsilon: 0.0,
                ..Default::default()
            },
            ExperimentConfig {
                rho: -1.0,
                ..Default::default()
            },
            ExperimentConfig {
                kmax: 0,
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn baseline_forces_synchronous_exact_average() {
        let cfg = ExperimentConfig {
            mode: Mode::SyncBaseline,
            ..Default::default()
        };
        let s = cfg.solver_config();
        assert_eq!(s.tau_bar, 0);
        assert_eq!(s.z_update, ZUpdate::ExactAverage);
    }
}
