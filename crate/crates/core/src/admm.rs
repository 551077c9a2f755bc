//! Asynchronous approximate distributed ADMM.
//!
//! Each outer iteration is a barrier-separated triple of per-node updates:
//!
//! 1. `x_i ← argmin f_i(x) + λ_iᵀx + (ρ/2)‖x − z_i‖²` (local),
//! 2. `z_i ←` terminating ratio consensus on `x_i + λ_i/ρ` (networked,
//!    approximate projection onto `{‖z_i − z_j‖ ≤ ε}`),
//! 3. `λ_i ← λ_i + ρ(x_i − z_i)` (local).
//!
//! The next iteration starts only once every node has terminated the
//! consensus instance of the current one.

use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::consensus::{
    drive, max_pairwise_spread, AsyncConsensus, ConsensusOutcome, TerminationParams, Topology,
};
use crate::netsim::{DelayDistribution, DelayModel, TraceRecord};
use crate::oracle::{exact_average, GroundTruth};
use crate::problems::CostFunction;
use crate::{Error, Result, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub x: Vector,
    pub z: Vector,
    pub lambda: Vector,
}

/// How `z` is formed from `x_i + λ_i/ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZUpdate {
    /// Terminating asynchronous ratio consensus.
    Consensus,
    /// Idealized exact average at every node (synchronous reference).
    ExactAverage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub rho: f64,
    pub epsilon: f64,
    pub tau_bar: u64,
    pub delay: DelayDistribution,
    pub k_max: usize,
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub step_cap: u64,
    pub seed: u64,
    pub z_update: ZUpdate,
    pub trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rho: 1.0,
            epsilon: 0.1,
            tau_bar: 3,
            delay: DelayDistribution::Uniform,
            k_max: 200,
            eps_abs: 1e-4,
            eps_rel: 1e-2,
            step_cap: 1000,
            seed: 0,
            z_update: ZUpdate::Consensus,
            trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad(format!("rho must be positive, got {}", self.rho));
        }
        if self.z_update == ZUpdate::Consensus && (self.epsilon.is_nan() || self.epsilon <= 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.k_max == 0 {
            return bad("k_max must be at least 1".into());
        }
        if !(self.eps_abs >= 0.0 && self.eps_rel >= 0.0) {
            return bad("stopping tolerances must be nonnegative".into());
        }
        Ok(())
    }
}

/// Diagnostics of one outer iteration `k ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    /// `F(X^k)`.
    pub objective: f64,
    /// `‖X^k − z^k‖`.
    pub primal_res: f64,
    /// `ρ‖z^k − z^{k−1}‖`.
    pub dual_res: f64,
    pub consensus_steps: u64,
    pub consensus_converged: bool,
    /// Largest pairwise `‖z_i − z_j‖` after the z-update.
    pub z_spread: f64,
    /// `L(X̄^k, z̄^k, λ*) − L*`; NaN without a reference solution.
    pub gap: f64,
    /// `max_i ‖x_i^k − x*‖`; NaN without a reference solution.
    pub max_node_err: f64,
}

/// Iterates `X^s, z^s, λ^s` for `s = 0..=K`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub x: Vec<Vec<Vector>>,
    pub z: Vec<Vec<Vector>>,
    pub lambda: Vec<Vec<Vector>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub iterations: Vec<IterationRecord>,
    pub trajectory: Trajectory,
    /// True when the primal/dual stopping test fired before `k_max`.
    pub stopped: bool,
    /// Deliveries across all consensus instances, on one continuous clock.
    pub trace: Vec<TraceRecord>,
}

impl RunRecord {
    pub fn final_states(&self) -> Vec<NodeState> {
        let t = &self.trajectory;
        let last = t.x.len() - 1;
        (0..t.x[last].len())
            .map(|i| NodeState {
                x: t.x[last][i].clone(),
                z: t.z[last][i].clone(),
                lambda: t.lambda[last][i].clone(),
            })
            .collect()
    }

    pub fn total_consensus_steps(&self) -> u64 {
        self.iterations.iter().map(|r| r.consensus_steps).sum()
    }

    pub fn cap_events(&self) -> usize {
        self.iterations
            .iter()
            .filter(|r| !r.consensus_converged)
            .count()
    }

    pub const CSV_HEADER: &'static str =
        "k,objective,primal_res,dual_res,consensus_steps,gap,max_node_err";

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for r in &self.iterations {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.k,
                r.objective,
                r.primal_res,
                r.dual_res,
                r.consensus_steps,
                r.gap,
                r.max_node_err
            )?;
        }
        Ok(())
    }
}

pub fn x_update<C: CostFunction>(
    cost: &C,
    lambda: &Vector,
    z: &Vector,
    rho: f64,
) -> Result<Vector> {
    cost.x_update(lambda, z, rho)
}

/// Approximate projection: every node starts consensus from
/// `x_i^{k+1} + λ_i^k/ρ`.
pub fn z_update(
    topology: &Topology,
    delays: &mut DelayModel,
    y0: &[Vector],
    params: TerminationParams,
) -> Result<ConsensusOutcome> {
    crate::consensus::run_terminating_consensus(topology, delays, y0, params)
}

pub fn lambda_update(lambda: &Vector, x: &Vector, z: &Vector, rho: f64) -> Vector {
    lambda + (x - z) * rho
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub primal_tol: f64,
    pub dual_tol: f64,
}

impl Residuals {
    pub fn satisfied(&self) -> bool {
        self.primal <= self.primal_tol && self.dual <= self.dual_tol
    }
}

fn stacked_norm<'a, I: IntoIterator<Item = &'a Vector>>(blocks: I) -> f64 {
    blocks
        .into_iter()
        .map(Vector::norm_squared)
        .sum::<f64>()
        .sqrt()
}

fn stacked_diff_norm(a: &[Vector], b: &[Vector]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v).norm_squared())
        .sum::<f64>()
        .sqrt()
}

/// Primal and dual residuals with their mixed absolute/relative thresholds.
pub fn residuals(states: &[NodeState], prev_z: &[Vector], cfg: &SolverConfig) -> Residuals {
    let n = states.len();
    let p = states.first().map_or(0, |s| s.x.len());
    let scale = ((n * p) as f64).sqrt() * cfg.eps_abs;
    let x: Vec<Vector> = states.iter().map(|s| s.x.clone()).collect();
    let z: Vec<Vector> = states.iter().map(|s| s.z.clone()).collect();
    let primal = stacked_diff_norm(&x, &z);
    let dual = cfg.rho * stacked_diff_norm(&z, prev_z);
    let x_norm = stacked_norm(&x);
    let z_norm = stacked_norm(&z);
    let lambda_norm = stacked_norm(states.iter().map(|s| &s.lambda));
    Residuals {
        primal,
        dual,
        primal_tol: scale + cfg.eps_rel * x_norm.max(z_norm),
        dual_tol: scale + cfg.eps_rel * lambda_norm,
    }
}

pub fn stopping_criterion(states: &[NodeState], prev_z: &[Vector], cfg: &SolverConfig) -> bool {
    residuals(states, prev_z, cfg).satisfied()
}

/// i.i.d. standard normal `x⁰, z⁰, λ⁰`, node by node.
pub fn initial_states(n: usize, p: usize, seed: u64) -> Vec<NodeState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || Vector::from_fn(p, |_, _| StandardNormal.sample(&mut rng));
    (0..n)
        .map(|_| NodeState {
            x: draw(),
            z: draw(),
            lambda: draw(),
        })
        .collect()
}

fn delay_seed(seed: u64) -> u64 {
    seed ^ 0xd1b5_4a32_d192_ed03
}

/// Running ergodic sums for the Lagrangian gap.
struct GapTracker<'a, C> {
    costs: &'a [C],
    reference: &'a GroundTruth,
    sum_x: Vec<Vector>,
    sum_z: Vec<Vector>,
    count: usize,
}

impl<'a, C: CostFunction> GapTracker<'a, C> {
    fn new(costs: &'a [C], reference: &'a GroundTruth, p: usize) -> Self {
        Self {
            costs,
            reference,
            sum_x: vec![Vector::zeros(p); costs.len()],
            sum_z: vec![Vector::zeros(p); costs.len()],
            count: 0,
        }
    }

    fn push(&mut self, x: &[Vector], z: &[Vector]) -> f64 {
        for (acc, v) in self.sum_x.iter_mut().zip(x) {
            *acc += v;
        }
        for (acc, v) in self.sum_z.iter_mut().zip(z) {
            *acc += v;
        }
        self.count += 1;
        let k = self.count as f64;
        let xbar: Vec<Vector> = self.sum_x.iter().map(|s| s / k).collect();
        let zbar: Vec<Vector> = self.sum_z.iter().map(|s| s / k).collect();
        lagrangian_gap(self.costs, &xbar, &zbar, self.reference)
    }
}

/// `L(X, z, λ*) − L(X*, z*, λ*)` with `L = F(X) + λ*ᵀ(X − z)`; the indicator
/// of the consensus set is taken as zero.
pub fn lagrangian_gap<C: CostFunction>(
    costs: &[C],
    x: &[Vector],
    z: &[Vector],
    reference: &GroundTruth,
) -> f64 {
    let f: f64 = costs.iter().zip(x).map(|(c, xi)| c.eval(xi)).sum();
    let coupling: f64 = reference
        .lambda_star
        .iter()
        .zip(x.iter().zip(z))
        .map(|(l, (xi, zi))| l.dot(&(xi - zi)))
        .sum();
    f + coupling - reference.objective
}

/// Runs the solver from seeded random initial values. With a `reference`
/// the Lagrangian gap and per-node error columns are filled in.
pub fn run<C: CostFunction>(
    costs: &[C],
    topology: &Topology,
    cfg: &SolverConfig,
    reference: Option<&GroundTruth>,
) -> Result<RunRecord> {
    cfg.validate()?;
    let n = topology.node_count();
    if costs.len() != n {
        return Err(Error::Dimension(format!(
            "{} local costs for {n} nodes",
            costs.len()
        )));
    }
    let p = costs[0].dim();
    if costs.iter().any(|c| c.dim() != p) {
        return Err(Error::Dimension("local costs differ in dimension".into()));
    }
    if let Some(gt) = reference {
        if gt.x_star.len() != p || gt.lambda_star.len() != n {
            return Err(Error::Dimension("reference solution".into()));
        }
    }

    let mut states = initial_states(n, p, cfg.seed);
    let mut delays = DelayModel::new(cfg.tau_bar, cfg.delay, delay_seed(cfg.seed));
    let params = TerminationParams {
        epsilon: cfg.epsilon,
        step_cap: cfg.step_cap,
    };
    let mut trajectory = Trajectory::default();
    let snapshot = |states: &[NodeState], t: &mut Trajectory| {
        t.x.push(states.iter().map(|s| s.x.clone()).collect());
        t.z.push(states.iter().map(|s| s.z.clone()).collect());
        t.lambda
            .push(states.iter().map(|s| s.lambda.clone()).collect());
    };
    snapshot(&states, &mut trajectory);
    let mut gap = reference.map(|gt| GapTracker::new(costs, gt, p));
    let mut iterations = Vec::with_capacity(cfg.k_max);
    let mut trace = Vec::new();
    let mut clock = 0u64;
    let mut stopped = false;

    for k in 1..=cfg.k_max {
        for (s, c) in states.iter_mut().zip(costs) {
            s.x = x_update(c, &s.lambda, &s.z, cfg.rho)?;
        }
        let y0: Vec<Vector> = states.iter().map(|s| &s.x + &s.lambda / cfg.rho).collect();
        let outcome = match cfg.z_update {
            ZUpdate::ExactAverage => ConsensusOutcome {
                z: vec![exact_average(&y0); n],
                steps: 0,
                converged: true,
                checks: Vec::new(),
            },
            ZUpdate::Consensus if cfg.trace => {
                let mut sim = AsyncConsensus::with_trace(topology, &mut delays, &y0, clock)?;
                let out = drive(&mut sim, params)?;
                trace.extend(sim.take_trace());
                out
            }
            ZUpdate::Consensus => z_update(topology, &mut delays, &y0, params)?,
        };
        clock += outcome.steps;
        let prev_z: Vec<Vector> = states.iter().map(|s| s.z.clone()).collect();
        for (s, z) in states.iter_mut().zip(outcome.z.iter()) {
            s.z = z.clone();
            s.lambda = lambda_update(&s.lambda, &s.x, &s.z, cfg.rho);
        }
        snapshot(&states, &mut trajectory);

        let res = residuals(&states, &prev_z, cfg);
        let xs = trajectory.x.last().map(Vec::as_slice).unwrap_or_default();
        let zs = trajectory.z.last().map(Vec::as_slice).unwrap_or_default();
        let (gap_k, err_k) = match (&mut gap, reference) {
            (Some(tracker), Some(gt)) => (
                tracker.push(xs, zs),
                xs.iter()
                    .map(|x| (x - &gt.x_star).norm())
                    .fold(0.0, f64::max),
            ),
            _ => (f64::NAN, f64::NAN),
        };
        iterations.push(IterationRecord {
            k,
            objective: costs.iter().zip(xs).map(|(c, x)| c.eval(x)).sum(),
            primal_res: res.primal,
            dual_res: res.dual,
            consensus_steps: outcome.steps,
            consensus_converged: outcome.converged,
            z_spread: max_pairwise_spread(&outcome.z),
            gap: gap_k,
            max_node_err: err_k,
        });
        if res.satisfied() {
            stopped = true;
            break;
        }
    }

    Ok(RunRecord {
        iterations,
        trajectory,
        stopped,
        trace,
    })
}

/// Ergodic Lagrangian gap against its `O(1/k)` envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    /// `gap[k-1]` is the gap after `k` iterations.
    pub gaps: Vec<f64>,
    /// `(1/2ρ)‖λ* − λ⁰‖² + (ρ/2)‖X* − z⁰‖²`.
    pub theta: f64,
    /// Smallest `c ≥ 0` with `gap_k ≤ θ/k + c·√n·ε` for every recorded `k`.
    pub fitted_c: f64,
    /// `θ/k + c·√n·ε`.
    pub bound: Vec<f64>,
}

/// Recomputes the ergodic-average gap from a stored trajectory.
pub fn theorem1_gap<C: CostFunction>(
    costs: &[C],
    trajectory: &Trajectory,
    reference: &GroundTruth,
    rho: f64,
    epsilon: f64,
) -> GapReport {
    let n = costs.len();
    let p = reference.x_star.len();
    let lambda_dist: f64 = reference
        .lambda_star
        .iter()
        .zip(&trajectory.lambda[0])
        .map(|(a, b)| (a - b).norm_squared())
        .sum();
    let x_dist: f64 = trajectory.z[0]
        .iter()
        .map(|z| (&reference.x_star - z).norm_squared())
        .sum();
    let theta = lambda_dist / (2.0 * rho) + rho / 2.0 * x_dist;

    let mut tracker = GapTracker::new(costs, reference, p);
    let gaps: Vec<f64> = (1..trajectory.x.len())
        .map(|s| tracker.push(&trajectory.x[s], &trajectory.z[s]))
        .collect();
    let slack = (n as f64).sqrt() * epsilon;
    let fitted_c = if slack > 0.0 {
        gaps.iter()
            .enumerate()
            .map(|(i, g)| (g - theta / (i + 1) as f64) / slack)
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    let bound = (1..=gaps.len())
        .map(|k| theta / k as f64 + fitted_c * slack)
        .collect();
    GapReport {
        gaps,
        theta,
        fitted_c,
        bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::{random_strongly_connected, Digraph};
    use crate::oracle::centralized_solution;
    use crate::problems::{generate_ls, LeastSquares};
    use nalgebra::DMatrix;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn lambda_update_formula() {
        let l = lambda_update(
            &v(&[0.0, 0.0, 0.0]),
            &v(&[1.0, 0.0, -1.0]),
            &v(&[0.0; 3]),
            2.0,
        );
        assert_eq!(l, v(&[2.0, 0.0, -2.0]));
        let same = v(&[1.0, 2.0]);
        assert_eq!(
            lambda_update(&v(&[3.0, 4.0]), &same, &same, 5.0),
            v(&[3.0, 4.0])
        );
    }

    #[test]
    fn lambda_update_sums_linearly() {
        let states = initial_states(6, 2, 4);
        let rho = 1.7;
        let before = states.iter().fold(Vector::zeros(2), |a, s| a + &s.lambda);
        let after = states.iter().fold(Vector::zeros(2), |a, s| {
            a + lambda_update(&s.lambda, &s.x, &s.z, rho)
        });
        let dx = states.iter().fold(Vector::zeros(2), |a, s| a + &s.x - &s.z);
        assert!((after - (before + dx * rho)).norm() < 1e-12);
    }

    fn states_from(x: &[f64], z: &[f64], l: &[f64]) -> Vec<NodeState> {
        x.iter()
            .zip(z)
            .zip(l)
            .map(|((&x, &z), &l)| NodeState {
                x: v(&[x]),
                z: v(&[z]),
                lambda: v(&[l]),
            })
            .collect()
    }

    #[test]
    fn stopping_when_feasible_and_stationary() {
        let cfg = SolverConfig::default();
        let s = states_from(&[1.0, 2.0], &[1.0, 2.0], &[0.0, 0.0]);
        let prev = vec![v(&[1.0]), v(&[2.0])];
        assert!(stopping_criterion(&s, &prev, &cfg));
        let far = states_from(&[1e6, 2.0], &[1.0, 2.0], &[0.0, 0.0]);
        assert!(!stopping_criterion(&far, &prev, &cfg));
    }

    #[test]
    fn stopping_threshold_is_inclusive() {
        let cfg = SolverConfig {
            eps_abs: 0.5,
            eps_rel: 0.0,
            ..SolverConfig::default()
        };
        // n·p = 4 so the absolute threshold is exactly 1.
        let s = states_from(&[1.0, 0.0, 0.0, 0.0], &[0.0; 4], &[0.0; 4]);
        let prev = vec![v(&[0.0]); 4];
        let r = residuals(&s, &prev, &cfg);
        assert_eq!(r.primal, 1.0);
        assert_eq!(r.primal_tol, 1.0);
        assert!(r.satisfied());
    }

    #[test]
    fn config_validation() {
        let ok = SolverConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            SolverConfig {
                rho: 0.0,
                ..ok.clone()
            },
            SolverConfig {
                epsilon: 0.0,
                ..ok.clone()
            },
            SolverConfig {
                k_max: 0,
                ..ok.clone()
            },
            SolverConfig {
                eps_abs: -1.0,
                ..ok.clone()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn identical_inputs_give_identical_z() {
        let topo = Topology::new(random_strongly_connected(9, 0.2, 6).unwrap()).unwrap();
        let mut dm = DelayModel::uniform(2, 0);
        let y0 = vec![v(&[0.5, 1.5]); 9];
        let params = TerminationParams {
            epsilon: 0.01,
            step_cap: 1000,
        };
        let out = z_update(&topo, &mut dm, &y0, params).unwrap();
        assert_eq!(out.steps, topo.round_len(2));
        assert!(out.z.iter().all(|z| (z - &y0[0]).norm() < 1e-12));
    }

    #[test]
    fn loose_tolerance_stops_at_first_check() {
        let topo = Topology::new(Digraph::cycle(6).unwrap()).unwrap();
        let mut dm = DelayModel::uniform(1, 0);
        let y0: Vec<Vector> = (0..6).map(|i| v(&[i as f64 * 10.0])).collect();
        let params = TerminationParams {
            epsilon: 1e6,
            step_cap: 1000,
        };
        let out = z_update(&topo, &mut dm, &y0, params).unwrap();
        assert_eq!(out.steps, topo.round_len(1));
        assert!(max_pairwise_spread(&out.z) <= 1e6);
    }

    #[test]
    fn single_node_is_centralized_admm() {
        let inst = generate_ls(1, 3, 3, 21).unwrap();
        let gt = centralized_solution(&inst).unwrap();
        let topo = Topology::new(Digraph::from_edges(1, []).unwrap()).unwrap();
        let cfg = SolverConfig {
            k_max: 500,
            eps_abs: 1e-10,
            eps_rel: 1e-10,
            ..SolverConfig::default()
        };
        let rec = run(inst.costs(), &topo, &cfg, Some(&gt)).unwrap();
        let last = rec.iterations.last().unwrap();
        assert!(last.max_node_err < 1e-6, "{}", last.max_node_err);
        assert!(rec
            .iterations
            .iter()
            .all(|r| r.consensus_steps == topo.round_len(3)));
    }

    #[test]
    fn rejects_mismatched_costs() {
        let topo = Topology::new(Digraph::cycle(3).unwrap()).unwrap();
        let costs = vec![LeastSquares::new(DMatrix::identity(2, 2), v(&[1.0, 1.0])).unwrap(); 2];
        let err = run(&costs, &topo, &SolverConfig::default(), None);
        assert!(matches!(err, Err(Error::Dimension(_))));
    }

    #[test]
    fn first_ergodic_average_is_first_iterate() {
        let inst = generate_ls(5, 2, 2, 1).unwrap();
        let gt = centralized_solution(&inst).unwrap();
        let topo = Topology::new(random_strongly_connected(5, 0.3, 1).unwrap()).unwrap();
        let cfg = SolverConfig {
            k_max: 3,
            tau_bar: 1,
            ..SolverConfig::default()
        };
        let rec = run(inst.costs(), &topo, &cfg, Some(&gt)).unwrap();
        let direct = lagrangian_gap(
            inst.costs(),
            &rec.trajectory.x[1],
            &rec.trajectory.z[1],
            &gt,
        );
        assert_eq!(rec.iterations[0].gap, direct);
        let report = theorem1_gap(inst.costs(), &rec.trajectory, &gt, cfg.rho, cfg.epsilon);
        assert_eq!(report.gaps[0], direct);
        for (r, g) in rec.iterations.iter().zip(&report.gaps) {
            assert_eq!(r.gap, *g);
        }
        for (g, b) in report.gaps.iter().zip(&report.bound) {
            assert!(g <= b);
        }
    }

    #[test]
    fn csv_layout() {
        let inst = generate_ls(4, 2, 2, 3).unwrap();
        let gt = centralized_solution(&inst).unwrap();
        let topo = Topology::new(Digraph::cycle(4).unwrap()).unwrap();
        let cfg = SolverConfig {
            k_max: 2,
            eps_abs: 0.0,
            eps_rel: 0.0,
            ..SolverConfig::default()
        };
        let rec = run(inst.costs(), &topo, &cfg, Some(&gt)).unwrap();
        let mut buf = Vec::new();
        rec.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], RunRecord::CSV_HEADER);
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1,"));
        assert_eq!(lines[2].split(',').count(), 7);
    }
}
