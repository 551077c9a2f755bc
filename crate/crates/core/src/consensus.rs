//! Delayed ratio consensus with finite-time termination.
//!
//! Every node runs push-sum on a vector numerator `y` and a scalar
//! denominator `w` (initially 1), so its ratio `z = y / w` tends to the
//! network average of the initial `y`. Alongside, each node runs
//! asynchronous max- and min-consensus on `M` and `m`. Both settle within
//! `(1 + τ̄)·D` steps, so at every multiple of that round length all nodes
//! hold the same `M` and `m`. If `‖M − m‖ < ε` the instance stops; otherwise
//! `M` and `m` are re-seeded from the node's ratio and a new round starts.

use crate::digraph::{build_weights, Digraph, WeightMatrix};
use crate::netsim::{broadcast, DelayModel, EventQueue, Message, Payload, TraceRecord};
use crate::{Error, Result, Vector};

/// A validated strongly connected graph with its weights and diameter.
#[derive(Debug, Clone)]
pub struct Topology {
    graph: Digraph,
    weights: WeightMatrix,
    diameter: usize,
}

impl Topology {
    pub fn new(graph: Digraph) -> Result<Self> {
        if !graph.is_strongly_connected() {
            return Err(Error::NotStronglyConnected);
        }
        let diameter = graph.diameter()?;
        let weights = build_weights(&graph);
        Ok(Self {
            graph,
            weights,
            diameter,
        })
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn weights(&self) -> &WeightMatrix {
        &self.weights
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn diameter(&self) -> usize {
        self.diameter
    }

    /// `(1 + τ̄)·D`, with a single node treated as `D = 1`.
    pub fn round_len(&self, tau_bar: u64) -> u64 {
        (1 + tau_bar) * self.diameter.max(1) as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioState {
    pub y: Vector,
    pub w: f64,
    pub z: Vector,
}

impl RatioState {
    pub fn new(y0: Vector) -> Self {
        Self {
            z: y0.clone(),
            y: y0,
            w: 1.0,
        }
    }
}

/// New numerator/denominator as the plain sum of every delivered,
/// sender-scaled ratio payload (the node's own undelayed share included),
/// accumulated in delivery order.
pub fn ratio_step<'a, I>(node: usize, dim: usize, delivered: I) -> Result<RatioState>
where
    I: IntoIterator<Item = &'a Message>,
{
    let mut y = Vector::zeros(dim);
    let mut w = 0.0;
    for msg in delivered {
        if let Payload::Ratio { y: py, w: pw } = &msg.payload {
            y += py;
            w += pw;
        }
    }
    if w.is_nan() || w <= 0.0 {
        return Err(Error::Protocol {
            node,
            msg: format!("denominator {w} is not positive"),
        });
    }
    let z = &y / w;
    Ok(RatioState { y, w, z })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TerminationState {
    pub max: Vector,
    pub min: Vector,
    pub flag: bool,
    /// Index of the current check round; min/max values from older rounds are stale.
    pub round: u64,
    pub round_len: u64,
}

impl TerminationState {
    pub fn new(z0: &Vector, round_len: u64) -> Self {
        Self {
            max: z0.clone(),
            min: z0.clone(),
            flag: false,
            round: 0,
            round_len,
        }
    }

    /// `‖M − m‖₂`.
    pub fn spread(&self) -> f64 {
        (&self.max - &self.min).norm()
    }
}

/// Componentwise max/min over the node's own state and every delivered
/// min/max payload sent during the same round.
pub fn minmax_step<'a, I>(own: &TerminationState, delivered: I) -> TerminationState
where
    I: IntoIterator<Item = &'a Message>,
{
    let mut next = own.clone();
    for msg in delivered {
        if let Payload::MinMax { max, min, round } = &msg.payload {
            if *round != own.round {
                continue;
            }
            next.max.zip_apply(max, |a, b| *a = a.max(b));
            next.min.zip_apply(min, |a, b| *a = a.min(b));
        }
    }
    next
}

/// Simulation of all nodes running ratio and min/max consensus together.
pub struct AsyncConsensus<'a> {
    topology: &'a Topology,
    delays: &'a mut DelayModel,
    queue: EventQueue,
    ratio: Vec<RatioState>,
    term: Vec<TerminationState>,
    dim: usize,
}

impl<'a> AsyncConsensus<'a> {
    /// Starts an instance at `k = 0` with `w = 1` and `M = m = y0` at every node.
    pub fn new(topology: &'a Topology, delays: &'a mut DelayModel, y0: &[Vector]) -> Result<Self> {
        Self::build(topology, delays, y0, EventQueue::new())
    }

    /// Like [`AsyncConsensus::new`] but records every delivery, with times
    /// shifted by `offset`.
    pub fn with_trace(
        topology: &'a Topology,
        delays: &'a mut DelayModel,
        y0: &[Vector],
        offset: u64,
    ) -> Result<Self> {
        Self::build(topology, delays, y0, EventQueue::with_trace(offset))
    }

    fn build(
        topology: &'a Topology,
        delays: &'a mut DelayModel,
        y0: &[Vector],
        queue: EventQueue,
    ) -> Result<Self> {
        let n = topology.node_count();
        if y0.len() != n {
            return Err(Error::Dimension(format!(
                "{} initial values for {n} nodes",
                y0.len()
            )));
        }
        let dim = y0.first().map_or(0, Vector::len);
        if y0.iter().any(|v| v.len() != dim) {
            return Err(Error::Dimension("initial values differ in length".into()));
        }
        let round_len = topology.round_len(delays.tau_bar());
        Ok(Self {
            topology,
            queue,
            ratio: y0.iter().cloned().map(RatioState::new).collect(),
            term: y0
                .iter()
                .map(|v| TerminationState::new(v, round_len))
                .collect(),
            dim,
            delays,
        })
    }

    pub fn now(&self) -> u64 {
        self.queue.now()
    }

    pub fn round_len(&self) -> u64 {
        self.term.first().map_or(1, |t| t.round_len)
    }

    pub fn ratio_states(&self) -> &[RatioState] {
        &self.ratio
    }

    pub fn termination_states(&self) -> &[TerminationState] {
        &self.term
    }

    pub fn ratios(&self) -> Vec<Vector> {
        self.ratio.iter().map(|s| s.z.clone()).collect()
    }

    pub fn queue(&self) -> &EventQueue {
        &self.queue
    }

    pub fn take_trace(&mut self) -> Vec<TraceRecord> {
        self.queue.take_trace()
    }

    /// One synchronous tick of the logical clock: every node broadcasts its
    /// scaled ratio pair and its min/max pair, then consumes whatever is due.
    pub fn step(&mut self) -> Result<()> {
        let g = self.topology.graph();
        let weights = self.topology.weights();
        for j in 0..g.node_count() {
            let p = weights.sender_weight(j);
            let state = &self.ratio[j];
            let ratio = Payload::Ratio {
                y: &state.y * p,
                w: p * state.w,
            };
            broadcast(j, g, ratio, self.delays, &mut self.queue);
            let t = &self.term[j];
            let minmax = Payload::MinMax {
                max: t.max.clone(),
                min: t.min.clone(),
                round: t.round,
            };
            broadcast(j, g, minmax, self.delays, &mut self.queue);
        }
        let (_, delivered) = self.queue.advance();
        let mut start = 0;
        while start < delivered.len() {
            let node = delivered[start].receiver;
            let end = start
                + delivered[start..]
                    .iter()
                    .take_while(|m| m.receiver == node)
                    .count();
            let batch = &delivered[start..end];
            self.ratio[node] = ratio_step(node, self.dim, batch)?;
            self.term[node] = minmax_step(&self.term[node], batch);
            start = end;
        }
        Ok(())
    }

    /// Termination check at a round boundary. Returns whether every node
    /// found `‖M − m‖ < ε`; in either case starts a new round with
    /// `M = m = z` at each node.
    fn check_and_reset(&mut self, epsilon: f64) -> Result<bool> {
        let decisions: Vec<bool> = self.term.iter().map(|t| t.spread() < epsilon).collect();
        let all = decisions.iter().all(|&d| d);
        if let Some(node) = decisions.iter().position(|&d| d != all) {
            return Err(Error::Protocol {
                node,
                msg: "termination decisions disagree at a round boundary".into(),
            });
        }
        for (j, t) in self.term.iter_mut().enumerate() {
            t.max.copy_from(&self.ratio[j].z);
            t.min.copy_from(&self.ratio[j].z);
            t.round += 1;
            if all {
                t.flag = true;
            }
        }
        Ok(all)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminationParams {
    pub epsilon: f64,
    pub step_cap: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusOutcome {
    pub z: Vec<Vector>,
    /// Ratio iterations executed.
    pub steps: u64,
    pub converged: bool,
    /// Times at which the spread check ran.
    pub checks: Vec<u64>,
}

/// Runs one terminating consensus instance to completion or to `step_cap`.
pub fn run_terminating_consensus(
    topology: &Topology,
    delays: &mut DelayModel,
    y0: &[Vector],
    params: TerminationParams,
) -> Result<ConsensusOutcome> {
    let mut sim = AsyncConsensus::new(topology, delays, y0)?;
    drive(&mut sim, params)
}

/// Drives an already constructed instance; used when a trace is wanted.
pub fn drive(sim: &mut AsyncConsensus<'_>, params: TerminationParams) -> Result<ConsensusOutcome> {
    if params.epsilon.is_nan() || params.epsilon <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "consensus tolerance must be positive, got {}",
            params.epsilon
        )));
    }
    let round_len = sim.round_len();
    let mut checks = Vec::new();
    loop {
        let k = sim.now();
        if k != 0 && k.is_multiple_of(round_len) {
            checks.push(k);
            if sim.check_and_reset(params.epsilon)? {
                return Ok(ConsensusOutcome {
                    z: sim.ratios(),
                    steps: k,
                    converged: true,
                    checks,
                });
            }
        }
        if k >= params.step_cap {
            return Ok(ConsensusOutcome {
                z: sim.ratios(),
                steps: k,
                converged: false,
                checks,
            });
        }
        sim.step()?;
    }
}

/// Largest pairwise `‖z_i − z_j‖₂`.
pub fn max_pairwise_spread(z: &[Vector]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in z.iter().enumerate() {
        for b in &z[i + 1..] {
            worst = worst.max((a - b).norm());
        }
    }
    worst
}
