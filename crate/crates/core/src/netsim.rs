//! Seeded discrete-event simulation of bounded-delay message passing.
//!
//! Time is a global logical index `k`. A message sent at `k` with delay `τ`
//! has `deliver_at = k + τ` and is consumed by the transition from state `k + τ`
//! to state `k + τ + 1`. With `τ = 0` everywhere this is plain synchronous
//! iteration. Asynchrony of any kind (processing or transmission) is folded
//! into the single bound `τ̄`, so every value a node consumes at step `k + 1`
//! was produced in `[k - τ̄, k]`.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::digraph::Digraph;
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MessageKind {
    RatioPair,
    MinMaxPair,
    Control,
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MessageKind::RatioPair => "ratio",
            MessageKind::MinMaxPair => "minmax",
            MessageKind::Control => "control",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    /// Sender-scaled numerator and denominator, `p·y` and `p·w`.
    Ratio {
        y: Vector,
        w: f64,
    },
    /// Running max/min; `round` is the termination round the sender was in.
    MinMax {
        max: Vector,
        min: Vector,
        round: u64,
    },
    Control,
}

impl Payload {
    pub fn kind(&self) -> MessageKind {
        match self {
            Payload::Ratio { .. } => MessageKind::RatioPair,
            Payload::MinMax { .. } => MessageKind::MinMaxPair,
            Payload::Control => MessageKind::Control,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub sender: usize,
    pub receiver: usize,
    pub sent_at: u64,
    pub deliver_at: u64,
    pub payload: Payload,
}

impl Message {
    pub fn kind(&self) -> MessageKind {
        self.payload.kind()
    }

    fn order_key(&self) -> (usize, usize, MessageKind, u64) {
        (self.receiver, self.sender, self.kind(), self.sent_at)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DelayDistribution {
    /// Every message is delivered in the step it is sent.
    Zero,
    /// i.i.d. uniform over `0..=τ̄` per message.
    Uniform,
    /// Each link gets a fixed bound `τ̄_ji ≤ τ̄`; messages on it are uniform
    /// over `0..=τ̄_ji`.
    PerLink,
}

#[derive(Debug, Clone)]
pub struct DelayModel {
    tau_bar: u64,
    distribution: DelayDistribution,
    seed: u64,
    rng: ChaCha8Rng,
}

impl DelayModel {
    pub fn new(tau_bar: u64, distribution: DelayDistribution, seed: u64) -> Self {
        let tau_bar = if distribution == DelayDistribution::Zero {
            0
        } else {
            tau_bar
        };
        Self {
            tau_bar,
            distribution,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn zero() -> Self {
        Self::new(0, DelayDistribution::Zero, 0)
    }

    pub fn uniform(tau_bar: u64, seed: u64) -> Self {
        Self::new(tau_bar, DelayDistribution::Uniform, seed)
    }

    pub fn per_link(tau_bar: u64, seed: u64) -> Self {
        Self::new(tau_bar, DelayDistribution::PerLink, seed)
    }

    pub fn tau_bar(&self) -> u64 {
        self.tau_bar
    }

    pub fn distribution(&self) -> DelayDistribution {
        self.distribution
    }

    /// Staleness bound `B = 1 + τ̄`.
    pub fn staleness_bound(&self) -> u64 {
        1 + self.tau_bar
    }

    /// Largest delay link `from -> to` can ever see.
    pub fn link_bound(&self, from: usize, to: usize) -> u64 {
        match self.distribution {
            DelayDistribution::Zero => 0,
            DelayDistribution::Uniform => self.tau_bar,
            DelayDistribution::PerLink => {
                splitmix64(self.seed ^ splitmix64(((from as u64) << 32) | to as u64))
                    % (self.tau_bar + 1)
            }
        }
    }

    pub fn sample(&mut self, from: usize, to: usize) -> u64 {
        if from == to {
            return 0;
        }
        match self.distribution {
            DelayDistribution::Zero => 0,
            _ => {
                let bound = self.link_bound(from, to);
                self.rng.random_range(0..=bound)
            }
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// One delivery, rendered as `k,sender,receiver,kind`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceRecord {
    pub k: u64,
    pub sender: usize,
    pub receiver: usize,
    pub kind: MessageKind,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{}",
            self.k, self.sender, self.receiver, self.kind
        )
    }
}

#[derive(Debug, Default)]
pub struct EventQueue {
    now: u64,
    pending: BTreeMap<u64, Vec<Message>>,
    trace: Option<(u64, Vec<TraceRecord>)>,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records every delivery, shifting reported times by `offset`.
    pub fn with_trace(offset: u64) -> Self {
        Self {
            trace: Some((offset, Vec::new())),
            ..Self::default()
        }
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    /// Enqueues a message. Panics if it would be delivered in the past.
    pub fn push(&mut self, msg: Message) {
        assert!(
            msg.deliver_at >= self.now && msg.deliver_at >= msg.sent_at,
            "message scheduled before it was sent or in the past"
        );
        self.pending.entry(msg.deliver_at).or_default().push(msg);
    }

    /// Hands out every message due at the current index, sorted by
    /// `(receiver, sender, kind, sent_at)`, then moves the clock forward.
    pub fn advance(&mut self) -> (u64, Vec<Message>) {
        let mut due = self.pending.remove(&self.now).unwrap_or_default();
        due.sort_by_key(Message::order_key);
        if let Some((offset, records)) = self.trace.as_mut() {
            records.extend(due.iter().map(|m| TraceRecord {
                k: *offset + m.deliver_at,
                sender: m.sender,
                receiver: m.receiver,
                kind: m.kind(),
            }));
        }
        self.now += 1;
        (self.now, due)
    }

    pub fn in_flight(&self) -> impl Iterator<Item = &Message> {
        self.pending.values().flatten()
    }

    pub fn len(&self) -> usize {
        self.pending.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn take_trace(&mut self) -> Vec<TraceRecord> {
        self.trace
            .as_mut()
            .map(|(_, r)| std::mem::take(r))
            .unwrap_or_default()
    }
}

/// Sends `payload` to every out-neighbor of `sender` with an independently
/// sampled delay, plus an undelayed copy addressed to `sender` itself.
pub fn broadcast(
    sender: usize,
    g: &Digraph,
    payload: Payload,
    delays: &mut DelayModel,
    queue: &mut EventQueue,
) {
    let now = queue.now();
    for &receiver in g.out_neighbors(sender) {
        let tau = delays.sample(sender, receiver);
        queue.push(Message {
            sender,
            receiver,
            sent_at: now,
            deliver_at: now + tau,
            payload: payload.clone(),
        });
    }
    queue.push(Message {
        sender,
        receiver: sender,
        sent_at: now,
        deliver_at: now,
        payload,
    });
}
