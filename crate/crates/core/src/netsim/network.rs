use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{Action, BroadcastCtx, Event, ImpMessage, MessageAdversary, ProcessId, Trace, TraceRecord};
use crate::params::ParamsError;

pub const DEFAULT_MAX_STEPS: u64 = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("message adversary overstepped its power: {0}")]
    AdversaryBudget(String),
    #[error("correct process {process} reused sequence number {sn}")]
    SequenceReuse { process: ProcessId, sn: u64 },
}

/// One copy of an imp-message in transit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Envelope {
    pub copy: u64,
    /// The `ur_broadcast` invocation this copy belongs to; `None` for
    /// point-to-point Byzantine sends.
    pub broadcast: Option<u64>,
    pub from: ProcessId,
    pub to: ProcessId,
    pub msg: ImpMessage,
}

/// A protocol participant driven by the network.
pub trait Node {
    /// Application-level request (a broadcast or a kl-cast invocation).
    type Input;

    fn on_receive(&mut self, from: ProcessId, msg: &ImpMessage) -> Vec<Action>;

    fn invoke(&mut self, input: &Self::Input) -> Result<Vec<Action>, ConfigError>;
}

/// Next thing the network does.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Choice {
    Deliver(usize),
    Workload,
}

/// Decides the delivery order. Any order is legal in an asynchronous
/// system, so a scheduler may be adversarial.
pub trait Scheduler: Send {
    /// `pending` is non-empty or `workload_left` is set.
    fn pick(&mut self, pending: &[Envelope], workload_left: bool) -> Choice;
}

/// Uniform choice among pending copies plus, while workload remains, one
/// extra slot standing for the next application request.
#[derive(Debug, Clone)]
pub struct RandomScheduler {
    rng: ChaCha8Rng,
}

impl RandomScheduler {
    pub fn new(seed: u64) -> Self {
        RandomScheduler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Scheduler for RandomScheduler {
    fn pick(&mut self, pending: &[Envelope], workload_left: bool) -> Choice {
        let slots = pending.len() + usize::from(workload_left);
        let i = self.rng.gen_range(0..slots);
        if i == pending.len() {
            Choice::Workload
        } else {
            Choice::Deliver(i)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunLimits {
    pub max_steps: u64,
}

impl Default for RunLimits {
    fn default() -> Self {
        RunLimits {
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

pub struct Network<N: Node> {
    t_m: u32,
    nodes: Vec<N>,
    is_correct: Vec<bool>,
    correct: Vec<ProcessId>,
    pending: Vec<Envelope>,
    adversary: Box<dyn MessageAdversary>,
    scheduler: Box<dyn Scheduler>,
    next_copy: u64,
    next_broadcast: u64,
    step: u64,
    records: Vec<TraceRecord>,
}

impl<N: Node> Network<N> {
    /// `nodes[i]` is process `i + 1`; `is_correct[i]` tells whether it
    /// follows its protocol.
    pub fn new(
        t_m: u32,
        nodes: Vec<N>,
        is_correct: Vec<bool>,
        adversary: Box<dyn MessageAdversary>,
        scheduler: Box<dyn Scheduler>,
    ) -> Self {
        assert_eq!(nodes.len(), is_correct.len());
        let correct = is_correct
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(|(i, _)| ProcessId::from_index(i))
            .collect();
        Network {
            t_m,
            nodes,
            is_correct,
            correct,
            pending: Vec::new(),
            adversary,
            scheduler,
            next_copy: 0,
            next_broadcast: 0,
            step: 0,
            records: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[N] {
        &self.nodes
    }

    pub fn node(&self, p: ProcessId) -> &N {
        &self.nodes[p.index()]
    }

    pub fn pending(&self) -> &[Envelope] {
        &self.pending
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn is_correct(&self, p: ProcessId) -> bool {
        self.is_correct[p.index()]
    }

    fn log(&mut self, event: Event) {
        self.records.push(TraceRecord {
            step: self.step,
            event,
        });
    }

    fn enqueue(&mut self, broadcast: Option<u64>, from: ProcessId, to: ProcessId, msg: ImpMessage) -> u64 {
        let copy = self.next_copy;
        self.next_copy += 1;
        self.pending.push(Envelope {
            copy,
            broadcast,
            from,
            to,
            msg,
        });
        copy
    }

    fn ur_broadcast(&mut self, from: ProcessId, msg: ImpMessage) -> Result<(), ConfigError> {
        let broadcast = self.next_broadcast;
        self.next_broadcast += 1;
        let correct = self.is_correct[from.index()];
        let mut victims = if correct {
            let ctx = BroadcastCtx {
                broadcast,
                sender: from,
                msg: &msg,
                correct: &self.correct,
                t_m: self.t_m,
            };
            self.adversary.choose_victims(&ctx)
        } else {
            Vec::new()
        };
        victims.sort();
        victims.dedup();
        if victims.len() > self.t_m as usize {
            return Err(ConfigError::AdversaryBudget(format!(
                "{} victims for broadcast {broadcast} with t_m = {}",
                victims.len(),
                self.t_m
            )));
        }
        if let Some(p) = victims
            .iter()
            .find(|p| p.0 == 0 || p.index() >= self.n() || !self.is_correct[p.index()])
        {
            return Err(ConfigError::AdversaryBudget(format!(
                "victim {p} is not a correct process"
            )));
        }
        self.log(Event::UrBroadcast {
            broadcast,
            from,
            correct,
            msg: msg.clone(),
        });
        for to in ProcessId::all(self.n() as u32) {
            if victims.binary_search(&to).is_ok() {
                let copy = self.next_copy;
                self.next_copy += 1;
                self.log(Event::Suppressed {
                    broadcast,
                    copy,
                    to,
                });
            } else {
                self.enqueue(Some(broadcast), from, to, msg.clone());
            }
        }
        Ok(())
    }

    /// Applies the actions a handler of `actor` returned.
    pub fn perform(&mut self, actor: ProcessId, actions: Vec<Action>) -> Result<(), ConfigError> {
        for action in actions {
            match action {
                Action::UrBroadcast(msg) => self.ur_broadcast(actor, msg)?,
                Action::SendTo { to, msg } => {
                    assert!(
                        !self.is_correct[actor.index()],
                        "correct process {actor} bypassed ur_broadcast"
                    );
                    if to.0 == 0 || to.index() >= self.n() {
                        continue;
                    }
                    let copy = self.enqueue(None, actor, to, msg.clone());
                    self.log(Event::Injected {
                        copy,
                        from: actor,
                        to,
                        msg,
                    });
                }
                Action::KlCast { tag, payload, id } => self.log(Event::KlCast {
                    process: actor,
                    tag,
                    payload,
                    id,
                }),
                Action::KlDeliver { tag, payload, id } => self.log(Event::KlDeliver {
                    process: actor,
                    tag,
                    payload,
                    id,
                }),
                Action::MbrbBroadcast { payload, sn } => self.log(Event::MbrbBroadcast {
                    process: actor,
                    payload,
                    sn,
                }),
                Action::MbrbDeliver { payload, id } => self.log(Event::MbrbDeliver {
                    process: actor,
                    payload,
                    id,
                }),
            }
        }
        Ok(())
    }

    pub fn invoke(&mut self, process: ProcessId, input: &N::Input) -> Result<(), ConfigError> {
        let actions = self.nodes[process.index()].invoke(input)?;
        self.perform(process, actions)
    }

    fn deliver(&mut self, index: usize) -> Result<(), ConfigError> {
        // Order-preserving removal keeps the pending vector independent of
        // which index was drawn, which makes custom schedulers easier to
        // reason about.
        let env = self.pending.remove(index);
        self.step += 1;
        self.log(Event::Received {
            copy: env.copy,
            broadcast: env.broadcast,
            from: env.from,
            to: env.to,
            msg: env.msg.clone(),
        });
        let actions = self.nodes[env.to.index()].on_receive(env.from, &env.msg);
        self.perform(env.to, actions)
    }

    /// Delivers one pending copy chosen by the scheduler. Returns `false`
    /// when nothing is pending.
    pub fn step(&mut self) -> Result<bool, ConfigError> {
        if self.pending.is_empty() {
            return Ok(false);
        }
        match self.scheduler.pick(&self.pending, false) {
            Choice::Deliver(i) => self.deliver(i)?,
            Choice::Workload => unreachable!("no workload offered"),
        }
        Ok(true)
    }

    /// Executes the workload interleaved with deliveries until nothing is
    /// pending, then returns the trace.
    pub fn run_to_quiescence(
        mut self,
        workload: Vec<(ProcessId, N::Input)>,
        limits: RunLimits,
    ) -> Result<Trace, ConfigError> {
        let mut workload = workload.into_iter().peekable();
        let mut steps = 0u64;
        loop {
            let workload_left = workload.peek().is_some();
            if self.pending.is_empty() && !workload_left {
                break;
            }
            if steps >= limits.max_steps {
                return Ok(Trace {
                    records: self.records,
                    quiescent: false,
                });
            }
            steps += 1;
            match self.scheduler.pick(&self.pending, workload_left) {
                Choice::Deliver(i) => self.deliver(i)?,
                Choice::Workload => {
                    let (p, input) = workload.next().expect("workload offered");
                    self.invoke(p, &input)?;
                }
            }
        }
        Ok(Trace {
            records: self.records,
            quiescent: true,
        })
    }
}
