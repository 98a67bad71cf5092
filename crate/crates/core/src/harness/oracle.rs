//! Exhaustive exploration of tiny systems.
//!
//! Every delivery order, every victim set of size at most `t_m` for every
//! `ur_broadcast` of a correct process, and every subset of a bounded
//! Byzantine menu is covered. Properties are checked on every execution.
//!
//! Three reductions keep this tractable:
//!
//! * States are memoized under a fingerprint in which sender sets are
//!   replaced by their sizes. This is exact because every copy carries a
//!   distinct `(sender, recipient, message)` triple: correct processes
//!   broadcast each message once and the menu offers each Byzantine message
//!   once per recipient.
//! * Processes with no distinguishing role are interchangeable, so their
//!   local fingerprints are sorted before hashing. Skipped for sb-klcast,
//!   whose local states name signers.
//! * When no Byzantine process is present, each identity carries one
//!   payload and the objects are signature-free, the local reaction of a
//!   process depends only on the set of copies it has received. Deliveries
//!   then commute, so one delivery order per victim assignment suffices.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashMap};
use std::hash::{Hash, Hasher};

use serde::Serialize;
use thiserror::Error;

use super::properties::{check_properties, Expectation, PropertyVerdict};
use super::scenario::{Algorithm, Participant, Scenario, Setup, WorkloadItem, SIGNATURE_SEED};
use crate::klcast_sb::{SignatureScheme, SimulatedSignatures};
use crate::netsim::{
    Action, ConfigError, Event, ImpMessage, MessageId, MessageKind, Node, ProcessId, Trace,
    TraceRecord,
};

pub const DEFAULT_MAX_BRANCHES: u64 = 10_000_000;
const MAX_PROCESSES: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    /// Upper bound on explored transitions.
    pub max_branches: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_branches: DEFAULT_MAX_BRANCHES,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub events: Vec<TraceRecord>,
    pub failures: Vec<PropertyVerdict>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    /// Distinct states after reduction.
    pub states: u64,
    /// Transitions explored.
    pub branches: u64,
    /// Complete executions represented, saturating at `u64::MAX`.
    pub executions: u64,
    /// Distinct quiescent states.
    pub terminal_states: u64,
    pub min_deliverers: Option<usize>,
    /// Whether the commuting-delivery reduction was applied.
    pub reduced: bool,
    pub counterexample: Option<Counterexample>,
}

impl OracleReport {
    pub fn all_hold(&self) -> bool {
        self.counterexample.is_none()
    }
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("oracle precondition: {0}")]
    Unsupported(String),
    #[error("state space exceeds {limit} branches ({} states seen)", partial.states)]
    StateSpaceOverflow {
        limit: u64,
        partial: Box<OracleReport>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct InFlight {
    to: ProcessId,
    /// Only INIT reveals its sender to the receiver's state.
    from: ProcessId,
    msg: ImpMessage,
    /// Menu messages a Byzantine process may or may not send.
    optional: bool,
}

impl InFlight {
    /// Copies with equal keys lead to equivalent successors.
    fn key(&self) -> (ProcessId, Option<ProcessId>, &ImpMessage, bool) {
        let from = (self.msg.kind == MessageKind::Init).then_some(self.from);
        (self.to, from, &self.msg, self.optional)
    }
}

#[derive(Debug, Clone)]
struct State {
    nodes: Vec<Participant>,
    pending: Vec<InFlight>,
    workload: Vec<(ProcessId, WorkloadItem)>,
    events: Vec<Vec<Event>>,
}

impl State {
    /// Drops copies whose delivery can no longer change anything.
    fn prune(&mut self) {
        let nodes = &self.nodes;
        self.pending.retain(|c| !nodes[c.to.index()].is_inert(&c.msg));
    }
}

#[derive(Debug, Clone, Copy)]
struct Summary {
    executions: u64,
    min: Option<usize>,
}

fn min_opt(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    }
}

struct Explorer {
    setup: Setup,
    correct: BTreeSet<ProcessId>,
    t_m: u32,
    victim_sets: Vec<Vec<ProcessId>>,
    /// Symmetry class per process index.
    class: Vec<u32>,
    reduced: bool,
    memo: HashMap<u128, Summary>,
    limit: u64,
    branches: u64,
    terminal: u64,
    overflow: bool,
    counterexample: Option<Counterexample>,
}

fn subsets_up_to(items: &[ProcessId], k: usize) -> Vec<Vec<ProcessId>> {
    let mut out = vec![Vec::new()];
    for &p in items {
        let grown: Vec<Vec<ProcessId>> = out
            .iter()
            .filter(|s| s.len() < k)
            .map(|s| {
                let mut s = s.clone();
                s.push(p);
                s
            })
            .collect();
        out.extend(grown);
    }
    out
}

impl Explorer {
    fn fingerprint(&self, s: &State) -> u128 {
        let mut locals: Vec<(u32, u64)> = Vec::with_capacity(s.nodes.len());
        for p in &self.correct {
            let i = p.index();
            let mut h = DefaultHasher::new();
            s.nodes[i].abstract_hash(&mut h);
            let mut ev: Vec<&Event> = s.events[i].iter().collect();
            ev.sort();
            ev.hash(&mut h);
            let mut mine: Vec<_> = s.pending.iter().filter(|c| c.to == *p).map(InFlight::key).collect();
            mine.sort();
            for k in mine {
                (k.1, k.2, k.3).hash(&mut h);
            }
            for (q, w) in &s.workload {
                if q == p {
                    (w.sn, &w.payload, w.id_origin).hash(&mut h);
                }
            }
            locals.push((self.class[i], h.finish()));
        }
        locals.sort_unstable();
        let mut a = DefaultHasher::new();
        let mut b = DefaultHasher::new();
        0xa5u8.hash(&mut b);
        locals.hash(&mut a);
        locals.hash(&mut b);
        (u128::from(a.finish()) << 64) | u128::from(b.finish())
    }

    /// Applies `actions` of `actor`, branching over victim sets.
    fn resolve(&self, s: State, actor: ProcessId, actions: Vec<Action>) -> Vec<State> {
        let mut states = vec![s];
        for action in actions {
            match action {
                Action::UrBroadcast(msg) => {
                    let mut next = Vec::with_capacity(states.len() * self.victim_sets.len());
                    for st in states {
                        for victims in &self.victim_sets {
                            assert!(victims.len() <= self.t_m as usize, "suppression budget");
                            let mut st = st.clone();
                            for to in &self.correct {
                                if !victims.contains(to) {
                                    st.pending.push(InFlight {
                                        to: *to,
                                        from: actor,
                                        msg: msg.clone(),
                                        optional: false,
                                    });
                                }
                            }
                            next.push(st);
                        }
                    }
                    states = next;
                }
                Action::SendTo { .. } => panic!("correct process {actor} bypassed ur_broadcast"),
                other => {
                    let ev = match other {
                        Action::KlCast { tag, payload, id } => Event::KlCast {
                            process: actor,
                            tag,
                            payload,
                            id,
                        },
                        Action::KlDeliver { tag, payload, id } => Event::KlDeliver {
                            process: actor,
                            tag,
                            payload,
                            id,
                        },
                        Action::MbrbBroadcast { payload, sn } => Event::MbrbBroadcast {
                            process: actor,
                            payload,
                            sn,
                        },
                        Action::MbrbDeliver { payload, id } => Event::MbrbDeliver {
                            process: actor,
                            payload,
                            id,
                        },
                        _ => unreachable!(),
                    };
                    for st in &mut states {
                        st.events[actor.index()].push(ev.clone());
                    }
                }
            }
        }
        for st in &mut states {
            st.prune();
        }
        states
    }

    fn successors(&self, s: &State) -> Result<Vec<State>, ConfigError> {
        let mut out = Vec::new();
        let mut seen_work = BTreeSet::new();
        for (i, (p, w)) in s.workload.iter().enumerate() {
            if !seen_work.insert((p, w.sn, &w.payload, w.id_origin)) {
                continue;
            }
            let mut st = s.clone();
            st.workload.remove(i);
            let actions = st.nodes[p.index()].invoke(w)?;
            out.extend(self.resolve(st, *p, actions));
            if self.reduced {
                return Ok(out);
            }
        }
        let mut seen = BTreeSet::new();
        for (i, c) in s.pending.iter().enumerate() {
            if !seen.insert(c.key()) {
                continue;
            }
            let mut st = s.clone();
            let c = st.pending.remove(i);
            let actions = st.nodes[c.to.index()].on_receive(c.from, &c.msg);
            out.extend(self.resolve(st, c.to, actions));
            if self.reduced {
                break;
            }
        }
        Ok(out)
    }

    fn leaf(&mut self, s: &State) -> Option<usize> {
        let records = s
            .events
            .iter()
            .flatten()
            .enumerate()
            .map(|(i, e)| TraceRecord {
                step: i as u64,
                event: e.clone(),
            })
            .collect();
        let trace = Trace {
            records,
            quiescent: true,
        };
        let v = check_properties(&trace, &self.correct, self.t_m, &self.setup.expectation);
        if !v.all_hold() && self.counterexample.is_none() {
            self.counterexample = Some(Counterexample {
                events: trace.records.clone(),
                failures: v.failures().cloned().collect(),
            });
        }
        v.min_deliverers()
    }

    fn dfs(&mut self, s: State) -> Result<Summary, ConfigError> {
        let key = self.fingerprint(&s);
        if let Some(sum) = self.memo.get(&key) {
            return Ok(*sum);
        }
        let mut sum = Summary {
            executions: 0,
            min: None,
        };
        let quiet = s.workload.is_empty() && s.pending.iter().all(|c| c.optional);
        if quiet {
            self.terminal += 1;
            sum.executions = 1;
            sum.min = self.leaf(&s);
        }
        for next in self.successors(&s)? {
            self.branches += 1;
            if self.branches > self.limit {
                self.overflow = true;
            }
            if self.overflow {
                break;
            }
            let child = self.dfs(next)?;
            sum.executions = sum.executions.saturating_add(child.executions);
            sum.min = min_opt(sum.min, child.min);
        }
        if !self.overflow {
            self.memo.insert(key, sum);
        }
        Ok(sum)
    }
}

/// Byzantine copies the explorer may inject: per Byzantine process, both
/// the workload payload and a conflicting one, in every kind the protocol
/// uses (INIT only for a Byzantine origin), once per correct recipient.
fn menu(scenario: &Scenario, setup: &Setup, item: &WorkloadItem) -> Vec<InFlight> {
    let scheme = SimulatedSignatures::new(scenario.n, SIGNATURE_SEED);
    let mut out = Vec::new();
    for b in &scenario.byzantine {
        let origin = scenario.workload.iter().any(|w| w.process == b.id);
        for kind in scenario.algorithm.vocabulary() {
            if kind == MessageKind::Init && !origin {
                continue;
            }
            let id = if kind == MessageKind::Init {
                MessageId::new(item.sn, b.id)
            } else {
                item.kl_id()
            };
            for payload in [item.payload.clone(), item.payload.twin()] {
                let msg = if kind == MessageKind::Bundle {
                    ImpMessage::bundle(payload.clone(), id, vec![scheme.sign(b.id, &payload, id)])
                } else {
                    ImpMessage::new(kind, payload, id)
                };
                for to in setup.correct_ids() {
                    out.push(InFlight {
                        to,
                        from: b.id,
                        msg: msg.clone(),
                        optional: true,
                    });
                }
            }
        }
    }
    out
}

/// Explores every execution of `scenario` allowed by the model, ignoring its
/// adversary strategy and seed. Byzantine entries are replaced by the
/// scripted menu whatever their declared behavior.
pub fn explore(scenario: &Scenario, limits: OracleLimits) -> Result<OracleReport, OracleError> {
    let scenario = scenario.clone();
    // Deep recursion on cloned states: give it room.
    std::thread::Builder::new()
        .stack_size(1 << 30)
        .spawn(move || explore_inner(&scenario, limits))
        .expect("spawn explorer thread")
        .join()
        .expect("explorer thread panicked")
}

fn explore_inner(scenario: &Scenario, limits: OracleLimits) -> Result<OracleReport, OracleError> {
    if scenario.n > MAX_PROCESSES {
        return Err(OracleError::Unsupported(format!(
            "n = {} exceeds {MAX_PROCESSES}",
            scenario.n
        )));
    }
    let setup = scenario.setup()?;
    let item = match scenario.workload.first() {
        Some(w) => w.clone(),
        None => return Err(OracleError::Unsupported("empty workload".into())),
    };
    let single_instance = match setup.expectation {
        Expectation::Mbrb(_) => scenario.workload.len() == 1,
        Expectation::Klcast { .. } => scenario.workload.iter().all(|w| w.kl_id() == item.kl_id()),
    };
    if !single_instance {
        return Err(OracleError::Unsupported("one broadcast instance at a time".into()));
    }

    let correct = setup.correct_set();
    let correct_ids = setup.correct_ids();
    let symmetric = scenario.algorithm != Algorithm::SbKlcast;
    let class = ProcessId::all(scenario.n)
        .map(|p| {
            let distinguished = scenario.workload.iter().any(|w| w.process == p || w.kl_id().origin == p);
            if !symmetric || distinguished {
                p.0
            } else {
                0
            }
        })
        .collect();
    let payloads: BTreeSet<_> = scenario.workload.iter().map(|w| &w.payload).collect();
    let reduced = scenario.byzantine.is_empty() && payloads.len() == 1 && symmetric;

    let nodes = scenario.participants(&setup);
    let initial = State {
        events: vec![Vec::new(); nodes.len()],
        nodes,
        pending: menu(scenario, &setup, &item),
        workload: scenario
            .workload_pairs()
            .into_iter()
            .filter(|(p, _)| correct.contains(p))
            .collect(),
    };
    let mut ex = Explorer {
        t_m: scenario.t_m,
        victim_sets: subsets_up_to(&correct_ids, scenario.t_m as usize),
        correct,
        setup,
        class,
        reduced,
        memo: HashMap::new(),
        limit: limits.max_branches,
        branches: 0,
        terminal: 0,
        overflow: false,
        counterexample: None,
    };
    let sum = ex.dfs(initial)?;
    let report = OracleReport {
        states: ex.memo.len() as u64,
        branches: ex.branches.min(ex.limit),
        executions: sum.executions,
        terminal_states: ex.terminal,
        min_deliverers: sum.min,
        reduced,
        counterexample: ex.counterexample,
    };
    if ex.overflow {
        return Err(OracleError::StateSpaceOverflow {
            limit: ex.limit,
            partial: Box::new(report),
        });
    }
    Ok(report)
}
