use std::collections::BTreeSet;
use std::hash::Hasher;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::byzantine::{ByzantineBehavior, ByzantineNode};
use super::properties::Expectation;
use crate::klcast_sb::{SbNode, SignatureScheme, SimulatedSignatures};
use crate::klcast_sf::{KlcastRequest, SfNode};
use crate::mbrb::{MbrbProcess, MbrbRequest};
use crate::netsim::{
    Action, AdversaryStrategy, ConfigError, ImpMessage, MessageAdversary, MessageId, MessageKind,
    Network, Node, Payload, ProcessId, RandomScheduler, RunLimits, Scheduler, Trace,
};
use crate::params::{
    mbrb_guarantee, sb_guarantees, sf_guarantees, KlcastConfig, MbrbAlgorithm, SystemParams,
};

pub(crate) const SIGNATURE_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "bracha")]
    Bracha,
    #[serde(rename = "imbs-raynal", alias = "ir")]
    ImbsRaynal,
    #[serde(rename = "sf-klcast")]
    SfKlcast,
    #[serde(rename = "sb-klcast")]
    SbKlcast,
}

impl Algorithm {
    pub fn mbrb(self) -> Option<MbrbAlgorithm> {
        match self {
            Algorithm::Bracha => Some(MbrbAlgorithm::BrachaRevisited),
            Algorithm::ImbsRaynal => Some(MbrbAlgorithm::ImbsRaynalRevisited),
            _ => None,
        }
    }

    /// Message kinds on the wire, starting with the one a broadcaster
    /// sends first.
    pub fn vocabulary(self) -> Vec<MessageKind> {
        match self {
            Algorithm::Bracha => vec![MessageKind::Init, MessageKind::Echo, MessageKind::Ready],
            Algorithm::ImbsRaynal => vec![MessageKind::Init, MessageKind::Witness],
            Algorithm::SfKlcast => vec![MessageKind::Msg],
            Algorithm::SbKlcast => vec![MessageKind::Bundle],
        }
    }
}

/// Quorum parameters for the standalone kl-cast algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KlcastSpec {
    pub q_d: u32,
    #[serde(default)]
    pub q_f: Option<u32>,
    #[serde(default)]
    pub single: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ByzantineEntry {
    pub id: ProcessId,
    pub behavior: ByzantineBehavior,
}

/// One application request. For the MBRB algorithms `process`
/// mbrb-broadcasts `payload` with `sn`; for kl-cast it kl-casts `payload`
/// under `(sn, id_origin)`, where `id_origin` defaults to `process`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadItem {
    pub process: ProcessId,
    pub sn: u64,
    pub payload: Payload,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id_origin: Option<ProcessId>,
}

impl WorkloadItem {
    pub fn kl_id(&self) -> MessageId {
        MessageId::new(self.sn, self.id_origin.unwrap_or(self.process))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub n: u32,
    pub t_b: u32,
    pub t_m: u32,
    #[serde(default)]
    pub byzantine: Vec<ByzantineEntry>,
    #[serde(default)]
    pub adversary: AdversaryStrategy,
    #[serde(default)]
    pub seed: u64,
    pub algorithm: Algorithm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub klcast: Option<KlcastSpec>,
    #[serde(default)]
    pub workload: Vec<WorkloadItem>,
}

/// Everything derived from a validated scenario.
#[derive(Debug, Clone)]
pub struct Setup {
    /// `c` is the number of processes not listed as Byzantine.
    pub sys: SystemParams,
    pub expectation: Expectation,
    pub correct: Vec<bool>,
}

impl Setup {
    pub fn correct_set(&self) -> BTreeSet<ProcessId> {
        self.correct
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(|(i, _)| ProcessId::from_index(i))
            .collect()
    }

    pub fn correct_ids(&self) -> Vec<ProcessId> {
        self.correct_set().into_iter().collect()
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Scenario(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Scenario, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Scenario(format!("{}: {e}", path.display())))?;
        Scenario::from_json(&text)
    }

    pub fn with_seed(&self, seed: u64) -> Scenario {
        Scenario {
            seed,
            ..self.clone()
        }
    }

    fn behavior_of(&self, p: ProcessId) -> Option<ByzantineBehavior> {
        self.byzantine.iter().find(|b| b.id == p).map(|b| b.behavior)
    }

    pub fn setup(&self) -> Result<Setup, ConfigError> {
        let in_range = |p: ProcessId| p.0 >= 1 && p.0 <= self.n;
        let mut seen = BTreeSet::new();
        for b in &self.byzantine {
            if !in_range(b.id) {
                return Err(ConfigError::Scenario(format!("Byzantine id {} out of range", b.id)));
            }
            if !seen.insert(b.id) {
                return Err(ConfigError::Scenario(format!("Byzantine id {} listed twice", b.id)));
            }
            if b.behavior == ByzantineBehavior::SignatureEquivocator
                && self.algorithm != Algorithm::SbKlcast
            {
                return Err(ConfigError::Scenario(
                    "signature-equivocator only applies to sb-klcast".into(),
                ));
            }
        }
        if self.byzantine.len() > self.t_b as usize {
            return Err(ConfigError::Scenario(format!(
                "{} Byzantine processes exceed t_b = {}",
                self.byzantine.len(),
                self.t_b
            )));
        }
        let c = self.n.saturating_sub(self.byzantine.len() as u32);
        let sys = SystemParams::new(self.n, self.t_b, self.t_m, c)?;
        for w in &self.workload {
            if !in_range(w.process) || w.id_origin.is_some_and(|o| !in_range(o)) {
                return Err(ConfigError::Scenario(format!(
                    "workload item for {} names a process out of range",
                    w.process
                )));
            }
        }

        let expectation = match self.algorithm {
            Algorithm::Bracha | Algorithm::ImbsRaynal => {
                let alg = self.algorithm.mbrb().expect("mbrb algorithm");
                Expectation::Mbrb(mbrb_guarantee(alg, &sys)?)
            }
            Algorithm::SfKlcast => {
                let spec = self.klcast.ok_or_else(|| {
                    ConfigError::Scenario("sf-klcast needs a `klcast` block".into())
                })?;
                let q_f = spec
                    .q_f
                    .ok_or_else(|| ConfigError::Scenario("sf-klcast needs `klcast.q_f`".into()))?;
                let cfg = KlcastConfig::new(spec.q_d, q_f, spec.single.unwrap_or(true))?;
                Expectation::Klcast {
                    tag: MessageKind::Msg,
                    config: Some(cfg),
                    guarantees: sf_guarantees(&sys, &cfg)?,
                }
            }
            Algorithm::SbKlcast => {
                let spec = self.klcast.ok_or_else(|| {
                    ConfigError::Scenario("sb-klcast needs a `klcast` block".into())
                })?;
                if spec.q_f.is_some() || spec.single.is_some() {
                    return Err(ConfigError::Scenario(
                        "sb-klcast takes only `klcast.q_d`".into(),
                    ));
                }
                Expectation::Klcast {
                    tag: MessageKind::Bundle,
                    config: None,
                    guarantees: sb_guarantees(&sys, spec.q_d)?,
                }
            }
        };

        let correct = ProcessId::all(self.n)
            .map(|p| self.behavior_of(p).is_none())
            .collect();
        Ok(Setup {
            sys,
            expectation,
            correct,
        })
    }

    /// The participants of this scenario, in identity order.
    pub fn participants(&self, setup: &Setup) -> Vec<Participant> {
        let scheme: Arc<dyn SignatureScheme> =
            Arc::new(SimulatedSignatures::new(self.n, SIGNATURE_SEED));
        ProcessId::all(self.n)
            .map(|p| {
                if let Some(behavior) = self.behavior_of(p) {
                    let signer = (self.algorithm == Algorithm::SbKlcast).then(|| scheme.clone());
                    return Participant::Byzantine(ByzantineNode::new(
                        p,
                        self.n,
                        behavior,
                        self.algorithm.vocabulary(),
                        signer,
                    ));
                }
                match &setup.expectation {
                    Expectation::Mbrb(g) => Participant::Mbrb(MbrbProcess::new(p, g)),
                    Expectation::Klcast { config: Some(cfg), .. } => {
                        Participant::Sf(SfNode::new(*cfg))
                    }
                    Expectation::Klcast { config: None, .. } => {
                        let q_d = self.klcast.expect("validated").q_d;
                        Participant::Sb(SbNode::new(p, q_d, scheme.clone()))
                    }
                }
            })
            .collect()
    }

    pub fn workload_pairs(&self) -> Vec<(ProcessId, WorkloadItem)> {
        self.workload.iter().map(|w| (w.process, w.clone())).collect()
    }

    /// Builds the network with explicit adversary and scheduler, for
    /// custom strategies.
    pub fn network_with(
        &self,
        setup: &Setup,
        adversary: Box<dyn MessageAdversary>,
        scheduler: Box<dyn Scheduler>,
    ) -> Network<Participant> {
        Network::new(
            self.t_m,
            self.participants(setup),
            setup.correct.clone(),
            adversary,
            scheduler,
        )
    }

    pub fn network(&self, setup: &Setup) -> Result<Network<Participant>, ConfigError> {
        let adversary = self
            .adversary
            .build(self.t_m, &setup.correct_ids(), self.seed)?;
        Ok(self.network_with(setup, adversary, Box::new(RandomScheduler::new(self.seed))))
    }
}

/// Runs the scenario with its own adversary and seed.
pub fn run_to_quiescence(scenario: &Scenario) -> Result<Trace, ConfigError> {
    let setup = scenario.setup()?;
    run_prepared(scenario, &setup)
}

pub(crate) fn run_prepared(scenario: &Scenario, setup: &Setup) -> Result<Trace, ConfigError> {
    scenario
        .network(setup)?
        .run_to_quiescence(scenario.workload_pairs(), RunLimits::default())
}

/// Any process the simulator can host.
#[derive(Debug, Clone)]
pub enum Participant {
    Mbrb(MbrbProcess),
    Sf(SfNode),
    Sb(SbNode),
    Byzantine(ByzantineNode),
}

impl Participant {
    /// Local state hash for the exhaustive explorer, with sender sets
    /// abstracted where the object allows it.
    pub(crate) fn abstract_hash<H: Hasher>(&self, h: &mut H) {
        match self {
            Participant::Mbrb(p) => p.abstract_hash(h),
            Participant::Sf(p) => p.obj.abstract_hash(h),
            Participant::Sb(p) => p.obj.state_hash(h),
            Participant::Byzantine(_) => {}
        }
    }
}

impl Participant {
    /// Receiving `msg` now or at any later point would be a no-op.
    pub(crate) fn is_inert(&self, msg: &ImpMessage) -> bool {
        match self {
            Participant::Mbrb(p) => p.is_inert(msg),
            Participant::Sf(p) => msg.kind != MessageKind::Msg || p.obj.is_inert(&msg.payload, &msg.id),
            Participant::Sb(p) => {
                msg.kind != MessageKind::Bundle || p.obj.is_inert(&msg.payload, msg.id, &msg.sigs)
            }
            Participant::Byzantine(_) => true,
        }
    }
}

impl Node for Participant {
    type Input = WorkloadItem;

    fn on_receive(&mut self, from: ProcessId, msg: &ImpMessage) -> Vec<Action> {
        match self {
            Participant::Mbrb(p) => p.on_receive(from, msg),
            Participant::Sf(p) => p.on_receive(from, msg),
            Participant::Sb(p) => p.on_receive(from, msg),
            Participant::Byzantine(b) => b.on_receive(msg),
        }
    }

    fn invoke(&mut self, w: &WorkloadItem) -> Result<Vec<Action>, ConfigError> {
        let kl = || KlcastRequest {
            payload: w.payload.clone(),
            id: w.kl_id(),
        };
        match self {
            Participant::Mbrb(p) => p.invoke(&MbrbRequest {
                payload: w.payload.clone(),
                sn: w.sn,
            }),
            Participant::Sf(p) => p.invoke(&kl()),
            Participant::Sb(p) => p.invoke(&kl()),
            Participant::Byzantine(b) => Ok(b.on_origin(&w.payload, w.kl_id())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bracha4() -> Scenario {
        Scenario::from_json(
            r#"{"n":4,"t_b":0,"t_m":0,"algorithm":"bracha",
                "workload":[{"process":1,"sn":1,"payload":"hello"}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn parses_and_defaults() {
        let s = bracha4();
        assert_eq!(s.adversary, AdversaryStrategy::None);
        assert_eq!(s.seed, 0);
        let setup = s.setup().unwrap();
        assert_eq!(setup.sys.c(), 4);
    }

    #[test]
    fn rejects_bad_scenarios() {
        let bad = [
            r#"{"n":4,"t_b":0,"t_m":0,"algorithm":"bracha","byzantine":[{"id":2,"behavior":"silent"}]}"#,
            r#"{"n":4,"t_b":1,"t_m":0,"algorithm":"bracha","byzantine":[{"id":9,"behavior":"silent"}]}"#,
            r#"{"n":7,"t_b":1,"t_m":1,"algorithm":"bracha"}"#,
            r#"{"n":5,"t_b":1,"t_m":1,"algorithm":"sb-klcast"}"#,
            r#"{"n":5,"t_b":1,"t_m":1,"algorithm":"bracha","byzantine":[{"id":5,"behavior":"signature-equivocator"}]}"#,
            r#"{"n":4,"t_b":0,"t_m":0,"algorithm":"bracha","workload":[{"process":5,"sn":1,"payload":"x"}]}"#,
        ];
        for text in bad {
            let s = Scenario::from_json(text).unwrap();
            assert!(s.setup().is_err(), "{text}");
        }
        assert!(Scenario::from_json(r#"{"n":4,"t_b":0,"t_m":0,"algorithm":"paxos"}"#).is_err());
        assert!(Scenario::from_json(r#"{"n":4,"t_b":0,"t_m":0,"algorithm":"bracha","typo":1}"#).is_err());
    }

    #[test]
    fn sequence_reuse_is_a_config_error() {
        let mut s = bracha4();
        s.workload.push(s.workload[0].clone());
        assert!(matches!(
            run_to_quiescence(&s),
            Err(ConfigError::SequenceReuse { .. })
        ));
    }

    #[test]
    fn failure_free_bracha_delivers_everywhere() {
        let t = run_to_quiescence(&bracha4()).unwrap();
        assert!(t.quiescent);
        let n = t
            .events()
            .filter(|e| matches!(e, crate::netsim::Event::MbrbDeliver { .. }))
            .count();
        assert_eq!(n, 4);
    }

    #[test]
    fn ir_alias() {
        let s = Scenario::from_json(r#"{"n":6,"t_b":1,"t_m":0,"algorithm":"ir"}"#).unwrap();
        assert_eq!(s.algorithm, Algorithm::ImbsRaynal);
    }
}
