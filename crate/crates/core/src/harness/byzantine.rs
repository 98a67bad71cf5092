use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::klcast_sb::{Signature, SignatureScheme};
use crate::netsim::{Action, ImpMessage, MessageId, MessageKind, Payload, ProcessId};

/// Built-in Byzantine behaviors. Each reacts at most once per message
/// kind and identity, so runs stay finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ByzantineBehavior {
    /// Never sends anything.
    Silent,
    /// Sends `m` to the lower half of the processes and a conflicting
    /// payload to the upper half, for every kind it takes part in.
    Equivocator,
    /// Sends every protocol kind with both the observed and a conflicting
    /// payload to everyone.
    QuorumSpammer,
    /// Signs two payloads for one identity and shows both to everyone.
    SignatureEquivocator,
}

impl fmt::Display for ByzantineBehavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ByzantineBehavior::Silent => "silent",
            ByzantineBehavior::Equivocator => "equivocator",
            ByzantineBehavior::QuorumSpammer => "quorum-spammer",
            ByzantineBehavior::SignatureEquivocator => "signature-equivocator",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct ByzantineNode {
    me: ProcessId,
    n: u32,
    behavior: ByzantineBehavior,
    /// Kinds of the protocol under attack; the first is the one an origin
    /// starts with.
    vocabulary: Vec<MessageKind>,
    signer: Option<Arc<dyn SignatureScheme>>,
    reacted: BTreeSet<(MessageKind, MessageId)>,
    /// Valid signatures seen per `(id, m)`, replayed by the signature
    /// equivocator.
    harvested: BTreeMap<(MessageId, Payload), BTreeSet<Signature>>,
}

impl ByzantineNode {
    pub fn new(
        me: ProcessId,
        n: u32,
        behavior: ByzantineBehavior,
        vocabulary: Vec<MessageKind>,
        signer: Option<Arc<dyn SignatureScheme>>,
    ) -> Self {
        ByzantineNode {
            me,
            n,
            behavior,
            vocabulary,
            signer,
            reacted: BTreeSet::new(),
            harvested: BTreeMap::new(),
        }
    }

    pub fn behavior(&self) -> ByzantineBehavior {
        self.behavior
    }

    fn make(&self, kind: MessageKind, payload: &Payload, id: MessageId) -> ImpMessage {
        if kind != MessageKind::Bundle {
            return ImpMessage::new(kind, payload.clone(), id);
        }
        let mut sigs: BTreeSet<Signature> = self
            .harvested
            .get(&(id, payload.clone()))
            .cloned()
            .unwrap_or_default();
        if let Some(s) = &self.signer {
            sigs.insert(s.sign(self.me, payload, id));
        }
        ImpMessage::bundle(payload.clone(), id, sigs.into_iter().collect())
    }

    fn split(&self, kind: MessageKind, payload: &Payload, id: MessageId, out: &mut Vec<Action>) {
        let twin = payload.twin();
        for to in ProcessId::all(self.n) {
            let p = if to.0 <= self.n / 2 { payload } else { &twin };
            out.push(Action::SendTo {
                to,
                msg: self.make(kind, p, id),
            });
        }
    }

    fn both_to_all(&self, kind: MessageKind, payload: &Payload, id: MessageId, out: &mut Vec<Action>) {
        for p in [payload.clone(), payload.twin()] {
            let msg = self.make(kind, &p, id);
            for to in ProcessId::all(self.n) {
                out.push(Action::SendTo { to, msg: msg.clone() });
            }
        }
    }

    fn attack(&mut self, kind: MessageKind, payload: &Payload, id: MessageId, as_origin: bool) -> Vec<Action> {
        let mut out = Vec::new();
        match self.behavior {
            ByzantineBehavior::Silent => {}
            ByzantineBehavior::Equivocator => {
                if self.reacted.insert((kind, id)) {
                    self.split(kind, payload, id, &mut out);
                }
            }
            ByzantineBehavior::QuorumSpammer => {
                let kinds: Vec<MessageKind> = self
                    .vocabulary
                    .iter()
                    .copied()
                    .filter(|k| *k != MessageKind::Init || as_origin)
                    .collect();
                for k in kinds {
                    if self.reacted.insert((k, id)) {
                        self.both_to_all(k, payload, id, &mut out);
                    }
                }
            }
            ByzantineBehavior::SignatureEquivocator => {
                if self.reacted.insert((kind, id)) {
                    self.both_to_all(kind, payload, id, &mut out);
                }
            }
        }
        out
    }

    /// The process is named as a broadcaster in the workload.
    pub fn on_origin(&mut self, payload: &Payload, id: MessageId) -> Vec<Action> {
        let kind = self.vocabulary[0];
        let id = if kind == MessageKind::Init {
            MessageId::new(id.sn, self.me)
        } else {
            id
        };
        self.attack(kind, payload, id, true)
    }

    pub fn on_receive(&mut self, msg: &ImpMessage) -> Vec<Action> {
        if msg.kind == MessageKind::Init || !self.vocabulary.contains(&msg.kind) {
            return Vec::new();
        }
        if msg.kind == MessageKind::Bundle {
            if let Some(s) = &self.signer {
                let valid: Vec<Signature> = msg
                    .sigs
                    .iter()
                    .filter(|sig| s.verify(sig, &msg.payload, msg.id))
                    .copied()
                    .collect();
                self.harvested
                    .entry((msg.id, msg.payload.clone()))
                    .or_default()
                    .extend(valid);
            }
        }
        self.attack(msg.kind, &msg.payload, msg.id, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::klcast_sb::SimulatedSignatures;

    fn sends(a: &[Action]) -> Vec<(u32, String)> {
        a.iter()
            .filter_map(|x| match x {
                Action::SendTo { to, msg } => Some((to.0, msg.payload.0.clone())),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn equivocator_splits_once() {
        let mut b = ByzantineNode::new(
            ProcessId(4),
            4,
            ByzantineBehavior::Equivocator,
            vec![MessageKind::Init, MessageKind::Echo, MessageKind::Ready],
            None,
        );
        let id = MessageId::new(1, ProcessId(1));
        let a = b.on_origin(&"m".into(), id);
        assert_eq!(
            sends(&a),
            vec![(1, "m".into()), (2, "m".into()), (3, "m~".into()), (4, "m~".into())]
        );
        let echo = ImpMessage::new(MessageKind::Echo, "m".into(), id);
        assert_eq!(sends(&b.on_receive(&echo)).len(), 4);
        assert!(b.on_receive(&echo).is_empty());
    }

    #[test]
    fn spammer_floods_non_init_kinds() {
        let mut b = ByzantineNode::new(
            ProcessId(3),
            3,
            ByzantineBehavior::QuorumSpammer,
            vec![MessageKind::Init, MessageKind::Echo, MessageKind::Ready],
            None,
        );
        let id = MessageId::new(1, ProcessId(1));
        let a = b.on_receive(&ImpMessage::new(MessageKind::Echo, "m".into(), id));
        // ECHO and READY, two payloads each, three recipients.
        assert_eq!(sends(&a).len(), 12);
        assert!(a.iter().all(|x| matches!(x, Action::SendTo { msg, .. } if msg.kind != MessageKind::Init)));
    }

    #[test]
    fn signature_equivocator_signs_both() {
        let s: Arc<dyn SignatureScheme> = Arc::new(SimulatedSignatures::new(5, 1));
        let mut b = ByzantineNode::new(
            ProcessId(5),
            5,
            ByzantineBehavior::SignatureEquivocator,
            vec![MessageKind::Bundle],
            Some(s.clone()),
        );
        let id = MessageId::new(1, ProcessId(1));
        let m = Payload::from("m");
        let a = b.on_receive(&ImpMessage::bundle(m.clone(), id, vec![s.sign(ProcessId(1), &m, id)]));
        assert_eq!(a.len(), 10);
        for x in &a {
            let Action::SendTo { msg, .. } = x else { panic!() };
            assert!(msg.sigs.iter().all(|sig| s.verify(sig, &msg.payload, id)));
            assert!(msg.sigs.iter().any(|sig| sig.signer == ProcessId(5)));
        }
    }

    #[test]
    fn silent_does_nothing() {
        let mut b = ByzantineNode::new(ProcessId(2), 4, ByzantineBehavior::Silent, vec![MessageKind::Msg], None);
        let id = MessageId::new(1, ProcessId(1));
        assert!(b.on_origin(&"m".into(), id).is_empty());
        assert!(b.on_receive(&ImpMessage::new(MessageKind::Msg, "m".into(), id)).is_empty());
    }
}
