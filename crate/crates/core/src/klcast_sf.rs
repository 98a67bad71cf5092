//! Signature-free kl-cast.
//!
//! A process kl-casting `(m, id)` broadcasts `MSG(m, id)` unless it already
//! broadcast something for `id`. On receiving `MSG(m, id)` from `q_f`
//! distinct processes it forwards the message (at most once per `id` when
//! `single` is set, at most once per `(m, id)` otherwise), and on `q_d`
//! distinct senders it kl-delivers `(m, id)` once per `id`.
//!
//! The same state machine backs the ECHO, READY and WITNESS objects of the
//! broadcast algorithms; `tag` is the message kind it speaks on the wire.

use std::collections::{BTreeMap, BTreeSet};
use std::hash::{Hash, Hasher};

use crate::netsim::{Action, ConfigError, ImpMessage, MessageId, MessageKind, Node, Payload, ProcessId};
use crate::params::KlcastConfig;

/// Output of a kl-cast object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KlEffect {
    Broadcast(ImpMessage),
    Deliver { payload: Payload, id: MessageId },
}

/// Translates kl-cast effects into network actions.
pub fn effects_to_actions(tag: MessageKind, effects: Vec<KlEffect>, out: &mut Vec<Action>) {
    for e in effects {
        out.push(match e {
            KlEffect::Broadcast(msg) => Action::UrBroadcast(msg),
            KlEffect::Deliver { payload, id } => Action::KlDeliver { tag, payload, id },
        });
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SfKlcast {
    cfg: KlcastConfig,
    tag: MessageKind,
    /// Distinct senders per `(id, m)`.
    seen: BTreeMap<MessageId, BTreeMap<Payload, BTreeSet<ProcessId>>>,
    /// Payloads this process ur-broadcast per `id`.
    sent: BTreeMap<MessageId, BTreeSet<Payload>>,
    delivered: BTreeMap<MessageId, Payload>,
}

impl SfKlcast {
    pub fn new(cfg: KlcastConfig, tag: MessageKind) -> Self {
        SfKlcast {
            cfg,
            tag,
            seen: BTreeMap::new(),
            sent: BTreeMap::new(),
            delivered: BTreeMap::new(),
        }
    }

    pub fn config(&self) -> &KlcastConfig {
        &self.cfg
    }

    pub fn tag(&self) -> MessageKind {
        self.tag
    }

    pub fn delivered(&self) -> &BTreeMap<MessageId, Payload> {
        &self.delivered
    }

    pub fn broadcasts(&self, id: &MessageId) -> impl Iterator<Item = &Payload> {
        self.sent.get(id).into_iter().flatten()
    }

    pub fn sender_count(&self, payload: &Payload, id: &MessageId) -> usize {
        self.seen
            .get(id)
            .and_then(|per| per.get(payload))
            .map_or(0, BTreeSet::len)
    }

    fn broadcast(&mut self, payload: Payload, id: MessageId) -> KlEffect {
        self.sent.entry(id).or_default().insert(payload.clone());
        KlEffect::Broadcast(ImpMessage::new(self.tag, payload, id))
    }

    pub fn kl_cast(&mut self, payload: Payload, id: MessageId) -> Vec<KlEffect> {
        if self.sent.get(&id).is_some_and(|s| !s.is_empty()) {
            return Vec::new();
        }
        vec![self.broadcast(payload, id)]
    }

    pub fn on_msg(&mut self, sender: ProcessId, payload: &Payload, id: MessageId) -> Vec<KlEffect> {
        let senders = self
            .seen
            .entry(id)
            .or_default()
            .entry(payload.clone())
            .or_default();
        if !senders.insert(sender) {
            return Vec::new();
        }
        let count = senders.len();
        let mut out = Vec::new();

        if count >= self.cfg.q_f() as usize {
            let sent = self.sent.get(&id);
            let none_for_id = sent.is_none_or(|s| s.is_empty());
            let this_pair_sent = sent.is_some_and(|s| s.contains(payload));
            if (!self.cfg.single() && !this_pair_sent) || none_for_id {
                out.push(self.broadcast(payload.clone(), id));
            }
        }

        if count >= self.cfg.q_d() as usize && !self.delivered.contains_key(&id) {
            self.delivered.insert(id, payload.clone());
            out.push(KlEffect::Deliver {
                payload: payload.clone(),
                id,
            });
        }
        out
    }

    /// No copy of `(m, id)` can make this object act again: `id` is
    /// delivered and forwarding `m` is ruled out for good.
    pub fn is_inert(&self, payload: &Payload, id: &MessageId) -> bool {
        if !self.delivered.contains_key(id) {
            return false;
        }
        match self.sent.get(id) {
            Some(s) if self.cfg.single() => !s.is_empty(),
            Some(s) => s.contains(payload),
            None => false,
        }
    }

    /// Hash of the state with sender sets replaced by their sizes, and by
    /// a fixed marker once the pair is inert. Two states with equal
    /// abstract hashes react identically to any future copy, provided no
    /// sender ever repeats a `(m, id)` to this process.
    pub fn abstract_hash<H: Hasher>(&self, h: &mut H) {
        self.seen.len().hash(h);
        for (id, per) in &self.seen {
            id.hash(h);
            per.len().hash(h);
            for (m, senders) in per {
                m.hash(h);
                if self.is_inert(m, id) {
                    usize::MAX.hash(h);
                } else {
                    senders.len().hash(h);
                }
            }
        }
        self.sent.hash(h);
        self.delivered.hash(h);
    }
}

/// A kl-cast request: cast `payload` under `id`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KlcastRequest {
    pub payload: Payload,
    pub id: MessageId,
}

/// A process running one standalone signature-free kl-cast object over
/// `MSG` messages.
#[derive(Debug, Clone)]
pub struct SfNode {
    pub obj: SfKlcast,
}

impl SfNode {
    pub fn new(cfg: KlcastConfig) -> Self {
        SfNode {
            obj: SfKlcast::new(cfg, MessageKind::Msg),
        }
    }
}

impl Node for SfNode {
    type Input = KlcastRequest;

    fn on_receive(&mut self, from: ProcessId, msg: &ImpMessage) -> Vec<Action> {
        if msg.kind != self.obj.tag {
            return Vec::new();
        }
        let mut out = Vec::new();
        let effects = self.obj.on_msg(from, &msg.payload, msg.id);
        effects_to_actions(self.obj.tag, effects, &mut out);
        out
    }

    fn invoke(&mut self, req: &KlcastRequest) -> Result<Vec<Action>, ConfigError> {
        let mut out = vec![Action::KlCast {
            tag: self.obj.tag,
            payload: req.payload.clone(),
            id: req.id,
        }];
        let effects = self.obj.kl_cast(req.payload.clone(), req.id);
        effects_to_actions(self.obj.tag, effects, &mut out);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id() -> MessageId {
        MessageId::new(1, ProcessId(1))
    }

    fn obj(q_d: u32, q_f: u32, single: bool) -> SfKlcast {
        SfKlcast::new(KlcastConfig::new(q_d, q_f, single).unwrap(), MessageKind::Msg)
    }

    fn broadcasts(e: &[KlEffect]) -> usize {
        e.iter().filter(|e| matches!(e, KlEffect::Broadcast(_))).count()
    }

    fn deliveries(e: &[KlEffect]) -> usize {
        e.iter().filter(|e| matches!(e, KlEffect::Deliver { .. })).count()
    }

    #[test]
    fn kl_cast_guards_on_id() {
        let mut o = obj(3, 2, true);
        assert_eq!(broadcasts(&o.kl_cast("a".into(), id())), 1);
        assert!(o.kl_cast("b".into(), id()).is_empty());
        assert!(o.kl_cast("a".into(), id()).is_empty());
        assert_eq!(broadcasts(&o.kl_cast("a".into(), MessageId::new(2, ProcessId(1)))), 1);
    }

    #[test]
    fn single_blocks_forwarding_after_cast() {
        let mut o = obj(4, 2, true);
        o.kl_cast("x".into(), id());
        let m = Payload::from("y");
        assert!(o.on_msg(ProcessId(2), &m, id()).is_empty());
        assert_eq!(broadcasts(&o.on_msg(ProcessId(3), &m, id())), 0);
    }

    #[test]
    fn multi_forwards_each_payload_once() {
        let mut o = obj(4, 2, false);
        o.kl_cast("x".into(), id());
        let m = Payload::from("y");
        o.on_msg(ProcessId(2), &m, id());
        assert_eq!(broadcasts(&o.on_msg(ProcessId(3), &m, id())), 1);
        assert_eq!(broadcasts(&o.on_msg(ProcessId(4), &m, id())), 0);
    }

    #[test]
    fn forwards_without_prior_cast() {
        let mut o = obj(3, 2, true);
        let m = Payload::from("y");
        o.on_msg(ProcessId(2), &m, id());
        let e = o.on_msg(ProcessId(3), &m, id());
        assert_eq!(broadcasts(&e), 1);
        assert_eq!(o.broadcasts(&id()).count(), 1);
    }

    #[test]
    fn delivers_once_at_q_d() {
        let mut o = obj(3, 3, true);
        let m = Payload::from("y");
        assert_eq!(deliveries(&o.on_msg(ProcessId(1), &m, id())), 0);
        assert_eq!(deliveries(&o.on_msg(ProcessId(2), &m, id())), 0);
        assert_eq!(deliveries(&o.on_msg(ProcessId(3), &m, id())), 1);
        assert_eq!(deliveries(&o.on_msg(ProcessId(4), &m, id())), 0);
        assert_eq!(o.delivered().get(&id()), Some(&m));
    }

    #[test]
    fn duplicate_sender_is_ignored() {
        let mut o = obj(2, 1, true);
        let m = Payload::from("y");
        assert_eq!(broadcasts(&o.on_msg(ProcessId(2), &m, id())), 1);
        assert!(o.on_msg(ProcessId(2), &m, id()).is_empty());
        assert_eq!(o.sender_count(&m, &id()), 1);
    }

    #[test]
    fn payload_counts_are_independent() {
        let mut o = obj(2, 2, false);
        let (a, b) = (Payload::from("a"), Payload::from("b"));
        o.on_msg(ProcessId(5), &a, id());
        o.on_msg(ProcessId(5), &b, id());
        assert_eq!(o.sender_count(&a, &id()), 1);
        assert_eq!(o.sender_count(&b, &id()), 1);
    }

    #[test]
    fn forwarding_ignores_delivery_state() {
        // Delivery of one payload does not stop forwarding of another when
        // single is off.
        let mut o = obj(2, 2, false);
        let (a, b) = (Payload::from("a"), Payload::from("b"));
        o.on_msg(ProcessId(1), &a, id());
        let e = o.on_msg(ProcessId(2), &a, id());
        assert_eq!((broadcasts(&e), deliveries(&e)), (1, 1));
        o.on_msg(ProcessId(1), &b, id());
        let e = o.on_msg(ProcessId(2), &b, id());
        assert_eq!((broadcasts(&e), deliveries(&e)), (1, 0));
    }
}
