//! Byzantine reliable broadcast under a message adversary, built from
//! signature-free kl-cast objects.
//!
//! Bracha variant: `INIT(m, sn)` from `p_j` makes every receiver kl-cast
//! `ECHO(m)` under `(sn, j)`; kl-delivering it makes the process kl-cast
//! `READY(m)` under the same identity, and kl-delivering that READY is the
//! mbrb-delivery of `(m, sn, j)`.
//!
//! Imbs-Raynal variant: a single `WITNESS` object replaces the two rounds.

use std::collections::{BTreeMap, BTreeSet};
use std::hash::{Hash, Hasher};

use thiserror::Error;

use crate::klcast_sf::{KlEffect, SfKlcast};
use crate::netsim::{Action, ConfigError, ImpMessage, MessageId, MessageKind, Node, Payload, ProcessId};
use crate::params::{MbrbAlgorithm, MbrbGuarantee, ObjectRole};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MbrbError {
    #[error("process {process} already used sequence number {sn}")]
    SequenceReuse { process: ProcessId, sn: u64 },
}

impl From<MbrbError> for ConfigError {
    fn from(e: MbrbError) -> Self {
        match e {
            MbrbError::SequenceReuse { process, sn } => ConfigError::SequenceReuse { process, sn },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Objects {
    Bracha { echo: SfKlcast, ready: SfKlcast },
    ImbsRaynal { witness: SfKlcast },
}

/// Application request: mbrb-broadcast `payload` with sequence number `sn`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MbrbRequest {
    pub payload: Payload,
    pub sn: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MbrbProcess {
    me: ProcessId,
    objects: Objects,
    used_sn: BTreeSet<u64>,
    delivered: BTreeMap<MessageId, Payload>,
}

impl MbrbProcess {
    /// Builds a process whose kl-cast objects use exactly the
    /// configurations in `guarantee`.
    pub fn new(me: ProcessId, guarantee: &MbrbGuarantee) -> Self {
        let cfg = |role| {
            guarantee
                .config(role)
                .expect("guarantee carries every constituent object")
        };
        let objects = match guarantee.algorithm {
            MbrbAlgorithm::BrachaRevisited => Objects::Bracha {
                echo: SfKlcast::new(cfg(ObjectRole::Echo), MessageKind::Echo),
                ready: SfKlcast::new(cfg(ObjectRole::Ready), MessageKind::Ready),
            },
            MbrbAlgorithm::ImbsRaynalRevisited => Objects::ImbsRaynal {
                witness: SfKlcast::new(cfg(ObjectRole::Witness), MessageKind::Witness),
            },
        };
        MbrbProcess {
            me,
            objects,
            used_sn: BTreeSet::new(),
            delivered: BTreeMap::new(),
        }
    }

    pub fn id(&self) -> ProcessId {
        self.me
    }

    pub fn algorithm(&self) -> MbrbAlgorithm {
        match self.objects {
            Objects::Bracha { .. } => MbrbAlgorithm::BrachaRevisited,
            Objects::ImbsRaynal { .. } => MbrbAlgorithm::ImbsRaynalRevisited,
        }
    }

    pub fn delivered(&self) -> &BTreeMap<MessageId, Payload> {
        &self.delivered
    }

    /// The kl-cast object playing `role`, if this variant has one.
    pub fn object(&self, role: ObjectRole) -> Option<&SfKlcast> {
        match (&self.objects, role) {
            (Objects::Bracha { echo, .. }, ObjectRole::Echo) => Some(echo),
            (Objects::Bracha { ready, .. }, ObjectRole::Ready) => Some(ready),
            (Objects::ImbsRaynal { witness }, ObjectRole::Witness) => Some(witness),
            _ => None,
        }
    }

    pub fn mbrb_broadcast(&mut self, payload: Payload, sn: u64) -> Result<Vec<Action>, MbrbError> {
        if !self.used_sn.insert(sn) {
            return Err(MbrbError::SequenceReuse {
                process: self.me,
                sn,
            });
        }
        let id = MessageId::new(sn, self.me);
        Ok(vec![
            Action::MbrbBroadcast {
                payload: payload.clone(),
                sn,
            },
            Action::UrBroadcast(ImpMessage::new(MessageKind::Init, payload, id)),
        ])
    }

    /// `INIT(m, sn)` from `sender`: the instance identity is built from the
    /// authenticated channel sender, never from the message body.
    pub fn on_init(&mut self, sender: ProcessId, payload: &Payload, sn: u64) -> Vec<Action> {
        let id = MessageId::new(sn, sender);
        let mut out = Vec::new();
        let first = match &mut self.objects {
            Objects::Bracha { echo, .. } => echo,
            Objects::ImbsRaynal { witness } => witness,
        };
        let tag = first.tag();
        out.push(Action::KlCast {
            tag,
            payload: payload.clone(),
            id,
        });
        let effects = first.kl_cast(payload.clone(), id);
        self.absorb(tag, effects, &mut out);
        out
    }

    fn on_protocol(&mut self, sender: ProcessId, msg: &ImpMessage) -> Vec<Action> {
        let obj = match (&mut self.objects, msg.kind) {
            (Objects::Bracha { echo, .. }, MessageKind::Echo) => echo,
            (Objects::Bracha { ready, .. }, MessageKind::Ready) => ready,
            (Objects::ImbsRaynal { witness }, MessageKind::Witness) => witness,
            _ => return Vec::new(),
        };
        let effects = obj.on_msg(sender, &msg.payload, msg.id);
        let mut out = Vec::new();
        self.absorb(msg.kind, effects, &mut out);
        out
    }

    /// Turns the effects of the object speaking `tag` into actions and
    /// runs the next round on each kl-delivery.
    fn absorb(&mut self, tag: MessageKind, effects: Vec<KlEffect>, out: &mut Vec<Action>) {
        for e in effects {
            match e {
                KlEffect::Broadcast(msg) => out.push(Action::UrBroadcast(msg)),
                KlEffect::Deliver { payload, id } => {
                    out.push(Action::KlDeliver {
                        tag,
                        payload: payload.clone(),
                        id,
                    });
                    match (&mut self.objects, tag) {
                        (Objects::Bracha { ready, .. }, MessageKind::Echo) => {
                            out.push(Action::KlCast {
                                tag: MessageKind::Ready,
                                payload: payload.clone(),
                                id,
                            });
                            let next = ready.kl_cast(payload, id);
                            self.absorb(MessageKind::Ready, next, out);
                        }
                        _ => self.mbrb_deliver(payload, id, out),
                    }
                }
            }
        }
    }

    fn mbrb_deliver(&mut self, payload: Payload, id: MessageId, out: &mut Vec<Action>) {
        if self.delivered.contains_key(&id) {
            return;
        }
        self.delivered.insert(id, payload.clone());
        out.push(Action::MbrbDeliver { payload, id });
    }

    /// See [`SfKlcast::is_inert`]; INIT never is, since it is logged.
    pub fn is_inert(&self, msg: &ImpMessage) -> bool {
        let obj = match (&self.objects, msg.kind) {
            (Objects::Bracha { echo, .. }, MessageKind::Echo) => echo,
            (Objects::Bracha { ready, .. }, MessageKind::Ready) => ready,
            (Objects::ImbsRaynal { witness }, MessageKind::Witness) => witness,
            (_, MessageKind::Init) => return false,
            _ => return true,
        };
        obj.is_inert(&msg.payload, &msg.id)
    }

    /// Hash with sender sets abstracted to counts; see
    /// [`SfKlcast::abstract_hash`].
    pub fn abstract_hash<H: Hasher>(&self, h: &mut H) {
        match &self.objects {
            Objects::Bracha { echo, ready } => {
                echo.abstract_hash(h);
                ready.abstract_hash(h);
            }
            Objects::ImbsRaynal { witness } => witness.abstract_hash(h),
        }
        self.used_sn.hash(h);
        self.delivered.hash(h);
    }
}

impl Node for MbrbProcess {
    type Input = MbrbRequest;

    fn on_receive(&mut self, from: ProcessId, msg: &ImpMessage) -> Vec<Action> {
        match msg.kind {
            MessageKind::Init => self.on_init(from, &msg.payload, msg.id.sn),
            _ => self.on_protocol(from, msg),
        }
    }

    fn invoke(&mut self, req: &MbrbRequest) -> Result<Vec<Action>, ConfigError> {
        Ok(self.mbrb_broadcast(req.payload.clone(), req.sn)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{bracha_configs, ir_config, SystemParams};

    fn bracha(me: u32) -> MbrbProcess {
        let g = bracha_configs(&SystemParams::worst_case(4, 1, 0).unwrap()).unwrap();
        MbrbProcess::new(ProcessId(me), &g)
    }

    fn count<F: Fn(&Action) -> bool>(a: &[Action], f: F) -> usize {
        a.iter().filter(|x| f(x)).count()
    }

    fn msg(kind: MessageKind, m: &str, sn: u64, origin: u32) -> ImpMessage {
        ImpMessage::new(kind, m.into(), MessageId::new(sn, ProcessId(origin)))
    }

    #[test]
    fn broadcast_emits_one_init_and_refuses_reuse() {
        let mut p = bracha(1);
        let a = p.mbrb_broadcast("m".into(), 1).unwrap();
        assert_eq!(
            count(&a, |x| matches!(x, Action::UrBroadcast(m) if m.kind == MessageKind::Init)),
            1
        );
        assert_eq!(
            p.mbrb_broadcast("m2".into(), 1),
            Err(MbrbError::SequenceReuse {
                process: ProcessId(1),
                sn: 1
            })
        );
        assert!(p.mbrb_broadcast("m".into(), 2).is_ok());
    }

    #[test]
    fn init_uses_channel_sender_as_origin() {
        let mut p = bracha(2);
        // Body claims origin 4, channel says 3.
        let a = p.on_receive(ProcessId(3), &msg(MessageKind::Init, "m", 7, 4));
        let expected = MessageId::new(7, ProcessId(3));
        assert!(a
            .iter()
            .any(|x| matches!(x, Action::UrBroadcast(m) if m.kind == MessageKind::Echo && m.id == expected)));
    }

    #[test]
    fn equivocating_init_is_absorbed_by_the_guard() {
        let mut p = bracha(2);
        let a = p.on_receive(ProcessId(3), &msg(MessageKind::Init, "m", 1, 3));
        assert_eq!(count(&a, |x| matches!(x, Action::UrBroadcast(_))), 1);
        let a = p.on_receive(ProcessId(3), &msg(MessageKind::Init, "m~", 1, 3));
        assert_eq!(count(&a, |x| matches!(x, Action::UrBroadcast(_))), 0);
        let a = p.on_receive(ProcessId(4), &msg(MessageKind::Init, "m", 1, 4));
        assert_eq!(count(&a, |x| matches!(x, Action::UrBroadcast(_))), 1);
    }

    #[test]
    fn echo_quorum_triggers_ready_then_ready_quorum_delivers_once() {
        // n=4, t_b=1: echo (3, 2), ready (3, 2).
        let mut p = bracha(1);
        let e = msg(MessageKind::Echo, "m", 1, 4);
        let r = msg(MessageKind::Ready, "m", 1, 4);
        p.on_receive(ProcessId(2), &e);
        p.on_receive(ProcessId(3), &e);
        let a = p.on_receive(ProcessId(4), &e);
        assert_eq!(count(&a, |x| matches!(x, Action::KlDeliver { tag: MessageKind::Echo, .. })), 1);
        assert_eq!(
            count(&a, |x| matches!(x, Action::UrBroadcast(m) if m.kind == MessageKind::Ready)),
            1
        );
        p.on_receive(ProcessId(2), &r);
        p.on_receive(ProcessId(3), &r);
        let a = p.on_receive(ProcessId(4), &r);
        assert_eq!(count(&a, |x| matches!(x, Action::MbrbDeliver { .. })), 1);
        let a = p.on_receive(ProcessId(1), &r);
        assert_eq!(count(&a, |x| matches!(x, Action::MbrbDeliver { .. })), 0);
        assert_eq!(p.delivered().len(), 1);
    }

    #[test]
    fn witness_delivery_is_mbrb_delivery() {
        let g = ir_config(&SystemParams::worst_case(6, 1, 0).unwrap()).unwrap();
        let mut p = MbrbProcess::new(ProcessId(1), &g);
        let w = msg(MessageKind::Witness, "m", 1, 2);
        let mut delivered = 0;
        for s in 2..=6 {
            let a = p.on_receive(ProcessId(s), &w);
            delivered += count(&a, |x| matches!(x, Action::MbrbDeliver { .. }));
        }
        assert_eq!(delivered, 1);
        assert!(p.object(ObjectRole::Echo).is_none());
        assert_eq!(p.object(ObjectRole::Witness).unwrap().config().q_d(), 5);
    }

    #[test]
    fn foreign_kinds_are_ignored() {
        let mut p = bracha(1);
        assert!(p.on_receive(ProcessId(2), &msg(MessageKind::Witness, "m", 1, 2)).is_empty());
        assert!(p.on_receive(ProcessId(2), &msg(MessageKind::Bundle, "m", 1, 2)).is_empty());
    }
}
