//! Signature-based kl-cast.
//!
//! Each process signs at most one payload per identity and gossips every
//! valid signature it knows for `(m, id)` in a `BUNDLE`. A bundle is
//! rebroadcast only when it brings a valid signature this process has not
//! broadcast yet, and `(m, id)` is kl-delivered once the process has
//! broadcast `q_d` valid signatures for it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::klcast_sf::{effects_to_actions, KlEffect, KlcastRequest};
use crate::netsim::{Action, ConfigError, ImpMessage, MessageId, MessageKind, Node, Payload, ProcessId};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct Signature {
    pub signer: ProcessId,
    pub tag: u64,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sig[{}:{:016x}]", self.signer, self.tag)
    }
}

/// Deterministic signatures over `(m, id)`.
///
/// `sign` must only be called with the caller's own identity; the
/// simulator hands every participant a [`SbKlcast`] or Byzantine behavior
/// bound to its own identity, which models each process being the sole
/// holder of its private key.
pub trait SignatureScheme: Send + Sync + fmt::Debug {
    fn sign(&self, signer: ProcessId, payload: &Payload, id: MessageId) -> Signature;
    fn verify(&self, sig: &Signature, payload: &Payload, id: MessageId) -> bool;
}

/// Keyed-hash signatures: a per-process secret derived from a scheme seed,
/// and a 64-bit tag `SHA-256(secret, m, id)`. Good enough for in-model
/// unforgeability, not for anything else.
#[derive(Debug, Clone)]
pub struct SimulatedSignatures {
    secrets: Vec<[u8; 16]>,
}

impl SimulatedSignatures {
    pub fn new(n: u32, seed: u64) -> Self {
        let secrets = (1..=n)
            .map(|i| {
                let d = Sha256::new()
                    .chain_update(b"key")
                    .chain_update(seed.to_le_bytes())
                    .chain_update(i.to_le_bytes())
                    .finalize();
                let mut s = [0u8; 16];
                s.copy_from_slice(&d[..16]);
                s
            })
            .collect();
        SimulatedSignatures { secrets }
    }

    fn tag(&self, signer: ProcessId, payload: &Payload, id: MessageId) -> Option<u64> {
        let secret = self.secrets.get(signer.0.checked_sub(1)? as usize)?;
        let d = Sha256::new()
            .chain_update(secret)
            .chain_update((payload.as_str().len() as u64).to_le_bytes())
            .chain_update(payload.as_str().as_bytes())
            .chain_update(id.sn.to_le_bytes())
            .chain_update(id.origin.0.to_le_bytes())
            .finalize();
        let mut t = [0u8; 8];
        t.copy_from_slice(&d[..8]);
        Some(u64::from_le_bytes(t))
    }
}

impl SignatureScheme for SimulatedSignatures {
    fn sign(&self, signer: ProcessId, payload: &Payload, id: MessageId) -> Signature {
        Signature {
            signer,
            tag: self.tag(signer, payload, id).expect("signer within the system"),
        }
    }

    fn verify(&self, sig: &Signature, payload: &Payload, id: MessageId) -> bool {
        self.tag(sig.signer, payload, id) == Some(sig.tag)
    }
}

type Key = (MessageId, Payload);

#[derive(Debug, Clone)]
pub struct SbKlcast {
    me: ProcessId,
    q_d: u32,
    scheme: Arc<dyn SignatureScheme>,
    signed: BTreeSet<MessageId>,
    known: BTreeMap<Key, BTreeSet<Signature>>,
    sent: BTreeMap<Key, BTreeSet<Signature>>,
    delivered: BTreeMap<MessageId, Payload>,
}

impl SbKlcast {
    pub fn new(me: ProcessId, q_d: u32, scheme: Arc<dyn SignatureScheme>) -> Self {
        SbKlcast {
            me,
            q_d,
            scheme,
            signed: BTreeSet::new(),
            known: BTreeMap::new(),
            sent: BTreeMap::new(),
            delivered: BTreeMap::new(),
        }
    }

    pub fn delivered(&self) -> &BTreeMap<MessageId, Payload> {
        &self.delivered
    }

    pub fn known_sigs(&self, payload: &Payload, id: MessageId) -> usize {
        self.known
            .get(&(id, payload.clone()))
            .map_or(0, BTreeSet::len)
    }

    pub fn sent_sigs(&self, payload: &Payload, id: MessageId) -> usize {
        self.sent
            .get(&(id, payload.clone()))
            .map_or(0, BTreeSet::len)
    }

    fn broadcast_known(&mut self, key: &Key) -> KlEffect {
        let sigs = self.known.get(key).cloned().unwrap_or_default();
        let msg = ImpMessage::bundle(key.1.clone(), key.0, sigs.iter().copied().collect());
        self.sent.insert(key.clone(), sigs);
        KlEffect::Broadcast(msg)
    }

    pub fn kl_cast(&mut self, payload: Payload, id: MessageId) -> Vec<KlEffect> {
        if !self.signed.insert(id) {
            return Vec::new();
        }
        let own = self.scheme.sign(self.me, &payload, id);
        let key = (id, payload);
        self.known.entry(key.clone()).or_default().insert(own);
        let mut out = vec![self.broadcast_known(&key)];
        out.extend(self.check_delivery(&key));
        out
    }

    pub fn on_bundle(&mut self, payload: &Payload, id: MessageId, sigs: &[Signature]) -> Vec<KlEffect> {
        let key = (id, payload.clone());
        let valid: BTreeSet<Signature> = sigs
            .iter()
            .filter(|s| self.scheme.verify(s, payload, id))
            .copied()
            .collect();
        let sent = self.sent.get(&key);
        if valid.iter().all(|s| sent.is_some_and(|set| set.contains(s))) {
            return Vec::new();
        }
        self.known.entry(key.clone()).or_default().extend(valid);
        let mut out = vec![self.broadcast_known(&key)];
        out.extend(self.check_delivery(&key));
        out
    }

    /// Receiving `sigs` for `(m, id)` now or later changes nothing: every
    /// valid signature in it was already broadcast.
    pub fn is_inert(&self, payload: &Payload, id: MessageId, sigs: &[Signature]) -> bool {
        let sent = self.sent.get(&(id, payload.clone()));
        sigs.iter()
            .filter(|s| self.scheme.verify(s, payload, id))
            .all(|s| sent.is_some_and(|set| set.contains(s)))
    }

    /// Hash of the whole local state, signatures included.
    pub fn state_hash<H: std::hash::Hasher>(&self, h: &mut H) {
        use std::hash::Hash;
        self.signed.hash(h);
        self.known.hash(h);
        self.sent.hash(h);
        self.delivered.hash(h);
    }

    fn check_delivery(&mut self, key: &Key) -> Option<KlEffect> {
        let enough = self
            .sent
            .get(key)
            .is_some_and(|s| s.len() >= self.q_d as usize);
        if enough && !self.delivered.contains_key(&key.0) {
            self.delivered.insert(key.0, key.1.clone());
            return Some(KlEffect::Deliver {
                payload: key.1.clone(),
                id: key.0,
            });
        }
        None
    }
}

/// A process running one standalone signature-based kl-cast object.
#[derive(Debug, Clone)]
pub struct SbNode {
    pub obj: SbKlcast,
}

impl SbNode {
    pub fn new(me: ProcessId, q_d: u32, scheme: Arc<dyn SignatureScheme>) -> Self {
        SbNode {
            obj: SbKlcast::new(me, q_d, scheme),
        }
    }
}

impl Node for SbNode {
    type Input = KlcastRequest;

    fn on_receive(&mut self, _from: ProcessId, msg: &ImpMessage) -> Vec<Action> {
        if msg.kind != MessageKind::Bundle {
            return Vec::new();
        }
        let mut out = Vec::new();
        let effects = self.obj.on_bundle(&msg.payload, msg.id, &msg.sigs);
        effects_to_actions(MessageKind::Bundle, effects, &mut out);
        out
    }

    fn invoke(&mut self, req: &KlcastRequest) -> Result<Vec<Action>, ConfigError> {
        let mut out = vec![Action::KlCast {
            tag: MessageKind::Bundle,
            payload: req.payload.clone(),
            id: req.id,
        }];
        let effects = self.obj.kl_cast(req.payload.clone(), req.id);
        effects_to_actions(MessageKind::Bundle, effects, &mut out);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id() -> MessageId {
        MessageId::new(1, ProcessId(1))
    }

    fn scheme() -> Arc<SimulatedSignatures> {
        Arc::new(SimulatedSignatures::new(5, 7))
    }

    fn bundle_sigs(e: &[KlEffect]) -> Option<usize> {
        e.iter().find_map(|e| match e {
            KlEffect::Broadcast(m) => Some(m.sigs.len()),
            _ => None,
        })
    }

    fn delivered(e: &[KlEffect]) -> bool {
        e.iter().any(|e| matches!(e, KlEffect::Deliver { .. }))
    }

    #[test]
    fn signatures_bind_signer_payload_and_id() {
        let s = scheme();
        let m = Payload::from("m");
        let sig = s.sign(ProcessId(2), &m, id());
        assert!(s.verify(&sig, &m, id()));
        assert!(!s.verify(&sig, &m.twin(), id()));
        assert!(!s.verify(&sig, &m, MessageId::new(2, ProcessId(1))));
        let forged = Signature {
            signer: ProcessId(3),
            tag: sig.tag,
        };
        assert!(!s.verify(&forged, &m, id()));
        assert_eq!(sig, s.sign(ProcessId(2), &m, id()));
        assert!(!s.verify(&Signature { signer: ProcessId(9), tag: 0 }, &m, id()));
    }

    #[test]
    fn fresh_cast_sends_own_signature() {
        let mut o = SbKlcast::new(ProcessId(1), 3, scheme());
        assert_eq!(bundle_sigs(&o.kl_cast("m".into(), id())), Some(1));
        assert!(o.kl_cast("m".into(), id()).is_empty());
        assert!(o.kl_cast("x".into(), id()).is_empty());
    }

    #[test]
    fn cast_merges_previously_received() {
        let s = scheme();
        let m = Payload::from("m");
        let mut o = SbKlcast::new(ProcessId(1), 5, s.clone());
        let sigs = [s.sign(ProcessId(2), &m, id()), s.sign(ProcessId(3), &m, id())];
        o.on_bundle(&m, id(), &sigs);
        assert_eq!(bundle_sigs(&o.kl_cast(m.clone(), id())), Some(3));
    }

    #[test]
    fn stale_bundle_has_no_effect() {
        let s = scheme();
        let m = Payload::from("m");
        let mut o = SbKlcast::new(ProcessId(1), 5, s.clone());
        let sigs: Vec<_> = (2..=4).map(|i| s.sign(ProcessId(i), &m, id())).collect();
        assert_eq!(bundle_sigs(&o.on_bundle(&m, id(), &sigs)), Some(3));
        assert!(o.on_bundle(&m, id(), &sigs).is_empty());
        assert!(o.on_bundle(&m, id(), &sigs[..1]).is_empty());
    }

    #[test]
    fn invalid_signatures_are_dropped() {
        let s = scheme();
        let m = Payload::from("m");
        let mut o = SbKlcast::new(ProcessId(1), 5, s.clone());
        let sigs = [
            s.sign(ProcessId(2), &m, id()),
            s.sign(ProcessId(3), &m.twin(), id()),
            Signature { signer: ProcessId(4), tag: 1 },
        ];
        assert_eq!(bundle_sigs(&o.on_bundle(&m, id(), &sigs)), Some(1));
        assert_eq!(o.known_sigs(&m, id()), 1);
        assert!(o.on_bundle(&m, id(), &sigs[1..]).is_empty());
    }

    #[test]
    fn delivers_after_broadcasting_q_d() {
        let s = scheme();
        let m = Payload::from("m");
        let mut o = SbKlcast::new(ProcessId(1), 3, s.clone());
        let e = o.on_bundle(&m, id(), &[s.sign(ProcessId(2), &m, id()), s.sign(ProcessId(3), &m, id())]);
        assert!(!delivered(&e));
        assert_eq!(o.sent_sigs(&m, id()), 2);
        let e = o.on_bundle(&m, id(), &[s.sign(ProcessId(4), &m, id())]);
        assert_eq!(bundle_sigs(&e), Some(3));
        assert!(delivered(&e));
        let e = o.on_bundle(&m, id(), &[s.sign(ProcessId(5), &m, id())]);
        assert_eq!(bundle_sigs(&e), Some(4));
        assert!(!delivered(&e));
    }

    #[test]
    fn one_delivery_even_when_two_payloads_reach_quorum() {
        // q_d = 1 is below t_b + 1 for any t_b >= 1: outside the
        // assumptions, the delivered-ids guard still yields one delivery.
        let s = scheme();
        let m = Payload::from("m");
        let mut o = SbKlcast::new(ProcessId(1), 1, s.clone());
        assert!(delivered(&o.on_bundle(&m, id(), &[s.sign(ProcessId(5), &m, id())])));
        let t = m.twin();
        let e = o.on_bundle(&t, id(), &[s.sign(ProcessId(5), &t, id())]);
        assert_eq!(bundle_sigs(&e), Some(1));
        assert!(!delivered(&e));
        assert_eq!(o.delivered().get(&id()), Some(&m));
    }
}
