//! Asynchronous authenticated message passing with a message adversary.
//!
//! A correct process disseminates an imp-message with `ur_broadcast`, which
//! enqueues one copy per process (itself included). For each such
//! invocation the [`MessageAdversary`] may drop the copies addressed to at
//! most `t_m` correct processes. Byzantine processes bypass the macro and
//! may address arbitrary messages to arbitrary recipients.
//!
//! Delivery order is chosen by a seeded [`Scheduler`], so a run is a pure
//! function of its inputs.

mod adversary;
mod network;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use adversary::{
    AdversaryStrategy, BroadcastCtx, FixedVictims, MessageAdversary, NoSuppression,
    RandomPerBroadcast, Rotating,
};
pub use network::{
    Choice, ConfigError, Envelope, Network, Node, RandomScheduler, RunLimits, Scheduler, DEFAULT_MAX_STEPS,
};

use crate::klcast_sb::Signature;

/// 1-based process identity.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct ProcessId(pub u32);

impl ProcessId {
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(index: usize) -> Self {
        ProcessId(index as u32 + 1)
    }

    /// All identities of an `n`-process system.
    pub fn all(n: u32) -> impl Iterator<Item = ProcessId> {
        (1..=n).map(ProcessId)
    }
}

impl fmt::Display for ProcessId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// Identity of a broadcast instance: a sequence number and the process that
/// owns it.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct MessageId {
    pub sn: u64,
    pub origin: ProcessId,
}

impl MessageId {
    pub fn new(sn: u64, origin: ProcessId) -> Self {
        MessageId { sn, origin }
    }
}

impl fmt::Display for MessageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.sn, self.origin)
    }
}

/// Application message bytes, kept as text so traces stay readable.
#[derive(
    Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Payload(pub String);

impl Payload {
    pub fn new(s: impl Into<String>) -> Self {
        Payload(s.into())
    }

    /// The conflicting payload an equivocating process pairs with `self`.
    pub fn twin(&self) -> Payload {
        Payload(format!("{}~", self.0))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Payload {
    fn from(s: &str) -> Self {
        Payload(s.to_owned())
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "UPPERCASE")]
pub enum MessageKind {
    Msg,
    Init,
    Echo,
    Ready,
    Witness,
    Bundle,
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MessageKind::Msg => "MSG",
            MessageKind::Init => "INIT",
            MessageKind::Echo => "ECHO",
            MessageKind::Ready => "READY",
            MessageKind::Witness => "WITNESS",
            MessageKind::Bundle => "BUNDLE",
        };
        f.write_str(s)
    }
}

/// Implementation-level network message. The sender is not part of the
/// message: it is channel metadata carried by the [`Envelope`].
///
/// For `INIT` the `id.origin` field is whatever the sender wrote; receivers
/// must use the authenticated channel sender instead.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ImpMessage {
    pub kind: MessageKind,
    pub payload: Payload,
    pub id: MessageId,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sigs: Vec<Signature>,
}

impl ImpMessage {
    pub fn new(kind: MessageKind, payload: Payload, id: MessageId) -> Self {
        ImpMessage {
            kind,
            payload,
            id,
            sigs: Vec::new(),
        }
    }

    pub fn bundle(payload: Payload, id: MessageId, sigs: Vec<Signature>) -> Self {
        ImpMessage {
            kind: MessageKind::Bundle,
            payload,
            id,
            sigs,
        }
    }
}

impl fmt::Display for ImpMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}, {})", self.kind, self.payload, self.id)?;
        if !self.sigs.is_empty() {
            write!(f, "[{} sigs]", self.sigs.len())?;
        }
        Ok(())
    }
}

/// What a process handler asks the network to do or to record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    UrBroadcast(ImpMessage),
    /// Point-to-point send outside the broadcast macro. Only Byzantine
    /// processes emit this.
    SendTo { to: ProcessId, msg: ImpMessage },
    KlCast {
        tag: MessageKind,
        payload: Payload,
        id: MessageId,
    },
    KlDeliver {
        tag: MessageKind,
        payload: Payload,
        id: MessageId,
    },
    MbrbBroadcast { payload: Payload, sn: u64 },
    MbrbDeliver { payload: Payload, id: MessageId },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    UrBroadcast {
        broadcast: u64,
        from: ProcessId,
        correct: bool,
        msg: ImpMessage,
    },
    Suppressed {
        broadcast: u64,
        copy: u64,
        to: ProcessId,
    },
    Injected {
        copy: u64,
        from: ProcessId,
        to: ProcessId,
        msg: ImpMessage,
    },
    Received {
        copy: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        broadcast: Option<u64>,
        from: ProcessId,
        to: ProcessId,
        msg: ImpMessage,
    },
    KlCast {
        process: ProcessId,
        tag: MessageKind,
        payload: Payload,
        id: MessageId,
    },
    KlDeliver {
        process: ProcessId,
        tag: MessageKind,
        payload: Payload,
        id: MessageId,
    },
    MbrbBroadcast {
        process: ProcessId,
        payload: Payload,
        sn: u64,
    },
    MbrbDeliver {
        process: ProcessId,
        payload: Payload,
        id: MessageId,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: u64,
    #[serde(flatten)]
    pub event: Event,
}

/// Ordered event log of one execution.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    /// Set when the run drained every pending copy.
    pub quiescent: bool,
}

impl Trace {
    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.records.iter().map(|r| &r.event)
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for rec in &self.records {
            out.push_str(&serde_json::to_string(rec).expect("trace records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str, quiescent: bool) -> Result<Trace, serde_json::Error> {
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Trace { records, quiescent })
    }

    /// Number of copies that reached a recipient.
    pub fn message_count(&self) -> usize {
        self.events()
            .filter(|e| matches!(e, Event::Received { .. }))
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn process_id_indexing() {
        assert_eq!(ProcessId(1).index(), 0);
        assert_eq!(ProcessId::from_index(3), ProcessId(4));
        assert_eq!(ProcessId::all(3).collect::<Vec<_>>().len(), 3);
    }

    #[test]
    fn twin_differs() {
        let m = Payload::from("v");
        assert_ne!(m.twin(), m);
        assert_ne!(m.twin().twin(), m.twin());
    }

    #[test]
    fn trace_jsonl_roundtrip() {
        let id = MessageId::new(1, ProcessId(2));
        let trace = Trace {
            records: vec![
                TraceRecord {
                    step: 0,
                    event: Event::MbrbBroadcast {
                        process: ProcessId(2),
                        payload: "x".into(),
                        sn: 1,
                    },
                },
                TraceRecord {
                    step: 1,
                    event: Event::Received {
                        copy: 0,
                        broadcast: Some(0),
                        from: ProcessId(2),
                        to: ProcessId(1),
                        msg: ImpMessage::new(MessageKind::Init, "x".into(), id),
                    },
                },
            ],
            quiescent: true,
        };
        let text = trace.to_jsonl();
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("\"event\":\"received\""));
        assert_eq!(Trace::from_jsonl(&text, true).unwrap(), trace);
    }
}
