//! Trace predicates for the kl-cast and MBRB specifications.
//!
//! Liveness properties are evaluated at quiescence: the protocols are
//! event driven, so once nothing is pending nothing else will happen. A
//! trace that was cut short fails every liveness property.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::netsim::{Event, MessageId, MessageKind, Payload, ProcessId, Trace, TraceRecord};
use crate::params::{GlobalMode, KlcastConfig, KlcastGuarantees, MbrbGuarantee};

/// What a trace is checked against.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Expectation {
    Mbrb(MbrbGuarantee),
    Klcast {
        /// Wire kind of the object under test.
        tag: MessageKind,
        /// Present for the signature-free object.
        config: Option<KlcastConfig>,
        guarantees: KlcastGuarantees,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    KlValidity,
    KlNoDuplication,
    KlConditionalNoDuplicity,
    KlLocalDelivery,
    KlWeakGlobalDelivery,
    KlStrongGlobalDelivery,
    MbrbValidity,
    MbrbNoDuplication,
    MbrbNoDuplicity,
    MbrbLocalDelivery,
    MbrbGlobalDelivery,
    /// The execution is one the model allows: the message adversary
    /// stayed within `t_m` per correct broadcast and the network neither
    /// forged, altered nor duplicated a copy.
    Admissibility,
}

impl Property {
    pub const KLCAST: [Property; 6] = [
        Property::KlValidity,
        Property::KlNoDuplication,
        Property::KlConditionalNoDuplicity,
        Property::KlLocalDelivery,
        Property::KlWeakGlobalDelivery,
        Property::KlStrongGlobalDelivery,
    ];

    pub const MBRB: [Property; 6] = [
        Property::MbrbValidity,
        Property::MbrbNoDuplication,
        Property::MbrbNoDuplicity,
        Property::MbrbLocalDelivery,
        Property::MbrbGlobalDelivery,
        Property::Admissibility,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::KlValidity => "kl-Validity",
            Property::KlNoDuplication => "kl-No-duplication",
            Property::KlConditionalNoDuplicity => "kl-Conditional-no-duplicity",
            Property::KlLocalDelivery => "kl-Local-delivery",
            Property::KlWeakGlobalDelivery => "kl-Weak-Global-delivery",
            Property::KlStrongGlobalDelivery => "kl-Strong-Global-delivery",
            Property::MbrbValidity => "MBRB-Validity",
            Property::MbrbNoDuplication => "MBRB-No-duplication",
            Property::MbrbNoDuplicity => "MBRB-No-duplicity",
            Property::MbrbLocalDelivery => "MBRB-Local-delivery",
            Property::MbrbGlobalDelivery => "MBRB-Global-delivery",
            Property::Admissibility => "Admissibility",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyVerdict {
    pub property: Property,
    pub holds: bool,
    pub detail: String,
    /// Offending events; non-empty exactly when `holds` is false.
    pub witness: Vec<TraceRecord>,
}

impl PropertyVerdict {
    fn pass(property: Property, detail: impl Into<String>) -> Self {
        PropertyVerdict {
            property,
            holds: true,
            detail: detail.into(),
            witness: Vec::new(),
        }
    }

    fn fail(property: Property, detail: impl Into<String>, witness: Vec<TraceRecord>) -> Self {
        debug_assert!(!witness.is_empty());
        PropertyVerdict {
            property,
            holds: false,
            detail: detail.into(),
            witness,
        }
    }
}

/// Correct deliverers of one identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusEntry {
    pub id: MessageId,
    pub correct_deliverers: usize,
    pub payloads: BTreeSet<Payload>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyVerdicts {
    pub verdicts: Vec<PropertyVerdict>,
    pub census: Vec<CensusEntry>,
}

impl PropertyVerdicts {
    pub fn all_hold(&self) -> bool {
        self.verdicts.iter().all(|v| v.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyVerdict> {
        self.verdicts.iter().filter(|v| !v.holds)
    }

    pub fn verdict(&self, p: Property) -> Option<&PropertyVerdict> {
        self.verdicts.iter().find(|v| v.property == p)
    }

    /// Smallest census count, if any identity was broadcast or delivered.
    pub fn min_deliverers(&self) -> Option<usize> {
        self.census.iter().map(|c| c.correct_deliverers).min()
    }
}

/// Checks every property `expected` calls for.
pub fn check_properties(
    trace: &Trace,
    correct: &BTreeSet<ProcessId>,
    t_m: u32,
    expected: &Expectation,
) -> PropertyVerdicts {
    match expected {
        Expectation::Mbrb(g) => PropertyVerdicts {
            verdicts: vec![
                mbrb_validity(trace, correct),
                mbrb_no_duplication(trace, correct),
                mbrb_no_duplicity(trace, correct),
                mbrb_local_delivery(trace, correct),
                mbrb_global_delivery(trace, correct, g.ell_mbrb),
                admissibility(trace, correct, t_m),
            ],
            census: mbrb_census(trace, correct),
        },
        Expectation::Klcast {
            tag, guarantees: g, ..
        } => {
            let global = match g.global_mode {
                GlobalMode::Weak => kl_weak_global_delivery(trace, correct, *tag, g.ell),
                GlobalMode::Strong => kl_strong_global_delivery(trace, correct, *tag, g.ell),
            };
            PropertyVerdicts {
                verdicts: vec![
                    kl_validity(trace, correct, *tag, g.k_prime),
                    kl_no_duplication(trace, correct, *tag),
                    kl_conditional_no_duplicity(trace, correct, *tag, g.delta),
                    kl_local_delivery(trace, correct, *tag, g.k),
                    global,
                    admissibility(trace, correct, t_m),
                ],
                census: kl_census(trace, correct, *tag),
            }
        }
    }
}

struct KlEvent<'a> {
    rec: &'a TraceRecord,
    process: ProcessId,
    payload: &'a Payload,
    id: MessageId,
}

fn kl_casts<'a>(
    trace: &'a Trace,
    correct: &'a BTreeSet<ProcessId>,
    tag: MessageKind,
) -> impl Iterator<Item = KlEvent<'a>> + 'a {
    trace.records.iter().filter_map(move |rec| match &rec.event {
        Event::KlCast {
            process,
            tag: t,
            payload,
            id,
        } if *t == tag && correct.contains(process) => Some(KlEvent {
            rec,
            process: *process,
            payload,
            id: *id,
        }),
        _ => None,
    })
}

fn kl_delivers<'a>(
    trace: &'a Trace,
    correct: &'a BTreeSet<ProcessId>,
    tag: MessageKind,
) -> impl Iterator<Item = KlEvent<'a>> + 'a {
    trace.records.iter().filter_map(move |rec| match &rec.event {
        Event::KlDeliver {
            process,
            tag: t,
            payload,
            id,
        } if *t == tag && correct.contains(process) => Some(KlEvent {
            rec,
            process: *process,
            payload,
            id: *id,
        }),
        _ => None,
    })
}

fn mbrb_delivers<'a>(
    trace: &'a Trace,
    correct: &'a BTreeSet<ProcessId>,
) -> impl Iterator<Item = KlEvent<'a>> + 'a {
    trace.records.iter().filter_map(move |rec| match &rec.event {
        Event::MbrbDeliver {
            process,
            payload,
            id,
        } if correct.contains(process) => Some(KlEvent {
            rec,
            process: *process,
            payload,
            id: *id,
        }),
        _ => None,
    })
}

/// Correct casters per `(id, m)`.
fn casters(trace: &Trace, correct: &BTreeSet<ProcessId>, tag: MessageKind) -> BTreeMap<(MessageId, Payload), BTreeSet<ProcessId>> {
    let mut out: BTreeMap<_, BTreeSet<_>> = BTreeMap::new();
    for e in kl_casts(trace, correct, tag) {
        out.entry((e.id, e.payload.clone())).or_default().insert(e.process);
    }
    out
}

/// Payloads kl-cast by correct processes per identity.
fn cast_payloads(trace: &Trace, correct: &BTreeSet<ProcessId>, tag: MessageKind) -> BTreeMap<MessageId, BTreeSet<Payload>> {
    let mut out: BTreeMap<_, BTreeSet<_>> = BTreeMap::new();
    for e in kl_casts(trace, correct, tag) {
        out.entry(e.id).or_default().insert(e.payload.clone());
    }
    out
}

fn not_quiescent(trace: &Trace, property: Property) -> Option<PropertyVerdict> {
    if trace.quiescent {
        return None;
    }
    let witness = trace.records.last().cloned().into_iter().collect::<Vec<_>>();
    let witness = if witness.is_empty() {
        vec![TraceRecord {
            step: 0,
            event: Event::Suppressed {
                broadcast: 0,
                copy: 0,
                to: ProcessId(0),
            },
        }]
    } else {
        witness
    };
    Some(PropertyVerdict::fail(
        property,
        "trace stopped before quiescence; liveness cannot be established",
        witness,
    ))
}

pub fn kl_validity(trace: &Trace, correct: &BTreeSet<ProcessId>, tag: MessageKind, k_prime: i64) -> PropertyVerdict {
    let p = Property::KlValidity;
    let casters = casters(trace, correct, tag);
    for d in kl_delivers(trace, correct, tag) {
        let n = casters.get(&(d.id, d.payload.clone())).map_or(0, BTreeSet::len);
        if (n as i64) < k_prime {
            return PropertyVerdict::fail(
                p,
                format!(
                    "{} kl-delivered ({}, {}) with {n} correct casters, k' = {k_prime}",
                    d.process, d.payload, d.id
                ),
                vec![d.rec.clone()],
            );
        }
    }
    PropertyVerdict::pass(p, format!("every delivery backed by >= {k_prime} correct casters"))
}

pub fn kl_no_duplication(trace: &Trace, correct: &BTreeSet<ProcessId>, tag: MessageKind) -> PropertyVerdict {
    no_duplication(Property::KlNoDuplication, kl_delivers(trace, correct, tag))
}

pub fn kl_conditional_no_duplicity(
    trace: &Trace,
    correct: &BTreeSet<ProcessId>,
    tag: MessageKind,
    delta: bool,
) -> PropertyVerdict {
    let p = Property::KlConditionalNoDuplicity;
    if !delta {
        return PropertyVerdict::pass(p, "delta = false: not required");
    }
    no_duplicity(p, kl_delivers(trace, correct, tag))
}

pub fn kl_local_delivery(trace: &Trace, correct: &BTreeSet<ProcessId>, tag: MessageKind, k: i64) -> PropertyVerdict {
    let p = Property::KlLocalDelivery;
    if let Some(v) = not_quiescent(trace, p) {
        return v;
    }
    let payloads = cast_payloads(trace, correct, tag);
    let casters = casters(trace, correct, tag);
    let delivered: BTreeSet<(MessageId, &Payload)> =
        kl_delivers(trace, correct, tag).map(|d| (d.id, d.payload)).collect();
    let mut checked = 0;
    for (id, ms) in &payloads {
        if ms.len() != 1 {
            continue;
        }
        let m = ms.iter().next().expect("one payload");
        let who = &casters[&(*id, m.clone())];
        if (who.len() as i64) < k {
            continue;
        }
        checked += 1;
        if !delivered.contains(&(*id, m)) {
            let witness = kl_casts(trace, correct, tag)
                .filter(|e| e.id == *id)
                .map(|e| e.rec.clone())
                .collect();
            return PropertyVerdict::fail(
                p,
                format!("{} correct casters of ({m}, {id}) but no correct delivery", who.len()),
                witness,
            );
        }
    }
    PropertyVerdict::pass(p, format!("{checked} identities met the k = {k} hypothesis"))
}

pub fn kl_weak_global_delivery(
    trace: &Trace,
    correct: &BTreeSet<ProcessId>,
    tag: MessageKind,
    ell: i64,
) -> PropertyVerdict {
    let p = Property::KlWeakGlobalDelivery;
    if let Some(v) = not_quiescent(trace, p) {
        return v;
    }
    let mut per_id: BTreeMap<MessageId, (BTreeSet<ProcessId>, Vec<TraceRecord>)> = BTreeMap::new();
    for d in kl_delivers(trace, correct, tag) {
        let e = per_id.entry(d.id).or_default();
        e.0.insert(d.process);
        e.1.push(d.rec.clone());
    }
    for (id, (who, recs)) in per_id {
        if (who.len() as i64) < ell {
            return PropertyVerdict::fail(
                p,
                format!("only {} correct processes kl-delivered for {id}, l = {ell}", who.len()),
                recs,
            );
        }
    }
    PropertyVerdict::pass(p, format!(">= {ell} correct deliverers per delivered identity"))
}

pub fn kl_strong_global_delivery(
    trace: &Trace,
    correct: &BTreeSet<ProcessId>,
    tag: MessageKind,
    ell: i64,
) -> PropertyVerdict {
    let p = Property::KlStrongGlobalDelivery;
    if let Some(v) = not_quiescent(trace, p) {
        return v;
    }
    let payloads = cast_payloads(trace, correct, tag);
    global_delivery(p, kl_delivers(trace, correct, tag), ell, |id, m| {
        payloads.get(&id).is_none_or(|ms| ms.iter().all(|x| x == m))
    })
}

pub fn mbrb_validity(trace: &Trace, correct: &BTreeSet<ProcessId>) -> PropertyVerdict {
    let p = Property::MbrbValidity;
    let broadcast: BTreeSet<(ProcessId, u64, &Payload)> = trace
        .events()
        .filter_map(|e| match e {
            Event::MbrbBroadcast {
                process,
                payload,
                sn,
            } => Some((*process, *sn, payload)),
            _ => None,
        })
        .collect();
    for d in mbrb_delivers(trace, correct) {
        if correct.contains(&d.id.origin) && !broadcast.contains(&(d.id.origin, d.id.sn, d.payload)) {
            return PropertyVerdict::fail(
                p,
                format!(
                    "{} mbrb-delivered ({}, {}) never mbrb-broadcast by correct {}",
                    d.process, d.payload, d.id, d.id.origin
                ),
                vec![d.rec.clone()],
            );
        }
    }
    PropertyVerdict::pass(p, "every delivery from a correct origin was broadcast by it")
}

pub fn mbrb_no_duplication(trace: &Trace, correct: &BTreeSet<ProcessId>) -> PropertyVerdict {
    no_duplication(Property::MbrbNoDuplication, mbrb_delivers(trace, correct))
}

pub fn mbrb_no_duplicity(trace: &Trace, correct: &BTreeSet<ProcessId>) -> PropertyVerdict {
    no_duplicity(Property::MbrbNoDuplicity, mbrb_delivers(trace, correct))
}

pub fn mbrb_local_delivery(trace: &Trace, correct: &BTreeSet<ProcessId>) -> PropertyVerdict {
    let p = Property::MbrbLocalDelivery;
    if let Some(v) = not_quiescent(trace, p) {
        return v;
    }
    let delivered: BTreeSet<(MessageId, &Payload)> =
        mbrb_delivers(trace, correct).map(|d| (d.id, d.payload)).collect();
    let mut checked = 0;
    for rec in &trace.records {
        if let Event::MbrbBroadcast {
            process,
            payload,
            sn,
        } = &rec.event
        {
            if !correct.contains(process) {
                continue;
            }
            checked += 1;
            let id = MessageId::new(*sn, *process);
            if !delivered.contains(&(id, payload)) {
                return PropertyVerdict::fail(
                    p,
                    format!("no correct process mbrb-delivered ({payload}, {id})"),
                    vec![rec.clone()],
                );
            }
        }
    }
    PropertyVerdict::pass(p, format!("{checked} correct broadcasts delivered at least once"))
}

pub fn mbrb_global_delivery(trace: &Trace, correct: &BTreeSet<ProcessId>, ell_mbrb: i64) -> PropertyVerdict {
    let p = Property::MbrbGlobalDelivery;
    if let Some(v) = not_quiescent(trace, p) {
        return v;
    }
    global_delivery(p, mbrb_delivers(trace, correct), ell_mbrb, |_, _| true)
}

/// Suppression budget and channel integrity.
pub fn admissibility(trace: &Trace, correct: &BTreeSet<ProcessId>, t_m: u32) -> PropertyVerdict {
    let p = Property::Admissibility;
    let mut broadcasts: BTreeMap<u64, &TraceRecord> = BTreeMap::new();
    let mut suppressed: BTreeMap<u64, Vec<&TraceRecord>> = BTreeMap::new();
    let mut injected: BTreeMap<u64, &TraceRecord> = BTreeMap::new();
    let mut received: BTreeSet<u64> = BTreeSet::new();
    for rec in &trace.records {
        match &rec.event {
            Event::UrBroadcast { broadcast, .. } => {
                broadcasts.insert(*broadcast, rec);
            }
            Event::Suppressed { broadcast, .. } => {
                suppressed.entry(*broadcast).or_default().push(rec)
            }
            Event::Injected { copy, .. } => {
                injected.insert(*copy, rec);
            }
            Event::Received {
                copy,
                broadcast,
                from,
                to,
                msg,
            } => {
                if !received.insert(*copy) {
                    return PropertyVerdict::fail(p, format!("copy {copy} received twice"), vec![rec.clone()]);
                }
                let origin = match broadcast {
                    Some(b) => broadcasts.get(b).copied(),
                    None => injected.get(copy).copied(),
                };
                let genuine = match origin.map(|r| &r.event) {
                    Some(Event::UrBroadcast { from: f, msg: m, broadcast: b, .. }) => {
                        f == from
                            && m == msg
                            && !suppressed.get(b).is_some_and(|s| {
                                s.iter().any(|r| matches!(r.event, Event::Suppressed { to: t, .. } if t == *to))
                            })
                    }
                    Some(Event::Injected { from: f, to: t, msg: m, .. }) => f == from && t == to && m == msg,
                    _ => false,
                };
                if !genuine {
                    let mut witness: Vec<TraceRecord> = origin.into_iter().cloned().collect();
                    witness.push(rec.clone());
                    return PropertyVerdict::fail(
                        p,
                        format!("copy {copy} to {to} does not match anything {from} sent"),
                        witness,
                    );
                }
            }
            _ => {}
        }
    }
    for (b, recs) in &suppressed {
        let Some(bc) = broadcasts.get(b) else {
            return PropertyVerdict::fail(p, format!("suppression for unknown broadcast {b}"), recs.iter().map(|r| (*r).clone()).collect());
        };
        let Event::UrBroadcast { from, .. } = &bc.event else { unreachable!() };
        if !correct.contains(from) {
            continue;
        }
        let to_correct = recs
            .iter()
            .filter(|r| matches!(r.event, Event::Suppressed { to, .. } if correct.contains(&to)))
            .count();
        if to_correct > t_m as usize {
            let mut witness = vec![(*bc).clone()];
            witness.extend(recs.iter().map(|r| (*r).clone()));
            return PropertyVerdict::fail(
                p,
                format!("broadcast {b} by {from} lost {to_correct} copies to correct processes, t_m = {t_m}"),
                witness,
            );
        }
    }
    PropertyVerdict::pass(p, format!("{} broadcasts within budget", broadcasts.len()))
}

fn no_duplication<'a>(p: Property, delivers: impl Iterator<Item = KlEvent<'a>>) -> PropertyVerdict {
    let mut first: BTreeMap<(ProcessId, MessageId), &TraceRecord> = BTreeMap::new();
    for d in delivers {
        if let Some(prev) = first.insert((d.process, d.id), d.rec) {
            return PropertyVerdict::fail(
                p,
                format!("{} delivered twice for {}", d.process, d.id),
                vec![prev.clone(), d.rec.clone()],
            );
        }
    }
    PropertyVerdict::pass(p, "at most one delivery per process and identity")
}

fn no_duplicity<'a>(p: Property, delivers: impl Iterator<Item = KlEvent<'a>>) -> PropertyVerdict {
    let mut first: BTreeMap<MessageId, (&Payload, &TraceRecord)> = BTreeMap::new();
    for d in delivers {
        match first.get(&d.id) {
            Some((m, prev)) if *m != d.payload => {
                return PropertyVerdict::fail(
                    p,
                    format!("{} delivered as both {m} and {}", d.id, d.payload),
                    vec![(*prev).clone(), d.rec.clone()],
                );
            }
            Some(_) => {}
            None => {
                first.insert(d.id, (d.payload, d.rec));
            }
        }
    }
    PropertyVerdict::pass(p, "one payload per identity across correct processes")
}

/// For each delivered `(id, m)` accepted by `applies`, at least `ell`
/// distinct correct processes delivered exactly `(id, m)`.
fn global_delivery<'a>(
    p: Property,
    delivers: impl Iterator<Item = KlEvent<'a>>,
    ell: i64,
    applies: impl Fn(MessageId, &Payload) -> bool,
) -> PropertyVerdict {
    let mut per: BTreeMap<(MessageId, Payload), (BTreeSet<ProcessId>, Vec<TraceRecord>)> = BTreeMap::new();
    for d in delivers {
        let e = per.entry((d.id, d.payload.clone())).or_default();
        e.0.insert(d.process);
        e.1.push(d.rec.clone());
    }
    for ((id, m), (who, recs)) in per {
        if applies(id, &m) && (who.len() as i64) < ell {
            return PropertyVerdict::fail(
                p,
                format!("only {} correct processes delivered ({m}, {id}), need {ell}", who.len()),
                recs,
            );
        }
    }
    PropertyVerdict::pass(p, format!(">= {ell} correct deliverers per delivered message"))
}

fn census_from<'a>(
    ids: impl Iterator<Item = MessageId>,
    delivers: impl Iterator<Item = KlEvent<'a>>,
) -> Vec<CensusEntry> {
    let mut map: BTreeMap<MessageId, (BTreeSet<ProcessId>, BTreeSet<Payload>)> =
        ids.map(|id| (id, Default::default())).collect();
    for d in delivers {
        let e = map.entry(d.id).or_default();
        e.0.insert(d.process);
        e.1.insert(d.payload.clone());
    }
    map.into_iter()
        .map(|(id, (who, payloads))| CensusEntry {
            id,
            correct_deliverers: who.len(),
            payloads,
        })
        .collect()
}

/// One entry per instance broadcast by a correct process or delivered by
/// any correct process.
pub fn mbrb_census(trace: &Trace, correct: &BTreeSet<ProcessId>) -> Vec<CensusEntry> {
    let ids: Vec<MessageId> = trace
        .events()
        .filter_map(|e| match e {
            Event::MbrbBroadcast { process, sn, .. } if correct.contains(process) => {
                Some(MessageId::new(*sn, *process))
            }
            _ => None,
        })
        .collect();
    census_from(ids.into_iter(), mbrb_delivers(trace, correct))
}

/// One entry per identity kl-cast or kl-delivered by a correct process.
pub fn kl_census(trace: &Trace, correct: &BTreeSet<ProcessId>, tag: MessageKind) -> Vec<CensusEntry> {
    let ids: Vec<MessageId> = kl_casts(trace, correct, tag).map(|e| e.id).collect();
    census_from(ids.into_iter(), kl_delivers(trace, correct, tag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netsim::ImpMessage;

    fn rec(step: u64, event: Event) -> TraceRecord {
        TraceRecord { step, event }
    }

    fn id() -> MessageId {
        MessageId::new(1, ProcessId(1))
    }

    fn deliver(p: u32, m: &str) -> Event {
        Event::MbrbDeliver {
            process: ProcessId(p),
            payload: m.into(),
            id: id(),
        }
    }

    fn correct(n: u32) -> BTreeSet<ProcessId> {
        ProcessId::all(n).collect()
    }

    #[test]
    fn census_counts_distinct_correct_deliverers() {
        let t = Trace {
            records: vec![
                rec(0, Event::MbrbBroadcast { process: ProcessId(1), payload: "m".into(), sn: 1 }),
                rec(1, deliver(1, "m")),
                rec(2, deliver(2, "m")),
                rec(3, deliver(3, "m")),
            ],
            quiescent: true,
        };
        let c = mbrb_census(&t, &[ProcessId(1), ProcessId(2)].into_iter().collect());
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].correct_deliverers, 2);
    }

    #[test]
    fn global_delivery_only_counts_same_payload() {
        let t = Trace {
            records: vec![rec(1, deliver(1, "m")), rec(2, deliver(2, "x"))],
            quiescent: true,
        };
        assert!(!mbrb_global_delivery(&t, &correct(2), 2).holds);
        assert!(mbrb_global_delivery(&t, &correct(2), 1).holds);
    }

    #[test]
    fn liveness_fails_on_truncated_trace() {
        let t = Trace { records: Vec::new(), quiescent: false };
        let v = mbrb_local_delivery(&t, &correct(2));
        assert!(!v.holds);
        assert!(!v.witness.is_empty());
    }

    #[test]
    fn admissibility_accepts_a_clean_exchange() {
        let m = ImpMessage::new(MessageKind::Init, "m".into(), id());
        let t = Trace {
            records: vec![
                rec(0, Event::UrBroadcast { broadcast: 0, from: ProcessId(1), correct: true, msg: m.clone() }),
                rec(0, Event::Suppressed { broadcast: 0, copy: 1, to: ProcessId(2) }),
                rec(1, Event::Received { copy: 0, broadcast: Some(0), from: ProcessId(1), to: ProcessId(1), msg: m }),
            ],
            quiescent: true,
        };
        assert!(admissibility(&t, &correct(2), 1).holds);
        assert!(!admissibility(&t, &correct(2), 0).holds);
    }
}
