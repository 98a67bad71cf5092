//! Hand-built traces, one violating each checker, plus a clean companion.

#![allow(dead_code)]

use std::collections::BTreeSet;

use klcast::harness::{
    admissibility, kl_conditional_no_duplicity, kl_local_delivery, kl_no_duplication,
    kl_strong_global_delivery, kl_validity, kl_weak_global_delivery, mbrb_global_delivery,
    mbrb_local_delivery, mbrb_no_duplicity, mbrb_no_duplication, mbrb_validity, Property,
    PropertyVerdict,
};
use klcast::netsim::{Event, ImpMessage, MessageId, MessageKind, Payload, ProcessId, Trace, TraceRecord};

const TAG: MessageKind = MessageKind::Msg;

pub fn p(i: u32) -> ProcessId {
    ProcessId(i)
}

pub fn id() -> MessageId {
    MessageId::new(1, p(1))
}

pub fn all_correct(n: u32) -> BTreeSet<ProcessId> {
    ProcessId::all(n).collect()
}

pub fn trace(events: Vec<Event>) -> Trace {
    Trace {
        records: events
            .into_iter()
            .enumerate()
            .map(|(i, event)| TraceRecord { step: i as u64, event })
            .collect(),
        quiescent: true,
    }
}

pub fn cast(who: u32, m: &str) -> Event {
    Event::KlCast { process: p(who), tag: TAG, payload: m.into(), id: id() }
}

pub fn kl_deliver(who: u32, m: &str) -> Event {
    Event::KlDeliver { process: p(who), tag: TAG, payload: m.into(), id: id() }
}

pub fn broadcast(who: u32, m: &str) -> Event {
    Event::MbrbBroadcast { process: p(who), payload: m.into(), sn: 1 }
}

pub fn deliver(who: u32, m: &str) -> Event {
    Event::MbrbDeliver { process: p(who), payload: m.into(), id: id() }
}

fn init(m: &str) -> ImpMessage {
    ImpMessage::new(MessageKind::Init, Payload::from(m), id())
}

/// Evaluates `property` on a trace built to violate it.
pub fn violating(property: Property) -> PropertyVerdict {
    let c = all_correct(4);
    match property {
        // k' = 2 but only one correct caster.
        Property::KlValidity => kl_validity(&trace(vec![cast(1, "m"), kl_deliver(2, "m")]), &c, TAG, 2),
        Property::KlNoDuplication => {
            kl_no_duplication(&trace(vec![cast(1, "m"), kl_deliver(2, "m"), kl_deliver(2, "m")]), &c, TAG)
        }
        Property::KlConditionalNoDuplicity => kl_conditional_no_duplicity(
            &trace(vec![cast(1, "m"), cast(2, "x"), kl_deliver(1, "m"), kl_deliver(2, "x")]),
            &c,
            TAG,
            true,
        ),
        // Two correct casters meet k = 2, nobody delivers.
        Property::KlLocalDelivery => kl_local_delivery(&trace(vec![cast(1, "m"), cast(2, "m")]), &c, TAG, 2),
        Property::KlWeakGlobalDelivery => {
            kl_weak_global_delivery(&trace(vec![cast(1, "m"), kl_deliver(1, "m")]), &c, TAG, 3)
        }
        Property::KlStrongGlobalDelivery => kl_strong_global_delivery(
            &trace(vec![cast(1, "m"), kl_deliver(1, "m"), kl_deliver(2, "m")]),
            &c,
            TAG,
            3,
        ),
        // p1 is correct and never broadcast.
        Property::MbrbValidity => mbrb_validity(&trace(vec![deliver(2, "m")]), &c),
        Property::MbrbNoDuplication => {
            mbrb_no_duplication(&trace(vec![broadcast(1, "m"), deliver(2, "m"), deliver(2, "m")]), &c)
        }
        // p1 is Byzantine here, so the conflicting payloads are possible.
        Property::MbrbNoDuplicity => {
            let c: BTreeSet<_> = [p(2), p(3), p(4)].into_iter().collect();
            mbrb_no_duplicity(&trace(vec![deliver(2, "m"), deliver(3, "x")]), &c)
        }
        Property::MbrbLocalDelivery => mbrb_local_delivery(&trace(vec![broadcast(1, "m")]), &c),
        Property::MbrbGlobalDelivery => mbrb_global_delivery(
            &trace(vec![broadcast(1, "m"), deliver(1, "m"), deliver(2, "m")]),
            &c,
            3,
        ),
        // Two correct victims for one broadcast with t_m = 1.
        Property::Admissibility => admissibility(
            &trace(vec![
                Event::UrBroadcast { broadcast: 0, from: p(1), correct: true, msg: init("m") },
                Event::Suppressed { broadcast: 0, copy: 1, to: p(2) },
                Event::Suppressed { broadcast: 0, copy: 2, to: p(3) },
            ]),
            &c,
            1,
        ),
    }
}

/// Evaluates `property` on a trace that satisfies it, with the same
/// parameters as [`violating`].
pub fn satisfying(property: Property) -> PropertyVerdict {
    let c = all_correct(4);
    let kl_good = trace(vec![
        cast(1, "m"),
        cast(2, "m"),
        kl_deliver(1, "m"),
        kl_deliver(2, "m"),
        kl_deliver(3, "m"),
    ]);
    let mbrb_good = trace(vec![broadcast(1, "m"), deliver(1, "m"), deliver(2, "m"), deliver(3, "m")]);
    match property {
        Property::KlValidity => kl_validity(&kl_good, &c, TAG, 2),
        Property::KlNoDuplication => kl_no_duplication(&kl_good, &c, TAG),
        Property::KlConditionalNoDuplicity => kl_conditional_no_duplicity(&kl_good, &c, TAG, true),
        Property::KlLocalDelivery => kl_local_delivery(&kl_good, &c, TAG, 2),
        Property::KlWeakGlobalDelivery => kl_weak_global_delivery(&kl_good, &c, TAG, 3),
        Property::KlStrongGlobalDelivery => kl_strong_global_delivery(&kl_good, &c, TAG, 3),
        Property::MbrbValidity => mbrb_validity(&mbrb_good, &c),
        Property::MbrbNoDuplication => mbrb_no_duplication(&mbrb_good, &c),
        Property::MbrbNoDuplicity => mbrb_no_duplicity(&mbrb_good, &c),
        Property::MbrbLocalDelivery => mbrb_local_delivery(&mbrb_good, &c),
        Property::MbrbGlobalDelivery => mbrb_global_delivery(&mbrb_good, &c, 3),
        Property::Admissibility => admissibility(
            &trace(vec![
                Event::UrBroadcast { broadcast: 0, from: p(1), correct: true, msg: init("m") },
                Event::Suppressed { broadcast: 0, copy: 1, to: p(2) },
                Event::Received { copy: 0, broadcast: Some(0), from: p(1), to: p(1), msg: init("m") },
            ]),
            &c,
            1,
        ),
    }
}

pub fn all_properties() -> Vec<Property> {
    Property::KLCAST.into_iter().chain(Property::MBRB).collect()
}
