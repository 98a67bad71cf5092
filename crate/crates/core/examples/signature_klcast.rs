//! A standalone signature-based kl-cast object: one correct process casts,
//! the others relay signature bundles until q_d signatures accumulate.

use std::collections::BTreeSet;
use std::sync::Arc;

use klcast::harness::{kl_local_delivery, kl_strong_global_delivery, kl_validity};
use klcast::klcast_sb::{SbNode, SimulatedSignatures};
use klcast::klcast_sf::KlcastRequest;
use klcast::netsim::{
    MessageId, MessageKind, Network, Payload, ProcessId, RandomPerBroadcast, RandomScheduler, RunLimits,
};
use klcast::params::{sb_guarantees, SystemParams};

fn main() {
    let (n, t_m, q_d) = (7, 1, 5);
    let sys = SystemParams::worst_case(n, 0, t_m).expect("valid system");
    let g = sb_guarantees(&sys, q_d).expect("assumptions hold");
    println!("k'={} k={} l={} delta={}", g.k_prime, g.k, g.ell, g.delta);

    let scheme = Arc::new(SimulatedSignatures::new(n, 7));
    let nodes: Vec<_> = ProcessId::all(n).map(|p| SbNode::new(p, q_d, scheme.clone())).collect();
    let net = Network::new(
        t_m,
        nodes,
        vec![true; n as usize],
        Box::new(RandomPerBroadcast::new(3)),
        Box::new(RandomScheduler::new(3)),
    );
    let id = MessageId::new(1, ProcessId(1));
    // Enough casters to guarantee a delivery.
    let workload = ProcessId::all(n)
        .take(g.k as usize)
        .map(|p| (p, KlcastRequest { payload: Payload::new("m"), id }))
        .collect();
    let trace = net.run_to_quiescence(workload, RunLimits::default()).expect("run");

    let correct: BTreeSet<_> = ProcessId::all(n).collect();
    let tag = MessageKind::Bundle;
    for v in [
        kl_validity(&trace, &correct, tag, g.k_prime),
        kl_local_delivery(&trace, &correct, tag, g.k),
        kl_strong_global_delivery(&trace, &correct, tag, g.ell),
    ] {
        println!("{}: {} ({})", v.property, v.holds, v.detail);
    }
}
