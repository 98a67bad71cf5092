//! Drive Bracha's revisited algorithm directly on the network simulator,
//! with a message adversary that always silences the same process, then
//! check the resulting trace.

use std::collections::BTreeSet;

use klcast::harness::{
    mbrb_global_delivery, mbrb_local_delivery, mbrb_no_duplicity, mbrb_validity,
};
use klcast::mbrb::{MbrbProcess, MbrbRequest};
use klcast::netsim::{FixedVictims, Network, Payload, ProcessId, RandomScheduler, RunLimits};
use klcast::params::{bracha_configs, SystemParams};

fn main() {
    let sys = SystemParams::worst_case(12, 1, 1).expect("valid system");
    let guarantee = bracha_configs(&sys).expect("assumptions hold");
    println!("l_MBRB = {}", guarantee.ell_mbrb);

    // All twelve processes behave correctly here; the budget t_b = 1 is
    // simply not used.
    let nodes: Vec<_> = ProcessId::all(12).map(|p| MbrbProcess::new(p, &guarantee)).collect();
    let net = Network::new(
        1,
        nodes,
        vec![true; 12],
        Box::new(FixedVictims(vec![ProcessId(7)])),
        Box::new(RandomScheduler::new(42)),
    );
    let workload = vec![
        (ProcessId(1), MbrbRequest { payload: Payload::new("hello"), sn: 1 }),
        (ProcessId(2), MbrbRequest { payload: Payload::new("world"), sn: 1 }),
    ];
    let trace = net.run_to_quiescence(workload, RunLimits::default()).expect("run");
    println!("{} copies delivered", trace.message_count());

    let correct: BTreeSet<_> = ProcessId::all(12).collect();
    for v in [
        mbrb_validity(&trace, &correct),
        mbrb_no_duplicity(&trace, &correct),
        mbrb_local_delivery(&trace, &correct),
        mbrb_global_delivery(&trace, &correct, guarantee.ell_mbrb),
    ] {
        println!("{}: {} ({})", v.property, v.holds, v.detail);
    }
}
