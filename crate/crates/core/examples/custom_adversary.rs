//! Plug a hand-written message adversary into a scenario. Any closure over
//! the broadcast context works; this one always starves the correct
//! processes with the highest identities.

use klcast::harness::{check_properties, Scenario};
use klcast::netsim::{BroadcastCtx, RandomScheduler, RunLimits};

fn main() {
    let scenario = Scenario::from_json(include_str!("../scenarios/bracha_n8_equivocator.json")).expect("scenario");
    let setup = scenario.setup().expect("valid scenario");

    let t_m = scenario.t_m as usize;
    let starve_last = move |ctx: &BroadcastCtx<'_>| ctx.correct.iter().rev().take(t_m).copied().collect();
    let net = scenario.network_with(&setup, Box::new(starve_last), Box::new(RandomScheduler::new(1)));
    let trace = net
        .run_to_quiescence(scenario.workload_pairs(), RunLimits::default())
        .expect("adversary stays within budget");

    let verdicts = check_properties(&trace, &setup.correct_set(), scenario.t_m, &setup.expectation);
    for v in &verdicts.verdicts {
        println!("{}: {}", v.property, v.holds);
    }
    for c in &verdicts.census {
        println!("{} delivered by {} correct processes", c.id, c.correct_deliverers);
    }
}
