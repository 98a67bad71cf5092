//! Exhaustive exploration of two tiny systems.

use std::time::Instant;

use klcast::harness::{explore, OracleLimits, Scenario};

fn run(label: &str, text: &str) {
    let scenario = Scenario::from_json(text).expect("scenario");
    let start = Instant::now();
    match explore(&scenario, OracleLimits::default()) {
        Ok(r) => println!(
            "{label}: {} states, {} branches, {} executions, min deliverers {:?}, all hold {} ({:.2?})",
            r.states,
            r.branches,
            r.executions,
            r.min_deliverers,
            r.all_hold(),
            start.elapsed()
        ),
        Err(e) => println!("{label}: {e}"),
    }
}

fn main() {
    run(
        "bracha n=5 t_m=1",
        r#"{"n":5,"t_b":0,"t_m":1,"algorithm":"bracha",
            "workload":[{"process":1,"sn":1,"payload":"m"}]}"#,
    );
    run(
        "sf-klcast n=4 t_b=1",
        r#"{"n":4,"t_b":1,"t_m":0,"algorithm":"sf-klcast",
            "byzantine":[{"id":4,"behavior":"equivocator"}],
            "klcast":{"q_d":3,"q_f":2,"single":true},
            "workload":[{"process":1,"sn":1,"payload":"m"},
                        {"process":2,"sn":1,"payload":"m","id_origin":1}]}"#,
    );
}
