//! Record a run as JSON lines, read it back and check the replayed trace.

use klcast::harness::{check_properties, run_to_quiescence, Scenario};
use klcast::netsim::Trace;

fn main() {
    let scenario = Scenario::from_json(include_str!("../scenarios/sb_n7_conflict.json")).expect("scenario");
    let setup = scenario.setup().expect("valid scenario");
    let trace = run_to_quiescence(&scenario).expect("run");

    let path = std::env::temp_dir().join("klcast_trace_replay.jsonl");
    std::fs::write(&path, trace.to_jsonl()).expect("write trace");
    let text = std::fs::read_to_string(&path).expect("read trace");
    let replay = Trace::from_jsonl(&text, trace.quiescent).expect("parse trace");
    assert_eq!(replay, trace);
    println!("{} records written to {}", replay.records.len(), path.display());

    let verdicts = check_properties(&replay, &setup.correct_set(), scenario.t_m, &setup.expectation);
    println!("all properties hold: {}", verdicts.all_hold());
}
