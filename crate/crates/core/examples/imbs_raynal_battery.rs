//! Run the revisited Imbs-Raynal algorithm against quorum-spamming Byzantine
//! processes and a randomized message adversary over many seeds.

use klcast::harness::{run_battery, Scenario};

fn main() {
    let scenario = Scenario::from_json(include_str!("../scenarios/ir_n11_spammer.json")).expect("scenario");
    let report = run_battery(&scenario, 0..200).expect("valid scenario");
    println!(
        "{} runs, {} failures, fewest correct deliverers {:?}, {} copies in total",
        report.runs,
        report.failures.len(),
        report.min_deliverers,
        report.messages
    );
    for f in report.failures.iter().take(5) {
        println!("seed {} {}: {}", f.seed, f.property, f.detail);
    }
}
