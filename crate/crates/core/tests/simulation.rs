use proptest::prelude::*;

use klcast::harness::{
    check_properties, run_and_check, run_battery, run_to_quiescence, ByzantineBehavior, Scenario,
};
use klcast::netsim::{
    AdversaryStrategy, BroadcastCtx, ConfigError, Event, ProcessId, RandomScheduler, RunLimits, Trace,
};
use klcast::params::{bracha_configs, ir_config, SystemParams};

fn scenario(text: &str) -> Scenario {
    Scenario::from_json(text).expect("scenario")
}

#[test]
fn same_seed_same_trace() {
    let s = scenario(include_str!("../scenarios/bracha_n8_equivocator.json"));
    let a = run_to_quiescence(&s).unwrap();
    let b = run_to_quiescence(&s).unwrap();
    assert_eq!(a.to_jsonl(), b.to_jsonl());
    let c = run_to_quiescence(&s.with_seed(s.seed + 1)).unwrap();
    assert_ne!(a.to_jsonl(), c.to_jsonl());
}

#[test]
fn trace_round_trips_through_json_lines() {
    let s = scenario(include_str!("../scenarios/sb_n5_equivocator.json"));
    let t = run_to_quiescence(&s).unwrap();
    let text = t.to_jsonl();
    assert_eq!(text.lines().count(), t.records.len());
    let back = Trace::from_jsonl(&text, t.quiescent).unwrap();
    assert_eq!(back, t);
    let setup = s.setup().unwrap();
    let v = check_properties(&back, &setup.correct_set(), s.t_m, &setup.expectation);
    assert!(v.all_hold());
}

#[test]
fn fault_free_battery_delivers_everywhere() {
    let s = scenario(
        r#"{"n":6,"t_b":0,"t_m":0,"algorithm":"bracha",
            "workload":[{"process":1,"sn":1,"payload":"a"},{"process":2,"sn":1,"payload":"b"}]}"#,
    );
    let r = run_battery(&s, 0..30).unwrap();
    assert!(r.all_hold());
    assert_eq!(r.min_deliverers, Some(6));
}

#[test]
fn over_budget_adversary_is_rejected() {
    let s = scenario(include_str!("../scenarios/bracha_n4.json"));
    let setup = s.setup().unwrap();
    let greedy = |ctx: &BroadcastCtx<'_>| ctx.correct.to_vec();
    let net = s.network_with(&setup, Box::new(greedy), Box::new(RandomScheduler::new(0)));
    let err = net.run_to_quiescence(s.workload_pairs(), RunLimits::default()).unwrap_err();
    assert!(matches!(err, ConfigError::AdversaryBudget(_)), "{err}");
}

#[test]
fn message_adversary_only_touches_correct_broadcasts() {
    let s = scenario(include_str!("../scenarios/bracha_n8_equivocator.json"));
    let t = run_to_quiescence(&s).unwrap();
    let correct: Vec<u64> = t
        .events()
        .filter_map(|e| match e {
            Event::UrBroadcast { broadcast, correct: true, .. } => Some(*broadcast),
            _ => None,
        })
        .collect();
    let suppressed = t.events().filter(|e| matches!(e, Event::Suppressed { .. })).count();
    assert_eq!(suppressed, correct.len());
    for e in t.events() {
        if let Event::Suppressed { broadcast, to, .. } = e {
            assert!(correct.contains(broadcast));
            assert_eq!(*to, ProcessId(2));
        }
    }
}

fn behavior() -> impl Strategy<Value = ByzantineBehavior> {
    prop_oneof![
        Just(ByzantineBehavior::Silent),
        Just(ByzantineBehavior::Equivocator),
        Just(ByzantineBehavior::QuorumSpammer),
    ]
}

fn adversary() -> impl Strategy<Value = AdversaryStrategy> {
    prop_oneof![
        Just(AdversaryStrategy::None),
        any::<u64>().prop_map(|s| AdversaryStrategy::RandomPerBroadcast { seed: Some(s) }),
        Just(AdversaryStrategy::Rotating),
    ]
}

/// A random feasible system with every tolerated Byzantine process present
/// and broadcasting, plus two correct broadcasters.
fn mbrb_case(algorithm: &'static str) -> impl Strategy<Value = Scenario> {
    (4u32..=12, 0u32..=3, 0u32..=2, proptest::collection::vec(behavior(), 3), adversary(), any::<u64>())
        .prop_filter_map("infeasible", move |(n, t_b, t_m, behaviors, adversary, seed)| {
            let sys = SystemParams::worst_case(n, t_b, t_m).ok()?;
            let ok = match algorithm {
                "bracha" => bracha_configs(&sys).is_ok(),
                _ => ir_config(&sys).is_ok(),
            };
            if !ok {
                return None;
            }
            let byz: Vec<u32> = (n - t_b + 1..=n).collect();
            let mut workload = vec![
                serde_json::json!({"process": 1, "sn": 1, "payload": "a"}),
                serde_json::json!({"process": 2, "sn": 1, "payload": "b"}),
            ];
            for b in &byz {
                workload.push(serde_json::json!({"process": b, "sn": 1, "payload": "z"}));
            }
            let byzantine: Vec<_> = byz
                .iter()
                .zip(&behaviors)
                .map(|(id, b)| serde_json::json!({"id": id, "behavior": b}))
                .collect();
            let v = serde_json::json!({
                "n": n, "t_b": t_b, "t_m": t_m, "algorithm": algorithm, "seed": seed,
                "byzantine": byzantine, "adversary": adversary, "workload": workload,
            });
            Some(serde_json::from_value(v).expect("scenario json"))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bracha_properties_hold_whenever_assumptions_do(s in mbrb_case("bracha")) {
        let (_, v) = run_and_check(&s).unwrap();
        prop_assert!(v.all_hold(), "{:?}", v.failures().collect::<Vec<_>>());
    }

    #[test]
    fn imbs_raynal_properties_hold_whenever_assumptions_do(s in mbrb_case("imbs-raynal")) {
        let (_, v) = run_and_check(&s).unwrap();
        prop_assert!(v.all_hold(), "{:?}", v.failures().collect::<Vec<_>>());
    }
}
