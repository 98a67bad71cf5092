//! Evaluate the quorum assumptions of a kl-cast object and the resilience
//! bounds of both MBRB algorithms for one system.

use klcast::params::{
    check_b87, check_ir16, check_sb_assumptions, check_sf_assumptions, mbrb_guarantee,
    sf_guarantees, KlcastConfig, MbrbAlgorithm, SystemParams,
};

fn main() {
    let sys = SystemParams::worst_case(20, 2, 1).expect("valid system");

    let cfg = KlcastConfig::new(12, 3, true).expect("valid config");
    let report = check_sf_assumptions(&sys, &cfg);
    for v in &report.verdicts {
        println!("{:<5} sf {}: {}", v.satisfied, v.name, v.detail);
    }
    if let Ok(g) = sf_guarantees(&sys, &cfg) {
        println!("sf object: k'={} k={} l={} delta={}", g.k_prime, g.k, g.ell, g.delta);
    }

    let sb = check_sb_assumptions(&sys, 11);
    println!("sb object with q_d=11 satisfied: {}", sb.satisfied());

    println!("B87 holds: {}", check_b87(&sys).holds);
    match check_ir16(&sys) {
        Ok(v) => println!("IR16 holds: {} (slack {})", v.holds, v.slack),
        Err(e) => println!("IR16: {e}"),
    }
    for alg in [MbrbAlgorithm::BrachaRevisited, MbrbAlgorithm::ImbsRaynalRevisited] {
        match mbrb_guarantee(alg, &sys) {
            Ok(g) => println!("{alg}: l_MBRB = {}", g.ell_mbrb),
            Err(e) => println!("{alg}: {e}"),
        }
    }
}
