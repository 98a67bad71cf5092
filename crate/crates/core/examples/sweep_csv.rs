//! Tabulate l_MBRB over a grid of Byzantine and adversary budgets and print
//! it as CSV. Usage: `cargo run --example sweep_csv -- [n] [bracha|ir]`.

use klcast::harness::{sweep, to_csv};
use klcast::params::MbrbAlgorithm;

fn main() {
    let mut args = std::env::args().skip(1);
    let n: u32 = args.next().and_then(|s| s.parse().ok()).unwrap_or(40);
    let alg = match args.next().as_deref() {
        Some("ir") | Some("imbs-raynal") => MbrbAlgorithm::ImbsRaynalRevisited,
        _ => MbrbAlgorithm::BrachaRevisited,
    };
    let rows = sweep(n, alg, 0..=n / 3, 0..=n / 4);
    print!("{}", to_csv(alg, &rows));
    let best = rows
        .iter()
        .filter(|r| r.feasible)
        .filter_map(|r| r.ell_mbrb.map(|l| (r.t_b, r.t_m, l)))
        .max_by_key(|&(t_b, t_m, _)| t_b + t_m);
    if let Some((t_b, t_m, l)) = best {
        eprintln!("largest feasible t_b + t_m: ({t_b}, {t_m}) with l_MBRB = {l}");
    }
}
