use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use klcast::harness::{
    explore, run_and_check, run_battery, sweep, to_csv, OracleError, OracleLimits, Scenario,
    DEFAULT_MAX_BRANCHES,
};
use klcast::netsim::ConfigError;
use klcast::params::{
    check_b87, check_ir16, check_sb_assumptions, check_sf_assumptions, mbrb_guarantee,
    sb_guarantees, sf_guarantees, AssumptionReport, KlcastConfig, MbrbAlgorithm, ParamsError,
    SystemParams,
};

#[derive(Parser)]
#[command(name = "klcast", version, about = "Quorum algebra, simulation and checking for kl-cast and MBRB")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the resilience and quorum assumptions.
    CheckAssumptions(ParamArgs),
    /// Print the guarantees of an object or MBRB algorithm.
    Guarantees(ParamArgs),
    /// Run one scenario and check the trace.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a scenario under seeds 0..N.
    Battery {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 100)]
        seeds: u64,
    },
    /// Exhaustively explore a tiny scenario.
    Oracle {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_BRANCHES)]
        max_branches: u64,
    },
    /// Tabulate l_MBRB over a (t_b, t_m) grid at c = n - t_b.
    Sweep {
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum)]
        algo: MbrbAlgo,
        #[arg(long)]
        tb_max: u32,
        #[arg(long)]
        tm_max: u32,
        /// CSV destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MbrbAlgo {
    Bracha,
    #[value(alias = "imbs-raynal")]
    Ir,
}

impl From<MbrbAlgo> for MbrbAlgorithm {
    fn from(a: MbrbAlgo) -> Self {
        match a {
            MbrbAlgo::Bracha => MbrbAlgorithm::BrachaRevisited,
            MbrbAlgo::Ir => MbrbAlgorithm::ImbsRaynalRevisited,
        }
    }
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    tb: u32,
    #[arg(long)]
    tm: u32,
    /// Effectively correct processes; defaults to n - tb.
    #[arg(long)]
    c: Option<u32>,
    /// An MBRB algorithm. Without it, `--qd --qf` select the
    /// signature-free object and `--qd` alone the signature-based one.
    #[arg(long, value_enum, conflicts_with_all = ["qd", "qf", "single"])]
    algo: Option<MbrbAlgo>,
    #[arg(long)]
    qd: Option<u32>,
    #[arg(long, requires = "qd")]
    qf: Option<u32>,
    #[arg(long, requires = "qf")]
    single: Option<bool>,
}

/// Outcome of a subcommand that ran to completion.
enum Verdict {
    Pass,
    Fail,
}

/// A configuration problem; maps to exit code 2.
struct Failure(String);

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure(e.to_string())
    }
}

impl From<ParamsError> for Failure {
    fn from(e: ParamsError) -> Self {
        Failure(e.to_string())
    }
}

enum Target {
    Mbrb(MbrbAlgorithm),
    Sf(KlcastConfig),
    Sb(u32),
}

impl ParamArgs {
    fn sys(&self) -> Result<SystemParams, ParamsError> {
        match self.c {
            Some(c) => SystemParams::new(self.n, self.tb, self.tm, c),
            None => SystemParams::worst_case(self.n, self.tb, self.tm),
        }
    }

    fn target(&self) -> Result<Target, Failure> {
        match (self.algo, self.qd, self.qf) {
            (Some(a), _, _) => Ok(Target::Mbrb(a.into())),
            (None, Some(qd), Some(qf)) => Ok(Target::Sf(KlcastConfig::new(qd, qf, self.single.unwrap_or(true))?)),
            (None, Some(qd), None) => Ok(Target::Sb(qd)),
            (None, None, _) => Err(Failure("give --algo, or --qd [--qf [--single]]".into())),
        }
    }
}

fn print_report(label: &str, r: &AssumptionReport) {
    for v in &r.verdicts {
        let mark = if v.satisfied { "ok  " } else { "FAIL" };
        println!("{mark} {label} {}: {}", v.name, v.detail);
    }
}

fn informational_note(sys: &SystemParams) {
    if sys.is_informational() {
        println!("note: c = {} > n - t_b; values are informational", sys.c());
    }
}

fn check_assumptions(args: &ParamArgs) -> Result<Verdict, Failure> {
    let sys = args.sys()?;
    informational_note(&sys);
    let ok = match args.target()? {
        Target::Sf(cfg) => {
            let r = check_sf_assumptions(&sys, &cfg);
            print_report("object", &r);
            r.satisfied()
        }
        Target::Sb(q_d) => {
            let r = check_sb_assumptions(&sys, q_d);
            print_report("object", &r);
            r.satisfied()
        }
        Target::Mbrb(alg) => {
            let bound = match alg {
                MbrbAlgorithm::BrachaRevisited => {
                    let v = check_b87(&sys);
                    println!(
                        "{} B87: n - 3t_b - 2t_m = {}, 4 t_b t_m = {}",
                        if v.holds { "ok  " } else { "FAIL" },
                        v.slack,
                        4 * sys.t_b() * sys.t_m()
                    );
                    v.holds
                }
                MbrbAlgorithm::ImbsRaynalRevisited => match check_ir16(&sys) {
                    Ok(v) => {
                        println!("{} IR16: slack {}", if v.holds { "ok  " } else { "FAIL" }, v.slack);
                        v.holds
                    }
                    Err(ParamsError::DegenerateInput(d)) => {
                        println!("ok   IR16: {d}");
                        true
                    }
                    Err(e) => return Err(e.into()),
                },
            };
            match mbrb_guarantee(alg, &sys) {
                Ok(g) => {
                    for o in &g.objects {
                        print_report(&format!("{:?}", o.role).to_lowercase(), &o.assumptions);
                    }
                    println!("ok   chaining");
                    bound
                }
                Err(ParamsError::AssumptionViolation(d)) => {
                    if bound {
                        println!("FAIL {d}");
                    }
                    false
                }
                Err(e) => return Err(e.into()),
            }
        }
    };
    Ok(if ok { Verdict::Pass } else { Verdict::Fail })
}

fn guarantees(args: &ParamArgs) -> Result<Verdict, Failure> {
    let sys = args.sys()?;
    informational_note(&sys);
    let result = match args.target()? {
        Target::Sf(cfg) => sf_guarantees(&sys, &cfg).map(|g| {
            println!("k'={} k={} l={} delta={} global={:?}", g.k_prime, g.k, g.ell, g.delta, g.global_mode);
        }),
        Target::Sb(q_d) => sb_guarantees(&sys, q_d).map(|g| {
            println!("k'={} k={} l={} delta={} global={:?}", g.k_prime, g.k, g.ell, g.delta, g.global_mode);
        }),
        Target::Mbrb(alg) => mbrb_guarantee(alg, &sys).map(|g| {
            for o in &g.objects {
                let c = o.config;
                let k = o.guarantees;
                println!(
                    "{:?}: q_d={} q_f={} single={} k'={} k={} l={} delta={}",
                    o.role,
                    c.q_d(),
                    c.q_f(),
                    c.single(),
                    k.k_prime,
                    k.k,
                    k.ell,
                    k.delta
                );
            }
            println!("l_MBRB={}", g.ell_mbrb);
        }),
    };
    match result {
        Ok(()) => Ok(Verdict::Pass),
        Err(ParamsError::AssumptionViolation(d)) => {
            println!("FAIL {d}");
            Ok(Verdict::Fail)
        }
        Err(e) => Err(e.into()),
    }
}

fn simulate(path: &PathBuf, seed: Option<u64>, trace_out: Option<&PathBuf>) -> Result<Verdict, Failure> {
    let mut scenario = Scenario::load(path)?;
    if let Some(s) = seed {
        scenario = scenario.with_seed(s);
    }
    let (trace, verdicts) = run_and_check(&scenario)?;
    if let Some(out) = trace_out {
        fs::write(out, trace.to_jsonl()).map_err(|e| Failure(format!("{}: {e}", out.display())))?;
    }
    for v in &verdicts.verdicts {
        println!("{} {}: {}", if v.holds { "ok  " } else { "FAIL" }, v.property, v.detail);
    }
    for c in &verdicts.census {
        let payloads: Vec<&str> = c.payloads.iter().map(|p| p.as_str()).collect();
        println!("census {}: {} correct deliverers {:?}", c.id, c.correct_deliverers, payloads);
    }
    println!("messages: {}", trace.message_count());
    Ok(if verdicts.all_hold() { Verdict::Pass } else { Verdict::Fail })
}

fn battery(path: &PathBuf, seeds: u64) -> Result<Verdict, Failure> {
    let scenario = Scenario::load(path)?;
    let r = run_battery(&scenario, 0..seeds)?;
    println!(
        "runs: {}  failures: {}  min deliverers: {}  messages: {}",
        r.runs,
        r.failures.len(),
        r.min_deliverers.map_or("-".into(), |m| m.to_string()),
        r.messages
    );
    for f in &r.failures {
        println!("FAIL seed {} {}: {}", f.seed, f.property, f.detail);
    }
    Ok(if r.all_hold() { Verdict::Pass } else { Verdict::Fail })
}

fn oracle(path: &PathBuf, max_branches: u64) -> Result<Verdict, Failure> {
    let scenario = Scenario::load(path)?;
    let report = match explore(&scenario, OracleLimits { max_branches }) {
        Ok(r) => r,
        Err(OracleError::Config(e)) => return Err(e.into()),
        Err(OracleError::Unsupported(d)) => return Err(Failure(d)),
        Err(OracleError::StateSpaceOverflow { limit, partial }) => {
            println!(
                "overflow: limit {limit} branches reached after {} states; coverage partial",
                partial.states
            );
            return Ok(Verdict::Fail);
        }
    };
    println!(
        "states: {}  branches: {}  executions: {}  terminal: {}  min deliverers: {}",
        report.states,
        report.branches,
        report.executions,
        report.terminal_states,
        report.min_deliverers.map_or("-".into(), |m| m.to_string())
    );
    if let Some(cx) = &report.counterexample {
        for f in &cx.failures {
            println!("FAIL {}: {}", f.property, f.detail);
        }
        for e in &cx.events {
            println!("  {}", serde_json::to_string(e).unwrap_or_default());
        }
    }
    Ok(if report.all_hold() { Verdict::Pass } else { Verdict::Fail })
}

fn run_sweep(n: u32, algo: MbrbAlgo, tb_max: u32, tm_max: u32, out: Option<&PathBuf>) -> Result<Verdict, Failure> {
    let alg: MbrbAlgorithm = algo.into();
    let rows = sweep(n, alg, 0..=tb_max, 0..=tm_max);
    let csv = to_csv(alg, &rows);
    match out {
        Some(p) => fs::write(p, csv).map_err(|e| Failure(format!("{}: {e}", p.display())))?,
        None => print!("{csv}"),
    }
    let broken: Vec<_> = rows.iter().filter(|r| r.feasible && r.error.is_some()).collect();
    for r in &broken {
        eprintln!("FAIL ({}, {}): {}", r.t_b, r.t_m, r.error.as_deref().unwrap_or(""));
    }
    Ok(if broken.is_empty() { Verdict::Pass } else { Verdict::Fail })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::CheckAssumptions(a) => check_assumptions(a),
        Command::Guarantees(a) => guarantees(a),
        Command::Simulate { scenario, seed, trace } => simulate(scenario, *seed, trace.as_ref()),
        Command::Battery { scenario, seeds } => battery(scenario, *seeds),
        Command::Oracle { scenario, max_branches } => oracle(scenario, *max_branches),
        Command::Sweep { n, algo, tb_max, tm_max, out } => run_sweep(*n, *algo, *tb_max, *tm_max, out.as_ref()),
    };
    match outcome {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
