//! Exact quorum algebra.
//!
//! Every assumption inequality and every guarantee formula used by the
//! protocols in this crate is evaluated here with integer arithmetic only.
//! Divisions are carried out on exact rationals (numerator and positive
//! denominator in `i128`) and then rounded with an explicit floor or
//! ceiling, so threshold values never drift at boundary points.
//!
//! The module is the single source of truth for quorum instantiations: the
//! protocol state machines, the simulator and the sweep tooling all obtain
//! their `(q_d, q_f, single)` triples and their `(k', k, l, delta)`
//! guarantees from the functions below.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamsError {
    #[error("invalid system parameters: {0}")]
    InvalidSystem(String),
    #[error("invalid kl-cast configuration: {0}")]
    InvalidConfig(String),
    #[error("assumption violated: {0}")]
    AssumptionViolation(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}

/// The execution environment: `n` processes, at most `t_b` Byzantine, a
/// message adversary of power `t_m`, and `c` effectively correct processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSystemParams", into = "RawSystemParams")]
pub struct SystemParams {
    n: u32,
    t_b: u32,
    t_m: u32,
    c: u32,
}

#[derive(Serialize, Deserialize)]
struct RawSystemParams {
    n: u32,
    t_b: u32,
    t_m: u32,
    #[serde(default)]
    c: Option<u32>,
}

impl TryFrom<RawSystemParams> for SystemParams {
    type Error = ParamsError;

    fn try_from(raw: RawSystemParams) -> Result<Self, Self::Error> {
        match raw.c {
            Some(c) => SystemParams::new(raw.n, raw.t_b, raw.t_m, c),
            None => SystemParams::worst_case(raw.n, raw.t_b, raw.t_m),
        }
    }
}

impl From<SystemParams> for RawSystemParams {
    fn from(sys: SystemParams) -> Self {
        RawSystemParams {
            n: sys.n,
            t_b: sys.t_b,
            t_m: sys.t_m,
            c: Some(sys.c),
        }
    }
}

impl SystemParams {
    pub fn new(n: u32, t_b: u32, t_m: u32, c: u32) -> Result<Self, ParamsError> {
        if n == 0 {
            return Err(ParamsError::InvalidSystem("n must be at least 1".into()));
        }
        if t_b >= n {
            return Err(ParamsError::InvalidSystem(format!(
                "t_b = {t_b} must be smaller than n = {n}"
            )));
        }
        if c < n - t_b || c > n {
            return Err(ParamsError::InvalidSystem(format!(
                "c = {c} must lie in [n - t_b, n] = [{}, {n}]",
                n - t_b
            )));
        }
        if t_m >= c {
            return Err(ParamsError::InvalidSystem(format!(
                "t_m = {t_m} must be smaller than c = {c}"
            )));
        }
        Ok(SystemParams { n, t_b, t_m, c })
    }

    /// Worst case `c = n - t_b`: every tolerated Byzantine process is present.
    pub fn worst_case(n: u32, t_b: u32, t_m: u32) -> Result<Self, ParamsError> {
        if t_b >= n {
            return Err(ParamsError::InvalidSystem(format!(
                "t_b = {t_b} must be smaller than n = {n}"
            )));
        }
        SystemParams::new(n, t_b, t_m, n - t_b)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn t_b(&self) -> u32 {
        self.t_b
    }

    pub fn t_m(&self) -> u32 {
        self.t_m
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    /// The assumptions were established for `c = n - t_b`; values computed
    /// with a larger `c` are reported but flagged.
    pub fn is_informational(&self) -> bool {
        self.c > self.n - self.t_b
    }

    fn ints(&self) -> (i128, i128, i128, i128) {
        (
            i128::from(self.n),
            i128::from(self.t_b),
            i128::from(self.t_m),
            i128::from(self.c),
        )
    }
}

impl fmt::Display for SystemParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} t_b={} t_m={} c={}",
            self.n, self.t_b, self.t_m, self.c
        )
    }
}

/// Input parameters of a signature-free kl-cast object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawKlcastConfig", into = "RawKlcastConfig")]
pub struct KlcastConfig {
    q_d: u32,
    q_f: u32,
    single: bool,
}

#[derive(Serialize, Deserialize)]
struct RawKlcastConfig {
    q_d: u32,
    q_f: u32,
    single: bool,
}

impl TryFrom<RawKlcastConfig> for KlcastConfig {
    type Error = ParamsError;

    fn try_from(raw: RawKlcastConfig) -> Result<Self, Self::Error> {
        KlcastConfig::new(raw.q_d, raw.q_f, raw.single)
    }
}

impl From<KlcastConfig> for RawKlcastConfig {
    fn from(cfg: KlcastConfig) -> Self {
        RawKlcastConfig {
            q_d: cfg.q_d,
            q_f: cfg.q_f,
            single: cfg.single,
        }
    }
}

impl KlcastConfig {
    pub fn new(q_d: u32, q_f: u32, single: bool) -> Result<Self, ParamsError> {
        if q_f == 0 {
            return Err(ParamsError::InvalidConfig("q_f must be at least 1".into()));
        }
        if q_d < q_f {
            return Err(ParamsError::InvalidConfig(format!(
                "q_d = {q_d} must be at least q_f = {q_f}"
            )));
        }
        Ok(KlcastConfig { q_d, q_f, single })
    }

    pub fn q_d(&self) -> u32 {
        self.q_d
    }

    pub fn q_f(&self) -> u32 {
        self.q_f
    }

    pub fn single(&self) -> bool {
        self.single
    }
}

impl fmt::Display for KlcastConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "q_d={} q_f={} single={}",
            self.q_d, self.q_f, self.single
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssumptionVerdict {
    pub name: &'static str,
    /// Exact value of the left-hand side (for chain inequalities, the
    /// leftmost term).
    pub lhs: i128,
    pub satisfied: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssumptionReport {
    pub verdicts: Vec<AssumptionVerdict>,
    /// `n + q_f - t_b - t_m - 1`; absent for the signature-based checks.
    pub alpha: Option<i128>,
    /// Set when `c > n - t_b`.
    pub informational: bool,
}

impl AssumptionReport {
    pub fn satisfied(&self) -> bool {
        self.verdicts.iter().all(|v| v.satisfied)
    }

    pub fn verdict(&self, name: &str) -> Option<&AssumptionVerdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AssumptionVerdict> {
        self.verdicts.iter().filter(|v| !v.satisfied)
    }

    fn violation(&self) -> ParamsError {
        let failed: Vec<String> = self
            .failures()
            .map(|v| format!("{} ({})", v.name, v.detail))
            .collect();
        ParamsError::AssumptionViolation(failed.join(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GlobalMode {
    Weak,
    Strong,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct KlcastGuarantees {
    /// Minimum number of correct casters behind any correct delivery.
    pub k_prime: i64,
    /// Correct casters sufficient for at least one correct delivery.
    pub k: i64,
    /// Correct deliverers guaranteed once one correct process delivers.
    pub ell: i64,
    /// No-duplicity flag.
    pub delta: bool,
    pub global_mode: GlobalMode,
}

/// Result of a closed-form resilience bound check. `slack` is the exact
/// integer margin the bound is decided on (positive when it holds, except
/// where the bound also carries an irrational term).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MarginVerdict {
    pub holds: bool,
    pub slack: i128,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MbrbAlgorithm {
    #[serde(rename = "bracha")]
    BrachaRevisited,
    #[serde(rename = "imbs-raynal", alias = "ir")]
    ImbsRaynalRevisited,
}

impl fmt::Display for MbrbAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MbrbAlgorithm::BrachaRevisited => f.write_str("bracha"),
            MbrbAlgorithm::ImbsRaynalRevisited => f.write_str("imbs-raynal"),
        }
    }
}

/// Which kl-cast object of an MBRB algorithm a configuration belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectRole {
    Echo,
    Ready,
    Witness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstituentObject {
    pub role: ObjectRole,
    pub config: KlcastConfig,
    pub guarantees: KlcastGuarantees,
    pub assumptions: AssumptionReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MbrbGuarantee {
    pub algorithm: MbrbAlgorithm,
    pub sys: SystemParams,
    pub objects: Vec<ConstituentObject>,
    pub ell_mbrb: i64,
}

impl MbrbGuarantee {
    pub fn object(&self, role: ObjectRole) -> Option<&ConstituentObject> {
        self.objects.iter().find(|o| o.role == role)
    }

    pub fn config(&self, role: ObjectRole) -> Option<KlcastConfig> {
        self.object(role).map(|o| o.config)
    }
}

/// `floor(num / den)` for `den > 0`.
pub(crate) fn floor_div(num: i128, den: i128) -> i128 {
    debug_assert!(den > 0);
    num.div_euclid(den)
}

/// `ceil(num / den)` for `den > 0`.
pub(crate) fn ceil_div(num: i128, den: i128) -> i128 {
    debug_assert!(den > 0);
    -(-num).div_euclid(den)
}

fn narrow(v: i128) -> i64 {
    i64::try_from(v).expect("guarantee value exceeds i64 range")
}

/// Evaluates the four signature-free assumptions.
pub fn check_sf_assumptions(sys: &SystemParams, cfg: &KlcastConfig) -> AssumptionReport {
    let (n, t_b, t_m, c) = sys.ints();
    let q_d = i128::from(cfg.q_d);
    let q_f = i128::from(cfg.q_f);
    let alpha = n + q_f - t_b - t_m - 1;

    let chain = c - t_m >= q_d && q_d >= q_f + t_b && q_f + t_b >= 2 * t_b + 1;
    let a1 = AssumptionVerdict {
        name: "sf-A1",
        lhs: c - t_m,
        satisfied: chain,
        detail: format!(
            "c-t_m={} >= q_d={} >= q_f+t_b={} >= 2t_b+1={}",
            c - t_m,
            q_d,
            q_f + t_b,
            2 * t_b + 1
        ),
    };

    let disc = alpha * alpha - 4 * (q_f - 1) * (n - t_b);
    let a2 = AssumptionVerdict {
        name: "sf-A2",
        lhs: disc,
        satisfied: disc >= 0,
        detail: format!("alpha^2 - 4(q_f-1)(n-t_b) = {disc} >= 0"),
    };

    let r1 = alpha * (q_d - 1) - (q_f - 1) * (n - t_b) - (q_d - 1) * (q_d - 1);
    let a3 = AssumptionVerdict {
        name: "sf-A3",
        lhs: r1,
        satisfied: r1 > 0,
        detail: format!("alpha(q_d-1) - (q_f-1)(n-t_b) - (q_d-1)^2 = {r1} > 0"),
    };

    let shifted = q_d - 1 - t_b;
    let r0 = alpha * shifted - (q_f - 1) * (n - t_b) - shifted * shifted;
    let a4 = AssumptionVerdict {
        name: "sf-A4",
        lhs: r0,
        satisfied: r0 >= 0,
        detail: format!(
            "alpha(q_d-1-t_b) - (q_f-1)(n-t_b) - (q_d-1-t_b)^2 = {r0} >= 0"
        ),
    };

    AssumptionReport {
        verdicts: vec![a1, a2, a3, a4],
        alpha: Some(alpha),
        informational: sys.is_informational(),
    }
}

/// Evaluates the guarantee formulas without consulting the assumptions.
/// Only the positivity of the two denominators is required.
pub(crate) fn sf_formulas(
    sys: &SystemParams,
    cfg: &KlcastConfig,
) -> Result<KlcastGuarantees, ParamsError> {
    let (n, _, t_m, c) = sys.ints();
    let q_d = i128::from(cfg.q_d);
    let q_f = i128::from(cfg.q_f);

    let k_den = c - t_m - q_d + q_f;
    let ell_den = c - q_d + 1;
    if k_den <= 0 || ell_den <= 0 {
        return Err(ParamsError::AssumptionViolation(format!(
            "non-positive denominator (c-t_m-q_d+q_f = {k_den}, c-q_d+1 = {ell_den})"
        )));
    }

    let k_prime = q_f - n + c;
    let k = floor_div(c * (q_f - 1), k_den) + 1;
    // c(1 - t_m/(c-q_d+1)) = (c(c-q_d+1) - c t_m) / (c-q_d+1)
    let ell = ceil_div(c * ell_den - c * t_m, ell_den);

    Ok(KlcastGuarantees {
        k_prime: narrow(k_prime),
        k: narrow(k),
        ell: narrow(ell),
        delta: exceeds_half_n_plus_tb(sys, cfg.q_f)
            || (cfg.single && exceeds_half_n_plus_tb(sys, cfg.q_d)),
        global_mode: if cfg.single {
            GlobalMode::Strong
        } else {
            GlobalMode::Weak
        },
    })
}

/// `q > (n + t_b) / 2`, decided as `2q > n + t_b`.
fn exceeds_half_n_plus_tb(sys: &SystemParams, q: u32) -> bool {
    2 * u64::from(q) > u64::from(sys.n) + u64::from(sys.t_b)
}

/// Guarantees of the signature-free kl-cast object. Refuses to evaluate
/// when any of the four assumptions fails.
pub fn sf_guarantees(
    sys: &SystemParams,
    cfg: &KlcastConfig,
) -> Result<KlcastGuarantees, ParamsError> {
    let report = check_sf_assumptions(sys, cfg);
    if !report.satisfied() {
        return Err(report.violation());
    }
    sf_formulas(sys, cfg)
}

pub fn check_sb_assumptions(sys: &SystemParams, q_d: u32) -> AssumptionReport {
    let (_, t_b, t_m, c) = sys.ints();
    let q_d = i128::from(q_d);
    let partition = AssumptionVerdict {
        name: "sb-A1",
        lhs: c,
        satisfied: c > 2 * t_m,
        detail: format!("c={} > 2t_m={}", c, 2 * t_m),
    };
    let threshold = AssumptionVerdict {
        name: "sb-A2",
        lhs: c - t_m,
        satisfied: c - t_m >= q_d && q_d >= t_b + 1,
        detail: format!("c-t_m={} >= q_d={} >= t_b+1={}", c - t_m, q_d, t_b + 1),
    };
    AssumptionReport {
        verdicts: vec![partition, threshold],
        alpha: None,
        informational: sys.is_informational(),
    }
}

pub fn sb_guarantees(sys: &SystemParams, q_d: u32) -> Result<KlcastGuarantees, ParamsError> {
    let report = check_sb_assumptions(sys, q_d);
    if !report.satisfied() {
        return Err(report.violation());
    }
    let (n, _, t_m, c) = sys.ints();
    let q = i128::from(q_d);
    Ok(KlcastGuarantees {
        k_prime: narrow(q - n + c),
        k: narrow(q),
        ell: narrow(c - t_m),
        delta: exceeds_half_n_plus_tb(sys, q_d),
        global_mode: GlobalMode::Strong,
    })
}

/// `n > 3t_b + 2t_m + 2 sqrt(t_b t_m)`, decided by squaring the positive
/// slack `n - 3t_b - 2t_m` against `4 t_b t_m`.
pub fn check_b87(sys: &SystemParams) -> MarginVerdict {
    let (n, t_b, t_m, _) = sys.ints();
    let slack = n - 3 * t_b - 2 * t_m;
    MarginVerdict {
        holds: slack > 0 && slack * slack > 4 * t_b * t_m,
        slack,
    }
}

/// `n > 5t_b + 12t_m + 2 t_b t_m / (t_b + 2t_m)`, cross-multiplied by
/// `t_b + 2t_m`. Undefined for `t_b = t_m = 0`.
pub fn check_ir16(sys: &SystemParams) -> Result<MarginVerdict, ParamsError> {
    let (n, t_b, t_m, _) = sys.ints();
    if t_b == 0 && t_m == 0 {
        return Err(ParamsError::DegenerateInput(
            "t_b = t_m = 0: assumption vacuous, all quorums reduce to the t_m = 0 classical case"
                .into(),
        ));
    }
    let weight = t_b + 2 * t_m;
    let slack = n * weight - ((5 * t_b + 12 * t_m) * weight + 2 * t_b * t_m);
    Ok(MarginVerdict {
        holds: slack > 0,
        slack,
    })
}

fn constituent(
    sys: &SystemParams,
    role: ObjectRole,
    config: KlcastConfig,
) -> Result<ConstituentObject, ParamsError> {
    Ok(ConstituentObject {
        role,
        config,
        guarantees: sf_formulas(sys, &config)?,
        assumptions: check_sf_assumptions(sys, &config),
    })
}

/// Quorum instantiation of the kl-cast rewriting of Bracha's broadcast:
/// an ECHO object `(floor((n+t_b)/2)+1, t_b+1, single)` chained into a
/// READY object `(2t_b+t_m+1, t_b+1, single)`.
pub fn bracha_configs(sys: &SystemParams) -> Result<MbrbGuarantee, ParamsError> {
    let b87 = check_b87(sys);
    if !b87.holds {
        return Err(ParamsError::AssumptionViolation(format!(
            "B87 fails for {sys}: n - 3t_b - 2t_m = {} and 4 t_b t_m = {}",
            b87.slack,
            4 * u64::from(sys.t_b) * u64::from(sys.t_m)
        )));
    }
    let (n, t_b, t_m) = (sys.n, sys.t_b, sys.t_m);
    let echo_cfg = KlcastConfig::new((n + t_b) / 2 + 1, t_b + 1, true)?;
    let ready_cfg = KlcastConfig::new(2 * t_b + t_m + 1, t_b + 1, true)?;
    let echo = constituent(sys, ObjectRole::Echo, echo_cfg)?;
    let ready = constituent(sys, ObjectRole::Ready, ready_cfg)?;

    let c_minus_tm = i64::from(sys.c) - i64::from(t_m);
    if c_minus_tm < echo.guarantees.k {
        return Err(ParamsError::AssumptionViolation(format!(
            "chaining: c - t_m = {c_minus_tm} < k(echo) = {}",
            echo.guarantees.k
        )));
    }
    if echo.guarantees.ell < ready.guarantees.k {
        return Err(ParamsError::AssumptionViolation(format!(
            "chaining: l(echo) = {} < k(ready) = {}",
            echo.guarantees.ell, ready.guarantees.k
        )));
    }

    let (_, t_b, t_m, c) = sys.ints();
    let den = c - 2 * t_b - t_m;
    if den <= 0 {
        return Err(ParamsError::AssumptionViolation(format!(
            "c - 2t_b - t_m = {den} is not positive"
        )));
    }
    let ell_mbrb = narrow(ceil_div(c * den - c * t_m, den));
    debug_assert_eq!(ell_mbrb, ready.guarantees.ell);

    Ok(MbrbGuarantee {
        algorithm: MbrbAlgorithm::BrachaRevisited,
        sys: *sys,
        objects: vec![echo, ready],
        ell_mbrb,
    })
}

/// Quorum instantiation of the kl-cast rewriting of Imbs and Raynal's
/// broadcast: a single WITNESS object
/// `(floor((n+3t_b)/2)+3t_m+1, floor((n+t_b)/2)+1, !single)`.
///
/// With `t_b = t_m = 0` the resilience bound is vacuous and the classical
/// fault-free instantiation is returned.
pub fn ir_config(sys: &SystemParams) -> Result<MbrbGuarantee, ParamsError> {
    match check_ir16(sys) {
        Ok(v) if !v.holds => {
            return Err(ParamsError::AssumptionViolation(format!(
                "IR16 fails for {sys}: cross-multiplied slack = {}",
                v.slack
            )))
        }
        Ok(_) | Err(ParamsError::DegenerateInput(_)) => {}
        Err(e) => return Err(e),
    }
    let (n, t_b, t_m) = (sys.n, sys.t_b, sys.t_m);
    let witness_cfg = KlcastConfig::new((n + 3 * t_b) / 2 + 3 * t_m + 1, (n + t_b) / 2 + 1, false)?;
    let witness = constituent(sys, ObjectRole::Witness, witness_cfg)?;

    let c_minus_tm = i64::from(sys.c) - i64::from(t_m);
    if c_minus_tm < witness.guarantees.k {
        return Err(ParamsError::AssumptionViolation(format!(
            "chaining: c - t_m = {c_minus_tm} < k(witness) = {}",
            witness.guarantees.k
        )));
    }

    let ell_mbrb = witness.guarantees.ell;
    Ok(MbrbGuarantee {
        algorithm: MbrbAlgorithm::ImbsRaynalRevisited,
        sys: *sys,
        objects: vec![witness],
        ell_mbrb,
    })
}

pub fn mbrb_guarantee(
    algorithm: MbrbAlgorithm,
    sys: &SystemParams,
) -> Result<MbrbGuarantee, ParamsError> {
    match algorithm {
        MbrbAlgorithm::BrachaRevisited => bracha_configs(sys),
        MbrbAlgorithm::ImbsRaynalRevisited => ir_config(sys),
    }
}
