//! Scenario runner, property checkers, seeded batteries, parameter sweeps
//! and an exhaustive explorer for small systems.

mod battery;
mod byzantine;
mod oracle;
mod properties;
mod scenario;
mod sweep;

pub use battery::{run_battery, BatteryFailure, BatteryReport};
pub use byzantine::{ByzantineBehavior, ByzantineNode};
pub use oracle::{
    explore, Counterexample, OracleError, OracleLimits, OracleReport, DEFAULT_MAX_BRANCHES,
};
pub use properties::*;
pub use scenario::{
    run_to_quiescence, Algorithm, ByzantineEntry, KlcastSpec, Participant, Scenario, Setup,
    WorkloadItem,
};
pub use sweep::{sweep, to_csv, SweepRow};

use crate::netsim::{ConfigError, Trace};

/// Runs `scenario` and checks the trace against what its parameters promise.
pub fn run_and_check(scenario: &Scenario) -> Result<(Trace, PropertyVerdicts), ConfigError> {
    let setup = scenario.setup()?;
    let trace = scenario::run_prepared(scenario, &setup)?;
    let verdicts = check_properties(&trace, &setup.correct_set(), setup.sys.t_m(), &setup.expectation);
    Ok((trace, verdicts))
}
