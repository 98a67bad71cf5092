use rayon::prelude::*;
use serde::Serialize;

use super::properties::{check_properties, Property};
use super::scenario::{run_prepared, Scenario};
use crate::netsim::{ConfigError, TraceRecord};

#[derive(Debug, Clone, Serialize)]
pub struct BatteryFailure {
    pub seed: u64,
    pub property: Property,
    pub detail: String,
    pub witness: Vec<TraceRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatteryReport {
    pub runs: usize,
    /// Sorted by seed, then property.
    pub failures: Vec<BatteryFailure>,
    /// Smallest census count over all runs.
    pub min_deliverers: Option<usize>,
    pub messages: usize,
}

impl BatteryReport {
    pub fn all_hold(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs `template` once per seed, in parallel, and checks every trace.
pub fn run_battery(
    template: &Scenario,
    seeds: impl IntoIterator<Item = u64>,
) -> Result<BatteryReport, ConfigError> {
    let setup = template.setup()?;
    let correct = setup.correct_set();
    let seeds: Vec<u64> = seeds.into_iter().collect();
    let outcomes = seeds
        .par_iter()
        .map(|&seed| {
            let trace = run_prepared(&template.with_seed(seed), &setup)?;
            let v = check_properties(&trace, &correct, setup.sys.t_m(), &setup.expectation);
            let failures: Vec<BatteryFailure> = v
                .failures()
                .map(|f| BatteryFailure {
                    seed,
                    property: f.property,
                    detail: f.detail.clone(),
                    witness: f.witness.clone(),
                })
                .collect();
            Ok((failures, v.min_deliverers(), trace.message_count()))
        })
        .collect::<Result<Vec<_>, ConfigError>>()?;

    let mut report = BatteryReport {
        runs: seeds.len(),
        failures: Vec::new(),
        min_deliverers: None,
        messages: 0,
    };
    for (failures, min, messages) in outcomes {
        report.failures.extend(failures);
        report.min_deliverers = match (report.min_deliverers, min) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        report.messages += messages;
    }
    report.failures.sort_by_key(|f| (f.seed, f.property));
    Ok(report)
}
