use std::fmt::Write as _;
use std::ops::RangeInclusive;

use serde::Serialize;

use crate::params::{
    check_b87, check_ir16, mbrb_guarantee, MbrbAlgorithm, ObjectRole, ParamsError, SystemParams,
};

/// One grid point at `c = n - t_b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub t_b: u32,
    pub t_m: u32,
    /// The algorithm's resilience bound holds.
    pub feasible: bool,
    /// Exact margin of the bound; absent where the bound is vacuous or the
    /// system itself is invalid.
    pub slack: Option<i128>,
    pub ell_mbrb: Option<i64>,
    /// `(role, k, ell)` of each constituent object, in chaining order.
    pub objects: Vec<(ObjectRole, i64, i64)>,
    /// Why a feasible cell produced no configuration.
    pub error: Option<String>,
}

fn cell(n: u32, algorithm: MbrbAlgorithm, t_b: u32, t_m: u32) -> SweepRow {
    let mut row = SweepRow {
        t_b,
        t_m,
        feasible: false,
        slack: None,
        ell_mbrb: None,
        objects: Vec::new(),
        error: None,
    };
    let sys = match SystemParams::worst_case(n, t_b, t_m) {
        Ok(s) => s,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    match algorithm {
        MbrbAlgorithm::BrachaRevisited => {
            let v = check_b87(&sys);
            row.feasible = v.holds;
            row.slack = Some(v.slack);
        }
        MbrbAlgorithm::ImbsRaynalRevisited => match check_ir16(&sys) {
            Ok(v) => {
                row.feasible = v.holds;
                row.slack = Some(v.slack);
            }
            Err(ParamsError::DegenerateInput(_)) => row.feasible = true,
            Err(e) => row.error = Some(e.to_string()),
        },
    }
    if !row.feasible {
        return row;
    }
    match mbrb_guarantee(algorithm, &sys) {
        Ok(g) => {
            row.ell_mbrb = Some(g.ell_mbrb);
            row.objects = g
                .objects
                .iter()
                .map(|o| (o.role, o.guarantees.k, o.guarantees.ell))
                .collect();
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Evaluates every `(t_b, t_m)` in the grid, row-major in `t_b`.
pub fn sweep(
    n: u32,
    algorithm: MbrbAlgorithm,
    t_b: RangeInclusive<u32>,
    t_m: RangeInclusive<u32>,
) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for b in t_b {
        for m in t_m.clone() {
            rows.push(cell(n, algorithm, b, m));
        }
    }
    rows
}

/// One line per row; `-` marks values an infeasible cell does not have.
pub fn to_csv(algorithm: MbrbAlgorithm, rows: &[SweepRow]) -> String {
    let mut out = String::from("t_b,t_m,feasible,ell_mbrb,");
    out.push_str(match algorithm {
        MbrbAlgorithm::BrachaRevisited => "objE_k,objE_ell,objR_k,objR_ell\n",
        MbrbAlgorithm::ImbsRaynalRevisited => "objW_k,objW_ell\n",
    });
    let width = match algorithm {
        MbrbAlgorithm::BrachaRevisited => 2,
        MbrbAlgorithm::ImbsRaynalRevisited => 1,
    };
    for r in rows {
        let ell = r.ell_mbrb.map_or("-".to_string(), |v| v.to_string());
        let _ = write!(out, "{},{},{},{ell}", r.t_b, r.t_m, r.feasible);
        for i in 0..width {
            match r.objects.get(i) {
                Some((_, k, l)) => {
                    let _ = write!(out, ",{k},{l}");
                }
                None => out.push_str(",-,-"),
            }
        }
        out.push('\n');
    }
    out
}
