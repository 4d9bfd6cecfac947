//! Scenario configuration, run orchestration, diagnostics and output files.

mod config;
mod diagnostics;
mod output;
mod run;

pub use config::{FieldMode, InflowKind, InitKind, Scenario, XMeshSpec, PRESETS};
pub use diagnostics::{diagnostics, DiagnosticsRecord, ErrorReference, CSV_HEADER};
pub use output::{
    diagnostics_csv, matrix_from_text, matrix_to_text, mesh_hash, read_snapshot, snapshot_dir, write_outputs,
    write_snapshot,
};
pub use run::{
    build_v_mesh, build_x_mesh, fit_decay_rate, initial_datum, landau_energy_slope, run_scenario, simulate,
    simulate_with, Discretization, RunOutput, LANDAU_GAMMA,
};

use crate::error::Result;

/// Summary of one level of a convergence study.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelSummary {
    pub level: usize,
    pub max_error: f64,
    pub t_max_error: f64,
    pub max_rank: usize,
    pub records: Vec<DiagnosticsRecord>,
}

/// Run levels `0..=levels` of a scenario with an error oracle.
pub fn convergence(sc: &Scenario, levels: usize) -> Result<Vec<LevelSummary>> {
    (0..=levels)
        .map(|level| {
            let s = Scenario { level, ..sc.clone() };
            let out = simulate(&s)?;
            let (t_max_error, max_error) = out
                .records
                .iter()
                .filter_map(|r| r.l2_error.map(|e| (r.t, e)))
                .fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
            let max_rank = out.records.iter().map(|r| r.rank).max().unwrap_or(0);
            Ok(LevelSummary {
                level,
                max_error,
                t_max_error,
                max_rank,
                records: out.records,
            })
        })
        .collect()
}

/// Fixed-width table of a convergence study.
pub fn convergence_table(rows: &[LevelSummary]) -> String {
    let mut s = String::from("level  max_l2_error  t_at_max  max_rank\n");
    for r in rows {
        s.push_str(&format!(
            "{:>5}  {:>12.5e}  {:>8.4}  {:>8}\n",
            r.level, r.max_error, r.t_max_error, r.max_rank
        ));
    }
    s
}
