//! Low-rank time integrators: projector splitting (PSI) and the rank-adaptive
//! unconventional integrator (RAUC).

mod compress;
mod psi;
mod rauc;
mod rhs;
mod state;

pub use compress::{candidate_pool, compress_initial, pad_state, Pools, COMPRESS_TOL};
pub use psi::psi_step;
pub use rauc::rauc_step;
pub use rhs::{k_rhs, l_rhs, s_rhs, ProjectedV, ProjectedX, SDirection};
pub use state::{LowRankState, ORTHO_TOL};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fem::OperatorSet;
use crate::inflow::Inflow;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrator {
    Psi,
    Rauc,
}

impl FromStr for Integrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "psi" => Ok(Integrator::Psi),
            "rauc" => Ok(Integrator::Rauc),
            _ => Err(Error::Config {
                key: "integrator".into(),
                message: format!("unknown integrator `{s}` (expected psi or rauc)"),
            }),
        }
    }
}

impl fmt::Display for Integrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Integrator::Psi => "psi",
            Integrator::Rauc => "rauc",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepConfig {
    pub dt: f64,
    /// CIP stabilization multiplier
    pub delta: f64,
    /// truncation tolerance of the adaptive integrator
    pub eps: f64,
    pub r_max: usize,
    /// RK3 cycles per sub-step
    pub substeps: usize,
    pub integrator: Integrator,
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig {
            dt: 5e-3,
            delta: 0.0,
            eps: 1e-3,
            r_max: 40,
            substeps: 1,
            integrator: Integrator::Psi,
        }
    }
}

impl StepConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: String| {
            Err(Error::Config {
                key: key.into(),
                message,
            })
        };
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt", format!("must be positive, got {}", self.dt));
        }
        if !(self.eps >= 0.0) {
            return bad("eps", format!("must be nonnegative, got {}", self.eps));
        }
        if !(self.delta >= 0.0) {
            return bad("delta", format!("must be nonnegative, got {}", self.delta));
        }
        if self.r_max < 1 {
            return bad("r_max", "must be at least 1".into());
        }
        if self.substeps < 1 {
            return bad("substeps", "must be at least 1".into());
        }
        Ok(())
    }
}

/// What happened during one step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepReport {
    pub rank_before: usize,
    pub rank_after: usize,
    /// columns of `[X0, K1]` (resp. `[V0, L1]`) left out of the augmented basis
    pub dropped_x: Vec<usize>,
    pub dropped_v: Vec<usize>,
    /// columns replaced from the candidate pool
    pub completed: usize,
    /// singular values of the augmented core before truncation
    pub sigma: Vec<f64>,
    pub reorthonormalized: bool,
}

/// Advance `state` by `cfg.dt` with the configured integrator. The field
/// stored in `ops` is used as is for the whole step.
pub fn step(
    state: &LowRankState,
    ops: &OperatorSet,
    inflow: &Inflow,
    cfg: &StepConfig,
    pools: &Pools,
) -> Result<(LowRankState, StepReport)> {
    cfg.validate()?;
    let (mut next, mut report) = match cfg.integrator {
        Integrator::Psi => psi_step(state, ops, inflow, cfg, pools)?,
        Integrator::Rauc => rauc_step(state, ops, inflow, cfg)?,
    };
    report.reorthonormalized = next.reorthonormalize(ops, &pools.x, &pools.v)?;
    Ok((next, report))
}

/// Attach the sub-step name to errors raised inside it.
pub(crate) fn in_substep<T>(r: Result<T>, name: &str) -> Result<T> {
    r.map_err(|e| match e {
        Error::RankDeficient {
            context,
            column,
            residual,
        } => Error::RankDeficient {
            context: format!("{name}: {context}"),
            column,
            residual,
        },
        Error::NumericalBlowup { t, context } => Error::NumericalBlowup {
            t,
            context: format!("{name}: {context}"),
        },
        other => other,
    })
}
