//! Experiment orchestration shared by the CLI and the test suites: fixtures,
//! random instances, and the solve / certify / tree-verify / sweep pipelines.

pub mod fixtures;
pub mod generate;
mod pipeline;
mod sweep;
mod treecheck;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::bp::BpError;
use crate::graph::{GraphError, Violation};
use crate::lp::cert::CertError;
use crate::lp::OracleError;
use crate::schedule::ScheduleError;
use crate::tree::TreeError;

pub use generate::{random_init, random_instance, Density, InstanceSpec};
pub use pipeline::{
    certify, solve, BpSummary, CertificateSummary, CertifyReport, ExperimentReport, ReductionSummary, SolveConfig,
    SolveOutcome, StopRequest, TightnessSummary,
};
pub use sweep::{sweep, RowStatus, SweepConfig, SweepReport, SweepRow};
pub use treecheck::{tree_verify, TreeVerifyConfig, TreeVerifyReport, TreeVerifyRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_NONCONVERGENCE: i32 = 4;
pub const EXIT_MISMATCH: i32 = 5;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Parse(#[from] GraphError),
    #[error("invalid instance: {}", format_violations(.0))]
    Validation(Vec<Violation>),
    #[error("no perfect b-matching exists")]
    Infeasible,
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Certificate(#[from] CertError),
    #[error(transparent)]
    Oracle(OracleError),
    #[error(transparent)]
    Bp(#[from] BpError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("{0}")]
    Usage(String),
}

impl From<OracleError> for HarnessError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Infeasible => HarnessError::Infeasible,
            other => HarnessError::Oracle(other),
        }
    }
}

fn format_violations(vs: &[Violation]) -> String {
    vs.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Io(_) => EXIT_IO,
            HarnessError::Infeasible => EXIT_INFEASIBLE,
            HarnessError::Schedule(ScheduleError::Exhausted { .. }) => EXIT_NONCONVERGENCE,
            _ => EXIT_VALIDATION,
        }
    }
}

/// Outcome class of a run; drives the process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    NonConvergence,
    Mismatch,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => EXIT_OK,
            Status::NonConvergence => EXIT_NONCONVERGENCE,
            Status::Mismatch => EXIT_MISMATCH,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Ok => "ok",
            Status::NonConvergence => "non-convergence",
            Status::Mismatch => "mismatch",
        })
    }
}
