//! Exact LP machinery: the simplex core, the b-matching oracles built on it,
//! and the certificate text format.

pub mod cert;
pub mod oracle;
pub mod simplex;

pub use oracle::{
    basis_dual, bound_from_certificate, brute_force, check_cs, dual_solve, half_integral_scan, is_tight, iteration_bound,
    lp_solve, BoundRule, BruteForce, CsReport, DualCertificate, IterationBound, LpSolution, OracleError, Tightness,
};
