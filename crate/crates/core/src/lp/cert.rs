//! Certificate files: one `y i value` line per vertex and `lambda i j value`
//! lines per edge (omitted lambdas are zero). Ids are 1-based, values are
//! rationals. `#` starts a comment.

use num_traits::Zero;
use thiserror::Error;

use crate::graph::{Graph, Mode};
use crate::lp::oracle::DualCertificate;
use crate::numeric::{parse_rational, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CertError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: vertex {vertex} is out of range")]
    UnknownVertex { line: usize, vertex: usize },
    #[error("line {line}: {{{u},{v}}} is not an edge")]
    UnknownEdge { line: usize, u: usize, v: usize },
    #[error("line {line}: duplicate entry")]
    Duplicate { line: usize },
    #[error("no `y` line for vertex {0}")]
    MissingVertex(usize),
}

pub fn write_certificate(g: &Graph, cert: &DualCertificate) -> String {
    let mut out = format!("# dual certificate ({} mode)\n", cert.mode);
    for (i, y) in cert.y.iter().enumerate() {
        out.push_str(&format!("y {} {}\n", i + 1, y));
    }
    for (e, l) in cert.lambda.iter().enumerate() {
        if !l.is_zero() {
            let (u, v) = g.edge(e).key();
            out.push_str(&format!("lambda {} {} {}\n", u + 1, v + 1, l));
        }
    }
    out
}

pub fn parse_certificate(g: &Graph, mode: Mode, text: &str) -> Result<DualCertificate, CertError> {
    let mut y: Vec<Option<Rational>> = vec![None; g.n()];
    let mut lambda: Vec<Option<Rational>> = vec![None; g.m()];
    let vertex = |line: usize, tok: &str| -> Result<usize, CertError> {
        let v: usize = tok.parse().map_err(|_| CertError::Syntax { line, message: format!("bad vertex id `{tok}`") })?;
        if v == 0 || v > g.n() {
            return Err(CertError::UnknownVertex { line, vertex: v });
        }
        Ok(v - 1)
    };
    let value = |line: usize, tok: &str| {
        parse_rational(tok).ok_or_else(|| CertError::Syntax { line, message: format!("bad value `{tok}`") })
    };
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        match toks.as_slice() {
            [] => {}
            ["y", i, v] => {
                let i = vertex(line, i)?;
                if y[i].replace(value(line, v)?).is_some() {
                    return Err(CertError::Duplicate { line });
                }
            }
            ["lambda", i, j, v] => {
                let (i, j) = (vertex(line, i)?, vertex(line, j)?);
                let e = g.edge_between(i, j).ok_or(CertError::UnknownEdge { line, u: i + 1, v: j + 1 })?;
                if lambda[e].replace(value(line, v)?).is_some() {
                    return Err(CertError::Duplicate { line });
                }
            }
            _ => {
                return Err(CertError::Syntax { line, message: "expected `y i value` or `lambda i j value`".into() });
            }
        }
    }
    let y = y
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or(CertError::MissingVertex(i + 1)))
        .collect::<Result<Vec<_>, _>>()?;
    let lambda = lambda.into_iter().map(|v| v.unwrap_or_else(Rational::zero)).collect();
    Ok(DualCertificate::new(g, mode, y, lambda))
}
