//! Seeded random instances and random initial messages.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bp::MessageInit;
use crate::graph::{Graph, Mode};
use crate::numeric::{integer, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Density {
    Complete,
    /// Each edge kept independently with this probability.
    Sparse { p: f64 },
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Complete => f.write_str("complete"),
            Density::Sparse { p } => write!(f, "sparse:{p}"),
        }
    }
}

impl FromStr for Density {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "complete" {
            return Ok(Density::Complete);
        }
        let p = s.strip_prefix("sparse:").ok_or_else(|| format!("unknown density `{s}` (complete, sparse:P)"))?;
        let p: f64 = p.parse().map_err(|_| format!("bad edge probability `{p}`"))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(format!("edge probability {p} is outside [0, 1]"));
        }
        Ok(Density::Sparse { p })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceSpec {
    pub n_min: usize,
    pub n_max: usize,
    pub density: Density,
    /// Inclusive integer weight range.
    pub weight_min: i64,
    pub weight_max: i64,
    /// Draw pairwise distinct weights (falls back to repeats if the range is too small).
    pub distinct: bool,
    /// Capacities drawn from `1..=b_max`.
    pub b_max: usize,
    pub mode: Mode,
}

impl InstanceSpec {
    pub fn perfect(n_min: usize, n_max: usize, density: Density) -> Self {
        InstanceSpec { n_min, n_max, density, weight_min: 1, weight_max: 100, distinct: false, b_max: 1, mode: Mode::Perfect }
    }

    pub fn nonperfect(n_min: usize, n_max: usize, density: Density) -> Self {
        InstanceSpec {
            n_min,
            n_max,
            density,
            weight_min: -100,
            weight_max: 0,
            distinct: false,
            b_max: 1,
            mode: Mode::NonPerfect,
        }
    }
}

const MAX_ATTEMPTS: usize = 1000;

/// Deterministic instance for `(spec, seed)`. Draws are repeated until the
/// graph passes validation (and, for perfect mode, has an even capacity sum);
/// `None` if no such draw turns up.
pub fn random_instance(spec: &InstanceSpec, seed: u64) -> Option<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let n = rng.gen_range(spec.n_min..=spec.n_max.max(spec.n_min));
        let mut pairs = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                let keep = match spec.density {
                    Density::Complete => true,
                    Density::Sparse { p } => rng.gen_bool(p),
                };
                if keep {
                    pairs.push((u, v));
                }
            }
        }
        let span = (spec.weight_max - spec.weight_min + 1).max(1) as usize;
        let weights: Vec<i64> = if spec.distinct && span >= pairs.len() {
            let mut pool: Vec<i64> = (spec.weight_min..=spec.weight_max).collect();
            pool.shuffle(&mut rng);
            pool.truncate(pairs.len());
            pool
        } else {
            (0..pairs.len()).map(|_| rng.gen_range(spec.weight_min..=spec.weight_max)).collect()
        };
        let caps: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=spec.b_max.max(1))).collect();
        if spec.mode == Mode::Perfect && caps.iter().sum::<usize>() % 2 == 1 {
            continue;
        }
        let edges = pairs.iter().zip(&weights).map(|(&(u, v), &w)| (u, v, integer(w)));
        let Ok(g) = Graph::new(caps, edges) else { continue };
        if n > 0 && g.validate(spec.mode).is_ok() {
            return Some(g);
        }
    }
    None
}

/// Explicit initial messages with integer values drawn from `[lo, hi]`.
pub fn random_init(g: &Graph, seed: u64, lo: i64, hi: i64) -> MessageInit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let map: BTreeMap<(usize, usize), Rational> =
        g.arcs().map(|arc| ((arc.from, arc.to), integer(rng.gen_range(lo..=hi)))).collect();
    MessageInit::Explicit(map)
}
