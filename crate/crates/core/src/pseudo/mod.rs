//! Pseudoword shift benchmarks.
//!
//! A pseudoword replaces occurrences of nine real "sense" words with
//! period-dependent probabilities. Seven schemas describe how those
//! probabilities evolve: C1-C3 are genuine shifts, D1-D4 are frequency or
//! noise patterns that should not count as meaning change.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::rng;
use crate::{Error, Result};

mod eval;
mod inject;
mod select;

pub use eval::{gold_labels, run_schema_eval, EvalConfig, EvalReport, GridConfig, GridResult};
pub use inject::inject_pseudowords;
pub use select::{build_benchmark, frequency_quartiles, select_sense_words, BenchmarkParams, PseudoWordSpec};

/// Number of miscellaneous senses per pseudoword.
pub const MISC_SENSES: usize = 7;
/// Period count the fixed spike positions refer to.
pub const REFERENCE_PERIODS: usize = 20;

const SPIKE: f64 = 0.55;
const BASE: f64 = 0.1;
const CONSTANT: f64 = 0.7;
const D2_SPIKES: [usize; 2] = [4, 6];
const D3_SPIKES: [usize; 6] = [1, 3, 7, 9, 13, 15];

/// Shift schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Schema {
    /// Sense 1 constant, sense 2 grows.
    C1,
    /// Sense 1 fades while sense 2 grows.
    C2,
    /// Sense 1 grows on top of Dirichlet noise senses.
    C3,
    /// Sense 1 only, decreasing (increasing with [`ScheduleOptions::d1_increasing`]).
    D1,
    /// Sense 1 constant, sense 2 spikes twice.
    D2,
    /// Sense 1 constant, sense 2 spikes in three pairs.
    D3,
    /// Dirichlet noise senses only.
    D4,
}

impl Schema {
    pub const ALL: [Schema; 7] = [
        Schema::C1,
        Schema::C2,
        Schema::C3,
        Schema::D1,
        Schema::D2,
        Schema::D3,
        Schema::D4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Schema::C1 => "C1",
            Schema::C2 => "C2",
            Schema::C3 => "C3",
            Schema::D1 => "D1",
            Schema::D2 => "D2",
            Schema::D3 => "D3",
            Schema::D4 => "D4",
        }
    }

    /// Position in [`Schema::ALL`]; used as the gold class id.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Schema {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Schema::ALL
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::param("schema", alloc::format!("unknown value `{s}`")))
    }
}

/// Schedule construction switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScheduleOptions {
    /// D1 with sense 1 rising from 0.1 to 1 instead of falling.
    pub d1_increasing: bool,
    /// Rescale spike positions when `T != 20`; otherwise such `T` is rejected.
    pub scale_spikes: bool,
}

impl Default for ScheduleOptions {
    fn default() -> Self {
        Self {
            d1_increasing: false,
            scale_spikes: true,
        }
    }
}

/// Per-period replacement probabilities of the nine sense words.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SenseSchedule {
    pub schema: Schema,
    pub periods: usize,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    /// `periods` rows of [`MISC_SENSES`] probabilities.
    pub p_misc: Vec<Vec<f64>>,
}

impl SenseSchedule {
    /// Probability of replacing sense `slot` (0 = word 1, 1 = word 2, 2.. = miscellaneous) in period `t`.
    pub fn probability(&self, t: usize, slot: usize) -> f64 {
        match slot {
            0 => self.p1[t],
            1 => self.p2[t],
            s => self.p_misc[t][s - 2],
        }
    }

    /// Check ranges and the schema's shape.
    pub fn validate(&self) -> Result<()> {
        let t = self.periods;
        let bad = |what: &str| Err(Error::Invariant(alloc::format!("{} schedule: {what}", self.schema)));
        if self.p1.len() != t || self.p2.len() != t || self.p_misc.len() != t {
            return bad("length differs from period count");
        }
        if self.p_misc.iter().any(|r| r.len() != MISC_SENSES) {
            return bad("miscellaneous row of wrong width");
        }
        let all = self.p1.iter().chain(&self.p2).chain(self.p_misc.iter().flatten());
        if all.clone().any(|p| !(0.0..=1.0).contains(p)) {
            return bad("probability outside [0, 1]");
        }
        let zeros = |v: &[f64]| v.iter().all(|&p| p == 0.0);
        let misc_zero = self.p_misc.iter().all(|r| zeros(r));
        let dirichlet_rows = self
            .p_misc
            .iter()
            .all(|r| libm::fabs(r.iter().sum::<f64>() - 1.0) <= 1e-9);
        let elevated = self.p2.iter().filter(|&&p| p > BASE).count();
        let constant = |v: &[f64], c: f64| v.iter().all(|&p| p == c);
        let ok = match self.schema {
            Schema::C1 => constant(&self.p1, CONSTANT) && misc_zero && increasing(&self.p2),
            Schema::C2 => decreasing(&self.p1) && increasing(&self.p2) && misc_zero,
            Schema::C3 => increasing(&self.p1) && zeros(&self.p2) && dirichlet_rows,
            Schema::D1 => (increasing(&self.p1) || decreasing(&self.p1)) && zeros(&self.p2) && misc_zero,
            Schema::D2 => constant(&self.p1, CONSTANT) && elevated == 2 && misc_zero,
            Schema::D3 => constant(&self.p1, CONSTANT) && elevated == 6 && misc_zero,
            Schema::D4 => zeros(&self.p1) && zeros(&self.p2) && dirichlet_rows,
        };
        if ok {
            Ok(())
        } else {
            bad("shape does not match schema")
        }
    }
}

fn increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

fn decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] > w[1])
}

/// `n` points from `a` to `b` evenly spaced in log space. The endpoints are
/// exact, and swapping `a` and `b` gives exactly the reversed sequence.
pub fn geometric(a: f64, b: f64, n: usize) -> Vec<f64> {
    if a > b {
        let mut v = geometric(b, a, n);
        v.reverse();
        return v;
    }
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let (la, lb) = (libm::log10(a), libm::log10(b));
            let mut v: Vec<f64> = (0..n)
                .map(|i| libm::pow(10.0, la + (lb - la) * i as f64 / (n - 1) as f64))
                .collect();
            v[0] = a;
            v[n - 1] = b;
            v
        }
    }
}

/// Map spike positions defined for 20 periods onto `periods` periods.
/// Positions are scaled, rounded, and pushed forward on collision.
pub fn spike_positions(reference: &[usize], periods: usize, scale: bool) -> Result<Vec<usize>> {
    if periods == REFERENCE_PERIODS {
        return Ok(reference.to_vec());
    }
    if !scale {
        return Err(Error::param(
            "periods",
            alloc::format!("spike positions are fixed for {REFERENCE_PERIODS} periods, got {periods}"),
        ));
    }
    let mut out: Vec<usize> = Vec::with_capacity(reference.len());
    for &i in reference {
        let mut s = libm::round(i as f64 * periods as f64 / REFERENCE_PERIODS as f64) as usize;
        if let Some(&last) = out.last() {
            s = s.max(last + 1);
        }
        if s >= periods {
            return Err(Error::param(
                "periods",
                alloc::format!("{periods} periods cannot hold {} distinct spikes", reference.len()),
            ));
        }
        out.push(s);
    }
    Ok(out)
}

/// Symmetric Dirichlet(1) draw over [`MISC_SENSES`] senses.
fn dirichlet_row<R: rand::Rng + ?Sized>(rng: &mut R) -> Vec<f64> {
    let draws: Vec<f64> = (0..MISC_SENSES).map(|_| rng::standard_exponential(rng)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

/// Build the schedule of `schema` over `periods` periods. Only C3 and D4 use
/// `seed` (for their per-period Dirichlet draws).
pub fn build_schedule(schema: Schema, periods: usize, options: ScheduleOptions, seed: u64) -> Result<SenseSchedule> {
    if periods < 4 {
        return Err(Error::param("periods", alloc::format!("need at least 4, got {periods}")));
    }
    let t = periods;
    let zeros = vec![0.0; t];
    let no_misc = vec![vec![0.0; MISC_SENSES]; t];
    let dirichlet = || {
        let mut r = rng::stream(seed, &[0xd1c, schema.index() as u64]);
        (0..t).map(|_| dirichlet_row(&mut r)).collect::<Vec<_>>()
    };
    let spikes = |at: &[usize]| -> Result<Vec<f64>> {
        let mut p2 = vec![BASE; t];
        for i in spike_positions(at, t, options.scale_spikes)? {
            p2[i] = SPIKE;
        }
        Ok(p2)
    };
    let (p1, p2, p_misc) = match schema {
        Schema::C1 => (vec![CONSTANT; t], geometric(BASE, 1.0, t), no_misc),
        Schema::C2 => (geometric(1.0, BASE, t), geometric(BASE, 1.0, t), no_misc),
        Schema::C3 => (geometric(BASE, 1.0, t), zeros, dirichlet()),
        Schema::D1 if options.d1_increasing => (geometric(BASE, 1.0, t), zeros, no_misc),
        Schema::D1 => (geometric(1.0, BASE, t), zeros, no_misc),
        Schema::D2 => (vec![CONSTANT; t], spikes(&D2_SPIKES)?, no_misc),
        Schema::D3 => (vec![CONSTANT; t], spikes(&D3_SPIKES)?, no_misc),
        Schema::D4 => (zeros.clone(), zeros, dirichlet()),
    };
    let schedule = SenseSchedule {
        schema,
        periods,
        p1,
        p2,
        p_misc,
    };
    schedule.validate()?;
    Ok(schedule)
}
