use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_rational::BigRational;
use rayon::prelude::*;

use crate::elimination::{genp, solve};
use crate::error::{Error, Result};
use crate::higham::{Family, HighamInstance};
use crate::numerics::{format_f64, rational_from_f64, Matrix, Scalar};
use crate::random::{derive_seed, NormalStream};

pub const CSV_HEADER: &str = "n,family,mode,seed,rel_error,growth,breakdown";
pub const DEFAULT_N_LIST: [usize; 8] = [10, 20, 30, 40, 50, 60, 70, 80];
/// Perturbations are `PERTURBATION_SCALE · n · B` with standard normal `B`.
pub const PERTURBATION_SCALE: f64 = 1e-8;

const X_STREAM: u64 = 1;
const B_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PerturbMode {
    None,
    FirstRow,
    FullMatrix,
}

impl PerturbMode {
    pub const ALL: [PerturbMode; 3] = [
        PerturbMode::None,
        PerturbMode::FirstRow,
        PerturbMode::FullMatrix,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PerturbMode::None => "none",
            PerturbMode::FirstRow => "first-row",
            PerturbMode::FullMatrix => "full-matrix",
        }
    }
}

impl fmt::Display for PerturbMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PerturbMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PerturbMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown perturbation mode {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub n_list: Vec<usize>,
    pub family: Family,
    pub trials: usize,
    pub base_seed: u64,
}

impl SolveConfig {
    pub fn new(family: Family) -> Self {
        SolveConfig {
            n_list: DEFAULT_N_LIST.to_vec(),
            family,
            trials: 11,
            base_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrialRecord {
    pub n: usize,
    pub family: Family,
    pub mode: PerturbMode,
    pub seed: u64,
    /// `‖x̂ - x‖₂ / ‖x‖₂`; absent on breakdown.
    pub rel_error: Option<f64>,
    pub growth: f64,
    pub breakdown: bool,
}

impl SolveTrialRecord {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.n,
            self.family,
            self.mode,
            self.seed,
            self.rel_error.map(format_f64).unwrap_or_default(),
            format_f64(self.growth),
            self.breakdown
        )
    }
}

pub fn write_records(out: &mut impl Write, records: &[SolveTrialRecord]) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_line())?;
    }
    Ok(())
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// One trial: exact `A`, normal `x`, exact `b = Ax` rounded once, then binary64
/// GENP on `A + 1e-8 n B` for each mode. `B` is drawn once per trial; the
/// first-row mode uses its first row.
fn run_trial(family: Family, n: usize, seed: u64) -> Result<Vec<SolveTrialRecord>> {
    let inst = HighamInstance::generate(family, n, seed)?;
    let x = NormalStream::with_stream(seed, X_STREAM).normals(n);
    let x_exact: Vec<BigRational> = x.iter().map(|&v| rational_from_f64(v)).collect();
    let b: Vec<f64> = inst
        .a
        .matvec(&x_exact)?
        .iter()
        .map(Scalar::to_f64)
        .collect();
    let a = inst.a.to_f64();
    let noise = NormalStream::with_stream(seed, B_STREAM).normals(n * n);
    let scale = PERTURBATION_SCALE * n as f64;
    let xnorm = norm2(&x);

    Ok(PerturbMode::ALL
        .into_iter()
        .map(|mode| {
            let a_mode = Matrix::from_fn(n, n, |r, c| {
                let hit = match mode {
                    PerturbMode::None => false,
                    PerturbMode::FirstRow => r == 0,
                    PerturbMode::FullMatrix => true,
                };
                if hit {
                    a[(r, c)] + scale * noise[r * n + c]
                } else {
                    a[(r, c)]
                }
            });
            let outcome = genp(&a_mode).and_then(|lu| {
                let xh = solve(&lu, &b)?;
                let diff: Vec<f64> = xh.iter().zip(&x).map(|(u, v)| u - v).collect();
                Ok((norm2(&diff) / xnorm, lu.growth_factor))
            });
            let (rel_error, growth, breakdown) = match outcome {
                Ok((e, g)) => (Some(e), g, false),
                Err(_) => (None, f64::NAN, true),
            };
            SolveTrialRecord {
                n,
                family,
                mode,
                seed,
                rel_error,
                growth,
                breakdown,
            }
        })
        .collect())
}

/// Runs every `(n, trial)` pair in parallel; records come back sorted by
/// `n`, trial index and mode.
pub fn solve_experiment(config: &SolveConfig) -> Result<Vec<SolveTrialRecord>> {
    let jobs: Vec<(usize, u64)> = config
        .n_list
        .iter()
        .flat_map(|&n| {
            (0..config.trials as u64)
                .map(move |t| (n, derive_seed(derive_seed(config.base_seed, n as u64), t)))
        })
        .collect();
    for &(n, _) in &jobs {
        if n < 2 {
            return Err(Error::InvalidDimension { got: n, min: 2 });
        }
    }
    let per_job: Vec<Vec<SolveTrialRecord>> = jobs
        .par_iter()
        .map(|&(n, seed)| run_trial(config.family, n, seed))
        .collect::<Result<_>>()?;
    Ok(per_job.into_iter().flatten().collect())
}
