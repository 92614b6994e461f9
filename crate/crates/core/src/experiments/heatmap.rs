use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use num_rational::BigRational;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::higham::{Family, HighamInstance};
use crate::numerics::{format_f64, Scalar};
use crate::pivots::HighamPivotEvaluator;

/// `log10 |p(i,j)|` over every entry, row-major.
///
/// `-inf` marks a zero pivot and `nan` a perturbation for which the
/// factorization does not exist.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapGrid {
    pub n: usize,
    pub epsilon: f64,
    pub family: Family,
    pub seed: Option<u64>,
    pub values: Vec<f64>,
}

impl HeatmapGrid {
    /// Value at 1-based `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i - 1) * self.n + (j - 1)]
    }

    pub fn header(&self) -> String {
        format!(
            "# heatmap n={} eps={} family={} seed={}",
            self.n,
            format_f64(self.epsilon),
            self.family,
            self.seed.unwrap_or(0)
        )
    }

    pub fn write(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "{}", self.header())?;
        for row in self.values.chunks(self.n) {
            let line: Vec<String> = row.iter().map(|&v| format_f64(v)).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write(&mut f)?;
        f.flush()?;
        Ok(())
    }

    /// Parses the format produced by [`HeatmapGrid::write`].
    pub fn read(input: impl BufRead) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty heatmap file".into()))??;
        let body = header
            .strip_prefix("# heatmap ")
            .ok_or_else(|| Error::Parse(format!("bad heatmap header {header:?}")))?;
        let field = |key: &str| {
            body.split_whitespace()
                .find_map(|kv| kv.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
                .ok_or_else(|| Error::Parse(format!("missing {key} in heatmap header")))
        };
        let bad = |what: &str| Error::Parse(format!("bad {what} in heatmap header"));
        let n: usize = field("n")?.parse().map_err(|_| bad("n"))?;
        let epsilon: f64 = field("eps")?.parse().map_err(|_| bad("eps"))?;
        let family: Family = field("family")?.parse()?;
        let seed: u64 = field("seed")?.parse().map_err(|_| bad("seed"))?;
        let mut values = Vec::with_capacity(n * n);
        for line in lines {
            let line = line?;
            for tok in line.split_whitespace() {
                values.push(
                    tok.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad grid value {tok:?}")))?,
                );
            }
        }
        if values.len() != n * n {
            return Err(Error::Parse(format!(
                "expected {} grid values, got {}",
                n * n,
                values.len()
            )));
        }
        Ok(HeatmapGrid {
            n,
            epsilon,
            family,
            seed: (family != Family::Wilkinson).then_some(seed),
            values,
        })
    }
}

/// The grid in exact rational arithmetic.
pub fn heatmap_scan(inst: &HighamInstance, epsilon: &BigRational) -> Result<HeatmapGrid> {
    heatmap_scan_in::<BigRational>(inst, epsilon, ())
}

/// The grid with `Û⁻¹` and every pivot evaluated in regime `T`.
///
/// `Û⁻¹` is computed once exactly and then converted, so the only rounding is
/// in the per-entry formula evaluation.
pub fn heatmap_scan_in<T: Scalar>(
    inst: &HighamInstance,
    epsilon: &BigRational,
    ctx: T::Ctx,
) -> Result<HeatmapGrid> {
    let n = inst.n;
    let ev = HighamPivotEvaluator::<T>::from_instance(inst, ctx)?;
    let eps = T::from_rational(epsilon, ctx);
    let values: Vec<f64> = (1..=n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let ev = &ev;
            let eps = &eps;
            (1..=n).map(move |j| match ev.evaluate_unchecked(i, j, eps).value {
                Some(p) => p.log10_abs(),
                None => f64::NAN,
            })
        })
        .collect();
    Ok(HeatmapGrid {
        n,
        epsilon: Scalar::to_f64(epsilon),
        family: inst.family,
        seed: inst.seed,
        values,
    })
}

/// A gnuplot script drawing one heatmap per data file into a PNG.
pub fn gnuplot_script(panels: &[(String, String)], output: &str) -> String {
    let mut s = String::new();
    let cols = panels.len().max(1);
    let _ = writeln!(s, "set terminal pngcairo size {},420", 460 * cols);
    let _ = writeln!(s, "set output '{output}'");
    let _ = writeln!(s, "set multiplot layout 1,{cols}");
    let _ = writeln!(s, "set view map");
    let _ = writeln!(s, "set yrange [*:*] reverse");
    let _ = writeln!(s, "set cblabel 'log10 |p|'");
    let _ = writeln!(s, "unset key");
    for (path, title) in panels {
        let _ = writeln!(s, "set title '{title}'");
        let _ = writeln!(s, "plot '{path}' matrix using ($1+1):($2+1):3 with image");
    }
    let _ = writeln!(s, "unset multiplot");
    s
}
