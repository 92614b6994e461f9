use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use maxgrowth::bounds::{
    cond2_estimate, corollary4_report, corollary5_bound, corollary5_hypothesis,
};
use maxgrowth::elimination::{eliminate, Pivoting};
use maxgrowth::experiments::{
    gnuplot_script, heatmap_scan_in, solve_experiment, write_records, PerturbMode, SolveConfig,
    SolveTrialRecord,
};
use maxgrowth::io::{read_matrix_file, write_f64_matrix, write_rational_matrix};
use maxgrowth::numerics::{
    format_f64, format_rational, rational_from_f64, triangular_inverse_rational,
};
use maxgrowth::{
    canonicalize, genp, last_pivot_direct, leading_block_view, perturbed_pivot_general,
    perturbed_pivot_higham, validate, BigFloat, BigRational, Error, Family, HighamInstance,
    HighamPivotEvaluator, Matrix, PerturbationQuery, Precision, Regime, Scalar,
};

use crate::{
    Command, EpsArgs, InstanceArgs, MatrixFormat, RegimeArgs, RegimeKind, UsageError, OUT_DIR_ENV,
};

macro_rules! in_regime {
    ($regime:expr, $f:ident ( $($arg:expr),* )) => {
        match $regime.regime {
            RegimeKind::Exact => $f::<BigRational>($($arg,)* ()),
            RegimeKind::Binary64 => $f::<f64>($($arg,)* ()),
            RegimeKind::Bigfloat => $f::<BigFloat>($($arg,)* Precision::new($regime.bits)?),
        }
    };
}

pub fn dispatch(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Gen {
            instance,
            format,
            output,
        } => gen(&instance, format, output),
        Command::Factor {
            instance,
            no_pivoting,
            regime,
        } => {
            let a = match &instance.input {
                Some(path) => read_input(path)?,
                None => load_instance(&instance)?.a,
            };
            let pivoting = if no_pivoting {
                Pivoting::None
            } else {
                Pivoting::Partial
            };
            in_regime!(regime, factor_in(&a, pivoting))
        }
        Command::Perturb {
            instance,
            i,
            j,
            eps,
            regime,
        } => {
            let inst = load_instance(&instance)?;
            let eps = eps.value()?;
            println!("instance = {}", label(&inst));
            println!("query = ({i}, {j}), eps = {}", format_rational(&eps));
            in_regime!(regime, perturb_in(&inst, i, j, &eps))
        }
        Command::Heatmap {
            instance,
            eps,
            regime,
            output,
            gnuplot,
        } => heatmap(&instance, &eps, &regime, output, gnuplot),
        Command::SolveExp {
            family,
            n_list,
            trials,
            seed,
            output,
        } => solve_exp(family, n_list, trials, seed, output),
        Command::Verify {
            family,
            n_list,
            instances,
            eps_list,
            cond_max_n,
            input,
        } => verify(
            family,
            &n_list,
            instances,
            &eps_list,
            cond_max_n,
            input.as_deref(),
        ),
    }
}

fn read_input(path: &Path) -> Result<Matrix<BigRational>> {
    read_matrix_file(path).with_context(|| format!("reading {}", path.display()))
}

fn load_instance(args: &InstanceArgs) -> Result<HighamInstance> {
    if let Some(path) = &args.input {
        let (inst, canon) = canonicalize(&read_input(path)?)?;
        if !canon.is_identity() {
            println!("input was row-permuted or sign-flipped; using its canonical form");
        }
        return Ok(inst);
    }
    let n = args
        .n
        .ok_or_else(|| UsageError("--n is required without --input".into()))?;
    if args.family == Family::Custom {
        return Err(UsageError("family `custom` needs --input".into()).into());
    }
    let enforce = args.family.enforces_validity() && !args.no_enforce;
    Ok(HighamInstance::generate_with(
        args.family,
        n,
        args.seed,
        enforce,
    )?)
}

fn label(inst: &HighamInstance) -> String {
    match inst.seed {
        Some(seed) => format!("{} n={} seed={seed}", inst.family, inst.n),
        None => format!("{} n={}", inst.family, inst.n),
    }
}

fn stem(inst: &HighamInstance) -> String {
    match inst.seed {
        Some(seed) => format!("{}-n{}-s{seed}", inst.family, inst.n),
        None => format!("{}-n{}", inst.family, inst.n),
    }
}

fn output_path(explicit: Option<PathBuf>, default_name: String) -> Result<PathBuf> {
    if let Some(p) = explicit {
        return Ok(p);
    }
    let dir = std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir.join(default_name))
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn show<T: Scalar>(x: &T) -> String {
    match (T::regime(x.ctx()), x.to_rational()) {
        (Regime::ExactRational, Some(r)) => format_rational(&r),
        _ => format_f64(x.to_f64()),
    }
}

fn show_opt<T: Scalar>(x: &Option<T>) -> String {
    x.as_ref().map_or_else(|| "none".into(), show)
}

fn gen(args: &InstanceArgs, format: MatrixFormat, output: Option<PathBuf>) -> Result<bool> {
    let inst = load_instance(args)?;
    let path = output_path(output, format!("{}.txt", stem(&inst)))?;
    let mut out = create(&path)?;
    match format {
        MatrixFormat::Rational => write_rational_matrix(&mut out, &inst.a)?,
        MatrixFormat::Binary64 => write_f64_matrix(&mut out, &inst.a.to_f64())?,
    }
    out.flush()?;

    let report = validate(&inst);
    println!("wrote {}", path.display());
    println!("instance = {}", label(&inst));
    println!("strictly valid = {}", report.strictly_valid);
    println!("max |L̂Û| = {}", format_rational(&report.lhat_uhat_max));
    println!("max |1ᵀÛ| = {}", format_rational(&report.ones_uhat_max));
    println!("max |A| = {}", format_rational(&report.a_max));
    println!("GENP last pivot = {}", show_opt(&report.genp_last_pivot));
    println!("GEPP growth = {}", show_opt(&report.gepp_growth));
    println!(
        "GEPP row exchanges = {}",
        report
            .gepp_swaps
            .map_or_else(|| "none".into(), |s| s.to_string())
    );
    let passed = report.passed();
    println!("validation = {}", if passed { "passed" } else { "FAILED" });
    Ok(passed)
}

fn factor_in<T: Scalar>(a: &Matrix<BigRational>, pivoting: Pivoting, ctx: T::Ctx) -> Result<bool> {
    let lu = eliminate(&a.convert::<T>(ctx), pivoting)?;
    println!("n = {}", lu.n());
    println!("regime = {}", T::regime(ctx));
    println!(
        "pivoting = {}",
        if pivoting == Pivoting::None {
            "none"
        } else {
            "partial"
        }
    );
    println!("pivots:");
    for (k, p) in lu.pivots.iter().enumerate() {
        println!("  {:>4}  {}", k + 1, show(p));
    }
    println!("growth factor = {}", show(&lu.growth_factor));
    println!("row exchanges = {}", lu.swaps);
    Ok(true)
}

fn perturb_in<T: Scalar>(
    inst: &HighamInstance,
    i: usize,
    j: usize,
    eps: &BigRational,
    ctx: T::Ctx,
) -> Result<bool> {
    let q = PerturbationQuery::new(i, j, T::from_rational(eps, ctx));
    q.check(inst.n)?;
    let uinv = triangular_inverse_rational(&inst.uhat)?.convert::<T>(ctx);
    let special = perturbed_pivot_higham(inst, &uinv, &q)?;
    let a = inst.a.convert::<T>(ctx);
    let general = perturbed_pivot_general(&leading_block_view(&genp(&a)?)?, &q)?;
    let oracle = match last_pivot_direct(&a, &q) {
        Ok(p) => Ok(Some(p)),
        Err(Error::PivotBreakdown(k)) if k + 1 >= inst.n => Ok(None),
        Err(Error::PivotBreakdown(k)) => Err(k),
        Err(e) => return Err(e.into()),
    };

    println!("regime = {}", T::regime(ctx));
    match &special.value {
        Some(p) => {
            println!("p = {}", show(p));
            println!("log10|p| = {}", format_f64(p.log10_abs()));
        }
        None => println!("p = none (perturbed factorization does not exist)"),
    }
    println!("method = {}", special.method);
    println!("flagged = {}", special.flagged);
    println!("general = {}", show_opt(&general.value));
    let exact = T::regime(ctx) == Regime::ExactRational;
    let agree = match &oracle {
        Ok(o) => {
            println!("oracle = {}", show_opt(o));
            if exact {
                let same = *o == special.value && general.value == special.value;
                println!("oracle agreement = {}", if same { "yes" } else { "NO" });
                same
            } else {
                if let (Some(o), Some(p)) = (o, &special.value) {
                    let rel = (p.to_f64() - o.to_f64()).abs() / o.to_f64().abs();
                    println!("oracle relative difference = {}", format_f64(rel));
                }
                true
            }
        }
        Err(k) => {
            println!("oracle = elimination breaks down at pivot {k}; agreement undetermined");
            true
        }
    };
    Ok(agree)
}

fn heatmap(
    args: &InstanceArgs,
    eps: &EpsArgs,
    regime: &RegimeArgs,
    output: Option<PathBuf>,
    gnuplot: Option<PathBuf>,
) -> Result<bool> {
    let inst = load_instance(args)?;
    let eps = eps.value()?;
    let grid = match regime.regime {
        RegimeKind::Exact => heatmap_scan_in::<BigRational>(&inst, &eps, ())?,
        RegimeKind::Binary64 => heatmap_scan_in::<f64>(&inst, &eps, ())?,
        RegimeKind::Bigfloat => {
            heatmap_scan_in::<BigFloat>(&inst, &eps, Precision::new(regime.bits)?)?
        }
    };
    let path = output_path(output, format!("heatmap-{}.dat", stem(&inst)))?;
    grid.write_file(&path)?;
    println!("wrote {}", path.display());
    let n = inst.n;
    if n >= 2 {
        println!("({}, {}) = {}", 1, n - 1, format_f64(grid.get(1, n - 1)));
    }
    println!("({n}, {n}) = {}", format_f64(grid.get(n, n)));
    let nonexistent = grid.values.iter().filter(|v| v.is_nan()).count();
    println!("nonexistent entries = {nonexistent}");

    if let Some(script) = gnuplot {
        let png = path.with_extension("png");
        let text = gnuplot_script(
            &[(path.display().to_string(), label(&inst))],
            &png.display().to_string(),
        );
        fs::write(&script, text).with_context(|| format!("writing {}", script.display()))?;
        println!("wrote {}", script.display());
    }
    Ok(true)
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn solve_exp(
    family: Family,
    n_list: Vec<usize>,
    trials: usize,
    seed: u64,
    output: Option<PathBuf>,
) -> Result<bool> {
    if trials == 0 {
        return Err(UsageError("--trials must be positive".into()).into());
    }
    let config = SolveConfig {
        n_list,
        family,
        trials,
        base_seed: seed,
    };
    let records = solve_experiment(&config)?;
    let path = output_path(output, format!("solve-{family}.csv"))?;
    let mut out = create(&path)?;
    write_records(&mut out, &records)?;
    out.flush()?;
    println!("wrote {} ({} records)", path.display(), records.len());
    println!(
        "{:>4}  {:<12} {:>22}  {:>10}",
        "n", "mode", "median log10 rel error", "breakdowns"
    );
    for &n in &config.n_list {
        for mode in PerturbMode::ALL {
            let rows: Vec<&SolveTrialRecord> = records
                .iter()
                .filter(|r| r.n == n && r.mode == mode)
                .collect();
            let errs = rows
                .iter()
                .filter_map(|r| r.rel_error)
                .map(f64::log10)
                .collect();
            let broken = rows.iter().filter(|r| r.breakdown).count();
            println!(
                "{n:>4}  {:<12} {:>22.3}  {broken:>10}",
                mode.name(),
                median(errs)
            );
        }
    }
    Ok(true)
}

struct Row {
    suite: &'static str,
    n: usize,
    eps: f64,
    cases: usize,
    gated: usize,
    passed: usize,
}

impl Row {
    fn ok(&self) -> bool {
        self.passed == self.gated
    }
}

fn cond_of(inst: &HighamInstance) -> Result<f64> {
    match cond2_estimate(&inst.a.to_f64()) {
        Ok(c) => Ok(c.cond),
        Err(Error::NoConvergence { estimate, .. }) => Ok(estimate),
        Err(e) => Err(e.into()),
    }
}

fn verify_group(
    instances: &[HighamInstance],
    n: usize,
    eps_list: &[f64],
    with_cond: bool,
    rows: &mut Vec<Row>,
) -> Result<()> {
    let cond_set = if with_cond { instances } else { &[] };
    let evaluators: Vec<HighamPivotEvaluator<BigRational>> = cond_set
        .iter()
        .map(|inst| HighamPivotEvaluator::from_instance(inst, ()))
        .collect::<maxgrowth::Result<_>>()?;
    let conds: Vec<f64> = cond_set.iter().map(cond_of).collect::<Result<_>>()?;
    for &e in eps_list {
        let eps = rational_from_f64(e);
        let mut top = Row {
            suite: "top-right",
            n,
            eps: e,
            cases: 0,
            gated: 0,
            passed: 0,
        };
        if n >= 3 && corollary5_hypothesis(n, &eps) {
            for inst in instances {
                top.cases += 1;
                top.gated += 1;
                top.passed += usize::from(corollary5_bound(inst, &eps)?.satisfied);
            }
        }
        rows.push(top);
        if !with_cond {
            continue;
        }

        let mut cond = Row {
            suite: "cond",
            n,
            eps: e,
            cases: 0,
            gated: 0,
            passed: 0,
        };
        for (ev, &c) in evaluators.iter().zip(&conds) {
            for i in 1..=n {
                for j in 1..=n {
                    cond.cases += 1;
                    let p = ev.evaluate_unchecked(i, j, &eps).value;
                    let report = corollary4_report(n, &eps, p.as_ref(), c);
                    if report.hypothesis_met {
                        cond.gated += 1;
                        cond.passed += usize::from(report.satisfied);
                    }
                }
            }
        }
        rows.push(cond);
    }
    Ok(())
}

fn verify(
    family: Family,
    n_list: &[usize],
    count: u64,
    eps_list: &[f64],
    cond_max_n: usize,
    input: Option<&Path>,
) -> Result<bool> {
    if eps_list.iter().any(|e| !e.is_finite()) {
        return Err(UsageError("--eps-list entries must be finite".into()).into());
    }
    let mut rows = Vec::new();
    if let Some(path) = input {
        let (inst, _) = canonicalize(&read_input(path)?)?;
        verify_group(
            std::slice::from_ref(&inst),
            inst.n,
            eps_list,
            true,
            &mut rows,
        )?;
    } else {
        for &n in n_list {
            let instances: Vec<HighamInstance> = (0..count)
                .map(|seed| HighamInstance::generate(family, n, seed))
                .collect::<maxgrowth::Result<_>>()?;
            verify_group(&instances, n, eps_list, n <= cond_max_n, &mut rows)?;
        }
    }

    println!(
        "{:<10} {:>4} {:>8} {:>8} {:>8} {:>8}  status",
        "suite", "n", "eps", "cases", "gated", "passed"
    );
    for r in &rows {
        let status = match (r.gated, r.ok()) {
            (0, _) => "skipped",
            (_, true) => "pass",
            (_, false) => "FAIL",
        };
        println!(
            "{:<10} {:>4} {:>8} {:>8} {:>8} {:>8}  {status}",
            r.suite,
            r.n,
            format_f64(r.eps),
            r.cases,
            r.gated,
            r.passed
        );
    }
    let all = rows.iter().all(Row::ok);
    println!("overall = {}", if all { "pass" } else { "FAIL" });
    Ok(all)
}
