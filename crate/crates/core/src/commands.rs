//! The CLI subcommands as library functions. Each writes its JSON report (and
//! optional CSV/FHST files) into the output directory and returns a status the
//! binary maps to an exit code.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::checks::{self, CheckOutcome};

use crate::config::{RunConfig, SolveMode};
use crate::energy::energy;
use crate::error::{Error, Result};
use crate::extension::{conormal_derivative, cylinder_energy, dyadic_heights, extend};
use crate::hypotheses::{check_hypotheses, hypothesis_spectrum, Applicable, HypothesisReport};
use crate::io::{write_csv, write_grid_csv, write_json, FhstFile};
use crate::operator::{apply_operator, hs_norm, Sobolev};
use crate::solver::{
    default_initial, solve_direct_min_restarts, solve_multiplicity, solve_newton, verify_solution,
    Problem, SeedOutcome, SolutionRecord,
};
use crate::spectrum::{enumerate_spectrum, enumerate_spectrum_below, is_resonant};
use crate::torus::{analyze, synthesize, FourierField};

macro_rules! say {
    ($ctx:expr, $($arg:tt)*) => {
        if $ctx.verbose {
            println!($($arg)*);
        }
    };
}

/// Settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: RunConfig,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub emit_csv: bool,
    pub strict: bool,
    /// Print a human-readable summary to stdout.
    pub verbose: bool,
}

impl Context {
    /// `--output-dir` wins over the config, which wins over `./fracperiod-out`.
    pub fn new(
        config: RunConfig,
        output_dir: Option<PathBuf>,
        seed: u64,
        emit_csv: bool,
        strict: bool,
    ) -> Self {
        let output_dir = output_dir
            .or_else(|| config.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("fracperiod-out"));
        Context {
            config,
            output_dir,
            seed,
            emit_csv,
            strict,
            verbose: true,
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }

    fn prepare(&self) -> Result<()> {
        std::fs::create_dir_all(&self.output_dir)?;
        Ok(())
    }
}

/// How a command ended when it did not hit an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Ok,
    HypothesisViolation(String),
    NonConvergence(String),
    VerificationFailure(String),
}

impl Status {
    pub fn exit_code(&self, strict: bool) -> i32 {
        match self {
            Status::Ok => 0,
            Status::HypothesisViolation(_) if strict => 3,
            Status::NonConvergence(_) if strict => 4,
            Status::VerificationFailure(_) => 5,
            _ => 0,
        }
    }
}

/// Exit code for errors: 2 for configuration problems, 1 otherwise.
pub fn error_exit_code(err: &Error) -> i32 {
    match err {
        Error::Parameter(_)
        | Error::Shape { .. }
        | Error::Uncertified { .. }
        | Error::Format(_) => 2,
        _ => 1,
    }
}

pub fn cmd_spectrum(ctx: &Context) -> Result<Status> {
    ctx.prepare()?;
    let problem = ctx.config.problem()?;
    let (cfg, lat) = (&problem.cfg, &problem.lattice);
    let table = enumerate_spectrum(cfg, lat, ctx.config.spectrum.count)?;
    let mut warnings = Vec::new();
    let resonance = match enumerate_spectrum_below(cfg, lat, cfg.lambda_inf()) {
        Ok(wide) => {
            let r = is_resonant(
                cfg.lambda_inf(),
                &wide,
                1e-12 * cfg.lambda_inf().abs().max(1.0),
            )?;
            if r.resonant {
                warnings.push(format!(
                    "resonance: λ∞ = {} coincides with the eigenvalue of ranks {}..{}",
                    cfg.lambda_inf(),
                    r.nearest_ranks.0,
                    r.nearest_ranks.1
                ));
            }
            Some(r)
        }
        Err(e) => {
            warnings.push(format!("resonance not decided: {e}"));
            None
        }
    };
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let report = json!({
        "command": "spectrum",
        "torus": ctx.config.torus,
        "omega": cfg.omega(),
        "kappa": cfg.kappa(),
        "critical_exponent": cfg.critical_exponent(),
        "spectrum": table.to_json(),
        "resonance": resonance,
        "warnings": warnings,
    });
    write_json(&ctx.path("spectrum.json"), &report)?;
    if ctx.emit_csv {
        let header = ["rank_first", "rank_last", "lambda", "mu", "multiplicity"].map(String::from);
        let rows = table.entries.iter().map(|e| {
            vec![
                e.index_range.0 as f64,
                e.index_range.1 as f64,
                e.lambda,
                e.mu,
                e.multiplicity as f64,
            ]
        });
        write_csv(&ctx.path("spectrum.csv"), &header, rows)?;
    }
    for e in &table.entries {
        say!(
            ctx,
            "λ = {:.15} ×{} (ranks {}..{})",
            e.lambda,
            e.multiplicity,
            e.index_range.0,
            e.index_range.1
        );
    }
    Ok(Status::Ok)
}

fn hypotheses(problem: &Problem) -> Result<(crate::spectrum::SpectrumTable, HypothesisReport)> {
    let table = hypothesis_spectrum(&problem.cfg, &problem.lattice, &problem.nl)?;
    let report = check_hypotheses(&problem.nl, &problem.cfg, &table)?;
    Ok((table, report))
}

pub fn cmd_check(ctx: &Context) -> Result<Status> {
    ctx.prepare()?;
    let problem = ctx.config.problem()?;
    let (_, report) = hypotheses(&problem)?;
    write_json(&ctx.path("check.json"), &report)?;
    say!(ctx, "applies: {:?}", report.applies);
    if let (Some(h), Some(k)) = (report.gap.h, report.gap.k) {
        say!(
            ctx,
            "gap condition: {} (h = {h}, k = {k})",
            report.gap.holds
        );
    }
    for n in &report.notes {
        say!(ctx, "note: {n}");
    }
    if report.applies == Applicable::None {
        return Ok(Status::HypothesisViolation(report.notes.join("; ")));
    }
    Ok(Status::Ok)
}

#[derive(Debug, Serialize)]
struct SolutionEntry {
    index: usize,
    file: String,
    init_tag: String,
    paired: bool,
    mean: f64,
    residual: f64,
    refined_residual: f64,
    max_mode_residual: f64,
    energy: f64,
    l2_norm: f64,
    hs_norm: f64,
    morse_index: Option<usize>,
    negative_eigenvalues: Option<Vec<f64>>,
    iterations: usize,
    residual_history: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'static str,
    seed: u64,
    config: &'a RunConfig,
    hypotheses: &'a HypothesisReport,
    mode: SolveMode,
    lower_bound: Option<usize>,
    pairs: usize,
    solutions: Vec<SolutionEntry>,
    seeds: Vec<SeedOutcome>,
    failures: Vec<String>,
}

fn initial_field(ctx: &Context, problem: &Problem) -> Result<FourierField> {
    match &ctx.config.solve.initial_field {
        Some(path) => analyze(&FhstFile::load(path)?.grid()?, &problem.lattice),
        None => Ok(FourierField::constant(
            &problem.lattice,
            ctx.config.solve.initial_constant,
        )),
    }
}

pub fn cmd_solve(ctx: &Context) -> Result<Status> {
    ctx.prepare()?;
    let problem = ctx.config.problem()?;
    let mut opts = ctx.config.solver.clone();
    opts.seed = ctx.seed;
    let (table, report) = hypotheses(&problem)?;
    if ctx.strict && report.applies == Applicable::None {
        write_json(&ctx.path("check.json"), &report)?;
        return Ok(Status::HypothesisViolation(report.notes.join("; ")));
    }
    let mode = match ctx.config.solve.mode {
        SolveMode::Auto => match report.applies {
            Applicable::DirectMinimization => SolveMode::Direct,
            Applicable::Multiplicity => SolveMode::Multiplicity,
            _ => SolveMode::Newton,
        },
        m => m,
    };
    let mut records: Vec<SolutionRecord> = Vec::new();
    let mut seeds = Vec::new();
    let mut failures = Vec::new();
    let mut lower_bound = None;
    let mut pairs = 0;
    match mode {
        SolveMode::Multiplicity => {
            let sweep = solve_multiplicity(&problem, &opts, &report, &table)?;
            lower_bound = Some(sweep.lower_bound);
            pairs = sweep.pairs.len();
            records = sweep.solutions(&problem)?;
            seeds = sweep.seeds;
        }
        SolveMode::Direct => {
            let runs = solve_direct_min_restarts(&problem, &opts)?;
            records.push(runs.into_iter().next().expect("at least one restart"));
        }
        SolveMode::Newton => match solve_newton(&problem, &opts, &initial_field(ctx, &problem)?) {
            Ok(rec) => records.push(rec),
            Err(
                e @ (Error::NonConvergence { .. }
                | Error::LineSearch { .. }
                | Error::NotApplicable(_)),
            ) => failures.push(e.to_string()),
            Err(e) => return Err(e),
        },
        SolveMode::Auto => unreachable!(),
    }
    if mode == SolveMode::Direct && records.is_empty() {
        failures.push("descent produced no record".into());
    }
    let mut entries = Vec::new();
    let mut all_verified = true;
    for (i, rec) in records.iter().enumerate() {
        let check = verify_solution(&rec.field, &problem, opts.tolerance)?;
        all_verified &= check.ok;
        let grid = synthesize(&rec.field);
        let file = format!("solution_{i:03}.fhst");
        FhstFile::from_grid(&grid, &problem.cfg).save(&ctx.path(&file))?;
        if ctx.emit_csv {
            write_grid_csv(
                &ctx.path(&format!("solution_{i:03}.csv")),
                &grid,
                problem.cfg.period(),
            )?;
        }
        let vol_sqrt = problem.cfg.period().powf(problem.cfg.dim() as f64 / 2.0);
        entries.push(SolutionEntry {
            index: i,
            file,
            init_tag: rec.init_tag.clone(),
            paired: rec.paired,
            mean: rec.field.coeffs()[problem.lattice.zero_index()].re / vol_sqrt,
            residual: rec.residual,
            refined_residual: check.refined_residual,
            max_mode_residual: check.max_mode_residual,
            energy: rec.energy,
            l2_norm: rec.l2_norm,
            hs_norm: rec.hs_norm,
            morse_index: rec.morse.as_ref().map(|m| m.index),
            negative_eigenvalues: rec.morse.as_ref().map(|m| m.negative.clone()),
            iterations: rec.iterations,
            residual_history: rec.residual_history.clone(),
        });
        say!(
            ctx,
            "solution {i}: mean {:+.12} energy {:.12} residual {:.3e} ({})",
            entries[i].mean,
            rec.energy,
            rec.residual,
            rec.init_tag
        );
    }
    let manifest = Manifest {
        command: "solve",
        seed: ctx.seed,
        config: &ctx.config,
        hypotheses: &report,
        mode,
        lower_bound,
        pairs,
        solutions: entries,
        seeds,
        failures: failures.clone(),
    };
    write_json(&ctx.path("manifest.json"), &manifest)?;
    if let Some(b) = lower_bound {
        say!(ctx, "distinct pairs: {pairs} (guaranteed: {b})");
    }
    if !all_verified {
        return Ok(Status::VerificationFailure(
            "a solution failed the refined residual check".into(),
        ));
    }
    if records.is_empty() {
        return Ok(Status::NonConvergence(failures.join("; ")));
    }
    if report.applies == Applicable::None {
        return Ok(Status::HypothesisViolation(report.notes.join("; ")));
    }
    Ok(Status::Ok)
}

pub fn cmd_extend(ctx: &Context) -> Result<Status> {
    ctx.prepare()?;
    let problem = ctx.config.problem()?;
    let cfg = &problem.cfg;
    let section = &ctx.config.extend;
    if section.heights.is_empty()
        || section
            .heights
            .iter()
            .any(|y| !(*y >= 0.0 && y.is_finite()))
    {
        return Err(Error::Parameter(
            "extend.heights must be non-negative and finite".into(),
        ));
    }
    let u = match &section.field {
        Some(path) => analyze(&FhstFile::load(path)?.grid()?, &problem.lattice)?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            checks::random_field(&problem.lattice, &mut rng, 2.0, 1.0)
        }
    };
    let v = extend(&u, cfg)?;
    let slices = v.sample(&section.heights);
    FhstFile::from_slices(&slices, &section.heights, cfg)?.save(&ctx.path("cylinder.fhst"))?;
    let energy_x = cylinder_energy(&v, cfg)?;
    let hs = hs_norm(&u, cfg, Sobolev::Positive)?;
    let target = apply_operator(&u, cfg)?.scaled(cfg.kappa());
    let conormal = conormal_derivative(&v, cfg, &dyadic_heights(20))?;
    let conormal_rel = conormal.sub(&target).norm_sq().sqrt() / target.norm_sq().sqrt();
    let report = json!({
        "command": "extend",
        "seed": ctx.seed,
        "heights": section.heights,
        "kappa": cfg.kappa(),
        "cylinder_energy": energy_x,
        "trace_energy": cfg.kappa() * hs * hs,
        "energy_ratio": energy_x / (cfg.kappa() * hs * hs),
        "conormal_relative_error": conormal_rel,
        "file": "cylinder.fhst",
    });
    write_json(&ctx.path("extend.json"), &report)?;
    if ctx.emit_csv {
        let dim = cfg.dim();
        let mut header = vec!["y".to_string()];
        header.extend((1..=dim).map(|i| format!("x{i}")));
        header.push("v".into());
        let mut rows = Vec::new();
        for (y, s) in section.heights.iter().zip(&slices) {
            for (j, &val) in s.values.iter().enumerate() {
                let mut x = vec![0.0; dim];
                crate::torus::grid_point(j, &s.sizes, cfg.period(), &mut x);
                let mut row = vec![*y];
                row.extend(x);
                row.push(val);
                rows.push(row);
            }
        }
        write_csv(&ctx.path("cylinder.csv"), &header, rows)?;
    }
    say!(
        ctx,
        "energy ratio {:.15}, conormal relative error {:.3e}",
        energy_x / (cfg.kappa() * hs * hs),
        conormal_rel
    );
    Ok(Status::Ok)
}

/// Runs the invariant suite on the configured problem.
pub fn verification_suite(config: &RunConfig, seed: u64) -> Result<Vec<CheckOutcome>> {
    let problem = config.problem()?;
    let (cfg, lat, nl) = (&problem.cfg, &problem.lattice, &problem.nl);
    let trials = config.verify.trials.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let (roundtrip, parseval) = checks::transform_defects(lat, trials, &mut rng)?;
    out.push(CheckOutcome::at_most(
        "analyze∘synthesize identity",
        roundtrip,
        1e-12,
    ));
    out.push(CheckOutcome::at_most(
        "Parseval relative defect",
        parseval,
        1e-10,
    ));

    let certified = checks::brute_force_spectrum(cfg, lat);
    let count = certified.len().min(config.spectrum.count);
    let table = enumerate_spectrum(cfg, lat, count)?;
    let expanded = table.expanded();
    let spectrum_diff = expanded
        .iter()
        .zip(&certified)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    out.push(CheckOutcome::at_most(
        "spectrum vs brute-force sort",
        spectrum_diff,
        0.0,
    ));
    out.push(CheckOutcome::at_most(
        "λ₁ = m^{2s}, simple",
        if table.entries[0].multiplicity == 1 {
            (table.entries[0].lambda - cfg.mass().powf(2.0 * cfg.order())).abs()
        } else {
            f64::INFINITY
        },
        1e-15,
    ));

    let oracle = checks::operator_oracle_error(cfg, 5, trials, &mut rng)?;
    out.push(CheckOutcome::at_most(
        "operator vs dense DFT (5 points/dim)",
        oracle,
        1e-12,
    ));

    let ext = checks::extension_identity_check(lat, cfg, trials.min(5), &mut rng)?;
    out.push(CheckOutcome::at_most(
        "extension energy identity",
        ext.energy_ratio_err,
        1e-6,
    ));
    out.push(CheckOutcome::at_most(
        "conormal limit",
        ext.conormal_rel,
        1e-5,
    ));

    let gap = checks::trace_gap_check(lat, cfg, trials.min(5), &mut rng)?;
    out.push(CheckOutcome::at_least(
        "trace inequality gap (perturbed)",
        gap.min_gap,
        f64::MIN_POSITIVE,
    ));
    out.push(CheckOutcome::at_most(
        "trace inequality gap (unperturbed)",
        gap.zero_gap,
        1e-6,
    ));

    let fd = checks::finite_difference_check(lat, nl, cfg, trials, 1e-5, &mut rng)?;
    out.push(CheckOutcome::at_most(
        "gradient finite differences",
        fd.gradient_rel,
        1e-6,
    ));
    out.push(CheckOutcome::at_most(
        "Hessian finite differences",
        fd.hessian_rel,
        1e-6,
    ));

    if nl.is_odd() {
        let even = checks::evenness_defect(lat, nl, cfg, trials, &mut rng)?;
        out.push(CheckOutcome::at_most("energy evenness", even, 0.0));
    }

    // eigenspace boundaries: h must close a multiplicity block
    let bounds_table = enumerate_spectrum(cfg, lat, count)?;
    for entry in bounds_table.entries.iter().take(3) {
        let h = entry.index_range.1;
        if bounds_table.total() > h {
            let nb = checks::norm_bounds_check(lat, cfg, &bounds_table, h, trials, &mut rng)?;
            out.push(CheckOutcome::at_least(
                format!("norm sandwich on V_{h}"),
                nb.sandwich_slack,
                -1e-10,
            ));
            out.push(CheckOutcome::at_least(
                format!("complement bound on V_{h}⊥"),
                nb.complement_slack,
                -1e-10,
            ));
        }
    }

    let (_, report) = hypotheses(&problem)?;
    let mut opts = config.solver.clone();
    opts.seed = seed;
    opts.morse = false;
    let solved = match report.applies {
        Applicable::DirectMinimization => {
            let init = default_initial(&problem, seed);
            Some(crate::solver::solve_direct_min(&problem, &opts, &init))
        }
        Applicable::Existence | Applicable::Multiplicity => Some(solve_newton(
            &problem,
            &opts,
            &FourierField::constant(lat, config.solve.initial_constant),
        )),
        Applicable::None => None,
    };
    if let Some(result) = solved {
        let residual = match result {
            Ok(rec) => verify_solution(&rec.field, &problem, opts.tolerance)?.refined_residual,
            Err(_) => f64::INFINITY,
        };
        out.push(CheckOutcome::at_most(
            "solver residual at 2× resolution",
            residual,
            10.0 * opts.tolerance,
        ));
        let zero = energy(&FourierField::zeros(lat), nl, cfg)?;
        out.push(CheckOutcome::at_most(
            "energy of zero field",
            zero.abs(),
            0.0,
        ));
    }
    Ok(out)
}

pub fn cmd_verify(ctx: &Context) -> Result<Status> {
    ctx.prepare()?;
    let outcomes = verification_suite(&ctx.config, ctx.seed)?;
    let failed: Vec<&str> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.name.as_str())
        .collect();
    for o in &outcomes {
        say!(
            ctx,
            "{} {:<40} {:.3e} {} {:.1e}",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.value,
            if o.bound == "max" { "≤" } else { "≥" },
            o.tolerance
        );
    }
    write_json(
        &ctx.path("verify.json"),
        &json!({
            "command": "verify",
            "seed": ctx.seed,
            "passed": failed.is_empty(),
            "checks": outcomes,
        }),
    )?;
    if failed.is_empty() {
        Ok(Status::Ok)
    } else {
        Ok(Status::VerificationFailure(failed.join(", ")))
    }
}

pub fn cmd_gradcheck(ctx: &Context) -> Result<Status> {
    ctx.prepare()?;
    let problem = ctx.config.problem()?;
    let g = &ctx.config.gradcheck;
    if !(g.step > 0.0) || g.trials == 0 {
        return Err(Error::Parameter(
            "gradcheck needs a positive step and trial count".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let fd = checks::finite_difference_check(
        &problem.lattice,
        &problem.nl,
        &problem.cfg,
        g.trials,
        g.step,
        &mut rng,
    )?;
    let worst = fd.gradient_rel.max(fd.hessian_rel);
    say!(
        ctx,
        "max relative error: gradient {:.3e}, hessian {:.3e} over {} trials (step {:.1e})",
        fd.gradient_rel,
        fd.hessian_rel,
        fd.trials,
        fd.step
    );
    write_json(
        &ctx.path("gradcheck.json"),
        &json!({
            "command": "gradcheck",
            "seed": ctx.seed,
            "report": fd,
            "tolerance": g.tolerance,
            "passed": worst <= g.tolerance,
        }),
    )?;
    if worst <= g.tolerance {
        Ok(Status::Ok)
    } else {
        Ok(Status::VerificationFailure(format!(
            "finite-difference error {worst:.3e}"
        )))
    }
}

/// Loads the config file, or the defaults when no path is given.
pub fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}
