use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypotheses::{Applicable, HypothesisReport};
use crate::spectrum::{real_basis, RealKind, SpectrumTable};
use crate::torus::FourierField;

use super::newton::{newton, Deflation};
use super::{estimate_morse, verify_solution, Problem, SolutionRecord, SolverOptions};

/// What happened to one seed of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedOutcome {
    pub tag: String,
    pub converged: bool,
    /// Converged to a new, verified, non-trivial solution.
    pub accepted: bool,
    pub iterations: usize,
    pub residual: f64,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct MultiplicityReport {
    pub h: usize,
    pub k: usize,
    /// `k − h + 1`, the guaranteed number of pairs.
    pub lower_bound: usize,
    pub deflation: bool,
    /// One representative per pair, in discovery order.
    pub pairs: Vec<SolutionRecord>,
    pub seeds: Vec<SeedOutcome>,
}

impl MultiplicityReport {
    /// The solution set closed under `u → −u`.
    pub fn solutions(&self, problem: &Problem) -> Result<Vec<SolutionRecord>> {
        let mut out = Vec::with_capacity(2 * self.pairs.len());
        for p in &self.pairs {
            out.push(p.clone());
            out.push(p.negated(problem)?);
        }
        Ok(out)
    }
}

/// Pointwise size of the seed along the eigenfunction of `λ_j`.
///
/// For `f(t) ≈ λ₀t` near 0 and `o(t)` at infinity, a single-mode balance
/// `λ_j u ≈ λ∞u + f(u)` puts the amplitude where `f(u)/u ≈ λ_j − λ∞`; for the
/// rational profile `λ₀t/(1+t²)` this is `√(λ₀/(λ_j−λ∞) − 1)`, exact on the
/// constant branch.
pub fn seed_amplitude_scale(lambda_j: f64, lambda_inf: f64, lambda0: f64) -> f64 {
    let ratio = lambda0 / (lambda_j - lambda_inf);
    (ratio - 1.0).max(0.25).sqrt()
}

fn distance_mod_sign(a: &FourierField, b: &FourierField) -> f64 {
    let minus = a.sub(b).norm_sq();
    let plus = a.add(b).norm_sq();
    minus.min(plus).sqrt()
}

/// Deflated Newton sweep over eigenspace seeds for `j ∈ [h, k]`, after
/// confirming the gap condition and oddness.
pub fn solve_multiplicity(
    problem: &Problem,
    opts: &SolverOptions,
    report: &HypothesisReport,
    table: &SpectrumTable,
) -> Result<MultiplicityReport> {
    if report.applies != Applicable::Multiplicity {
        return Err(Error::NotApplicable(format!(
            "multiplicity sweep needs the gap condition with odd f (report says {:?})",
            report.applies
        )));
    }
    let (h, k) = (report.gap.h.unwrap(), report.gap.k.unwrap());
    sweep_ranks(problem, opts, table, (h, k), report.lambda0)
}

/// The seeded sweep over ranks `h..=k` without the hypothesis gate.
/// `lambda0` only sets the seed amplitudes.
pub fn sweep_ranks(
    problem: &Problem,
    opts: &SolverOptions,
    table: &SpectrumTable,
    (h, k): (usize, usize),
    lambda0: f64,
) -> Result<MultiplicityReport> {
    opts.validate()?;
    if h == 0 || h > k || table.total() < k {
        return Err(Error::Parameter(format!(
            "rank range {h}..={k} not covered by the table"
        )));
    }
    let lambda_inf = problem.cfg.lambda_inf();
    let entries: Vec<_> = table
        .entries
        .iter()
        .filter(|e| e.index_range.1 >= h && e.index_range.0 <= k)
        .cloned()
        .collect();
    let basis: Vec<_> = real_basis(&problem.lattice, &entries)?
        .into_iter()
        .filter(|m| (h..=k).contains(&m.rank))
        .collect();
    let vol_sqrt = problem
        .lattice
        .period()
        .powf(problem.lattice.dim() as f64 / 2.0);

    let mut deflation = Deflation::from_options(opts);
    deflation.push(FourierField::zeros(&problem.lattice));
    let mut pairs: Vec<SolutionRecord> = Vec::new();
    let mut seeds = Vec::new();
    'outer: for mode in &basis {
        let sup = match mode.kind {
            RealKind::Constant => 1.0 / vol_sqrt,
            RealKind::Cos | RealKind::Sin => std::f64::consts::SQRT_2 / vol_sqrt,
        };
        let rho = seed_amplitude_scale(mode.lambda, lambda_inf, lambda0);
        for &amp in &opts.amplitudes {
            for sign in [1.0, -1.0] {
                if pairs.len() >= opts.max_solutions {
                    break 'outer;
                }
                let tag = format!(
                    "rank{}:{:?}:{:?}:a{}:{}",
                    mode.rank,
                    mode.k,
                    mode.kind,
                    amp,
                    if sign > 0.0 { '+' } else { '-' }
                );
                let seed = mode.field.scaled(sign * amp * rho / sup);
                let active = if opts.deflation {
                    deflation.clone()
                } else {
                    Deflation::default()
                };
                let run = newton(problem, opts, &seed, &active)?;
                let run = match run {
                    Ok(run) => run,
                    Err(fail) => {
                        seeds.push(SeedOutcome {
                            tag,
                            converged: false,
                            accepted: false,
                            iterations: fail.iterations,
                            residual: fail.residual,
                            note: fail.reason,
                        });
                        continue;
                    }
                };
                let u = run.solution;
                let residual = *run.residual_history.last().unwrap();
                let mut outcome = SeedOutcome {
                    tag: tag.clone(),
                    converged: true,
                    accepted: false,
                    iterations: run.iterations,
                    residual,
                    note: String::new(),
                };
                let norm = u.norm_sq().sqrt();
                if norm <= opts.distinct_threshold {
                    outcome.note = "trivial solution".into();
                } else if let Some(j) = pairs
                    .iter()
                    .position(|p| distance_mod_sign(&p.field, &u) < opts.distinct_threshold)
                {
                    outcome.note = format!("duplicate of pair {j}");
                } else {
                    let check = verify_solution(&u, problem, opts.tolerance)?;
                    if !check.ok {
                        outcome.note = format!(
                            "rejected by refined residual check ({:.3e})",
                            check.refined_residual
                        );
                    } else {
                        let mut rec = SolutionRecord::build(
                            u.clone(),
                            problem,
                            tag,
                            run.iterations,
                            run.residual_history,
                        )?;
                        rec.paired = true;
                        if opts.morse {
                            rec.morse =
                                Some(estimate_morse(&u, problem, opts.morse_steps, opts.seed)?);
                        }
                        deflation.push(u.scaled(-1.0));
                        deflation.push(u);
                        pairs.push(rec);
                        outcome.accepted = true;
                        outcome.note = format!("pair {}", pairs.len() - 1);
                    }
                }
                seeds.push(outcome);
            }
        }
    }
    Ok(MultiplicityReport {
        h,
        k,
        lower_bound: k - h + 1,
        deflation: opts.deflation,
        pairs,
        seeds,
    })
}
