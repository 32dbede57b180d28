use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::energy::{energy, gradient};
use crate::error::{Error, Result};
use crate::torus::FourierField;

use super::{estimate_morse, Problem, SolutionRecord, SolverOptions};

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 40;

/// Small random start used when no initial field is given.
pub fn default_initial(problem: &Problem, seed: u64) -> FourierField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = FourierField::random_real(&problem.lattice, &mut rng, 2.0);
    let n = u.norm_sq().sqrt();
    u.scaled(0.1 / n)
}

/// Preconditioned steepest descent with Armijo backtracking, valid when
/// `λ∞ < λ₁` so that `κ_s(λ_k − λ∞)` is a positive metric.
pub fn solve_direct_min(
    problem: &Problem,
    opts: &SolverOptions,
    init: &FourierField,
) -> Result<SolutionRecord> {
    opts.validate()?;
    let (nl, cfg) = (&problem.nl, &problem.cfg);
    let lambda1 = cfg.symbol(0);
    if cfg.lambda_inf() >= lambda1 {
        return Err(Error::NotApplicable(format!(
            "direct minimization needs λ∞ < λ₁ = {lambda1}, got {}",
            cfg.lambda_inf()
        )));
    }
    let kappa = cfg.kappa();
    let metric: Vec<f64> = (0..problem.lattice.len())
        .map(|i| kappa * (cfg.symbol(problem.lattice.k_sq(i)) - cfg.lambda_inf()))
        .collect();
    let mut u = init.clone();
    u.make_real();
    let mut e = energy(&u, nl, cfg)?;
    let mut g = gradient(&u, nl, cfg)?;
    let mut res = g.norm_sq().sqrt();
    let mut history = vec![res];
    let mut it = 0;
    while res > opts.tolerance {
        if it == opts.max_descent {
            return Err(Error::NonConvergence {
                iterations: it,
                residual: res,
            });
        }
        let mut d = g.clone();
        for (c, w) in d.coeffs_mut().iter_mut().zip(&metric) {
            *c /= -w;
        }
        d.make_real();
        let slope = g.dot(&d);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let mut trial = u.clone();
            trial.axpy(alpha, &d);
            trial.make_real();
            let et = energy(&trial, nl, cfg)?;
            let decrease = e - et;
            // once energy differences drown in rounding, monitor the gradient instead
            let resolved = decrease.abs() > 1e-13 * e.abs().max(1.0);
            if resolved && et <= e + ARMIJO * alpha * slope {
                accepted = Some((trial, et, None));
                break;
            }
            if !resolved {
                let gt = gradient(&trial, nl, cfg)?;
                if gt.norm_sq().sqrt() < res {
                    accepted = Some((trial, et, Some(gt)));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((next, en, gn)) = accepted else {
            return Err(Error::LineSearch {
                iteration: it,
                residual: res,
            });
        };
        u = next;
        e = en;
        g = match gn {
            Some(g) => g,
            None => gradient(&u, nl, cfg)?,
        };
        res = g.norm_sq().sqrt();
        history.push(res);
        it += 1;
    }
    let mut rec = SolutionRecord::build(u, problem, "descent".to_string(), it, history)?;
    if opts.morse {
        rec.morse = Some(estimate_morse(
            &rec.field,
            problem,
            opts.morse_steps,
            opts.seed,
        )?);
    }
    Ok(rec)
}

/// Runs [`solve_direct_min`] from `opts.restarts` seeded random starts and
/// returns every result, lowest energy first.
pub fn solve_direct_min_restarts(
    problem: &Problem,
    opts: &SolverOptions,
) -> Result<Vec<SolutionRecord>> {
    let mut out = Vec::new();
    for r in 0..opts.restarts.max(1) {
        let seed = opts.seed.wrapping_add(r as u64);
        let mut rec = solve_direct_min(problem, opts, &default_initial(problem, seed))?;
        rec.init_tag = format!("descent:seed{seed}");
        out.push(rec);
    }
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(out)
}
