use crate::energy::{gradient, linearize};
use crate::error::{Error, Result};
use crate::torus::FourierField;

use super::krylov::minres;
use super::{Problem, SolutionRecord, SolverOptions};

/// Shifted-power deflation `M(u) = Π_i (‖u − u_i‖^{-p} + σ)` over known roots.
#[derive(Debug, Clone, Default)]
pub struct Deflation {
    roots: Vec<FourierField>,
    shift: f64,
    power: f64,
}

impl Deflation {
    pub fn new(shift: f64, power: f64) -> Self {
        Deflation {
            roots: Vec::new(),
            shift,
            power,
        }
    }

    pub fn from_options(opts: &SolverOptions) -> Self {
        Deflation::new(opts.deflation_shift, opts.deflation_power)
    }

    pub fn push(&mut self, root: FourierField) {
        self.roots.push(root);
    }

    pub fn roots(&self) -> &[FourierField] {
        &self.roots
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn factor(&self, u: &FourierField) -> f64 {
        self.roots
            .iter()
            .map(|r| u.sub(r).norm_sq().powf(-self.power / 2.0) + self.shift)
            .product()
    }

    /// `∇ ln M(u)`.
    pub fn log_gradient(&self, u: &FourierField) -> FourierField {
        let mut out = FourierField::zeros(u.lattice());
        for r in &self.roots {
            let diff = u.sub(r);
            let d2 = diff.norm_sq();
            let inv = d2.powf(-self.power / 2.0);
            out.axpy(-self.power * inv / d2 / (inv + self.shift), &diff);
        }
        out.make_real();
        out
    }
}

#[derive(Debug, Clone)]
pub struct NewtonRun {
    pub solution: FourierField,
    pub iterations: usize,
    /// Undeflated gradient norm at every iterate, including the last.
    pub residual_history: Vec<f64>,
    pub linear_iterations: usize,
    pub trajectory: Vec<FourierField>,
}

/// A Newton run that did not reach the tolerance; keeps the last iterate.
#[derive(Debug, Clone)]
pub struct NewtonFailure {
    pub last: FourierField,
    pub iterations: usize,
    pub residual: f64,
    pub residual_history: Vec<f64>,
    pub reason: String,
}

impl From<NewtonFailure> for Error {
    fn from(f: NewtonFailure) -> Self {
        Error::NonConvergence {
            iterations: f.iterations,
            residual: f.residual,
        }
    }
}

/// Orthonormal basis of the translates `∂_{x_i} u` that are not negligible.
///
/// When `f` does not depend on `x` every translate of a solution is again a
/// solution, so near a non-constant solution the Jacobian is (nearly) singular
/// along these directions. Newton works on their complement.
fn translation_modes(u: &FourierField, omega: f64) -> Vec<FourierField> {
    let lat = u.lattice().clone();
    let floor = 1e-8 * omega * u.norm_sq().sqrt();
    let mut modes: Vec<FourierField> = Vec::new();
    for axis in 0..lat.dim() {
        let mut t = u.clone();
        for (i, c) in t.coeffs_mut().iter_mut().enumerate() {
            *c *= num_complex::Complex64::new(0.0, omega * lat.mode(i)[axis] as f64);
        }
        for q in &modes {
            let c = q.dot(&t);
            t.axpy(-c, q);
        }
        let n = t.norm_sq().sqrt();
        if n > floor && n > 0.0 {
            modes.push(t.scaled(1.0 / n));
        }
    }
    modes
}

fn project_out(v: &mut FourierField, modes: &[FourierField]) {
    for q in modes {
        let c = q.dot(v);
        v.axpy(-c, q);
    }
}

const MAX_HALVINGS: usize = 12;
const DIVERGENCE_NORM: f64 = 1e12;

/// Newton iteration on `𝒥′(u) = 0` with MINRES inner solves, optionally
/// deflating the roots in `deflation`.
pub fn newton(
    problem: &Problem,
    opts: &SolverOptions,
    init: &FourierField,
    deflation: &Deflation,
) -> Result<std::result::Result<NewtonRun, NewtonFailure>> {
    opts.validate()?;
    let (nl, cfg) = (&problem.nl, &problem.cfg);
    if !init.same_lattice(&FourierField::zeros(&problem.lattice)) {
        return Err(Error::Parameter(
            "initial field lives on another lattice".into(),
        ));
    }
    let mut u = init.clone();
    u.make_real();
    let mut g = gradient(&u, nl, cfg)?;
    let mut res = g.norm_sq().sqrt();
    let mut history = vec![res];
    let mut trajectory = vec![u.clone()];
    let mut linear_iterations = 0;
    let fail = |u: FourierField, it: usize, history: Vec<f64>, reason: String| {
        Ok(Err(NewtonFailure {
            residual: *history.last().unwrap(),
            last: u,
            iterations: it,
            residual_history: history,
            reason,
        }))
    };
    for it in 0..opts.max_newton {
        if res <= opts.tolerance {
            return Ok(Ok(NewtonRun {
                solution: u,
                iterations: it,
                residual_history: history,
                linear_iterations,
                trajectory,
            }));
        }
        let lin = linearize(&u, nl, cfg)?;
        let dmax = lin.diagonal().iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let precond: Vec<f64> = lin
            .diagonal()
            .iter()
            .map(|d| d.abs().max(1e-8 * dmax).max(f64::MIN_POSITIVE))
            .collect();
        let pinned = if nl.depends_on_x() {
            Vec::new()
        } else {
            translation_modes(&u, cfg.omega())
        };
        let mut rhs = g.scaled(-1.0);
        project_out(&mut rhs, &pinned);
        let (mut step, out) = minres(
            |w| {
                let mut w = w.clone();
                project_out(&mut w, &pinned);
                let mut hw = lin.apply(&w);
                project_out(&mut hw, &pinned);
                hw
            },
            &rhs,
            &precond,
            opts.linear_tolerance,
            opts.max_linear,
        );
        project_out(&mut step, &pinned);
        step.make_real();
        linear_iterations += out.iterations;
        if !step
            .coeffs()
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
        {
            return fail(
                u,
                it,
                history,
                "linear solve produced non-finite step".into(),
            );
        }
        if !deflation.is_empty() {
            let tau = 1.0 - deflation.log_gradient(&u).dot(&step);
            if tau.abs() > 1e-12 {
                step = step.scaled(1.0 / tau);
            }
        }
        let merit = |v: &FourierField, r: f64| deflation.factor(v) * r;
        let current = merit(&u, res);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let mut trial = u.clone();
            trial.axpy(alpha, &step);
            trial.make_real();
            let gt = gradient(&trial, nl, cfg)?;
            let rt = gt.norm_sq().sqrt();
            if rt.is_finite() && merit(&trial, rt) < (1.0 - 1e-4 * alpha) * current {
                accepted = Some((trial, gt, rt));
                break;
            }
            alpha *= 0.5;
        }
        let Some((next, gn, rn)) = accepted else {
            return fail(
                u,
                it,
                history,
                format!(
                    "line search stalled (linear residual {:.3e})",
                    out.relative_residual
                ),
            );
        };
        u = next;
        g = gn;
        res = rn;
        history.push(res);
        trajectory.push(u.clone());
        if u.norm_sq().sqrt() > DIVERGENCE_NORM {
            return fail(u, it + 1, history, "iterates diverge".into());
        }
    }
    if res <= opts.tolerance {
        return Ok(Ok(NewtonRun {
            solution: u,
            iterations: opts.max_newton,
            residual_history: history,
            linear_iterations,
            trajectory,
        }));
    }
    fail(
        u,
        opts.max_newton,
        history,
        "iteration limit reached".into(),
    )
}

/// Undeflated Newton from `init`; nonconvergence becomes an error.
pub fn solve_newton(
    problem: &Problem,
    opts: &SolverOptions,
    init: &FourierField,
) -> Result<SolutionRecord> {
    let lambda_inf = problem.cfg.lambda_inf();
    let tol = 1e-12 * lambda_inf.abs().max(1.0);
    let lat = &problem.lattice;
    if (0..lat.len()).any(|i| (problem.cfg.symbol(lat.k_sq(i)) - lambda_inf).abs() <= tol) {
        return Err(Error::NotApplicable(format!(
            "λ∞ = {lambda_inf} is an eigenvalue; the linearization at infinity is singular"
        )));
    }
    let run = newton(problem, opts, init, &Deflation::default())??;
    let mut rec = SolutionRecord::build(
        run.solution,
        problem,
        "user".to_string(),
        run.iterations,
        run.residual_history,
    )?;
    if opts.morse {
        rec.morse = Some(super::estimate_morse(
            &rec.field,
            problem,
            opts.morse_steps,
            opts.seed,
        )?);
    }
    Ok(rec)
}
