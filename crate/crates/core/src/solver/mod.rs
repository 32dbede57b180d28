//! Critical points of the energy: direct minimization below the spectrum,
//! deflated Newton–Krylov above it, and the eigenspace-seeded multiplicity sweep.

mod diagnostics;
mod direct;
pub mod krylov;
mod newton;
mod sweep;

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::energy::{energy, gradient_at_resolution, linearize};
use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::operator::{check_compatible, hs_norm, Sobolev};
use crate::torus::{FourierField, ModeLattice, TorusConfig};

pub use diagnostics::{ps_diagnostics, PsReport, PsRow, PsThresholds};
pub use direct::{default_initial, solve_direct_min, solve_direct_min_restarts};
pub use krylov::MorseEstimate;
pub use newton::{newton, solve_newton, Deflation, NewtonFailure, NewtonRun};
pub use sweep::{
    seed_amplitude_scale, solve_multiplicity, sweep_ranks, MultiplicityReport, SeedOutcome,
};

/// Everything a solve needs: the parameters, the truncation and `f`.
#[derive(Debug, Clone)]
pub struct Problem {
    pub cfg: TorusConfig,
    pub lattice: Arc<ModeLattice>,
    pub nl: Nonlinearity,
}

impl Problem {
    pub fn new(cfg: TorusConfig, lattice: Arc<ModeLattice>, nl: Nonlinearity) -> Result<Self> {
        check_compatible(&FourierField::zeros(&lattice), &cfg)?;
        Ok(Problem { cfg, lattice, nl })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Newton and descent stopping tolerance on the gradient `L²` norm.
    pub tolerance: f64,
    pub max_newton: usize,
    pub linear_tolerance: f64,
    pub max_linear: usize,
    /// Deflation `Π(‖u−u_i‖^{-power} + shift)`.
    pub deflation_shift: f64,
    pub deflation_power: f64,
    pub deflation: bool,
    pub amplitudes: Vec<f64>,
    /// Cap on distinct pairs collected by the sweep.
    pub max_solutions: usize,
    pub distinct_threshold: f64,
    pub max_descent: usize,
    pub restarts: usize,
    /// Estimate the Morse index of each returned record.
    pub morse: bool,
    pub morse_steps: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-10,
            max_newton: 50,
            linear_tolerance: 1e-8,
            max_linear: 500,
            deflation_shift: 1.0,
            deflation_power: 2.0,
            deflation: true,
            amplitudes: vec![0.25, 0.5, 1.0, 2.0],
            max_solutions: 64,
            distinct_threshold: 1e-4,
            max_descent: 5000,
            restarts: 5,
            morse: true,
            morse_steps: 60,
            seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tolerance", self.tolerance),
            ("linear_tolerance", self.linear_tolerance),
            ("deflation_power", self.deflation_power),
            ("distinct_threshold", self.distinct_threshold),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.deflation_shift >= 0.0) {
            return Err(Error::Parameter(
                "deflation_shift must be non-negative".into(),
            ));
        }
        if self.distinct_threshold <= self.tolerance {
            return Err(Error::Parameter(
                "distinct_threshold must exceed the Newton tolerance".into(),
            ));
        }
        if self.max_newton == 0 || self.max_linear == 0 || self.max_descent == 0 {
            return Err(Error::Parameter("iteration limits must be positive".into()));
        }
        if self.amplitudes.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::Parameter("amplitudes must be positive".into()));
        }
        Ok(())
    }
}

/// A converged critical point and its diagnostics.
#[derive(Debug, Clone)]
pub struct SolutionRecord {
    pub field: FourierField,
    pub residual: f64,
    pub energy: f64,
    pub l2_norm: f64,
    pub hs_norm: f64,
    pub morse: Option<MorseEstimate>,
    pub init_tag: String,
    /// Whether `−u` is part of the same result set.
    pub paired: bool,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
}

impl SolutionRecord {
    pub(crate) fn build(
        field: FourierField,
        problem: &Problem,
        init_tag: String,
        iterations: usize,
        residual_history: Vec<f64>,
    ) -> Result<Self> {
        let g = crate::energy::gradient(&field, &problem.nl, &problem.cfg)?;
        Ok(SolutionRecord {
            residual: g.norm_sq().sqrt(),
            energy: energy(&field, &problem.nl, &problem.cfg)?,
            l2_norm: field.norm_sq().sqrt(),
            hs_norm: hs_norm(&field, &problem.cfg, Sobolev::Positive)?,
            field,
            morse: None,
            init_tag,
            paired: false,
            iterations,
            residual_history,
        })
    }

    /// The record of `−u`, valid when `f` is odd.
    pub fn negated(&self, problem: &Problem) -> Result<Self> {
        let mut rec = SolutionRecord::build(
            self.field.scaled(-1.0),
            problem,
            format!("-({})", self.init_tag),
            self.iterations,
            self.residual_history.clone(),
        )?;
        rec.morse = self.morse.clone();
        rec.paired = true;
        Ok(rec)
    }

    /// Ratios `r_{j+1}/r_j²` over the Newton history; bounded for quadratic convergence.
    pub fn quadratic_ratios(&self) -> Vec<f64> {
        self.residual_history
            .windows(2)
            .filter(|w| w[0] > 0.0 && w[1] > 0.0)
            .map(|w| w[1] / (w[0] * w[0]))
            .collect()
    }
}

/// Solver-independent re-check of a candidate solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verification {
    /// Gradient norm with the nonlinear term on a grid refined twice more.
    pub refined_residual: f64,
    /// `max_k |⟨𝒥′(u), φ_k⟩|` over the orthonormal lattice modes.
    pub max_mode_residual: f64,
    pub tolerance: f64,
    pub ok: bool,
}

pub fn verify_solution(
    u: &FourierField,
    problem: &Problem,
    tolerance: f64,
) -> Result<Verification> {
    let g = gradient_at_resolution(u, &problem.nl, &problem.cfg, 2)?;
    let refined = g.norm_sq().sqrt();
    let max_mode = g.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    Ok(Verification {
        refined_residual: refined,
        max_mode_residual: max_mode,
        tolerance,
        ok: refined < 10.0 * tolerance && max_mode <= 10.0 * tolerance,
    })
}

/// Morse-index estimate of the Hessian at `u`.
pub fn estimate_morse(
    u: &FourierField,
    problem: &Problem,
    steps: usize,
    seed: u64,
) -> Result<MorseEstimate> {
    let lin = linearize(u, &problem.nl, &problem.cfg)?;
    let scale = lin.diagonal().iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let apply = |w: &FourierField| lin.apply(w);
    Ok(krylov::morse_index(
        &apply,
        u,
        &mut rng,
        problem.lattice.len(),
        steps,
        1e-8 * scale.max(1.0),
    ))
}
