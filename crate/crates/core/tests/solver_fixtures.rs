mod common;

use std::sync::Arc;

use common::*;
use fracperiod::energy::gradient;
use fracperiod::hypotheses::{check_hypotheses, hypothesis_spectrum, Applicable};
use fracperiod::solver::{
    estimate_morse, solve_direct_min_restarts, solve_multiplicity, solve_newton, verify_solution, MultiplicityReport,
    Problem, SolverOptions,
};
use fracperiod::torus::{synthesize, TorusConfig};
use fracperiod::{FourierField, ModeLattice};

fn quiet() -> SolverOptions {
    SolverOptions {
        morse: false,
        ..SolverOptions::default()
    }
}

fn sweep(p: &Problem, opts: &SolverOptions) -> MultiplicityReport {
    let table = hypothesis_spectrum(&p.cfg, &p.lattice, &p.nl).unwrap();
    let report = check_hypotheses(&p.nl, &p.cfg, &table).unwrap();
    assert_eq!(report.applies, Applicable::Multiplicity);
    solve_multiplicity(p, opts, &report, &table).unwrap()
}

#[test]
fn newton_recovers_the_constant_pair_quadratically() {
    let p = reference_problem(16);
    for (start, target) in [(0.6, ROOT_HALF), (-0.6, -ROOT_HALF)] {
        let rec = solve_newton(&p, &quiet(), &FourierField::constant(&p.lattice, start)).unwrap();
        assert!(rec.residual < 1e-10);
        let off = synthesize(&rec.field).values.iter().map(|v| (v - target).abs()).fold(0.0, f64::max);
        assert!(off < 1e-8, "{off:e}");
        assert!(rec.iterations <= 6, "{} iterations", rec.iterations);
        let h = &rec.residual_history;
        // quadratic convergence: residual roughly squares until rounding takes over
        for w in h.windows(2) {
            if w[0] > 1e-6 && w[0] < 1e-2 {
                assert!(w[1] < 10.0 * w[0] * w[0], "{h:?}");
            }
        }
    }
}

#[test]
fn solutions_satisfy_weak_form_mode_by_mode() {
    let p = reference_problem(16);
    let opts = quiet();
    let rep = sweep(&p, &opts);
    assert!(rep.pairs.len() >= 3);
    for rec in rep.solutions(&p).unwrap() {
        let g = gradient(&rec.field, &p.nl, &p.cfg).unwrap();
        // the orthonormal modes have unit norm, so each coefficient is a test
        let worst = g.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(worst <= opts.tolerance, "{}: {worst:e}", rec.init_tag);
        let check = verify_solution(&rec.field, &p, opts.tolerance).unwrap();
        assert!(check.ok && check.refined_residual < 10.0 * opts.tolerance);
    }
}

#[test]
fn negation_closure_keeps_energy_and_residual() {
    let p = reference_problem(16);
    let rep = sweep(&p, &quiet());
    let all = rep.solutions(&p).unwrap();
    for pair in all.chunks(2) {
        let (a, b) = (&pair[0], &pair[1]);
        assert!(a.field.add(&b.field).norm_sq() == 0.0);
        assert_eq!(a.energy, b.energy);
        assert_eq!(a.residual, b.residual);
    }
}

#[test]
fn deflation_finds_at_least_as_many_pairs() {
    let p = reference_problem(16);
    let with = sweep(&p, &quiet()).pairs.len();
    let without = sweep(
        &p,
        &SolverOptions {
            deflation: false,
            ..quiet()
        },
    )
    .pairs
    .len();
    assert!(with >= without, "{with} < {without}");
    assert!(with >= 3);
}

fn resolve_on(coarse: &Problem, cutoff: usize, grid: usize) -> Vec<f64> {
    let fine_lat = Arc::new(ModeLattice::cubic(coarse.cfg.period(), 2, cutoff, grid).unwrap());
    let fine = Problem::new(coarse.cfg.clone(), fine_lat.clone(), rational(-1.5)).unwrap();
    sweep(coarse, &quiet())
        .pairs
        .iter()
        .map(|rec| {
            let start = rec.field.embed(&fine_lat).unwrap();
            let refined = solve_newton(&fine, &quiet(), &start).unwrap();
            refined.field.sub(&start).norm_sq().sqrt()
        })
        .collect()
}

#[test]
fn doubling_the_grid_does_not_move_solutions() {
    let moved = resolve_on(&reference_problem(16), 16, 68);
    assert_eq!(moved.len(), 9);
    assert!(moved.iter().all(|&m| m < 1e-6), "{moved:?}");
}

#[test]
fn doubling_a_resolved_cutoff_does_not_move_solutions() {
    // at cutoff 16 the non-constant branches still carry an L² tail of about
    // 1.2e-6 beyond |k| = 16, so refinement starts from cutoff 24
    let base = Problem::new(reference_config(), lattice(24), rational(-1.5)).unwrap();
    let moved = resolve_on(&base, 48, 98);
    assert!(moved.len() >= 3);
    assert!(moved.iter().all(|&m| m < 1e-6), "{moved:?}");
    // the constant branch does not depend on resolution at all
    let fine_lat = Arc::new(ModeLattice::cubic(base.cfg.period(), 2, 48, 98).unwrap());
    let fine = Problem::new(base.cfg.clone(), fine_lat.clone(), rational(-1.5)).unwrap();
    let c = solve_newton(&fine, &quiet(), &FourierField::constant(&fine_lat, 0.6)).unwrap();
    let off = synthesize(&c.field).values.iter().map(|v| (v - ROOT_HALF).abs()).fold(0.0, f64::max);
    assert!(off < 1e-12, "{off:e}");
}

#[test]
fn nontrivial_critical_point_is_a_saddle() {
    let p = reference_problem(16);
    let rec = solve_newton(&p, &quiet(), &FourierField::constant(&p.lattice, 0.6)).unwrap();
    let morse = estimate_morse(&rec.field, &p, 60, 3).unwrap();
    assert!(morse.index >= 1);
    assert!(morse.largest > 0.0);
    // u ≡ c: the Hessian is diagonal and its negative part is the modes with
    // λ_k < λ∞ + f′(c), which are ranks 1..5
    assert_eq!(morse.index, 5, "{morse:?}");
}

#[test]
fn direct_minimization_matches_scalar_root() {
    let cfg = TorusConfig::new(2.0 * std::f64::consts::PI, 2, 1.0, 0.5, 0.5).unwrap();
    let p = Problem::new(cfg, lattice(8), rational(0.6)).unwrap();
    let runs = solve_direct_min_restarts(&p, &quiet()).unwrap();
    assert_eq!(runs.len(), 5);
    let best = runs[0].energy;
    for r in &runs {
        assert!(r.residual < 1e-10);
        assert!((r.energy - best).abs() <= 1e-10, "{} vs {best}", r.energy);
        let c = 0.2f64.sqrt();
        let off = synthesize(&r.field)
            .values
            .iter()
            .map(|v| (v.abs() - c).abs())
            .fold(0.0, f64::max);
        assert!(off < 1e-8, "{off:e}");
    }
}
