//! Krylov methods on real fields: preconditioned MINRES for symmetric
//! (possibly indefinite) systems and Lanczos for extreme eigenpairs.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::torus::FourierField;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinresOutcome {
    pub iterations: usize,
    /// Preconditioned residual norm relative to the right-hand side.
    pub relative_residual: f64,
    pub converged: bool,
}

/// Solves `A x = b` for symmetric `A` with the SPD diagonal preconditioner
/// `precond` (one positive entry per lattice mode).
pub fn minres(
    apply: impl Fn(&FourierField) -> FourierField,
    b: &FourierField,
    precond: &[f64],
    rtol: f64,
    max_iter: usize,
) -> (FourierField, MinresOutcome) {
    let solve_m = |r: &FourierField| -> FourierField {
        let mut z = r.clone();
        for (c, d) in z.coeffs_mut().iter_mut().zip(precond) {
            *c /= d;
        }
        z.make_real();
        z
    };
    let mut x = FourierField::zeros(b.lattice());
    let mut r1 = b.clone();
    let mut y = solve_m(&r1);
    let beta1 = r1.dot(&y).max(0.0).sqrt();
    if beta1 == 0.0 {
        return (
            x,
            MinresOutcome {
                iterations: 0,
                relative_residual: 0.0,
                converged: true,
            },
        );
    }
    let mut r2 = r1.clone();
    let mut oldb = 0.0;
    let mut beta = beta1;
    let mut dbar = 0.0;
    let mut epsln = 0.0;
    let mut phibar = beta1;
    let mut cs = -1.0;
    let mut sn = 0.0;
    let mut w = FourierField::zeros(b.lattice());
    let mut w2 = FourierField::zeros(b.lattice());
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let v = y.scaled(1.0 / beta);
        y = apply(&v);
        if iterations >= 2 {
            y.axpy(-beta / oldb, &r1);
        }
        let alfa = v.dot(&y);
        y.axpy(-alfa / beta, &r2);
        r1 = std::mem::replace(&mut r2, y);
        y = solve_m(&r2);
        oldb = beta;
        beta = r2.dot(&y).max(0.0).sqrt();
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        let w1 = std::mem::replace(&mut w2, w);
        let mut next = v;
        next.axpy(-oldeps, &w1);
        next.axpy(-delta, &w2);
        w = next.scaled(1.0 / gamma);
        x.axpy(phi, &w);
        if phibar <= rtol * beta1 || beta == 0.0 {
            break;
        }
    }
    x.make_real();
    let rel = phibar / beta1;
    (
        x,
        MinresOutcome {
            iterations,
            relative_residual: rel,
            converged: rel <= rtol,
        },
    )
}

fn orthogonalize(v: &mut FourierField, against: &[FourierField]) {
    // two passes of classical Gram–Schmidt
    for _ in 0..2 {
        for q in against {
            let c = q.dot(v);
            v.axpy(-c, q);
        }
    }
}

/// Smallest and largest Ritz pairs of a symmetric operator on the complement of
/// `locked` (assumed orthonormal), from `steps` Lanczos iterations with full
/// reorthogonalization.
pub fn lanczos_extremes(
    apply: &dyn Fn(&FourierField) -> FourierField,
    start: &FourierField,
    locked: &[FourierField],
    steps: usize,
) -> Option<((f64, FourierField), (f64, FourierField))> {
    let mut q = start.clone();
    orthogonalize(&mut q, locked);
    let n0 = q.norm_sq().sqrt();
    if n0 == 0.0 {
        return None;
    }
    q = q.scaled(1.0 / n0);
    let mut basis: Vec<FourierField> = vec![q];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    for j in 0..steps {
        let mut w = apply(&basis[j]);
        let scale = w.norm_sq().sqrt();
        let a = basis[j].dot(&w);
        alpha.push(a);
        orthogonalize(&mut w, locked);
        orthogonalize(&mut w, &basis);
        let b = w.norm_sq().sqrt();
        // invariant subspace reached: what is left is rounding noise
        if b <= 1e-8 * scale || j + 1 == steps {
            break;
        }
        // normalizing a small remainder amplifies its rounding; clean it again
        let mut q = w.scaled(1.0 / b);
        orthogonalize(&mut q, locked);
        orthogonalize(&mut q, &basis);
        let nq = q.norm_sq().sqrt();
        if nq < 0.5 {
            break;
        }
        beta.push(b);
        basis.push(q.scaled(1.0 / nq));
    }
    let k = alpha.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (imin, imax) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, 0), |(lo, hi), (i, &v)| {
            (
                if v < eig.eigenvalues[lo] { i } else { lo },
                if v > eig.eigenvalues[hi] { i } else { hi },
            )
        });
    let ritz = |col: usize| -> FourierField {
        let mut v = FourierField::zeros(start.lattice());
        for (i, qi) in basis.iter().take(k).enumerate() {
            v.axpy(eig.eigenvectors[(i, col)], qi);
        }
        let n = v.norm_sq().sqrt();
        let mut v = v.scaled(1.0 / n);
        v.make_real();
        v
    };
    Some((
        (eig.eigenvalues[imin], ritz(imin)),
        (eig.eigenvalues[imax], ritz(imax)),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MorseEstimate {
    /// Number of negative eigen-directions found.
    pub index: usize,
    /// Negative Ritz values, in the order they were locked.
    pub negative: Vec<f64>,
    /// Smallest non-negative Ritz value on the complement of the locked directions.
    pub next_smallest: f64,
    pub largest: f64,
}

/// Counts negative eigenvalues by repeated Lanczos runs, locking each negative
/// Ritz vector so that repeated eigenvalues are counted with multiplicity.
pub fn morse_index<R: Rng + ?Sized>(
    apply: &dyn Fn(&FourierField) -> FourierField,
    template: &FourierField,
    rng: &mut R,
    max_index: usize,
    steps: usize,
    zero_tol: f64,
) -> MorseEstimate {
    let mut locked: Vec<FourierField> = Vec::new();
    let mut negative = Vec::new();
    let mut largest = f64::NEG_INFINITY;
    let mut next_smallest = f64::INFINITY;
    while negative.len() <= max_index {
        let start = FourierField::random_real(template.lattice(), rng, 0.0);
        let Some(((lo, vlo), (hi, _))) = lanczos_extremes(apply, &start, &locked, steps) else {
            break;
        };
        largest = largest.max(hi);
        if lo < -zero_tol {
            negative.push(lo);
            locked.push(vlo);
        } else {
            next_smallest = lo;
            break;
        }
    }
    MorseEstimate {
        index: negative.len(),
        negative,
        next_smallest,
        largest,
    }
}
