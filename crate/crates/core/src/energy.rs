//! The energy `𝒥(u) = ½κ_s|u|²_{ℍ^s} − ½λ∞κ_s|u|²_{L²} − κ_s∫F(x,u)dx` on the
//! trace side, its `L²` gradient and Hessian-vector products.
//!
//! The extension identity `‖v‖²_{𝕏^s} = κ_s|u|²_{ℍ^s}` lets every evaluation stay
//! on the base. Nonlinear terms are evaluated on a grid refined by a factor 2 in
//! each dimension (zero padding of the coefficients).

use rayon::prelude::*;

use crate::error::Result;
use crate::nonlinearity::Nonlinearity;
use crate::operator::{check_compatible, hs_norm_sq_unchecked, Sobolev};
use crate::torus::{
    analyze_grid, grid_point, synthesize_grid, FourierField, GridField, TorusConfig,
};

/// Refinement of the lattice grid used for nonlinear terms.
pub const DEALIAS_FACTOR: usize = 2;

const PAR_THRESHOLD: usize = 1 << 15;

fn padded_sizes(u: &FourierField, resolution: usize) -> Vec<usize> {
    u.lattice()
        .grid_sizes()
        .iter()
        .map(|n| n * DEALIAS_FACTOR * resolution)
        .collect()
}

fn pointwise(
    grid: &GridField,
    period: f64,
    needs_x: bool,
    g: impl Fn(&[f64], f64) -> f64 + Sync,
) -> Vec<f64> {
    let sizes = &grid.sizes;
    let dim = sizes.len();
    let eval = |(j, &t): (usize, &f64)| {
        let mut x = [0.0f64; 8];
        if needs_x {
            grid_point(j, sizes, period, &mut x[..dim]);
        }
        g(&x[..dim], t)
    };
    if grid.values.len() >= PAR_THRESHOLD {
        grid.values.par_iter().enumerate().map(eval).collect()
    } else {
        grid.values.iter().enumerate().map(eval).collect()
    }
}

fn cell_volume(u: &FourierField, sizes: &[usize]) -> f64 {
    let lat = u.lattice();
    let points: usize = sizes.iter().product();
    lat.period().powi(lat.dim() as i32) / points as f64
}

/// `∫ F(x, u(x)) dx` by quadrature on the refined grid.
pub fn nonlinear_integral(u: &FourierField, nl: &Nonlinearity, resolution: usize) -> f64 {
    let sizes = padded_sizes(u, resolution);
    let grid = synthesize_grid(u, &sizes).expect("refined grid resolves the lattice");
    let vals = pointwise(&grid, u.lattice().period(), nl.depends_on_x(), |x, t| {
        nl.primitive(x, t)
    });
    vals.iter().sum::<f64>() * cell_volume(u, &sizes)
}

pub fn energy(u: &FourierField, nl: &Nonlinearity, cfg: &TorusConfig) -> Result<f64> {
    check_compatible(u, cfg)?;
    let kappa = cfg.kappa();
    let hs = hs_norm_sq_unchecked(u, cfg, Sobolev::Positive);
    let l2 = u.norm_sq();
    let nonlinear = if nl.is_zero() {
        0.0
    } else {
        nonlinear_integral(u, nl, 1)
    };
    Ok(0.5 * kappa * hs - 0.5 * cfg.lambda_inf() * kappa * l2 - kappa * nonlinear)
}

/// Coefficients of `f(x, u(x))` projected on the lattice.
fn nonlinear_term(u: &FourierField, nl: &Nonlinearity, resolution: usize) -> FourierField {
    let sizes = padded_sizes(u, resolution);
    let grid = synthesize_grid(u, &sizes).expect("refined grid resolves the lattice");
    let vals = pointwise(&grid, u.lattice().period(), nl.depends_on_x(), |x, t| {
        nl.f(x, t)
    });
    analyze_grid(&GridField::new(sizes, vals).expect("sizes"), u.lattice())
        .expect("admissible grid")
}

/// `L²` Riesz representative of `𝒥′(u)`:
/// coefficients `κ_s[(ω²|k|²+m²)^s β_k − λ∞β_k − f̂_k]`.
pub fn gradient(u: &FourierField, nl: &Nonlinearity, cfg: &TorusConfig) -> Result<FourierField> {
    gradient_at_resolution(u, nl, cfg, 1)
}

/// [`gradient`] with nonlinear terms on a grid refined by `resolution` beyond the
/// usual dealiasing; used for independent residual checks.
pub fn gradient_at_resolution(
    u: &FourierField,
    nl: &Nonlinearity,
    cfg: &TorusConfig,
    resolution: usize,
) -> Result<FourierField> {
    check_compatible(u, cfg)?;
    let kappa = cfg.kappa();
    let lambda_inf = cfg.lambda_inf();
    let mut g = u.map_symbol(|k_sq| kappa * (cfg.symbol(k_sq) - lambda_inf));
    if !nl.is_zero() {
        g.axpy(-kappa, &nonlinear_term(u, nl, resolution));
    }
    g.make_real();
    Ok(g)
}

/// `𝒥″(u)` frozen at `u`, for repeated Hessian-vector products.
#[derive(Debug, Clone)]
pub struct Linearization {
    kappa: f64,
    // κ_s(λ_k − λ∞) per lattice mode
    diagonal: Vec<f64>,
    // ∂f/∂t(x, u(x)) on the refined grid, None when f ≡ 0
    slope: Option<GridField>,
}

pub fn linearize(u: &FourierField, nl: &Nonlinearity, cfg: &TorusConfig) -> Result<Linearization> {
    check_compatible(u, cfg)?;
    let kappa = cfg.kappa();
    let lat = u.lattice();
    let diagonal = (0..lat.len())
        .map(|i| kappa * (cfg.symbol(lat.k_sq(i)) - cfg.lambda_inf()))
        .collect();
    let slope = (!nl.is_zero()).then(|| {
        let sizes = padded_sizes(u, 1);
        let grid = synthesize_grid(u, &sizes).expect("refined grid");
        let vals = pointwise(&grid, lat.period(), nl.depends_on_x(), |x, t| nl.dfdt(x, t));
        GridField::new(sizes, vals).expect("sizes")
    });
    Ok(Linearization {
        kappa,
        diagonal,
        slope,
    })
}

impl Linearization {
    /// `κ_s[(λ_k − λ∞)ŵ_k − (∂_t f(x,u)·w)^_k]`.
    pub fn apply(&self, w: &FourierField) -> FourierField {
        let mut out = w.clone();
        for (c, d) in out.coeffs_mut().iter_mut().zip(&self.diagonal) {
            *c *= d;
        }
        if let Some(slope) = &self.slope {
            let grid = synthesize_grid(w, &slope.sizes).expect("refined grid");
            let prod: Vec<f64> = grid
                .values
                .iter()
                .zip(&slope.values)
                .map(|(a, b)| a * b)
                .collect();
            let hat = analyze_grid(
                &GridField::new(slope.sizes.clone(), prod).expect("sizes"),
                w.lattice(),
            )
            .expect("admissible grid");
            out.axpy(-self.kappa, &hat);
        }
        out.make_real();
        out
    }

    /// The exact linear part `κ_s(λ_k − λ∞)` per mode.
    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }
}

pub fn hessian_vec(
    u: &FourierField,
    w: &FourierField,
    nl: &Nonlinearity,
    cfg: &TorusConfig,
) -> Result<FourierField> {
    check_compatible(w, cfg)?;
    Ok(linearize(u, nl, cfg)?.apply(w))
}
