//! Self-checks shared by the `verify` and `gradcheck` commands: brute-force
//! oracles, finite differences, extension identities and norm inequalities.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::energy::{energy, gradient, linearize};
use crate::error::Result;
use crate::extension::{
    conormal_derivative, cylinder_energy, dyadic_heights, extend, trace_inequality_check,
    BumpPerturbation,
};
use crate::operator::{apply_operator, hs_norm, Sobolev};
use crate::spectrum::{real_basis, EigenspaceSplit, SpectrumTable, Subspace};
use crate::torus::{
    analyze, grid_point, synthesize, FourierField, GridField, ModeLattice, TorusConfig,
};

/// One named check with its measured value and threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    /// `"max"` when the value must stay below the tolerance, `"min"` when above.
    pub bound: &'static str,
    pub passed: bool,
}

impl CheckOutcome {
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        CheckOutcome {
            name: name.into(),
            value,
            tolerance,
            bound: "max",
            passed: value <= tolerance,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        CheckOutcome {
            name: name.into(),
            value,
            tolerance,
            bound: "min",
            passed: value >= tolerance,
        }
    }
}

/// Random real field with `(1+|k|²)^{-decay/2}` damping, scaled to `L²` norm `norm`.
pub fn random_field<R: Rng + ?Sized>(
    lattice: &Arc<ModeLattice>,
    rng: &mut R,
    decay: f64,
    norm: f64,
) -> FourierField {
    let u = FourierField::random_real(lattice, rng, decay);
    let n = u.norm_sq().sqrt();
    u.scaled(norm / n)
}

/// Every certified multiplier value on the lattice, sorted, with repetition.
pub fn brute_force_spectrum(cfg: &TorusConfig, lattice: &ModeLattice) -> Vec<f64> {
    let radius = lattice.certified_k_sq();
    let mut values: Vec<f64> = (0..lattice.len())
        .filter(|&i| lattice.k_sq(i) <= radius)
        .map(|i| cfg.symbol(lattice.k_sq(i)))
        .collect();
    values.sort_by(f64::total_cmp);
    values
}

/// `(−Δ+m²)^s` applied to grid samples by explicit DFT sums over the modes
/// `|k_i| ≤ (n_i−1)/2`; `O(n²)` in the number of grid points. Odd sizes only.
pub fn dense_operator_oracle(samples: &GridField, cfg: &TorusConfig) -> GridField {
    let sizes = &samples.sizes;
    let dim = sizes.len();
    let points: usize = sizes.iter().product();
    let period = cfg.period();
    let omega = cfg.omega();
    let halves: Vec<i64> = sizes.iter().map(|&n| (n as i64 - 1) / 2).collect();
    let mut modes: Vec<Vec<i64>> = vec![vec![]];
    for &h in &halves {
        modes = modes
            .into_iter()
            .flat_map(|m| {
                (-h..=h).map(move |c| {
                    let mut m = m.clone();
                    m.push(c);
                    m
                })
            })
            .collect();
    }
    let coords: Vec<Vec<f64>> = (0..points)
        .map(|j| {
            let mut x = vec![0.0; dim];
            grid_point(j, sizes, period, &mut x);
            x
        })
        .collect();
    let phase = |k: &[i64], x: &[f64]| -> f64 {
        omega * k.iter().zip(x).map(|(&a, &b)| a as f64 * b).sum::<f64>()
    };
    let mut out = vec![0.0; points];
    for k in &modes {
        let k_sq = k.iter().map(|c| (c * c) as u64).sum();
        let mut coeff = Complex64::new(0.0, 0.0);
        for (j, x) in coords.iter().enumerate() {
            coeff += samples.values[j] * Complex64::from_polar(1.0, -phase(k, x));
        }
        coeff *= cfg.symbol(k_sq) / points as f64;
        for (j, x) in coords.iter().enumerate() {
            out[j] += (coeff * Complex64::from_polar(1.0, phase(k, x))).re;
        }
    }
    GridField::new(sizes.clone(), out).expect("sizes")
}

/// Max relative error of the spectral operator against [`dense_operator_oracle`]
/// over `trials` random fields on a grid of `n` points per dimension.
pub fn operator_oracle_error<R: Rng + ?Sized>(
    cfg: &TorusConfig,
    n: usize,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    let lat = Arc::new(ModeLattice::cubic(cfg.period(), cfg.dim(), (n - 1) / 2, n)?);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let u = FourierField::random_real(&lat, rng, 0.0);
        let samples = synthesize(&u);
        let fast = synthesize(&apply_operator(&analyze(&samples, &lat)?, cfg)?);
        let slow = dense_operator_oracle(&samples, cfg);
        let scale = slow.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        worst = worst.max(fast.max_abs_diff(&slow) / scale);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteDifferenceReport {
    pub trials: usize,
    pub step: f64,
    /// Max over trials of `|FD − ⟨𝒥′(u), d⟩| / max(|⟨𝒥′(u), d⟩|, 10⁻²‖𝒥′(u)‖‖d‖)`.
    pub gradient_rel: f64,
    /// Max over trials of `‖FD − 𝒥″(u)d‖ / ‖𝒥″(u)d‖`.
    pub hessian_rel: f64,
}

/// Central differences of `𝒥` and `𝒥′` along random directions at random points.
pub fn finite_difference_check<R: Rng + ?Sized>(
    lattice: &Arc<ModeLattice>,
    nl: &crate::nonlinearity::Nonlinearity,
    cfg: &TorusConfig,
    trials: usize,
    step: f64,
    rng: &mut R,
) -> Result<FiniteDifferenceReport> {
    let vol_sqrt = cfg.period().powf(cfg.dim() as f64 / 2.0);
    let mut gradient_rel = 0.0f64;
    let mut hessian_rel = 0.0f64;
    for _ in 0..trials {
        let u = random_field(lattice, rng, 2.0, vol_sqrt);
        let d = random_field(lattice, rng, 1.0, 1.0);
        let g = gradient(&u, nl, cfg)?;
        let ep = energy(&u.add(&d.scaled(step)), nl, cfg)?;
        let em = energy(&u.sub(&d.scaled(step)), nl, cfg)?;
        let fd = (ep - em) / (2.0 * step);
        let an = g.dot(&d);
        let scale = an.abs().max(1e-2 * g.norm_sq().sqrt() * d.norm_sq().sqrt());
        if scale > 0.0 {
            gradient_rel = gradient_rel.max((fd - an).abs() / scale);
        }
        let hd = linearize(&u, nl, cfg)?.apply(&d);
        let fdh = gradient(&u.add(&d.scaled(step)), nl, cfg)?
            .sub(&gradient(&u.sub(&d.scaled(step)), nl, cfg)?)
            .scaled(0.5 / step);
        let hn = hd.norm_sq().sqrt();
        if hn > 0.0 {
            hessian_rel = hessian_rel.max(fdh.sub(&hd).norm_sq().sqrt() / hn);
        }
    }
    Ok(FiniteDifferenceReport {
        trials,
        step,
        gradient_rel,
        hessian_rel,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtensionReport {
    /// Max `|‖v‖²_{𝕏^s} / (κ_s|u|²_{ℍ^s}) − 1|`.
    pub energy_ratio_err: f64,
    /// Max relative `L²` error of the conormal limit against `κ_s(−Δ+m²)^s u`.
    pub conormal_rel: f64,
}

pub fn extension_identity_check<R: Rng + ?Sized>(
    lattice: &Arc<ModeLattice>,
    cfg: &TorusConfig,
    trials: usize,
    rng: &mut R,
) -> Result<ExtensionReport> {
    let heights = dyadic_heights(20);
    let mut energy_ratio_err = 0.0f64;
    let mut conormal_rel = 0.0f64;
    for _ in 0..trials {
        let u = random_field(lattice, rng, 2.0, 1.0);
        let v = extend(&u, cfg)?;
        let hs = hs_norm(&u, cfg, Sobolev::Positive)?;
        let ratio = cylinder_energy(&v, cfg)? / (cfg.kappa() * hs * hs);
        energy_ratio_err = energy_ratio_err.max((ratio - 1.0).abs());
        let target = apply_operator(&u, cfg)?.scaled(cfg.kappa());
        let got = conormal_derivative(&v, cfg, &heights)?;
        conormal_rel =
            conormal_rel.max(got.sub(&target).norm_sq().sqrt() / target.norm_sq().sqrt());
    }
    Ok(ExtensionReport {
        energy_ratio_err,
        conormal_rel,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceGapReport {
    /// Smallest gap over the nonzero perturbations.
    pub min_gap: f64,
    /// `|gap|` for the zero perturbation.
    pub zero_gap: f64,
}

pub fn trace_gap_check<R: Rng + ?Sized>(
    lattice: &Arc<ModeLattice>,
    cfg: &TorusConfig,
    trials: usize,
    rng: &mut R,
) -> Result<TraceGapReport> {
    let u = random_field(lattice, rng, 2.0, 1.0);
    let v = extend(&u, cfg)?;
    let zero = BumpPerturbation {
        amplitude: 0.0,
        height: 1.0,
        shape: random_field(lattice, rng, 2.0, 1.0),
    };
    let zero_gap = trace_inequality_check(&v, &zero, cfg)?.gap.abs();
    let mut min_gap = f64::INFINITY;
    for _ in 0..trials {
        let p = BumpPerturbation {
            amplitude: rng.gen_range(0.05..0.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 },
            height: rng.gen_range(0.5..3.0),
            shape: random_field(lattice, rng, 2.0, 1.0),
        };
        min_gap = min_gap.min(trace_inequality_check(&v, &p, cfg)?.gap);
    }
    Ok(TraceGapReport { min_gap, zero_gap })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormBoundsReport {
    pub h: usize,
    /// Min over samples in `𝕍_h` of both sandwich slacks, per unit `L²` norm.
    pub sandwich_slack: f64,
    /// Min over samples in `𝕍_h⊥` of `‖v‖²/κ_s − λ_{h+1}|Tr v|²`, per unit `L²` norm.
    pub complement_slack: f64,
}

/// `κ_s m^{2s}|Tr v|² ≤ ‖v‖² ≤ κ_s λ_h|Tr v|²` on `𝕍_h` and
/// `λ_{h+1}|Tr v|² ≤ ‖v‖²/κ_s` on `𝕍_h⊥`, with `‖v‖²` from the extension.
pub fn norm_bounds_check<R: Rng + ?Sized>(
    lattice: &Arc<ModeLattice>,
    cfg: &TorusConfig,
    table: &SpectrumTable,
    h: usize,
    samples: usize,
    rng: &mut R,
) -> Result<NormBoundsReport> {
    let kappa = cfg.kappa();
    let lambda1 = cfg.symbol(0);
    let lambda_h = table
        .lambda(h)
        .ok_or(crate::Error::Parameter(format!("rank {h} beyond table")))?;
    let lambda_next = table.lambda(h + 1).ok_or(crate::Error::Parameter(format!(
        "rank {} beyond table",
        h + 1
    )))?;
    let basis: Vec<_> = real_basis(lattice, &table.entries)?
        .into_iter()
        .take(h)
        .collect();
    let split = EigenspaceSplit::new(lattice, table, h)?;
    let mut sandwich_slack = f64::INFINITY;
    let mut complement_slack = f64::INFINITY;
    for _ in 0..samples {
        let mut v = FourierField::zeros(lattice);
        for m in &basis {
            v.axpy(rng.gen_range(-1.0..1.0), &m.field);
        }
        let n2 = v.norm_sq();
        if n2 > 0.0 {
            let e = cylinder_energy(&extend(&v, cfg)?, cfg)?;
            let lower = (e - kappa * lambda1 * n2) / n2;
            let upper = (kappa * lambda_h * n2 - e) / n2;
            sandwich_slack = sandwich_slack.min(lower.min(upper));
        }
        let w = split.project(&random_field(lattice, rng, 1.0, 1.0), Subspace::VhPerp);
        let n2 = w.norm_sq();
        if n2 > 0.0 {
            let e = cylinder_energy(&extend(&w, cfg)?, cfg)?;
            complement_slack = complement_slack.min((e / kappa - lambda_next * n2) / n2);
        }
    }
    Ok(NormBoundsReport {
        h,
        sandwich_slack,
        complement_slack,
    })
}

/// Max over samples of `|𝒥(u) − 𝒥(−u)|`; zero when `f` is odd.
pub fn evenness_defect<R: Rng + ?Sized>(
    lattice: &Arc<ModeLattice>,
    nl: &crate::nonlinearity::Nonlinearity,
    cfg: &TorusConfig,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let norm = 2.0 * PI * rng.gen_range(0.1..3.0);
        let u = random_field(lattice, rng, 1.0, norm);
        worst = worst.max((energy(&u, nl, cfg)? - energy(&u.scaled(-1.0), nl, cfg)?).abs());
    }
    Ok(worst)
}

/// Max `|analyze(synthesize(u)) − u|` and Parseval defect over random fields.
pub fn transform_defects<R: Rng + ?Sized>(
    lattice: &Arc<ModeLattice>,
    trials: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let mut roundtrip = 0.0f64;
    let mut parseval = 0.0f64;
    let cell: f64 = lattice.period().powi(lattice.dim() as i32) / lattice.grid_len() as f64;
    for _ in 0..trials {
        let u = random_field(lattice, rng, 1.0, 1.0);
        let grid = synthesize(&u);
        let back = analyze(&grid, lattice)?;
        let err = back
            .coeffs()
            .iter()
            .zip(u.coeffs())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        roundtrip = roundtrip.max(err);
        let quad: f64 = grid.values.iter().map(|v| v * v).sum::<f64>() * cell;
        parseval = parseval.max((quad - u.norm_sq()).abs() / u.norm_sq());
    }
    Ok((roundtrip, parseval))
}
