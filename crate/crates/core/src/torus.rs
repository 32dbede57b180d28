//! Truncated Fourier representation of T-periodic functions on `(0,T)^N`.
//!
//! Coefficients are taken against the orthonormal basis `e^{iωk·x}/√(T^N)`,
//! so `|u|_{L²}² = Σ|β_k|²` holds without weights.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::fft;

/// Problem parameters and the constants derived from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusConfig {
    period: f64,
    dim: usize,
    mass: f64,
    order: f64,
    lambda_inf: f64,
    omega: f64,
    kappa: f64,
    critical_exponent: f64,
}

impl TorusConfig {
    pub fn new(period: f64, dim: usize, mass: f64, order: f64, lambda_inf: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::Parameter(format!(
                "period must be positive, got {period}"
            )));
        }
        if dim == 0 {
            return Err(Error::Parameter("dimension must be at least 1".into()));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Parameter(format!(
                "mass must be positive, got {mass}"
            )));
        }
        if !(order > 0.0 && order < 1.0) {
            return Err(Error::Parameter(format!(
                "order s must lie in (0,1), got {order}"
            )));
        }
        if !lambda_inf.is_finite() {
            return Err(Error::Parameter("lambda_inf must be finite".into()));
        }
        let n = dim as f64;
        let critical_exponent = if n > 2.0 * order {
            2.0 * n / (n - 2.0 * order)
        } else {
            f64::INFINITY
        };
        Ok(TorusConfig {
            period,
            dim,
            mass,
            order,
            lambda_inf,
            omega: 2.0 * PI / period,
            kappa: extension_constant(order),
            critical_exponent,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn mass(&self) -> f64 {
        self.mass
    }
    /// Fractional order `s`.
    pub fn order(&self) -> f64 {
        self.order
    }
    pub fn lambda_inf(&self) -> f64 {
        self.lambda_inf
    }
    /// `ω = 2π/T`.
    pub fn omega(&self) -> f64 {
        self.omega
    }
    /// `κ_s = 2^{1−2s} Γ(1−s)/Γ(s)`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    /// `2N/(N−2s)`, infinite when `N ≤ 2s`.
    pub fn critical_exponent(&self) -> f64 {
        self.critical_exponent
    }

    /// Same torus with a different shift `λ∞`.
    pub fn with_lambda_inf(&self, lambda_inf: f64) -> Result<Self> {
        TorusConfig::new(self.period, self.dim, self.mass, self.order, lambda_inf)
    }

    /// `μ = ω²|k|² + m²` for an integer squared radius `|k|²`.
    pub fn mu(&self, k_sq: u64) -> f64 {
        self.omega * self.omega * k_sq as f64 + self.mass * self.mass
    }

    /// Operator symbol `(ω²|k|² + m²)^s`.
    pub fn symbol(&self, k_sq: u64) -> f64 {
        self.mu(k_sq).powf(self.order)
    }
}

/// `κ_s = 2^{1−2s} Γ(1−s)/Γ(s)`.
pub fn extension_constant(s: f64) -> f64 {
    if s == 0.5 {
        return 1.0;
    }
    2f64.powf(1.0 - 2.0 * s) * gamma(1.0 - s) / gamma(s)
}

/// Rectangular truncation `{k : |k_i| ≤ M_i}` of `ℤ^N` with its collocation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeLattice {
    period: f64,
    half_extents: Vec<usize>,
    grid_sizes: Vec<usize>,
    // flat row-major list of modes, `dim` entries each
    modes: Vec<i64>,
    k_sq: Vec<u64>,
}

impl ModeLattice {
    pub fn new(period: f64, half_extents: Vec<usize>, grid_sizes: Vec<usize>) -> Result<Self> {
        if half_extents.is_empty() {
            return Err(Error::Parameter(
                "lattice needs at least one dimension".into(),
            ));
        }
        if half_extents.len() != grid_sizes.len() {
            return Err(Error::Shape {
                expected: vec![half_extents.len()],
                got: vec![grid_sizes.len()],
            });
        }
        if !(period > 0.0) {
            return Err(Error::Parameter(format!(
                "period must be positive, got {period}"
            )));
        }
        for (i, (&m, &n)) in half_extents.iter().zip(&grid_sizes).enumerate() {
            if m == 0 {
                return Err(Error::Parameter(format!(
                    "cutoff in dimension {i} must be ≥ 1"
                )));
            }
            if n < 2 * m + 1 {
                return Err(Error::Parameter(format!(
                    "grid size {n} in dimension {i} aliases cutoff {m}; need ≥ {}",
                    2 * m + 1
                )));
            }
        }
        let dim = half_extents.len();
        let count: usize = half_extents.iter().map(|m| 2 * m + 1).product();
        let mut modes = Vec::with_capacity(count * dim);
        let mut k_sq = Vec::with_capacity(count);
        let mut k = vec![0i64; dim];
        for flat in 0..count {
            let mut rem = flat;
            for axis in (0..dim).rev() {
                let width = 2 * half_extents[axis] + 1;
                k[axis] = (rem % width) as i64 - half_extents[axis] as i64;
                rem /= width;
            }
            modes.extend_from_slice(&k);
            k_sq.push(k.iter().map(|&c| (c * c) as u64).sum());
        }
        Ok(ModeLattice {
            period,
            half_extents,
            grid_sizes,
            modes,
            k_sq,
        })
    }

    /// Cubic lattice with cutoff `m` and grid `n` in each of `dim` dimensions.
    pub fn cubic(period: f64, dim: usize, cutoff: usize, grid: usize) -> Result<Self> {
        ModeLattice::new(period, vec![cutoff; dim], vec![grid; dim])
    }

    pub fn period(&self) -> f64 {
        self.period
    }
    pub fn dim(&self) -> usize {
        self.half_extents.len()
    }
    pub fn half_extents(&self) -> &[usize] {
        &self.half_extents
    }
    pub fn grid_sizes(&self) -> &[usize] {
        &self.grid_sizes
    }
    pub fn len(&self) -> usize {
        self.k_sq.len()
    }
    pub fn is_empty(&self) -> bool {
        self.k_sq.is_empty()
    }
    pub fn mode(&self, index: usize) -> &[i64] {
        let d = self.dim();
        &self.modes[index * d..(index + 1) * d]
    }
    /// Integer `|k|²` of the mode at `index`.
    pub fn k_sq(&self, index: usize) -> u64 {
        self.k_sq[index]
    }
    pub fn k_sq_all(&self) -> &[u64] {
        &self.k_sq
    }
    /// Index of `−k` given the index of `k`.
    pub fn negated(&self, index: usize) -> usize {
        self.len() - 1 - index
    }
    pub fn zero_index(&self) -> usize {
        self.len() / 2
    }
    /// Index of a mode, if it lies in the truncation.
    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dim() {
            return None;
        }
        let mut flat = 0usize;
        for (axis, &c) in k.iter().enumerate() {
            let m = self.half_extents[axis] as i64;
            if c.abs() > m {
                return None;
            }
            flat = flat * (2 * m as usize + 1) + (c + m) as usize;
        }
        Some(flat)
    }
    /// Largest `|k|²` such that every lattice point of that radius is in the truncation.
    pub fn certified_k_sq(&self) -> u64 {
        let m = *self.half_extents.iter().min().unwrap() as u64;
        m * m
    }
    /// Same modes with a different collocation grid.
    pub fn with_grid(&self, grid_sizes: Vec<usize>) -> Result<Self> {
        ModeLattice::new(self.period, self.half_extents.clone(), grid_sizes)
    }
    pub fn grid_len(&self) -> usize {
        self.grid_sizes.iter().product()
    }

    fn check_sizes(&self, sizes: &[usize]) -> Result<()> {
        if sizes.len() != self.dim()
            || sizes
                .iter()
                .zip(&self.half_extents)
                .any(|(&n, &m)| n < 2 * m + 1)
        {
            return Err(Error::Shape {
                expected: self.grid_sizes.clone(),
                got: sizes.to_vec(),
            });
        }
        Ok(())
    }

    // flat grid index holding mode `index` in a DFT of the given sizes
    fn grid_slot(&self, index: usize, sizes: &[usize]) -> usize {
        let mut flat = 0usize;
        for (axis, &c) in self.mode(index).iter().enumerate() {
            let n = sizes[axis] as i64;
            flat = flat * sizes[axis] + c.rem_euclid(n) as usize;
        }
        flat
    }
}

/// Real samples on a uniform row-major grid, nodes `x_j = j·T/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub sizes: Vec<usize>,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn new(sizes: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let total: usize = sizes.iter().product();
        if total != values.len() {
            return Err(Error::Shape {
                expected: vec![total],
                got: vec![values.len()],
            });
        }
        Ok(GridField { sizes, values })
    }

    /// Samples `g(x)` at every node of a grid of the given sizes.
    pub fn from_fn(sizes: &[usize], period: f64, mut g: impl FnMut(&[f64]) -> f64) -> Self {
        let total: usize = sizes.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut x = vec![0.0; sizes.len()];
        for flat in 0..total {
            grid_point(flat, sizes, period, &mut x);
            values.push(g(&x));
        }
        GridField {
            sizes: sizes.to_vec(),
            values,
        }
    }

    pub fn max_abs_diff(&self, other: &GridField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Coordinates of grid node `flat` written into `x`.
pub fn grid_point(flat: usize, sizes: &[usize], period: f64, x: &mut [f64]) {
    let mut rem = flat;
    for axis in (0..sizes.len()).rev() {
        let n = sizes[axis];
        x[axis] = (rem % n) as f64 * period / n as f64;
        rem /= n;
    }
}

/// A periodic function as truncated Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierField {
    lattice: Arc<ModeLattice>,
    coeffs: Vec<Complex64>,
    is_real: bool,
}

impl FourierField {
    pub fn zeros(lattice: &Arc<ModeLattice>) -> Self {
        FourierField {
            lattice: Arc::clone(lattice),
            coeffs: vec![Complex64::new(0.0, 0.0); lattice.len()],
            is_real: true,
        }
    }

    /// Wraps coefficients; `is_real` is set when they are Hermitian symmetric.
    pub fn from_coeffs(lattice: &Arc<ModeLattice>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != lattice.len() {
            return Err(Error::Shape {
                expected: vec![lattice.len()],
                got: vec![coeffs.len()],
            });
        }
        let mut field = FourierField {
            lattice: Arc::clone(lattice),
            coeffs,
            is_real: false,
        };
        field.is_real = field.hermitian_defect() == 0.0;
        Ok(field)
    }

    /// The field `c` (constant function).
    pub fn constant(lattice: &Arc<ModeLattice>, c: f64) -> Self {
        let mut f = FourierField::zeros(lattice);
        let vol_sqrt = lattice.period().powf(lattice.dim() as f64 / 2.0);
        f.coeffs[lattice.zero_index()] = Complex64::new(c * vol_sqrt, 0.0);
        f
    }

    /// Random real field with coefficient magnitudes damped by `(1+|k|²)^{-decay/2}`.
    pub fn random_real<R: Rng + ?Sized>(
        lattice: &Arc<ModeLattice>,
        rng: &mut R,
        decay: f64,
    ) -> Self {
        let mut f = FourierField::zeros(lattice);
        let zero = lattice.zero_index();
        for i in 0..=zero {
            let damp = (1.0 + lattice.k_sq(i) as f64).powf(-decay / 2.0);
            let re = rng.gen_range(-1.0..1.0) * damp;
            if i == zero {
                f.coeffs[i] = Complex64::new(re, 0.0);
            } else {
                let im = rng.gen_range(-1.0..1.0) * damp;
                f.coeffs[i] = Complex64::new(re, im);
                f.coeffs[lattice.negated(i)] = Complex64::new(re, -im);
            }
        }
        f
    }

    pub fn lattice(&self) -> &Arc<ModeLattice> {
        &self.lattice
    }
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        self.is_real = false;
        &mut self.coeffs
    }
    pub fn is_real(&self) -> bool {
        self.is_real
    }
    pub fn coeff(&self, k: &[i64]) -> Option<Complex64> {
        self.lattice.index_of(k).map(|i| self.coeffs[i])
    }

    /// `max_k |β_{−k} − conj(β_k)|`.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| (self.coeffs[self.lattice.negated(i)] - self.coeffs[i].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Projects onto Hermitian-symmetric coefficients and marks the field real.
    pub fn make_real(&mut self) {
        let n = self.coeffs.len();
        for i in 0..=n / 2 {
            let j = self.lattice.negated(i);
            let avg = 0.5 * (self.coeffs[i] + self.coeffs[j].conj());
            self.coeffs[i] = avg;
            self.coeffs[j] = avg.conj();
        }
        self.is_real = true;
    }

    pub fn same_lattice(&self, other: &FourierField) -> bool {
        Arc::ptr_eq(&self.lattice, &other.lattice) || *self.lattice == *other.lattice
    }

    /// Real `L²` inner product `Re Σ conj(a_k) b_k`.
    pub fn dot(&self, other: &FourierField) -> f64 {
        debug_assert!(self.same_lattice(other));
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn scaled(&self, factor: f64) -> FourierField {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= factor);
        out
    }

    /// `self ← self + alpha·other`.
    pub fn axpy(&mut self, alpha: f64, other: &FourierField) {
        debug_assert!(self.same_lattice(other));
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * alpha;
        }
        self.is_real &= other.is_real;
    }

    pub fn add(&self, other: &FourierField) -> FourierField {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &FourierField) -> FourierField {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Multiplies every coefficient by `weight(|k|²)`.
    pub fn map_symbol(&self, weight: impl Fn(u64) -> f64) -> FourierField {
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            *c *= weight(self.lattice.k_sq(i));
        }
        out
    }

    /// Copies coefficients into another lattice, dropping modes it does not contain.
    pub fn embed(&self, target: &Arc<ModeLattice>) -> Result<FourierField> {
        if target.dim() != self.lattice.dim() {
            return Err(Error::Shape {
                expected: vec![self.lattice.dim()],
                got: vec![target.dim()],
            });
        }
        let mut out = FourierField::zeros(target);
        for i in 0..self.lattice.len() {
            if let Some(j) = target.index_of(self.lattice.mode(i)) {
                out.coeffs[j] = self.coeffs[i];
            }
        }
        out.is_real = self.is_real;
        Ok(out)
    }
}

/// Fourier coefficients of grid samples on the lattice's own grid.
pub fn analyze(samples: &GridField, lattice: &Arc<ModeLattice>) -> Result<FourierField> {
    if samples.sizes != lattice.grid_sizes {
        return Err(Error::Shape {
            expected: lattice.grid_sizes.clone(),
            got: samples.sizes.clone(),
        });
    }
    analyze_grid(samples, lattice)
}

/// Like [`analyze`] for any grid fine enough to resolve the lattice without aliasing.
///
/// Grid modes outside the lattice are discarded.
pub fn analyze_grid(samples: &GridField, lattice: &Arc<ModeLattice>) -> Result<FourierField> {
    lattice.check_sizes(&samples.sizes)?;
    let mut buf: Vec<Complex64> = samples
        .values
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    fft::transform(&mut buf, &samples.sizes, FftDirection::Forward);
    let points: usize = samples.sizes.iter().product();
    let scale = lattice.period.powf(lattice.dim() as f64 / 2.0) / points as f64;
    let mut out = FourierField::zeros(lattice);
    for i in 0..lattice.len() {
        out.coeffs[i] = buf[lattice.grid_slot(i, &samples.sizes)] * scale;
    }
    out.make_real();
    Ok(out)
}

/// Evaluates the series at the nodes of the lattice's grid.
pub fn synthesize(field: &FourierField) -> GridField {
    let sizes = field.lattice.grid_sizes.clone();
    synthesize_grid(field, &sizes).expect("lattice grid is always admissible")
}

/// Evaluates the real part of the series on a grid of the given sizes.
pub fn synthesize_grid(field: &FourierField, sizes: &[usize]) -> Result<GridField> {
    let values = synthesize_complex(field, sizes)?
        .into_iter()
        .map(|c| c.re)
        .collect();
    Ok(GridField {
        sizes: sizes.to_vec(),
        values,
    })
}

/// Complex-valued evaluation, for fields that are not Hermitian symmetric.
pub fn synthesize_complex(field: &FourierField, sizes: &[usize]) -> Result<Vec<Complex64>> {
    let lattice = &field.lattice;
    lattice.check_sizes(sizes)?;
    let total: usize = sizes.iter().product();
    let mut buf = vec![Complex64::new(0.0, 0.0); total];
    for (i, c) in field.coeffs.iter().enumerate() {
        buf[lattice.grid_slot(i, sizes)] = *c;
    }
    fft::transform(&mut buf, sizes, FftDirection::Inverse);
    let scale = lattice.period.powf(-(lattice.dim() as f64) / 2.0);
    buf.iter_mut().for_each(|c| *c *= scale);
    Ok(buf)
}

/// `|u|_{L²(0,T)^N} = √Σ|β_k|²`.
pub fn l2_norm(field: &FourierField) -> f64 {
    field.norm_sq().sqrt()
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lattice2(m: usize, n: usize) -> Arc<ModeLattice> {
        Arc::new(ModeLattice::cubic(2.0 * PI, 2, m, n).unwrap())
    }

    #[test]
    fn config_constants() {
        let cfg = TorusConfig::new(2.0 * PI, 2, 1.0, 0.5, 2.0).unwrap();
        assert_eq!(cfg.kappa(), 1.0);
        assert!((cfg.omega() * cfg.period() - 2.0 * PI).abs() < 1e-15);
        assert!((cfg.critical_exponent() - 4.0 / 1.0).abs() < 1e-15);
        let cfg = TorusConfig::new(3.0, 3, 1.0, 0.25, 0.0).unwrap();
        assert!((cfg.critical_exponent() - 6.0 / 2.5).abs() < 1e-15);
        // κ_s = 2^{1-2s} Γ(1-s)/Γ(s) at s = 1/4: √2 Γ(3/4)/Γ(1/4)
        let expected = 2f64.sqrt() * 1.2254167024651776 / 3.6256099082219083;
        assert!((cfg.kappa() - expected).abs() < 1e-14);
    }

    #[test]
    fn config_rejects_bad_parameters() {
        assert!(TorusConfig::new(0.0, 2, 1.0, 0.5, 0.0).is_err());
        assert!(TorusConfig::new(1.0, 2, 0.0, 0.5, 0.0).is_err());
        assert!(TorusConfig::new(1.0, 2, 1.0, 1.0, 0.0).is_err());
        assert!(TorusConfig::new(1.0, 2, 1.0, 0.0, 0.0).is_err());
        assert!(TorusConfig::new(1.0, 0, 1.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn lattice_negation_and_aliasing() {
        let lat = ModeLattice::new(1.0, vec![2, 3], vec![5, 8]).unwrap();
        for i in 0..lat.len() {
            let neg: Vec<i64> = lat.mode(i).iter().map(|c| -c).collect();
            assert_eq!(lat.index_of(&neg), Some(lat.negated(i)));
        }
        assert_eq!(lat.mode(lat.zero_index()), &[0, 0]);
        assert!(ModeLattice::new(1.0, vec![2], vec![4]).is_err());
    }

    #[test]
    fn constant_analyzes_to_zero_mode() {
        let lat = lattice2(3, 8);
        let u = GridField::new(vec![8, 8], vec![1.0; 64]).unwrap();
        let f = analyze(&u, &lat).unwrap();
        let vol_sqrt = 2.0 * PI;
        for (i, c) in f.coeffs().iter().enumerate() {
            let expect = if i == lat.zero_index() { vol_sqrt } else { 0.0 };
            assert!((c - Complex64::new(expect, 0.0)).norm() < 1e-13);
        }
        assert!((l2_norm(&f) - 2.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn cosine_analyzes_to_pair() {
        let lat = lattice2(3, 8);
        let u = GridField::from_fn(&[8, 8], 2.0 * PI, |x| x[0].cos());
        let f = analyze(&u, &lat).unwrap();
        let half = 2.0 * PI / 2.0;
        assert!((f.coeff(&[1, 0]).unwrap() - half).norm() < 1e-13);
        assert!((f.coeff(&[-1, 0]).unwrap() - half).norm() < 1e-13);
        let rest: f64 = f.norm_sq() - 2.0 * half * half;
        assert!(rest.abs() < 1e-12);
        assert!((l2_norm(&f) - (2.0 * PI * PI).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn analyze_matches_direct_dft() {
        let lat = lattice2(3, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = GridField::from_fn(&[8, 8], 2.0 * PI, |_| rng.gen_range(-1.0..1.0));
        let f = analyze(&u, &lat).unwrap();
        // brute-force O(n²) sum of β_k = T^{-N/2} Σ u_j e^{-iωk·x_j} ΔV
        let dv = (2.0 * PI / 8.0).powi(2);
        let mut x = [0.0; 2];
        for i in 0..lat.len() {
            let k = lat.mode(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..64 {
                grid_point(j, &[8, 8], 2.0 * PI, &mut x);
                let phase = -(k[0] as f64 * x[0] + k[1] as f64 * x[1]);
                acc += Complex64::from_polar(u.values[j], phase);
            }
            acc *= dv / (2.0 * PI);
            assert!((acc - f.coeffs()[i]).norm() < 1e-12, "mode {k:?}");
        }
    }

    #[test]
    fn synthesize_constant_mode() {
        let lat = lattice2(2, 6);
        let f = FourierField::constant(&lat, 1.0);
        let g = synthesize(&f);
        assert!(g.values.iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn hermitian_coefficients_synthesize_real() {
        let lat = lattice2(4, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = FourierField::random_real(&lat, &mut rng, 0.0);
        let vals = synthesize_complex(&f, &[10, 10]).unwrap();
        assert!(vals.iter().all(|c| c.im.abs() < 1e-12));
    }

    #[test]
    fn shape_errors() {
        let lat = lattice2(2, 6);
        let u = GridField::new(vec![5, 6], vec![0.0; 30]).unwrap();
        assert!(matches!(analyze(&u, &lat), Err(Error::Shape { .. })));
        assert!(GridField::new(vec![2, 2], vec![0.0; 3]).is_err());
    }

    #[test]
    fn l2_matches_grid_quadrature() {
        let lat = lattice2(4, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = FourierField::random_real(&lat, &mut rng, 1.0);
        let g = synthesize(&f);
        let dv = (2.0 * PI / 12.0).powi(2);
        let quad = (g.values.iter().map(|v| v * v).sum::<f64>() * dv).sqrt();
        assert!((quad - l2_norm(&f)).abs() < 1e-10 * quad);
    }
}
