//! s-harmonic extension of torus functions into the half-cylinder
//! `(0,T)^N × (0,∞)` with weight `y^{1−2s}`.
//!
//! Each Fourier mode extends as `β_k θ(√μ_k y)`, where `θ` solves
//! `θ″ + ((1−2s)/y)θ′ − θ = 0`, `θ(0) = 1`, `θ(∞) = 0`. In closed form
//! `θ(y) = (2^{1−s}/Γ(s)) y^s K_s(y)`, and `−y^{1−2s}θ′(y) = (2^{1−s}/Γ(s)) y^{1−s} K_{1−s}(y)`,
//! whose limit at `y = 0` is `κ_s`.

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::bessel::bessel_k;
use crate::error::{Error, Result};
use crate::operator::{check_compatible, hs_norm_sq_unchecked, Sobolev};
use crate::quadrature::{log_trapezoid, tanh_sinh};
use crate::torus::{synthesize_grid, FourierField, GridField, TorusConfig};

/// Beyond this argument `θ` is below `1e−16` for every order.
const THETA_CUTOFF: f64 = 45.0;

/// Where the ODE fallback hands over from the Frobenius series to the integrator.
const FROBENIUS_START: f64 = 0.5;
const RK_STEP: f64 = 1e-3;

/// The profile `θ` for a fixed order `s`.
#[derive(Debug, Clone)]
pub struct ThetaProfile {
    s: f64,
    // 2^{1−s}/Γ(s)
    norm: f64,
    kappa: f64,
    energy: OnceLock<f64>,
}

pub fn theta_profile(s: f64) -> Result<ThetaProfile> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Parameter(format!(
            "order s must lie in (0,1), got {s}"
        )));
    }
    Ok(ThetaProfile {
        s,
        norm: 2f64.powf(1.0 - s) / gamma(s),
        kappa: crate::torus::extension_constant(s),
        energy: OnceLock::new(),
    })
}

impl ThetaProfile {
    pub fn order(&self) -> f64 {
        self.s
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `θ(y)`, with `θ(0) = 1`.
    pub fn value(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 1.0;
        }
        if self.s == 0.5 {
            return (-y).exp();
        }
        if y > 700.0 {
            return 0.0;
        }
        self.norm * y.powf(self.s) * bessel_k(self.s, y)
    }

    /// `θ′(y)` for `y > 0`.
    pub fn derivative(&self, y: f64) -> f64 {
        if self.s == 0.5 {
            return -(-y).exp();
        }
        if y > 700.0 {
            return 0.0;
        }
        -self.norm * y.powf(self.s) * bessel_k(1.0 - self.s, y)
    }

    /// Conormal flux `−y^{1−2s}θ′(y)`, tending to `κ_s` as `y → 0⁺`.
    pub fn flux(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return self.kappa;
        }
        if self.s == 0.5 {
            return (-y).exp();
        }
        if y > 700.0 {
            return 0.0;
        }
        self.norm * y.powf(1.0 - self.s) * bessel_k(1.0 - self.s, y)
    }

    /// `∫_0^∞ t^{1−2s}(θ′(t)² + θ(t)²) dt`, which integration by parts identifies with `κ_s`.
    pub fn energy_integral(&self) -> f64 {
        *self.energy.get_or_init(|| {
            let s = self.s;
            // in τ = ln t the integrand decays like t^{2s} at the left end
            let tau_lo = -(40.0 / (2.0 * s).min(2.0 - 2.0 * s)) - 2.0;
            log_trapezoid(
                |t| {
                    // t^{1−2s}θ′² written through the flux to stay finite near 0
                    let f = self.flux(t);
                    let v = self.value(t);
                    f * f * t.powf(2.0 * s - 1.0) + t.powf(1.0 - 2.0 * s) * v * v
                },
                tau_lo,
                THETA_CUTOFF.ln(),
                1.0 / 32.0,
            )
        })
    }

    /// `(θ, θ′)` from the Frobenius expansion at 0 continued by a fourth-order
    /// Runge–Kutta integration of the ODE. Forward integration amplifies errors
    /// like `e^{2y}`, so this is meant for `y ≲ 10`.
    pub fn value_ode(&self, y: f64) -> (f64, f64) {
        if y <= FROBENIUS_START {
            return frobenius(self.s, y);
        }
        let s = self.s;
        let rhs =
            |t: f64, th: f64, dth: f64| -> (f64, f64) { (dth, th - (1.0 - 2.0 * s) / t * dth) };
        let (mut th, mut dth) = frobenius(s, FROBENIUS_START);
        let mut t = FROBENIUS_START;
        let steps = ((y - t) / RK_STEP).ceil() as usize;
        let h = (y - t) / steps as f64;
        for _ in 0..steps {
            let (k1a, k1b) = rhs(t, th, dth);
            let (k2a, k2b) = rhs(t + 0.5 * h, th + 0.5 * h * k1a, dth + 0.5 * h * k1b);
            let (k3a, k3b) = rhs(t + 0.5 * h, th + 0.5 * h * k2a, dth + 0.5 * h * k2b);
            let (k4a, k4b) = rhs(t + h, th + h * k3a, dth + h * k3b);
            th += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
            dth += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
            t += h;
        }
        (th, dth)
    }
}

/// `(θ(y), θ′(y))` from the two Frobenius series
/// `θ = Γ(1−s) Σ (y/2)^{2j}/(j!Γ(j+1−s)) − 4^{−s}Γ(1−s)/Γ(1+s)·y^{2s} Σ (y/2)^{2j}Γ(1+s)/(j!Γ(j+1+s))`.
fn frobenius(s: f64, y: f64) -> (f64, f64) {
    let q = 0.25 * y * y;
    let b0 = 4f64.powf(-s) * gamma(1.0 - s) / gamma(1.0 + s);
    let mut a_term = 1.0;
    let mut b_term = 1.0;
    let (mut a_sum, mut b_sum) = (1.0, 1.0);
    // derivative sums: d/dy of (y/2)^{2j} is j·y^{2j−1}/2^{2j−1}
    let (mut da_sum, mut db_sum) = (0.0, 0.0);
    for j in 1..200 {
        let fj = j as f64;
        a_term *= q / (fj * (fj - s));
        b_term *= q / (fj * (fj + s));
        a_sum += a_term;
        b_sum += b_term;
        da_sum += a_term * 2.0 * fj / y;
        db_sum += b_term * (2.0 * fj + 2.0 * s) / y;
        if a_term.abs() < 1e-18 * a_sum.abs() && b_term.abs() < 1e-18 * b_sum.abs() {
            break;
        }
    }
    let y2s = y.powf(2.0 * s);
    let value = a_sum - b0 * y2s * b_sum;
    // d/dy [y^{2s} B(y)] = Σ_j b_j (2j+2s) y^{2j+2s−1}
    let deriv = da_sum - b0 * y2s * (2.0 * s / y + db_sum);
    (value, deriv)
}

/// The extension `v(x,y) = Σ β_k θ(√μ_k y) e^{iωk·x}/√T^N` of a trace `u`.
#[derive(Debug, Clone)]
pub struct ExtendedField {
    base: FourierField,
    cfg: TorusConfig,
    profile: Arc<ThetaProfile>,
    sqrt_mu: Vec<f64>,
}

pub fn extend(u: &FourierField, cfg: &TorusConfig) -> Result<ExtendedField> {
    check_compatible(u, cfg)?;
    if !u.is_real() {
        return Err(Error::Parameter("extension needs a real trace".into()));
    }
    let profile = Arc::new(theta_profile(cfg.order())?);
    let lat = u.lattice();
    let sqrt_mu = (0..lat.len()).map(|i| cfg.mu(lat.k_sq(i)).sqrt()).collect();
    Ok(ExtendedField {
        base: u.clone(),
        cfg: cfg.clone(),
        profile,
        sqrt_mu,
    })
}

impl ExtendedField {
    /// `Tr v`.
    pub fn trace(&self) -> &FourierField {
        &self.base
    }

    pub fn profile(&self) -> &ThetaProfile {
        &self.profile
    }

    pub fn config(&self) -> &TorusConfig {
        &self.cfg
    }

    /// `θ_k(y) = θ(√μ_k y)` for the mode at lattice index `i`.
    pub fn theta_k(&self, i: usize, y: f64) -> f64 {
        self.profile.value(self.sqrt_mu[i] * y)
    }

    fn map_modes(&self, g: impl Fn(usize, f64) -> f64) -> FourierField {
        let lat = self.base.lattice();
        // modes with equal |k|² share the profile value
        let mut cache: std::collections::HashMap<u64, f64> = Default::default();
        let coeffs: Vec<Complex64> = self
            .base
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let factor = *cache
                    .entry(lat.k_sq(i))
                    .or_insert_with(|| g(i, self.sqrt_mu[i]));
                c * factor
            })
            .collect();
        let mut out = FourierField::from_coeffs(lat, coeffs).expect("same lattice");
        out.make_real();
        out
    }

    /// Fourier coefficients of `v(·, y)`.
    pub fn slice(&self, y: f64) -> FourierField {
        self.map_modes(|_, r| self.profile.value(r * y))
    }

    /// Fourier coefficients of `∂_y v(·, y)`.
    pub fn slice_dy(&self, y: f64) -> FourierField {
        self.map_modes(|_, r| r * self.profile.derivative(r * y))
    }

    /// Samples `v` on the lattice grid at each height in `y_nodes`.
    pub fn sample(&self, y_nodes: &[f64]) -> Vec<GridField> {
        let sizes = self.base.lattice().grid_sizes().to_vec();
        y_nodes
            .iter()
            .map(|&y| synthesize_grid(&self.slice(y), &sizes).expect("lattice grid"))
            .collect()
    }
}

/// `‖v‖²_{𝕏^s_T} = ∬ y^{1−2s}(|∇v|² + m²v²)`, computed mode by mode as
/// `Σ |β_k|² ∫ y^{1−2s}(θ_k′² + μ_k θ_k²) dy = Σ |β_k|² μ_k^s ∫ t^{1−2s}(θ′² + θ²) dt`.
pub fn cylinder_energy(v: &ExtendedField, cfg: &TorusConfig) -> Result<f64> {
    check_compatible(&v.base, cfg)?;
    let per_unit = v.profile.energy_integral();
    let weighted = hs_norm_sq_unchecked(&v.base, cfg, Sobolev::Positive);
    Ok(per_unit * weighted)
}

/// Dyadic heights `2^{−1}, …, 2^{−count}`.
pub fn dyadic_heights(count: usize) -> Vec<f64> {
    (1..=count).map(|j| 2f64.powi(-(j as i32))).collect()
}

/// `−lim_{y→0⁺} y^{1−2s} ∂_y v`, by two-term Richardson extrapolation over the
/// last two heights of a decreasing sequence.
///
/// The leading correction to `−y^{1−2s}∂_y v` is proportional to `y^{2−2s}`.
pub fn conormal_derivative(
    v: &ExtendedField,
    cfg: &TorusConfig,
    y_sequence: &[f64],
) -> Result<FourierField> {
    check_compatible(&v.base, cfg)?;
    if y_sequence.len() < 2 {
        return Err(Error::Parameter("need at least two heights".into()));
    }
    if y_sequence.iter().any(|&y| !(y > 0.0)) || y_sequence.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Parameter(
            "heights must be positive and strictly decreasing".into(),
        ));
    }
    let y_coarse = y_sequence[y_sequence.len() - 2];
    let y_fine = y_sequence[y_sequence.len() - 1];
    let p = 2.0 - 2.0 * cfg.order();
    let rp = (y_coarse / y_fine).powf(p);
    let s = cfg.order();
    let profile = &v.profile;
    Ok(v.map_modes(|_, r| {
        // −y^{1−2s}∂_y θ(r y) = r^{2s} · flux(r y)
        let mu_s = r.powf(2.0 * s);
        let coarse = mu_s * profile.flux(r * y_coarse);
        let fine = mu_s * profile.flux(r * y_fine);
        (rp * fine - coarse) / (rp - 1.0)
    }))
}

/// Perturbation `A·b(y)·φ(x)` with `b(y) = 1 − cos(2πy/Y)` on `[0, Y]`, zero beyond.
#[derive(Debug, Clone)]
pub struct BumpPerturbation {
    pub amplitude: f64,
    pub height: f64,
    pub shape: FourierField,
}

impl BumpPerturbation {
    fn bump(&self, y: f64) -> (f64, f64) {
        if y >= self.height {
            return (0.0, 0.0);
        }
        let w = 2.0 * std::f64::consts::PI / self.height;
        (1.0 - (w * y).cos(), w * (w * y).sin())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceCheck {
    /// `κ_s |Tr z|²_{ℍ^s}`
    pub lhs: f64,
    /// `‖z‖²_{𝕏^s}`
    pub rhs: f64,
    pub gap: f64,
}

/// Compares both sides of the trace inequality for `z = v + A·b(y)·φ(x)`.
pub fn trace_inequality_check(
    v: &ExtendedField,
    perturbation: &BumpPerturbation,
    cfg: &TorusConfig,
) -> Result<TraceCheck> {
    check_compatible(&v.base, cfg)?;
    if !v.base.same_lattice(&perturbation.shape) {
        return Err(Error::Parameter(
            "perturbation lives on a different lattice".into(),
        ));
    }
    if !(perturbation.height > 0.0) {
        return Err(Error::Parameter("bump height must be positive".into()));
    }
    let s = cfg.order();
    let lat = v.base.lattice();
    let w = 1.0 - 2.0 * s;
    let tol = 1e-13;
    let big_y = perturbation.height;
    let a = perturbation.amplitude;

    let mut cross = 0.0;
    let mut bump_energy = 0.0;
    let mut cache: std::collections::HashMap<u64, (f64, f64)> = Default::default();
    for i in 0..lat.len() {
        let beta = v.base.coeffs()[i];
        let phi = perturbation.shape.coeffs()[i];
        if phi.norm_sqr() == 0.0 {
            continue;
        }
        let r = v.sqrt_mu[i];
        let mu = r * r;
        let (c_int, b_int) = *cache.entry(lat.k_sq(i)).or_insert_with(|| {
            let c_int = tanh_sinh(
                |y| {
                    let (b, db) = perturbation.bump(y);
                    let th = v.profile.value(r * y);
                    let dth = r * v.profile.derivative(r * y);
                    y.powf(w) * (dth * db + mu * th * b)
                },
                0.0,
                big_y,
                tol,
            );
            let b_int = tanh_sinh(
                |y| {
                    let (b, db) = perturbation.bump(y);
                    y.powf(w) * (db * db + mu * b * b)
                },
                0.0,
                big_y,
                tol,
            );
            (c_int, b_int)
        });
        cross += (beta.conj() * phi).re * c_int;
        bump_energy += phi.norm_sqr() * b_int;
    }
    let base_energy = cylinder_energy(v, cfg)?;
    let lhs = cfg.kappa() * hs_norm_sq_unchecked(&v.base, cfg, Sobolev::Positive);
    let rhs = base_energy + 2.0 * a * cross + a * a * bump_energy;
    Ok(TraceCheck {
        lhs,
        rhs,
        gap: rhs - lhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::apply_operator;
    use crate::torus::ModeLattice;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn rejects_bad_order() {
        assert!(theta_profile(0.0).is_err());
        assert!(theta_profile(1.0).is_err());
        assert!(theta_profile(f64::NAN).is_err());
    }

    #[test]
    fn half_order_is_exponential() {
        let p = theta_profile(0.5).unwrap();
        for i in 0..=200 {
            let y = 0.1 * i as f64;
            assert!((p.value(y) - (-y).exp()).abs() < 1e-15);
        }
        assert_eq!(p.flux(1e-12), (-1e-12f64).exp());
    }

    #[test]
    fn bessel_and_ode_evaluators_agree() {
        for &s in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            let p = theta_profile(s).unwrap();
            for &y in &[1e-4, 0.01, 0.2, 0.5, 1.0, 2.0, 3.5, 6.0] {
                let (v, d) = p.value_ode(y);
                let rel = |a: f64, b: f64| ((a - b) / b).abs();
                assert!(
                    rel(v, p.value(y)) < 1e-8,
                    "s={s} y={y}: {v} vs {}",
                    p.value(y)
                );
                assert!(
                    rel(d, p.derivative(y)) < 1e-8,
                    "s={s} y={y}: {d} vs {}",
                    p.derivative(y)
                );
            }
        }
    }

    #[test]
    fn profile_is_positive_decreasing_and_normalized() {
        for &s in &[0.05, 0.25, 0.75, 0.95] {
            let p = theta_profile(s).unwrap();
            let mut prev = 1.0;
            for j in -60..=17 {
                let y = 1.25f64.powi(j);
                let v = p.value(y);
                assert!(v > 0.0 && v < prev, "s={s} y={y}");
                assert!(p.derivative(y) < 0.0);
                prev = v;
            }
            // θ(y) = 1 − O(y^{2s}) near the base
            let y0 = 1e-8f64.powf(1.0 / (2.0 * s));
            assert!((p.value(y0) - 1.0).abs() < 1e-7);
            // conormal limit along a dyadic sequence
            let rp = 2f64.powf(2.0 - 2.0 * s);
            let (c, f) = (p.flux(2f64.powi(-19)), p.flux(2f64.powi(-20)));
            let lim = (rp * f - c) / (rp - 1.0);
            assert!((lim - p.kappa()).abs() < 1e-6 * p.kappa());
        }
    }

    #[test]
    fn energy_integral_equals_kappa() {
        for &s in &[0.05, 0.2, 0.5, 0.8, 0.95] {
            let p = theta_profile(s).unwrap();
            let e = p.energy_integral();
            assert!(
                (e / p.kappa() - 1.0).abs() < 1e-10,
                "s={s}: {e} vs {}",
                p.kappa()
            );
        }
    }

    fn fixture(s: f64) -> (TorusConfig, Arc<ModeLattice>) {
        let cfg = TorusConfig::new(2.0 * PI, 2, 1.0, s, 2.0).unwrap();
        let lat = Arc::new(ModeLattice::cubic(2.0 * PI, 2, 4, 10).unwrap());
        (cfg, lat)
    }

    #[test]
    fn constant_and_cosine_extensions() {
        let (cfg, lat) = fixture(0.5);
        let v = extend(&FourierField::constant(&lat, 3.0), &cfg).unwrap();
        for &y in &[0.0, 0.3, 2.0] {
            let g = &v.sample(&[y])[0];
            assert!(g
                .values
                .iter()
                .all(|x| (x - 3.0 * (-y).exp()).abs() < 1e-13));
        }
        let mut u = FourierField::zeros(&lat);
        u.coeffs_mut()[lat.index_of(&[1, 0]).unwrap()] = PI.into();
        u.coeffs_mut()[lat.index_of(&[-1, 0]).unwrap()] = PI.into();
        u.make_real();
        let v = extend(&u, &cfg).unwrap();
        let y = 0.7;
        let g = &v.sample(&[y])[0];
        let expect = GridField::from_fn(&[10, 10], 2.0 * PI, |x| {
            x[0].cos() * (-(2f64.sqrt()) * y).exp()
        });
        assert!(g.max_abs_diff(&expect) < 1e-13);
        // trace
        let g0 = &v.sample(&[0.0])[0];
        let u0 = GridField::from_fn(&[10, 10], 2.0 * PI, |x| x[0].cos());
        assert!(g0.max_abs_diff(&u0) < 1e-13);
    }

    #[test]
    fn conormal_recovers_operator() {
        for &s in &[0.2, 0.5, 0.8] {
            let (cfg, lat) = fixture(s);
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            let u = FourierField::random_real(&lat, &mut rng, 0.0);
            let v = extend(&u, &cfg).unwrap();
            let d = conormal_derivative(&v, &cfg, &dyadic_heights(20)).unwrap();
            let expect = apply_operator(&u, &cfg).unwrap().scaled(cfg.kappa());
            for (a, b) in d.coeffs().iter().zip(expect.coeffs()) {
                assert!((a - b).norm() <= 1e-5 * b.norm(), "s={s}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn conormal_rejects_bad_sequences() {
        let (cfg, lat) = fixture(0.4);
        let v = extend(&FourierField::constant(&lat, 1.0), &cfg).unwrap();
        assert!(conormal_derivative(&v, &cfg, &[0.1, 0.2]).is_err());
        assert!(conormal_derivative(&v, &cfg, &[0.1]).is_err());
        assert!(conormal_derivative(&v, &cfg, &[0.1, -0.05]).is_err());
    }

    #[test]
    fn trace_gap_zero_and_quadratic() {
        let (cfg, lat) = fixture(0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u = FourierField::random_real(&lat, &mut rng, 1.0);
        let v = extend(&u, &cfg).unwrap();
        let mut shape = FourierField::zeros(&lat);
        shape.coeffs_mut()[lat.index_of(&[1, 0]).unwrap()] = PI.into();
        shape.coeffs_mut()[lat.index_of(&[-1, 0]).unwrap()] = PI.into();
        shape.make_real();
        let gaps: Vec<f64> = [0.0, 0.1, 0.2]
            .iter()
            .map(|&a| {
                let p = BumpPerturbation {
                    amplitude: a,
                    height: 2.0,
                    shape: shape.clone(),
                };
                trace_inequality_check(&v, &p, &cfg).unwrap().gap
            })
            .collect();
        assert!(gaps[0].abs() < 1e-8);
        assert!(gaps[1] > 0.0 && gaps[2] > gaps[1]);
        assert!((gaps[2] / gaps[1] - 4.0).abs() < 1e-6);
    }
}
