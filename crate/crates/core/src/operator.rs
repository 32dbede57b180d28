//! `(−Δ+m²)^s` as the Fourier multiplier `(ω²|k|²+m²)^s` and the norms it induces.

use crate::error::{Error, Result};
use crate::torus::{FourierField, TorusConfig};

/// Which of the dual pair `ℍ^s_T`, `ℍ^{−s}_T` a norm is taken in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sobolev {
    Positive,
    Negative,
}

pub(crate) fn check_compatible(u: &FourierField, cfg: &TorusConfig) -> Result<()> {
    let lat = u.lattice();
    if lat.dim() != cfg.dim() || lat.period() != cfg.period() {
        return Err(Error::Parameter(format!(
            "field lives on a {}-torus of period {}, config has {}-torus of period {}",
            lat.dim(),
            lat.period(),
            cfg.dim(),
            cfg.period()
        )));
    }
    Ok(())
}

pub fn apply_operator(u: &FourierField, cfg: &TorusConfig) -> Result<FourierField> {
    check_compatible(u, cfg)?;
    Ok(u.map_symbol(|k_sq| cfg.symbol(k_sq)))
}

pub fn apply_inverse(g: &FourierField, cfg: &TorusConfig) -> Result<FourierField> {
    check_compatible(g, cfg)?;
    Ok(g.map_symbol(|k_sq| 1.0 / cfg.symbol(k_sq)))
}

/// `√Σ (ω²|k|²+m²)^{±s}|β_k|²`.
pub fn hs_norm(u: &FourierField, cfg: &TorusConfig, which: Sobolev) -> Result<f64> {
    check_compatible(u, cfg)?;
    Ok(hs_norm_sq_unchecked(u, cfg, which).sqrt())
}

pub(crate) fn hs_norm_sq_unchecked(u: &FourierField, cfg: &TorusConfig, which: Sobolev) -> f64 {
    let lat = u.lattice();
    u.coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let w = cfg.symbol(lat.k_sq(i));
            let w = match which {
                Sobolev::Positive => w,
                Sobolev::Negative => 1.0 / w,
            };
            w * c.norm_sqr()
        })
        .sum()
}

/// `|u|²_{ℍ^s}/|u|²_{L²}`.
pub fn rayleigh_quotient(u: &FourierField, cfg: &TorusConfig) -> Result<f64> {
    check_compatible(u, cfg)?;
    let l2 = u.norm_sq();
    if l2 == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(hs_norm_sq_unchecked(u, cfg, Sobolev::Positive) / l2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{synthesize, ModeLattice};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn setup() -> (TorusConfig, Arc<ModeLattice>) {
        let cfg = TorusConfig::new(2.0 * PI, 2, 1.0, 0.5, 2.0).unwrap();
        let lat = Arc::new(ModeLattice::cubic(2.0 * PI, 2, 4, 10).unwrap());
        (cfg, lat)
    }

    #[test]
    fn constant_scales_by_ground_eigenvalue() {
        let cfg = TorusConfig::new(3.0, 2, 1.7, 0.3, 0.0).unwrap();
        let lat = Arc::new(ModeLattice::cubic(3.0, 2, 2, 6).unwrap());
        let u = FourierField::constant(&lat, 2.5);
        let au = synthesize(&apply_operator(&u, &cfg).unwrap());
        let expected = 1.7f64.powf(0.6) * 2.5;
        assert!(au.values.iter().all(|v| (v - expected).abs() < 1e-13));
    }

    #[test]
    fn cosine_mode_scales_by_sqrt_two() {
        let (cfg, lat) = setup();
        let mut u = FourierField::zeros(&lat);
        let half = PI;
        u.coeffs_mut()[lat.index_of(&[1, 0]).unwrap()] = half.into();
        u.coeffs_mut()[lat.index_of(&[-1, 0]).unwrap()] = half.into();
        let au = apply_operator(&u, &cfg).unwrap();
        let expect = u.scaled(2f64.sqrt());
        assert!(au.sub(&expect).norm_sq().sqrt() < 1e-14);
    }

    #[test]
    fn inverse_round_trip_and_constant() {
        let (cfg, lat) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = FourierField::random_real(&lat, &mut rng, 0.0);
        let back = apply_operator(&apply_inverse(&u, &cfg).unwrap(), &cfg).unwrap();
        assert!(back.sub(&u).norm_sq().sqrt() <= 1e-14 * u.norm_sq().sqrt());
        let one = FourierField::constant(&lat, 1.0);
        let inv = synthesize(&apply_inverse(&one, &cfg).unwrap());
        assert!(inv.values.iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn inverse_is_self_adjoint() {
        let (cfg, lat) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let u = FourierField::random_real(&lat, &mut rng, 0.0);
            let v = FourierField::random_real(&lat, &mut rng, 0.0);
            let lhs = apply_inverse(&u, &cfg).unwrap().dot(&v);
            let rhs = u.dot(&apply_inverse(&v, &cfg).unwrap());
            assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn sobolev_norms() {
        let (cfg, lat) = setup();
        let mut u = FourierField::zeros(&lat);
        u.coeffs_mut()[lat.index_of(&[1, 2]).unwrap()] = 1.0.into();
        let n = hs_norm(&u, &cfg, Sobolev::Positive).unwrap();
        assert!((n - 6f64.powf(0.25)).abs() < 1e-14);
        let one = FourierField::constant(&lat, 1.0).scaled(1.0 / (2.0 * PI));
        assert!((hs_norm(&one, &cfg, Sobolev::Positive).unwrap() - 1.0).abs() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = FourierField::random_real(&lat, &mut rng, 0.0);
        let au = apply_operator(&u, &cfg).unwrap();
        let dual = hs_norm(&au, &cfg, Sobolev::Negative).unwrap();
        let primal = hs_norm(&u, &cfg, Sobolev::Positive).unwrap();
        assert!((dual - primal).abs() < 1e-12 * primal);
    }

    #[test]
    fn rayleigh_quotient_cases() {
        let (cfg, lat) = setup();
        assert!(matches!(
            rayleigh_quotient(&FourierField::zeros(&lat), &cfg),
            Err(Error::ZeroField)
        ));
        let one = FourierField::constant(&lat, 3.0);
        assert!((rayleigh_quotient(&one, &cfg).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn incompatible_lattice_rejected() {
        let (cfg, _) = setup();
        let lat = Arc::new(ModeLattice::cubic(1.0, 2, 2, 5).unwrap());
        assert!(apply_operator(&FourierField::zeros(&lat), &cfg).is_err());
    }
}
