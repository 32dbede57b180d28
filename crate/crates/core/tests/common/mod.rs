#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use fracperiod::nonlinearity::{Nonlinearity, NonlinearitySpec};
use fracperiod::solver::Problem;
use fracperiod::{ModeLattice, TorusConfig};

pub const ROOT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

pub fn reference_config() -> TorusConfig {
    TorusConfig::new(2.0 * PI, 2, 1.0, 0.5, 2.0).unwrap()
}

pub fn lattice(cutoff: usize) -> Arc<ModeLattice> {
    Arc::new(ModeLattice::cubic(2.0 * PI, 2, cutoff, 2 * cutoff + 2).unwrap())
}

pub fn rational(a: f64) -> Nonlinearity {
    Nonlinearity::new(&NonlinearitySpec::RationalOdd { a }, 2.0 * PI).unwrap()
}

/// The reference problem at a given cutoff.
pub fn reference_problem(cutoff: usize) -> Problem {
    Problem::new(reference_config(), lattice(cutoff), rational(-1.5)).unwrap()
}

/// `min(‖u − v‖, ‖u + v‖)` in `L²`.
pub fn distance_mod_sign(u: &fracperiod::FourierField, v: &fracperiod::FourierField) -> f64 {
    u.sub(v).norm_sq().sqrt().min(u.add(v).norm_sq().sqrt())
}
