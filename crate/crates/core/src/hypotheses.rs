//! Which existence result covers a given configuration: non-resonance,
//! the spectral-gap condition `λ₀+λ∞ < λ_h ≤ λ_k < λ∞`, and sampled checks of
//! the asymptotic behavior of `f`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nonlinearity::{asymptotic_report, AsymptoticReport, Nonlinearity};
use crate::spectrum::{enumerate_spectrum_below, is_resonant, Resonance, SpectrumTable};
use crate::torus::{ModeLattice, TorusConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Applicable {
    /// `λ∞ < λ₁`: the functional is coercive, a minimizer exists.
    DirectMinimization,
    /// Non-resonant: at least one weak solution.
    Existence,
    /// Gap condition with odd `f`: at least `k−h+1` pairs of non-trivial solutions.
    Multiplicity,
    /// Resonant or hypotheses on `f` violated.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapCondition {
    pub holds: bool,
    /// Least rank with `λ_h > λ₀+λ∞`.
    pub h: Option<usize>,
    /// Greatest rank with `λ_k < λ∞`.
    pub k: Option<usize>,
    pub lambda_h: Option<f64>,
    pub lambda_k: Option<f64>,
    /// `k − h + 1` when the condition holds.
    pub pair_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub lambda_inf: f64,
    pub lambda0: f64,
    pub odd: bool,
    pub resonance_tolerance: f64,
    pub resonance: Resonance,
    pub gap: GapCondition,
    pub asymptotics: AsymptoticReport,
    pub applies: Applicable,
    pub notes: Vec<String>,
}

impl HypothesisReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Spectrum certified far enough for [`check_hypotheses`].
pub fn hypothesis_spectrum(
    cfg: &TorusConfig,
    lattice: &ModeLattice,
    nl: &Nonlinearity,
) -> Result<SpectrumTable> {
    enumerate_spectrum_below(cfg, lattice, cfg.lambda_inf() + nl.lambda0().abs())
}

fn sample_points(cfg: &TorusConfig) -> Vec<Vec<f64>> {
    let n = cfg.dim();
    let t = cfg.period();
    let mut xs = Vec::new();
    for j in 0..8 {
        let c = j as f64 * t / 8.0;
        let mut axis = vec![0.0; n];
        axis[0] = c;
        xs.push(axis);
        xs.push(vec![c; n]);
    }
    xs
}

pub fn check_hypotheses(
    nl: &Nonlinearity,
    cfg: &TorusConfig,
    table: &SpectrumTable,
) -> Result<HypothesisReport> {
    let lambda_inf = cfg.lambda_inf();
    let lambda0 = nl.lambda0();
    let needed = lambda_inf.max(lambda_inf + lambda0.abs());
    let top = table.entries.last().map_or(f64::NEG_INFINITY, |e| e.lambda);
    if top <= needed {
        return Err(Error::Uncertified {
            requested: needed,
            certified: top,
        });
    }
    let tol = 1e-12 * lambda_inf.abs().max(1.0);
    let resonance = is_resonant(lambda_inf, table, tol)?;

    let threshold = lambda0 + lambda_inf;
    let first_above = table.entries.iter().find(|e| e.lambda > threshold);
    let last_below = table.entries.iter().rev().find(|e| e.lambda < lambda_inf);
    let h = first_above.map(|e| e.index_range.0);
    let k = last_below.map(|e| e.index_range.1);
    let holds = matches!((h, k), (Some(h), Some(k)) if h <= k);
    let gap = GapCondition {
        holds,
        h,
        k,
        lambda_h: first_above.map(|e| e.lambda),
        lambda_k: last_below.map(|e| e.lambda),
        pair_count: if holds {
            Some(k.unwrap() - h.unwrap() + 1)
        } else {
            None
        },
    };

    let asymptotics = asymptotic_report(nl, &sample_points(cfg));
    let mut notes = Vec::new();
    let f_ok = asymptotics.zero_limit_ok
        && asymptotics.infinity_limit_ok
        && asymptotics.primitive_ok
        && asymptotics.odd_ok != Some(false);
    if !f_ok {
        notes.push("sampled checks on f contradict its declared structure".to_string());
    }
    let lambda1 = table.entries[0].lambda;
    let applies = if resonance.resonant {
        notes.push(format!(
            "λ∞ = {lambda_inf} is an eigenvalue (ranks {}..{}); no existence result applies",
            resonance.nearest_ranks.0, resonance.nearest_ranks.1
        ));
        Applicable::None
    } else if !f_ok {
        Applicable::None
    } else if lambda_inf < lambda1 {
        notes.push(format!("λ∞ < λ₁ = {lambda1}: direct minimization"));
        Applicable::DirectMinimization
    } else if holds && nl.is_odd() {
        Applicable::Multiplicity
    } else {
        if holds {
            notes.push("gap condition holds but f is not odd".to_string());
        }
        Applicable::Existence
    };

    Ok(HypothesisReport {
        lambda_inf,
        lambda0,
        odd: nl.is_odd(),
        resonance_tolerance: tol,
        resonance,
        gap,
        asymptotics,
        applies,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::NonlinearitySpec;
    use std::f64::consts::PI;

    fn run(lambda_inf: f64, a: f64) -> HypothesisReport {
        let cfg = TorusConfig::new(2.0 * PI, 2, 1.0, 0.5, lambda_inf).unwrap();
        let lat = ModeLattice::cubic(2.0 * PI, 2, 16, 34).unwrap();
        let nl = Nonlinearity::new(&NonlinearitySpec::RationalOdd { a }, 2.0 * PI).unwrap();
        let table = hypothesis_spectrum(&cfg, &lat, &nl).unwrap();
        check_hypotheses(&nl, &cfg, &table).unwrap()
    }

    #[test]
    fn fixture_a_satisfies_gap_condition() {
        let r = run(2.0, -1.5);
        assert!(!r.resonance.resonant);
        assert_eq!(r.gap.h, Some(1));
        assert_eq!(r.gap.k, Some(9));
        assert_eq!(r.gap.pair_count, Some(9));
        assert!((r.gap.lambda_k.unwrap() - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.applies, Applicable::Multiplicity);
        // re-check λ₀+λ∞ < λ_h ≤ λ_k < λ∞
        assert!(r.lambda0 + r.lambda_inf < r.gap.lambda_h.unwrap());
        assert!(r.gap.lambda_h.unwrap() <= r.gap.lambda_k.unwrap());
        assert!(r.gap.lambda_k.unwrap() < r.lambda_inf);
    }

    #[test]
    fn below_ground_state_is_direct_minimization() {
        let r = run(0.5, 0.6);
        assert_eq!(r.applies, Applicable::DirectMinimization);
        assert!(!r.gap.holds);
    }

    #[test]
    fn resonance_disables_all_branches() {
        let r = run(1.0, -1.5);
        assert!(r.resonance.resonant);
        assert_eq!(r.applies, Applicable::None);
        assert!(r.notes.iter().any(|n| n.contains("no existence result applies")));
    }

    #[test]
    fn positive_lambda0_gives_existence_only() {
        let r = run(2.0, 0.5);
        assert!(!r.gap.holds);
        assert_eq!(r.applies, Applicable::Existence);
    }

    #[test]
    fn uncertified_table_is_refused() {
        let cfg = TorusConfig::new(2.0 * PI, 2, 1.0, 0.5, 2.0).unwrap();
        let lat = ModeLattice::cubic(2.0 * PI, 2, 1, 3).unwrap();
        let nl = Nonlinearity::new(&NonlinearitySpec::RationalOdd { a: -1.5 }, 2.0 * PI).unwrap();
        assert!(hypothesis_spectrum(&cfg, &lat, &nl).is_err());
        let small = crate::spectrum::enumerate_spectrum(&cfg, &lat, 1).unwrap();
        assert!(check_hypotheses(&nl, &cfg, &small).is_err());
    }
}
