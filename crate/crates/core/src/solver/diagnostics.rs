use serde::Serialize;

use crate::energy::{energy, gradient};
use crate::error::Result;
use crate::operator::{hs_norm, Sobolev};
use crate::torus::FourierField;

use super::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsRow {
    pub energy: f64,
    pub gradient_norm: f64,
    pub hs_norm: f64,
}

/// When a trajectory counts as a Palais–Smale suspect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsThresholds {
    /// Minimal growth factor of `‖u‖_{ℍ^s}` from first to last iterate.
    pub growth: f64,
    /// Bound on the final gradient norm.
    pub gradient: f64,
}

impl Default for PsThresholds {
    fn default() -> Self {
        PsThresholds {
            growth: 100.0,
            gradient: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsReport {
    pub rows: Vec<PsRow>,
    pub thresholds: PsThresholds,
    /// The norm grows past the factor while the gradient ends small and does not
    /// increase over the second half.
    pub suspect: bool,
}

/// Per-iterate `(𝒥, ‖𝒥′‖, ‖u‖_{ℍ^s})` and a Palais–Smale suspicion flag.
pub fn ps_diagnostics(
    trajectory: &[FourierField],
    problem: &Problem,
    thresholds: PsThresholds,
) -> Result<PsReport> {
    let rows = trajectory
        .iter()
        .map(|u| {
            Ok(PsRow {
                energy: energy(u, &problem.nl, &problem.cfg)?,
                gradient_norm: gradient(u, &problem.nl, &problem.cfg)?.norm_sq().sqrt(),
                hs_norm: hs_norm(u, &problem.cfg, Sobolev::Positive)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let suspect = rows.len() >= 3 && {
        let first = rows[0].hs_norm;
        let last = rows[rows.len() - 1].hs_norm;
        let tail = &rows[rows.len() / 2..];
        let grows = last >= thresholds.growth * first.max(f64::MIN_POSITIVE);
        let small = rows[rows.len() - 1].gradient_norm <= thresholds.gradient;
        let not_increasing = tail
            .windows(2)
            .all(|w| w[1].gradient_norm <= w[0].gradient_norm * (1.0 + 1e-9));
        grows && small && not_increasing
    };
    Ok(PsReport {
        rows,
        thresholds,
        suspect,
    })
}
