//! JSON run configuration. Every section is optional; the defaults describe the
//! reference problem on the 2π-torus in two dimensions with `λ∞ = 2` and
//! `f(t) = −1.5t/(1+t²)`.

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::{Nonlinearity, NonlinearitySpec};
use crate::solver::{Problem, SolverOptions};
use crate::torus::{ModeLattice, TorusConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TorusSection {
    pub period: f64,
    pub dim: usize,
    pub mass: f64,
    pub order: f64,
    pub lambda_inf: f64,
}

impl Default for TorusSection {
    fn default() -> Self {
        TorusSection {
            period: 2.0 * std::f64::consts::PI,
            dim: 2,
            mass: 1.0,
            order: 0.5,
            lambda_inf: 2.0,
        }
    }
}

/// A single value for every dimension or one value per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Extents {
    Uniform(usize),
    PerDim(Vec<usize>),
}

impl Extents {
    fn expand(&self, dim: usize, what: &str) -> Result<Vec<usize>> {
        match self {
            Extents::Uniform(n) => Ok(vec![*n; dim]),
            Extents::PerDim(v) if v.len() == dim => Ok(v.clone()),
            Extents::PerDim(v) => Err(Error::Parameter(format!(
                "lattice.{what} has {} entries for dimension {dim}",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSection {
    /// Mode cutoff `M_i`.
    pub cutoff: Extents,
    /// Collocation sizes, default `2M_i + 2`.
    pub grid: Option<Extents>,
}

impl Default for LatticeSection {
    fn default() -> Self {
        LatticeSection {
            cutoff: Extents::Uniform(16),
            grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    /// Number of eigenvalues (with multiplicity) to report.
    pub count: usize,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        SpectrumSection { count: 30 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    /// Pick from the hypothesis report.
    Auto,
    Newton,
    Direct,
    Multiplicity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSection {
    pub mode: SolveMode,
    /// Constant initial guess for Newton runs.
    pub initial_constant: f64,
    /// FHST grid used as initial guess instead of the constant.
    pub initial_field: Option<PathBuf>,
}

impl Default for SolveSection {
    fn default() -> Self {
        SolveSection {
            mode: SolveMode::Auto,
            initial_constant: 1.0,
            initial_field: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtendSection {
    /// FHST trace to extend; a seeded random field when absent.
    pub field: Option<PathBuf>,
    pub heights: Vec<f64>,
}

impl Default for ExtendSection {
    fn default() -> Self {
        ExtendSection {
            field: None,
            heights: vec![0.0, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradcheckSection {
    pub trials: usize,
    pub step: f64,
    pub tolerance: f64,
}

impl Default for GradcheckSection {
    fn default() -> Self {
        GradcheckSection {
            trials: 20,
            step: 1e-5,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    /// Random samples per randomized check.
    pub trials: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection { trials: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub torus: TorusSection,
    pub lattice: LatticeSection,
    pub nonlinearity: NonlinearitySpec,
    pub solver: SolverOptions,
    pub spectrum: SpectrumSection,
    pub solve: SolveSection,
    pub extend: ExtendSection,
    pub gradcheck: GradcheckSection,
    pub verify: VerifySection,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            torus: TorusSection::default(),
            lattice: LatticeSection::default(),
            nonlinearity: NonlinearitySpec::RationalOdd { a: -1.5 },
            solver: SolverOptions::default(),
            spectrum: SpectrumSection::default(),
            solve: SolveSection::default(),
            extend: ExtendSection::default(),
            gradcheck: GradcheckSection::default(),
            verify: VerifySection::default(),
            output_dir: None,
        }
    }
}

impl RunConfig {
    /// Parses a config, naming the offending key on failure.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." || path.is_empty() {
                Error::Format(format!("config: {inner}"))
            } else {
                Error::Format(format!("config key `{path}`: {inner}"))
            }
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        RunConfig::from_json(&text)
    }

    pub fn torus_config(&self) -> Result<TorusConfig> {
        let t = &self.torus;
        TorusConfig::new(t.period, t.dim, t.mass, t.order, t.lambda_inf)
    }

    pub fn lattice(&self) -> Result<Arc<ModeLattice>> {
        let dim = self.torus.dim;
        let cutoff = self.lattice.cutoff.expand(dim, "cutoff")?;
        let grid = match &self.lattice.grid {
            Some(g) => g.expand(dim, "grid")?,
            None => cutoff.iter().map(|m| 2 * m + 2).collect(),
        };
        Ok(Arc::new(ModeLattice::new(self.torus.period, cutoff, grid)?))
    }

    pub fn problem(&self) -> Result<Problem> {
        self.solver.validate()?;
        let nl = Nonlinearity::new(&self.nonlinearity, self.torus.period)?;
        Problem::new(self.torus_config()?, self.lattice()?, nl)
    }
}
