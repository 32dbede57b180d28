//! Eigenvalues of `(−Δ+m²)^s` on the truncated lattice, with exact multiplicities,
//! and the eigenspace splitting `𝕍_h ⊕ 𝕍_h^⊥`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::torus::{FourierField, ModeLattice, TorusConfig};

/// One distinct eigenvalue `λ = μ^s`, `μ = ω²|k|²+m²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub lambda: f64,
    pub mu: f64,
    #[serde(skip)]
    pub k_sq: u64,
    pub multiplicity: usize,
    pub representatives: Vec<Vec<i64>>,
    /// 1-based inclusive range of ranks `ℓ` carried by this eigenvalue.
    pub index_range: (usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable {
    pub entries: Vec<SpectrumEntry>,
    /// Eigenvalues at or below this value are free of truncation artifacts.
    pub certified_lambda: f64,
}

impl SpectrumTable {
    /// Number of eigenvalues counted with multiplicity.
    pub fn total(&self) -> usize {
        self.entries.last().map_or(0, |e| e.index_range.1)
    }

    /// `λ_ℓ` for 1-based rank `ℓ`.
    pub fn lambda(&self, rank: usize) -> Option<f64> {
        self.entry_of_rank(rank).map(|e| e.lambda)
    }

    pub fn entry_of_rank(&self, rank: usize) -> Option<&SpectrumEntry> {
        self.entries
            .iter()
            .find(|e| e.index_range.0 <= rank && rank <= e.index_range.1)
    }

    /// Eigenvalues with multiplicity, `λ_1 ≤ λ_2 ≤ …`.
    pub fn expanded(&self) -> Vec<f64> {
        self.entries
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.lambda, e.multiplicity))
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.entries).expect("spectrum entries serialize")
    }
}

fn group_by_radius(lattice: &ModeLattice) -> BTreeMap<u64, Vec<usize>> {
    let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for i in 0..lattice.len() {
        groups.entry(lattice.k_sq(i)).or_default().push(i);
    }
    groups
}

fn build_table(
    cfg: &TorusConfig,
    lattice: &ModeLattice,
    mut keep: impl FnMut(&SpectrumEntry, usize) -> bool,
) -> SpectrumTable {
    let cert = lattice.certified_k_sq();
    let mut entries = Vec::new();
    let mut next_rank = 1;
    for (k_sq, members) in group_by_radius(lattice) {
        if k_sq > cert {
            break;
        }
        let entry = SpectrumEntry {
            lambda: cfg.symbol(k_sq),
            mu: cfg.mu(k_sq),
            k_sq,
            multiplicity: members.len(),
            representatives: members.iter().map(|&i| lattice.mode(i).to_vec()).collect(),
            index_range: (next_rank, next_rank + members.len() - 1),
        };
        next_rank += members.len();
        let done = !keep(&entry, entries.len());
        entries.push(entry);
        if done {
            break;
        }
    }
    SpectrumTable {
        entries,
        certified_lambda: cfg.symbol(cert),
    }
}

fn check_lattice(cfg: &TorusConfig, lattice: &ModeLattice) -> Result<()> {
    if lattice.dim() != cfg.dim() || lattice.period() != cfg.period() {
        return Err(Error::Parameter(
            "lattice does not match torus configuration".into(),
        ));
    }
    Ok(())
}

/// Distinct eigenvalues covering ranks `1..=count`.
pub fn enumerate_spectrum(
    cfg: &TorusConfig,
    lattice: &ModeLattice,
    count: usize,
) -> Result<SpectrumTable> {
    check_lattice(cfg, lattice)?;
    let table = build_table(cfg, lattice, |e, _| e.index_range.1 < count);
    if table.total() < count {
        return Err(Error::Uncertified {
            requested: count as f64,
            certified: table.total() as f64,
        });
    }
    Ok(table)
}

/// Every certified eigenvalue `≤ bound`, plus the first one above it.
pub fn enumerate_spectrum_below(
    cfg: &TorusConfig,
    lattice: &ModeLattice,
    bound: f64,
) -> Result<SpectrumTable> {
    check_lattice(cfg, lattice)?;
    let table = build_table(cfg, lattice, |e, _| e.lambda <= bound);
    match table.entries.last() {
        Some(last) if last.lambda > bound => Ok(table),
        _ => Err(Error::Uncertified {
            requested: bound,
            certified: table.certified_lambda,
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resonance {
    pub resonant: bool,
    pub distance: f64,
    pub nearest: f64,
    /// Rank range of the nearest eigenvalue.
    pub nearest_ranks: (usize, usize),
    /// Largest eigenvalue strictly below `λ∞`, if any.
    pub below: Option<f64>,
    /// Smallest eigenvalue strictly above `λ∞`.
    pub above: Option<f64>,
}

pub fn is_resonant(lambda_inf: f64, table: &SpectrumTable, tol: f64) -> Result<Resonance> {
    let last = table.entries.last().ok_or(Error::Uncertified {
        requested: lambda_inf,
        certified: table.certified_lambda,
    })?;
    if lambda_inf > last.lambda + tol {
        return Err(Error::Uncertified {
            requested: lambda_inf,
            certified: last.lambda,
        });
    }
    let nearest = table
        .entries
        .iter()
        .min_by(|a, b| {
            (a.lambda - lambda_inf)
                .abs()
                .total_cmp(&(b.lambda - lambda_inf).abs())
        })
        .expect("non-empty");
    let distance = (nearest.lambda - lambda_inf).abs();
    let below = table
        .entries
        .iter()
        .rev()
        .find(|e| e.lambda < lambda_inf)
        .map(|e| e.lambda);
    let above = table
        .entries
        .iter()
        .find(|e| e.lambda > lambda_inf)
        .map(|e| e.lambda);
    Ok(Resonance {
        resonant: distance <= tol,
        distance,
        nearest: nearest.lambda,
        nearest_ranks: nearest.index_range,
        below,
        above,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RealKind {
    Constant,
    Cos,
    Sin,
}

/// Real `L²`-orthonormal eigenfunction: `T^{-N/2}` for `k = 0`,
/// otherwise `√2·cos(ωk·x)/√T^N` or `√2·sin(ωk·x)/√T^N`.
pub fn real_eigenfunction(
    lattice: &Arc<ModeLattice>,
    k: &[i64],
    kind: RealKind,
) -> Result<FourierField> {
    let i = lattice
        .index_of(k)
        .ok_or_else(|| Error::Parameter(format!("mode {k:?} outside the lattice")))?;
    let j = lattice.negated(i);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); lattice.len()];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        RealKind::Constant => {
            if i != j {
                return Err(Error::Parameter(
                    "constant eigenfunction needs k = 0".into(),
                ));
            }
            coeffs[i] = Complex64::new(1.0, 0.0);
        }
        RealKind::Cos => {
            coeffs[i] = Complex64::new(h, 0.0);
            coeffs[j] = Complex64::new(h, 0.0);
        }
        RealKind::Sin => {
            coeffs[i] = Complex64::new(0.0, -h);
            coeffs[j] = Complex64::new(0.0, h);
        }
    }
    FourierField::from_coeffs(lattice, coeffs)
}

fn is_canonical(k: &[i64]) -> bool {
    k.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

/// A real eigenfunction together with its eigenvalue rank.
#[derive(Debug, Clone)]
pub struct RealMode {
    pub rank: usize,
    pub lambda: f64,
    pub k: Vec<i64>,
    pub kind: RealKind,
    pub field: FourierField,
}

/// Real orthonormal eigenfunctions for the given entries, ordered by eigenvalue,
/// then lattice order, cosine before sine.
pub fn real_basis(lattice: &Arc<ModeLattice>, entries: &[SpectrumEntry]) -> Result<Vec<RealMode>> {
    let mut out = Vec::new();
    for e in entries {
        let mut rank = e.index_range.0;
        for k in &e.representatives {
            let kinds: &[RealKind] = if e.k_sq == 0 {
                &[RealKind::Constant]
            } else if is_canonical(k) {
                &[RealKind::Cos, RealKind::Sin]
            } else {
                &[]
            };
            for &kind in kinds {
                out.push(RealMode {
                    rank,
                    lambda: e.lambda,
                    k: k.clone(),
                    kind,
                    field: real_eigenfunction(lattice, k, kind)?,
                });
                rank += 1;
            }
        }
    }
    Ok(out)
}

/// `𝕍_h = span{v_1,…,v_h}` and its `L²`-orthogonal complement.
#[derive(Debug, Clone)]
pub struct EigenspaceSplit {
    pub h: usize,
    pub basis: Vec<RealMode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subspace {
    Vh,
    VhPerp,
}

impl EigenspaceSplit {
    pub fn new(lattice: &Arc<ModeLattice>, table: &SpectrumTable, h: usize) -> Result<Self> {
        if table.total() < h {
            return Err(Error::Uncertified {
                requested: h as f64,
                certified: table.total() as f64,
            });
        }
        let entries: Vec<SpectrumEntry> = table
            .entries
            .iter()
            .take_while(|e| e.index_range.0 <= h)
            .cloned()
            .collect();
        let mut basis = real_basis(lattice, &entries)?;
        basis.truncate(h);
        Ok(EigenspaceSplit { h, basis })
    }

    pub fn project(&self, u: &FourierField, which: Subspace) -> FourierField {
        let mut p = FourierField::zeros(u.lattice());
        for v in &self.basis {
            p.axpy(u.dot(&v.field), &v.field);
        }
        match which {
            Subspace::Vh => p,
            Subspace::VhPerp => u.sub(&p),
        }
    }
}

pub fn project(u: &FourierField, split: &EigenspaceSplit, which: Subspace) -> FourierField {
    split.project(u, which)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::rayleigh_quotient;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn fixture(m: usize) -> (TorusConfig, Arc<ModeLattice>) {
        let cfg = TorusConfig::new(2.0 * PI, 2, 1.0, 0.5, 2.0).unwrap();
        let lat = Arc::new(ModeLattice::cubic(2.0 * PI, 2, m, 2 * m + 2).unwrap());
        (cfg, lat)
    }

    #[test]
    fn fixture_a_leading_eigenvalues() {
        let (cfg, lat) = fixture(8);
        let t = enumerate_spectrum(&cfg, &lat, 9).unwrap();
        let got: Vec<(f64, usize)> = t
            .entries
            .iter()
            .map(|e| (e.lambda, e.multiplicity))
            .collect();
        assert_eq!(got.len(), 3);
        assert_eq!(got[0], (1.0, 1));
        assert_eq!(got[1].1, 4);
        assert!((got[1].0 - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(got[2].1, 4);
        assert!((got[2].0 - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(t.entries[2].index_range, (6, 9));
        let more = enumerate_spectrum(&cfg, &lat, 10).unwrap();
        assert!((more.entries[3].lambda - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn one_dimensional_spectrum() {
        let cfg = TorusConfig::new(2.0 * PI, 1, 2.0, 0.5, 0.0).unwrap();
        let lat = ModeLattice::new(2.0 * PI, vec![3], vec![8]).unwrap();
        let t = enumerate_spectrum(&cfg, &lat, 3).unwrap();
        assert_eq!(t.expanded(), vec![2.0, 5f64.sqrt(), 5f64.sqrt()]);
    }

    #[test]
    fn ground_state_is_simple() {
        let cfg = TorusConfig::new(1.3, 3, 0.7, 0.2, 0.0).unwrap();
        let lat = ModeLattice::cubic(1.3, 3, 2, 5).unwrap();
        let t = enumerate_spectrum(&cfg, &lat, 1).unwrap();
        assert_eq!(t.entries[0].multiplicity, 1);
        assert_eq!(t.entries[0].lambda, 0.7f64.powf(0.4));
    }

    #[test]
    fn refuses_past_certified_radius() {
        let (cfg, lat) = fixture(2);
        // |k|² ≤ 4 certified: 1 + 4 + 4 + 4 = 13 eigenvalues
        assert!(enumerate_spectrum(&cfg, &lat, 13).is_ok());
        assert!(matches!(
            enumerate_spectrum(&cfg, &lat, 14),
            Err(Error::Uncertified { .. })
        ));
    }

    #[test]
    fn resonance_checks() {
        let (cfg, lat) = fixture(8);
        let t = enumerate_spectrum_below(&cfg, &lat, 3.0).unwrap();
        let r = is_resonant(2.0, &t, 1e-12).unwrap();
        assert!(!r.resonant);
        assert!((r.below.unwrap() - 3f64.sqrt()).abs() < 1e-15);
        assert!((r.above.unwrap() - 5f64.sqrt()).abs() < 1e-15);
        assert!(is_resonant(1.0, &t, 1e-12).unwrap().resonant);
        let r = is_resonant(0.5, &t, 1e-12).unwrap();
        assert!(!r.resonant && r.below.is_none());
        assert!(is_resonant(100.0, &t, 1e-12).is_err());
    }

    #[test]
    fn real_basis_is_orthonormal_eigenbasis() {
        let (cfg, lat) = fixture(4);
        let t = enumerate_spectrum(&cfg, &lat, 13).unwrap();
        let basis = real_basis(&lat, &t.entries).unwrap();
        assert_eq!(basis.len(), 13);
        for (a, va) in basis.iter().enumerate() {
            assert!(va.field.is_real());
            assert!((rayleigh_quotient(&va.field, &cfg).unwrap() - va.lambda).abs() < 1e-14);
            for (b, vb) in basis.iter().enumerate() {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((va.field.dot(&vb.field) - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn projections() {
        let (cfg, lat) = fixture(4);
        let t = enumerate_spectrum(&cfg, &lat, 9).unwrap();
        let split = EigenspaceSplit::new(&lat, &t, 5).unwrap();
        let v1 = split.basis[0].field.clone();
        assert!(project(&v1, &split, Subspace::Vh).sub(&v1).norm_sq() < 1e-30);
        assert!(project(&v1, &split, Subspace::VhPerp).norm_sq() < 1e-30);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let u = FourierField::random_real(&lat, &mut rng, 0.5);
            let p = project(&u, &split, Subspace::Vh);
            let q = project(&u, &split, Subspace::VhPerp);
            assert!((p.norm_sq() + q.norm_sq() - u.norm_sq()).abs() < 1e-12 * u.norm_sq());
            assert!(p.dot(&q).abs() < 1e-12);
            assert!(project(&p, &split, Subspace::Vh).sub(&p).norm_sq() < 1e-28);
            for v in &split.basis {
                assert!(q.dot(&v.field).abs() < 1e-13);
            }
            // Rayleigh principle on the complement
            let r = rayleigh_quotient(&q, &cfg).unwrap();
            assert!(r >= t.lambda(6).unwrap() - 1e-10);
        }
    }
}
