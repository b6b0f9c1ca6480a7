//! Open chains in real space: assembly, dense diagonalization, thermal
//! occupation profiles and the edge/bulk diagnostic.

mod chain;

pub use chain::{assemble, build_open_chain, Boundary, ChainHamiltonian, ChainKind};

use num_complex::Complex64;

use crate::error::{ensure_finite, Error, Result};
use crate::linalg::{decompose_complex, Want};
use crate::spectra::Model;

/// Eigenpairs of a chain matrix; `values` ascending.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub dim: usize,
    pub values: Vec<f64>,
    /// Eigenvector `m` occupies `vectors[m * dim..(m + 1) * dim]`.
    pub vectors: Vec<Complex64>,
}

impl EigenSystem {
    pub fn vector(&self, m: usize) -> &[Complex64] {
        &self.vectors[m * self.dim..(m + 1) * self.dim]
    }

    /// Component `i` of eigenvector `m`.
    pub fn component(&self, i: usize, m: usize) -> Complex64 {
        self.vectors[m * self.dim + i]
    }

    /// `max |H V - V Lambda|`.
    pub fn residual(&self, h: &ChainHamiltonian) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for m in 0..n {
            let v = self.vector(m);
            for i in 0..n {
                let row = &h.entries[i * n..(i + 1) * n];
                let hv: Complex64 = row.iter().zip(v).map(|(a, b)| a * b).sum();
                worst = worst.max((hv - v[i] * self.values[m]).norm());
            }
        }
        worst
    }

    /// `max |V^† V - I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for a in 0..n {
            let va = self.vector(a);
            for b in a..n {
                let vb = self.vector(b);
                let dot: Complex64 = va.iter().zip(vb).map(|(x, y)| x.conj() * y).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).norm());
            }
        }
        worst
    }
}

/// Full eigendecomposition.
pub fn eigh(h: &ChainHamiltonian) -> Result<EigenSystem> {
    let dec = decompose_complex(&h.entries, h.dim, Want::All)?;
    Ok(EigenSystem {
        dim: h.dim,
        values: dec.values,
        vectors: dec.coeffs,
    })
}

/// Eigenvalues only.
pub fn eigvalsh(h: &ChainHamiltonian) -> Result<Vec<f64>> {
    Ok(decompose_complex(&h.entries, h.dim, Want::ValuesOnly)?.values)
}

/// Quasi-particle chemical potential used when none is given:
/// `-1e-3` times the model's hopping scale.
pub fn default_mu_qp(model: &Model) -> f64 {
    -1e-3 * model.hopping_scale()
}

/// Eigenvalues of `|eps|` at or below this (relative to the hopping scale)
/// are treated as an exactly degenerate zero-mode cluster.
const ZERO_MODE_TOL: f64 = 1e-9;

/// Eigenvalues of an open chain together with the eigenvector rows needed
/// for a set of cells, reusable across temperatures.
#[derive(Debug, Clone)]
pub struct ChainSpectrum {
    pub cells: usize,
    pub orbitals: usize,
    pub kind: ChainKind,
    pub values: Vec<f64>,
    sites: Vec<usize>,
    /// `weights[m * sites.len() + s]`: particle-sector weight of eigenvector
    /// `m` on cell `sites[s]`, summed over orbitals.
    weights: Vec<f64>,
    zero_tol: f64,
}

impl ChainSpectrum {
    /// Diagonalize the open chain, keeping eigenvector weight on `sites`
    /// (0-based cell indices; all cells when `None`).
    pub fn new(model: &Model, cells: usize, sites: Option<&[usize]>) -> Result<ChainSpectrum> {
        let h = build_open_chain(model, cells)?;
        let sites: Vec<usize> = match sites {
            Some(s) => {
                if let Some(&bad) = s.iter().find(|&&c| c >= cells) {
                    return Err(Error::InvalidParameter(format!("site {bad} outside chain of {cells}")));
                }
                s.to_vec()
            }
            None => (0..cells).collect(),
        };
        let rows: Vec<usize> = sites
            .iter()
            .flat_map(|&c| (0..h.orbitals).map(move |o| c * h.orbitals + o))
            .collect();
        let dec = if rows.len() == h.dim {
            decompose_complex(&h.entries, h.dim, Want::All)?
        } else {
            decompose_complex(&h.entries, h.dim, Want::Rows(&rows))?
        };
        let nrows = dec.rows;
        let ns = sites.len();
        let mut weights = vec![0.0; h.dim * ns];
        for m in 0..h.dim {
            let coeffs = &dec.coeffs[m * nrows..(m + 1) * nrows];
            for s in 0..ns {
                weights[m * ns + s] = (0..h.orbitals)
                    .map(|o| coeffs[s * h.orbitals + o].norm_sqr())
                    .sum();
            }
        }
        Ok(ChainSpectrum {
            cells,
            orbitals: h.orbitals,
            kind: h.kind,
            values: dec.values,
            sites,
            weights,
            zero_tol: ZERO_MODE_TOL * model.hopping_scale(),
        })
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    /// Thermal occupation of the kept cells at temperature `t` with a
    /// quasi-particle chemical potential `mu_qp`.
    ///
    /// Number-conserving chains fill mode `m` with `f((eps_m - mu_qp)/T)`.
    /// For BdG chains every eigenvector contributes its particle weight times
    /// the occupation of the corresponding quasi-particle: `f` for
    /// `eps > 0`, `1 - f` for the hole partner at `-eps`. Members of an
    /// unresolvably degenerate zero-energy pair get `1/2`, the exact value for
    /// a pair of spatially separated Majorana modes.
    pub fn occupations(&self, t: f64, mu_qp: f64) -> Result<OccupationProfile> {
        ensure_finite("T", t)?;
        ensure_finite("mu_qp", mu_qp)?;
        if t <= 0.0 {
            return Err(Error::InvalidParameter(format!("occupations need T > 0, got {t}")));
        }
        let ns = self.sites.len();
        let mut occ = vec![0.0; ns];
        let mut total_modes = 0.0;
        for (m, &eps) in self.values.iter().enumerate() {
            let fill = match self.kind {
                ChainKind::NumberConserving => fermi((eps - mu_qp) / t),
                ChainKind::Bdg => {
                    if eps.abs() <= self.zero_tol {
                        0.5
                    } else if eps > 0.0 {
                        fermi((eps - mu_qp) / t)
                    } else {
                        1.0 - fermi((-eps - mu_qp) / t)
                    }
                }
            };
            total_modes += fill;
            for (o, w) in occ.iter_mut().zip(&self.weights[m * ns..(m + 1) * ns]) {
                *o += w * fill;
            }
        }
        let expected_total = match self.kind {
            ChainKind::NumberConserving => Some(total_modes),
            ChainKind::Bdg => None,
        };
        Ok(OccupationProfile {
            sites: self.sites.clone(),
            occupation: occ,
            cells: self.cells,
            orbitals: self.orbitals,
            temperature: t,
            mu_qp,
            mode_sum: expected_total,
        })
    }
}

/// `1 / (e^x + 1)` without overflow.
pub fn fermi(x: f64) -> f64 {
    if x >= 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Expected particle number per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationProfile {
    /// 0-based cell indices the occupations refer to.
    pub sites: Vec<usize>,
    pub occupation: Vec<f64>,
    /// Length of the chain the profile was taken from.
    pub cells: usize,
    pub orbitals: usize,
    pub temperature: f64,
    pub mu_qp: f64,
    /// For number-conserving chains, `sum_m f((eps_m - mu_qp)/T)`.
    pub mode_sum: Option<f64>,
}

impl OccupationProfile {
    /// Occupation of 0-based cell `i`, if it was kept.
    pub fn at(&self, i: usize) -> Option<f64> {
        self.sites.iter().position(|&s| s == i).map(|p| self.occupation[p])
    }

    pub fn total(&self) -> f64 {
        self.occupation.iter().sum()
    }

    /// 0-based index of the middle cell.
    pub fn middle(&self) -> usize {
        self.cells / 2
    }
}

/// Occupation profile of the open chain at temperature `t`.
pub fn thermal_occupations(
    model: &Model,
    cells: usize,
    t: f64,
    mu_qp: f64,
) -> Result<OccupationProfile> {
    ChainSpectrum::new(model, cells, None)?.occupations(t, mu_qp)
}

/// `<n_edge> / <n_bulk>` with the first cell as the edge and the middle cell
/// as the bulk.
pub fn edge_bulk_ratio(profile: &OccupationProfile) -> Result<f64> {
    edge_bulk_ratio_window(profile, 1)
}

/// As [`edge_bulk_ratio`] but averaging the edge occupation over the first
/// `window` cells.
pub fn edge_bulk_ratio_window(profile: &OccupationProfile, window: usize) -> Result<f64> {
    if profile.cells < 8 {
        return Err(Error::InvalidParameter(format!(
            "edge/bulk ratio needs N >= 8, got {}",
            profile.cells
        )));
    }
    if window == 0 || window > profile.cells / 2 {
        return Err(Error::InvalidParameter(format!("edge window {window} out of range")));
    }
    let missing = |i: usize| Error::InvalidParameter(format!("profile lacks cell {i}"));
    let mut edge = 0.0;
    for i in 0..window {
        edge += profile.at(i).ok_or_else(|| missing(i))?;
    }
    edge /= window as f64;
    let mid = profile.middle();
    let bulk = profile.at(mid).ok_or_else(|| missing(mid))?;
    if bulk.abs() < 1e-15 {
        return Err(Error::DivisionByZero(format!("bulk occupation {bulk:e}")));
    }
    Ok(edge / bulk)
}
