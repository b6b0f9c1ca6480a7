use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectra::Model;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainKind {
    /// Single-particle matrix of a particle-number conserving Hamiltonian.
    NumberConserving,
    /// Nambu-doubled matrix acting on `(c_1..c_N, c_1^†..c_N^†)`.
    Bdg,
}

/// Dense single-particle (or BdG) matrix of a finite chain.
#[derive(Debug, Clone)]
pub struct ChainHamiltonian {
    pub dim: usize,
    pub cells: usize,
    /// Orbitals per cell in the particle sector (2 for Creutz and SSH, 1 for
    /// Kitaev).
    pub orbitals: usize,
    pub kind: ChainKind,
    /// Row-major `dim x dim`.
    pub entries: Vec<Complex64>,
}

impl ChainHamiltonian {
    fn zeros(cells: usize, orbitals: usize, kind: ChainKind) -> ChainHamiltonian {
        let dim = match kind {
            ChainKind::NumberConserving => cells * orbitals,
            ChainKind::Bdg => 2 * cells * orbitals,
        };
        ChainHamiltonian {
            dim,
            cells,
            orbitals,
            kind,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    /// `amp` on `(to, from)` and its conjugate on `(from, to)`.
    fn hop(&mut self, to: usize, from: usize, amp: Complex64) {
        let n = self.dim;
        self.entries[to * n + from] += amp;
        self.entries[from * n + to] += amp.conj();
    }

    fn onsite(&mut self, i: usize, e: f64) {
        self.entries[i * self.dim + i] += e;
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..=i {
                worst = worst.max((self.entries[i * n + j] - self.entries[j * n + i].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Matrix row of orbital `orb` of cell `cell` in the particle sector.
    pub fn particle_index(&self, cell: usize, orb: usize) -> usize {
        cell * self.orbitals + orb
    }
}

/// Real-space matrix for `cells` unit cells.
pub fn assemble(model: &Model, cells: usize, boundary: Boundary) -> Result<ChainHamiltonian> {
    model.validate()?;
    let bonds: Vec<(usize, usize)> = match boundary {
        Boundary::Open => (0..cells.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
        Boundary::Periodic => (0..cells).map(|i| (i, (i + 1) % cells)).collect(),
    };
    let c = |re: f64, im: f64| Complex64::new(re, im);
    match *model {
        Model::Creutz { k_hop, rung, flux } => {
            let mut h = ChainHamiltonian::zeros(cells, 2, ChainKind::NumberConserving);
            let (a, b) = (|i: usize| 2 * i, |i: usize| 2 * i + 1);
            let leg_a = Complex64::from_polar(-k_hop, -flux);
            let leg_b = Complex64::from_polar(-k_hop, flux);
            for &(i, j) in &bonds {
                h.hop(a(j), a(i), leg_a);
                h.hop(b(j), b(i), leg_b);
                h.hop(b(j), a(i), c(-k_hop, 0.0));
                h.hop(a(j), b(i), c(-k_hop, 0.0));
            }
            for i in 0..cells {
                h.hop(a(i), b(i), c(-rung, 0.0));
            }
            Ok(h)
        }
        Model::Ssh { v, w } => {
            let mut h = ChainHamiltonian::zeros(cells, 2, ChainKind::NumberConserving);
            for i in 0..cells {
                h.hop(2 * i, 2 * i + 1, c(v, 0.0));
            }
            for &(i, j) in &bonds {
                h.hop(2 * i + 1, 2 * j, c(w, 0.0));
            }
            Ok(h)
        }
        Model::Kitaev { t, mu, delta } => {
            // H = 1/2 Psi^† [[h, D], [D^†, -h^T]] Psi with D antisymmetric;
            // the constant from normal ordering is dropped.
            let mut h = ChainHamiltonian::zeros(cells, 1, ChainKind::Bdg);
            let n = cells;
            for i in 0..n {
                h.onsite(i, -mu);
                h.onsite(n + i, mu);
            }
            for &(i, j) in &bonds {
                h.hop(j, i, c(-t, 0.0));
                h.hop(n + j, n + i, c(t, 0.0));
                // D_{j,i} = -delta, D_{i,j} = +delta
                h.hop(j, n + i, c(-delta, 0.0));
                h.hop(i, n + j, c(delta, 0.0));
            }
            Ok(h)
        }
        Model::Bcs(_) => Err(Error::UnsupportedModel("bcs")),
    }
}

/// Chain with open boundary conditions.
pub fn build_open_chain(model: &Model, cells: usize) -> Result<ChainHamiltonian> {
    if cells < 4 {
        return Err(Error::InvalidParameter(format!("open chain needs N >= 4, got {cells}")));
    }
    assemble(model, cells, Boundary::Open)
}
