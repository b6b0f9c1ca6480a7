//! Mean-field s-wave superconductor with constant density of states `N0` in
//! the shell `|xi| <= omega_D`.
//!
//! The gap solves `1 = N0 V \int_0^{omega_D} dxi tanh(E / 2T) / E` with
//! `E = sqrt(xi^2 + Delta^2)`; at `T = 0` the root is
//! `omega_D / sinh(1 / N0 V)`.

use crate::error::{ensure_finite, Error, Result};
use crate::fidelity::{combine_modes, mode_terms, FidelityReport, ModePair, ModeState};
use crate::quad::{gauss_legendre, integrate};

/// Default number of Gauss–Legendre nodes sampling the shell.
pub const DEFAULT_SHELL_NODES: usize = 256;
pub const MAX_GAP_ITERATIONS: usize = 200;
const QUAD_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcsParams {
    /// Pairing strength `V >= 0`.
    pub coupling: f64,
    /// Fermi level; energies `xi` are measured from it.
    pub chemical_potential: f64,
    /// Shell half-width `omega_D > 0`.
    pub cutoff: f64,
    /// Density of states `N0 > 0` at the Fermi level.
    pub dos: f64,
}

impl Default for BcsParams {
    fn default() -> BcsParams {
        BcsParams {
            coupling: 0.3,
            chemical_potential: 0.0,
            cutoff: 1.0,
            dos: 1.0,
        }
    }
}

impl BcsParams {
    pub fn with_coupling(coupling: f64) -> BcsParams {
        BcsParams {
            coupling,
            ..BcsParams::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("V", self.coupling)?;
        ensure_finite("mu", self.chemical_potential)?;
        ensure_finite("omega_D", self.cutoff)?;
        ensure_finite("N0", self.dos)?;
        if self.coupling < 0.0 {
            return Err(Error::InvalidParameter(format!("V must be >= 0, got {}", self.coupling)));
        }
        if self.cutoff <= 0.0 || self.dos <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "need omega_D > 0 and N0 > 0, got {} and {}",
                self.cutoff, self.dos
            )));
        }
        Ok(())
    }

    /// Dimensionless coupling `N0 V`.
    pub fn lambda(&self) -> f64 {
        self.dos * self.coupling
    }

    /// Zero-temperature gap `omega_D / sinh(1 / N0 V)`; an upper bound on
    /// the gap at any temperature.
    pub fn zero_temperature_gap(&self) -> f64 {
        let l = self.lambda();
        if l == 0.0 {
            0.0
        } else {
            self.cutoff / (1.0 / l).sinh()
        }
    }
}

fn check_temperature(t: f64) -> Result<()> {
    ensure_finite("T", t)?;
    if t < 0.0 {
        return Err(Error::InvalidParameter(format!("negative temperature {t}")));
    }
    Ok(())
}

/// `N0 V \int_0^{omega_D} tanh(E/2T)/E dxi - 1`; positive below the
/// self-consistent gap, negative above it.
pub fn gap_rhs(delta: f64, t: f64, params: &BcsParams) -> Result<f64> {
    params.validate()?;
    ensure_finite("delta", delta)?;
    check_temperature(t)?;
    if delta < 0.0 {
        return Err(Error::InvalidParameter(format!("trial gap must be >= 0, got {delta}")));
    }
    let lam = params.lambda();
    if lam == 0.0 {
        return Ok(-1.0);
    }
    if delta == 0.0 && t == 0.0 {
        return Ok(f64::INFINITY);
    }
    let integrand = |xi: f64| {
        let e = (xi * xi + delta * delta).sqrt();
        if t == 0.0 {
            1.0 / e
        } else if e == 0.0 {
            0.5 / t
        } else {
            (e / (2.0 * t)).tanh() / e
        }
    };
    // breakpoints at the scale where the integrand turns over, then by decades
    let w = params.cutoff;
    let mut points = vec![0.0];
    let mut s = delta.max(2.0 * t);
    while s < w {
        points.push(s);
        s *= 10.0;
    }
    points.push(w);
    let integral = integrate(integrand, &points, QUAD_REL_TOL, 0.0)?;
    Ok(lam * integral - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSolution {
    pub delta: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `|gap_rhs(delta)|`; zero in the normal phase.
    pub residual: f64,
}

/// Self-consistent gap by bisection on `[0, 10 Delta_0]`.
pub fn solve_gap(t: f64, params: &BcsParams) -> Result<GapSolution> {
    let normal = GapSolution {
        delta: 0.0,
        converged: true,
        iterations: 0,
        residual: 0.0,
    };
    if params.coupling == 0.0 {
        params.validate()?;
        check_temperature(t)?;
        return Ok(normal);
    }
    if gap_rhs(0.0, t, params)? <= 0.0 {
        return Ok(normal);
    }
    let (mut lo, mut hi) = (0.0, 10.0 * params.zero_temperature_gap());
    if gap_rhs(hi, t, params)? > 0.0 {
        return Err(Error::NoConvergence(0));
    }
    for iter in 1..=MAX_GAP_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if gap_rhs(mid, t, params)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            let delta = 0.5 * (lo + hi);
            let residual = gap_rhs(delta, t, params)?.abs();
            return Ok(GapSolution {
                delta,
                converged: residual < 1e-10,
                iterations: iter,
                residual,
            });
        }
    }
    Err(Error::NoConvergence(MAX_GAP_ITERATIONS))
}

/// Whether a nonzero gap solves the gap equation at `t`, i.e.
/// `gap_rhs(0, t) > 0`.
pub fn is_superconducting(t: f64, params: &BcsParams) -> Result<bool> {
    Ok(params.coupling > 0.0 && gap_rhs(0.0, t, params)? > 0.0)
}

/// Critical temperature: the boundary of `solve_gap(T).delta > 0`, located
/// by bisection to a relative width of `1e-13`.
pub fn critical_temperature(params: &BcsParams) -> Result<f64> {
    params.validate()?;
    if params.coupling == 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = params.zero_temperature_gap();
    let mut guard = 0;
    while is_superconducting(hi, params)? {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 60 {
            return Err(Error::NoConvergence(guard));
        }
    }
    for _ in 0..MAX_GAP_ITERATIONS {
        if hi - lo <= 1e-13 * hi {
            return Ok(hi);
        }
        let mid = 0.5 * (lo + hi);
        if is_superconducting(mid, params)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence(MAX_GAP_ITERATIONS))
}

/// Nambu pseudo-spin of one shell energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BdgMode {
    pub xi: f64,
    /// Quasiparticle energy `sqrt(xi^2 + Delta^2)`.
    pub energy: f64,
    /// `(Delta/E, 0, xi/E)`; `(0, 0, 1)` at the degenerate point `E = 0`.
    pub n: [f64; 3],
}

impl BdgMode {
    pub fn new(xi: f64, gap: f64) -> BdgMode {
        let energy = xi.hypot(gap);
        let n = if energy > 0.0 {
            [gap / energy, 0.0, xi / energy]
        } else {
            [0.0, 0.0, 1.0]
        };
        BdgMode { xi, energy, n }
    }

    /// Two-level mode as seen by the fidelity routines: the Nambu
    /// Hamiltonian has levels `±E`, i.e. splitting `2E`.
    pub fn mode_state(&self, t: f64) -> ModeState {
        ModeState::new(2.0 * self.energy, self.n, t)
    }
}

/// Pseudo-spin at energy `xi` with the self-consistent gap at `t`.
pub fn bcs_bloch(xi: f64, t: f64, params: &BcsParams) -> Result<BdgMode> {
    ensure_finite("xi", xi)?;
    let sol = solve_gap(t, params)?;
    if !sol.converged {
        return Err(Error::NoConvergence(sol.iterations));
    }
    Ok(BdgMode::new(xi, sol.delta))
}

/// Gauss–Legendre sampling of `[-omega_D, omega_D]`. Node `j` represents
/// `multiplicity[j] = nodes w_j / (2 omega_D)` modes, so the
/// multiplicities sum to the node count.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyShell {
    pub xi: Vec<f64>,
    pub multiplicity: Vec<f64>,
}

impl EnergyShell {
    pub fn new(cutoff: f64, nodes: usize) -> Result<EnergyShell> {
        ensure_finite("omega_D", cutoff)?;
        if cutoff <= 0.0 || nodes < 2 {
            return Err(Error::InvalidParameter(format!(
                "shell needs omega_D > 0 and at least 2 nodes, got {cutoff} and {nodes}"
            )));
        }
        let (xi, w) = gauss_legendre(nodes, -cutoff, cutoff);
        let scale = nodes as f64 / (2.0 * cutoff);
        Ok(EnergyShell {
            xi,
            multiplicity: w.iter().map(|w| w * scale).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }
}

/// Fidelity between the BCS thermal states with gaps `gap_a`, `gap_b` at
/// temperatures `t_a`, `t_b`, as a weighted product over the shell.
pub fn shell_fidelity(shell: &EnergyShell, (gap_a, t_a): (f64, f64), (gap_b, t_b): (f64, f64)) -> Result<FidelityReport> {
    let terms = shell
        .xi
        .iter()
        .map(|&xi| {
            let a = BdgMode::new(xi, gap_a).mode_state(t_a);
            let b = BdgMode::new(xi, gap_b).mode_state(t_b);
            mode_terms(&ModePair::new(a, b))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(combine_modes(terms, Some(&shell.multiplicity), false))
}

/// Shell fidelity between `(a, t_a)` and `(b, t_b)`, solving both gaps.
/// Both parameter sets must share the same shell.
pub fn bcs_fidelity(a: &BcsParams, t_a: f64, b: &BcsParams, t_b: f64, nodes: usize) -> Result<(FidelityReport, f64, f64)> {
    if a.cutoff != b.cutoff {
        return Err(Error::InvalidParameter("states must share omega_D".into()));
    }
    let shell = EnergyShell::new(a.cutoff, nodes)?;
    let ga = solve_gap(t_a, a)?.delta;
    let gb = solve_gap(t_b, b)?.delta;
    Ok((shell_fidelity(&shell, (ga, t_a), (gb, t_b))?, ga, gb))
}
