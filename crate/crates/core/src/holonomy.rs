//! Uhlmann holonomy of thermal states of chiral two-band models.
//!
//! In the chiral frame the Bloch vector lies on the equator with azimuth
//! `phi(k)`, and the holonomy around the Brillouin zone is the rotation
//! `exp(-i theta sigma_z / 2)` with
//!
//! ```text
//! theta = \oint dk  phi'(k) (1 - sech(E(k) / 2T))
//! ```
//!
//! The integral is evaluated with central differences of the unwrapped
//! azimuth on the periodic grid, refined by doubling until it settles.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{ensure_finite, Error, Result};
use crate::mat2::Mat2;
use crate::spectra::{bloch_state, bloch_states, ensure_gapped, unwrapped_phases, BlochState, Model, MomentumGrid};

/// Change in `theta` under one grid doubling below which it is accepted.
pub const THETA_TOL: f64 = 1e-6;
const MAX_REFINEMENTS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct HolonomyResult {
    pub theta: f64,
    /// `exp(-i theta sigma_z / 2)` in the chiral frame.
    pub unitary: Mat2,
    /// `Tr(rho(pi) U)`.
    pub trace: Complex64,
    /// `arg Tr(rho(pi) U)`, `None` when the trace vanishes.
    pub phase: Option<f64>,
    pub winding: i64,
    /// Size of the grid `theta` was accepted on.
    pub grid_points: usize,
}

fn check_model(model: &Model, t: f64) -> Result<()> {
    model.validate()?;
    ensure_finite("T", t)?;
    if t < 0.0 {
        return Err(Error::InvalidParameter(format!("negative temperature {t}")));
    }
    if matches!(model, Model::Bcs(_)) {
        return Err(Error::UnsupportedModel("bcs"));
    }
    Ok(())
}

/// `1 - sech(x)` without overflow; 1 for `x = inf`.
fn one_minus_sech(x: f64) -> f64 {
    if x > 40.0 {
        return 1.0;
    }
    let e = (-x).exp();
    let sech = 2.0 * e / (1.0 + e * e);
    // 1 - sech = (cosh - 1)/cosh = 2 sinh^2(x/2) / cosh(x)
    if x < 1.0 {
        2.0 * (0.5 * x).sinh().powi(2) * sech
    } else {
        1.0 - sech
    }
}

fn weight(state: &BlochState, t: f64) -> f64 {
    if t == 0.0 {
        if state.energy > 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        one_minus_sech(state.energy / (2.0 * t))
    }
}

/// `theta` and the winding number on a single grid, without refinement.
pub fn holonomy_angle_on(model: &Model, t: f64, grid: &MomentumGrid) -> Result<(f64, i64)> {
    check_model(model, t)?;
    let states = bloch_states(model, grid)?;
    if t == 0.0 {
        ensure_gapped(model, grid, &states)?;
    }
    let phis = unwrapped_phases(grid, &states)?;
    let n = states.len();
    let wind = phis[n] - phis[0];
    let at = |j: isize| -> f64 {
        // periodic continuation of the unwrapped azimuth
        let m = j.rem_euclid(n as isize) as usize;
        phis[m] + wind * ((j - m as isize) / n as isize) as f64
    };
    let terms: Vec<f64> = (0..n)
        .map(|j| {
            let j = j as isize;
            weight(&states[j as usize], t) * 0.5 * (at(j + 1) - at(j - 1))
        })
        .collect();
    let theta = crate::fidelity::pairwise_sum(&terms);
    Ok((theta, (wind / std::f64::consts::TAU).round() as i64))
}

/// `theta` refined by grid doubling until successive values differ by less
/// than [`THETA_TOL`]. Returns the angle, winding and final grid size.
pub fn holonomy_angle_converged(model: &Model, t: f64, grid: &MomentumGrid) -> Result<(f64, i64, usize)> {
    let mut grid = grid.clone();
    let (mut theta, _) = holonomy_angle_on(model, t, &grid)?;
    for _ in 0..MAX_REFINEMENTS {
        let finer = grid.refined();
        let (next, wind) = holonomy_angle_on(model, t, &finer)?;
        let change = (next - theta).abs();
        grid = finer;
        theta = next;
        if change < THETA_TOL {
            return Ok((theta, wind, grid.len()));
        }
    }
    Err(Error::NoConvergence(grid.len()))
}

pub fn holonomy_angle(model: &Model, t: f64, grid: &MomentumGrid) -> Result<f64> {
    Ok(holonomy_angle_converged(model, t, grid)?.0)
}

/// Thermal state `(I - tanh(E/2T) n . sigma) / 2` at momentum `k`, in the
/// chiral frame; the ground-state projector at `T = 0`.
pub fn thermal_state(model: &Model, t: f64, k: f64) -> Result<Mat2> {
    let s = bloch_state(model, k)?;
    let polarization = if s.energy == 0.0 {
        0.0
    } else if t == 0.0 {
        1.0
    } else {
        (s.energy / (2.0 * t)).tanh()
    };
    let half = Complex64::new(0.5, 0.0);
    Ok((Mat2::IDENTITY - Mat2::pauli(s.n).scale(Complex64::new(polarization, 0.0))).scale(half))
}

/// Full holonomy at temperature `t`.
pub fn holonomy(model: &Model, t: f64, grid: &MomentumGrid) -> Result<HolonomyResult> {
    let (theta, winding, grid_points) = holonomy_angle_converged(model, t, grid)?;
    let unitary = Mat2::z_rotation(theta);
    let trace = (thermal_state(model, t, PI)? * unitary).trace();
    let phase = (trace.norm() >= 1e-12).then(|| principal_arg(trace));
    Ok(HolonomyResult {
        theta,
        unitary,
        trace,
        phase,
        winding,
        grid_points,
    })
}

fn principal_arg(z: Complex64) -> f64 {
    let a = z.arg();
    if a <= -PI + 1e-12 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Uhlmann phase `arg Tr(rho(pi) U)` in `(-pi, pi]`.
pub fn uhlmann_phase(model: &Model, t: f64, grid: &MomentumGrid) -> Result<f64> {
    let h = holonomy(model, t, grid)?;
    h.phase.ok_or(Error::DegeneratePhase(h.trace.norm()))
}

/// Discrete parallel transport: the ordered product of the unitary polar
/// factors of `sqrt(rho_{j+1}) sqrt(rho_j)` around the closed grid loop,
/// later steps multiplied on the left. Converges to
/// `exp(-i theta sigma_z / 2)` as the grid is refined.
pub fn holonomy_oracle(model: &Model, t: f64, grid: &MomentumGrid) -> Result<Mat2> {
    check_model(model, t)?;
    if t <= 0.0 {
        return Err(Error::InvalidParameter("transport oracle needs T > 0".into()));
    }
    let roots = bloch_states(model, grid)?
        .iter()
        .map(|s| {
            // exp(-H/2T) up to normalization, shifted so the exponent is <= 0
            let e = 0.5 * s.energy;
            Mat2::pauli(s.n)
                .scale(Complex64::new(e, 0.0))
                .hermitian_function(|x| (-(x + e) / (2.0 * t)).exp())
        })
        .collect::<Result<Vec<_>>>()?;
    let n = roots.len();
    let mut u = Mat2::IDENTITY;
    for j in 0..n {
        let x = roots[(j + 1) % n] * roots[j];
        let step = x.polar_unitary().map_err(|_| Error::SingularPolar(j))?;
        u = step * u;
    }
    Ok(u)
}
