//! Lattice models and their momentum-space two-level decomposition
//! `H(k) = E(k) n(k) . sigma / 2`.
//!
//! Bloch vectors are always expressed in the chiral frame: the basis in which
//! the model's chiral operator is `sigma_z`, so `n(k)` lies on the equator and
//! its azimuth `phi(k)` carries the winding.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;

use crate::bcs::BcsParams;
use crate::error::{ensure_finite, Error, Result};
use crate::mat2::Mat2;
use crate::realspace::{self, Boundary};

/// Hamiltonian family and its couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    /// Creutz ladder: leg hopping `k_hop` with Peierls phase `flux`, diagonal
    /// hopping `k_hop`, rung hopping `rung`.
    Creutz { k_hop: f64, rung: f64, flux: f64 },
    /// Su-Schrieffer-Heeger chain with intra-cell `v` and inter-cell `w`.
    Ssh { v: f64, w: f64 },
    /// Kitaev chain with hopping `t`, chemical potential `mu` and p-wave
    /// pairing `delta`.
    Kitaev { t: f64, mu: f64, delta: f64 },
    /// Mean-field s-wave superconductor in the constant-DOS shell model.
    Bcs(BcsParams),
}

impl Model {
    /// Creutz ladder at `2K = 1`, `phi = pi/2`.
    pub fn creutz(rung: f64) -> Model {
        Model::Creutz {
            k_hop: 0.5,
            rung,
            flux: FRAC_PI_2,
        }
    }

    pub fn ssh(v: f64, w: f64) -> Model {
        Model::Ssh { v, w }
    }

    /// Kitaev chain at `t = 0.5`, `delta = 1`.
    pub fn kitaev(mu: f64) -> Model {
        Model::Kitaev {
            t: 0.5,
            mu,
            delta: 1.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Model::Creutz { .. } => "creutz",
            Model::Ssh { .. } => "ssh",
            Model::Kitaev { .. } => "kitaev",
            Model::Bcs(_) => "bcs",
        }
    }

    /// Parameter names accepted by [`Model::param`] and [`Model::with_param`].
    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            Model::Creutz { .. } => &["K", "M", "phi"],
            Model::Ssh { .. } => &["v", "w"],
            Model::Kitaev { .. } => &["t", "mu", "delta"],
            Model::Bcs(_) => &["V", "mu", "omega_D", "N0"],
        }
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        match (self, name) {
            (Model::Creutz { k_hop, .. }, "K") => Some(*k_hop),
            (Model::Creutz { rung, .. }, "M") => Some(*rung),
            (Model::Creutz { flux, .. }, "phi") => Some(*flux),
            (Model::Ssh { v, .. }, "v") => Some(*v),
            (Model::Ssh { w, .. }, "w") => Some(*w),
            (Model::Kitaev { t, .. }, "t") => Some(*t),
            (Model::Kitaev { mu, .. }, "mu") => Some(*mu),
            (Model::Kitaev { delta, .. }, "delta") => Some(*delta),
            (Model::Bcs(p), "V") => Some(p.coupling),
            (Model::Bcs(p), "mu") => Some(p.chemical_potential),
            (Model::Bcs(p), "omega_D") => Some(p.cutoff),
            (Model::Bcs(p), "N0") => Some(p.dos),
            _ => None,
        }
    }

    /// Copy with one named parameter replaced.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Model> {
        let mut m = *self;
        let slot = match (&mut m, name) {
            (Model::Creutz { k_hop, .. }, "K") => k_hop,
            (Model::Creutz { rung, .. }, "M") => rung,
            (Model::Creutz { flux, .. }, "phi") => flux,
            (Model::Ssh { v, .. }, "v") => v,
            (Model::Ssh { w, .. }, "w") => w,
            (Model::Kitaev { t, .. }, "t") => t,
            (Model::Kitaev { mu, .. }, "mu") => mu,
            (Model::Kitaev { delta, .. }, "delta") => delta,
            (Model::Bcs(p), "V") => &mut p.coupling,
            (Model::Bcs(p), "mu") => &mut p.chemical_potential,
            (Model::Bcs(p), "omega_D") => &mut p.cutoff,
            (Model::Bcs(p), "N0") => &mut p.dos,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "{} has no parameter '{name}' (expected one of {:?})",
                    self.name(),
                    self.param_names()
                )))
            }
        };
        *slot = value;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Model::Creutz { k_hop, rung, flux } => {
                ensure_finite("K", k_hop)?;
                ensure_finite("M", rung)?;
                ensure_finite("phi", flux)
            }
            Model::Ssh { v, w } => {
                ensure_finite("v", v)?;
                ensure_finite("w", w)
            }
            Model::Kitaev { t, mu, delta } => {
                ensure_finite("t", t)?;
                ensure_finite("mu", mu)?;
                ensure_finite("delta", delta)
            }
            Model::Bcs(p) => p.validate(),
        }
    }

    /// Largest hopping amplitude; sets the scale of the gap tolerance and of
    /// the default quasi-particle chemical potential.
    pub fn hopping_scale(&self) -> f64 {
        let s = match *self {
            Model::Creutz { k_hop, rung, .. } => (2.0 * k_hop).abs().max(rung.abs()),
            Model::Ssh { v, w } => v.abs().max(w.abs()),
            Model::Kitaev { t, delta, .. } => (2.0 * t).abs().max(delta.abs()),
            Model::Bcs(p) => p.cutoff,
        };
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    pub fn is_chiral(&self) -> bool {
        match *self {
            Model::Creutz { flux, .. } => flux.cos().abs() < 1e-12,
            Model::Ssh { .. } | Model::Kitaev { .. } => true,
            Model::Bcs(_) => false,
        }
    }
}

/// Model plus the temperature of the thermal state built from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub model: Model,
    pub temperature: f64,
}

impl ModelParams {
    pub fn new(model: Model, temperature: f64) -> Result<ModelParams> {
        let p = ModelParams { model, temperature };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        ensure_finite("T", self.temperature)?;
        if self.temperature < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        Ok(())
    }
}

/// Band splitting and unit Bloch vector at one momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    /// Full splitting `E(k)` between the two single-particle levels `±E/2`.
    pub energy: f64,
    /// Unit Bloch vector in the chiral frame (`z` is the chiral axis).
    pub n: [f64; 3],
    /// Azimuth of `n` in the chiral frame, in `(-pi, pi]`.
    pub phi: f64,
}

/// Uniform samples `k_j = -pi + 2 pi j / Nk`, `j = 0..Nk`, of the Brillouin
/// zone; the loop closes from the last point back to `k = pi = -pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    points: Vec<f64>,
}

impl MomentumGrid {
    pub fn new(nk: usize) -> Result<MomentumGrid> {
        if nk < 3 {
            return Err(Error::InvalidParameter(format!(
                "momentum grid needs at least 3 points, got {nk}"
            )));
        }
        let h = TAU / nk as f64;
        Ok(MomentumGrid {
            points: (0..nk).map(|j| -PI + h * j as f64).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn step(&self) -> f64 {
        TAU / self.points.len() as f64
    }

    /// Grid with twice the points (contains this one).
    pub fn refined(&self) -> MomentumGrid {
        MomentumGrid::new(2 * self.len()).expect("refinement of a valid grid")
    }
}

/// `H(k)` in the model's native orbital (or Nambu) basis.
pub fn hamiltonian_k(model: &Model, k: f64) -> Result<Mat2> {
    let (h0, h) = native_components(model, k)?;
    Ok(Mat2::pauli(h) + Mat2::IDENTITY.scale(Complex64::new(h0, 0.0)))
}

/// The chiral operator in the native basis.
pub fn chiral_operator(model: &Model) -> Result<Mat2> {
    match model {
        Model::Creutz { .. } => Ok(Mat2::SIGMA_Y),
        Model::Ssh { .. } => Ok(Mat2::SIGMA_Z),
        Model::Kitaev { .. } => Ok(Mat2::SIGMA_X),
        Model::Bcs(_) => Err(Error::UnsupportedModel("bcs")),
    }
}

/// Unitary `W` with `W Gamma W^† = sigma_z`: maps native-basis operators to
/// the chiral frame.
pub fn chiral_unitary(model: &Model) -> Result<Mat2> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match model {
        // exp(-i pi/4 sigma_x)
        Model::Creutz { .. } => Ok(Mat2([
            [Complex64::new(h, 0.0), Complex64::new(0.0, -h)],
            [Complex64::new(0.0, -h), Complex64::new(h, 0.0)],
        ])),
        Model::Ssh { .. } => Ok(Mat2::IDENTITY),
        // rotation by -2pi/3 about (1,1,1): x -> z, y -> x, z -> y
        Model::Kitaev { .. } => Ok(Mat2([
            [Complex64::new(0.5, 0.5), Complex64::new(0.5, 0.5)],
            [Complex64::new(-0.5, 0.5), Complex64::new(0.5, -0.5)],
        ])),
        Model::Bcs(_) => Err(Error::UnsupportedModel("bcs")),
    }
}

/// Pauli decomposition `(h0, h)` of the native `H(k) = h0 + h . sigma`.
fn native_components(model: &Model, k: f64) -> Result<(f64, [f64; 3])> {
    ensure_finite("k", k)?;
    match *model {
        Model::Creutz { k_hop, rung, flux } => {
            let h0 = -2.0 * k_hop * k.cos() * flux.cos();
            Ok((
                h0,
                [
                    -2.0 * k_hop * k.cos() - rung,
                    0.0,
                    2.0 * k_hop * k.sin() * flux.sin(),
                ],
            ))
        }
        Model::Ssh { v, w } => Ok((0.0, [v + w * k.cos(), w * k.sin(), 0.0])),
        Model::Kitaev { t, mu, delta } => Ok((
            0.0,
            [0.0, -2.0 * delta * k.sin(), -mu - 2.0 * t * k.cos()],
        )),
        Model::Bcs(_) => Err(Error::UnsupportedModel("bcs")),
    }
}

/// Native Pauli components rotated into the chiral frame.
fn chiral_components(model: &Model, h: [f64; 3]) -> [f64; 3] {
    match model {
        Model::Creutz { .. } => [h[0], -h[2], h[1]],
        Model::Kitaev { .. } => [h[1], h[2], h[0]],
        _ => h,
    }
}

/// Two-level decomposition at momentum `k`, in the chiral frame.
pub fn bloch_state(model: &Model, k: f64) -> Result<BlochState> {
    let (h0, h) = native_components(model, k)?;
    if h0.abs() > 1e-12 * model.hopping_scale() || !model.is_chiral() {
        return Err(Error::InvalidParameter(
            "Creutz flux must be ±pi/2 for a chiral two-level decomposition".into(),
        ));
    }
    let d = chiral_components(model, h);
    let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let n = if norm > 0.0 {
        [d[0] / norm, d[1] / norm, 0.0]
    } else {
        [1.0, 0.0, 0.0]
    };
    Ok(BlochState {
        energy: 2.0 * norm,
        n,
        phi: n[1].atan2(n[0]),
    })
}

/// Bloch states on every grid point.
pub fn bloch_states(model: &Model, grid: &MomentumGrid) -> Result<Vec<BlochState>> {
    grid.points()
        .iter()
        .map(|&k| {
            bloch_state(model, k).map_err(|e| Error::AtMomentum {
                k,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Fails with [`Error::GapClosed`] if `min_k E(k)` is below the criticality
/// tolerance (`1e-8` times the hopping scale).
pub fn ensure_gapped(model: &Model, grid: &MomentumGrid, states: &[BlochState]) -> Result<()> {
    let (j, min) = states
        .iter()
        .enumerate()
        .map(|(j, s)| (j, s.energy))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty grid");
    if min < 1e-8 * model.hopping_scale() {
        return Err(Error::GapClosed {
            min_gap: min,
            k: grid.points()[j],
        });
    }
    Ok(())
}

/// Azimuths continued by nearest branch along the grid. The result has
/// `Nk + 1` entries; the last one is the closing point `k = pi`, so
/// `last - first` is `2 pi` times the winding number.
pub fn unwrapped_phases(grid: &MomentumGrid, states: &[BlochState]) -> Result<Vec<f64>> {
    let ks = grid.points();
    let mut out = Vec::with_capacity(states.len() + 1);
    out.push(states[0].phi);
    for j in 1..=states.len() {
        let raw = states[j % states.len()].phi;
        let prev = out[j - 1];
        let jump = (raw - prev + PI).rem_euclid(TAU) - PI;
        if jump.abs() > FRAC_PI_2 {
            return Err(Error::UnwrapFailure {
                k0: ks[j - 1],
                k1: if j == ks.len() { PI } else { ks[j] },
                jump,
            });
        }
        out.push(prev + jump);
    }
    Ok(out)
}

/// Winding number of `n(k)` around the equator of the chiral frame.
///
/// The sign depends on orientation conventions; `|nu|` and its changes
/// across transitions are what carry meaning.
pub fn winding_number(model: &Model, grid: &MomentumGrid) -> Result<i64> {
    if matches!(model, Model::Bcs(_)) {
        return Err(Error::UnsupportedModel("bcs"));
    }
    let states = bloch_states(model, grid)?;
    ensure_gapped(model, grid, &states)?;
    let phis = unwrapped_phases(grid, &states)?;
    let turns = (phis[phis.len() - 1] - phis[0]) / TAU;
    let nu = turns.round();
    if (turns - nu).abs() >= 0.01 {
        return Err(Error::NoConvergence(grid.len()));
    }
    Ok(nu as i64)
}

/// Sorted single-particle spectrum of the `n`-cell periodic chain (BdG
/// doubled for Kitaev).
pub fn periodic_chain_spectrum(model: &Model, n: usize) -> Result<Vec<f64>> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!("periodic chain needs N >= 4, got {n}")));
    }
    let h = realspace::assemble(model, n, Boundary::Periodic)?;
    realspace::eigvalsh(&h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn creutz_gap_closes_at_zone_boundary() {
        let s = bloch_state(&Model::creutz(1.0), PI).unwrap();
        assert!(s.energy.abs() < 1e-14);
        // minimum of E(k) over a fine scan is at k = pi
        let (kmin, _) = (0..=2000)
            .map(|j| -PI + TAU * j as f64 / 2000.0)
            .map(|k| (k, bloch_state(&Model::creutz(1.0), k).unwrap().energy))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert!((kmin.abs() - PI).abs() < 1e-12);
    }

    #[test]
    fn ssh_gap_closes_at_zone_boundary() {
        let s = bloch_state(&Model::ssh(1.0, 1.0), PI).unwrap();
        assert!(s.energy.abs() < 1e-14);
    }

    #[test]
    fn bloch_vector_is_unit_and_equatorial() {
        for model in [Model::creutz(0.4), Model::ssh(0.3, 1.0), Model::kitaev(0.7)] {
            for j in 0..50 {
                let k = -PI + TAU * j as f64 / 50.0 + 0.01;
                let s = bloch_state(&model, k).unwrap();
                let norm = s.n.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-12);
                assert!(s.n[2].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn chiral_unitary_diagonalizes_chiral_operator_and_matches_bloch_vector() {
        for model in [Model::creutz(0.4), Model::ssh(0.3, 1.0), Model::kitaev(0.7)] {
            let w = chiral_unitary(&model).unwrap();
            let g = w * chiral_operator(&model).unwrap() * w.adjoint();
            assert!(g.max_abs_diff(&Mat2::SIGMA_Z) < 1e-14, "{model:?}");
            for &k in &[-2.0, -0.3, 0.9, 2.5] {
                let hk = w * hamiltonian_k(&model, k).unwrap() * w.adjoint();
                let s = bloch_state(&model, k).unwrap();
                let expect = Mat2::pauli([s.n[0], s.n[1], s.n[2]])
                    .scale(Complex64::new(0.5 * s.energy, 0.0));
                assert!(hk.max_abs_diff(&expect) < 1e-13, "{model:?} k={k}");
            }
        }
    }

    #[test]
    fn rejects_bcs_and_non_finite_k() {
        assert!(matches!(
            bloch_state(&Model::Bcs(BcsParams::default()), 0.0),
            Err(Error::UnsupportedModel("bcs"))
        ));
        assert!(matches!(
            bloch_state(&Model::creutz(0.5), f64::NAN),
            Err(Error::NonFiniteInput(_))
        ));
    }

    #[test]
    fn non_chiral_flux_is_rejected() {
        let m = Model::Creutz { k_hop: 0.5, rung: 0.5, flux: 0.3 };
        assert!(bloch_state(&m, 0.2).is_err());
    }

    #[test]
    fn winding_numbers_of_reference_points() {
        let g = MomentumGrid::new(501).unwrap();
        assert_eq!(winding_number(&Model::creutz(0.5), &g).unwrap().abs(), 1);
        assert_eq!(winding_number(&Model::creutz(1.5), &g).unwrap(), 0);
        assert_eq!(winding_number(&Model::kitaev(1.5), &g).unwrap(), 0);
        assert_eq!(winding_number(&Model::kitaev(0.5), &g).unwrap().abs(), 1);
        assert_eq!(winding_number(&Model::ssh(0.5, 1.0), &g).unwrap().abs(), 1);
        assert_eq!(winding_number(&Model::ssh(1.5, 1.0), &g).unwrap(), 0);
    }

    #[test]
    fn winding_fails_at_criticality() {
        let g = MomentumGrid::new(101).unwrap();
        assert!(matches!(
            winding_number(&Model::creutz(1.0), &g),
            Err(Error::GapClosed { .. })
        ));
    }

    #[test]
    fn coarse_grid_near_transition_fails_to_unwrap() {
        let g = MomentumGrid::new(4).unwrap();
        assert!(matches!(
            winding_number(&Model::creutz(0.99), &g),
            Err(Error::UnwrapFailure { .. })
        ));
    }

    #[test]
    fn winding_is_grid_independent() {
        for model in [Model::creutz(0.3), Model::creutz(0.95), Model::kitaev(0.2), Model::ssh(2.0, 1.0)] {
            let nus: Vec<i64> = [101, 501, 1001]
                .iter()
                .map(|&n| winding_number(&model, &MomentumGrid::new(n).unwrap()).unwrap())
                .collect();
            assert!(nus.windows(2).all(|w| w[0] == w[1]), "{model:?}: {nus:?}");
        }
    }

    #[test]
    fn with_param_replaces_and_validates() {
        let m = Model::creutz(0.5).with_param("M", 0.7).unwrap();
        assert_eq!(m.param("M"), Some(0.7));
        assert!(Model::creutz(0.5).with_param("mu", 1.0).is_err());
        assert!(Model::creutz(0.5).with_param("M", f64::INFINITY).is_err());
    }
}
