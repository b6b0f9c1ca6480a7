//! Fidelity `F(rho, rho')`, `Tr sqrt(rho) sqrt(rho')` and their difference
//! `Delta` for thermal states of quadratic fermion Hamiltonians.
//!
//! Both states factorize over modes; each mode is a two-level single-particle
//! Hamiltonian `E n . sigma / 2` whose four-dimensional Fock space carries the
//! thermal state. With `u = exp(-E/2T)`, `v = exp(-E'/2T')` and the overlap
//! weights `w+ = |n + n'|^2 / 4`, `w- = |n - n'|^2 / 4`, the closed forms are
//!
//! ```text
//! F     = (2 sqrt(uv) + sqrt(w+ (1 + uv)^2 + w- (u + v)^2)) / ((1 + u)(1 + v))
//! Tr    = (2 sqrt(uv) + w+ (1 + uv) + w- (u + v))          / ((1 + u)(1 + v))
//! Delta = w+ w- (1 - u)^2 (1 - v)^2 / ((A + B)(1 + u)(1 + v))
//! ```
//!
//! where `A` and `B` are the square-root and linear numerator terms. These
//! are the hyperbolic expressions with `exp(E/4T + E'/4T')` divided out of
//! numerator and denominator, so they never overflow, stay exact at `T = 0`
//! (`u = 0`, pure states), and give `Delta >= 0` without cancellation.

use num_complex::Complex64;

use crate::error::{ensure_finite, Error, Result};
use crate::mat2::Mat2;
use crate::spectra::{bloch_state, Model, ModelParams, MomentumGrid};

/// One mode of a thermal state: splitting `E`, unit Bloch vector and
/// temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeState {
    pub energy: f64,
    pub n: [f64; 3],
    pub temperature: f64,
}

impl ModeState {
    pub fn new(energy: f64, n: [f64; 3], temperature: f64) -> ModeState {
        ModeState {
            energy,
            n,
            temperature,
        }
    }

    fn validate(&self) -> Result<()> {
        ensure_finite("E", self.energy)?;
        ensure_finite("T", self.temperature)?;
        for x in self.n {
            ensure_finite("n", x)?;
        }
        if self.energy < 0.0 || self.temperature < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "need E >= 0 and T >= 0, got E = {}, T = {}",
                self.energy, self.temperature
            )));
        }
        let norm2: f64 = self.n.iter().map(|x| x * x).sum();
        if (norm2 - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("Bloch vector norm^2 = {norm2}")));
        }
        Ok(())
    }

    /// `exp(-E / 2T)`; the `T -> 0` limit is 0 for `E > 0`, and a vanishing
    /// splitting is maximally mixed at any temperature.
    pub fn boltzmann(&self) -> f64 {
        if self.energy == 0.0 {
            1.0
        } else if self.temperature == 0.0 {
            0.0
        } else {
            (-self.energy / (2.0 * self.temperature)).exp()
        }
    }
}

/// The two states `(E, n, T)` and `(E', n', T')` of one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePair {
    pub first: ModeState,
    pub second: ModeState,
}

impl ModePair {
    pub fn new(first: ModeState, second: ModeState) -> ModePair {
        ModePair { first, second }
    }
}

/// Per-mode fidelity, trace overlap and their difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeTerms {
    pub fidelity: f64,
    pub trace_sqrt: f64,
    pub delta: f64,
}

/// Closed-form per-mode terms.
pub fn mode_terms(pair: &ModePair) -> Result<ModeTerms> {
    pair.first.validate()?;
    pair.second.validate()?;
    let u = pair.first.boltzmann();
    let v = pair.second.boltzmann();
    let (a, b) = (pair.first.n, pair.second.n);
    let plus: f64 = (0..3).map(|i| (a[i] + b[i]).powi(2)).sum();
    let minus: f64 = (0..3).map(|i| (a[i] - b[i]).powi(2)).sum();
    let wp = plus / (plus + minus);
    let wm = minus / (plus + minus);

    let uv = u * v;
    let root = 2.0 * uv.sqrt();
    let den = (1.0 + u) * (1.0 + v);
    let big_a = (wp * (1.0 + uv).powi(2) + wm * (u + v).powi(2)).sqrt();
    let big_b = wp * (1.0 + uv) + wm * (u + v);
    let fidelity = (root + big_a) / den;
    let trace_sqrt = (root + big_b) / den;
    let delta = if big_a + big_b > 0.0 {
        wp * wm * ((1.0 - u) * (1.0 - v)).powi(2) / ((big_a + big_b) * den)
    } else {
        0.0
    };
    if !(fidelity.is_finite() && trace_sqrt.is_finite() && delta.is_finite()) {
        return Err(Error::NonFiniteInput(format!("mode pair {pair:?}")));
    }
    Ok(ModeTerms {
        fidelity,
        trace_sqrt,
        delta,
    })
}

pub fn fidelity_per_mode(pair: &ModePair) -> Result<f64> {
    Ok(mode_terms(pair)?.fidelity)
}

pub fn trace_sqrt_per_mode(pair: &ModePair) -> Result<f64> {
    Ok(mode_terms(pair)?.trace_sqrt)
}

/// Total fidelity over a set of modes.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityReport {
    pub fidelity: f64,
    /// Geometric mean of the per-mode fidelities: `F^(1/Nk)` for equal
    /// multiplicities; independent of the system size.
    pub fidelity_density: f64,
    pub trace_sqrt: f64,
    /// `F - Tr sqrt(rho) sqrt(rho')`, accumulated from the per-mode
    /// differences rather than by subtracting the totals.
    pub delta: f64,
    pub per_mode: Option<Vec<ModeTerms>>,
    pub modes: usize,
}

/// Sum in a fixed pairwise tree; the order depends only on the length.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

pub fn pairwise_product(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        xs.iter().product()
    } else {
        let mid = xs.len() / 2;
        pairwise_product(&xs[..mid]) * pairwise_product(&xs[mid..])
    }
}

/// Combine per-mode terms into totals. With `multiplicity`, mode `j` enters
/// the product with exponent `multiplicity[j]` (used for non-uniform mode
/// samplings); otherwise every mode counts once.
pub fn combine_modes(terms: Vec<ModeTerms>, multiplicity: Option<&[f64]>, keep: bool) -> FidelityReport {
    let n = terms.len();
    let mult = |j: usize| multiplicity.map_or(1.0, |m| m[j]);
    let total_mult: f64 = match multiplicity {
        Some(m) => pairwise_sum(m),
        None => n as f64,
    };
    let (fidelity, trace_sqrt, log_f);
    if multiplicity.is_none() {
        let fs: Vec<f64> = terms.iter().map(|t| t.fidelity).collect();
        let ts: Vec<f64> = terms.iter().map(|t| t.trace_sqrt).collect();
        fidelity = pairwise_product(&fs);
        trace_sqrt = pairwise_product(&ts);
        log_f = pairwise_sum(&fs.iter().map(|f| f.ln()).collect::<Vec<_>>());
    } else {
        let lf: Vec<f64> = (0..n).map(|j| mult(j) * terms[j].fidelity.ln()).collect();
        let lt: Vec<f64> = (0..n).map(|j| mult(j) * terms[j].trace_sqrt.ln()).collect();
        log_f = pairwise_sum(&lf);
        fidelity = log_f.exp();
        trace_sqrt = pairwise_sum(&lt).exp();
    }
    let delta = if terms.iter().all(|t| t.fidelity > 0.0) {
        // Tr = F prod_j (1 - delta_j / F_j)^m_j
        let logs: Vec<f64> = (0..n)
            .map(|j| mult(j) * (-terms[j].delta / terms[j].fidelity).ln_1p())
            .collect();
        fidelity * -pairwise_sum(&logs).exp_m1()
    } else {
        (fidelity - trace_sqrt).max(0.0)
    };
    FidelityReport {
        fidelity,
        fidelity_density: if total_mult > 0.0 { (log_f / total_mult).exp() } else { 1.0 },
        trace_sqrt,
        delta,
        per_mode: keep.then_some(terms),
        modes: n,
    }
}

/// Fidelity between the thermal states of two lattice models of the same
/// family, as a product over the momentum grid.
pub fn fidelity_total(a: &ModelParams, b: &ModelParams, grid: &MomentumGrid) -> Result<FidelityReport> {
    fidelity_total_impl(a, b, grid, false)
}

/// As [`fidelity_total`], keeping the per-mode factors.
pub fn fidelity_total_detailed(
    a: &ModelParams,
    b: &ModelParams,
    grid: &MomentumGrid,
) -> Result<FidelityReport> {
    fidelity_total_impl(a, b, grid, true)
}

fn fidelity_total_impl(
    a: &ModelParams,
    b: &ModelParams,
    grid: &MomentumGrid,
    keep: bool,
) -> Result<FidelityReport> {
    a.validate()?;
    b.validate()?;
    if std::mem::discriminant(&a.model) != std::mem::discriminant(&b.model) {
        return Err(Error::InvalidParameter(format!(
            "cannot compare {} with {}",
            a.model.name(),
            b.model.name()
        )));
    }
    if matches!(a.model, Model::Bcs(_)) {
        return Err(Error::UnsupportedModel("bcs"));
    }
    let terms = grid
        .points()
        .iter()
        .map(|&k| {
            let at_k = |e: Error| Error::AtMomentum {
                k,
                source: Box::new(e),
            };
            let sa = bloch_state(&a.model, k).map_err(at_k)?;
            let sb = bloch_state(&b.model, k).map_err(at_k)?;
            mode_terms(&ModePair::new(
                ModeState::new(sa.energy, sa.n, a.temperature),
                ModeState::new(sb.energy, sb.n, b.temperature),
            ))
            .map_err(at_k)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(combine_modes(terms, None, keep))
}

/// Dense matrix-function evaluation of the per-mode fidelity and trace
/// overlap, independent of the closed forms.
///
/// With `e^{-C} = e^{-beta H/2} e^{-beta' H'} e^{-beta H/2}`:
/// `F = det(I + e^{-C/2}) / sqrt(det(I + e^{-beta H}) det(I + e^{-beta' H'}))`
/// and `Tr sqrt(rho) sqrt(rho') = det(I + e^{-beta H/2} e^{-beta' H'/2}) / (same)`.
/// The small eigenvalue of `e^{-C}` and the determinant of the product are
/// taken from determinant identities because they are lost to cancellation
/// when the factors are strongly conditioned.
pub fn fidelity_oracle_mode(h: &Mat2, h2: &Mat2, t: f64, t2: f64) -> Result<(f64, f64)> {
    for (name, m) in [("H", h), ("H'", h2)] {
        let scale = m.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        if m.hermiticity_error() > 1e-12 * scale {
            return Err(Error::InvalidParameter(format!("{name} is not Hermitian")));
        }
        if m.trace().norm() > 1e-12 * scale {
            return Err(Error::InvalidParameter(format!("{name} is not traceless")));
        }
    }
    ensure_finite("T", t)?;
    ensure_finite("T'", t2)?;
    if t <= 0.0 || t2 <= 0.0 {
        return Err(Error::InvalidParameter("oracle needs T, T' > 0".into()));
    }
    let (beta, beta2) = (1.0 / t, 1.0 / t2);
    let (ev, _) = h.eigh()?;
    let (ev2, _) = h2.eigh()?;
    let max_exponent = ev.iter().map(|e| (beta * e).abs()).chain(ev2.iter().map(|e| (beta2 * e).abs()));
    if max_exponent.fold(0.0, f64::max) > 350.0 {
        return Err(Error::IllConditioned("thermal weights exceed the safe exponent range".into()));
    }

    let half = h.hermitian_function(|x| (-0.5 * beta * x).exp())?;
    let full2 = h2.hermitian_function(|x| (-beta2 * x).exp())?;
    let half2 = h2.hermitian_function(|x| (-0.5 * beta2 * x).exp())?;
    let det_half: f64 = ev.iter().map(|x| (-0.5 * beta * x).exp()).product();
    let det_half2: f64 = ev2.iter().map(|x| (-0.5 * beta2 * x).exp()).product();
    let z: f64 = ev.iter().map(|x| 1.0 + (-beta * x).exp()).product();
    let z2: f64 = ev2.iter().map(|x| 1.0 + (-beta2 * x).exp()).product();
    let norm = (z * z2).sqrt();

    let p = half * full2 * half;
    let (pv, _) = p.eigh()?;
    let large = pv[1];
    if large.is_nan() || large <= 0.0 {
        return Err(Error::IllConditioned(format!("e^-C has no positive eigenvalue ({large:e})")));
    }
    let small = det_half * det_half * det_half2 * det_half2 / large;
    let fidelity = (1.0 + large.sqrt()) * (1.0 + small.sqrt()) / norm;

    let x = half * half2;
    let tr: Complex64 = x.trace();
    let trace_sqrt = (1.0 + tr.re + det_half * det_half2) / norm;
    Ok((fidelity, trace_sqrt))
}
