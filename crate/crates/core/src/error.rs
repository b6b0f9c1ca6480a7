use thiserror::Error;

/// Failures raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operation not supported for the {0} model")]
    UnsupportedModel(&'static str),

    #[error("non-finite input: {0}")]
    NonFiniteInput(String),

    #[error("gap closed: min E(k) = {min_gap:e} at k = {k}")]
    GapClosed { min_gap: f64, k: f64 },

    #[error("angle unwrap failed between k = {k0} and k = {k1} (jump {jump:.3} rad); refine the grid")]
    UnwrapFailure { k0: f64, k1: f64, jump: f64 },

    #[error("ill-conditioned matrix function: {0}")]
    IllConditioned(String),

    #[error("Uhlmann phase undefined: |Tr(rho U)| = {0:e}")]
    DegeneratePhase(f64),

    #[error("singular polar decomposition at step {0}")]
    SingularPolar(usize),

    #[error("quadrature failed to reach tolerance (estimated error {0:e})")]
    QuadratureFailure(f64),

    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    #[error("at k = {k}: {source}")]
    AtMomentum {
        k: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteInput(format!("{name} = {value}")))
    }
}
