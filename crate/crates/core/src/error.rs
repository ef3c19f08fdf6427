use alloc::string::String;

use crate::linalg::NoConvergence;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("path-independence violated (cycle residual {residual:e})")]
    Violated { residual: f64 },
    #[error("no Hermitian counterpart: hopping product {product} at bond {bond} is not positive")]
    PtBroken { bond: usize, product: f64 },
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("too close to an exceptional point (condition estimate {condition:e})")]
    NearExceptionalPoint { condition: f64 },
    #[error("eigensolver did not converge after {iterations} sweeps ({unconverged} eigenvalues left)")]
    NoConvergence { iterations: usize, unconverged: usize },
    #[error("eigenvalue {index} has no conjugate partner")]
    NotPseudoHermitian { index: usize },
    #[error("ambiguous conjugate pairing around eigenvalue {index}")]
    AmbiguousPairing { index: usize },
    #[error("only {cells} interior cells available, need at least {needed}")]
    InsufficientSize { cells: usize, needed: usize },
    #[error("mirror condition fails (defect {defect:e})")]
    SymmetryAbsent { defect: f64 },
    #[error("diagonal hops couple the two axes")]
    NotSeparable,
    #[error("sublattice projection vanishes at sample {sample} of {samples}")]
    GaugeSingular { sample: usize, samples: usize },
    #[error("bands touch near sample {sample} of {samples}")]
    BandTouching { sample: usize, samples: usize },
}

impl From<NoConvergence> for Error {
    fn from(e: NoConvergence) -> Self {
        Error::NoConvergence { iterations: e.iterations, unconverged: e.unconverged }
    }
}
