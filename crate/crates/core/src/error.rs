use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("n_points must be a power of two, got {0}")]
    NotPowerOfTwo(usize),
    #[error("invalid grid bounds: x_min={0}, x_max={1}")]
    InvalidBounds(f64, f64),
    #[error("expected {expected:?} representation, got {got:?}")]
    RepresentationMismatch {
        expected: crate::grid::Representation,
        got: crate::grid::Representation,
    },
    #[error("wavefunctions live on different grids")]
    GridMismatch,
    #[error("wavepacket mass {mass:.3e} within 10% of box edges exceeds 1e-10")]
    BoxOverflow { mass: f64 },
    #[error("symbol is singular on the momentum support of the state: {0}")]
    SingularSymbol(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature/iteration failed to converge: {0}")]
    NonConvergent(String),
    #[error("unknown dispersion relation '{0}'")]
    UnknownDispersion(String),
    #[error("{0}")]
    Invalid(String),
}
