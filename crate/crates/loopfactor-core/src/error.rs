use core::fmt;

/// Failure modes shared by all modules.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    InvalidDimension { expected: usize, found: usize },
    GroupRank(usize),
    TruncationOverflow { residue: f64 },
    NearSingular { min_det: f64 },
    /// The Galerkin system for K = v_R u is rank deficient or inconsistent: K lies outside S_∞.
    NotInDomain { sigma_ratio: f64, residual: f64 },
    IllConditioned { cond: f64 },
    SpectralFactorizationDiverged { blocks: usize },
    DegenerateSpectrum { gap: f64 },
    CoincidentPoints,
    WallSingularity { root: (usize, usize) },
    PoleProximity,
    SeriesNotConverged { terms: usize },
    MonodromyMismatch { defect: f64 },
    CutoffExceeded { cutoff: i64, mode: i64 },
    Overflow,
    InvalidInput(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDimension { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::GroupRank(n) => write!(f, "SU(n) requires n >= 2, got {n}"),
            Error::TruncationOverflow { residue } => write!(f, "truncation residue {residue:e} above tolerance"),
            Error::NearSingular { min_det } => write!(f, "loop nearly singular (min |det| = {min_det:e})"),
            Error::NotInDomain { sigma_ratio, residual } => write!(
                f,
                "point outside S_inf (sigma_min/sigma_max = {sigma_ratio:e}, residual = {residual:e})"
            ),
            Error::IllConditioned { cond } => write!(f, "ill-conditioned system (cond = {cond:e})"),
            Error::SpectralFactorizationDiverged { blocks } => {
                write!(f, "spectral factorization not stationary at {blocks} blocks")
            }
            Error::DegenerateSpectrum { gap } => write!(f, "degenerate singular values (relative gap {gap:e})"),
            Error::CoincidentPoints => write!(f, "coincident points: cot pole at sigma in 2 pi Z"),
            Error::WallSingularity { root } => write!(f, "a lies on the wall of root e_{} - e_{}", root.0, root.1),
            Error::PoleProximity => write!(f, "argument within guard radius of a pole"),
            Error::SeriesNotConverged { terms } => write!(f, "series not converged after {terms} terms"),
            Error::MonodromyMismatch { defect } => write!(f, "quasi-periodicity defect {defect:e}"),
            Error::CutoffExceeded { cutoff, mode } => write!(f, "mode {mode} beyond cutoff {cutoff}"),
            Error::Overflow => write!(f, "twist factor overflows"),
            Error::InvalidInput(what) => write!(f, "invalid input: {what}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
