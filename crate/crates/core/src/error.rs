//! Error types shared across the library.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse failure category, used by callers to map errors onto process exit
/// codes: bad input, physically inadmissible scenario, or solver breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Physics,
    Solver,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("fields live on different grids: {expected:?} vs {got:?}")]
    GridMismatch {
        expected: [usize; 3],
        got: [usize; 3],
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// `Im p > 0` somewhere: the medium would exhibit gain and uniqueness of
    /// the scattering solution is no longer guaranteed.
    #[error("gain medium: Im p = {first_im:.3e} > 0 at {count} cell(s), first at cell {first_coords:?}")]
    GainMedium {
        count: usize,
        first_index: usize,
        first_coords: [usize; 3],
        first_im: f64,
    },

    #[error("recipe error: {0}")]
    Recipe(String),

    #[error("singular recipe: 1 + h = 0 at cell {index} with N > 0")]
    SingularRecipe { index: usize },

    #[error("impedance pole: 1 + C0/(zeta |S|) vanishes; effective capacitance is unbounded")]
    SingularImpedance,

    /// zeta = 0 makes the particles acoustically hard; their monopole charge
    /// degenerates to O(k^2 a^3) and the point-scatterer reduction fails.
    #[error("acoustically hard particles (zeta = 0) are not supported")]
    HardParticles,

    #[error("separation condition violated: particle spacing {spacing:.6e} <= {limit:.6e}")]
    SpacingViolation { spacing: f64, limit: f64 },

    #[error("grid too coarse for the wavelength: k * cell_size = {kh:.3} >= 1")]
    Resolution { kh: f64 },

    #[error("kernel evaluated at nearly coincident points (|x - y| < 1e-14)")]
    Singularity,

    #[error("evaluation point lies inside a particle (distance {dist:.3e} < 2a = {limit:.3e})")]
    InsideParticle { dist: f64, limit: f64 },

    /// The system matrix is numerically singular, e.g. at an interior
    /// resonance of the scattering configuration.
    #[error("near-resonant system: condition estimate {cond:.3e} exceeds {limit:.1e}")]
    Resonance { cond: f64, limit: f64 },

    #[error("solver failure: {0}")]
    Solver(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            GridMismatch { .. } | InvalidArgument(_) | Mesh(_) | Parse(_) | Io(_)
            | Singularity => ErrorClass::Config,
            GainMedium { .. } | Recipe(_) | SingularRecipe { .. } | SingularImpedance
            | HardParticles | SpacingViolation { .. } | Resolution { .. }
            | InsideParticle { .. } => ErrorClass::Physics,
            Resonance { .. } | Solver(_) => ErrorClass::Solver,
        }
    }
}
