use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every rejection raised by the library. Variants carry the offending values
/// so callers (and the CLI) can report them without re-deriving context.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value {value} at node (ix={ix}, ik={ik})")]
    NonFinite { ix: usize, ik: usize, value: f64 },

    #[error("derivative order {order} exceeds supported maximum {max}")]
    DerivativeOrder { order: usize, max: usize },

    #[error("axis has {nodes} nodes, stencil needs at least {needed}")]
    StencilTooWide { nodes: usize, needed: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("state not contained in coordinate grid: boundary amplitude {amplitude:e} exceeds {limit:e}")]
    InsufficientExtent { amplitude: f64, limit: f64 },

    #[error("Wigner quadrature imaginary residue {residue:e} at (x={x}, k={k}) exceeds {limit:e}")]
    ImaginaryResidue { x: f64, k: f64, residue: f64, limit: f64 },

    #[error("norm drift {drift:e} exceeds {limit:e}; enlarge the coordinate grid")]
    NormDrift { drift: f64, limit: f64 },

    #[error("invalid evolution request: {0}")]
    InvalidEvolution(String),

    #[error("potential '{label}' has no analytic derivative of order {order}")]
    MissingDerivative { label: String, order: usize },

    #[error("potential '{label}' is not bounded below on the grid")]
    UnboundedPotential { label: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("beta = {beta} with non-integer power needs W >= 0; {count} negative nodes below -{floor:e}")]
    NegativeForRealPower { beta: f64, count: usize, floor: f64 },

    #[error("integral of W^beta is {value:e}; logarithm undefined")]
    NonPositiveIntegral { value: f64 },

    #[error("time tags inconsistent: {0}")]
    TauMismatch(String),

    #[error("start point ({x}, {k}) is an equilibrium (|grad H| = {grad:e})")]
    Equilibrium { x: f64, k: f64, grad: f64 },

    #[error("orbit left the bounded region at tau = {tau} (x={x}, k={k}, bound {bound})")]
    UnboundedOrbit { tau: f64, x: f64, k: f64, bound: f64 },

    #[error("no period found within tau = {tau_limit}")]
    NoPeriod { tau_limit: f64 },

    #[error("orbit does not close: mismatch {closure:e} exceeds {limit:e}")]
    OrbitNotClosed { closure: f64, limit: f64 },

    #[error("phase-space speed {speed:e} at orbit sample {index} is degenerate")]
    DegenerateVelocity { index: usize, speed: f64 },

    #[error("point (x={x}, k={k}) lies outside the safe interpolation interior")]
    OutsideInterior { x: f64, k: f64 },

    #[error("|W| = {value:e} <= {epsilon:e} at orbit sample {index} (x={x}, k={k})")]
    BelowEpsilon { index: usize, x: f64, k: f64, value: f64, epsilon: f64 },

    #[error("configuration: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable snake_case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "invalid_grid",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::NonFinite { .. } => "non_finite",
            Error::DerivativeOrder { .. } => "derivative_order",
            Error::StencilTooWide { .. } => "stencil_too_wide",
            Error::InvalidState(_) => "invalid_state",
            Error::InsufficientExtent { .. } => "insufficient_extent",
            Error::ImaginaryResidue { .. } => "imaginary_residue",
            Error::NormDrift { .. } => "norm_drift",
            Error::InvalidEvolution(_) => "invalid_evolution",
            Error::MissingDerivative { .. } => "missing_derivative",
            Error::UnboundedPotential { .. } => "unbounded_potential",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NegativeForRealPower { .. } => "negative_for_real_power",
            Error::NonPositiveIntegral { .. } => "non_positive_integral",
            Error::TauMismatch(_) => "tau_mismatch",
            Error::Equilibrium { .. } => "equilibrium",
            Error::UnboundedOrbit { .. } => "unbounded_orbit",
            Error::NoPeriod { .. } => "no_period",
            Error::OrbitNotClosed { .. } => "orbit_not_closed",
            Error::DegenerateVelocity { .. } => "degenerate_velocity",
            Error::OutsideInterior { .. } => "outside_interior",
            Error::BelowEpsilon { .. } => "below_epsilon",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}
