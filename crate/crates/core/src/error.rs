use thiserror::Error;

/// Every failure the library reports. Numeric variants carry the achieved defect.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("attempted to evaluate an infinite boundary")]
    EvalOnInfinite,
    #[error("invalid breakpoints: {0}")]
    InvalidBreakpoints(String),
    #[error("monotone invariant violated: {0}")]
    InvariantViolation(String),
    #[error("no periodic points of period {q}")]
    NoPeriodicPoints { q: u64 },
    #[error("no point realizing the mean rotation (min defect {defect:e})")]
    WitnessNotFound { defect: f64 },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("matrix has non-positive determinant {det:e}")]
    DegenerateMatrix { det: f64 },
    #[error("cover levels differ: {0} vs {1}")]
    LevelMismatch(u32, u32),
    #[error("element is neither hyperbolic nor parabolic")]
    NotHyperbolicOrParabolic,
    #[error("axis endpoints coincide at the cover level")]
    DegenerateAxis,
    #[error("multiplier must be positive and different from 1, got {0}")]
    InvalidMultiplier(f64),

    #[error("ping-pong condition fails: {0}")]
    PingPongViolation(String),
    #[error("seed does not commute with the gap stabilizer (defect {defect:e})")]
    SeedNotCommuting { defect: f64 },
    #[error("seed moves the endpoints of gap {gap} (defect {defect:e})")]
    SeedMovesEndpoints { gap: usize, defect: f64 },

    #[error("degenerate quadruple for the cross-ratio")]
    DegenerateQuadruple,
    #[error("cross-ratio {0} is not positive")]
    NonPositiveCrossRatio(f64),
    #[error("point lies on the diagonal")]
    OnDiagonal,
    #[error("point outside the model")]
    OutsideDomain,
    #[error("boundary normalization violated at x = {x} (value {value})")]
    NormalizationViolation { x: f64, value: f64 },
    #[error("operation needs finite boundaries")]
    InfiniteBoundary,
    #[error("boundaries cross at x = {x}")]
    BoundariesCross { x: f64 },
    #[error("no rotation of angle >= 1/{grid} is spacelike (min displacement {displacement:e})")]
    NoWitness { grid: usize, displacement: f64 },

    #[error("maps fail to commute (defect {defect:e})")]
    CommutationViolation { defect: f64 },
    #[error("rotation number mismatch: expected 1/{k}, enclosure [{lo}, {hi}]")]
    RotationMismatch { k: u32, lo: f64, hi: f64 },
    #[error("rotation number is not of the form 1/k")]
    RotationNotReciprocal,
    #[error("too few gaps ({0}) for a collapse")]
    TooFewGaps(usize),
    #[error("map does not permute the gap system (defect {defect:e})")]
    GapsNotPermuted { defect: f64 },
    #[error("closed-set point not periodic of period {k} (defect {defect:e})")]
    NotPeriodicOnLimitSet { k: u32, defect: f64 },
    #[error("gap orbit of length {found}, expected {expected}")]
    OrbitLengthMismatch { expected: usize, found: usize },
    #[error("map is not of finite order {k} (defect {defect:e})")]
    NotFiniteOrder { k: u32, defect: f64 },
    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("invariant set saturation exceeded {cap} points")]
    NotElementary { cap: usize },
    #[error("equicontinuity modulus {modulus:e} exceeds {bound:e}")]
    ModulusBlewUp { modulus: f64, bound: f64 },
    #[error("stabilizer is neither cyclic nor a supplied flow: {0}")]
    StabilizerNotCyclicOrFlow(String),
    #[error("orbit search exceeded {bound} steps at x = {x}")]
    OrbitEscape { x: f64, bound: u32 },
    #[error("stabilizer contains a hyperbolic element")]
    MixedStabilizer,
    #[error("integrand not integrable on the range")]
    NonIntegrable,

    #[error("parse error: {0}")]
    Parse(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
