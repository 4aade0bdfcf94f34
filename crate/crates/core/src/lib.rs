pub mod circle;
pub mod conjugacy;
pub mod convergence;
pub mod desitter;
pub mod error;
pub mod fixtures;
pub mod moebius;
pub mod schottky;
pub mod surface;

pub use circle::{CirclePoint, CyclicInterval, MonotoneLift};
pub use conjugacy::{CertificateKind, ConjugacyReport, ElementaryCase, GroupSpec};
pub use convergence::{CollapseData, ConvergenceVerdict};
pub use desitter::{ConformalFactor, IsometryPair};
pub use error::{Error, Result};
pub use moebius::MoebiusK;
pub use schottky::{GapSystem, PingPongData};
pub use surface::{BoundaryMaps, SurfaceModel};
