//! Speed of quantum evolution under boundary-extendable monotone metrics.
//!
//! - [`linalg`]: small dense complex matrices and a Hermitian eigensolver.
//! - [`metrics`]: SLD and Wigner–Yanase Morozova–Chentsov functions.
//! - [`speed`]: instantaneous speed of a trajectory and the `∂_ξS` speedup detector.
//! - [`models`]: closed precession and open amplitude-damping qubit models.
//! - [`analysis`]: memory and speedup regions of the damped qubit.

pub mod analysis;
pub mod linalg;
pub mod metrics;
pub mod models;
pub mod speed;

pub use analysis::{region_report, regime_classify, AnalysisError, Regime, RegionReport, SpeedupInterval};
pub use linalg::{eigh, ComplexMatrix, HermitianEigenSystem, LinalgError, C64};
pub use metrics::{MetricError, MetricKind};
pub use models::{Alignment, Bath, ModelError, ModelKind, ModelSpec, OpenSystemParams};
pub use speed::{speed_at, speed_curve, speedup_measure, SpeedCurve, SpeedError, SpeedupKind, Trajectory};
