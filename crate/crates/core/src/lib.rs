//! Data-driven simulation and predictive control for linear parameter-varying
//! (LPV) systems.
//!
//! Everything works from a single recorded input/scheduling/output trajectory
//! (the *data dictionary*). Hankel matrices built from the dictionary and its
//! Kronecker-lifted companions act as a non-parametric model: any trajectory
//! of the underlying system can be reproduced as a linear combination of
//! dictionary columns, provided the recorded excitation is persistently
//! exciting of high enough order. On top of that representation the crate
//! provides
//!
//! - data-driven simulation ([`predictor`]),
//! - a receding-horizon tracking controller together with a model-based
//!   baseline ([`control`]),
//! - a dense convex QP solver with KKT verification ([`qpcore`]),
//! - reference plants and dictionary generation ([`plantlab`]).
//!
//! All numeric code is generic over the scalar type through the [`Scalar`]
//! trait; `f64` aliases for the main types live at the crate root.

pub mod control;
pub mod error;
mod linalg;
pub mod plantlab;
pub mod predictor;
pub mod qpcore;
pub mod scalar;
pub mod signals;

pub use error::Error;
pub use scalar::Scalar;

/// Double-precision instantiations of the main types.
pub type Seq64 = signals::SignalSequence<f64>;
pub type Hankel64 = signals::HankelMatrix<f64>;
pub type Model64 = plantlab::LpvIoModel<f64>;
pub type Dictionary64 = plantlab::DataDictionary<f64>;
pub type Blocks64 = predictor::PredictorBlocks<f64>;
pub type Qp64 = qpcore::QpProblem<f64>;
pub type Log64 = control::TrajectoryLog<f64>;

/// Single-precision instantiations, for callers that trade accuracy for size.
pub type Seq32 = signals::SignalSequence<f32>;
pub type Hankel32 = signals::HankelMatrix<f32>;
