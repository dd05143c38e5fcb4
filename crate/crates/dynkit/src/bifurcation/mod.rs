//! Bifurcation structure of the generalized Hénon family near the BT point.

use thiserror::Error;

pub mod attractor;
pub mod curves;
pub mod manifold;
pub mod tangency;

pub use attractor::{classify_attractor, sweep, AttractorClass, AttractorLabel, ClassifyOptions, SweepGrid};
pub use curves::{closest_approach, distance_to_curve, fold_curve, hopf_curve, BifurcationCurve, CurveKind};
pub use manifold::{saddle_manifold, ManifoldArc, Side};
pub use tangency::{tangency_curve, tangency_gap, TangencyGap};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BifError {
    #[error("continuation could not converge from the BT seed")]
    NoSeed,
    #[error("|R| = {0} outside the small-R regime")]
    OutOfRegime(f64),
    #[error("invalid input: {0}")]
    BadInput(String),
    #[error("fixed point is not a saddle with real multipliers")]
    NotASaddle,
    #[error("inverse map undefined at x = {0}")]
    InverseUndefined(f64),
    #[error("no saddle fixed point at these parameters")]
    NoSaddle,
    #[error("manifold left the window before reaching the section")]
    ArcEscape,
    #[error("no tangency crossing found in the seed box")]
    NoCrossing,
}
