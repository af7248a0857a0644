//! Single-node neural network classifiers trained under the uniform
//! (max-norm) loss.
//!
//! The uniform loss of a network with one output node and no hidden layer is
//! quasiconvex in the weights, so its minimum can be bracketed by bisection:
//! each midpoint `L` is tested by a linear feasibility problem obtained by
//! pulling `|y - σ(u)| <= L` back through the inverse activation. The crate
//! also ships a sum-of-squares gradient-descent baseline over the same
//! architecture, UCR-format data handling, and the experiment runner used to
//! compare the two.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix `f64`.

pub mod bisection;
pub mod data;
pub mod error;
pub mod experiment;
pub mod feasibility;
pub mod model;
pub mod mse;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Sample = model::Sample<f64>;
pub type Dataset = model::Dataset<f64>;
pub type WeightVector = model::WeightVector<f64>;
pub type LeakyRelu = model::LeakyRelu<f64>;
pub type IntervalConstraint = feasibility::IntervalConstraint<f64>;
pub type FeasibilityResult = feasibility::FeasibilityResult<f64>;
pub type BisectionConfig = bisection::BisectionConfig<f64>;
pub type BisectionReport = bisection::BisectionReport<f64>;
pub type GdConfig = mse::GdConfig<f64>;
