//! Two-stage reinforcement prediction.
//!
//! A conditioned-inhibition benchmark contrasting direct value-function
//! approximation (LMS linear regression and epsilon-SVR) with a two-stage
//! architecture: one rectified-LMS predictor per primary reinforcer whose
//! salience predictions are combined by a value-summing readout. The
//! harness reproduces the six-column comparison table for the full and
//! partial training sets.

pub mod dataset;
pub mod harness;
pub mod linear;
pub mod model_file;
pub mod numerics;
pub mod svr;
pub mod two_stage;
