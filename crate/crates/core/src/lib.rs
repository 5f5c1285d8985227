//! Numerical validation that a finite or sampled set of real points is the
//! complete real solution set of a polynomial system.

pub mod candidates;
pub mod interpolate;
pub mod linalg;
pub mod pipeline;
pub mod poly;
pub mod sdp;
pub mod soscert;
