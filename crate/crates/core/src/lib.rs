//! Single-period newsvendor under demand uncertainty, with randomized
//! ("randoptimized") order quantities.
//!
//! - [`dist`]: distributions on [0, ∞) and their integral functionals
//! - [`compound`]: demand mixtures from parameter uncertainty
//! - [`bench`]: deterministic-order benchmark model
//! - [`randopt`]: stochastic order policies, feasibility checks and search
//! - [`mc`]: Monte-Carlo cross-checks

pub mod dist;
pub mod quad;
pub mod compound;
pub mod bench;
pub mod randopt;
pub mod mc;
