//! Fractional-order derivative kinematics for online handwriting.
//!
//! The crate is organised around a small pipeline:
//!
//! * [`fracdiff`] — discrete fractional-order differentiation of uniformly
//!   sampled signals (Grünwald-Letnikov, Riemann-Liouville, Caputo).
//! * [`signal`] — tablet recordings: SVC text codec, stroke segmentation,
//!   outlier repair, and a deterministic synthetic cohort generator.
//! * [`features`] — fractional-order kinematic feature vectors.
//! * [`stats`] — covariate-controlled correlation analysis with
//!   Benjamini-Hochberg false-discovery-rate adjustment.
//! * [`learn`] — a second-order gradient-boosted-trees classifier with
//!   repeated stratified cross-validation and randomized search.
//!
//! All floating-point math routes through [`libm`] so results are
//! bit-identical across platforms. The crate is `no_std` (with `alloc`);
//! file IO and the command-line front end live in the companion `fdkin`
//! crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod features;
pub mod fracdiff;
pub mod learn;
pub mod math;
pub mod rng;
pub mod signal;
pub mod stats;
