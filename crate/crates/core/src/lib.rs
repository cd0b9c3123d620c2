//! Expand-and-sparsify density and mode estimation on the unit sphere.
//!
//! Points are mapped through a random bank of `m` unit directions and
//! encoded by the indices of their `k` largest projections. Counting how
//! often each index fires over a sample gives a density estimate whose
//! maximizer over the sample, or the peaks of its level-set components,
//! estimate the modes of the underlying distribution.
//!
//! ```
//! use std::sync::Arc;
//! use eas_sphere::{eas, seeds, sphere::UnitVector, vmf::VmfComponent, Density};
//!
//! let mu = UnitVector::basis(3, 2)?;
//! let truth = VmfComponent::new(mu, 10.0)?;
//! let data = truth.sample(2_000, &mut seeds::rng(7));
//! let bank = Arc::new(eas::ProjectionBank::new(3, 2_000, 11)?);
//! let model = eas::fit(bank, 20, &data)?;
//! assert!(model.density(&UnitVector::basis(3, 2)?)? > model.density(&UnitVector::basis(3, 0)?)?);
//! # Ok::<(), eas_sphere::Error>(())
//! ```

// Guards like `!(x > 0.0)` are written that way so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod config;
mod density;
pub mod eas;
mod error;
pub mod evaluation;
pub mod experiment;
pub mod modes;
pub mod seeds;
pub mod special;
pub mod sphere;
pub mod vmf;

pub use density::Density;
pub use error::{Error, Result};

/// Leading field of every CSV this crate writes.
pub const CSV_SCHEMA_VERSION: u32 = 1;

/// Environment variable holding the worker-thread count.
pub const THREADS_ENV: &str = "EAS_THREADS";
