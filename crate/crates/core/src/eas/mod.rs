//! Expand-and-sparsify encoding and the density estimator built on it.
//!
//! A point `x` on `S^{d-1}` is lifted to `y = Theta x` in `R^m` with `m` unit
//! rows drawn uniformly from the sphere, then sparsified to the indices of the
//! `k` largest entries of `y`. Coordinate `j` is active on the region `C_j` of
//! points having `theta_j` among their `k` nearest rows. The estimator is
//!
//! ```text
//! f(x) = m / (k^2 S_{d-1}) * sum_{j active at x} c_j / n
//! ```
//!
//! where `c_j` counts training points whose code contains `j`. It is the
//! cheap stand-in for `(1/k) sum_j f_n(C_j) / vol(C_j)`, with the unknown
//! `vol(C_j)` replaced by its typical value `S_{d-1} k / m`; see
//! [`diagnostics`] for a Monte-Carlo check of that approximation.

mod bank;
pub mod diagnostics;
mod model;
pub mod persist;
mod select;

pub use bank::{make_bank, ProjectionBank, SparseCode};
pub use diagnostics::{region_diagnostics, RegionReport, RegionStat};
pub use model::{evaluate, evaluate_batch, fit, EasFitter, EasModel, RankedCodes};
