//! Lorentzian optimal transport between discrete measures on model
//! spacetimes.
//!
//! The crate provides:
//!
//! - [`spacetime`]: Minkowski R^{1,n} and finite causal spaces (causality,
//!   time separation, hyperbolic norms, geodesics, causal diamonds);
//! - [`measures`]: discrete measures, causal couplings, sampled causal
//!   curves, lifted plans and time-sampled paths of measures with their
//!   speed and action estimators;
//! - [`transport`]: the static problem — u_p arithmetic, causal-coupling
//!   feasibility by max-flow, exact maximization by a transportation simplex
//!   on the admissible-edge subgraph, c_p-transforms and duality
//!   verification;
//! - [`hopflax`]: the Hopf-Lax semigroup Q_t f on finite point sets with its
//!   structural property checks and a Hamilton-Jacobi diagnostic;
//! - [`dynamics`]: geodesic displacement interpolation, barycentric velocity
//!   fields, the causal continuity inequality checker and the end-to-end
//!   Benamou-Brenier verification harness.

pub mod error;
pub mod spacetime;
pub mod transport;
pub mod measures;
pub mod hopflax;
pub mod dynamics;
pub(crate) mod ext_real;

pub use error::{Error, Result};
