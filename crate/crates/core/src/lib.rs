//! Risk functionals on finite distributions ordered by first-order
//! stochastic dominance.
//!
//! * [`dist`]: step-CDF distributions, the FSD lattice, discretization.
//! * [`measures`]: VaR, benchmark-loss VaR, Λ-quantiles, expected shortfall,
//!   kernel-defined functionals.
//! * [`kernel`]: sup/inf kernels and their exact evaluators.
//! * [`engine`]: kernel reconstruction from a functional.
//! * [`harness`]: seeded axiom checks and counterexample search.
//! * [`io`]: JSON formats and CSV export.

pub mod dist;
pub mod engine;
pub mod error;
pub mod extreal;
pub mod harness;
pub mod io;
pub mod kernel;
pub mod measures;
pub mod step;

pub use dist::{Atom, ContinuousCdf, ContinuousFamily, DiscreteDist};
pub use engine::{construct_psi, h_threshold, recover_lambda, two_point_eval, verify_representation, PsiGrid};
pub use error::{Error, Result};
pub use extreal::ExtReal;
pub use harness::{Axiom, SamplerConfig, StabilityReport, Verdict, Witness};
pub use kernel::{inf_phi_eval, regularize_psi, sup_psi_eval, PhiKernel, PsiKernel};
pub use measures::{MeasureSpec, RiskMeasure, SharedMeasure};
pub use step::{Direction, MonotoneStep};
