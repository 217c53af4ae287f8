//! qcs: evaluators and minimizers for cyclic and graph-structured sums of
//! monomial quotients.
//!
//! The library covers:
//! * directed-graph machinery (SCC, condensation, final components, girth),
//! * power means, cyclic sums with k-term denominators, graphic p-sums,
//! * a convex log-coordinate solver for weighted quotient sums
//!   `sum w_u y_a/y_b` with attainment, uniqueness and symmetry checks,
//! * exact global minimization of graphic min-sums by ordered-partition
//!   enumeration, with extremal-graph bounds,
//! * max-sum infima via girths of final strong components plus epsilon
//!   witnesses,
//! * numeric minimization of cyclic sums with closed-form fast paths and the
//!   reference-constant table,
//! * the perturbed functional equation F(x) = min (F(y) + x/(y+1)), staircase
//!   sums, asymptotic residuals, and the variable-window bridge A(n) = F(n).

pub mod bounds;
pub mod digraph;
pub mod error;
pub mod funceq;
pub mod gp;
pub mod maxsum;
pub mod minsum;
pub mod optim;
pub mod report;
pub mod sums;

pub use error::{QcsError, Result};
