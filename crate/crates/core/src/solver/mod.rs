//! Small dense solvers for the covering-type programs that appear in the
//! modulus and Hajłasz computations:
//!
//! ```text
//!     minimize    c'x              or    sum_j w_j x_j^2
//!     subject to  A x >= b,  x >= 0
//! ```
//!
//! with `c >= 0`, `w > 0`, `A >= 0` (quadratic case) and `b >= 0`.

pub mod lp;
pub mod qp;
