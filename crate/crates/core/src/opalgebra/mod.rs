//! Exact symbolic calculus for differential operators with coefficients in
//! `Q[k, E, w][coords, radical]` localized at the radical, on the punctured
//! charts of R^3 and R^4.

mod chart;
mod coeff;
mod diffop;
pub mod poly;

pub use chart::{Chart, Param};
pub use coeff::{coeff_arith, ArithKind, Coeff};
pub use diffop::{verify_degree_bound, DiffOp, MultiIndex, VectorField};
pub use poly::{q, qr, Mono, Poly, Q};

pub(crate) use diffop::binom;
