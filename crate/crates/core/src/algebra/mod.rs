//! The normal-ordered Heisenberg algebra in `(adag, a, hbar, t)` and its
//! commutative companions.

pub mod caps;
pub mod ops;
pub mod pq;
pub mod qseries;
pub mod scalar;

pub use caps::{Caps, Weight};
pub use ops::{
    borel, borel_inverse, borel_inverse_scalar, borel_scalar, central_to_qseries, compose_scalar,
    dagger, hbar_convolution, pairing, pi_restriction, principal_symbol, tau, total_symbol,
};
pub use pq::{from_pq, to_pq, PqOrder, PqPolynomial};
pub use qseries::{QMonomial, QSeries};
pub use scalar::{ScalarSeries, Signature, Var};
