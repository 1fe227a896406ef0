//! Exact normal-ordered Heisenberg algebra with a formal `hbar`, quantum
//! Morse normal forms of perturbed harmonic oscillators, spectral oracles and
//! Borel/Gevrey growth diagnostics.

pub mod algebra;
pub mod calculus;
pub mod coeff;
pub mod error;
pub mod flow;
pub mod gevrey;
pub mod io;
pub mod milnor;
pub mod normal_form;
pub mod spectrum;

pub use algebra::{Caps, QMonomial, QSeries, ScalarSeries, Signature, Var, Weight};
pub use coeff::Coefficient;
pub use error::{Error, Result};
