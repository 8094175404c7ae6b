//! Circuit quantum electrodynamics models.
//!
//! Frequencies and rates are angular (rad/s). Energies are stored in the
//! same units, i.e. as E/ħ.

// `!(x > 0.0)` is used on purpose: it rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod codes;
pub mod coupling;
pub mod devices;
pub mod dynamics;
pub mod error;
pub mod gates;
pub mod hilbert;
pub mod linalg;
pub mod numeric;
pub mod ode;
pub mod phasespace;
pub mod readout;
pub mod units;

pub use error::{Error, Result};
pub use hilbert::{HilbertSpace, LeakageWarning, Operator, QuantumState};
pub use linalg::{CMat, CVec, C64};
