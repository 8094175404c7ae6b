//! Benchmark fixtures shared by the criterion benches.

use cqed_core::codes::cat_code;
use cqed_core::dynamics::{LindbladModel, TransmissionSystem};
use cqed_core::hilbert::{embed, sigma_minus, HilbertSpace};
use cqed_core::units::mhz;
use cqed_core::{Operator, QuantumState, C64};

/// Dispersive Purcell setup: qubit at Δ = 100κ, g = 0.1Δ.
pub fn purcell_system() -> TransmissionSystem {
    let kappa = mhz(1.0);
    let delta = 100.0 * kappa;
    TransmissionSystem { omega_r: 0.0, omega_q: delta, g: 0.1 * delta, kappa, gamma1: 0.0, gamma_phi: 0.0, n_thermal: 0.0 }
}

/// Purcell model with its initial state |e,0> and the excited-state projector.
pub fn purcell_fixture(resonator_dim: usize) -> (LindbladModel, QuantumState, Operator) {
    let model = purcell_system().model(0.0, 0.0, resonator_dim).expect("valid model");
    let rho0 = QuantumState::basis(model.space(), &[1, 0]).expect("basis state");
    let pe = embed(&(&sigma_minus().dag() * &sigma_minus()), 0, model.space()).expect("embed");
    (model, rho0, pe)
}

/// Four-component cat logical zero.
pub fn cat_state(alpha: f64, dim: usize) -> QuantumState {
    let code = cat_code(C64::new(alpha, 0.0), 4, dim).expect("cat code");
    QuantumState::ket(HilbertSpace::single(dim).expect("dim"), code.ket(0).clone()).expect("normalized")
}
