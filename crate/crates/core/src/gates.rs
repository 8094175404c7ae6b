//! Single- and two-qubit gate models with process extraction.
//!
//! Two-transmon spaces are ordered (qubit 1, qubit 2[, bus resonator]) and
//! computational states are listed as |00>, |01>, |10>, |11> with the first
//! label belonging to qubit 1. Pauli matrices follow `hilbert`: index 0 is
//! the ground state and σz = diag(−1, 1).

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{destroy, sigma_x, sigma_y, sigma_z};
use crate::linalg::{c, dag, eigh, expm_hermitian, eye, kron, polar_unitary, r, trace, CMat, C64, I};
use crate::numeric::{bessel_j, golden_max, trapz};
use crate::ode::{self, OdeOptions};

/// Leakage above which the adiabatic CZ reports an error.
pub const DEFAULT_LEAKAGE_THRESHOLD: f64 = 1e-2;

/// First-order DRAG coefficient for leakage suppression, in units of 1/EC.
pub const DRAG_DEFAULT: f64 = 1.0;

fn ladder(dim: usize) -> CMat {
    destroy(dim).expect("dimension checked by caller").into_matrix()
}

fn tight() -> OdeOptions {
    OdeOptions { rtol: 1e-10, atol: 1e-12, ..OdeOptions::default() }
}

/// U(t1) for dU/dt = −i H(t) U with U(t0) = 1. `h` fills the Hamiltonian.
fn propagate(dim: usize, t0: f64, t1: f64, mut h: impl FnMut(f64, &mut CMat)) -> Result<CMat> {
    let mut hm = CMat::zeros(dim, dim);
    let mut out = eye(dim);
    if t1 <= t0 {
        return Ok(out);
    }
    ode::integrate(
        |t, u, du| {
            h(t, &mut hm);
            hm.mul_to(u, du);
            du.apply(|z| *z *= -I);
        },
        t0,
        eye(dim),
        &[t1],
        &tight(),
        |_, _, u| out = u.clone(),
    )?;
    Ok(out)
}

fn wrap(phi: f64) -> f64 {
    let w = (phi + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

// ---------------------------------------------------------------------------
// Process metrics

/// Average gate fidelity of a (possibly leaky) projected propagator `m`
/// against `target`: (Tr(M†M) + |Tr(T†M)|²)/(d(d+1)). Reduces to
/// (|Tr(T†U)|² + d)/(d(d+1)) for unitary M.
pub fn fidelity(target: &CMat, m: &CMat) -> f64 {
    let d = target.nrows() as f64;
    let overlap = trace(&(target.adjoint() * m)).norm_sqr();
    let norm = trace(&(m.adjoint() * m)).re;
    (norm + overlap) / (d * (d + 1.0))
}

/// Average population lost from the computational subspace, 1 − ‖M‖²_F / d.
pub fn leakage(m: &CMat) -> f64 {
    let d = m.nrows() as f64;
    (1.0 - m.iter().map(|z| z.norm_sqr()).sum::<f64>() / d).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseTable {
    pub phi01: f64,
    pub phi10: f64,
    pub phi11: f64,
    /// φ11 − φ01 − φ10, wrapped to (−π, π].
    pub conditional: f64,
}

impl PhaseTable {
    /// Phases of the diagonal of a two-qubit propagator relative to |00>.
    pub fn from_unitary(m: &CMat) -> Self {
        let p = |k: usize| (m[(k, k)] / m[(0, 0)]).arg();
        let (phi01, phi10, phi11) = (p(1), p(2), p(3));
        Self { phi01, phi10, phi11, conditional: wrap(phi11 - phi01 - phi10) }
    }
}

/// Removes the single-qubit Z phases and the global phase of a diagonal-ish
/// two-qubit propagator, leaving diag(1, 1, 1, e^{iφ}) for a phase gate.
pub fn factor_single_qubit_phases(m: &CMat) -> CMat {
    let t = PhaseTable::from_unitary(m);
    let g = m[(0, 0)].arg();
    let corr = [0.0, t.phi01, t.phi10, t.phi01 + t.phi10];
    let mut out = m.clone();
    for (i, ph) in corr.iter().enumerate() {
        for j in 0..4 {
            out[(i, j)] *= (-I * (ph + g)).exp();
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateResult {
    /// Propagator projected onto the computational subspace.
    pub unitary: CMat,
    pub leakage: f64,
    pub phases: Option<PhaseTable>,
    pub fidelity: Option<f64>,
    /// Conditional phase predicted from the instantaneous spectrum, when known.
    pub predicted_conditional_phase: Option<f64>,
    pub warnings: Vec<String>,
}

impl GateResult {
    fn new(unitary: CMat) -> Self {
        let leakage = leakage(&unitary);
        Self { unitary, leakage, phases: None, fidelity: None, predicted_conditional_phase: None, warnings: vec![] }
    }

    pub fn with_target(mut self, target: &CMat) -> Self {
        self.fidelity = Some(fidelity(target, &self.unitary));
        self
    }
}

fn project(u: &CMat, idx: &[usize]) -> CMat {
    CMat::from_fn(idx.len(), idx.len(), |i, j| u[(idx[i], idx[j])])
}

// ---------------------------------------------------------------------------
// Single-qubit drives

#[derive(Clone)]
pub enum PulseShape {
    Square,
    /// Gaussian truncated at ±2σ around the pulse centre with the edge value
    /// subtracted, so the envelope starts and ends at zero.
    Gaussian { sigma: f64 },
    /// Linearly interpolated in-phase samples (time, value/amplitude).
    Samples(Arc<Vec<(f64, f64)>>),
}

impl std::fmt::Debug for PulseShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Square => write!(f, "Square"),
            Self::Gaussian { sigma } => write!(f, "Gaussian {{ sigma: {sigma} }}"),
            Self::Samples(s) => write!(f, "Samples({} points)", s.len()),
        }
    }
}

/// Microwave drive ε(t)(b† e^{−iωd t − iφd} + h.c.). In the frame of the
/// carrier the complex envelope is (I(t) − iQ(t)) e^{−iφd}, where the
/// quadrature Q = −β İ / EC is the DRAG correction (β = 1 cancels leakage to
/// |f> at first order).
#[derive(Debug, Clone)]
pub struct DriveEnvelope {
    pub shape: PulseShape,
    /// Peak in-phase amplitude ε (rad/s). The Rabi frequency is 2ε.
    pub amplitude: f64,
    pub carrier: f64,
    pub phase: f64,
    pub duration: f64,
    pub drag: f64,
    /// Energy scale dividing the derivative term, normally EC/ħ.
    pub drag_scale: f64,
}

impl DriveEnvelope {
    pub fn square(amplitude: f64, duration: f64) -> Result<Self> {
        if !(duration > 0.0) {
            return Err(Error::InvalidParameter(format!("pulse duration must be positive, got {duration}")));
        }
        Ok(Self { shape: PulseShape::Square, amplitude, carrier: 0.0, phase: 0.0, duration, drag: 0.0, drag_scale: 1.0 })
    }

    pub fn gaussian(amplitude: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("Gaussian width must be positive, got {sigma}")));
        }
        Ok(Self {
            shape: PulseShape::Gaussian { sigma },
            amplitude,
            carrier: 0.0,
            phase: 0.0,
            duration: 4.0 * sigma,
            drag: 0.0,
            drag_scale: 1.0,
        })
    }

    /// Custom in-phase samples normalised to `amplitude`; times must start
    /// at 0 and increase.
    pub fn custom(amplitude: f64, samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 || samples[0].0 != 0.0 || samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidParameter("custom samples need >= 2 increasing times starting at 0".into()));
        }
        let duration = samples.last().map(|s| s.0).unwrap_or(0.0);
        Ok(Self {
            shape: PulseShape::Samples(Arc::new(samples)),
            amplitude,
            carrier: 0.0,
            phase: 0.0,
            duration,
            drag: 0.0,
            drag_scale: 1.0,
        })
    }

    pub fn with_carrier(mut self, carrier: f64) -> Self {
        self.carrier = carrier;
        self
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    /// Normalised shape value and its time derivative.
    fn unit(&self, t: f64) -> (f64, f64) {
        if t < 0.0 || t > self.duration {
            return (0.0, 0.0);
        }
        match &self.shape {
            PulseShape::Square => (1.0, 0.0),
            PulseShape::Gaussian { sigma } => {
                let s2 = sigma * sigma;
                let x = t - 0.5 * self.duration;
                let edge = (-self.duration * self.duration / (8.0 * s2)).exp();
                let g = (-x * x / (2.0 * s2)).exp();
                ((g - edge) / (1.0 - edge), -x / s2 * g / (1.0 - edge))
            }
            PulseShape::Samples(s) => {
                let k = s.partition_point(|p| p.0 <= t).clamp(1, s.len() - 1);
                let (t0, v0) = s[k - 1];
                let (t1, v1) = s[k];
                let slope = (v1 - v0) / (t1 - t0);
                (v0 + slope * (t - t0), slope)
            }
        }
    }

    pub fn in_phase(&self, t: f64) -> f64 {
        self.amplitude * self.unit(t).0
    }

    pub fn quadrature(&self, t: f64) -> f64 {
        -self.drag * self.amplitude * self.unit(t).1 / self.drag_scale
    }

    /// Complex envelope multiplying b† in the carrier frame.
    pub fn complex(&self, t: f64) -> C64 {
        c(self.in_phase(t), -self.quadrature(t)) * (-I * self.phase).exp()
    }

    /// ∫ I(t) dt.
    pub fn area(&self) -> f64 {
        match &self.shape {
            PulseShape::Square => self.amplitude * self.duration,
            PulseShape::Gaussian { sigma } => {
                let edge = (-self.duration * self.duration / (8.0 * sigma * sigma)).exp();
                let half = 0.5 * self.duration / (sigma * std::f64::consts::SQRT_2);
                let gauss = sigma * (2.0 * PI).sqrt() * statrs::function::erf::erf(half);
                self.amplitude * (gauss - edge * self.duration) / (1.0 - edge)
            }
            PulseShape::Samples(s) => {
                let (t, v): (Vec<f64>, Vec<f64>) = s.iter().copied().unzip();
                self.amplitude * trapz(&t, &v)
            }
        }
    }

    /// Rotation angle on a two-level system, ∫ΩR dt = 2∫ε dt.
    pub fn rotation_angle(&self) -> f64 {
        2.0 * self.area()
    }

    /// Rescales the amplitude so the two-level rotation angle equals `angle`.
    pub fn scaled_to_angle(mut self, angle: f64) -> Result<Self> {
        let current = self.rotation_angle();
        if current == 0.0 {
            return Err(Error::InvalidParameter("cannot rescale a pulse of zero area".into()));
        }
        self.amplitude *= angle / current;
        Ok(self)
    }

    /// Spectral width used for the bandwidth check against EC.
    pub fn bandwidth(&self) -> f64 {
        match &self.shape {
            PulseShape::Gaussian { sigma } => 1.0 / sigma,
            _ => 2.0 * PI / self.duration,
        }
    }
}

/// Gaussian pulse of total length 4σ with a derivative quadrature −β İ / EC.
pub fn drag_envelope(amplitude: f64, sigma: f64, ec: f64, beta: f64) -> Result<DriveEnvelope> {
    if !(ec > 0.0) {
        return Err(Error::InvalidParameter(format!("EC must be positive, got {ec}")));
    }
    let mut env = DriveEnvelope::gaussian(amplitude, sigma)?;
    env.drag = beta;
    env.drag_scale = ec;
    Ok(env)
}

/// DRAG coefficient in `range` minimizing the leakage of a π pulse of
/// width σ on `qubit`. Returns (β, leakage).
pub fn optimal_drag(sigma: f64, qubit: &Transmon, dim: usize, range: (f64, f64)) -> Result<(f64, f64)> {
    let leak = |beta: f64| -> Result<f64> {
        let env = drag_envelope(1.0, sigma, qubit.ec, beta)?.with_carrier(qubit.omega_q).scaled_to_angle(PI)?;
        Ok(single_qubit_gate(&env, qubit, dim, None, None)?.leakage)
    };
    let n = 20;
    let grid: Vec<f64> = (0..=n).map(|i| range.0 + (range.1 - range.0) * i as f64 / n as f64).collect();
    let vals: Vec<f64> = grid.par_iter().map(|&b| leak(b)).collect::<Result<_>>()?;
    let (imin, _) = vals.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty grid");
    let lo = grid[imin.saturating_sub(1)];
    let hi = grid[(imin + 1).min(n)];
    let beta = golden_max(|b| -leak(b).unwrap_or(f64::INFINITY), lo, hi, 1e-4 * (range.1 - range.0));
    let best = leak(beta)?;
    Ok(if best <= vals[imin] { (beta, best) } else { (grid[imin], vals[imin]) })
}

/// Virtual Z rotations as a running offset on subsequent drive phases.
/// Rz(θ) followed by a drive of phase φ equals a drive of phase φ − θ
/// followed by Rz(θ).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VirtualFrame {
    pub offset: f64,
}

impl VirtualFrame {
    pub fn rz(&mut self, theta: f64) {
        self.offset += theta;
    }

    pub fn apply(&self, env: &DriveEnvelope) -> DriveEnvelope {
        env.clone().with_phase(env.phase - self.offset)
    }

    /// The Z rotation still owed at the end of the sequence.
    pub fn pending(&self) -> CMat {
        let h = 0.5 * self.offset;
        CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![(I * h).exp(), (-I * h).exp()]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transmon {
    pub omega_q: f64,
    pub ec: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decoherence {
    pub gamma1: f64,
    pub gamma_phi: f64,
}

fn duffing_diag(detuning: f64, ec: f64, dim: usize) -> Vec<f64> {
    (0..dim).map(|j| detuning * j as f64 - 0.5 * ec * (j * j.saturating_sub(1)) as f64).collect()
}

/// Drives a single Duffing transmon of `dim` levels in the frame of the
/// carrier. The returned propagator is the 2×2 computational block; with
/// `decoherence` the fidelity and leakage come from the Lindblad channel.
pub fn single_qubit_gate(
    env: &DriveEnvelope,
    qubit: &Transmon,
    dim: usize,
    decoherence: Option<Decoherence>,
    target: Option<&CMat>,
) -> Result<GateResult> {
    if dim < 2 {
        return Err(Error::InvalidDimension(format!("transmon needs at least 2 levels, got {dim}")));
    }
    let b = ladder(dim);
    let bd = dag(&b);
    let h0 = crate::linalg::diag_real(&duffing_diag(qubit.omega_q - env.carrier, qubit.ec, dim));
    let hamiltonian = |t: f64, out: &mut CMat| {
        let e = env.complex(t);
        out.copy_from(&h0);
        out.zip_apply(&bd, |o, v| *o += e * v);
        out.zip_apply(&b, |o, v| *o += e.conj() * v);
    };
    let u = propagate(dim, 0.0, env.duration, hamiltonian)?;
    let mut res = GateResult::new(project(&u, &[0, 1]));
    if dim >= 3 && env.bandwidth() > qubit.ec {
        res.warnings.push(format!(
            "pulse bandwidth {:.3e} rad/s exceeds EC {:.3e} rad/s; expect leakage",
            env.bandwidth(),
            qubit.ec
        ));
    }
    if let Some(t) = target {
        res = res.with_target(t);
    }
    if let Some(dec) = decoherence {
        let (f, leak) = channel_metrics(env, &h0, &b, dec, target)?;
        res.leakage = leak;
        if target.is_some() {
            res.fidelity = Some(f);
        }
    }
    Ok(res)
}

/// Superoperator of X ↦ A X B for column-stacked vectors.
fn sandwich(a: &CMat, b: &CMat) -> CMat {
    kron(&b.transpose(), a)
}

fn channel_metrics(env: &DriveEnvelope, h0: &CMat, b: &CMat, dec: Decoherence, target: Option<&CMat>) -> Result<(f64, f64)> {
    let n = h0.nrows();
    let id = eye(n);
    let bd = dag(b);
    let comm = |h: &CMat| (sandwich(h, &id) - sandwich(&id, h)) * (-I);
    let mut l0 = comm(h0);
    let num = &bd * b;
    for (op, rate) in [(b.clone(), dec.gamma1), (num.clone(), 2.0 * dec.gamma_phi)] {
        if rate > 0.0 {
            let cdc = dag(&op) * &op;
            l0 += (sandwich(&op, &dag(&op)) - (sandwich(&cdc, &id) + sandwich(&id, &cdc)) * r(0.5)) * r(rate);
        }
    }
    let lp = comm(&bd);
    let lm = comm(b);
    let n2 = n * n;
    let mut s = eye(n2);
    ode::integrate(
        |t, y, dy| {
            let e = env.complex(t);
            let l = &l0 + &lp * e + &lm * e.conj();
            l.mul_to(y, dy);
        },
        0.0,
        eye(n2),
        &[env.duration],
        &tight(),
        |_, _, y| s = y.clone(),
    )?;
    let apply = |p: &CMat| {
        let mut full = CMat::zeros(n, n);
        full.view_mut((0, 0), (2, 2)).copy_from(p);
        let v = crate::linalg::vectorize(&full);
        let out = crate::linalg::unvectorize(&(&s * v), n);
        project(&out, &[0, 1])
    };
    let paulis = [eye(2), sigma_x().into_matrix(), sigma_y().into_matrix(), sigma_z().into_matrix()];
    let d = 2.0;
    let kept = trace(&apply(&eye(2))).re / d;
    let f = match target {
        Some(u) => {
            let sum: f64 = paulis.iter().map(|p| trace(&(u * p.adjoint() * u.adjoint() * apply(p))).re).sum();
            let f_pro = sum / (d * d * d);
            (d * f_pro + kept) / (d + 1.0)
        }
        None => f64::NAN,
    };
    Ok((f, (1.0 - kept).max(0.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarkZ {
    /// Accumulated Z phase, equal to the integrated qubit frequency shift.
    pub phase: f64,
    pub frequency_shift: f64,
    pub warnings: Vec<String>,
}

/// Z rotation from an off-resonant drive: the qubit frequency shifts by
/// −(EC/2)(ΩR/δq)², so the phase is −(EC/2)(ΩR²/δq²)·duration.
pub fn ac_stark_z(omega_r: f64, delta_q: f64, ec: f64, duration: f64) -> Result<StarkZ> {
    if delta_q == 0.0 {
        return Err(Error::InvalidParameter("ac-Stark Z needs a detuned drive".into()));
    }
    let ratio = omega_r / delta_q;
    let mut warnings = vec![];
    if ratio.abs() > 0.3 {
        warnings.push(format!("|ΩR/δq| = {:.3} is not small; the second-order shift is inaccurate", ratio.abs()));
    }
    let shift = -0.5 * ec * ratio * ratio;
    Ok(StarkZ { phase: shift * duration, frequency_shift: shift, warnings })
}

// ---------------------------------------------------------------------------
// Two-qubit systems

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coupling {
    /// ħJ(b1†b2 + b1b2†).
    Direct { j: f64 },
    /// Σ ħg_i(a†b_i + a b_i†) with a bus resonator of `levels` levels.
    Resonator { g1: f64, g2: f64, omega_r: f64, levels: usize },
}

/// Two Duffing transmons with exchange or resonator-mediated coupling, in
/// the lab frame (RWA coupling, so the total excitation number is conserved).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitSystem {
    pub q1: Transmon,
    pub q2: Transmon,
    pub coupling: Coupling,
    pub levels: usize,
}

impl TwoQubitSystem {
    pub fn direct(q1: Transmon, q2: Transmon, j: f64, levels: usize) -> Self {
        Self { q1, q2, coupling: Coupling::Direct { j }, levels }
    }

    pub fn delta12(&self) -> f64 {
        self.q1.omega_q - self.q2.omega_q
    }

    pub fn with_omega_q1(mut self, omega: f64) -> Self {
        self.q1.omega_q = omega;
        self
    }

    pub fn dims(&self) -> Vec<usize> {
        match self.coupling {
            Coupling::Direct { .. } => vec![self.levels, self.levels],
            Coupling::Resonator { levels, .. } => vec![self.levels, self.levels, levels],
        }
    }

    fn validate(&self) -> Result<()> {
        if self.levels < 2 || self.dims().iter().any(|&d| d < 2) {
            return Err(Error::InvalidDimension(format!("two-qubit system needs >= 2 levels per mode, got {:?}", self.dims())));
        }
        Ok(())
    }

    /// Flat index of a (q1, q2[, resonator]) label.
    pub fn index(&self, n1: usize, n2: usize, nr: usize) -> usize {
        let dims = self.dims();
        let base = n1 * dims[1] + n2;
        if dims.len() == 3 {
            base * dims[2] + nr
        } else {
            base
        }
    }

    pub fn computational_indices(&self) -> [usize; 4] {
        [self.index(0, 0, 0), self.index(0, 1, 0), self.index(1, 0, 0), self.index(1, 1, 0)]
    }

    fn excitations(&self) -> Vec<usize> {
        let dims = self.dims();
        let n = dims.iter().product();
        (0..n)
            .map(|mut k| {
                let mut total = 0;
                for &d in dims.iter().rev() {
                    total += k % d;
                    k /= d;
                }
                total
            })
            .collect()
    }

    fn mode_ops(&self) -> Vec<CMat> {
        let dims = self.dims();
        (0..dims.len())
            .map(|m| {
                dims.iter()
                    .enumerate()
                    .map(|(k, &d)| if k == m { ladder(d) } else { eye(d) })
                    .reduce(|a, b| kron(&a, &b))
                    .expect("non-empty")
            })
            .collect()
    }

    /// Hamiltonian (E/ħ) in a frame rotating at `frame` for every mode.
    pub fn hamiltonian_in_frame(&self, frame: f64) -> Result<CMat> {
        self.validate()?;
        let dims = self.dims();
        let ops = self.mode_ops();
        let mut diag = vec![0.0; dims.iter().product()];
        let mut add_mode = |levels: Vec<f64>, m: usize| {
            let stride: usize = dims[m + 1..].iter().product();
            for (k, v) in diag.iter_mut().enumerate() {
                *v += levels[(k / stride) % dims[m]];
            }
        };
        add_mode(duffing_diag(self.q1.omega_q - frame, self.q1.ec, dims[0]), 0);
        add_mode(duffing_diag(self.q2.omega_q - frame, self.q2.ec, dims[1]), 1);
        let mut h = crate::linalg::diag_real(&diag);
        let hop = |a: &CMat, b: &CMat| dag(a) * b + dag(b) * a;
        match self.coupling {
            Coupling::Direct { j } => h += hop(&ops[0], &ops[1]) * r(j),
            Coupling::Resonator { g1, g2, omega_r, .. } => {
                let na: Vec<f64> = (0..dims[2]).map(|k| (omega_r - frame) * k as f64).collect();
                let mut res = vec![0.0; diag.len()];
                for (k, v) in res.iter_mut().enumerate() {
                    *v = na[k % dims[2]];
                }
                h += crate::linalg::diag_real(&res);
                h += hop(&ops[2], &ops[0]) * r(g1) + hop(&ops[2], &ops[1]) * r(g2);
            }
        }
        Ok(h)
    }

    pub fn hamiltonian(&self) -> Result<CMat> {
        self.hamiltonian_in_frame(0.0)
    }

    /// Sorted eigenvalues of the `k`-excitation manifold.
    pub fn manifold_energies(&self, k: usize) -> Result<Vec<f64>> {
        let h = self.hamiltonian()?;
        let idx: Vec<usize> = self.excitations().iter().enumerate().filter(|(_, &n)| n == k).map(|(i, _)| i).collect();
        if idx.is_empty() {
            return Err(Error::InvalidParameter(format!("no states with {k} excitations")));
        }
        Ok(crate::linalg::eigvalsh(&project(&h, &idx)))
    }

    /// Dressed energies of the bare states listed in `labels`, each taken as
    /// the eigenvector of largest overlap.
    pub fn dressed_energies(&self, labels: &[usize]) -> Result<Vec<f64>> {
        let (vals, vecs) = eigh(&self.hamiltonian()?);
        let assign = assign_by_overlap(&vecs);
        Ok(labels.iter().map(|&k| vals[assign[k]]).collect())
    }

    /// ζ = E01 + E10 − E11 − E00 from exact diagonalization.
    pub fn zeta(&self) -> Result<f64> {
        let e = self.dressed_energies(&self.computational_indices())?;
        Ok(e[1] + e[2] - e[3] - e[0])
    }

    /// Smallest gap between sorted levels `lower` and `lower + 1` of the
    /// `k`-excitation manifold as qubit 1 is swept over `bracket`.
    /// Returns (ωq1 at the minimum, gap).
    pub fn anticrossing(&self, k: usize, lower: usize, bracket: (f64, f64)) -> Result<(f64, f64)> {
        let gap = |w: f64| -> f64 {
            match self.with_omega_q1(w).manifold_energies(k) {
                Ok(e) if e.len() > lower + 1 => e[lower + 1] - e[lower],
                _ => f64::INFINITY,
            }
        };
        if !gap(bracket.0).is_finite() {
            return Err(Error::InvalidParameter(format!("manifold {k} has no level pair at {lower}")));
        }
        // Coarse scan to locate the basin, then golden-section refinement.
        let n = 64;
        let xs: Vec<f64> = (0..=n).map(|i| bracket.0 + (bracket.1 - bracket.0) * i as f64 / n as f64).collect();
        let gs: Vec<f64> = xs.par_iter().map(|&w| gap(w)).collect();
        let (imin, _) = gs.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty scan");
        let lo = xs[imin.saturating_sub(1)];
        let hi = xs[(imin + 1).min(n)];
        let w = golden_max(|w| -gap(w), lo, hi, 1e-9 * (bracket.1 - bracket.0).abs().max(1.0));
        Ok((w, gap(w)))
    }
}

/// Eigenvectors reordered to follow the bare basis, each with a real
/// positive overlap on its bare state.
fn dressed_basis(h: &CMat) -> CMat {
    let (_, w) = eigh(h);
    let assign = assign_by_overlap(&w);
    let n = h.nrows();
    let mut out = CMat::zeros(n, n);
    for k in 0..n {
        let col = w.column(assign[k]);
        let ph = col[k].conj() / col[k].norm().max(1e-300);
        out.set_column(k, &(col * ph));
    }
    out
}

/// Greedy one-to-one assignment of eigenvector columns to basis states by
/// decreasing overlap. Returns, for each basis state, its eigenvector column.
fn assign_by_overlap(vecs: &CMat) -> Vec<usize> {
    let n = vecs.nrows();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            pairs.push((vecs[(i, j)].norm_sqr(), i, j));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut state_of = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for (_, i, j) in pairs {
        if state_of[i] == usize::MAX && !used[j] {
            state_of[i] = j;
            used[j] = true;
        }
    }
    state_of
}

/// ħJ = (2 EC1 EC2 / ECc)(EJ1/2EC1 · EJ2/2EC2)^{1/4}.
pub fn exchange_j(ec1: f64, ec2: f64, ecc: f64, ej1: f64, ej2: f64) -> Result<f64> {
    if [ec1, ec2, ecc, ej1, ej2].iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidParameter("charging and Josephson energies must be positive".into()));
    }
    if ecc.is_infinite() {
        return Ok(0.0);
    }
    Ok(2.0 * ec1 * ec2 / ecc * (ej1 / (2.0 * ec1) * ej2 / (2.0 * ec2)).powf(0.25))
}

/// iSWAP generated by +J exchange: |01> → −i|10>.
pub fn iswap() -> CMat {
    exchange_unitary(PI / 2.0)
}

/// √iSWAP generated by +J exchange.
pub fn sqrt_iswap() -> CMat {
    exchange_unitary(PI / 4.0)
}

/// Controlled-Z on two qubits.
pub fn cz() -> CMat {
    CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![r(1.0), r(1.0), r(1.0), r(-1.0)]))
}

fn exchange_unitary(theta: f64) -> CMat {
    let mut u = eye(4);
    u[(1, 1)] = r(theta.cos());
    u[(2, 2)] = r(theta.cos());
    u[(1, 2)] = c(0.0, -theta.sin());
    u[(2, 1)] = c(0.0, -theta.sin());
    u
}

/// Resonant two-level exchange J(σ+σ− + σ−σ+) for time t, compared with √iSWAP.
pub fn iswap_gate(j: f64, t: f64) -> GateResult {
    let mut h = CMat::zeros(4, 4);
    h[(1, 2)] = r(j);
    h[(2, 1)] = r(j);
    let u = expm_hermitian(&h, t);
    let mut res = GateResult::new(u).with_target(&sqrt_iswap());
    res.phases = Some(PhaseTable::from_unitary(&res.unitary));
    res
}

/// Frequency renormalization J²/Δ12 of detuned exchange-coupled qubits
/// (ω̃1 = ω1 + J²/Δ12, ω̃2 = ω2 − J²/Δ12): the residual off-state interaction.
pub fn exchange_off_state(j: f64, delta12: f64) -> Result<f64> {
    if delta12 == 0.0 {
        return Err(Error::Resonance { i: 1, j: 2 });
    }
    Ok(j * j / delta12)
}

/// J = (g1 g2 / 2)(1/Δ1 + 1/Δ2) for qubits dispersively coupled to a bus.
pub fn mediated_j(g1: f64, g2: f64, delta1: f64, delta2: f64) -> Result<f64> {
    if delta1 == 0.0 || delta2 == 0.0 {
        return Err(Error::Resonance { i: 0, j: if delta1 == 0.0 { 1 } else { 2 } });
    }
    Ok(0.5 * g1 * g2 * (1.0 / delta1 + 1.0 / delta2))
}

// ---------------------------------------------------------------------------
// 11-02 controlled phase

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CzProtocol {
    /// Jump qubit 1 onto the |11>-|02> resonance for one full oscillation.
    Sudden,
    /// Sweep qubit 1 from `park` to `closest` (detunings of ωq1 from the
    /// bare 11-02 resonance), hold, and return, with sin² ramps.
    Adiabatic { park: f64, closest: f64, ramp: f64, hold: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CzOptions {
    /// Keep only the |11>-|02> coupling.
    pub idealized: bool,
    pub leakage_threshold: f64,
}

impl Default for CzOptions {
    fn default() -> Self {
        Self { idealized: false, leakage_threshold: DEFAULT_LEAKAGE_THRESHOLD }
    }
}

fn sin2_ramp(t: f64, ramp: f64, hold: f64) -> f64 {
    let total = 2.0 * ramp + hold;
    if t <= 0.0 || t >= total {
        0.0
    } else if t < ramp {
        (0.5 * PI * t / ramp).sin().powi(2)
    } else if t <= ramp + hold {
        1.0
    } else {
        (0.5 * PI * (total - t) / ramp).sin().powi(2)
    }
}

impl CzProtocol {
    pub fn duration(&self, system: &TwoQubitSystem) -> Result<f64> {
        match *self {
            CzProtocol::Sudden => Ok(2.0 * PI / gap_11_02(system, false)?),
            CzProtocol::Adiabatic { ramp, hold, .. } => Ok(2.0 * ramp + hold),
        }
    }

    /// Detuning of qubit 1 from the bare 11-02 resonance at time t.
    pub fn detuning(&self, t: f64) -> f64 {
        match *self {
            CzProtocol::Sudden => 0.0,
            CzProtocol::Adiabatic { park, closest, ramp, hold } => park + (closest - park) * sin2_ramp(t, ramp, hold),
        }
    }
}

fn idealize(system: &TwoQubitSystem, h: &mut CMat) {
    let keep = (system.index(1, 1, 0), system.index(0, 2, 0));
    for i in 0..h.nrows() {
        for j in 0..h.ncols() {
            if i != j && (i, j) != keep && (j, i) != keep {
                h[(i, j)] = r(0.0);
            }
        }
    }
}

fn cz_hamiltonian(system: &TwoQubitSystem, frame: f64, idealized: bool) -> Result<CMat> {
    let mut h = system.hamiltonian_in_frame(frame)?;
    if idealized {
        idealize(system, &mut h);
    }
    Ok(h)
}

/// Bare ωq1 at which |11> and |02> are degenerate.
pub fn resonance_11_02(system: &TwoQubitSystem) -> f64 {
    system.q2.omega_q - system.q2.ec
}

fn gap_11_02(system: &TwoQubitSystem, idealized: bool) -> Result<f64> {
    let s = system.with_omega_q1(resonance_11_02(system));
    let (vals, vecs) = eigh(&cz_hamiltonian(&s, 0.0, idealized)?);
    let assign = assign_by_overlap(&vecs);
    let (a, b) = (assign[s.index(1, 1, 0)], assign[s.index(0, 2, 0)]);
    Ok((vals[a] - vals[b]).abs())
}

fn dressed_zeta(system: &TwoQubitSystem, idealized: bool) -> Result<f64> {
    let (vals, vecs) = eigh(&cz_hamiltonian(system, 0.0, idealized)?);
    let assign = assign_by_overlap(&vecs);
    let e: Vec<f64> = system.computational_indices().iter().map(|&k| vals[assign[k]]).collect();
    Ok(e[1] + e[2] - e[3] - e[0])
}

/// Controlled phase through the |11>-|02> avoided crossing. Requires a
/// direct coupling and at least three levels per transmon.
pub fn cz_11_02(system: &TwoQubitSystem, protocol: &CzProtocol, opts: &CzOptions) -> Result<GateResult> {
    if !matches!(system.coupling, Coupling::Direct { .. }) || system.levels < 3 {
        return Err(Error::InvalidParameter("11-02 gate needs direct coupling and >= 3 levels".into()));
    }
    let comp = system.computational_indices();
    let n = system.dims().iter().product();
    let w_res = resonance_11_02(system);
    let frame = system.q2.omega_q;
    match *protocol {
        CzProtocol::Sudden => {
            let s = system.with_omega_q1(w_res);
            let h = cz_hamiltonian(&s, frame, opts.idealized)?;
            let t = 2.0 * PI / gap_11_02(system, opts.idealized)?;
            let u = project(&expm_hermitian(&h, t), &comp);
            let mut res = GateResult::new(u);
            res.phases = Some(PhaseTable::from_unitary(&res.unitary));
            res.fidelity = Some(fidelity(&cz(), &factor_single_qubit_phases(&res.unitary)));
            res.predicted_conditional_phase = Some(PI);
            Ok(res)
        }
        CzProtocol::Adiabatic { ramp, hold, .. } => {
            if !(ramp > 0.0) || hold < 0.0 {
                return Err(Error::InvalidParameter("ramp must be positive and hold non-negative".into()));
            }
            let total = 2.0 * ramp + hold;
            let base = cz_hamiltonian(&system.with_omega_q1(w_res), frame, opts.idealized)?;
            let n1: Vec<f64> = (0..n).map(|k| (k / system.dims()[1]) as f64).collect();
            let u = propagate(n, 0.0, total, |t, out| {
                out.copy_from(&base);
                let d = protocol.detuning(t);
                for (k, &nk) in n1.iter().enumerate() {
                    out[(k, k)] += d * nk;
                }
            })?;
            let samples = 801;
            let ts: Vec<f64> = (0..samples).map(|i| total * i as f64 / (samples - 1) as f64).collect();
            let zetas: Vec<f64> = ts
                .par_iter()
                .map(|&t| dressed_zeta(&system.with_omega_q1(w_res + protocol.detuning(t)), opts.idealized))
                .collect::<Result<_>>()?;
            // Evaluate in the dressed basis of the idle (parked) point.
            let park = cz_hamiltonian(&system.with_omega_q1(w_res + protocol.detuning(0.0)), frame, opts.idealized)?;
            let v = dressed_basis(&park);
            let mut res = GateResult::new(project(&(v.adjoint() * u * &v), &comp));
            if res.leakage > opts.leakage_threshold {
                return Err(Error::Leakage { population: res.leakage, threshold: opts.leakage_threshold });
            }
            let table = PhaseTable::from_unitary(&res.unitary);
            let predicted = trapz(&ts, &zetas);
            let target = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
                r(1.0),
                r(1.0),
                r(1.0),
                (I * predicted).exp(),
            ]));
            res.fidelity = Some(fidelity(&target, &factor_single_qubit_phases(&res.unitary)));
            res.phases = Some(table);
            res.predicted_conditional_phase = Some(predicted);
            Ok(res)
        }
    }
}

// ---------------------------------------------------------------------------
// Cross resonance

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossResonance {
    pub chi12: f64,
    pub j_prime: f64,
    /// Coefficient of σx1.
    pub ix: f64,
    /// Coefficient of σx2.
    pub xi2: f64,
    /// Coefficient of σz1σx2.
    pub zx: f64,
    /// Coefficient of σz1σz2 (χ12/2).
    pub zz: f64,
}

/// Effective two-level CR Hamiltonian for a drive ε on qubit 1 at the
/// frequency of qubit 2.
pub fn cross_resonance_effective(q1: &Transmon, q2: &Transmon, j: f64, epsilon: f64) -> Result<CrossResonance> {
    let delta = q1.omega_q - q2.omega_q;
    let scale = [q1.ec.abs(), q2.ec.abs(), delta.abs()].iter().filter(|v| v.is_finite()).sum::<f64>();
    let pole_tol = 1e-6 * scale;
    if delta.abs() < pole_tol {
        return Err(Error::Resonance { i: 1, j: 2 });
    }
    if (delta - q1.ec).abs() < pole_tol || (delta + q2.ec).abs() < pole_tol {
        return Err(Error::Resonance { i: 1, j: 2 });
    }
    let chi12 = if q1.ec.is_infinite() && q2.ec.is_infinite() {
        0.0
    } else {
        j * j / (delta + q2.ec) - j * j / (delta - q1.ec)
    };
    let j_prime = j / (delta - q1.ec);
    // EC1 J' → −J as EC1 → ∞.
    let ec_jp = if q1.ec.is_infinite() { -j } else { q1.ec * j_prime };
    Ok(CrossResonance {
        chi12,
        j_prime,
        ix: epsilon,
        xi2: -epsilon * j_prime,
        zx: -epsilon * ec_jp / delta,
        zz: 0.5 * chi12,
    })
}

/// Two-qubit Pauli coefficients h_{ab} of H = Σ h_{ab} σa⊗σb with
/// a, b ∈ {I, X, Y, Z} indexed 0..4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliCoefficients(pub [[f64; 4]; 4]);

impl PauliCoefficients {
    pub fn of(h: &CMat) -> Self {
        let p = [eye(2), sigma_x().into_matrix(), sigma_y().into_matrix(), sigma_z().into_matrix()];
        let mut out = [[0.0; 4]; 4];
        for (a, pa) in p.iter().enumerate() {
            for (b, pb) in p.iter().enumerate() {
                out[a][b] = trace(&(h * kron(pa, pb))).re / 4.0;
            }
        }
        Self(out)
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        let idx = |ch: char| "IXYZ".find(ch);
        let mut it = label.chars();
        let (a, b) = (idx(it.next()?)?, idx(it.next()?)?);
        Some(self.0[a][b])
    }
}

/// Effective computational-subspace Hamiltonian of the driven multilevel
/// two-transmon system by exact block diagonalization. The static part is
/// first diagonalized (removing J), then the driven Hamiltonian is
/// block-diagonalized onto the four dressed computational states. The
/// frame rotates at the dressed qubit-2 frequency.
pub fn cross_resonance_numeric(system: &TwoQubitSystem, epsilon: f64) -> Result<PauliCoefficients> {
    if !matches!(system.coupling, Coupling::Direct { .. }) {
        return Err(Error::InvalidParameter("cross resonance needs direct coupling".into()));
    }
    let comp = system.computational_indices();
    let e = system.dressed_energies(&[system.index(0, 0, 0), system.index(0, 1, 0)])?;
    let omega_d = e[1] - e[0];
    let h0 = system.hamiltonian_in_frame(omega_d)?;
    let wd = dressed_basis(&h0);
    let b1 = &system.mode_ops()[0];
    let hd = (b1 + dag(b1)) * r(epsilon);
    let ht = wd.adjoint() * (&h0 + hd) * &wd;
    Ok(PauliCoefficients::of(&block_effective(&ht, &comp)?))
}

/// Des Cloizeaux effective Hamiltonian on the index set `p`.
fn block_effective(h: &CMat, p: &[usize]) -> Result<CMat> {
    let (vals, vecs) = eigh(h);
    let assign = assign_by_overlap(&vecs);
    let cols: Vec<usize> = p.iter().map(|&k| assign[k]).collect();
    let x = CMat::from_fn(p.len(), p.len(), |i, j| vecs[(p[i], cols[j])]);
    let u = polar_unitary(&x)?;
    let e = crate::linalg::diag_real(&cols.iter().map(|&j| vals[j]).collect::<Vec<_>>());
    Ok(&u * e * u.adjoint())
}

// ---------------------------------------------------------------------------
// Resonator-induced phase

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RipPhase {
    pub times: Vec<f64>,
    pub rates: Vec<f64>,
    /// ∫ rate dt: the accumulated σz1σz2 phase.
    pub phase: f64,
    pub warnings: Vec<String>,
}

/// ZZ rate −2χ1χ2|α(t)|²/δr of the resonator-induced phase gate.
pub fn rip_zz_rate(chi1: f64, chi2: f64, times: &[f64], alpha: &[C64], delta_r: f64, kappa: Option<f64>) -> Result<RipPhase> {
    if delta_r == 0.0 {
        return Err(Error::InvalidParameter("RIP gate needs a detuned drive (δr ≠ 0)".into()));
    }
    if times.len() != alpha.len() {
        return Err(Error::InvalidParameter("times and alpha lengths differ".into()));
    }
    let mut warnings = vec![];
    if let Some(k) = kappa {
        if delta_r.abs() < 10.0 * k {
            warnings.push(format!("|δr| = {:.3e} is not much larger than κ = {k:.3e}", delta_r.abs()));
        }
    }
    let rates: Vec<f64> = alpha.iter().map(|a| -2.0 * chi1 * chi2 * a.norm_sqr() / delta_r).collect();
    let phase = if times.len() > 1 { trapz(times, &rates) } else { 0.0 };
    Ok(RipPhase { times: times.to_vec(), rates, phase, warnings })
}

/// Field α(t) of the undamped resonator, α̇ = −iδr α − iε(t), α(0) = 0.
pub fn rip_pointer(eps: impl Fn(f64) -> f64, delta_r: f64, times: &[f64]) -> Result<Vec<C64>> {
    let mut out = Vec::with_capacity(times.len());
    let y0 = CMat::from_element(1, 1, r(0.0));
    ode::integrate(
        |t, y, dy| dy[(0, 0)] = -I * (y[(0, 0)] * delta_r + eps(t)),
        times.first().copied().unwrap_or(0.0),
        y0,
        times,
        &tight(),
        |_, _, y| out.push(y[(0, 0)]),
    )?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parametric modulation

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandCoupling {
    pub order: i32,
    /// J·J_n(ε/ωm).
    pub coupling: f64,
    /// Δ12 − nωm.
    pub detuning: f64,
    pub resonant: bool,
}

/// Sideband n closest to resonance for ωq1(t) = ωq1 + ε sin(ωm t).
pub fn parametric_sideband(j: f64, epsilon: f64, omega_m: f64, delta12: f64) -> Result<SidebandCoupling> {
    if !(omega_m > 0.0) {
        return Err(Error::InvalidParameter(format!("modulation frequency must be positive, got {omega_m}")));
    }
    let order = (delta12 / omega_m).round() as i32;
    let coupling = j * bessel_j(order, epsilon / omega_m);
    let detuning = delta12 - order as f64 * omega_m;
    let resonant = coupling != 0.0 && detuning.abs() <= coupling.abs();
    Ok(SidebandCoupling { order, coupling, detuning, resonant })
}

/// Population of |01> after starting in |10>, for two exchange-coupled
/// two-level qubits with qubit 1 modulated, in the frame of qubit 2.
pub fn simulate_sideband_exchange(j: f64, epsilon: f64, omega_m: f64, delta12: f64, times: &[f64]) -> Result<Vec<f64>> {
    let mut y0 = CMat::zeros(2, 1);
    y0[(0, 0)] = r(1.0);
    let mut out = Vec::with_capacity(times.len());
    ode::integrate(
        |t, y, dy| {
            let d = delta12 + epsilon * (omega_m * t).sin();
            dy[(0, 0)] = -I * (y[(0, 0)] * d + y[(1, 0)] * j);
            dy[(1, 0)] = -I * (y[(0, 0)] * j);
        },
        0.0,
        y0,
        times,
        &tight(),
        |_, _, y| out.push(y[(1, 0)].norm_sqr()),
    )?;
    Ok(out)
}

/// Angular frequency of the dominant oscillation in uniformly sampled data,
/// from the peak of its discrete-time Fourier transform.
pub fn dominant_frequency(times: &[f64], values: &[f64], band: (f64, f64)) -> f64 {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let n = values.len() as f64;
    let spectrum = |w: f64| {
        let mut acc = C64::new(0.0, 0.0);
        for (t, v) in times.iter().zip(values) {
            // Hann window against leakage from the record edges.
            let x = (t - times[0]) / (times[times.len() - 1] - times[0]);
            let win = (PI * x).sin().powi(2);
            acc += (-I * w * t).exp() * ((v - mean) * win);
        }
        acc.norm() / n
    };
    let grid = 400;
    let ws: Vec<f64> = (0..=grid).map(|i| band.0 + (band.1 - band.0) * i as f64 / grid as f64).collect();
    let mags: Vec<f64> = ws.par_iter().map(|&w| spectrum(w)).collect();
    let (imax, _) = mags.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty grid");
    let lo = ws[imax.saturating_sub(1)];
    let hi = ws[(imax + 1).min(grid)];
    golden_max(spectrum, lo, hi, 1e-9 * band.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{linear_fit, pearson};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const TWO_PI: f64 = 2.0 * PI;
    const MHZ: f64 = TWO_PI * 1e6;
    const GHZ: f64 = TWO_PI * 1e9;

    fn x_gate() -> CMat {
        CMat::from_row_slice(2, 2, &[r(0.0), r(1.0), r(1.0), r(0.0)])
    }

    fn rotation(axis: &CMat, angle: f64) -> CMat {
        expm_hermitian(axis, 0.5 * angle)
    }

    #[test]
    fn square_pi_pulse_is_x_and_quarter_phase_gives_y() {
        let q = Transmon { omega_q: 5.0 * GHZ, ec: 0.25 * GHZ };
        let env = DriveEnvelope::square(1.0, 50e-9).unwrap().with_carrier(q.omega_q).scaled_to_angle(PI).unwrap();
        let res = single_qubit_gate(&env, &q, 2, None, Some(&rotation(&x_gate(), PI))).unwrap();
        assert!((res.unitary.clone() - rotation(&sigma_x().into_matrix(), PI)).norm() < 1e-8);
        assert!(res.fidelity.unwrap() > 1.0 - 1e-9);
        assert!(res.unitary[(1, 0)].norm_sqr() > 1.0 - 1e-9);
        let y = single_qubit_gate(&env.clone().with_phase(PI / 2.0), &q, 2, None, None).unwrap();
        assert!((y.unitary - rotation(&sigma_y().into_matrix(), PI)).norm() < 1e-8);
    }

    #[test]
    fn gaussian_area_matches_quadrature() {
        let env = DriveEnvelope::gaussian(3.0, 2e-9).unwrap();
        let ts: Vec<f64> = (0..=4000).map(|i| env.duration * i as f64 / 4000.0).collect();
        let vals: Vec<f64> = ts.iter().map(|&t| env.in_phase(t)).collect();
        assert_relative_eq!(env.area(), trapz(&ts, &vals), max_relative = 1e-7);
        assert!(env.in_phase(0.0).abs() < 1e-15 && env.in_phase(env.duration).abs() < 1e-15);
        assert_relative_eq!(env.in_phase(0.5 * env.duration), 3.0, max_relative = 1e-12);
    }

    #[test]
    fn drag_quadrature_integrates_to_zero_and_vanishes_at_zero_beta() {
        let env = drag_envelope(1e8, 3e-9, 0.2 * GHZ, DRAG_DEFAULT).unwrap();
        let ts: Vec<f64> = (0..=4000).map(|i| env.duration * i as f64 / 4000.0).collect();
        let q: Vec<f64> = ts.iter().map(|&t| env.quadrature(t)).collect();
        let peak = q.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        assert!(trapz(&ts, &q).abs() < 1e-9 * peak * env.duration);
        let plain = drag_envelope(1e8, 3e-9, 0.2 * GHZ, 0.0).unwrap();
        let g = DriveEnvelope::gaussian(1e8, 3e-9).unwrap();
        for &t in &ts {
            assert_eq!(plain.complex(t), g.complex(t));
        }
        assert!(drag_envelope(1.0, 0.0, 1.0, 0.5).is_err());
    }

    fn pi_leakage(sigma: f64, beta: f64) -> f64 {
        let q = Transmon { omega_q: 5.0 * GHZ, ec: 0.2 * GHZ };
        let env = drag_envelope(1.0, sigma, q.ec, beta).unwrap().with_carrier(q.omega_q).scaled_to_angle(PI).unwrap();
        single_qubit_gate(&env, &q, 4, None, None).unwrap().leakage
    }

    #[test]
    fn short_gaussian_leaks_and_drag_leaks_less() {
        let q = Transmon { omega_q: 5.0 * GHZ, ec: 0.2 * GHZ };
        for &t in &[4e-9, 6e-9, 8e-9] {
            let gauss = pi_leakage(t / 4.0, 0.0);
            let drag = pi_leakage(t / 4.0, DRAG_DEFAULT);
            assert!(gauss > 1e-4, "T = {t:e}: gaussian leakage {gauss:e}");
            assert!(drag < gauss, "T = {t:e}: drag {drag:e} vs gaussian {gauss:e}");
        }
        // Longer pulses need a tuned coefficient.
        let (beta, best) = optimal_drag(3e-9, &q, 4, (-0.5, 2.0)).unwrap();
        assert!(best < pi_leakage(3e-9, 0.0), "beta {beta}");
    }

    #[test]
    fn drag_coefficient_sweep_has_interior_minimum() {
        let betas: Vec<f64> = (0..=20).map(|i| -1.0 + 0.15 * i as f64).collect();
        let leaks: Vec<f64> = betas.par_iter().map(|&b| pi_leakage(1.5e-9, b)).collect();
        let (imin, _) = leaks.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        assert!(imin > 0 && imin < betas.len() - 1, "minimum at the edge: {betas:?} {leaks:?}");
        assert!((0.7..1.5).contains(&betas[imin]));
    }

    #[test]
    fn bandwidth_warning_and_lindblad_channel() {
        let q = Transmon { omega_q: 5.0 * GHZ, ec: 0.2 * GHZ };
        let env = DriveEnvelope::gaussian(1.0, 0.5e-9).unwrap().with_carrier(q.omega_q).scaled_to_angle(PI).unwrap();
        let res = single_qubit_gate(&env, &q, 3, None, None).unwrap();
        assert!(!res.warnings.is_empty());
        // Without rates the channel reproduces the unitary metrics.
        let target = rotation(&x_gate(), PI);
        let coherent = single_qubit_gate(&env, &q, 3, None, Some(&target)).unwrap();
        let zero = Decoherence { gamma1: 0.0, gamma_phi: 0.0 };
        let channel = single_qubit_gate(&env, &q, 3, Some(zero), Some(&target)).unwrap();
        assert_relative_eq!(channel.fidelity.unwrap(), coherent.fidelity.unwrap(), epsilon = 1e-8);
        assert_relative_eq!(channel.leakage, coherent.leakage, epsilon = 1e-8);
        // Pure T1 on a slow two-level identity: F = 1/2 + (1 + 2e^{−γt/2})/6 + ... check the known form.
        let idle = DriveEnvelope::square(0.0, 1e-6).unwrap().with_carrier(q.omega_q);
        let g1 = 2e5;
        let lossy = single_qubit_gate(&idle, &q, 2, Some(Decoherence { gamma1: g1, gamma_phi: 0.0 }), Some(&eye(2))).unwrap();
        let x = (-g1 * 1e-6).exp();
        let expected = (3.0 + x + 2.0 * x.sqrt()) / 6.0;
        assert_relative_eq!(lossy.fidelity.unwrap(), expected, epsilon = 1e-8);
    }

    #[test]
    fn virtual_z_is_a_phase_offset() {
        let q = Transmon { omega_q: 5.0 * GHZ, ec: 0.25 * GHZ };
        let env = DriveEnvelope::square(1.0, 40e-9).unwrap().with_carrier(q.omega_q).scaled_to_angle(PI / 2.0).unwrap();
        let theta = 0.7;
        let rz = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![(I * 0.5 * theta).exp(), (-I * 0.5 * theta).exp()]));
        let direct = single_qubit_gate(&env, &q, 2, None, None).unwrap().unitary * &rz;
        let mut frame = VirtualFrame::default();
        frame.rz(theta);
        let shifted = single_qubit_gate(&frame.apply(&env), &q, 2, None, None).unwrap().unitary;
        assert!((direct - frame.pending() * shifted).norm() < 1e-8);
    }

    /// ∫Δω dt from a ramped off-resonant drive on a 4-level transmon,
    /// read off the relative phase of an initial (|g> + |e>)/√2.
    fn simulated_stark_phase(omega_r: f64, delta_q: f64, ec: f64, ramp: f64, hold: f64) -> f64 {
        let dim = 4;
        let b = ladder(dim);
        let h0 = crate::linalg::diag_real(&duffing_diag(delta_q, ec, dim));
        let x = &b + dag(&b);
        let total = 2.0 * ramp + hold;
        let u = propagate(dim, 0.0, total, |t, out| {
            out.copy_from(&h0);
            out.zip_apply(&x, |o, v| *o += v * (0.5 * omega_r * sin2_ramp(t, ramp, hold)));
        })
        .unwrap();
        let ratio = u[(1, 1)] / u[(0, 0)];
        let raw = -ratio.arg() - delta_q * total;
        let predicted = ac_stark_z(omega_r, delta_q, ec, hold + 0.75 * ramp).unwrap().phase;
        predicted + wrap(raw - predicted)
    }

    #[test]
    fn ac_stark_matches_three_level_simulation() {
        let ec = 0.2 * GHZ;
        let delta_q = 40.0 * ec;
        let omega_r = 0.1 * delta_q;
        let (ramp, hold) = (10e-9, 40e-9);
        let duration = hold + 0.75 * ramp;
        let stark = ac_stark_z(omega_r, delta_q, ec, duration).unwrap();
        let sim = simulated_stark_phase(omega_r, delta_q, ec, ramp, hold);
        assert_relative_eq!(stark.phase, sim, max_relative = 0.05);
        assert!(stark.warnings.is_empty());
        assert_eq!(ac_stark_z(0.0, delta_q, ec, duration).unwrap().phase, 0.0);
        let doubled = ac_stark_z(2.0 * omega_r, delta_q, ec, duration).unwrap();
        assert_relative_eq!(doubled.phase, 4.0 * stark.phase, max_relative = 1e-12);
        assert!(!ac_stark_z(0.5 * delta_q, delta_q, ec, duration).unwrap().warnings.is_empty());
    }

    #[test]
    fn exchange_j_and_iswap() {
        let j = exchange_j(0.3, 0.3, 3.0, 15.0, 15.0).unwrap();
        assert_relative_eq!(j, 2.0 * 0.09 / 3.0 * 25f64.sqrt(), max_relative = 1e-12);
        assert_eq!(exchange_j(0.3, 0.3, f64::INFINITY, 15.0, 15.0).unwrap(), 0.0);
        assert!(exchange_j(0.3, -0.3, 1.0, 15.0, 15.0).is_err());
        let jj = 5.0 * MHZ;
        let res = iswap_gate(jj, PI / (4.0 * jj));
        assert!((res.unitary.clone() - sqrt_iswap()).norm() < 1e-8);
        assert!(res.fidelity.unwrap() > 1.0 - 1e-12);
        let full = iswap_gate(jj, PI / (2.0 * jj));
        assert!((full.unitary - iswap()).norm() < 1e-8);
    }

    #[test]
    fn off_state_shift_from_phase_fit() {
        let j = 2.0 * MHZ;
        let delta = 100.0 * MHZ;
        let mut h = CMat::zeros(4, 4);
        h[(2, 2)] = r(delta);
        h[(1, 2)] = r(j);
        h[(2, 1)] = r(j);
        let ts: Vec<f64> = (1..=40).map(|k| k as f64 * 2e-9).collect();
        let mut unwrapped = vec![];
        let mut last = 0.0;
        for &t in &ts {
            let u = expm_hermitian(&h, t);
            let ph = u[(2, 2)].arg() + delta * t;
            let mut v = ph;
            while v - last > PI {
                v -= 2.0 * PI;
            }
            while v - last < -PI {
                v += 2.0 * PI;
            }
            last = v;
            unwrapped.push(v);
        }
        let (slope, _) = linear_fit(&ts, &unwrapped);
        let predicted = exchange_off_state(j, delta).unwrap();
        assert_relative_eq!(-slope, predicted, max_relative = 0.05);
        assert!(exchange_off_state(j, 0.0).is_err());
    }

    #[test]
    fn mediated_j_examples() {
        assert_relative_eq!(mediated_j(0.1, 0.2, 1.5, 1.5).unwrap(), 0.1 * 0.2 / 1.5, max_relative = 1e-14);
        assert_eq!(mediated_j(0.1, 0.0, 1.5, -0.7).unwrap(), 0.0);
        assert!(matches!(mediated_j(0.1, 0.1, 0.0, 1.0), Err(Error::Resonance { .. })));
    }

    fn fig9_like() -> TwoQubitSystem {
        TwoQubitSystem {
            q1: Transmon { omega_q: 8.0 * GHZ, ec: 0.317 * GHZ },
            q2: Transmon { omega_q: 8.0 * GHZ, ec: 0.297 * GHZ },
            coupling: Coupling::Resonator { g1: 0.199 * GHZ, g2: 0.190 * GHZ, omega_r: 7.0 * GHZ, levels: 5 },
            levels: 5,
        }
    }

    #[test]
    fn bus_anticrossing_is_twice_mediated_j() {
        let s = fig9_like();
        let (w, gap) = s.anticrossing(1, 1, (7.8 * GHZ, 8.2 * GHZ)).unwrap();
        let j = mediated_j(0.199 * GHZ, 0.190 * GHZ, w - 7.0 * GHZ, 8.0 * GHZ - 7.0 * GHZ).unwrap();
        assert_relative_eq!(gap, 2.0 * j, max_relative = 0.1);
        let (w2, gap2) = s.anticrossing(2, 4, (8.1 * GHZ, 8.6 * GHZ)).unwrap();
        assert!(gap2 > 0.1 * gap, "11-02 gap {gap2:e} at {w2:e}");
        assert!(s.with_omega_q1(w2).zeta().unwrap().abs() > 0.0);
    }

    fn cz_system(j: f64) -> TwoQubitSystem {
        TwoQubitSystem::direct(
            Transmon { omega_q: 5.5 * GHZ, ec: 0.25 * GHZ },
            Transmon { omega_q: 6.0 * GHZ, ec: 0.25 * GHZ },
            j,
            3,
        )
    }

    #[test]
    fn sudden_cz_flips_eleven() {
        let ideal = cz_11_02(&cz_system(10.0 * MHZ), &CzProtocol::Sudden, &CzOptions { idealized: true, ..Default::default() })
            .unwrap();
        assert!(ideal.fidelity.unwrap() > 0.999, "{:?}", ideal.fidelity);
        assert_relative_eq!(ideal.phases.unwrap().conditional.abs(), PI, epsilon = 1e-6);
        let full = cz_11_02(&cz_system(5.0 * MHZ), &CzProtocol::Sudden, &CzOptions::default()).unwrap();
        assert!(full.fidelity.unwrap() > 0.99, "{:?}", full.fidelity);
    }

    #[test]
    fn zero_coupling_gives_identity_up_to_local_phases() {
        let p = CzProtocol::Adiabatic { park: -500.0 * MHZ, closest: -40.0 * MHZ, ramp: 10e-9, hold: 10e-9 };
        let res = cz_11_02(&cz_system(0.0), &p, &CzOptions::default()).unwrap();
        assert!(res.phases.unwrap().conditional.abs() < 1e-9);
        assert!(fidelity(&eye(4), &factor_single_qubit_phases(&res.unitary)) > 1.0 - 1e-9);
    }

    #[test]
    fn adiabatic_cz_phase_equals_integrated_zeta() {
        let p = CzProtocol::Adiabatic { park: -300.0 * MHZ, closest: -40.0 * MHZ, ramp: 100e-9, hold: 20e-9 };
        let res = cz_11_02(&cz_system(10.0 * MHZ), &p, &CzOptions::default()).unwrap();
        let phase = res.phases.unwrap().conditional;
        let predicted = res.predicted_conditional_phase.unwrap();
        assert!(predicted.abs() > 0.3);
        assert!((phase - wrap(predicted)).abs() < 0.02, "{phase} vs {predicted}");
        assert!(res.leakage < 2e-3, "{}", res.leakage);
        // Scale the hold so ∫ζ = π/2.
        let zeta_hold = dressed_zeta(&cz_system(10.0 * MHZ).with_omega_q1(resonance_11_02(&cz_system(0.0)) - 40.0 * MHZ), false)
            .unwrap();
        let ramp_part = predicted - zeta_hold * 20e-9;
        let turns = ((ramp_part - PI / 2.0) / (2.0 * PI)).ceil();
        let hold = (PI / 2.0 + 2.0 * PI * turns - ramp_part) / zeta_hold;
        let p2 = CzProtocol::Adiabatic { park: -300.0 * MHZ, closest: -40.0 * MHZ, ramp: 100e-9, hold };
        let res2 = cz_11_02(&cz_system(10.0 * MHZ), &p2, &CzOptions::default()).unwrap();
        assert!((res2.phases.unwrap().conditional - PI / 2.0).abs() < 0.02);
    }

    #[test]
    fn fast_sweep_reports_leakage() {
        let p = CzProtocol::Adiabatic { park: -500.0 * MHZ, closest: 0.0, ramp: 0.3e-9, hold: 5e-9 };
        let err = cz_11_02(&cz_system(20.0 * MHZ), &p, &CzOptions { leakage_threshold: 1e-3, ..Default::default() }).unwrap_err();
        assert!(matches!(err, Error::Leakage { population, .. } if population > 1e-3));
    }

    #[test]
    fn cross_resonance_formulas() {
        let q1 = Transmon { omega_q: 5.1 * GHZ, ec: 0.3 * GHZ };
        let q2 = Transmon { omega_q: 5.0 * GHZ, ec: -0.3 * GHZ };
        let cr = cross_resonance_effective(&q1, &q2, 2.0 * MHZ, 5.0 * MHZ).unwrap();
        assert!(cr.chi12.abs() < 1e-9 * MHZ);
        let inf = Transmon { omega_q: 5.1 * GHZ, ec: f64::INFINITY };
        let inf2 = Transmon { omega_q: 5.0 * GHZ, ec: f64::INFINITY };
        let tls = cross_resonance_effective(&inf, &inf2, 2.0 * MHZ, 5.0 * MHZ).unwrap();
        assert_relative_eq!(tls.zx, 5.0 * MHZ * 2.0 / 100.0, max_relative = 1e-12);
        let pole = Transmon { omega_q: 5.3 * GHZ, ec: 0.3 * GHZ };
        assert!(cross_resonance_effective(&pole, &q2, 2.0 * MHZ, 5.0 * MHZ).is_err());
    }

    #[test]
    fn cross_resonance_matches_block_diagonalization() {
        let q1 = Transmon { omega_q: 5.1 * GHZ, ec: 0.3 * GHZ };
        let q2 = Transmon { omega_q: 5.0 * GHZ, ec: 0.3 * GHZ };
        let delta = q1.omega_q - q2.omega_q;
        let j = 0.02 * delta;
        let eps = 0.05 * delta;
        let cr = cross_resonance_effective(&q1, &q2, j, eps).unwrap();
        let sys = TwoQubitSystem::direct(q1, q2, j, 4);
        let num = cross_resonance_numeric(&sys, eps).unwrap();
        let zx = num.get("ZX").unwrap();
        assert_relative_eq!(zx, cr.zx, max_relative = 0.1);
        let neg = cross_resonance_numeric(&sys, -eps).unwrap();
        assert_relative_eq!(neg.get("ZX").unwrap(), -zx, max_relative = 1e-3);
        let still = cross_resonance_numeric(&sys, 0.0).unwrap();
        assert_relative_eq!(still.get("ZZ").unwrap(), cr.zz, max_relative = 0.1);
    }

    #[test]
    fn rip_rate_examples() {
        let chi = 2.0 * MHZ;
        let dr = 50.0 * MHZ;
        let a = C64::new(2.0, 0.0);
        let t_pi = PI * dr / (2.0 * chi * chi * a.norm_sqr());
        let ts = [0.0, t_pi];
        let res = rip_zz_rate(chi, chi, &ts, &[a, a], dr, Some(1.0 * MHZ)).unwrap();
        assert_relative_eq!(res.phase.abs(), PI, max_relative = 1e-12);
        assert!(res.warnings.is_empty());
        let zero = rip_zz_rate(chi, chi, &ts, &[C64::new(0.0, 0.0); 2], dr, None).unwrap();
        assert_eq!(zero.phase, 0.0);
        assert!(rip_zz_rate(chi, chi, &ts, &[a, a], 0.0, None).is_err());
        assert!(!rip_zz_rate(chi, chi, &ts, &[a, a], dr, Some(10.0 * MHZ)).unwrap().warnings.is_empty());
    }

    #[test]
    fn adiabatic_rip_leaves_resonator_unentangled() {
        let dr = 100.0 * MHZ;
        let chi = 3.0 * MHZ;
        let ramp = 100e-9;
        let total = 2.0 * ramp;
        let eps_peak = 1.5 * dr;
        let eps = move |t: f64| eps_peak * (PI * t / total).sin().powi(2);
        let nr = 20;
        let a = ladder(nr);
        let num = dag(&a) * &a;
        let sz = sigma_z().into_matrix();
        let z1 = kron(&kron(&sz, &eye(2)), &eye(nr));
        let z2 = kron(&kron(&eye(2), &sz), &eye(nr));
        let nn = kron(&eye(4), &num);
        let x = kron(&eye(4), &(&a + dag(&a)));
        let h0 = &nn * r(dr) + (&z1 * &nn) * r(chi) + (&z2 * &nn) * r(chi);
        let dim = 4 * nr;
        let mut psi = CMat::zeros(dim, 1);
        for q in 0..4 {
            psi[(q * nr, 0)] = r(0.5);
        }
        let mut out = psi.clone();
        ode::integrate(
            |t, y, dy| {
                let h = &h0 + &x * r(eps(t));
                h.mul_to(y, dy);
                dy.apply(|z| *z *= -I);
            },
            0.0,
            psi,
            &[total],
            &tight(),
            |_, _, y| out = y.clone(),
        )
        .unwrap();
        let rho = &out * out.adjoint();
        let rho_r = crate::linalg::partial_trace(&rho, &[4, nr], 1);
        let entropy: f64 = crate::linalg::eigvalsh(&rho_r).iter().filter(|&&p| p > 1e-15).map(|&p| -p * p.ln()).sum();
        assert!(entropy < 1e-3, "entropy {entropy:e}");
        // Conditional phase agrees with the integrated rate: φ_cond = −4∫rate.
        let ts: Vec<f64> = (0..=2000).map(|i| total * i as f64 / 2000.0).collect();
        let alpha = rip_pointer(eps, dr, &ts).unwrap();
        let rip = rip_zz_rate(chi, chi, &ts, &alpha, dr, None).unwrap();
        let amp = |q: usize| out[(q * nr, 0)];
        let cond = (amp(3) * amp(0) / (amp(1) * amp(2))).arg();
        assert_relative_eq!(cond, wrap(-4.0 * rip.phase), max_relative = 0.05);
    }

    #[test]
    fn sideband_examples() {
        let j = 5.0 * MHZ;
        let s = parametric_sideband(j, 0.0, 200.0 * MHZ, 200.0 * MHZ).unwrap();
        assert_eq!(s.order, 1);
        assert_eq!(s.coupling, 0.0);
        assert!(!s.resonant);
        let s = parametric_sideband(j, 1.84 * 200.0 * MHZ, 200.0 * MHZ, 200.0 * MHZ).unwrap();
        assert_relative_eq!(s.coupling / j, 0.5815, epsilon = 1e-3);
        assert!(s.resonant);
        assert!(parametric_sideband(j, 1.0, 0.0, 1.0).is_err());
    }

    fn simulated_coupling(x: f64) -> f64 {
        let j = 5.0 * MHZ;
        let wm = 200.0 * MHZ;
        let jeff = j * bessel_j(1, x);
        let t_end = 6.0 * PI / jeff;
        let ts: Vec<f64> = (0..=3000).map(|i| t_end * i as f64 / 3000.0).collect();
        let pops = simulate_sideband_exchange(j, x * wm, wm, wm, &ts).unwrap();
        0.5 * dominant_frequency(&ts, &pops, (0.2 * j, 2.0 * j))
    }

    #[test]
    fn sideband_exchange_frequency_tracks_bessel() {
        let j = 5.0 * MHZ;
        let xs = [0.8, 1.3, 1.84, 2.4, 3.0];
        let sims: Vec<f64> = xs.par_iter().map(|&x| simulated_coupling(x)).collect();
        for (x, s) in xs.iter().zip(&sims) {
            assert_relative_eq!(*s, j * bessel_j(1, *x), max_relative = 0.1);
        }
        let theory: Vec<f64> = xs.iter().map(|&x| bessel_j(1, x)).collect();
        assert!(pearson(&sims, &theory) > 0.99);
    }

    #[test]
    fn metrics_are_global_phase_invariant() {
        let u = sqrt_iswap();
        let f = fidelity(&u, &(&u * (I * 0.8).exp()));
        assert_relative_eq!(f, 1.0, epsilon = 1e-12);
        assert_eq!(leakage(&u), 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn fidelity_invariant_under_target_phase(theta in 0.0f64..6.3, phi in 0.0f64..6.3, jt in 0.0f64..3.0) {
            let u = exchange_unitary(jt);
            let t = sqrt_iswap();
            let a = fidelity(&t, &u);
            let b = fidelity(&(&t * (I * theta).exp()), &(&u * (I * phi).exp()));
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!(a <= 1.0 + 1e-12);
        }

        #[test]
        fn cr_driven_terms_odd_and_chi_even(eps in 1e6f64..5e7, j in 1e6f64..2e7) {
            let q1 = Transmon { omega_q: 5.2 * GHZ, ec: 0.3 * GHZ };
            let q2 = Transmon { omega_q: 5.0 * GHZ, ec: 0.3 * GHZ };
            let p = cross_resonance_effective(&q1, &q2, j, eps).unwrap();
            let m = cross_resonance_effective(&q1, &q2, j, -eps).unwrap();
            prop_assert_eq!(p.zx, -m.zx);
            prop_assert_eq!(p.xi2, -m.xi2);
            prop_assert_eq!(p.ix, -m.ix);
            prop_assert_eq!(p.chi12, m.chi12);
        }

        #[test]
        fn projected_gates_are_contractions(sigma in 1e-9f64..5e-9, beta in -1.0f64..1.0) {
            let q = Transmon { omega_q: 5.0 * GHZ, ec: 0.2 * GHZ };
            let env = drag_envelope(1.0, sigma, q.ec, beta).unwrap().with_carrier(q.omega_q).scaled_to_angle(PI).unwrap();
            let res = single_qubit_gate(&env, &q, 3, None, None).unwrap();
            let sv = crate::linalg::singular_values(&res.unitary);
            prop_assert!(sv.iter().all(|&s| s <= 1.0 + 1e-8));
            let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assert!(res.leakage <= 1.0 - smin * smin + 1e-8);
            prop_assert!((0.0..=1.0).contains(&res.leakage));
        }
    }
}
