//! Dispersive readout: pointer-state trajectories, SNR and fidelity,
//! amplification-chain noise, heterodyne record synthesis and efficiency.
//!
//! Quadratures use X = (a + a†)/2, P = (a − a†)/2i, so vacuum variance is ¼.
//! The detected output field is √κ·α(t); the integrated record of each
//! quadrature carries white noise of intensity 1/(4η) per unit time.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, C64};
use crate::numeric::trapz;
use crate::ode::{self, OdeOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointerTrajectory {
    pub times: Vec<f64>,
    pub alpha_g: Vec<C64>,
    pub alpha_e: Vec<C64>,
    pub epsilon: Vec<f64>,
    pub delta_r: f64,
    pub chi: f64,
    pub kappa: f64,
}

impl PointerTrajectory {
    pub fn separation(&self) -> Vec<C64> {
        self.alpha_e.iter().zip(&self.alpha_g).map(|(e, g)| e - g).collect()
    }

    /// βm = 2χ ∫ Im[αg αe*] dt over the whole trajectory.
    pub fn beta_m(&self) -> f64 {
        let y: Vec<f64> = self.alpha_g.iter().zip(&self.alpha_e).map(|(g, e)| (g * e.conj()).im).collect();
        2.0 * self.chi * trapz(&self.times, &y)
    }

    /// Qubit decay during readout, approximated by mixing the e response
    /// toward the g response with weight 1 − e^{−γ1 t}.
    pub fn with_t1_mixing(&self, gamma1: f64) -> PointerTrajectory {
        let alpha_e = self
            .times
            .iter()
            .zip(self.alpha_e.iter().zip(&self.alpha_g))
            .map(|(&t, (e, g))| {
                let p = (-gamma1 * t).exp();
                e * p + g * (1.0 - p)
            })
            .collect();
        PointerTrajectory { alpha_e, ..self.clone() }
    }

    /// Truncates the trajectory at the first grid point ≥ τ.
    pub fn truncated(&self, tau: f64) -> PointerTrajectory {
        let k = self.times.iter().position(|&t| t >= tau - 1e-12 * tau.abs()).map_or(self.times.len(), |k| k + 1);
        PointerTrajectory {
            times: self.times[..k].to_vec(),
            alpha_g: self.alpha_g[..k].to_vec(),
            alpha_e: self.alpha_e[..k].to_vec(),
            epsilon: self.epsilon[..k].to_vec(),
            ..self.clone()
        }
    }
}

/// α̇σ = −iε(t) − [i(δr ± χ) + κ/2]ασ, + for e and − for g, from α = 0.
pub fn pointer_evolution(
    epsilon: impl Fn(f64) -> f64,
    delta_r: f64,
    chi: f64,
    kappa: f64,
    times: &[f64],
) -> Result<PointerTrajectory> {
    if times.is_empty() {
        return Err(Error::InvalidParameter("empty time grid".into()));
    }
    let rate_e = c(kappa / 2.0, delta_r + chi);
    let rate_g = c(kappa / 2.0, delta_r - chi);
    let mut alpha_g = Vec::with_capacity(times.len());
    let mut alpha_e = Vec::with_capacity(times.len());
    let opts = OdeOptions { rtol: 1e-10, atol: 1e-12, ..OdeOptions::default() };
    ode::integrate(
        |t, y, dy| {
            let drive = c(0.0, -epsilon(t));
            dy[(0, 0)] = drive - rate_g * y[(0, 0)];
            dy[(1, 0)] = drive - rate_e * y[(1, 0)];
        },
        times[0],
        CMat::zeros(2, 1),
        times,
        &opts,
        |_, _, y| {
            alpha_g.push(y[(0, 0)]);
            alpha_e.push(y[(1, 0)]);
        },
    )?;
    Ok(PointerTrajectory {
        times: times.to_vec(),
        alpha_g,
        alpha_e,
        epsilon: times.iter().map(|&t| epsilon(t)).collect(),
        delta_r,
        chi,
        kappa,
    })
}

/// Steady-state pointer amplitudes −ε/((δr ± χ) − iκ/2), returned as (αg, αe).
pub fn steady_pointers(epsilon: f64, delta_r: f64, chi: f64, kappa: f64) -> (C64, C64) {
    (-epsilon / c(delta_r - chi, -kappa / 2.0), -epsilon / c(delta_r + chi, -kappa / 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudePhase {
    pub amplitude_g: f64,
    pub amplitude_e: f64,
    pub phase_g: f64,
    pub phase_e: f64,
}

/// A = 2ε/√((κ/2)² + (δr ± χ)²), φ = arctan((δr ± χ)/(κ/2)).
pub fn steady_amplitude_phase(epsilon: f64, delta_r: f64, chi: f64, kappa: f64) -> AmplitudePhase {
    let amp = |d: f64| 2.0 * epsilon / ((kappa / 2.0).powi(2) + d * d).sqrt();
    let phase = |d: f64| (d / (kappa / 2.0)).atan();
    AmplitudePhase {
        amplitude_g: amp(delta_r - chi),
        amplitude_e: amp(delta_r + chi),
        phase_g: phase(delta_r - chi),
        phase_e: phase(delta_r + chi),
    }
}

/// Integration weights (wX, wP) as functions of time.
#[derive(Clone)]
pub enum Weights {
    /// |⟨X⟩e − ⟨X⟩g|, |⟨P⟩e − ⟨P⟩g|.
    Separation,
    /// Signed separation (matched filter).
    Matched,
    Custom(Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>),
}

impl std::fmt::Debug for Weights {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Weights::Separation => f.write_str("Separation"),
            Weights::Matched => f.write_str("Matched"),
            Weights::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl Weights {
    fn sample(&self, traj: &PointerTrajectory) -> Vec<(f64, f64)> {
        traj.times
            .iter()
            .zip(traj.alpha_e.iter().zip(&traj.alpha_g))
            .map(|(&t, (e, g))| {
                let d = e - g;
                match self {
                    Weights::Separation => (d.re.abs(), d.im.abs()),
                    Weights::Matched => (d.re, d.im),
                    Weights::Custom(f) => f(t),
                }
            })
            .collect()
    }
}

/// SNR² = |⟨M⟩e − ⟨M⟩g|² / (⟨M_N²⟩e + ⟨M_N²⟩g) for the record integrated up to τm.
pub fn snr(traj: &PointerTrajectory, eta: f64, tau_m: f64, weights: &Weights) -> Result<f64> {
    if !(tau_m > 0.0) {
        return Err(Error::InvalidParameter(format!("integration time {tau_m} must be > 0")));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter(format!("efficiency {eta} outside (0, 1]")));
    }
    let tr = traj.truncated(tau_m);
    let w = weights.sample(&tr);
    let sk = traj.kappa.sqrt();
    let signal: Vec<f64> = w
        .iter()
        .zip(tr.alpha_e.iter().zip(&tr.alpha_g))
        .map(|((wx, wp), (e, g))| sk * (wx * (e - g).re + wp * (e - g).im))
        .collect();
    let power: Vec<f64> = w.iter().map(|(wx, wp)| wx * wx + wp * wp).collect();
    let s = trapz(&tr.times, &signal);
    let noise = 2.0 * trapz(&tr.times, &power) / (4.0 * eta);
    if noise <= 0.0 {
        return Ok(0.0);
    }
    Ok(s.abs() / noise.sqrt())
}

/// (2ε/κ)√(2κτm)|sin 2φ| with tan φ = 2χ/κ (δr = 0).
pub fn snr_long_time(epsilon: f64, chi: f64, kappa: f64, tau_m: f64) -> f64 {
    let phi = (2.0 * chi / kappa).atan();
    (2.0 * epsilon / kappa) * (2.0 * kappa * tau_m).sqrt() * (2.0 * phi).sin().abs()
}

/// Fm = 1 − erfc(SNR/2), valid for Gaussian marginals.
pub fn measurement_fidelity(snr: f64) -> f64 {
    1.0 - erfc(snr / 2.0)
}

/// Amplifier preceded by a beam splitter of transmissivity η.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplifierStage {
    pub gain: f64,
    pub noise: f64,
    pub transmissivity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementChain {
    pub stages: Vec<AmplifierStage>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainNoise {
    pub total_gain: f64,
    /// Exact total added noise number.
    pub n_total: f64,
    /// Large-gain approximation (1/η1)[1 + N1 + N2/(η2G1) + …] − 1.
    pub n_total_large_gain: f64,
    /// η = 1/(N_T + 1).
    pub eta: f64,
    /// 𝒜 = ((G_T − 1)/G_T)(N_T + ½).
    pub added_noise: f64,
    /// η̄ = 1/(2𝒜 + 1).
    pub eta_bar: f64,
}

impl MeasurementChain {
    pub fn new(stages: Vec<AmplifierStage>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidParameter("chain needs at least one stage".into()));
        }
        for s in &stages {
            if !(s.gain >= 1.0) || !(s.noise >= 0.0) || !(s.transmissivity > 0.0 && s.transmissivity <= 1.0) {
                return Err(Error::InvalidParameter(format!("invalid amplifier stage {s:?}")));
            }
        }
        Ok(Self { stages })
    }

    /// Noise bookkeeping through beam splitters (vacuum ports) and
    /// phase-preserving amplifiers a → √G a + √(G−1) h†.
    pub fn noise(&self) -> Result<ChainNoise> {
        let mut gain = 1.0;
        let mut power = 0.0;
        for s in &self.stages {
            gain *= s.transmissivity;
            power *= s.transmissivity;
            gain *= s.gain;
            power = s.gain * power + (s.gain - 1.0) * (s.noise + 1.0);
        }
        if gain <= 1.0 {
            return Err(Error::InvalidParameter(format!("total gain {gain} must exceed 1")));
        }
        let n_total = power / (gain - 1.0) - 1.0;
        let first = &self.stages[0];
        let mut approx = 1.0 + first.noise;
        let mut scale = 1.0;
        for pair in self.stages.windows(2) {
            scale *= pair[0].gain * pair[1].transmissivity;
            approx += pair[1].noise / scale;
        }
        let n_total_large_gain = approx / first.transmissivity - 1.0;
        let added_noise = (gain - 1.0) / gain * (n_total + 0.5);
        Ok(ChainNoise {
            total_gain: gain,
            n_total,
            n_total_large_gain,
            eta: 1.0 / (n_total + 1.0),
            added_noise,
            eta_bar: 1.0 / (2.0 * added_noise + 1.0),
        })
    }
}

pub fn chain_noise(chain: &MeasurementChain) -> Result<ChainNoise> {
    chain.noise()
}

/// Heterodyne detection parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Heterodyne {
    pub eta: f64,
    pub omega_if: f64,
    pub phi_lo: f64,
    pub v_if: f64,
}

impl Heterodyne {
    pub fn ideal(eta: f64) -> Self {
        Self { eta, omega_if: 0.0, phi_lo: 0.0, v_if: 1.0 }
    }

    pub fn from_chain(chain: &MeasurementChain, omega_if: f64, phi_lo: f64, v_if: f64) -> Result<Self> {
        Ok(Self { eta: chain.noise()?.eta, omega_if, phi_lo, v_if })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts_g: Vec<u64>,
    pub counts_e: Vec<u64>,
}

/// Integrated (X, P) records for each prepared qubit state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeterodyneRecords {
    pub g: Vec<(f64, f64)>,
    pub e: Vec<(f64, f64)>,
}

fn rotate(theta: f64, x: f64, p: f64) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    (c * x - s * p, s * x + c * p)
}

/// Shot records of the weighted, integrated heterodyne signal. Each time
/// step carries white noise of variance dt/(4η) per quadrature; the signal is
/// up-converted to the IF frame by R(ω_IF t + φ_LO) and demodulated back.
pub fn synthesize_heterodyne_records(
    traj: &PointerTrajectory,
    det: &Heterodyne,
    weights: &Weights,
    n_shots: usize,
    seed: u64,
) -> Result<HeterodyneRecords> {
    if n_shots == 0 {
        return Err(Error::InvalidParameter("n_shots must be > 0".into()));
    }
    if !(det.eta > 0.0 && det.eta <= 1.0) {
        return Err(Error::InvalidParameter(format!("efficiency {} outside (0, 1]", det.eta)));
    }
    let n = traj.times.len();
    if n < 2 {
        return Err(Error::InvalidParameter("trajectory needs at least two samples".into()));
    }
    let w = weights.sample(traj);
    let sk = traj.kappa.sqrt();
    // Trapezoid quadrature weights on the sample grid.
    let mut q = vec![0.0; n];
    for k in 0..n - 1 {
        let h = traj.times[k + 1] - traj.times[k];
        q[k] += 0.5 * h;
        q[k + 1] += 0.5 * h;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let noise_scale = 1.0 / (4.0 * det.eta);
    let shot = |alpha: &[C64], rng: &mut ChaCha8Rng| -> (f64, f64) {
        let (mut mx, mut mp) = (0.0, 0.0);
        for k in 0..n {
            if q[k] == 0.0 {
                continue;
            }
            let theta = det.omega_if * traj.times[k] + det.phi_lo;
            let sigma = (noise_scale / q[k]).sqrt();
            let x = sk * alpha[k].re + sigma * unit.sample(rng);
            let p = sk * alpha[k].im + sigma * unit.sample(rng);
            let (i_if, q_if) = rotate(theta, det.v_if * x, det.v_if * p);
            let (xd, pd) = rotate(-theta, i_if / det.v_if, q_if / det.v_if);
            mx += q[k] * w[k].0 * xd;
            mp += q[k] * w[k].1 * pd;
        }
        (mx, mp)
    };
    let mut g = Vec::with_capacity(n_shots);
    let mut e = Vec::with_capacity(n_shots);
    for _ in 0..n_shots {
        g.push(shot(&traj.alpha_g, &mut rng));
        e.push(shot(&traj.alpha_e, &mut rng));
    }
    Ok(HeterodyneRecords { g, e })
}

/// Single-mode heterodyne samples of a coherent state |α⟩: Husimi-Q marginals
/// broadened by inefficiency, variance (1/η + 1)/4 per quadrature.
pub fn heterodyne_single_mode(alpha: C64, eta: f64, n_shots: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    if n_shots == 0 {
        return Err(Error::InvalidParameter("n_shots must be > 0".into()));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter(format!("efficiency {eta} outside (0, 1]")));
    }
    let sd = ((1.0 / eta + 1.0) / 4.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nx = Normal::new(alpha.re, sd).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let np = Normal::new(alpha.im, sd).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok((0..n_shots).map(|_| (nx.sample(&mut rng), np.sample(&mut rng))).collect())
}

fn mean2(v: &[(f64, f64)]) -> (f64, f64) {
    let n = v.len() as f64;
    let (sx, sp) = v.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    (sx / n, sp / n)
}

/// Projection of each record onto the axis joining the two means.
fn project(records: &HeterodyneRecords) -> (Vec<f64>, Vec<f64>) {
    let (gx, gp) = mean2(&records.g);
    let (ex, ep) = mean2(&records.e);
    let (dx, dp) = (ex - gx, ep - gp);
    let norm = (dx * dx + dp * dp).sqrt();
    let (ux, up) = if norm > 0.0 { (dx / norm, dp / norm) } else { (1.0, 0.0) };
    let proj = |v: &[(f64, f64)]| v.iter().map(|(x, p)| x * ux + p * up).collect::<Vec<f64>>();
    (proj(&records.g), proj(&records.e))
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, var)
}

/// SNR from shot records along the axis joining the mean responses.
pub fn snr_from_records(records: &HeterodyneRecords) -> f64 {
    let (g, e) = project(records);
    let (mg, vg) = mean_var(&g);
    let (me, ve) = mean_var(&e);
    (me - mg).abs() / (vg + ve).sqrt()
}

/// Fm = 1 − ∫min(P_g, P_e) of the projected marginals, evaluated through the
/// empirical distribution functions at the best threshold. For marginals
/// that cross once this equals the histogram overlap.
pub fn histogram_fidelity(records: &HeterodyneRecords) -> f64 {
    let (g, e) = project(records);
    let ng = g.len() as f64;
    let ne = e.len() as f64;
    let mut all: Vec<(f64, bool)> = g.iter().map(|&x| (x, false)).chain(e.iter().map(|&x| (x, true))).collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Threshold below everything: all assigned e.
    let mut g_above = ng;
    let mut e_below = 0.0;
    let mut best = g_above / ng + e_below / ne;
    for (_, is_e) in &all {
        if *is_e {
            e_below += 1.0;
        } else {
            g_above -= 1.0;
        }
        best = best.min(g_above / ng + e_below / ne);
    }
    1.0 - best
}

pub fn histogram(records: &HeterodyneRecords, bins: usize) -> Histogram {
    let (g, e) = project(records);
    let lo = g.iter().chain(&e).cloned().fold(f64::INFINITY, f64::min);
    let hi = g.iter().chain(&e).cloned().fold(f64::NEG_INFINITY, f64::max);
    let bins = bins.max(1);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let edges = (0..=bins).map(|k| lo + width * k as f64).collect();
    let count = |v: &[f64]| {
        let mut c = vec![0u64; bins];
        for &x in v {
            let k = (((x - lo) / width) as usize).min(bins - 1);
            c[k] += 1;
        }
        c
    };
    Histogram { edges, counts_g: count(&g), counts_e: count(&e) }
}

/// η = SNR²/(4βm) with βm = 2χ ∫ Im[αg αe*] dt.
pub fn efficiency_from_snr(snr: f64, traj: &PointerTrajectory) -> Result<f64> {
    let beta = traj.beta_m();
    if beta.abs() < 1e-300 || traj.chi == 0.0 {
        return Err(Error::UndefinedEfficiency);
    }
    Ok(snr * snr / (4.0 * beta))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutResult {
    pub snr: f64,
    pub fidelity: f64,
    /// 1 − erfc(SNR/2); meaningful when the marginals are Gaussian.
    pub fidelity_gaussian: f64,
    pub gaussian_assumed: bool,
    pub beta_m: f64,
    /// Steady measurement-induced dephasing κ|αe − αg|²/2 at the end of the trajectory.
    pub gamma_m: f64,
    pub histogram: Histogram,
}

/// Synthesizes shots and summarizes them.
pub fn simulate_readout(
    traj: &PointerTrajectory,
    det: &Heterodyne,
    weights: &Weights,
    n_shots: usize,
    seed: u64,
    bins: usize,
) -> Result<ReadoutResult> {
    let rec = synthesize_heterodyne_records(traj, det, weights, n_shots, seed)?;
    let s = snr_from_records(&rec);
    let last = traj.alpha_e.len() - 1;
    Ok(ReadoutResult {
        snr: s,
        fidelity: histogram_fidelity(&rec),
        fidelity_gaussian: measurement_fidelity(s),
        gaussian_assumed: true,
        beta_m: traj.beta_m(),
        gamma_m: traj.kappa * (traj.alpha_e[last] - traj.alpha_g[last]).norm_sqr() / 2.0,
        histogram: histogram(&rec, bins),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{golden_max, linspace};
    use crate::units::mhz;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    fn traj(eps: f64, delta_r: f64, chi: f64, kappa: f64, tk: f64, n: usize) -> PointerTrajectory {
        pointer_evolution(move |_| eps, delta_r, chi, kappa, &linspace(0.0, tk / kappa, n)).unwrap()
    }

    #[test]
    fn zero_drive_gives_zero_pointers() {
        let t = traj(0.0, 0.0, mhz(1.0), mhz(2.0), 5.0, 11);
        assert!(t.alpha_g.iter().chain(&t.alpha_e).all(|a| a.norm() == 0.0));
    }

    #[test]
    fn trajectories_reach_steady_state() {
        let (kappa, chi, dr, eps) = (mhz(2.0), mhz(0.7), mhz(0.3), mhz(0.5));
        let t = traj(eps, dr, chi, kappa, 40.0, 5);
        let (ag, ae) = steady_pointers(eps, dr, chi, kappa);
        assert!((t.alpha_g[4] - ag).norm() < 1e-8 * ag.norm());
        assert!((t.alpha_e[4] - ae).norm() < 1e-8 * ae.norm());
    }

    #[test]
    fn resonant_drive_separates_along_x_only() {
        let kappa = mhz(2.0);
        let chi = kappa / 2.0;
        // One steady photon: ε² = χ² + κ²/4.
        let eps = (chi * chi + kappa * kappa / 4.0).sqrt();
        let t = traj(eps, 0.0, chi, kappa, 60.0, 601);
        let last = t.alpha_g.len() - 1;
        assert_relative_eq!(t.alpha_g[last].norm_sqr(), 1.0, max_relative = 1e-8);
        for d in t.separation().iter().skip(1) {
            assert!(d.im.abs() < 1e-6 * d.re.abs().max(1e-3));
        }
    }

    #[test]
    fn amplitude_phase_examples() {
        let kappa = mhz(1.0);
        let ap = steady_amplitude_phase(mhz(0.1), 0.0, kappa / 2.0, kappa);
        assert_relative_eq!(ap.phase_e, FRAC_PI_4, epsilon = 1e-12);
        assert_relative_eq!(ap.phase_g, -FRAC_PI_4, epsilon = 1e-12);
        let chi = 0.3 * kappa;
        let ap = steady_amplitude_phase(mhz(0.1), 0.0, chi, kappa);
        assert_relative_eq!(ap.phase_e - ap.phase_g, 2.0 * (2.0 * chi / kappa).atan(), epsilon = 1e-12);
        let ap = steady_amplitude_phase(mhz(0.1), mhz(0.2), 0.0, kappa);
        assert_eq!(ap.amplitude_g, ap.amplitude_e);
        assert_eq!(ap.phase_g, ap.phase_e);
    }

    #[test]
    fn snr_zero_without_dispersive_shift_and_rejects_bad_tau() {
        let t = traj(mhz(0.5), 0.0, 0.0, mhz(1.0), 20.0, 201);
        assert_eq!(snr(&t, 1.0, 10.0 / mhz(1.0), &Weights::Separation).unwrap(), 0.0);
        assert!(snr(&t, 1.0, 0.0, &Weights::Separation).is_err());
    }

    #[test]
    fn snr_long_time_limit_matches_closed_form() {
        let kappa = mhz(1.0);
        let (eps, chi) = (0.3 * kappa, 0.5 * kappa);
        let t = traj(eps, 0.0, chi, kappa, 2000.0, 20001);
        let s = snr(&t, 1.0, 2000.0 / kappa, &Weights::Separation).unwrap();
        assert_relative_eq!(s, snr_long_time(eps, chi, kappa, 2000.0 / kappa), max_relative = 5e-3);
    }

    #[test]
    fn snr_optimum_near_half_at_long_times() {
        let kappa = mhz(1.0);
        let f = |x: f64| {
            let t = traj(0.2 * kappa, 0.0, x * kappa, kappa, 200.0, 4001);
            snr(&t, 1.0, 200.0 / kappa, &Weights::Separation).unwrap()
        };
        let best = golden_max(f, 0.2, 1.0, 1e-3);
        assert!((best - 0.5).abs() < 0.05, "optimum χ/κ = {best}");
        let g = |x: f64| {
            let t = traj(0.2 * kappa, 0.0, x * kappa, kappa, 10.0, 2001);
            snr(&t, 1.0, 10.0 / kappa, &Weights::Separation).unwrap()
        };
        let short = golden_max(g, 0.2, 2.0, 1e-3);
        assert!((short - 0.5).abs() > 0.05, "short-time optimum χ/κ = {short}");
    }

    #[test]
    fn snr_monotone_in_integration_time() {
        let kappa = mhz(1.0);
        let t = traj(0.2 * kappa, mhz(0.1), 0.4 * kappa, kappa, 50.0, 2001);
        let vals: Vec<f64> = (1..=10).map(|k| snr(&t, 1.0, 5.0 * k as f64 / kappa, &Weights::Separation).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn fidelity_examples() {
        assert_eq!(measurement_fidelity(0.0), 0.0);
        assert_relative_eq!(measurement_fidelity(4.0), 0.995322265, epsilon = 1e-8);
        assert!(measurement_fidelity(40.0) > 1.0 - 1e-15);
    }

    #[test]
    fn chain_noise_examples() {
        let two = |g1: f64, n1: f64, e1: f64, g2: f64, n2: f64, e2: f64| {
            MeasurementChain::new(vec![
                AmplifierStage { gain: g1, noise: n1, transmissivity: e1 },
                AmplifierStage { gain: g2, noise: n2, transmissivity: e2 },
            ])
            .unwrap()
            .noise()
            .unwrap()
        };
        let big = two(1e9, 0.3, 1.0, 100.0, 20.0, 1.0);
        assert_relative_eq!(big.n_total, 0.3, max_relative = 1e-6);
        let ideal = MeasurementChain::new(vec![AmplifierStage { gain: 1e9, noise: 0.0, transmissivity: 1.0 }]).unwrap().noise().unwrap();
        assert_relative_eq!(ideal.added_noise, 0.5, max_relative = 1e-8);
        assert_relative_eq!(ideal.eta_bar, 0.5, max_relative = 1e-8);
        let c = two(100.0, 0.5, 0.8, 1000.0, 10.0, 0.9);
        assert_relative_eq!(c.n_total, 1.008_902_901_4, max_relative = 1e-9);
        assert_relative_eq!(c.n_total, c.n_total_large_gain, max_relative = 0.02);
    }

    #[test]
    fn chain_rejects_invalid_stages() {
        assert!(MeasurementChain::new(vec![]).is_err());
        assert!(MeasurementChain::new(vec![AmplifierStage { gain: 0.5, noise: 0.0, transmissivity: 1.0 }]).is_err());
        assert!(MeasurementChain::new(vec![AmplifierStage { gain: 10.0, noise: 0.0, transmissivity: 0.0 }]).is_err());
    }

    #[test]
    fn single_mode_heterodyne_variance() {
        let s = heterodyne_single_mode(c(1.5, -0.5), 1.0, 200_000, 3).unwrap();
        let x: Vec<f64> = s.iter().map(|v| v.0).collect();
        let p: Vec<f64> = s.iter().map(|v| v.1).collect();
        let (mx, vx) = mean_var(&x);
        let (mp, vp) = mean_var(&p);
        assert!((mx - 1.5).abs() < 0.01 && (mp + 0.5).abs() < 0.01);
        // (1 + 1)/4 per quadrature; standard error of the variance ≈ 0.5·√(2/N).
        assert!((vx - 0.5).abs() < 5.0 * 0.5 * (2.0 / 200_000f64).sqrt());
        assert!((vp - 0.5).abs() < 5.0 * 0.5 * (2.0 / 200_000f64).sqrt());
        let cov: f64 = s.iter().map(|(a, b)| (a - mx) * (b - mp)).sum::<f64>() / 200_000.0;
        assert!(cov.abs() < 0.01);
    }

    #[test]
    fn histogram_fidelity_matches_gaussian_overlap() {
        let n = 100_000;
        for (k, target) in [1.0, 2.0, 4.0].into_iter().enumerate() {
            // Heterodyne variance ½ per quadrature gives SNR = |αe − αg|.
            let g = heterodyne_single_mode(c(0.0, 0.0), 1.0, n, 10 + k as u64).unwrap();
            let e = heterodyne_single_mode(c(target, 0.0), 1.0, n, 20 + k as u64).unwrap();
            let rec = HeterodyneRecords { g, e };
            let p = erfc(target / 2.0) / 2.0;
            let sigma = (2.0 * p * (1.0 - p) / n as f64).sqrt();
            let got = histogram_fidelity(&rec);
            assert!((got - measurement_fidelity(target)).abs() < 3.0 * sigma + 1e-3 * p, "SNR {target}: {got}");
            assert_relative_eq!(snr_from_records(&rec), target, max_relative = 0.02);
        }
    }

    #[test]
    fn zero_drive_histograms_coincide() {
        let t = traj(0.0, 0.0, mhz(0.5), mhz(1.0), 10.0, 101);
        let w = Weights::Custom(Arc::new(|_| (1.0, 0.0)));
        let rec = synthesize_heterodyne_records(&t, &Heterodyne::ideal(1.0), &w, 20_000, 9).unwrap();
        let (g, e) = project(&rec);
        let (mg, vg) = mean_var(&g);
        let (me, ve) = mean_var(&e);
        assert!((mg - me).abs() < 5.0 * ((vg + ve) / 20_000.0).sqrt());
        assert_relative_eq!(vg, ve, max_relative = 0.05);
    }

    #[test]
    fn records_are_reproducible_and_need_shots() {
        let t = traj(mhz(0.2), 0.0, mhz(0.5), mhz(1.0), 10.0, 51);
        let det = Heterodyne { eta: 0.5, omega_if: mhz(50.0), phi_lo: 0.3, v_if: 2.0 };
        let a = synthesize_heterodyne_records(&t, &det, &Weights::Separation, 100, 42).unwrap();
        let b = synthesize_heterodyne_records(&t, &det, &Weights::Separation, 100, 42).unwrap();
        assert_eq!(a, b);
        assert!(synthesize_heterodyne_records(&t, &det, &Weights::Separation, 0, 42).is_err());
    }

    #[test]
    fn efficiency_round_trip() {
        let kappa = mhz(1.0);
        let chi = 0.5 * kappa;
        let t = traj(0.1 * kappa, 0.0, chi, kappa, 200.0, 801);
        for eta in [1.0, 0.5] {
            let rec = synthesize_heterodyne_records(&t, &Heterodyne::ideal(eta), &Weights::Matched, 100_000, 5).unwrap();
            let got = efficiency_from_snr(snr_from_records(&rec), &t).unwrap();
            assert!((got - eta).abs() < 0.05 * eta, "eta {eta} recovered {got}");
        }
        let t0 = traj(0.1 * kappa, 0.0, 0.0, kappa, 20.0, 101);
        assert!(matches!(efficiency_from_snr(1.0, &t0), Err(Error::UndefinedEfficiency)));
    }

    #[test]
    fn beta_m_identity() {
        // βm = (κ∫|Δα|² + |Δα(τ)|²)/2 for trajectories starting from vacuum.
        let kappa = mhz(1.0);
        let t = traj(0.3 * kappa, mhz(0.2), 0.4 * kappa, kappa, 30.0, 30001);
        let d2: Vec<f64> = t.separation().iter().map(|d| d.norm_sqr()).collect();
        let rhs = (kappa * trapz(&t.times, &d2) + d2[d2.len() - 1]) / 2.0;
        assert_relative_eq!(t.beta_m(), rhs, max_relative = 1e-6);
    }

    #[test]
    fn t1_mixing_pulls_toward_ground_response() {
        let t = traj(mhz(0.3), 0.0, mhz(0.5), mhz(1.0), 20.0, 101);
        let m = t.with_t1_mixing(mhz(10.0));
        let last = t.times.len() - 1;
        assert!((m.alpha_e[last] - t.alpha_g[last]).norm() < 1e-6);
        assert_eq!(m.alpha_e[0], t.alpha_e[0]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn separation_is_maximal_at_zero_detuning(kappa in 0.1f64..3.0, ratio in 0.01f64..0.5) {
            // Holds for 2χ ≤ κ; beyond that the maximum splits to δr = ±√(χ² − κ²/4).
            let chi = ratio * kappa;
            let sep = |dr: f64| {
                let (g, e) = steady_pointers(1.0, dr, chi, kappa);
                (e - g).norm()
            };
            let s0 = sep(0.0);
            for k in 1..40 {
                let dr = 0.1 * k as f64 * (chi + kappa);
                prop_assert!(sep(dr) <= s0 * (1.0 + 1e-12));
                prop_assert!(sep(-dr) <= s0 * (1.0 + 1e-12));
            }
        }

        #[test]
        fn chain_large_gain_agreement(g1 in 100.0f64..1e4, g2 in 100.0f64..1e4, n1 in 0.0f64..2.0, n2 in 0.0f64..30.0,
                                       e1 in 0.3f64..1.0, e2 in 0.3f64..1.0) {
            let c = MeasurementChain::new(vec![
                AmplifierStage { gain: g1, noise: n1, transmissivity: e1 },
                AmplifierStage { gain: g2, noise: n2, transmissivity: e2 },
            ]).unwrap().noise().unwrap();
            prop_assert!(((c.n_total + 1.0) - (c.n_total_large_gain + 1.0)).abs() <= 0.02 * (c.n_total + 1.0));
            prop_assert!(c.n_total >= -1e-12);
            prop_assert!(c.eta_bar <= 1.0 / (2.0 - 1.0 / c.total_gain) + 1e-12);
        }
    }
}
