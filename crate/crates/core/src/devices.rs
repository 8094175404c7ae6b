//! Isolated circuit elements: transmon, flux tuning, resonators,
//! zero-point scales, capacitive coupling and black-box cross-Kerr.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{ladder_operators, Operator};
use crate::linalg::{self, r, CMat};
use crate::units::{C_LIGHT, H, HBAR, K_B, R_K, Z_VAC};

/// Transmon parameters. `ej` and `ec` are energies divided by ħ (rad/s).
/// When `ej_sum` is set, the effective Josephson energy follows the
/// SQUID flux dependence and `ej` is ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmonParams {
    pub ej: f64,
    pub ec: f64,
    #[serde(default)]
    pub ng: f64,
    #[serde(default)]
    pub ej_sum: Option<f64>,
    #[serde(default)]
    pub d_asym: f64,
    #[serde(default)]
    pub flux: f64,
}

impl TransmonParams {
    pub fn new(ej: f64, ec: f64) -> Self {
        Self { ej, ec, ng: 0.0, ej_sum: None, d_asym: 0.0, flux: 0.0 }
    }

    pub fn tunable(ej_sum: f64, ec: f64, d_asym: f64, flux: f64) -> Self {
        Self { ej: ej_sum, ec, ng: 0.0, ej_sum: Some(ej_sum), d_asym, flux }
    }

    pub fn with_ng(mut self, ng: f64) -> Self {
        self.ng = ng;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ej = self.ej_sum.unwrap_or(self.ej);
        if !(ej >= 0.0 && self.ec > 0.0) {
            return Err(Error::InvalidParameter("EJ must be non-negative and EC positive".into()));
        }
        if !(0.0..=1.0).contains(&self.d_asym) {
            return Err(Error::InvalidParameter(format!("junction asymmetry {}", self.d_asym)));
        }
        Ok(())
    }

    /// |EJ(Φx)| for tunable devices, EJ otherwise.
    pub fn effective_ej(&self) -> f64 {
        match self.ej_sum {
            Some(s) => flux_tuned_ej(self.flux, s, self.d_asym).abs(),
            None => self.ej,
        }
    }

    /// Duffing qubit frequency √(8 EC EJ) − EC.
    pub fn omega_q(&self) -> f64 {
        (8.0 * self.ec * self.effective_ej()).sqrt() - self.ec
    }
}

/// Charge-basis Hamiltonian 4EC(n̂−ng)² − EJ cos φ̂ on n ∈ [−ncut, ncut].
pub fn transmon_charge_hamiltonian(params: &TransmonParams, ncut: usize) -> Result<Operator> {
    params.validate()?;
    if ncut < 5 {
        return Err(Error::InvalidDimension(format!("ncut must be >= 5, got {ncut}")));
    }
    let dim = 2 * ncut + 1;
    let ej = params.effective_ej();
    let mut h = CMat::zeros(dim, dim);
    for k in 0..dim {
        let n = k as f64 - ncut as f64;
        h[(k, k)] = r(4.0 * params.ec * (n - params.ng).powi(2));
        if k + 1 < dim {
            h[(k, k + 1)] = r(-0.5 * ej);
            h[(k + 1, k)] = r(-0.5 * ej);
        }
    }
    Ok(Operator::from_matrix(h))
}

/// Lowest `levels` charge-basis eigenvalues, verified converged by doubling
/// `ncut` (relative change below `rel_tol`).
pub fn transmon_levels(params: &TransmonParams, ncut: usize, levels: usize, rel_tol: f64) -> Result<Vec<f64>> {
    let e1 = transmon_charge_hamiltonian(params, ncut)?.eigenvalues()?;
    let e2 = transmon_charge_hamiltonian(params, 2 * ncut)?.eigenvalues()?;
    if levels > e1.len() {
        return Err(Error::InvalidDimension(format!("{levels} levels from dimension {}", e1.len())));
    }
    let scale = e1[..levels].iter().fold(params.ec, |m, e| m.max(e.abs()));
    for k in 0..levels {
        let change = (e1[k] - e2[k]).abs() / scale;
        if change > rel_tol {
            return Err(Error::Convergence(format!("level {k} changed by {change:e} on doubling ncut={ncut}")));
        }
    }
    Ok(e1[..levels].to_vec())
}

/// Transition frequencies (ω01, ω12) from the charge basis with ncut = 20.
pub fn transmon_transitions(params: &TransmonParams) -> Result<(f64, f64)> {
    let e = transmon_levels(params, 20, 3, 1e-8)?;
    Ok((e[1] - e[0], e[2] - e[1]))
}

/// Peak-to-peak variation of ω01 over ng ∈ [0, 1].
pub fn charge_dispersion(params: &TransmonParams, samples: usize) -> Result<f64> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..samples {
        let ng = k as f64 / (samples - 1) as f64;
        let (w01, _) = transmon_transitions(&params.with_ng(ng))?;
        lo = lo.min(w01);
        hi = hi.max(w01);
    }
    Ok(hi - lo)
}

/// Weakly anharmonic oscillator ωq b†b − (EC/2) b†b†bb.
pub fn transmon_duffing_hamiltonian(params: &TransmonParams, dim: usize) -> Result<Operator> {
    params.validate()?;
    if dim < 3 {
        return Err(Error::InvalidDimension(format!("Duffing model needs dim >= 3, got {dim}")));
    }
    Ok(duffing(params.omega_q(), params.ec, dim))
}

/// Diagonal Duffing oscillator with level energies ωq j − (EC/2) j(j−1).
pub fn duffing(omega_q: f64, ec: f64, dim: usize) -> Operator {
    let d: Vec<f64> = (0..dim)
        .map(|j| {
            let j = j as f64;
            omega_q * j - 0.5 * ec * j * (j - 1.0)
        })
        .collect();
    Operator::from_matrix(linalg::diag_real(&d))
}

/// EJΣ cos(πΦx/Φ0) √(1 + d² tan²(πΦx/Φ0)), flux in units of Φ0.
/// Evaluated in the equivalent form EJΣ √(cos² + d² sin²) · sign(cos) so the
/// half-flux point is finite.
pub fn flux_tuned_ej(flux: f64, ej_sum: f64, d_asym: f64) -> f64 {
    let x = PI * flux;
    let (s, c) = x.sin_cos();
    ej_sum * c.signum() * (c * c + d_asym * d_asym * s * s).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonatorParams {
    pub omega_r: f64,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default = "default_impedance")]
    pub z_r: f64,
}

fn default_impedance() -> f64 {
    50.0
}

impl ResonatorParams {
    pub fn from_lc(l: f64, c: f64, kappa: f64) -> Result<Self> {
        if !(l > 0.0 && c > 0.0) {
            return Err(Error::InvalidParameter("L and C must be positive".into()));
        }
        Ok(Self { omega_r: 1.0 / (l * c).sqrt(), kappa, z_r: (l / c).sqrt() })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_r > 0.0) || self.kappa < 0.0 || !(self.z_r > 0.0) {
            return Err(Error::InvalidParameter("resonator parameters".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ResonatorGeometry {
    /// Phase velocity v0 (m/s) and length d (m).
    HalfWave { v0: f64, length: f64 },
    QuarterWave { v0: f64, length: f64 },
    /// Box sides a, b, d (m).
    Rectangular3d { a: f64, b: f64, d: f64 },
}

/// Lowest `count` mode angular frequencies of a resonator geometry.
/// Quarter-wave lines support odd harmonics (2m+1) v0/4d.
pub fn resonator_mode_frequencies(geometry: &ResonatorGeometry, count: usize) -> Result<Vec<f64>> {
    let bad = |v: f64| !(v > 0.0 && v.is_finite());
    match *geometry {
        ResonatorGeometry::HalfWave { v0, length } => {
            if bad(v0) || bad(length) {
                return Err(Error::InvalidParameter("non-positive geometry".into()));
            }
            Ok((0..count).map(|m| 2.0 * PI * (m + 1) as f64 * v0 / (2.0 * length)).collect())
        }
        ResonatorGeometry::QuarterWave { v0, length } => {
            if bad(v0) || bad(length) {
                return Err(Error::InvalidParameter("non-positive geometry".into()));
            }
            Ok((0..count).map(|m| 2.0 * PI * (2 * m + 1) as f64 * v0 / (4.0 * length)).collect())
        }
        ResonatorGeometry::Rectangular3d { a, b, d } => {
            if bad(a) || bad(b) || bad(d) {
                return Err(Error::InvalidParameter("non-positive geometry".into()));
            }
            let nmax = count + 2;
            let mut w = Vec::new();
            for m in 0..=nmax {
                for n in 0..=nmax {
                    for l in 0..=nmax {
                        let zeros = [m, n, l].iter().filter(|&&i| i == 0).count();
                        if zeros > 1 {
                            continue;
                        }
                        let k2 = (m as f64 * PI / a).powi(2) + (n as f64 * PI / b).powi(2) + (l as f64 * PI / d).powi(2);
                        w.push(C_LIGHT * k2.sqrt());
                    }
                }
            }
            w.sort_by(f64::total_cmp);
            w.truncate(count);
            Ok(w)
        }
    }
}

/// Bose-Einstein occupation at linear frequency `freq` (Hz), temperature `t` (K).
pub fn thermal_occupation(freq: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    1.0 / ((H * freq / (K_B * t)).exp() - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroPointScales {
    pub phi_zpf: f64,
    pub q_zpf: f64,
    pub dv0: f64,
    pub omega_r: f64,
    pub z_r: f64,
}

pub fn lc_zero_point(l: f64, c: f64) -> Result<ZeroPointScales> {
    let res = ResonatorParams::from_lc(l, c, 0.0)?;
    Ok(ZeroPointScales {
        phi_zpf: (HBAR * res.z_r / 2.0).sqrt(),
        q_zpf: (HBAR / (2.0 * res.z_r)).sqrt(),
        dv0: (HBAR * res.omega_r / (2.0 * c)).sqrt(),
        omega_r: res.omega_r,
        z_r: res.z_r,
    })
}

/// Transmon-resonator coupling ωr β (EJ/2EC)^{1/4} √(π Zr/RK), β = Cg/CΣ.
pub fn coupling_g(omega_r: f64, beta: f64, ej: f64, ec: f64, z_r: f64) -> f64 {
    omega_r * beta * (ej / (2.0 * ec)).powf(0.25) * (PI * z_r / R_K).sqrt()
}

/// Same coupling written with the fine-structure constant α = Zvac/2RK.
pub fn coupling_g_fine_structure(omega_r: f64, beta: f64, ej: f64, ec: f64, z_r: f64) -> f64 {
    let alpha = Z_VAC / (2.0 * R_K);
    omega_r * beta * (ej / (2.0 * ec)).powf(0.25) * (z_r / Z_VAC).sqrt() * (2.0 * PI * alpha).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BbqMode {
    pub omega_m: f64,
    pub participation: f64,
}

impl BbqMode {
    /// Participation from the zero-point phase across the junction.
    pub fn from_phase(omega_m: f64, phi_m: f64, ej: f64) -> Self {
        Self { omega_m, participation: 2.0 * ej * phi_m * phi_m / omega_m }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BbqKerr {
    /// χ_{m,n} = −ωm ωn pm pn / 4EJ.
    pub chi: DMatrix<f64>,
    /// K_m = χ_{m,m}/2.
    pub self_kerr: Vec<f64>,
    /// Δ_m = ½ Σ_n χ_{m,n}.
    pub lamb: Vec<f64>,
}

pub fn bbq_cross_kerr(modes: &[BbqMode], ej: f64) -> Result<BbqKerr> {
    if let Some(m) = modes.iter().find(|m| !(0.0..=1.0).contains(&m.participation)) {
        return Err(Error::InvalidParameter(format!("participation {}", m.participation)));
    }
    let n = modes.len();
    let chi = DMatrix::from_fn(n, n, |i, j| {
        -modes[i].omega_m * modes[j].omega_m * modes[i].participation * modes[j].participation / (4.0 * ej)
    });
    let self_kerr = (0..n).map(|i| chi[(i, i)] / 2.0).collect();
    let lamb = (0..n).map(|i| 0.5 * chi.row(i).sum()).collect();
    Ok(BbqKerr { chi, self_kerr, lamb })
}

/// Annihilation operator helper for resonator models.
pub fn resonator_hamiltonian(omega_r: f64, dim: usize) -> Result<Operator> {
    let (a, ad) = ladder_operators(dim)?;
    Ok(&(&ad * &a) * omega_r)
}
