//! Phase-space tooling: coherent and squeezed states, Wigner and Husimi-Q
//! functions, quadrature marginals and the JPA effective model.
//!
//! Points are α = x + ip with x = Re α, p = Im α, so [X, P] = i/2.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{ladder_operators, HilbertSpace, Operator, QuantumState, StateData};
use crate::linalg::{c, expm_hermitian, kron, r, CMat, CVec, C64, I};

/// Default tail population above which truncated constructions are rejected.
pub const LEAKAGE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceGrid {
    pub x_range: (f64, f64),
    pub p_range: (f64, f64),
    pub nx: usize,
    pub np: usize,
}

impl Default for PhaseSpaceGrid {
    fn default() -> Self {
        Self::square(5.0, 101)
    }
}

impl PhaseSpaceGrid {
    pub fn square(half_width: f64, n: usize) -> Self {
        Self { x_range: (-half_width, half_width), p_range: (-half_width, half_width), nx: n, np: n }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.np < 2 || !(self.x_range.1 > self.x_range.0) || !(self.p_range.1 > self.p_range.0) {
            return Err(Error::InvalidParameter(format!("degenerate phase-space grid {self:?}")));
        }
        Ok(())
    }

    pub fn xs(&self) -> Vec<f64> {
        crate::numeric::linspace(self.x_range.0, self.x_range.1, self.nx)
    }

    pub fn ps(&self) -> Vec<f64> {
        crate::numeric::linspace(self.p_range.0, self.p_range.1, self.np)
    }

    pub fn dx(&self) -> f64 {
        (self.x_range.1 - self.x_range.0) / (self.nx - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_range.1 - self.p_range.0) / (self.np - 1) as f64
    }

    /// True when the grid is too coarse for the default tolerances.
    pub fn is_coarse(&self) -> bool {
        self.nx < 32 || self.np < 32 || self.dx() > 0.25 || self.dp() > 0.25
    }
}

/// Function sampled on a grid; `values[ip * nx + ix]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceFunction {
    pub grid: PhaseSpaceGrid,
    pub values: Vec<f64>,
    pub warnings: Vec<String>,
}

impl PhaseSpaceFunction {
    fn from_fn(grid: &PhaseSpaceGrid, f: impl Fn(C64) -> f64 + Sync) -> Result<Self> {
        grid.validate()?;
        let xs = grid.xs();
        let ps = grid.ps();
        let values: Vec<f64> = ps
            .par_iter()
            .flat_map_iter(|&p| xs.iter().map(move |&x| (x, p)).collect::<Vec<_>>())
            .map(|(x, p)| f(c(x, p)))
            .collect();
        let mut warnings = vec![];
        if grid.is_coarse() {
            warnings.push(format!("grid {}x{} with spacing {:.3} may be too coarse for 1e-4 normalization", grid.nx, grid.np, grid.dx().max(grid.dp())));
        }
        Ok(Self { grid: *grid, values, warnings })
    }

    pub fn at(&self, ix: usize, ip: usize) -> f64 {
        self.values[ip * self.grid.nx + ix]
    }

    /// Trapezoid-rule integral over the grid.
    pub fn integral(&self) -> f64 {
        let (nx, np) = (self.grid.nx, self.grid.np);
        let mut acc = 0.0;
        for ip in 0..np {
            let wp = if ip == 0 || ip == np - 1 { 0.5 } else { 1.0 };
            for ix in 0..nx {
                let wx = if ix == 0 || ix == nx - 1 { 0.5 } else { 1.0 };
                acc += wp * wx * self.at(ix, ip);
            }
        }
        acc * self.grid.dx() * self.grid.dp()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Bilinear interpolation; zero outside the grid.
    pub fn interpolate(&self, x: f64, p: f64) -> f64 {
        let g = &self.grid;
        let fx = (x - g.x_range.0) / g.dx();
        let fp = (p - g.p_range.0) / g.dp();
        if fx < 0.0 || fp < 0.0 || fx > (g.nx - 1) as f64 || fp > (g.np - 1) as f64 {
            return 0.0;
        }
        let ix = (fx.floor() as usize).min(g.nx - 2);
        let ip = (fp.floor() as usize).min(g.np - 2);
        let (tx, tp) = (fx - ix as f64, fp - ip as f64);
        (1.0 - tx) * (1.0 - tp) * self.at(ix, ip)
            + tx * (1.0 - tp) * self.at(ix + 1, ip)
            + (1.0 - tx) * tp * self.at(ix, ip + 1)
            + tx * tp * self.at(ix + 1, ip + 1)
    }

    /// Convolution with the vacuum Wigner function (2/π)e^{−2|α|²} on the
    /// same grid. Values outside the grid are treated as zero.
    pub fn convolve_vacuum(&self) -> PhaseSpaceFunction {
        let g = self.grid;
        let (dx, dp) = (g.dx(), g.dp());
        // Gaussian of width ½ is negligible beyond 4 units of |α|.
        let kx = ((4.0 / dx).ceil() as isize).min(g.nx as isize);
        let kp = ((4.0 / dp).ceil() as isize).min(g.np as isize);
        let kernel: Vec<f64> = (-kp..=kp)
            .flat_map(|j| (-kx..=kx).map(move |i| (i, j)))
            .map(|(i, j)| {
                let (u, v) = (i as f64 * dx, j as f64 * dp);
                2.0 / std::f64::consts::PI * (-2.0 * (u * u + v * v)).exp() * dx * dp
            })
            .collect();
        let width = (2 * kx + 1) as usize;
        let values: Vec<f64> = (0..g.np * g.nx)
            .into_par_iter()
            .map(|idx| {
                let (ix, ip) = ((idx % g.nx) as isize, (idx / g.nx) as isize);
                let mut acc = 0.0;
                for j in -kp..=kp {
                    let jp = ip - j;
                    if jp < 0 || jp >= g.np as isize {
                        continue;
                    }
                    for i in -kx..=kx {
                        let jx = ix - i;
                        if jx < 0 || jx >= g.nx as isize {
                            continue;
                        }
                        acc += kernel[(j + kp) as usize * width + (i + kx) as usize] * self.at(jx as usize, jp as usize);
                    }
                }
                acc
            })
            .collect();
        PhaseSpaceFunction { grid: g, values, warnings: self.warnings.clone() }
    }
}

fn single_mode_density(state: &QuantumState) -> Result<CMat> {
    if state.space().num_subsystems() != 1 {
        return Err(Error::InvalidState("phase-space functions need a single-mode state".into()));
    }
    Ok(state.density_matrix())
}

/// Fock amplitudes e^{−|α|²/2} αⁿ/√n! for n < dim.
pub fn coherent_amplitudes(alpha: C64, dim: usize) -> CVec {
    let mut v = CVec::zeros(dim);
    if dim == 0 {
        return v;
    }
    v[0] = r((-alpha.norm_sqr() / 2.0).exp());
    for n in 1..dim {
        v[n] = v[n - 1] * alpha / (n as f64).sqrt();
    }
    v
}

fn check_tail(amplitudes: &CVec, tol: f64) -> Result<()> {
    let tail = (1.0 - amplitudes.norm_squared()).max(0.0);
    if tail > tol {
        return Err(Error::Leakage { population: tail, threshold: tol });
    }
    Ok(())
}

pub fn coherent_state(alpha: C64, dim: usize) -> Result<QuantumState> {
    let v = coherent_amplitudes(alpha, dim);
    check_tail(&v, LEAKAGE_TOL)?;
    QuantumState::ket_normalized(HilbertSpace::single(dim)?, v)
}

/// D(α) = exp(αa† − α*a) on the truncated space (exactly unitary there).
pub fn displacement_operator(alpha: C64, dim: usize) -> Result<Operator> {
    check_tail(&coherent_amplitudes(alpha, dim), LEAKAGE_TOL)?;
    let (a, ad) = ladder_operators(dim)?;
    // exp(A) with A anti-Hermitian equals e^{−iH} for H = iA.
    let gen = ad.matrix() * alpha - a.matrix() * alpha.conj();
    Ok(Operator::from_matrix(expm_hermitian(&(gen * I), 1.0)))
}

fn ln_factorial(n: usize) -> f64 {
    statrs::function::factorial::ln_factorial(n as u64)
}

fn laguerre(n: usize, a: f64, x: f64) -> f64 {
    let (mut l0, mut l1) = (1.0, 1.0 + a - x);
    if n == 0 {
        return l0;
    }
    for k in 1..n {
        let kf = k as f64;
        let l2 = ((2.0 * kf + 1.0 + a - x) * l1 - (kf + a) * l0) / (kf + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

/// Exact ⟨m|D(β)|n⟩ of the untruncated displacement operator.
pub fn displacement_element(m: usize, n: usize, beta: C64) -> C64 {
    let x = beta.norm_sqr();
    let gauss = (-x / 2.0).exp();
    if m >= n {
        let pre = (0.5 * (ln_factorial(n) - ln_factorial(m))).exp();
        beta.powu((m - n) as u32) * (pre * gauss * laguerre(n, (m - n) as f64, x))
    } else {
        let pre = (0.5 * (ln_factorial(m) - ln_factorial(n))).exp();
        (-beta.conj()).powu((n - m) as u32) * (pre * gauss * laguerre(m, (n - m) as f64, x))
    }
}

/// Wigner function as the displaced parity (2/π)Tr[D†(α)ρD(α)(−1)^n̂]
/// = (2/π)Tr[ρ D(2α)(−1)^n̂], with the matrix elements of D(2α)(−1)^n̂
/// generated by a stable three-term recurrence.
pub fn wigner(state: &QuantumState, grid: &PhaseSpaceGrid) -> Result<PhaseSpaceFunction> {
    let rho = single_mode_density(state)?;
    let d = rho.nrows();
    PhaseSpaceFunction::from_fn(grid, |alpha| wigner_point(&rho, d, alpha))
}

fn wigner_point(rho: &CMat, d: usize, a: C64) -> f64 {
    let mut w = vec![C64::new(0.0, 0.0); d];
    w[0] = r((-2.0 * a.norm_sqr()).exp() / std::f64::consts::PI);
    let mut acc = rho[(0, 0)].re * w[0].re;
    for n in 1..d {
        w[n] = w[n - 1] * a * (2.0 / (n as f64).sqrt());
        acc += 2.0 * (rho[(0, n)] * w[n]).re;
    }
    for m in 1..d {
        let sm = (m as f64).sqrt();
        let mut temp = w[m];
        w[m] = (a.conj() * 2.0 * temp - w[m - 1] * sm) / sm;
        acc += (rho[(m, m)] * w[m]).re;
        for n in m + 1..d {
            let next = (a * 2.0 * w[n - 1] - temp * sm) / (n as f64).sqrt();
            temp = w[n];
            w[n] = next;
            acc += 2.0 * (rho[(m, n)] * w[n]).re;
        }
    }
    2.0 * acc
}

/// Wigner function from the Fourier transform of the characteristic
/// function C(β) = Tr[ρD(β)], sampled on a square β grid of half-width
/// `extent` with `n` points per axis.
pub fn wigner_characteristic(state: &QuantumState, grid: &PhaseSpaceGrid, extent: f64, n: usize) -> Result<PhaseSpaceFunction> {
    let rho = single_mode_density(state)?;
    let d = rho.nrows();
    let bs = crate::numeric::linspace(-extent, extent, n);
    let h = bs[1] - bs[0];
    let chi: Vec<(f64, f64, C64)> = bs
        .par_iter()
        .flat_map_iter(|&bp| bs.iter().map(move |&bx| (bx, bp)).collect::<Vec<_>>())
        .map(|(bx, bp)| {
            let beta = c(bx, bp);
            let mut tr = C64::new(0.0, 0.0);
            for m in 0..d {
                for k in 0..d {
                    tr += rho[(m, k)] * displacement_element(k, m, beta);
                }
            }
            (bx, bp, tr)
        })
        .collect();
    let pi2 = std::f64::consts::PI.powi(2);
    PhaseSpaceFunction::from_fn(grid, |alpha| {
        let mut acc = C64::new(0.0, 0.0);
        for &(bx, bp, ch) in &chi {
            acc += ch * (I * 2.0 * (alpha.im * bx - alpha.re * bp)).exp();
        }
        acc.re * h * h / pi2
    })
}

/// Q(α) = ⟨α|ρ|α⟩/π.
pub fn husimi_q(state: &QuantumState, grid: &PhaseSpaceGrid) -> Result<PhaseSpaceFunction> {
    let rho = single_mode_density(state)?;
    let d = rho.nrows();
    let pure = match state.data() {
        StateData::Ket(v) => Some(v.clone()),
        StateData::Density(_) => None,
    };
    PhaseSpaceFunction::from_fn(grid, |alpha| {
        let coh = coherent_amplitudes(alpha, d);
        let val = match &pure {
            Some(v) => coh.dotc(v).norm_sqr(),
            None => coh.dotc(&(&rho * &coh)).re,
        };
        (val / std::f64::consts::PI).max(0.0)
    })
}

/// Normalized Hermite functions of the X quadrature, ψ_n(x) for n < dim,
/// with |ψ_n|² integrating to one over x.
pub fn quadrature_wavefunctions(x: f64, dim: usize) -> Vec<f64> {
    let u = std::f64::consts::SQRT_2 * x;
    let mut h = vec![0.0; dim];
    if dim == 0 {
        return h;
    }
    h[0] = std::f64::consts::PI.powf(-0.25) * (-u * u / 2.0).exp();
    if dim > 1 {
        h[1] = std::f64::consts::SQRT_2 * u * h[0];
    }
    for n in 1..dim.saturating_sub(1) {
        let nf = n as f64;
        h[n + 1] = (2.0 / (nf + 1.0)).sqrt() * u * h[n] - (nf / (nf + 1.0)).sqrt() * h[n - 1];
    }
    let jac = 2f64.powf(0.25);
    h.iter().map(|v| v * jac).collect()
}

/// Exact density of X_φ = X cos φ + P sin φ, i.e. ⟨x|U ρ U†|x⟩ with U = e^{−iφn̂}.
pub fn quadrature_density(state: &QuantumState, phi: f64, xs: &[f64]) -> Result<Vec<f64>> {
    let rho = single_mode_density(state)?;
    let d = rho.nrows();
    Ok(xs
        .iter()
        .map(|&x| {
            let psi = quadrature_wavefunctions(x, d);
            let v = CVec::from_iterator(d, (0..d).map(|n| (-I * (n as f64) * phi).exp() * psi[n]));
            // ⟨x|UρU†|x⟩ = Σ v_m ρ_mn v_n*
            (v.transpose() * &rho * v.conjugate())[(0, 0)].re
        })
        .collect())
}

/// Marginal density along X_φ, integrating the sampled function over the
/// orthogonal direction. Returns (x_φ samples, density).
pub fn marginal(f: &PhaseSpaceFunction, phi: f64) -> (Vec<f64>, Vec<f64>) {
    let g = &f.grid;
    let (cphi, sphi) = (phi.cos(), phi.sin());
    let axis_free = (sphi.abs() < 1e-12 || cphi.abs() < 1e-12) && g.nx == g.np && (g.dx() - g.dp()).abs() < 1e-12;
    if axis_free && sphi.abs() < 1e-12 {
        let xs = g.xs();
        let dens = (0..g.nx)
            .map(|ix| {
                let col: Vec<f64> = (0..g.np).map(|ip| f.at(ix, ip)).collect();
                crate::numeric::trapz(&g.ps(), &col)
            })
            .collect::<Vec<_>>();
        return if cphi > 0.0 { (xs, dens) } else { (xs.iter().rev().map(|x| -x).collect(), dens.into_iter().rev().collect()) };
    }
    let half = g.x_range.1.abs().max(g.x_range.0.abs()).max(g.p_range.0.abs()).max(g.p_range.1.abs()) * std::f64::consts::SQRT_2;
    let h = g.dx().min(g.dp());
    let n = (2.0 * half / h).ceil() as usize + 1;
    let us = crate::numeric::linspace(-half, half, n);
    let dens = us
        .iter()
        .map(|&u| {
            let line: Vec<f64> = us.iter().map(|&s| f.interpolate(u * cphi - s * sphi, u * sphi + s * cphi)).collect();
            crate::numeric::trapz(&us, &line)
        })
        .collect();
    (us, dens)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeParams {
    pub r: f64,
    pub theta: f64,
}

impl SqueezeParams {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(r >= 0.0) {
            return Err(Error::InvalidParameter(format!("squeezing parameter {r} must be >= 0")));
        }
        Ok(Self { r, theta })
    }

    pub fn zeta(&self) -> C64 {
        C64::from_polar(self.r, self.theta)
    }
}

/// Fock amplitudes of S(ζ)|0⟩: c_{2m} = (−e^{iθ} tanh r)^m √((2m)!)/(2^m m!) / √(cosh r).
pub fn squeezed_vacuum_amplitudes(params: &SqueezeParams, dim: usize) -> CVec {
    let t = -C64::from_polar(params.r.tanh(), params.theta);
    let mut v = CVec::zeros(dim);
    if dim == 0 {
        return v;
    }
    v[0] = r(1.0 / params.r.cosh().sqrt());
    let mut n = 2;
    while n < dim {
        let m = (n / 2) as f64;
        // c_{2m}/c_{2m−2} = t·√((2m)(2m−1))/(2m)
        v[n] = v[n - 2] * t * (((2.0 * m) * (2.0 * m - 1.0)).sqrt() / (2.0 * m));
        n += 2;
    }
    v
}

/// S(ζ) = exp(½ζ*a² − ½ζa†²) on the truncated space.
pub fn squeeze_operator(params: &SqueezeParams, dim: usize) -> Result<Operator> {
    check_tail(&squeezed_vacuum_amplitudes(params, dim), LEAKAGE_TOL)?;
    let (a, ad) = ladder_operators(dim)?;
    let z = params.zeta();
    let a2 = a.matrix() * a.matrix();
    let ad2 = ad.matrix() * ad.matrix();
    let gen = (a2 * z.conj() - ad2 * z) * r(0.5);
    Ok(Operator::from_matrix(expm_hermitian(&(gen * I), 1.0)))
}

pub fn squeezed_vacuum(params: &SqueezeParams, dim: usize) -> Result<QuantumState> {
    let v = squeezed_vacuum_amplitudes(params, dim);
    check_tail(&v, LEAKAGE_TOL)?;
    QuantumState::ket_normalized(HilbertSpace::single(dim)?, v)
}

/// ΔX_φ² = ½(e^{2r} sin²φ̃ + e^{−2r} cos²φ̃) with φ̃ = φ − θ/2, in the
/// normalization where vacuum variance is ½, X_φ = (a e^{−iφ} + a† e^{iφ})/√2.
pub fn squeezed_vacuum_variance(params: &SqueezeParams, phi: f64) -> f64 {
    let pt = phi - params.theta / 2.0;
    0.5 * ((2.0 * params.r).exp() * pt.sin().powi(2) + (-2.0 * params.r).exp() * pt.cos().powi(2))
}

/// 10 log10(ΔX_φ²/ΔX²_vac).
pub fn squeezing_level_db(params: &SqueezeParams, phi: f64) -> f64 {
    10.0 * (squeezed_vacuum_variance(params, phi) / 0.5).log10()
}

/// Variance of X_φ = (a e^{−iφ} + a† e^{iφ})/√2 in a single-mode state.
pub fn quadrature_variance(state: &QuantumState, phi: f64) -> Result<f64> {
    let rho = single_mode_density(state)?;
    let d = rho.nrows();
    let (a, ad) = ladder_operators(d)?;
    let e = C64::from_polar(1.0, phi);
    let x = (a.matrix() * e.conj() + ad.matrix() * e) * r(std::f64::consts::FRAC_1_SQRT_2);
    let m1 = (&rho * &x).trace().re;
    let m2 = (&rho * &x * &x).trace().re;
    Ok(m2 - m1 * m1)
}

/// S₁₂(ζ) = exp(ζ*a₁a₂ − ζa₁†a₂†) on dims.0 ⊗ dims.1. The reduced state of
/// either mode is thermal with mean photon number sinh²r.
pub fn two_mode_squeeze_operator(params: &SqueezeParams, dims: (usize, usize)) -> Result<Operator> {
    let tail = params.r.tanh().powi(2 * dims.0.min(dims.1) as i32);
    if tail > LEAKAGE_TOL {
        return Err(Error::Leakage { population: tail, threshold: LEAKAGE_TOL });
    }
    let (a1, _) = ladder_operators(dims.0)?;
    let (a2, _) = ladder_operators(dims.1)?;
    let pair = kron(a1.matrix(), a2.matrix());
    let z = params.zeta();
    let gen = &pair * z.conj() - pair.adjoint() * z;
    let space = HilbertSpace::new(vec![dims.0, dims.1])?;
    Operator::new(space, expm_hermitian(&(gen * I), 1.0))
}

pub fn two_mode_squeezed_vacuum(params: &SqueezeParams, dims: (usize, usize)) -> Result<QuantumState> {
    let s = two_mode_squeeze_operator(params, dims)?;
    let vac = QuantumState::basis(s.space(), &[0, 0])?;
    let v = s.matrix() * vac.as_ket().expect("basis state is a ket");
    QuantumState::ket_normalized(s.space().clone(), v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JpaParams {
    pub omega_0: f64,
    /// Kerr coefficient K (negative for a Josephson oscillator).
    pub kerr: f64,
    pub epsilon_p: f64,
    pub omega_p: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JpaSolution {
    pub alpha: C64,
    pub delta: f64,
    pub epsilon_2: C64,
    pub below_threshold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JpaEffective {
    /// Branches ordered by increasing |α|².
    pub solutions: Vec<JpaSolution>,
    pub bistable: bool,
}

impl JpaEffective {
    /// Lowest-amplitude branch.
    pub fn primary(&self) -> &JpaSolution {
        &self.solutions[0]
    }
}

/// Displacement α cancelling the pump term in the frame of the pump,
/// (δ0 + K|α|² − iκ/2)α = −εp with δ0 = ω0 − ωp, then δ = δ0 + 2K|α|²
/// and ε2 = α²K.
pub fn jpa_effective(params: &JpaParams) -> Result<JpaEffective> {
    let JpaParams { omega_0, kerr, epsilon_p, omega_p, kappa } = *params;
    if !(kappa >= 0.0) {
        return Err(Error::InvalidParameter("negative loss rate".into()));
    }
    let d0 = omega_0 - omega_p;
    let roots: Vec<f64> = if epsilon_p == 0.0 {
        vec![0.0]
    } else if kerr == 0.0 {
        let den = d0 * d0 + kappa * kappa / 4.0;
        if den == 0.0 {
            return Err(Error::Resonance { i: 0, j: 1 });
        }
        vec![epsilon_p * epsilon_p / den]
    } else {
        // n[(δ0 + Kn)² + κ²/4] = εp², cubic in n = |α|².
        let (a3, a2, a1, a0) = (kerr * kerr, 2.0 * d0 * kerr, d0 * d0 + kappa * kappa / 4.0, -epsilon_p * epsilon_p);
        let comp = DMatrix::from_row_slice(3, 3, &[-a2 / a3, -a1 / a3, -a0 / a3, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let scale = a3.abs() + a2.abs() + a1.abs();
        let mut roots: Vec<f64> = comp
            .complex_eigenvalues()
            .iter()
            .filter(|z| z.im.abs() <= 1e-7 * z.re.abs().max(1e-300) && z.re > 0.0)
            .map(|z| {
                // Newton polish on the real cubic.
                let mut n = z.re;
                for _ in 0..20 {
                    let f = ((a3 * n + a2) * n + a1) * n + a0;
                    let df = (3.0 * a3 * n + 2.0 * a2) * n + a1;
                    if df == 0.0 {
                        break;
                    }
                    n -= f / df;
                }
                n
            })
            .filter(|&n| (((a3 * n + a2) * n + a1) * n + a0).abs() <= 1e-8 * scale * n.max(1.0).powi(3) + 1e-12 * a0.abs())
            .collect();
        roots.sort_by(|a, b| a.total_cmp(b));
        roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs().max(1e-300));
        if roots.is_empty() {
            return Err(Error::Convergence("no real JPA fixed point".into()));
        }
        roots
    };
    let solutions: Vec<JpaSolution> = roots
        .iter()
        .map(|&n| {
            let alpha = if epsilon_p == 0.0 { c(0.0, 0.0) } else { -epsilon_p / c(d0 + kerr * n, -kappa / 2.0) };
            let delta = d0 + 2.0 * kerr * n;
            let epsilon_2 = alpha * alpha * kerr;
            JpaSolution { alpha, delta, epsilon_2, below_threshold: epsilon_2.norm() < (delta * delta + kappa * kappa / 4.0).sqrt() }
        })
        .collect();
    let bistable = solutions.len() > 1;
    Ok(JpaEffective { solutions, bistable })
}
