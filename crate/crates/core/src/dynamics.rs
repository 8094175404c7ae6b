//! Lindblad master equations, steady states, dissipation rates and the
//! spectroscopy simulations built on them.
//!
//! Density matrices are vectorized by column stacking, so the Liouvillian of
//! `AρB` is `Bᵀ ⊗ A`. Frames are chosen by the caller: no rotating-frame
//! transformation is applied implicitly.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    embed, ladder_operators, sigma_minus, sigma_x, sigma_z, HilbertSpace, LeakageWarning, Operator, QuantumState,
    DEFAULT_LEAKAGE_THRESHOLD,
};
use crate::linalg::{self, c, r, CMat, CVec, ShiftedSolver, C64, I};
use crate::ode::{self, OdeOptions, OdeStats};

/// Time-dependent drive coefficient.
#[derive(Clone)]
pub enum Coefficient {
    /// f(t)·O with O Hermitian.
    Real(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    /// c(t)·O + c(t)*·O†.
    Complex(Arc<dyn Fn(f64) -> C64 + Send + Sync>),
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Real(_) => f.write_str("Coefficient::Real(..)"),
            Coefficient::Complex(_) => f.write_str("Coefficient::Complex(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DriveTerm {
    pub operator: Operator,
    pub coefficient: Coefficient,
}

impl DriveTerm {
    pub fn real(operator: Operator, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { operator, coefficient: Coefficient::Real(Arc::new(f)) }
    }

    pub fn complex(operator: Operator, f: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Self {
        Self { operator, coefficient: Coefficient::Complex(Arc::new(f)) }
    }

    fn add_to(&self, h: &mut CMat, t: f64) {
        match &self.coefficient {
            Coefficient::Real(f) => {
                let v = r(f(t));
                h.zip_apply(self.operator.matrix(), |x, o| *x += o * v);
            }
            Coefficient::Complex(f) => {
                let v = f(t);
                let m = self.operator.matrix();
                let n = m.nrows();
                for j in 0..n {
                    for i in 0..n {
                        h[(i, j)] += v * m[(i, j)] + v.conj() * m[(j, i)].conj();
                    }
                }
            }
        }
    }
}

/// H(t) = H0 + Σ drives, with collapse terms (rate, L) contributing rate·D[L].
#[derive(Debug, Clone)]
pub struct LindbladModel {
    hamiltonian: Operator,
    drives: Vec<DriveTerm>,
    collapse: Vec<(f64, Operator)>,
}

impl LindbladModel {
    pub fn new(hamiltonian: Operator) -> Result<Self> {
        if linalg::hermiticity_error(hamiltonian.matrix()) > 1e-9 * linalg::max_abs(hamiltonian.matrix()).max(1.0) {
            return Err(Error::InvalidParameter("Hamiltonian is not Hermitian".into()));
        }
        Ok(Self { hamiltonian, drives: Vec::new(), collapse: Vec::new() })
    }

    fn check_space(&self, op: &Operator) -> Result<()> {
        if op.space() != self.hamiltonian.space() {
            return Err(Error::SpaceMismatch(format!(
                "operator on {:?}, model on {:?}",
                op.space().dims(),
                self.hamiltonian.space().dims()
            )));
        }
        Ok(())
    }

    pub fn with_collapse(mut self, rate: f64, op: Operator) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::InvalidParameter(format!("collapse rate {rate} must be finite and >= 0")));
        }
        self.check_space(&op)?;
        if rate > 0.0 {
            self.collapse.push((rate, op));
        }
        Ok(self)
    }

    /// κ(n̄+1)D[a] + κn̄D[a†].
    pub fn with_thermal_bath(self, rate: f64, n_thermal: f64, a: Operator) -> Result<Self> {
        if n_thermal < 0.0 {
            return Err(Error::InvalidParameter("thermal occupation must be >= 0".into()));
        }
        let ad = a.dag();
        self.with_collapse(rate * (n_thermal + 1.0), a)?.with_collapse(rate * n_thermal, ad)
    }

    pub fn with_drive(mut self, term: DriveTerm) -> Result<Self> {
        self.check_space(&term.operator)?;
        if let Coefficient::Real(_) = term.coefficient {
            if !term.operator.hermitian_hint() {
                return Err(Error::InvalidParameter("real-coefficient drive needs a Hermitian operator".into()));
            }
        }
        self.drives.push(term);
        Ok(self)
    }

    pub fn space(&self) -> &HilbertSpace {
        self.hamiltonian.space()
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn collapse_terms(&self) -> &[(f64, Operator)] {
        &self.collapse
    }

    pub fn drives(&self) -> &[DriveTerm] {
        &self.drives
    }

    pub fn is_time_independent(&self) -> bool {
        self.drives.is_empty()
    }

    pub fn hamiltonian_at(&self, t: f64) -> CMat {
        let mut h = self.hamiltonian.matrix().clone();
        for d in &self.drives {
            d.add_to(&mut h, t);
        }
        h
    }

    fn damping(&self) -> CMat {
        let n = self.dim();
        let mut g = CMat::zeros(n, n);
        for (rate, op) in &self.collapse {
            g += op.matrix().ad_mul(op.matrix()) * r(0.5 * rate);
        }
        g
    }

    /// Column-stacked Liouvillian superoperator of the static part.
    pub fn liouvillian(&self) -> Result<CMat> {
        if !self.is_time_independent() {
            return Err(Error::InvalidParameter("Liouvillian requested for a time-dependent model".into()));
        }
        let n = self.dim();
        if n > 48 {
            return Err(Error::InvalidDimension(format!("dense Liouvillian of dimension {n}² is too large")));
        }
        let heff = self.hamiltonian.matrix() - self.damping() * I;
        let id = linalg::eye(n);
        let mut l = linalg::kron(&id, &heff) * (-I) + linalg::kron(&heff.map(|z| z.conj()), &id) * I;
        for (rate, op) in &self.collapse {
            let m = op.matrix();
            l += linalg::kron(&m.map(|z| z.conj()), m) * r(*rate);
        }
        Ok(l)
    }
}

/// D[O]ρ = OρO† − ½{O†O, ρ}.
pub fn dissipator(op: &Operator, rho: &QuantumState) -> Result<CMat> {
    if op.space() != rho.space() {
        return Err(Error::SpaceMismatch("dissipator operator and state live on different spaces".into()));
    }
    let o = op.matrix();
    let p = rho.density_matrix();
    let od = o.adjoint();
    let n = &od * o;
    Ok(o * &p * &od - (&n * &p + &p * &n) * r(0.5))
}

/// Integration strategy for `evolve`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// Adaptive Dormand-Prince on the density matrix.
    RungeKutta,
    /// exp(L·Δt) of the vectorized Liouvillian; time-independent models only.
    Propagator,
    /// Propagator for small time-independent models, Runge-Kutta otherwise.
    Auto,
}

/// Models up to this Hilbert-space dimension use the propagator under `Method::Auto`.
pub const PROPAGATOR_MAX_DIM: usize = 16;

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    pub ode: OdeOptions,
    pub method: Method,
    pub store_states: bool,
    pub observables: Vec<Operator>,
    pub leakage_threshold: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            ode: OdeOptions::default(),
            method: Method::Auto,
            store_states: true,
            observables: Vec::new(),
            leakage_threshold: DEFAULT_LEAKAGE_THRESHOLD,
        }
    }
}

impl EvolveOptions {
    pub fn observing(observables: Vec<Operator>) -> Self {
        Self { observables, store_states: false, ..Self::default() }
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    /// Empty unless `store_states` was set.
    pub states: Vec<QuantumState>,
    /// `expectations[k][i]` is observable k at time i.
    pub expectations: Vec<Vec<C64>>,
    /// At most one warning per subsystem, at the time of largest top-level population.
    pub leakage_warnings: Vec<LeakageWarning>,
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
    pub stats: OdeStats,
}

impl EvolutionResult {
    pub fn expectation_real(&self, k: usize) -> Vec<f64> {
        self.expectations[k].iter().map(|z| z.re).collect()
    }
}

struct Recorder<'a> {
    space: &'a HilbertSpace,
    opts: &'a EvolveOptions,
    result: EvolutionResult,
    check_eigs: bool,
}

impl<'a> Recorder<'a> {
    fn new(space: &'a HilbertSpace, opts: &'a EvolveOptions, times: &[f64]) -> Self {
        Self {
            space,
            opts,
            result: EvolutionResult {
                times: times.to_vec(),
                states: Vec::new(),
                expectations: vec![Vec::with_capacity(times.len()); opts.observables.len()],
                leakage_warnings: Vec::new(),
                max_trace_error: 0.0,
                max_hermiticity_error: 0.0,
                min_eigenvalue: f64::INFINITY,
                stats: OdeStats::default(),
            },
            check_eigs: space.dim() <= 64,
        }
    }

    fn record(&mut self, t: f64, rho: &CMat, last: bool) {
        let res = &mut self.result;
        res.max_trace_error = res.max_trace_error.max((linalg::trace(rho) - r(1.0)).norm());
        res.max_hermiticity_error = res.max_hermiticity_error.max(linalg::hermiticity_error(rho));
        if self.check_eigs || last {
            if let Some(&m) = linalg::eigvalsh(rho).first() {
                res.min_eigenvalue = res.min_eigenvalue.min(m);
            }
        }
        for (k, op) in self.opts.observables.iter().enumerate() {
            res.expectations[k].push(linalg::trace(&(rho * op.matrix())));
        }
        let state = QuantumState::density_unchecked(self.space.clone(), rho.clone());
        for (idx, &d) in self.space.dims().iter().enumerate() {
            if d <= 2 {
                continue;
            }
            let p = state.top_level_population(idx).unwrap_or(0.0);
            if p > self.opts.leakage_threshold {
                match res.leakage_warnings.iter_mut().find(|w| w.subsystem == idx) {
                    Some(w) if w.population >= p => {}
                    Some(w) => {
                        w.population = p;
                        w.time = Some(t);
                    }
                    None => res.leakage_warnings.push(LeakageWarning {
                        subsystem: idx,
                        population: p,
                        threshold: self.opts.leakage_threshold,
                        time: Some(t),
                    }),
                }
            }
        }
        if self.opts.store_states {
            res.states.push(state);
        }
    }
}

/// Evolves ρ0 with default options, storing every state.
pub fn evolve(model: &LindbladModel, rho0: &QuantumState, times: &[f64]) -> Result<EvolutionResult> {
    evolve_with(model, rho0, times, &EvolveOptions::default())
}

pub fn evolve_with(model: &LindbladModel, rho0: &QuantumState, times: &[f64], opts: &EvolveOptions) -> Result<EvolutionResult> {
    if rho0.space() != model.space() {
        return Err(Error::SpaceMismatch("initial state and model spaces differ".into()));
    }
    for op in &opts.observables {
        model.check_space(op)?;
    }
    if times.is_empty() {
        return Err(Error::InvalidParameter("empty time grid".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("time grid must be non-decreasing".into()));
    }
    let rho = rho0.density_matrix();
    let n = model.dim();
    let method = match opts.method {
        Method::Auto if model.is_time_independent() && n <= PROPAGATOR_MAX_DIM => Method::Propagator,
        Method::Auto => Method::RungeKutta,
        m => m,
    };
    let mut rec = Recorder::new(model.space(), opts, times);
    let last = times.len() - 1;
    match method {
        Method::Propagator => {
            let l = model.liouvillian()?;
            let mut v = linalg::vectorize(&rho);
            let mut t_prev = times[0];
            let mut cache: Option<(f64, CMat)> = None;
            for (i, &t) in times.iter().enumerate() {
                let dt = t - t_prev;
                if dt > 0.0 {
                    let reuse = cache.as_ref().is_some_and(|(d, _)| ((d - dt) / dt).abs() < 1e-12);
                    if !reuse {
                        cache = Some((dt, linalg::expm(&(&l * r(dt)))));
                    }
                    v = &cache.as_ref().expect("cached propagator").1 * v;
                }
                t_prev = t;
                rec.record(t, &linalg::unvectorize(&v, n), i == last);
            }
        }
        _ => {
            let h0 = model.hamiltonian.matrix().clone();
            let damp = model.damping();
            let jumps: Vec<(CMat, CMat)> = model
                .collapse
                .iter()
                .map(|(rate, op)| {
                    let m = op.matrix() * r(rate.sqrt());
                    let md = m.adjoint();
                    (m, md)
                })
                .collect();
            let static_heff = &h0 - &damp * I;
            let mut heff = static_heff.clone();
            let mut tmp2 = CMat::zeros(n, n);
            let mut heff_dag_buf = CMat::zeros(n, n);
            let rhs = |t: f64, rho: &CMat, out: &mut CMat| {
                heff.copy_from(&static_heff);
                for d in &model.drives {
                    d.add_to(&mut heff, t);
                }
                // −i(Heff ρ − ρ Heff†)
                out.gemm(-I, &heff, rho, r(0.0));
                heff.adjoint_to(&mut heff_dag_buf);
                out.gemm(I, rho, &heff_dag_buf, r(1.0));
                for (m, md) in &jumps {
                    tmp2.gemm(r(1.0), m, rho, r(0.0));
                    out.gemm(r(1.0), &tmp2, md, r(1.0));
                }
            };
            let t0 = times[0];
            let stats = ode::integrate(rhs, t0, rho, times, &opts.ode, |i, t, y| rec.record(t, y, i == last))?;
            rec.result.stats = stats;
        }
    }
    Ok(rec.result)
}

/// Unitary propagator U(t1, t0) of the Hamiltonian part of `model`
/// (collapse terms are ignored).
pub fn unitary_propagator(model: &LindbladModel, t0: f64, t1: f64, opts: &OdeOptions) -> Result<CMat> {
    let n = model.dim();
    if model.is_time_independent() {
        return Ok(linalg::expm_hermitian(model.hamiltonian.matrix(), t1 - t0));
    }
    let mut h = CMat::zeros(n, n);
    let mut u = linalg::eye(n);
    ode::integrate(
        |t, y, out| {
            h.copy_from(model.hamiltonian.matrix());
            for d in &model.drives {
                d.add_to(&mut h, t);
            }
            out.gemm(-I, &h, y, r(0.0));
        },
        t0,
        linalg::eye(n),
        &[t1],
        opts,
        |_, _, y| u.copy_from(y),
    )?;
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateOptions {
    /// Largest accepted ‖L vec(ρ)‖ / ‖L‖.
    pub residual_tol: f64,
    /// Relative pivot size below which the null space is inspected by SVD.
    pub pivot_tol: f64,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        Self { residual_tol: 1e-10, pivot_tol: 1e-11 }
    }
}

pub fn steady_state(model: &LindbladModel) -> Result<QuantumState> {
    steady_state_with(model, &SteadyStateOptions::default())
}

/// Unique null vector of the Liouvillian with unit trace.
pub fn steady_state_with(model: &LindbladModel, opts: &SteadyStateOptions) -> Result<QuantumState> {
    let l = model.liouvillian()?;
    let rho = liouvillian_null_state(&l, model.dim(), opts)?;
    Ok(QuantumState::density_unchecked(model.space().clone(), rho))
}

fn liouvillian_null_state(l: &CMat, n: usize, opts: &SteadyStateOptions) -> Result<CMat> {
    let big = l.nrows();
    let scale = l.norm();
    let mut a = l.clone();
    for j in 0..big {
        a[(0, j)] = r(0.0);
    }
    for k in 0..n {
        a[(0, k * (n + 1))] = r(scale / n as f64);
    }
    let mut b = CVec::zeros(big);
    b[0] = r(scale / n as f64);
    let lu = a.lu();
    let u = lu.u();
    let diag: Vec<f64> = u.diagonal().iter().map(|z| z.norm()).collect();
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if dmin <= opts.pivot_tol * dmax {
        let sv = linalg::singular_values(l);
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let null = sv.iter().filter(|&&s| s <= 1e-10 * smax).count();
        if null != 1 {
            return Err(Error::SteadyStateMultiplicity(null));
        }
    }
    let x = lu.solve(&b).ok_or_else(|| Error::Singular("steady-state system".into()))?;
    let mut rho = linalg::unvectorize(&x, n);
    rho = (&rho + rho.adjoint()) * r(0.5);
    let tr = linalg::trace(&rho);
    rho /= tr;
    let residual = (l * linalg::vectorize(&rho)).norm();
    if residual > opts.residual_tol * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Convergence(format!("steady-state residual {:e} relative to ‖L‖", residual / scale)));
    }
    Ok(rho)
}

/// Linear-response helper: precomputed Hessenberg form of a Liouvillian for
/// Laplace-domain solves ∫₀^∞ e^{−sτ} e^{Lτ} x dτ = (s − L)⁻¹ x.
#[derive(Debug, Clone)]
pub struct Resolvent {
    solver: ShiftedSolver,
    n: usize,
}

impl Resolvent {
    pub fn new(liouvillian: &CMat, n: usize) -> Self {
        Self { solver: ShiftedSolver::new(liouvillian), n }
    }

    /// Resolvent of a trace-preserving Liouvillian restricted to traceless
    /// inputs. The zero eigenvalue is shifted away by L − c·vec(ρss)·vec(1)†,
    /// which leaves L unchanged on traceless operators.
    pub fn traceless(liouvillian: &CMat, rho_ss: &CMat) -> Self {
        let n = rho_ss.nrows();
        let shift = liouvillian.norm() / (n as f64);
        let v = linalg::vectorize(rho_ss);
        let mut l = liouvillian.clone();
        for k in 0..n {
            let col = k * (n + 1);
            for i in 0..l.nrows() {
                l[(i, col)] -= v[i] * shift;
            }
        }
        Self::new(&l, n)
    }

    /// Tr[O (s − L)⁻¹ X] for every s, with one Hessenberg-basis projection.
    pub fn trace_response(&self, observable: &CMat, x: &CMat, s_values: &[C64]) -> Result<Vec<C64>> {
        let c = self.solver.project(&linalg::vectorize(x));
        let w = self.solver.project_functional(&linalg::vectorize(&observable.transpose()));
        s_values
            .iter()
            .map(|&s| {
                // (s − L)⁻¹ = −(L − s)⁻¹
                let y = self.solver.solve_projected(s, &c)?;
                Ok(-w.dot(&y))
            })
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

/// Rates of the dispersive master equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissipationRates {
    pub kappa: f64,
    pub gamma: f64,
    pub gamma_phi: f64,
    pub n_bar_kappa: f64,
    pub n_bar_gamma: f64,
    /// (g/Δ)²κ
    pub gamma_purcell: f64,
    /// κg²/[(κ/2)² + Δ²]
    pub gamma_purcell_interpolated: f64,
    /// (g/Δ)²γ
    pub kappa_inverse_purcell: f64,
    /// 2(g/Δ)²γφ
    pub gamma_delta: f64,
    /// γ + γκ
    pub gamma1: f64,
    pub gamma2: f64,
    pub t1: f64,
    pub t2: f64,
    /// (g/Δ)² > 0.1
    pub dispersive_warning: bool,
}

pub fn dispersive_rates(g: f64, delta: f64, kappa: f64, gamma: f64, gamma_phi: f64) -> Result<DissipationRates> {
    if delta == 0.0 {
        return Err(Error::InvalidParameter("Δ = 0 is the resonant regime; dispersive rates undefined".into()));
    }
    if kappa < 0.0 || gamma < 0.0 || gamma_phi < 0.0 {
        return Err(Error::InvalidParameter("rates must be non-negative".into()));
    }
    let l2 = (g / delta).powi(2);
    let gamma_purcell = l2 * kappa;
    let gamma1 = gamma + gamma_purcell;
    let gamma2 = gamma1 / 2.0 + gamma_phi;
    Ok(DissipationRates {
        kappa,
        gamma,
        gamma_phi,
        n_bar_kappa: 0.0,
        n_bar_gamma: 0.0,
        gamma_purcell,
        gamma_purcell_interpolated: kappa * g * g / ((kappa / 2.0).powi(2) + delta * delta),
        kappa_inverse_purcell: l2 * gamma,
        gamma_delta: 2.0 * l2 * gamma_phi,
        gamma1,
        gamma2,
        t1: 1.0 / gamma1,
        t2: 1.0 / gamma2,
        dispersive_warning: l2 > 0.1,
    })
}

/// Resonator coupled to a two-level qubit, probed through the resonator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionSystem {
    pub omega_r: f64,
    pub omega_q: f64,
    pub g: f64,
    pub kappa: f64,
    pub gamma1: f64,
    #[serde(default)]
    pub gamma_phi: f64,
    #[serde(default)]
    pub n_thermal: f64,
}

impl TransmissionSystem {
    pub fn gamma2(&self) -> f64 {
        self.gamma1 / 2.0 + self.gamma_phi
    }

    /// Jaynes-Cummings Lindblad model in the frame rotating at `omega_frame`,
    /// with an optional resonator drive ε(a + a†).
    pub fn model(&self, omega_frame: f64, epsilon: f64, resonator_dim: usize) -> Result<LindbladModel> {
        let space = HilbertSpace::new(vec![2, resonator_dim])?;
        let (a, _) = ladder_operators(resonator_dim)?;
        let a = embed(&a, 1, &space)?;
        let ad = a.dag();
        let sm = embed(&sigma_minus(), 0, &space)?;
        let sp = sm.dag();
        let pe = &sp * &sm;
        let h = &(&(&(&ad * &a) * (self.omega_r - omega_frame)) + &(&pe * (self.omega_q - omega_frame)))
            + &(&(&(&ad * &sm) + &(&a * &sp)) * self.g);
        let h = &h + &(&(&a + &ad) * epsilon);
        LindbladModel::new(h)?
            .with_thermal_bath(self.kappa, self.n_thermal, a)?
            .with_collapse(self.gamma1, sm)?
            .with_collapse(2.0 * self.gamma_phi, pe)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TransmissionMethod {
    /// Closed form in the three-level truncation (zero temperature).
    Analytic,
    /// Exact weak-probe response of the Lindblad model (any temperature).
    LinearResponse { resonator_dim: usize },
    /// Steady state of the driven Lindblad model at the given drive amplitude.
    MasterEquation { resonator_dim: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub omega: f64,
    /// |A|² with A = ⟨â⟩.
    pub magnitude: f64,
    pub phase: f64,
}

fn spectrum_point(omega: f64, a: C64) -> SpectrumPoint {
    SpectrumPoint { omega, magnitude: a.norm_sqr(), phase: a.arg() }
}

/// Steady-state transmitted amplitude A = ⟨â⟩ versus drive frequency for a
/// weak resonator drive of amplitude `epsilon`.
pub fn transmission_sweep(
    sys: &TransmissionSystem,
    drive_freqs: &[f64],
    epsilon: f64,
    method: TransmissionMethod,
) -> Result<Vec<SpectrumPoint>> {
    if drive_freqs.is_empty() {
        return Err(Error::InvalidParameter("empty drive-frequency grid".into()));
    }
    let width = sys.kappa.max(2.0 * sys.gamma2());
    if width <= 0.0 {
        return Err(Error::InvalidParameter("need kappa > 0 or gamma2 > 0 for a steady state".into()));
    }
    if 4.0 * epsilon * epsilon / (width * width) > 0.1 {
        return Err(Error::InvalidParameter(format!("drive amplitude {epsilon:e} is not weak relative to the linewidth")));
    }
    match method {
        TransmissionMethod::Analytic => {
            if sys.n_thermal > 0.0 {
                return Err(Error::InvalidParameter("closed-form transmission is zero-temperature only".into()));
            }
            let g2 = sys.gamma2();
            Ok(drive_freqs
                .iter()
                .map(|&w| {
                    let dq = c(sys.omega_q - w, -g2);
                    let dr = c(sys.omega_r - w, -sys.kappa / 2.0);
                    let a = -dq * epsilon / (dq * dr - r(sys.g * sys.g));
                    spectrum_point(w, a)
                })
                .collect())
        }
        TransmissionMethod::LinearResponse { resonator_dim } => {
            let model = sys.model(sys.omega_r, 0.0, resonator_dim)?;
            let l = model.liouvillian()?;
            let n = model.dim();
            let rho_ss = liouvillian_null_state(&l, n, &SteadyStateOptions::default())?;
            let space = model.space();
            let a = embed(&ladder_operators(resonator_dim)?.0, 1, space)?;
            let am = a.matrix();
            let ad = am.adjoint();
            let comm = &ad * &rho_ss - &rho_ss * &ad;
            let res = Resolvent::traceless(&l, &rho_ss);
            // ⟨a⟩ = −iε ∫ e^{iδτ} Tr[a e^{Lτ}[a†, ρss]] dτ, δ = ωd − ωr.
            let s: Vec<C64> = drive_freqs.iter().map(|&w| -I * (w - sys.omega_r)).collect();
            let resp = res.trace_response(am, &comm, &s)?;
            Ok(drive_freqs.iter().zip(resp).map(|(&w, x)| spectrum_point(w, -I * epsilon * x)).collect())
        }
        TransmissionMethod::MasterEquation { resonator_dim } => {
            use rayon::prelude::*;
            drive_freqs
                .par_iter()
                .map(|&w| {
                    let model = sys.model(w, epsilon, resonator_dim)?;
                    let rho = steady_state(&model)?;
                    let a = embed(&ladder_operators(resonator_dim)?.0, 1, model.space())?;
                    Ok(spectrum_point(w, crate::hilbert::expectation(&rho, &a)?))
                })
                .collect()
        }
    }
}

/// Steady-state excited population of a driven two-level qubit,
/// Pe = ½Ω²/(γ1γ2 + δ²γ1/γ2 + Ω²).
pub fn qubit_lineshape_formula(omega_rabi: f64, gamma1: f64, gamma_phi: f64, detuning: f64) -> f64 {
    let g2 = gamma1 / 2.0 + gamma_phi;
    let o2 = omega_rabi * omega_rabi;
    0.5 * o2 / (gamma1 * g2 + detuning * detuning * gamma1 / g2 + o2)
}

/// FWHM 2√(1/T2² + Ω²T1/T2) of the power-broadened line.
pub fn qubit_lineshape_fwhm(omega_rabi: f64, gamma1: f64, gamma_phi: f64) -> f64 {
    let g2 = gamma1 / 2.0 + gamma_phi;
    2.0 * (g2 * g2 + omega_rabi * omega_rabi * g2 / gamma1).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineshapeMethod {
    Formula,
    MasterEquation,
}

/// Driven qubit in the drive frame: H = (δ/2)σz + (Ω/2)σx with
/// collapse terms γ1 D[σ−] and 2γφ D[σ+σ−].
pub fn driven_qubit_model(omega_rabi: f64, gamma1: f64, gamma_phi: f64, detuning: f64) -> Result<LindbladModel> {
    let h = &(&sigma_z() * (detuning / 2.0)) + &(&sigma_x() * (omega_rabi / 2.0));
    let sm = sigma_minus();
    let pe = &sm.dag() * &sm;
    LindbladModel::new(h)?.with_collapse(gamma1, sm)?.with_collapse(2.0 * gamma_phi, pe)
}

pub fn qubit_lineshape(
    omega_rabi: f64,
    gamma1: f64,
    gamma_phi: f64,
    detunings: &[f64],
    method: LineshapeMethod,
) -> Result<Vec<f64>> {
    if gamma1 <= 0.0 {
        return Err(Error::InvalidParameter("gamma1 must be > 0 for a steady state".into()));
    }
    match method {
        LineshapeMethod::Formula => Ok(detunings.iter().map(|&d| qubit_lineshape_formula(omega_rabi, gamma1, gamma_phi, d)).collect()),
        LineshapeMethod::MasterEquation => detunings
            .iter()
            .map(|&d| {
                let rho = steady_state(&driven_qubit_model(omega_rabi, gamma1, gamma_phi, d)?)?;
                Ok(rho.density_matrix()[(1, 1)].re)
            })
            .collect(),
    }
}

/// Dispersive two-level qubit with a driven resonator, used for two-tone
/// spectroscopy. Detunings follow δr = ωr − ωd.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcStarkSystem {
    pub chi: f64,
    pub kappa: f64,
    pub gamma1: f64,
    #[serde(default)]
    pub gamma_phi: f64,
    /// Measurement-drive detuning from the bare resonator.
    pub delta_r: f64,
    /// Measurement-drive amplitude.
    pub epsilon: f64,
    /// Spectroscopy Rabi frequency.
    pub omega_rabi: f64,
}

impl AcStarkSystem {
    /// Qubit-conditioned steady-state pointer amplitudes (αg, αe).
    pub fn pointer_amplitudes(&self) -> (C64, C64) {
        let ag = -self.epsilon / c(self.delta_r - self.chi, -self.kappa / 2.0);
        let ae = -self.epsilon / c(self.delta_r + self.chi, -self.kappa / 2.0);
        (ag, ae)
    }

    /// Resonator truncation covering the larger pointer state.
    pub fn default_resonator_dim(&self) -> usize {
        let (ag, ae) = self.pointer_amplitudes();
        let n = ag.norm_sqr().max(ae.norm_sqr());
        (n + 4.0 * n.sqrt() + 4.0).ceil() as usize
    }

    /// Joint model in the frame of both drives; `detuning` is ωs − (ωq + χ).
    pub fn joint_model(&self, detuning: f64, resonator_dim: usize) -> Result<LindbladModel> {
        let space = HilbertSpace::new(vec![2, resonator_dim])?;
        let (a, _) = ladder_operators(resonator_dim)?;
        let a = embed(&a, 1, &space)?;
        let ad = a.dag();
        let num = &ad * &a;
        let sz = embed(&sigma_z(), 0, &space)?;
        let sx = embed(&sigma_x(), 0, &space)?;
        let sm = embed(&sigma_minus(), 0, &space)?;
        let pe = &sm.dag() * &sm;
        let h = &(&(&num * self.delta_r) + &(&sz * (-detuning / 2.0))) + &(&(&num * &sz) * self.chi);
        let h = &(&h + &(&(&a + &ad) * self.epsilon)) + &(&sx * (self.omega_rabi / 2.0));
        LindbladModel::new(h)?
            .with_collapse(self.kappa, a)?
            .with_collapse(self.gamma1, sm)?
            .with_collapse(2.0 * self.gamma_phi, pe)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StarkMethod {
    /// Weak-spectroscopy limit: Pe from the qubit-coherence response of the
    /// g-conditioned resonator state. Exact to order Ω².
    LinearResponse { resonator_dim: usize },
    /// Steady state of the joint qubit-resonator master equation.
    MasterEquation { resonator_dim: usize },
}

/// Qubit excited population versus spectroscopy detuning ωs − (ωq + χ).
pub fn two_tone_ac_stark(sys: &AcStarkSystem, detunings: &[f64], method: StarkMethod) -> Result<Vec<f64>> {
    if detunings.is_empty() {
        return Err(Error::InvalidParameter("empty spectroscopy grid".into()));
    }
    if sys.kappa <= 0.0 || sys.gamma1 <= 0.0 {
        return Err(Error::InvalidParameter("kappa and gamma1 must be > 0".into()));
    }
    match method {
        StarkMethod::LinearResponse { resonator_dim } => {
            let nd = resonator_dim;
            let (a, ad) = ladder_operators(nd)?;
            let a = a.matrix().clone();
            let ad = ad.matrix().clone();
            let num = &ad * &a;
            let id = linalg::eye(nd);
            let drive = (&a + &ad) * r(sys.epsilon);
            let hg = &num * r(sys.delta_r - sys.chi) + &drive;
            let he = &num * r(sys.delta_r + sys.chi) + &drive;
            let damp = &num * r(sys.kappa / 2.0);
            let jump = linalg::kron(&a.map(|z| z.conj()), &a) * r(sys.kappa);
            // Resonator steady state with the qubit in g.
            let hg_eff = &hg - &damp * I;
            let lg = linalg::kron(&id, &hg_eff) * (-I) + linalg::kron(&hg_eff.map(|z| z.conj()), &id) * I + &jump;
            let rho_g = liouvillian_null_state(&lg, nd, &SteadyStateOptions::default())?;
            // Coherence X = ⟨e|ρ|g⟩ evolves as −i(He X − X Hg) + κD-terms − γ2 X.
            let gamma2 = sys.gamma1 / 2.0 + sys.gamma_phi;
            let he_eff = &he - &damp * I;
            let lx = linalg::kron(&id, &he_eff) * (-I) + linalg::kron(&hg_eff.map(|z| z.conj()), &id) * I + &jump
                - linalg::eye(nd * nd) * r(gamma2);
            let res = Resolvent::new(&lx, nd);
            // Frame at ωs: the coherence picks up e^{iδτ}, s = −iδ.
            let s: Vec<C64> = detunings.iter().map(|&d| -I * d).collect();
            let resp = res.trace_response(&id, &rho_g, &s)?;
            let scale = sys.omega_rabi * sys.omega_rabi / (2.0 * sys.gamma1);
            Ok(resp.iter().map(|z| scale * z.re).collect())
        }
        StarkMethod::MasterEquation { resonator_dim } => {
            use rayon::prelude::*;
            detunings
                .par_iter()
                .map(|&d| {
                    let model = sys.joint_model(d, resonator_dim)?;
                    let rho = steady_state(&model)?;
                    let q = rho.reduced(0)?;
                    Ok(q.density_matrix()[(1, 1)].re)
                })
                .collect()
        }
    }
}

/// Spectral weight of each photon-number peak: the area of the spectrum in
/// windows of width 2χ centred on 2χn for n = 0..count.
pub fn number_split_weights(detunings: &[f64], spectrum: &[f64], chi: f64, count: usize) -> Vec<f64> {
    let w = 2.0 * chi;
    (0..count)
        .map(|n| {
            let centre = w * n as f64;
            let (lo, hi) = (centre - w / 2.0, centre + w / 2.0);
            let (x, y): (Vec<f64>, Vec<f64>) = detunings
                .iter()
                .zip(spectrum)
                .filter(|(&d, _)| if chi > 0.0 { d >= lo && d < hi } else { d <= lo && d > hi })
                .map(|(&d, &p)| (d, p))
                .unzip();
            crate::numeric::trapz(&x, &y).abs()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonFit {
    pub n_bar: f64,
    pub chi_square: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson χ² test of normalized peak weights against a Poisson law whose
/// mean is the weighted average photon number. Weights are converted to
/// `pseudo_counts` counts; the last bin absorbs the Poisson tail.
pub fn poisson_goodness(weights: &[f64], pseudo_counts: f64) -> Result<PoissonFit> {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let k = weights.len();
    if k < 3 {
        return Err(Error::InvalidParameter("need at least three peaks".into()));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidParameter("weights sum to zero".into()));
    }
    let p: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let n_bar: f64 = p.iter().enumerate().map(|(n, q)| n as f64 * q).sum();
    let mut expected = Vec::with_capacity(k);
    let mut pn = (-n_bar).exp();
    let mut acc = 0.0;
    for n in 0..k {
        if n > 0 {
            pn *= n_bar / n as f64;
        }
        if n + 1 == k {
            expected.push(1.0 - acc);
        } else {
            expected.push(pn);
            acc += pn;
        }
    }
    let chi_square: f64 =
        p.iter().zip(&expected).map(|(o, e)| pseudo_counts * (o - e).powi(2) / e.max(f64::MIN_POSITIVE)).sum();
    let dof = k - 2;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(PoissonFit { n_bar, chi_square, dof, p_value: 1.0 - dist.cdf(chi_square) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementDephasing {
    /// 2χ Im[αg αe*] at every trajectory sample.
    pub instantaneous: Vec<f64>,
    /// κ|αe − αg|²/2 from the final amplitudes.
    pub steady: f64,
    /// κχ²(n̄g + n̄e)/(δr² + χ² + (κ/2)²) from the final amplitudes.
    pub closed_form: f64,
}

pub fn measurement_dephasing_rate(alpha_g: &[C64], alpha_e: &[C64], chi: f64, kappa: f64, delta_r: f64) -> Result<MeasurementDephasing> {
    if alpha_g.len() != alpha_e.len() || alpha_g.is_empty() {
        return Err(Error::InvalidParameter("pointer trajectories must be non-empty and of equal length".into()));
    }
    let instantaneous = alpha_g.iter().zip(alpha_e).map(|(g, e)| 2.0 * chi * (g * e.conj()).im).collect();
    let (g, e) = (alpha_g[alpha_g.len() - 1], alpha_e[alpha_e.len() - 1]);
    Ok(MeasurementDephasing {
        instantaneous,
        steady: kappa * (e - g).norm_sqr() / 2.0,
        closed_form: measurement_dephasing_closed_form(chi, kappa, delta_r, g.norm_sqr(), e.norm_sqr()),
    })
}

pub fn measurement_dephasing_closed_form(chi: f64, kappa: f64, delta_r: f64, n_g: f64, n_e: f64) -> f64 {
    kappa * chi * chi * (n_g + n_e) / (delta_r * delta_r + chi * chi + kappa * kappa / 4.0)
}

/// Decay rate of |ρge(t)| from the dispersive qubit-resonator master
/// equation, fitted over `fit_window` (in units of 1/κ) after the
/// pointer states have settled. Starts from (|g⟩+|e⟩)/√2 ⊗ |0⟩.
pub fn simulate_measurement_dephasing(
    chi: f64,
    kappa: f64,
    delta_r: f64,
    epsilon: f64,
    resonator_dim: usize,
    fit_window: (f64, f64),
) -> Result<f64> {
    let sys = AcStarkSystem { chi, kappa, gamma1: 0.0, gamma_phi: 0.0, delta_r, epsilon, omega_rabi: 0.0 };
    let model = sys.joint_model(0.0, resonator_dim)?;
    let space = model.space().clone();
    let mut psi = CVec::zeros(space.dim());
    psi[space.index_of(&[0, 0])?] = r(std::f64::consts::FRAC_1_SQRT_2);
    psi[space.index_of(&[1, 0])?] = r(std::f64::consts::FRAC_1_SQRT_2);
    let rho0 = QuantumState::ket(space.clone(), psi)?;
    let coherence = embed(&crate::hilbert::basis_op(2, 1, 0), 0, &space)?;
    let times = crate::numeric::linspace(0.0, fit_window.1 / kappa, 400);
    let opts = EvolveOptions { method: Method::RungeKutta, ..EvolveOptions::observing(vec![coherence]) };
    let res = evolve_with(&model, &rho0, &times, &opts)?;
    let (t, y): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(&res.expectations[0])
        .filter(|(&t, _)| t >= fit_window.0 / kappa)
        .map(|(&t, z)| (t, z.norm()))
        .unzip();
    Ok(crate::numeric::exp_decay_rate(&t, &y))
}
