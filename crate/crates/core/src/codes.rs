//! Bosonic and qubit codes against excitation loss.
//!
//! Qubit registers use index 0 = |0> (ground) and order qubit 1 first.
//! The loss channel is the standard bosonic amplitude-damping map with
//! loss probability p = 1 − e^{−κδt}.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{destroy, parity, sigma_minus, sigma_x, sigma_z, HilbertSpace, QuantumState};
use crate::linalg::{eigh, eye, kron, polar_unitary, r, trace, CMat, CVec, C64};
use crate::numeric::linear_fit;

const ORTHO_TOL: f64 = 1e-10;
const CAT_TAIL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledOperator {
    pub label: String,
    pub matrix: CMat,
}

impl LabeledOperator {
    fn new(label: impl Into<String>, matrix: CMat) -> Self {
        Self { label: label.into(), matrix }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodeSpec {
    pub name: String,
    pub space: HilbertSpace,
    /// |0L>, |1L>.
    pub codewords: Vec<QuantumState>,
    pub errors: Vec<LabeledOperator>,
    pub stabilizers: Vec<LabeledOperator>,
}

impl CodeSpec {
    fn build(
        name: &str,
        space: HilbertSpace,
        words: Vec<CVec>,
        errors: Vec<LabeledOperator>,
        stabilizers: Vec<LabeledOperator>,
    ) -> Result<Self> {
        let codewords = words.into_iter().map(|v| QuantumState::ket(space.clone(), v)).collect::<Result<_>>()?;
        let code = Self { name: name.into(), space, codewords, errors, stabilizers };
        code.validate()?;
        Ok(code)
    }

    pub fn ket(&self, i: usize) -> &CVec {
        self.codewords[i].as_ket().expect("codewords are kets")
    }

    /// Encoding isometry with the codewords as columns.
    pub fn encoder(&self) -> CMat {
        let n = self.space.dim();
        let mut out = CMat::zeros(n, self.codewords.len());
        for i in 0..self.codewords.len() {
            out.set_column(i, self.ket(i));
        }
        out
    }

    /// Checks orthonormality and that every stabilizer squares to 1 and
    /// fixes each codeword with eigenvalue +1.
    pub fn validate(&self) -> Result<()> {
        let e = self.encoder();
        let gram = e.adjoint() * &e;
        let dev = (gram - eye(self.codewords.len())).iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        if dev > ORTHO_TOL {
            return Err(Error::InvalidState(format!("{}: codewords not orthonormal (deviation {dev:e})", self.name)));
        }
        let n = self.space.dim();
        for s in &self.stabilizers {
            if (&s.matrix * &s.matrix - eye(n)).iter().any(|z| z.norm() > ORTHO_TOL) {
                return Err(Error::InvalidParameter(format!("stabilizer {} does not square to identity", s.label)));
            }
            for i in 0..self.codewords.len() {
                let v = self.ket(i);
                if (&s.matrix * v - v).norm() > ORTHO_TOL {
                    return Err(Error::InvalidState(format!("stabilizer {} does not fix codeword {i}", s.label)));
                }
            }
        }
        Ok(())
    }

    /// Total excitation number operator (photons or excited qubits).
    pub fn excitation_operator(&self) -> CMat {
        let d: Vec<f64> = (0..self.space.dim()).map(|k| self.space.labels_of(k).iter().sum::<usize>() as f64).collect();
        crate::linalg::diag_real(&d)
    }

    pub fn mean_excitations(&self) -> Vec<f64> {
        let n = self.excitation_operator();
        (0..self.codewords.len()).map(|i| (self.ket(i).adjoint() * &n * self.ket(i))[(0, 0)].re).collect()
    }

    /// Number of linearly independent error states, the rank of the
    /// Knill-Laflamme matrix of the code's error set.
    pub fn correctable_error_count(&self) -> usize {
        let ops: Vec<CMat> = self.errors.iter().map(|e| e.matrix.clone()).collect();
        let c = kl_matrix(self, &ops, 0);
        let (vals, _) = eigh(&c);
        let top = vals.iter().cloned().fold(0.0_f64, f64::max);
        vals.iter().filter(|&&v| v > 1e-9 * top.max(1e-300)).count()
    }
}

/// |0L> = (|0> + |4>)/√2, |1L> = |2>, stabilized by photon parity.
pub fn binomial_code(dim: usize) -> Result<CodeSpec> {
    if dim < 5 {
        return Err(Error::InvalidDimension(format!("binomial code needs dim >= 5, got {dim}")));
    }
    let mut w0 = CVec::zeros(dim);
    w0[0] = r(std::f64::consts::FRAC_1_SQRT_2);
    w0[4] = r(std::f64::consts::FRAC_1_SQRT_2);
    let mut w1 = CVec::zeros(dim);
    w1[2] = r(1.0);
    let a = destroy(dim)?.into_matrix();
    CodeSpec::build(
        "binomial",
        HilbertSpace::single(dim)?,
        vec![w0, w1],
        vec![LabeledOperator::new("I", eye(dim)), LabeledOperator::new("a", a)],
        vec![LabeledOperator::new("P", parity(dim)?.into_matrix())],
    )
}

/// Fock-state code {|0>, |1>} with the loss error set, for comparison.
pub fn trivial_code(dim: usize) -> Result<CodeSpec> {
    if dim < 2 {
        return Err(Error::InvalidDimension(format!("trivial code needs dim >= 2, got {dim}")));
    }
    let w = |k: usize| {
        let mut v = CVec::zeros(dim);
        v[k] = r(1.0);
        v
    };
    let a = destroy(dim)?.into_matrix();
    CodeSpec::build(
        "fock01",
        HilbertSpace::single(dim)?,
        vec![w(0), w(1)],
        vec![LabeledOperator::new("I", eye(dim)), LabeledOperator::new("a", a)],
        vec![],
    )
}

/// Normalized Σ_{n ∈ support} α^n/√n! |n>, scaled by its lowest term so
/// the α → 0 limit is the lowest Fock state of the support.
fn cat_component(alpha: C64, dim: usize, support: impl Fn(usize) -> bool) -> Result<CVec> {
    let first = (0..dim).find(|&n| support(n)).ok_or_else(|| Error::InvalidDimension("empty cat support".into()))?;
    let mut v = CVec::zeros(dim);
    let mut term = r(1.0);
    for n in first..dim {
        if n > first {
            term *= alpha / (n as f64).sqrt();
        }
        if support(n) {
            v[n] = term;
        }
    }
    // Only the ratio between support terms matters; rescale term by √first!.
    let norm = v.norm();
    Ok(v / r(norm))
}

fn coherent_tail(alpha: C64, dim: usize) -> f64 {
    let x = alpha.norm_sqr();
    let mut p = (-x).exp();
    let mut kept = 0.0;
    for n in 0..dim {
        if n > 0 {
            p *= x / n as f64;
        }
        kept += p;
    }
    (1.0 - kept).max(0.0)
}

/// Cat code with `legs` = 4 (|0L> on Fock states 4n, |1L> on 4n+2) or
/// 2 (|0L>, |1L> = (|+L> ± |−L>)/√2 with |±L> = N±(|α> ± |−α>)).
pub fn cat_code(alpha: C64, legs: usize, dim: usize) -> Result<CodeSpec> {
    let tail = coherent_tail(alpha, dim);
    if tail > CAT_TAIL_TOL {
        return Err(Error::Leakage { population: tail, threshold: CAT_TAIL_TOL });
    }
    let a = destroy(dim)?.into_matrix();
    let errors = vec![LabeledOperator::new("I", eye(dim)), LabeledOperator::new("a", a)];
    let space = HilbertSpace::single(dim)?;
    match legs {
        4 => {
            let w0 = cat_component(alpha, dim, |n| n % 4 == 0)?;
            let w1 = cat_component(alpha, dim, |n| n % 4 == 2)?;
            let p = LabeledOperator::new("P", parity(dim)?.into_matrix());
            CodeSpec::build("cat4", space, vec![w0, w1], errors, vec![p])
        }
        2 => {
            let plus = cat_component(alpha, dim, |n| n % 2 == 0)?;
            let minus = cat_component(alpha, dim, |n| n % 2 == 1)?;
            let s = r(std::f64::consts::FRAC_1_SQRT_2);
            CodeSpec::build("cat2", space, vec![(&plus + &minus) * s, (&plus - &minus) * s], errors, vec![])
        }
        _ => Err(Error::InvalidParameter(format!("cat code supports 2 or 4 legs, got {legs}"))),
    }
}

fn qubit_op(ops: &[(usize, &CMat)], n: usize) -> CMat {
    (0..n)
        .map(|q| ops.iter().find(|(k, _)| *k == q).map_or_else(|| eye(2), |(_, m)| (*m).clone()))
        .reduce(|a, b| kron(&a, &b))
        .expect("n > 0")
}

/// (|0000> + |1111>)/√2 and (|1100> + |0011>)/√2 with stabilizers
/// Z1Z2, Z3Z4, X1X2X3X4 and single-qubit lowering errors.
pub fn four_qubit_code() -> Result<CodeSpec> {
    let s = r(std::f64::consts::FRAC_1_SQRT_2);
    let mut w0 = CVec::zeros(16);
    w0[0b0000] = s;
    w0[0b1111] = s;
    let mut w1 = CVec::zeros(16);
    w1[0b1100] = s;
    w1[0b0011] = s;
    let z = sigma_z().into_matrix();
    let x = sigma_x().into_matrix();
    let sm = sigma_minus().into_matrix();
    let mut errors = vec![LabeledOperator::new("I", eye(16))];
    for q in 0..4 {
        errors.push(LabeledOperator::new(format!("s{}-", q + 1), qubit_op(&[(q, &sm)], 4)));
    }
    let stabilizers = vec![
        LabeledOperator::new("Z1Z2", qubit_op(&[(0, &z), (1, &z)], 4)),
        LabeledOperator::new("Z3Z4", qubit_op(&[(2, &z), (3, &z)], 4)),
        LabeledOperator::new("X1X2X3X4", qubit_op(&[(0, &x), (1, &x), (2, &x), (3, &x)], 4)),
    ];
    CodeSpec::build("four_qubit", HilbertSpace::new(vec![2; 4])?, vec![w0, w1], errors, stabilizers)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossChannel {
    pub kappa_t: f64,
    pub kraus: Vec<CMat>,
    /// Number of lost excitations for each Kraus operator.
    pub losses: Vec<usize>,
}

impl LossChannel {
    pub fn completeness_error(&self) -> f64 {
        let n = self.kraus[0].nrows();
        let sum = self.kraus.iter().fold(CMat::zeros(n, n), |acc, k| acc + k.adjoint() * k);
        (sum - eye(n)).iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        self.kraus.iter().fold(CMat::zeros(rho.nrows(), rho.ncols()), |acc, k| acc + k * rho * k.adjoint())
    }

    /// The same loss acting independently on `n` copies.
    pub fn tensor_power(&self, n: usize) -> LossChannel {
        let mut kraus = self.kraus.clone();
        let mut losses = self.losses.clone();
        for _ in 1..n {
            kraus = kraus.iter().flat_map(|a| self.kraus.iter().map(move |b| kron(a, b))).collect();
            losses = losses.iter().flat_map(|a| self.losses.iter().map(move |b| a + b)).collect();
        }
        LossChannel { kappa_t: self.kappa_t, kraus, losses }
    }

    /// Kraus operators losing at most `max` excitations.
    pub fn truncated(&self, max: usize) -> Vec<CMat> {
        self.kraus.iter().zip(&self.losses).filter(|(_, &l)| l <= max).map(|(k, _)| k.clone()).collect()
    }
}

/// K_ℓ = Σ_n √C(n,ℓ) (1−p)^{(n−ℓ)/2} p^{ℓ/2} |n−ℓ><n| with p = 1 − e^{−κδt}.
pub fn amplitude_damping_kraus(kappa_t: f64, dim: usize) -> Result<LossChannel> {
    if !(0.0..1.0).contains(&kappa_t) {
        return Err(Error::InvalidParameter(format!("κδt must lie in [0, 1), got {kappa_t}")));
    }
    if dim < 1 {
        return Err(Error::InvalidDimension("dim 0".into()));
    }
    if kappa_t == 0.0 {
        return Ok(LossChannel { kappa_t, kraus: vec![eye(dim)], losses: vec![0] });
    }
    let p = -(-kappa_t).exp_m1();
    let ln_binom = |n: usize, l: usize| {
        use statrs::function::factorial::ln_factorial;
        ln_factorial(n as u64) - ln_factorial(l as u64) - ln_factorial((n - l) as u64)
    };
    let kraus = (0..dim)
        .map(|l| {
            let mut k = CMat::zeros(dim, dim);
            for n in l..dim {
                let ln = 0.5 * ln_binom(n, l) + 0.5 * (n - l) as f64 * (-kappa_t) + 0.5 * l as f64 * p.ln();
                k[(n - l, n)] = r(ln.exp());
            }
            k
        })
        .collect();
    Ok(LossChannel { kappa_t, kraus, losses: (0..dim).collect() })
}

/// Matrix c_ab = <iL|E_a† E_b|iL> for codeword i.
fn kl_matrix(code: &CodeSpec, errors: &[CMat], i: usize) -> CMat {
    let v = code.ket(i);
    let images: Vec<CVec> = errors.iter().map(|e| e * v).collect();
    CMat::from_fn(errors.len(), errors.len(), |a, b| images[a].dotc(&images[b]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KlStatus {
    Exact,
    FirstOrder,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlReport {
    pub status: KlStatus,
    /// max |<0L|E_a†E_b|1L>|.
    pub off_diagonal: f64,
    /// max |<0L|E_a†E_b|0L> − <1L|E_a†E_b|1L>|.
    pub asymmetry: f64,
    /// Residual scaling exponent in κδt when checked against a channel.
    pub order: Option<f64>,
    pub residuals: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KlOrder {
    /// Use the code's own error operators.
    Algebraic,
    /// Use the Kraus operators of `channel(κδt)` with at most `max_losses`
    /// lost excitations, at each listed κδt.
    Channel { kappa_ts: Vec<f64>, max_losses: usize },
}

fn kl_residuals(code: &CodeSpec, ops: &[CMat]) -> (f64, f64) {
    let v0 = code.ket(0);
    let v1 = code.ket(1);
    let i0: Vec<CVec> = ops.iter().map(|e| e * v0).collect();
    let i1: Vec<CVec> = ops.iter().map(|e| e * v1).collect();
    let mut off = 0.0_f64;
    let mut asym = 0.0_f64;
    for a in 0..ops.len() {
        for b in 0..ops.len() {
            off = off.max(i0[a].dotc(&i1[b]).norm());
            asym = asym.max((i0[a].dotc(&i0[b]) - i1[a].dotc(&i1[b])).norm());
        }
    }
    (off, asym)
}

/// Knill-Laflamme conditions <iL|E_a†E_b|jL> = c_ab δ_ij. With a channel the
/// residual is evaluated on its truncated Kraus set and its scaling in κδt
/// fitted: exponent ≥ 1.8 means the conditions hold to that order.
pub fn knill_laflamme_check(
    code: &CodeSpec,
    order: &KlOrder,
    channel: impl Fn(f64) -> Result<LossChannel> + Sync,
) -> Result<KlReport> {
    match order {
        KlOrder::Algebraic => {
            let ops: Vec<CMat> = code.errors.iter().map(|e| e.matrix.clone()).collect();
            if ops.is_empty() {
                return Err(Error::InvalidParameter("empty error set".into()));
            }
            let (off, asym) = kl_residuals(code, &ops);
            let status = if off.max(asym) < ORTHO_TOL { KlStatus::Exact } else { KlStatus::Violated };
            Ok(KlReport { status, off_diagonal: off, asymmetry: asym, order: None, residuals: vec![] })
        }
        KlOrder::Channel { kappa_ts: kts, max_losses } => {
            if kts.len() < 2 || kts.iter().any(|&k| !(k > 0.0)) {
                return Err(Error::InvalidParameter("channel check needs >= 2 positive κδt values".into()));
            }
            let res: Vec<(f64, f64, f64)> = kts
                .par_iter()
                .map(|&k| {
                    let ch = channel(k)?;
                    let (off, asym) = kl_residuals(code, &ch.truncated(*max_losses));
                    Ok((k, off, asym))
                })
                .collect::<Result<_>>()?;
            let residuals: Vec<(f64, f64)> = res.iter().map(|&(k, o, a)| (k, o.max(a))).collect();
            let off = res.iter().map(|r| r.1).fold(0.0, f64::max);
            let asym = res.iter().map(|r| r.2).fold(0.0, f64::max);
            if residuals.iter().all(|r| r.1 < ORTHO_TOL) {
                return Ok(KlReport { status: KlStatus::Exact, off_diagonal: off, asymmetry: asym, order: None, residuals });
            }
            let xs: Vec<f64> = residuals.iter().map(|r| r.0.ln()).collect();
            let ys: Vec<f64> = residuals.iter().map(|r| r.1.max(1e-300).ln()).collect();
            let (slope, _) = linear_fit(&xs, &ys);
            let status = if slope >= 1.8 { KlStatus::FirstOrder } else { KlStatus::Violated };
            Ok(KlReport { status, off_diagonal: off, asymmetry: asym, order: Some(slope), residuals })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recovery {
    None,
    /// Polar-decomposition recovery built from the code's error set.
    OptimalFromKl,
}

/// Recovery Kraus operators mapping each orthonormalized error space back
/// onto the code space, completed to a trace-preserving map by sending the
/// remainder to |0L>.
pub fn recovery_kraus(code: &CodeSpec) -> Result<Vec<CMat>> {
    let ops: Vec<CMat> = code.errors.iter().map(|e| e.matrix.clone()).collect();
    let c = (kl_matrix(code, &ops, 0) + kl_matrix(code, &ops, 1)) * r(0.5);
    let (vals, vecs) = eigh(&c);
    let top = vals.iter().cloned().fold(0.0_f64, f64::max);
    let enc = code.encoder();
    let n = enc.nrows();
    let k = enc.ncols();
    let mut columns: Vec<CVec> = vec![];
    for (j, &v) in vals.iter().enumerate().rev() {
        if v <= 1e-9 * top {
            continue;
        }
        let f = ops.iter().enumerate().fold(CMat::zeros(n, n), |acc, (a, e)| acc + e * vecs[(a, j)]);
        let img = &f * &enc;
        for col in 0..k {
            columns.push(img.column(col).into_owned());
        }
    }
    if columns.len() > n {
        return Err(Error::InvalidParameter(format!("{}: error spaces exceed the Hilbert space", code.name)));
    }
    let m = CMat::from_columns(&columns);
    let sv = crate::linalg::singular_values(&m);
    if sv.iter().cloned().fold(f64::INFINITY, f64::min) < 1e-6 {
        return Err(Error::Singular(format!("{}: error spaces are linearly dependent; recovery undefined", code.name)));
    }
    let u = polar_unitary(&m)?;
    let mut kraus = Vec::new();
    for block in 0..columns.len() / k {
        let ub = u.columns(block * k, k).into_owned();
        kraus.push(&enc * ub.adjoint());
    }
    let covered = u.clone() * u.adjoint();
    let rest = eye(n) - covered;
    let (rv, rvecs) = eigh(&rest);
    let mut zero = CVec::zeros(n);
    zero.copy_from(&enc.column(0));
    for (j, &v) in rv.iter().enumerate() {
        if v > 0.5 {
            kraus.push(&zero * rvecs.column(j).adjoint());
        }
    }
    Ok(kraus)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryCurve {
    pub code: String,
    pub recovery: Recovery,
    pub kappa_t: Vec<f64>,
    /// 1 − average logical fidelity.
    pub infidelity: Vec<f64>,
    /// Log-log slope of the infidelity over the sampled κδt.
    pub exponent: f64,
}

/// Average fidelity of decode ∘ recovery ∘ channel ∘ encode to the identity.
pub fn logical_fidelity(code: &CodeSpec, channel: &LossChannel, recovery: Option<&[CMat]>) -> f64 {
    let enc = code.encoder();
    let d = enc.ncols() as f64;
    let ident = [eye(enc.nrows())];
    let rec: &[CMat] = recovery.unwrap_or(&ident);
    let mut fe = 0.0;
    for rk in rec {
        for ek in &channel.kraus {
            let m = enc.adjoint() * rk * ek * &enc;
            fe += trace(&m).norm_sqr();
        }
    }
    fe /= d * d;
    (d * fe + 1.0) / (d + 1.0)
}

/// Logical infidelity against κδt and its fitted power law.
pub fn recovery_benchmark(
    code: &CodeSpec,
    channel: impl Fn(f64) -> Result<LossChannel> + Sync,
    recovery: Recovery,
    kappa_ts: &[f64],
) -> Result<RecoveryCurve> {
    if kappa_ts.is_empty() {
        return Err(Error::InvalidParameter("empty κδt grid".into()));
    }
    let rec = match recovery {
        Recovery::None => None,
        Recovery::OptimalFromKl => Some(recovery_kraus(code)?),
    };
    let infidelity: Vec<f64> = kappa_ts
        .par_iter()
        .map(|&k| Ok((1.0 - logical_fidelity(code, &channel(k)?, rec.as_deref())).max(0.0)))
        .collect::<Result<_>>()?;
    let pts: Vec<(f64, f64)> =
        kappa_ts.iter().zip(&infidelity).filter(|(k, f)| **k > 0.0 && **f > 0.0).map(|(k, f)| (k.ln(), f.ln())).collect();
    let exponent = if pts.len() >= 2 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        linear_fit(&xs, &ys).0
    } else {
        f64::NAN
    };
    Ok(RecoveryCurve { code: code.name.clone(), recovery, kappa_t: kappa_ts.to_vec(), infidelity, exponent })
}

/// Log-spaced grid.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    (0..n).map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Amplitudes <n|ψ> as (re, im) pairs, for export.
pub fn fock_amplitudes(state: &QuantumState) -> Vec<(f64, f64)> {
    state.as_ket().map(|v| v.iter().map(|z| (z.re, z.im)).collect()).unwrap_or_default()
}
