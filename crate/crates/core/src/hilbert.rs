//! Truncated Fock-space operator algebra.
//!
//! Basis ordering of composite spaces is row-major in the declared
//! subsystem order: the last subsystem varies fastest.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, r, CMat, CVec, C64};

/// Default threshold on top-level population for leakage warnings.
pub const DEFAULT_LEAKAGE_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertSpace {
    dims: Vec<usize>,
}

impl HilbertSpace {
    /// Dimensions of 1 are accepted for classical ancillae.
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidDimension("at least one subsystem required".into()));
        }
        if let Some(&d) = dims.iter().find(|&&d| d == 0) {
            return Err(Error::InvalidDimension(format!("subsystem dimension {d}")));
        }
        Ok(Self { dims })
    }

    pub fn single(dim: usize) -> Result<Self> {
        Self::new(vec![dim])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn compose(&self, other: &HilbertSpace) -> HilbertSpace {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        HilbertSpace { dims }
    }

    /// Flat index of a product basis state given per-subsystem labels.
    pub fn index_of(&self, labels: &[usize]) -> Result<usize> {
        if labels.len() != self.dims.len() {
            return Err(Error::SpaceMismatch(format!(
                "{} labels for {} subsystems",
                labels.len(),
                self.dims.len()
            )));
        }
        let mut idx = 0;
        for (&l, &d) in labels.iter().zip(&self.dims) {
            if l >= d {
                return Err(Error::InvalidDimension(format!("label {l} for dimension {d}")));
            }
            idx = idx * d + l;
        }
        Ok(idx)
    }

    /// Per-subsystem labels of a flat index.
    pub fn labels_of(&self, mut index: usize) -> Vec<usize> {
        let mut labels = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            labels[k] = index % self.dims[k];
            index /= self.dims[k];
        }
        labels
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: HilbertSpace,
    matrix: CMat,
    hermitian_hint: bool,
}

impl Operator {
    pub fn new(space: HilbertSpace, matrix: CMat) -> Result<Self> {
        let n = space.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::SpaceMismatch(format!(
                "{}x{} matrix for space of dimension {n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let hermitian_hint = linalg::hermiticity_error(&matrix) < 1e-12;
        Ok(Self { space, matrix, hermitian_hint })
    }

    /// Operator on a single subsystem whose dimension is the matrix size.
    pub fn from_matrix(matrix: CMat) -> Self {
        let space = HilbertSpace { dims: vec![matrix.nrows()] };
        Self::new(space, matrix).expect("square matrix")
    }

    pub fn identity(space: &HilbertSpace) -> Self {
        let n = space.dim();
        Self { space: space.clone(), matrix: linalg::eye(n), hermitian_hint: true }
    }

    pub fn zeros(space: &HilbertSpace) -> Self {
        let n = space.dim();
        Self { space: space.clone(), matrix: CMat::zeros(n, n), hermitian_hint: true }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn hermitian_hint(&self) -> bool {
        self.hermitian_hint
    }

    pub fn dag(&self) -> Operator {
        Operator {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
            hermitian_hint: self.hermitian_hint,
        }
    }

    pub fn try_mul(&self, rhs: &Operator) -> Result<Operator> {
        self.check_same(rhs)?;
        Ok(Operator::new(self.space.clone(), &self.matrix * &rhs.matrix).expect("shape"))
    }

    pub fn try_add(&self, rhs: &Operator) -> Result<Operator> {
        self.check_same(rhs)?;
        Ok(Operator::new(self.space.clone(), &self.matrix + &rhs.matrix).expect("shape"))
    }

    pub fn commutator(&self, rhs: &Operator) -> Result<Operator> {
        self.check_same(rhs)?;
        Operator::new(self.space.clone(), linalg::commutator(&self.matrix, &rhs.matrix))
    }

    pub fn tensor(&self, rhs: &Operator) -> Operator {
        Operator {
            space: self.space.compose(&rhs.space),
            matrix: linalg::kron(&self.matrix, &rhs.matrix),
            hermitian_hint: self.hermitian_hint && rhs.hermitian_hint,
        }
    }

    /// Propagator e^{-iHt}; requires a Hermitian operator.
    pub fn propagator(&self, t: f64) -> Result<Operator> {
        if linalg::hermiticity_error(&self.matrix) > 1e-10 {
            return Err(Error::InvalidParameter("propagator needs a Hermitian generator".into()));
        }
        Operator::new(self.space.clone(), linalg::expm_hermitian(&self.matrix, t))
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if linalg::hermiticity_error(&self.matrix) > 1e-10 {
            return Err(Error::InvalidParameter("eigenvalues need a Hermitian operator".into()));
        }
        Ok(linalg::eigvalsh(&self.matrix))
    }

    fn check_same(&self, rhs: &Operator) -> Result<()> {
        if self.space != rhs.space {
            return Err(Error::SpaceMismatch(format!(
                "{:?} vs {:?}",
                self.space.dims, rhs.space.dims
            )));
        }
        Ok(())
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    /// Panics on mismatched spaces; use `try_mul` to handle that case.
    fn mul(self, rhs: &'a Operator) -> Operator {
        self.try_mul(rhs).expect("operator spaces differ")
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        self.try_add(rhs).expect("operator spaces differ")
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        self.try_add(&(-rhs)).expect("operator spaces differ")
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator {
            space: self.space.clone(),
            matrix: -&self.matrix,
            hermitian_hint: self.hermitian_hint,
        }
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, s: f64) -> Operator {
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix * r(s),
            hermitian_hint: self.hermitian_hint,
        }
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, s: C64) -> Operator {
        Operator::new(self.space.clone(), &self.matrix * s).expect("shape")
    }
}

/// Annihilation and creation operators truncated to `dim` Fock levels.
pub fn ladder_operators(dim: usize) -> Result<(Operator, Operator)> {
    if dim < 2 {
        return Err(Error::InvalidDimension(format!("ladder operators need dim >= 2, got {dim}")));
    }
    let mut a = CMat::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = r((n as f64).sqrt());
    }
    let a = Operator::from_matrix(a);
    let ad = a.dag();
    Ok((a, ad))
}

pub fn destroy(dim: usize) -> Result<Operator> {
    Ok(ladder_operators(dim)?.0)
}

pub fn number(dim: usize) -> Result<Operator> {
    if dim < 1 {
        return Err(Error::InvalidDimension("dim 0".into()));
    }
    let d: Vec<f64> = (0..dim).map(|n| n as f64).collect();
    Ok(Operator::from_matrix(linalg::diag_real(&d)))
}

/// Photon-number parity (-1)^n.
pub fn parity(dim: usize) -> Result<Operator> {
    if dim < 1 {
        return Err(Error::InvalidDimension("dim 0".into()));
    }
    let d: Vec<f64> = (0..dim).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
    Ok(Operator::from_matrix(linalg::diag_real(&d)))
}

pub fn identity(dim: usize) -> Operator {
    Operator::from_matrix(linalg::eye(dim))
}

/// Projector |i><j| on a single subsystem.
pub fn basis_op(dim: usize, i: usize, j: usize) -> Operator {
    let mut m = CMat::zeros(dim, dim);
    m[(i, j)] = r(1.0);
    Operator::from_matrix(m)
}

/// Two-level operators with index 0 = |g>, index 1 = |e>.
/// `sigma_z` = |e><e| - |g><g|, `sigma_minus` = |g><e|.
pub fn sigma_minus() -> Operator {
    basis_op(2, 0, 1)
}

pub fn sigma_plus() -> Operator {
    basis_op(2, 1, 0)
}

pub fn sigma_z() -> Operator {
    Operator::from_matrix(linalg::diag_real(&[-1.0, 1.0]))
}

pub fn sigma_x() -> Operator {
    Operator::from_matrix(CMat::from_row_slice(2, 2, &[r(0.0), r(1.0), r(1.0), r(0.0)]))
}

pub fn sigma_y() -> Operator {
    // with the |g>, |e> ordering, sigma_y = i(sigma_- - sigma_+)
    Operator::from_matrix(CMat::from_row_slice(2, 2, &[r(0.0), c(0.0, 1.0), c(0.0, -1.0), r(0.0)]))
}

/// Kronecker product in the given order.
pub fn tensor(operators: &[Operator]) -> Result<Operator> {
    let (first, rest) = operators
        .split_first()
        .ok_or_else(|| Error::Composition("empty operator list".into()))?;
    Ok(rest.iter().fold(first.clone(), |acc, op| acc.tensor(op)))
}

/// Lift a single-subsystem operator into `space` at position `index`.
pub fn embed(op: &Operator, index: usize, space: &HilbertSpace) -> Result<Operator> {
    let dims = space.dims();
    if index >= dims.len() {
        return Err(Error::IndexOutOfRange { index, len: dims.len() });
    }
    if op.dim() != dims[index] {
        return Err(Error::Composition(format!(
            "operator of dimension {} at subsystem {index} of dimension {}",
            op.dim(),
            dims[index]
        )));
    }
    let left: usize = dims[..index].iter().product();
    let right: usize = dims[index + 1..].iter().product();
    let m = linalg::kron(&linalg::kron(&linalg::eye(left), op.matrix()), &linalg::eye(right));
    Ok(Operator { space: space.clone(), matrix: m, hermitian_hint: op.hermitian_hint })
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateData {
    Ket(CVec),
    Density(CMat),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    space: HilbertSpace,
    data: StateData,
}

impl QuantumState {
    pub fn ket(space: HilbertSpace, v: CVec) -> Result<Self> {
        if v.len() != space.dim() {
            return Err(Error::SpaceMismatch(format!("ket of length {} for dim {}", v.len(), space.dim())));
        }
        let norm = v.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("ket norm {norm}")));
        }
        Ok(Self { space, data: StateData::Ket(v) })
    }

    /// Normalizes before validation.
    pub fn ket_normalized(space: HilbertSpace, v: CVec) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::ket(space, v / r(n))
    }

    pub fn density(space: HilbertSpace, m: CMat) -> Result<Self> {
        let n = space.dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::SpaceMismatch("density matrix shape".into()));
        }
        let herm = linalg::hermiticity_error(&m);
        if herm > 1e-10 {
            return Err(Error::InvalidState(format!("density matrix not Hermitian ({herm:e})")));
        }
        let tr = linalg::trace(&m).re;
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min = linalg::eigvalsh(&m).first().copied().unwrap_or(0.0);
        if min < -1e-10 {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { space, data: StateData::Density(m) })
    }

    /// Density matrix without validation; for integrator output.
    pub(crate) fn density_unchecked(space: HilbertSpace, m: CMat) -> Self {
        Self { space, data: StateData::Density(m) }
    }

    /// Product basis state with the given per-subsystem labels.
    pub fn basis(space: &HilbertSpace, labels: &[usize]) -> Result<Self> {
        let idx = space.index_of(labels)?;
        let mut v = CVec::zeros(space.dim());
        v[idx] = r(1.0);
        Ok(Self { space: space.clone(), data: StateData::Ket(v) })
    }

    pub fn fock(dim: usize, n: usize) -> Result<Self> {
        Self::basis(&HilbertSpace::single(dim)?, &[n])
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn data(&self) -> &StateData {
        &self.data
    }

    pub fn as_ket(&self) -> Option<&CVec> {
        match &self.data {
            StateData::Ket(v) => Some(v),
            StateData::Density(_) => None,
        }
    }

    pub fn density_matrix(&self) -> CMat {
        match &self.data {
            StateData::Ket(v) => v * v.adjoint(),
            StateData::Density(m) => m.clone(),
        }
    }

    pub fn to_density(&self) -> QuantumState {
        Self { space: self.space.clone(), data: StateData::Density(self.density_matrix()) }
    }

    pub fn tensor(&self, other: &QuantumState) -> QuantumState {
        let space = self.space.compose(&other.space);
        let data = match (&self.data, &other.data) {
            (StateData::Ket(a), StateData::Ket(b)) => StateData::Ket(a.kronecker(b)),
            _ => StateData::Density(linalg::kron(&self.density_matrix(), &other.density_matrix())),
        };
        Self { space, data }
    }

    /// Populations of the flat basis.
    pub fn populations(&self) -> Vec<f64> {
        match &self.data {
            StateData::Ket(v) => v.iter().map(|z| z.norm_sqr()).collect(),
            StateData::Density(m) => m.diagonal().iter().map(|z| z.re).collect(),
        }
    }

    /// Reduced populations of one subsystem.
    pub fn subsystem_populations(&self, index: usize) -> Result<Vec<f64>> {
        let dims = self.space.dims();
        if index >= dims.len() {
            return Err(Error::IndexOutOfRange { index, len: dims.len() });
        }
        let mut out = vec![0.0; dims[index]];
        for (flat, p) in self.populations().into_iter().enumerate() {
            out[self.space.labels_of(flat)[index]] += p;
        }
        Ok(out)
    }

    /// Population of the highest retained level of a subsystem.
    pub fn top_level_population(&self, index: usize) -> Result<f64> {
        Ok(*self.subsystem_populations(index)?.last().expect("nonempty"))
    }

    pub fn reduced(&self, index: usize) -> Result<QuantumState> {
        let dims = self.space.dims();
        if index >= dims.len() {
            return Err(Error::IndexOutOfRange { index, len: dims.len() });
        }
        let m = linalg::partial_trace(&self.density_matrix(), dims, index);
        Ok(Self::density_unchecked(HilbertSpace::single(dims[index])?, m))
    }

    pub fn purity(&self) -> f64 {
        match &self.data {
            StateData::Ket(_) => 1.0,
            StateData::Density(m) => linalg::trace(&(m * m)).re,
        }
    }

    /// Fidelity with a pure target, |<psi|rho|psi>|.
    pub fn fidelity_with_ket(&self, psi: &CVec) -> f64 {
        match &self.data {
            StateData::Ket(v) => psi.dotc(v).norm_sqr(),
            StateData::Density(m) => (psi.adjoint() * m * psi)[(0, 0)].re,
        }
    }
}

pub fn expectation(state: &QuantumState, op: &Operator) -> Result<C64> {
    if state.space() != op.space() {
        return Err(Error::SpaceMismatch(format!(
            "state {:?} vs operator {:?}",
            state.space().dims(),
            op.space().dims()
        )));
    }
    Ok(match state.data() {
        StateData::Ket(v) => v.dotc(&(op.matrix() * v)),
        StateData::Density(m) => linalg::trace(&(m * op.matrix())),
    })
}

/// Truncation warning emitted when the top Fock level is populated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageWarning {
    pub subsystem: usize,
    pub population: f64,
    pub threshold: f64,
    pub time: Option<f64>,
}

pub fn check_leakage(state: &QuantumState, subsystem: usize, threshold: f64) -> Result<Option<LeakageWarning>> {
    let p = state.top_level_population(subsystem)?;
    Ok((p > threshold).then_some(LeakageWarning { subsystem, population: p, threshold, time: None }))
}
