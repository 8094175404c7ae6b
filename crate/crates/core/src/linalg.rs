//! Dense complex linear algebra helpers built on nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn dag(a: &CMat) -> CMat {
    a.adjoint()
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn anticommutator(a: &CMat, b: &CMat) -> CMat {
    a * b + b * a
}

pub fn trace(a: &CMat) -> C64 {
    a.diagonal().sum()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

pub fn hermiticity_error(a: &CMat) -> f64 {
    max_abs(&(a - a.adjoint()))
}

pub fn diag_real(d: &[f64]) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(d.len(), d.iter().map(|&x| r(x))))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending,
/// eigenvectors as columns.
pub fn eigh(h: &CMat) -> (Vec<f64>, CMat) {
    let n = h.nrows();
    let sym = (h + h.adjoint()) * r(0.5);
    let eig = sym.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (col, &k) in idx.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(k));
    }
    (vals, vecs)
}

pub fn eigvalsh(h: &CMat) -> Vec<f64> {
    let sym = (h + h.adjoint()) * r(0.5);
    let mut v: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// General matrix exponential (scaling and squaring with Padé).
pub fn expm(a: &CMat) -> CMat {
    a.clone().exp()
}

/// e^{-iHt} for Hermitian H through its eigenbasis.
pub fn expm_hermitian(h: &CMat, t: f64) -> CMat {
    let (vals, vecs) = eigh(h);
    let phases: Vec<C64> = vals.iter().map(|&e| (-I * e * t).exp()).collect();
    let mut scaled = vecs.clone();
    for (j, p) in phases.iter().enumerate() {
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= *p;
        }
    }
    scaled * vecs.adjoint()
}

/// Apply a real function to a Hermitian matrix through its eigenbasis.
pub fn funm_hermitian(h: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = eigh(h);
    let mut scaled = vecs.clone();
    for (j, &v) in vals.iter().enumerate() {
        let fv = f(v);
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= fv;
        }
    }
    scaled * vecs.adjoint()
}

/// Unitary factor of the polar decomposition M = U P.
pub fn polar_unitary(m: &CMat) -> Result<CMat> {
    let svd = m.clone().svd(true, true);
    let u = svd.u.ok_or_else(|| Error::Singular("svd failed".into()))?;
    let vt = svd.v_t.ok_or_else(|| Error::Singular("svd failed".into()))?;
    Ok(u * vt)
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    m.clone().singular_values().iter().copied().collect()
}

pub fn solve(a: &CMat, b: &CVec) -> Result<CVec> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Singular("linear solve".into()))
}

pub fn is_unitary(u: &CMat, tol: f64) -> bool {
    max_abs(&(u.adjoint() * u - eye(u.nrows()))) < tol
}

/// Partial trace over all subsystems except `keep`.
pub fn partial_trace(rho: &CMat, dims: &[usize], keep: usize) -> CMat {
    let d = dims[keep];
    let left: usize = dims[..keep].iter().product();
    let right: usize = dims[keep + 1..].iter().product();
    let mut out = CMat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut s = C64::new(0.0, 0.0);
            for l in 0..left {
                for rr in 0..right {
                    let a = (l * d + i) * right + rr;
                    let b = (l * d + j) * right + rr;
                    s += rho[(a, b)];
                }
            }
            out[(i, j)] = s;
        }
    }
    out
}

/// Column-stacked vectorization, vec(AXB) = (Bᵀ ⊗ A) vec(X).
pub fn vectorize(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &CVec, n: usize) -> CMat {
    CMat::from_column_slice(n, n, v.as_slice())
}

/// Hessenberg form A = Q H Q† kept for repeated shifted solves
/// (A − zI) x = b at O(n²) cost each.
#[derive(Debug, Clone)]
pub struct ShiftedSolver {
    q: CMat,
    /// Rows of the Hessenberg matrix, stored row-major for elimination.
    h_rows: Vec<C64>,
    n: usize,
}

impl ShiftedSolver {
    pub fn new(a: &CMat) -> Self {
        let n = a.nrows();
        let (q, h) = a.clone().hessenberg().unpack();
        let mut h_rows = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in i.saturating_sub(1)..n {
                h_rows[i * n + j] = h[(i, j)];
            }
        }
        Self { q, h_rows, n }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Q† b, the right-hand side in the Hessenberg basis.
    pub fn project(&self, b: &CVec) -> CVec {
        self.q.ad_mul(b)
    }

    /// Row vector w Q, for reading out w · x from a Hessenberg-basis solution.
    pub fn project_functional(&self, w: &CVec) -> CVec {
        self.q.tr_mul(w)
    }

    /// Solves (H − zI) y = c in the Hessenberg basis.
    pub fn solve_projected(&self, z: C64, c: &CVec) -> Result<CVec> {
        let n = self.n;
        let mut m = self.h_rows.clone();
        for i in 0..n {
            m[i * n + i] -= z;
        }
        let mut y: Vec<C64> = c.iter().copied().collect();
        for k in 0..n.saturating_sub(1) {
            let (top, bottom) = m.split_at_mut((k + 1) * n);
            let row_k = &mut top[k * n..];
            let row_k1 = &mut bottom[..n];
            if row_k1[k].norm() > row_k[k].norm() {
                row_k[k..].swap_with_slice(&mut row_k1[k..]);
                y.swap(k, k + 1);
            }
            let piv = row_k[k];
            if piv.norm() == 0.0 {
                continue;
            }
            let l = row_k1[k] / piv;
            if l.norm() != 0.0 {
                for j in k..n {
                    row_k1[j] -= l * row_k[j];
                }
                let yk = y[k];
                y[k + 1] -= l * yk;
            }
        }
        for k in (0..n).rev() {
            let row = &m[k * n..(k + 1) * n];
            let mut s = y[k];
            for j in k + 1..n {
                s -= row[j] * y[j];
            }
            if row[k].norm() == 0.0 {
                return Err(Error::Singular(format!("shifted system singular at z = {z}")));
            }
            y[k] = s / row[k];
        }
        Ok(CVec::from_vec(y))
    }

    /// Solves (A − zI) x = b.
    pub fn solve(&self, z: C64, b: &CVec) -> Result<CVec> {
        Ok(&self.q * self.solve_projected(z, &self.project(b))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn random_hermitian(n: usize, seed: u64) -> CMat {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let m = CMat::from_fn(n, n, |_, _| c(next(), next()));
        (&m + m.adjoint()) * r(0.5)
    }

    #[test]
    fn eigh_reconstructs() {
        let h = random_hermitian(7, 3);
        let (vals, vecs) = eigh(&h);
        let rebuilt = &vecs * diag_real(&vals) * vecs.adjoint();
        assert!(max_abs(&(rebuilt - &h)) < 1e-12);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn hermitian_exponential_agrees_with_pade() {
        let h = random_hermitian(6, 9);
        let a = expm_hermitian(&h, 1.7);
        let b = expm(&(&h * (-I * 1.7)));
        assert!(max_abs(&(a - b)) < 1e-10);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let a = diag_real(&[0.25, 0.75]);
        let b = diag_real(&[0.5, 0.3, 0.2]);
        let rho = kron(&a, &b);
        let ra = partial_trace(&rho, &[2, 3], 0);
        let rb = partial_trace(&rho, &[2, 3], 1);
        assert!(max_abs(&(ra - a)) < 1e-15);
        assert!(max_abs(&(rb - b)) < 1e-15);
    }

    #[test]
    fn polar_factor_is_unitary() {
        let h = random_hermitian(5, 1) + CMat::from_fn(5, 5, |i, j| c(i as f64 * 0.1, j as f64 * 0.05));
        let u = polar_unitary(&h).unwrap();
        assert!(is_unitary(&u, 1e-12));
        assert_relative_eq!(trace(&(u.adjoint() * &u)).re, 5.0, epsilon = 1e-12);
    }

    #[test]
    fn vectorization_identity() {
        let a = random_hermitian(3, 4) + CMat::from_fn(3, 3, |i, j| c(0.0, (i + 2 * j) as f64));
        let b = random_hermitian(3, 5);
        let x = random_hermitian(3, 6);
        let lhs = vectorize(&(&a * &x * &b));
        let rhs = kron(&b.transpose(), &a) * vectorize(&x);
        assert!((lhs - rhs).norm() < 1e-12);
        assert_eq!(unvectorize(&vectorize(&x), 3), x);
    }

    #[test]
    fn shifted_solver_matches_lu() {
        let a = random_hermitian(12, 7) + CMat::from_fn(12, 12, |i, j| c(0.0, ((i * 7 + j * 3) % 5) as f64 * 0.1));
        let b = CVec::from_fn(12, |i, _| c(i as f64, 1.0));
        let solver = ShiftedSolver::new(&a);
        for z in [c(0.3, 0.2), c(-1.0, 0.0), c(2.0, -0.5)] {
            let x = solver.solve(z, &b).unwrap();
            let direct = solve(&(&a - eye(12) * z), &b).unwrap();
            assert!((x - direct).norm() < 1e-9);
        }
    }
}
