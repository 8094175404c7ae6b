//! Transmon-resonator Hamiltonians, exact spectra and dispersive
//! perturbation theory.
//!
//! Composite spaces are ordered (transmon, resonator).

use serde::{Deserialize, Serialize};

use crate::devices::duffing;
use crate::error::{Error, Result};
use crate::hilbert::{embed, ladder_operators, sigma_minus, sigma_z, HilbertSpace, Operator};
use crate::linalg::{self, r, CMat};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiSystem {
    pub transmon_dim: usize,
    pub resonator_dim: usize,
    pub omega_r: f64,
    pub omega_q: f64,
    /// Charging energy (anharmonicity is −EC); ignored for two levels.
    pub ec: f64,
    pub g: f64,
    pub rwa: bool,
}

impl RabiSystem {
    pub fn validate(&self) -> Result<()> {
        if self.transmon_dim < 2 || self.resonator_dim < 2 {
            return Err(Error::InvalidDimension("transmon and resonator dims must be >= 2".into()));
        }
        if self.g < 0.0 {
            return Err(Error::InvalidParameter("g must be non-negative".into()));
        }
        Ok(())
    }

    pub fn space(&self) -> HilbertSpace {
        HilbertSpace::new(vec![self.transmon_dim, self.resonator_dim]).expect("validated dims")
    }

    pub fn delta(&self) -> f64 {
        self.omega_q - self.omega_r
    }
}

/// Transmon (Duffing) coupled to a resonator mode. The non-RWA coupling is
/// −g(b†−b)(a†−a), the RWA coupling g(b†a + ba†).
pub fn rabi_hamiltonian(sys: &RabiSystem) -> Result<Operator> {
    sys.validate()?;
    let space = sys.space();
    let ec = if sys.transmon_dim == 2 { 0.0 } else { sys.ec };
    let hq = embed(&duffing(sys.omega_q, ec, sys.transmon_dim), 0, &space)?;
    let (b, bd) = ladder_operators(sys.transmon_dim)?;
    let (a, ad) = ladder_operators(sys.resonator_dim)?;
    let (b, bd) = (embed(&b, 0, &space)?, embed(&bd, 0, &space)?);
    let (a, ad) = (embed(&a, 1, &space)?, embed(&ad, 1, &space)?);
    let hr = &(&ad * &a) * sys.omega_r;
    let coupling = if sys.rwa {
        &(&(&bd * &a) + &(&b * &ad)) * sys.g
    } else {
        &(&(&bd - &b) * &(&ad - &a)) * (-sys.g)
    };
    Ok(&(&hq + &hr) + &coupling)
}

/// Two-level Jaynes-Cummings Hamiltonian ωr a†a + (ωq/2)σz + g(a†σ− + aσ+).
pub fn jc_hamiltonian(omega_r: f64, omega_q: f64, g: f64, resonator_dim: usize) -> Result<Operator> {
    let space = HilbertSpace::new(vec![2, resonator_dim])?;
    let (a, ad) = ladder_operators(resonator_dim)?;
    let (a, ad) = (embed(&a, 1, &space)?, embed(&ad, 1, &space)?);
    let sm = embed(&sigma_minus(), 0, &space)?;
    let sp = sm.dag();
    let sz = embed(&sigma_z(), 0, &space)?;
    let h = &(&(&ad * &a) * omega_r) + &(&sz * (0.5 * omega_q));
    Ok(&h + &(&(&(&ad * &sm) + &(&a * &sp)) * g))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JcDoublet {
    pub e_lower: f64,
    pub e_upper: f64,
    pub theta: f64,
}

/// Doublet of the n-excitation manifold: nωr ∓ ½√(Δ² + 4g²n).
/// Energies include the +ωr/2 offset relative to `jc_hamiltonian`.
pub fn jc_spectrum(n: usize, omega_r: f64, delta: f64, g: f64) -> Result<JcDoublet> {
    if n < 1 {
        return Err(Error::InvalidParameter("excitation number must be >= 1".into()));
    }
    let nf = n as f64;
    let root = (delta * delta + 4.0 * g * g * nf).sqrt();
    Ok(JcDoublet {
        e_lower: nf * omega_r - 0.5 * root,
        e_upper: nf * omega_r + 0.5 * root,
        theta: (2.0 * g * nf.sqrt()).atan2(delta),
    })
}

/// exp[Λ(N_T)(a†σ− − aσ+)] with Λ(N) = arctan(2λ√N)/(2√N), λ = g/Δ.
pub fn jc_diagonalizing_unitary(omega_r: f64, omega_q: f64, g: f64, resonator_dim: usize) -> Result<Operator> {
    let delta = omega_q - omega_r;
    if delta == 0.0 && g != 0.0 {
        return Err(Error::InvalidParameter("diagonalizing unitary needs nonzero detuning".into()));
    }
    let space = HilbertSpace::new(vec![2, resonator_dim])?;
    if g == 0.0 {
        return Ok(Operator::identity(&space));
    }
    let lambda = g / delta;
    let (a, ad) = ladder_operators(resonator_dim)?;
    let (a, ad) = (embed(&a, 1, &space)?, embed(&ad, 1, &space)?);
    let sm = embed(&sigma_minus(), 0, &space)?;
    let sp = sm.dag();
    let x = &(&ad * &sm) - &(&a * &sp);
    let nt = &(&ad * &a) + &(&sp * &sm);
    let lam: Vec<f64> = nt
        .matrix()
        .diagonal()
        .iter()
        .map(|z| {
            let n = z.re;
            if n < 0.5 {
                lambda
            } else {
                (2.0 * lambda * n.sqrt()).atan() / (2.0 * n.sqrt())
            }
        })
        .collect();
    let gen = linalg::diag_real(&lam) * x.matrix();
    Operator::new(space, linalg::expm(&gen))
}

/// Closed form of U†H_JC U: ωr a†a + (ωq/2)σz − (Δ/2)(1 − √(1+4λ²N_T))σz.
pub fn jc_diagonal_form(omega_r: f64, omega_q: f64, g: f64, resonator_dim: usize) -> Result<Operator> {
    let delta = omega_q - omega_r;
    let space = HilbertSpace::new(vec![2, resonator_dim])?;
    let lambda = if delta == 0.0 { 0.0 } else { g / delta };
    let d: Vec<f64> = (0..space.dim())
        .map(|k| {
            let l = space.labels_of(k);
            let (q, n) = (l[0] as f64, l[1] as f64);
            let sz = 2.0 * q - 1.0;
            let nt = n + q;
            omega_r * n + 0.5 * omega_q * sz - 0.5 * delta * (1.0 - (1.0 + 4.0 * lambda * lambda * nt).sqrt()) * sz
        })
        .collect();
    Operator::new(space, linalg::diag_real(&d))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersiveParams {
    pub delta: f64,
    pub lambda: f64,
    /// Two-level-projected dispersive shift −g²EC/(Δ(Δ−EC)).
    pub chi: f64,
    /// χ_{j−1,j} for j = 1..=levels (index 0 holds j = 1).
    pub chi_transitions: Vec<f64>,
    pub lambda_j: Vec<f64>,
    pub chi_j: Vec<f64>,
    pub omega_r_dressed: f64,
    pub omega_q_dressed: f64,
    pub k_a: f64,
    pub k_b: f64,
    pub chi_ab: f64,
    pub n_crit: Vec<f64>,
}

fn check_straddling(delta: f64, ec: f64) -> Result<()> {
    if delta == 0.0 {
        return Err(Error::InvalidParameter("resonant (delta = 0)".into()));
    }
    if delta > 0.0 && delta < ec {
        return Err(Error::Straddling(format!("delta = {delta:e}, EC = {ec:e}")));
    }
    if (delta - ec).abs() < 1e-12 * ec.abs().max(1.0) {
        return Err(Error::Resonance { i: 1, j: 2 });
    }
    Ok(())
}

/// Number of transmon levels tracked by `dispersive_params_sw`.
pub const DISPERSIVE_LEVELS: usize = 4;

/// Dispersive parameters of a transmon (EJ, EC) coupled with strength g at
/// detuning Δ = ωq − ωr, with ωq = √(8EJEC) − EC.
pub fn dispersive_params_sw(ej: f64, ec: f64, g: f64, delta: f64) -> Result<DispersiveParams> {
    check_straddling(delta, ec)?;
    let levels = DISPERSIVE_LEVELS;
    let omega_q = (8.0 * ej * ec).sqrt() - ec;
    let omega_r = omega_q - delta;
    let chi_tr = |j: usize| -> Result<f64> {
        if j == 0 {
            return Ok(0.0);
        }
        let den = delta - (j as f64 - 1.0) * ec;
        if den.abs() < 1e-12 * delta.abs() {
            return Err(Error::Resonance { i: j - 1, j });
        }
        Ok(j as f64 * g * g / den)
    };
    let mut chi_transitions = Vec::with_capacity(levels);
    let mut lambda_j = Vec::with_capacity(levels);
    let mut chi_j = Vec::with_capacity(levels);
    for j in 0..levels {
        chi_transitions.push(chi_tr(j + 1)?);
        lambda_j.push(chi_tr(j)?);
        chi_j.push(chi_tr(j)? - chi_tr(j + 1)?);
    }
    let chi = -g * g * ec / (delta * (delta - ec));
    let n_crit = (0..levels)
        .map(|j| {
            let jf = j as f64;
            ((delta - jf * ec).powi(2) / (4.0 * g * g) - jf) / (2.0 * jf + 1.0)
        })
        .collect();
    let (k_a, k_b, chi_ab) = kerr_params(ej, ec, g, delta)?;
    Ok(DispersiveParams {
        delta,
        lambda: g / delta,
        chi,
        chi_transitions,
        lambda_j,
        chi_j,
        omega_r_dressed: omega_r - g * g / (delta - ec),
        omega_q_dressed: omega_q + g * g / delta,
        k_a,
        k_b,
        chi_ab,
        n_crit,
    })
}

/// Self-Kerr of resonator and transmon plus cross-Kerr of the normal modes.
pub fn kerr_params(_ej: f64, ec: f64, g: f64, delta: f64) -> Result<(f64, f64, f64)> {
    check_straddling(delta, ec)?;
    let k_a = -0.5 * ec * (g / delta).powi(4);
    let k_b = -ec;
    let chi_ab = -2.0 * g * g * ec / (delta * (delta - ec));
    Ok((k_a, k_b, chi_ab))
}

/// Normal modes of the linear part; returns (ω̃r, ω̃q, Λ).
pub fn bogoliubov_dressed(omega_r: f64, omega_q: f64, g: f64) -> (f64, f64, f64) {
    let delta = omega_q - omega_r;
    let s = if delta < 0.0 { -1.0 } else { 1.0 };
    let root = (delta * delta + 4.0 * g * g).sqrt();
    let wr = 0.5 * (omega_r + omega_q - s * root);
    let wq = 0.5 * (omega_r + omega_q + s * root);
    let angle = if delta == 0.0 { s * std::f64::consts::FRAC_PI_4 } else { 0.5 * (2.0 * g / delta).atan() };
    (wr, wq, angle)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultilevelAtom {
    pub level_energies: Vec<f64>,
    /// g_ij; Hermitian for a Hermitian coupling operator.
    pub coupling: CMat,
}

impl MultilevelAtom {
    /// Transmon ladder ωj = jωq − EC j(j−1)/2 with g_{j,j+1} = g√(j+1).
    pub fn transmon_ladder(omega_q: f64, ec: f64, g: f64, levels: usize) -> Self {
        let level_energies = (0..levels)
            .map(|j| {
                let j = j as f64;
                j * omega_q - 0.5 * ec * j * (j - 1.0)
            })
            .collect();
        let coupling = CMat::from_fn(levels, levels, |i, j| {
            if j == i + 1 || i == j + 1 {
                r(g * (i.max(j) as f64).sqrt())
            } else {
                r(0.0)
            }
        });
        Self { level_energies, coupling }
    }
}

/// Second-order level shifts Λj and dispersive shifts χj of a multilevel
/// atom. With `rwa`, only excitation-conserving terms are kept (i < j in
/// the first sum, i > j in the second), which reproduces the transmon
/// ladder results of `dispersive_params_sw` exactly.
pub fn multilevel_dispersive(atom: &MultilevelAtom, omega_r: f64, rwa: bool) -> Result<(Vec<f64>, Vec<f64>)> {
    let w = &atom.level_energies;
    let n = w.len();
    if atom.coupling.nrows() != n || atom.coupling.ncols() != n {
        return Err(Error::InvalidDimension("coupling matrix shape".into()));
    }
    let scale = w.iter().fold(omega_r.abs(), |m, x| m.max(x.abs())).max(1.0);
    let mut lam = vec![0.0; n];
    let mut chi = vec![0.0; n];
    for j in 0..n {
        for i in 0..n {
            let g2 = atom.coupling[(i, j)].norm_sqr();
            if g2 == 0.0 {
                continue;
            }
            let d1 = w[j] - w[i] - omega_r;
            let d2 = w[i] - w[j] - omega_r;
            let keep1 = !rwa || w[i] < w[j];
            let keep2 = !rwa || w[i] > w[j];
            if keep1 {
                if d1.abs() < 1e-12 * scale {
                    return Err(Error::Resonance { i, j });
                }
                lam[j] += g2 / d1;
                chi[j] += g2 / d1;
            }
            if keep2 {
                if d2.abs() < 1e-12 * scale {
                    return Err(Error::Resonance { i, j });
                }
                chi[j] -= g2 / d2;
            }
        }
    }
    Ok((lam, chi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwResult {
    /// First-order generator S, with H_eff = e^{S} H e^{−S}.
    pub generator: CMat,
    /// Block-diagonal effective Hamiltonian to second order.
    pub h_eff: CMat,
    /// Set when 2·max|V_offdiag| is not small against the minimum gap.
    pub weak_coupling_violated: bool,
}

/// Second-order Schrieffer-Wolff transformation.
///
/// `energies` are the eigenvalues of H0, `basis` its eigenvectors (columns)
/// and `labels[k]` the subspace of eigenvector k. `v` is given in the
/// original basis; results are expressed in the H0 eigenbasis.
pub fn schrieffer_wolff_order2(energies: &[f64], basis: &CMat, v: &CMat, labels: &[usize]) -> Result<SwResult> {
    let n = energies.len();
    if basis.nrows() != n || basis.ncols() != n || v.nrows() != n || v.ncols() != n || labels.len() != n {
        return Err(Error::InvalidDimension("inconsistent Schrieffer-Wolff inputs".into()));
    }
    let vt = basis.adjoint() * v * basis;
    let scale = energies.iter().fold(0.0_f64, |m, e| m.max(e.abs())).max(linalg::max_abs(&vt)).max(1e-300);
    let mut s = CMat::zeros(n, n);
    let mut vmax = 0.0_f64;
    let mut gap = f64::INFINITY;
    for m in 0..n {
        for l in 0..n {
            if labels[m] == labels[l] {
                continue;
            }
            let de = energies[m] - energies[l];
            if vt[(m, l)].norm() > 0.0 {
                if de.abs() <= 1e-12 * scale {
                    return Err(Error::Degeneracy(format!("states {m} and {l}")));
                }
                s[(m, l)] = vt[(m, l)] / de;
                vmax = vmax.max(vt[(m, l)].norm());
            }
            gap = gap.min(de.abs());
        }
    }
    let mut h = CMat::zeros(n, n);
    for m in 0..n {
        for mp in 0..n {
            if labels[m] != labels[mp] {
                continue;
            }
            let mut z = vt[(m, mp)];
            if m == mp {
                z += energies[m];
            }
            for l in 0..n {
                if labels[l] == labels[m] {
                    continue;
                }
                let prod = vt[(m, l)] * vt[(l, mp)];
                if prod.norm() == 0.0 {
                    continue;
                }
                z += prod * 0.5 * (1.0 / (energies[m] - energies[l]) + 1.0 / (energies[mp] - energies[l]));
            }
            h[(m, mp)] = z;
        }
    }
    Ok(SwResult { generator: s, h_eff: h, weak_coupling_violated: 2.0 * vmax >= gap })
}

/// Eigen-energies indexed by the bare product state they overlap most with.
/// Assignment is greedy on overlap; ties resolve to the lower energy.
pub fn dressed_energies(h: &Operator) -> Result<Vec<f64>> {
    let (vals, vecs) = linalg::eigh(h.matrix());
    let n = vals.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for k in 0..n {
        for b in 0..n {
            pairs.push((vecs[(b, k)].norm_sqr(), b, k));
        }
    }
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.2.cmp(&y.2)));
    let mut out = vec![f64::NAN; n];
    let mut used_b = vec![false; n];
    let mut used_k = vec![false; n];
    for (_, b, k) in pairs {
        if !used_b[b] && !used_k[k] {
            used_b[b] = true;
            used_k[k] = true;
            out[b] = vals[k];
        }
    }
    Ok(out)
}

/// χ from the four lowest dressed levels: (E_e1 − E_e0 − E_g1 + E_g0)/2.
pub fn chi_exact(sys: &RabiSystem) -> Result<f64> {
    let h = rabi_hamiltonian(sys)?;
    let e = dressed_energies(&h)?;
    let sp = sys.space();
    let idx = |q, n| sp.index_of(&[q, n]);
    Ok(0.5 * (e[idx(1, 1)?] - e[idx(1, 0)?] - e[idx(0, 1)?] + e[idx(0, 0)?]))
}

/// Dressed qubit frequency E_e0 − E_g0.
pub fn dressed_qubit_frequency(sys: &RabiSystem) -> Result<f64> {
    let h = rabi_hamiltonian(sys)?;
    let e = dressed_energies(&h)?;
    let sp = sys.space();
    Ok(e[sp.index_of(&[1, 0])?] - e[sp.index_of(&[0, 0])?])
}
