//! Scenario runners. Each takes a resolved config and returns tables and a
//! report; nothing here writes to disk.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use cqed_core::codes::{
    amplitude_damping_kraus, binomial_code, cat_code, four_qubit_code, knill_laflamme_check, recovery_benchmark,
    trivial_code, CodeSpec, KlOrder, LossChannel, Recovery,
};
use cqed_core::coupling::{dressed_energies, rabi_hamiltonian, RabiSystem};
use cqed_core::devices::{charge_dispersion, transmon_levels, TransmonParams};
use cqed_core::dynamics::{
    evolve_with, number_split_weights, poisson_goodness, qubit_lineshape, qubit_lineshape_fwhm, transmission_sweep,
    two_tone_ac_stark, AcStarkSystem, EvolveOptions, LineshapeMethod, StarkMethod, TransmissionMethod,
    TransmissionSystem,
};
use cqed_core::gates::{
    cross_resonance_effective, cross_resonance_numeric, cz_11_02, drag_envelope, iswap_gate, mediated_j,
    parametric_sideband, single_qubit_gate, Coupling, CzOptions, CzProtocol, Transmon, TwoQubitSystem,
};
use cqed_core::hilbert::{embed, ladder_operators, sigma_minus, HilbertSpace, QuantumState};
use cqed_core::linalg::CMat;
use cqed_core::numeric::{golden_max, linear_fit, local_maxima};
use cqed_core::ode::OdeOptions;
use cqed_core::phasespace::{
    quadrature_variance, squeezed_vacuum, squeezed_vacuum_variance, squeezing_level_db, wigner, PhaseSpaceGrid,
    PhaseSpaceFunction, SqueezeParams,
};
use cqed_core::readout::{
    measurement_fidelity, pointer_evolution, simulate_readout, snr, Heterodyne, PointerTrajectory, Weights,
};

use crate::config::Resolved;
use crate::error::{CliError, Context};
use crate::output::{ScenarioOutput, Table};

const TWO_PI: f64 = 2.0 * PI;

fn hz(w: f64) -> f64 {
    w / TWO_PI
}

pub fn run_scenario(cfg: &Resolved) -> Result<ScenarioOutput, CliError> {
    match cfg.scenario.as_str() {
        "fig5" => fig5(cfg),
        "fig7" => fig7(cfg),
        "fig8" => fig8(cfg),
        "fig9" => fig9(cfg),
        "fig11" => fig11(cfg),
        "fig12" => fig12(cfg),
        "fig13" => fig13(cfg),
        "fig17" => fig17(cfg),
        "fig18" => fig18(cfg),
        "gates" => gates(cfg),
        "codes" => codes(cfg),
        other => Err(CliError::unknown_scenario(other)),
    }
}

fn fig5(cfg: &Resolved) -> Result<ScenarioOutput, CliError> {
    let wp = cfg.omega("plasma_hz")?;
    let levels = cfg.count("levels")?;
    let ncut = cfg.dim("ncut")?;
    let ngs = cfg.sweep_values()?;
    let mut out = ScenarioOutput::default();
    let mut table = Table::new("levels", &["ej_over_ec", "ng", "level", "frequency_hz"]);
    let mut dispersion = serde_json::Map::new();
    for ratio in cfg.list("ej_over_ec")? {
        if !(ratio > 0.0) {
            return Err(CliError::validation(format!("EJ/EC must be > 0, got {ratio}")));
        }
        let ec = wp / (8.0 * ratio).sqrt();
        let base = TransmonParams::new(ratio * ec, ec);
        let rows: Vec<Vec<f64>> = ngs
            .par_iter()
            .map(|&ng| transmon_levels(&base.with_ng(ng), ncut, levels, 1e-9))
            .collect::<cqed_core::Result<_>>()
            .within("devices")?;
        for (ng, e) in ngs.iter().zip(rows) {
            for (j, ej) in e.iter().enumerate().skip(1) {
                table.push(vec![ratio, *ng, j as f64, hz(ej - e[0])]);
            }
        }
        let d = charge_dispersion(&base, 101).within("devices")?;
        dispersion.insert(format!("{ratio}"), json!(hz(d)));
    }
    out.tables.push(table);
    out.note("charge_dispersion_hz", dispersion);
    Ok(out)
}

fn readout_trajectory(eps: f64, chi: f64, kappa: f64, tau: f64, points: usize) -> cqed_core::Result<PointerTrajectory> {
    let times: Vec<f64> = (0..points).map(|i| tau * i as f64 / (points - 1) as f64).collect();
    pointer_evolution(move |_| eps, 0.0, chi, kappa, &times)
}

fn fig7(cfg: &Resolved) -> Result<ScenarioOutput, CliError> {
    let kappa = cfg.omega("kappa_hz")?;
    let photons = cfg.positive("photons")?;
    let eta = cfg.positive("eta")?;
    let points = cfg.count("trajectory_points")?.max(2);
    let shots = cfg.count("shots")?;
    let bins = cfg.count("bins")?;
    let taus = cfg.list("tau_kappa")?;
    // One steady photon per `photons` at δr = 0 and χ = κ/2.
    let eps = (photons * (kappa * kappa / 2.0)).sqrt();
    let xs = cfg.sweep_values()?;
    let snr_at = |x: f64, tk: f64| -> cqed_core::Result<f64> {
        let traj = readout_trajectory(eps, 0.5 * x * kappa, kappa, tk / kappa, points)?;
        snr(&traj, eta, tk / kappa, &Weights::Separation)
    };
    let mut out = ScenarioOutput::default();
    let mut table = Table::new("snr", &["two_chi_over_kappa", "tau_kappa", "snr", "fidelity_gaussian"]);
    let mut optima = serde_json::Map::new();
    for &tk in &taus {
        if !(tk > 0.0) {
            return Err(CliError::validation(format!("τκ must be > 0, got {tk}")));
        }
        let vals: Vec<f64> =
            xs.par_iter().map(|&x| snr_at(x, tk)).collect::<cqed_core::Result<_>>().within("readout")?;
        for (x, s) in xs.iter().zip(&vals) {
            table.push(vec![*x, tk, *s, measurement_fidelity(*s)]);
        }
        if xs.len() >= 3 {
            let (k, _) = vals.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty sweep");
            let lo = xs[k.saturating_sub(1)];
            let hi = xs[(k + 1).min(xs.len() - 1)];
            let best = golden_max(|x| snr_at(x, tk).unwrap_or(f64::NEG_INFINITY), lo, hi, 1e-4);
            optima.insert(format!("{tk}"), json!(best));
        }
    }
    out.tables.push(table);
    out.note("steady_photons_at_unit_ratio", photons);
    out.note("epsilon_hz", hz(eps));
    out.note("optimal_two_chi_over_kappa", optima);

    let tk = taus.iter().cloned().fold(f64::INFINITY, f64::min);
    let traj = readout_trajectory(eps, 0.5 * kappa, kappa, tk / kappa, points).within("readout")?;
    let mut pointers = Table::new("pointers", &["t_s", "re_alpha_g", "im_alpha_g", "re_alpha_e", "im_alpha_e"]);
    for k in 0..traj.times.len() {
        let (g, e) = (traj.alpha_g[k], traj.alpha_e[k]);
        pointers.push(vec![traj.times[k], g.re, g.im, e.re, e.im]);
    }
    out.tables.push(pointers);
    let res = simulate_readout(&traj, &Heterodyne::ideal(eta), &Weights::Separation, shots, cfg.seed, bins)
        .within("readout")?;
    let mut hist = Table::new("histogram", &["edge_lo", "edge_hi", "counts_g", "counts_e"]);
    for b in 0..res.histogram.counts_g.len() {
        let h = &res.histogram;
        hist.push(vec![h.edges[b], h.edges[b + 1], h.counts_g[b] as f64, h.counts_e[b] as f64]);
    }
    out.tables.push(hist);
    out.note(
        "monte_carlo",
        json!({
            "tau_kappa": tk, "shots": shots, "snr": res.snr, "fidelity": res.fidelity,
            "fidelity_gaussian": res.fidelity_gaussian, "beta_m": res.beta_m,
        }),
    );
    Ok(out)
}

fn triple(cfg: &Resolved, key: &str) -> Result<[f64; 3], CliError> {
    let v = cfg.omegas(key)?;
    if v.len() != 3 || v.iter().any(|x| *x < 0.0) {
        return Err(CliError::validation(format!("`{key}` must be three non-negative rates (κ, γ1, g)")));
    }
    Ok([v[0], v[1], v[2]])
}

fn fig8(cfg: &Resolved) -> Result<ScenarioOutput, CliError> {
    let nth = cfg.value("n_thermal")?;
    let probe = cfg.positive("probe_fraction")?;
    let weak = cfg.positive("window_weak_s")?;
    let strong = cfg.positive("window_strong_s")?;
    let points = cfg.count("time_points")?.max(2);
    let dim = cfg.dim("resonator")?;
    let dim_thermal = cfg.dim("resonator_thermal")?;
    let scan = cfg.sweep_values()?;
    let ode = OdeOptions { rtol: cfg.tolerances.rtol, atol: cfg.tolerances.atol, ..Default::default() };

    // (name, rates, scale index into (κ, γ1, g), thermal photons, window, dim)
    let panels = [
        ("bad_cavity", triple(cfg, "bad_cavity_hz")?, 0, 0.0, weak, dim),
        ("bad_qubit", triple(cfg, "bad_qubit_hz")?, 1, 0.0, weak, dim),
        ("strong", triple(cfg, "strong_hz")?, 2, 0.0, strong, dim),
        ("strong_lossy", triple(cfg, "strong_lossy_hz")?, 2, 0.0, strong, dim),
        ("strong_thermal", triple(cfg, "strong_hz")?, 2, nth, strong, dim_thermal),
    ];
    let mut out = ScenarioOutput::default();
    let mut spectra = Table::new("transmission", &["panel", "probe_detuning_hz", "magnitude", "phase"]);
    let mut traces = Table::new("time", &["panel", "t_s", "p_e", "photons"]);
    let mut report = serde_json::Map::new();
    for (id, (name, [kappa, gamma1, g], scale_idx, n_th, window, d)) in panels.iter().enumerate() {
        let sys = TransmissionSystem {
            omega_r: 0.0,
            omega_q: 0.0,
            g: *g,
            kappa: *kappa,
            gamma1: *gamma1,
            gamma_phi: 0.0,
            n_thermal: *n_th,
        };
        let scale = [*kappa, *gamma1, *g][*scale_idx];
        if !(scale > 0.0) {
            return Err(CliError::validation(format!("panel {name}: its frequency scale must be > 0")));
        }
        let freqs: Vec<f64> = scan.iter().map(|s| s * scale).collect();
        let weakest = [*kappa, *gamma1, *g].into_iter().filter(|r| *r > 0.0).fold(f64::INFINITY, f64::min);
        let pts = transmission_sweep(&sys, &freqs, probe * weakest, TransmissionMethod::LinearResponse { resonator_dim: *d })
            .within("dynamics")?;
        for p in &pts {
            spectra.push(vec![id as f64, hz(p.omega), p.magnitude, p.phase]);
        }
        let mags: Vec<f64> = pts.iter().map(|p| p.magnitude).collect();
        let peaks: Vec<f64> = local_maxima(&freqs, &mags).into_iter().map(|(w, _)| hz(w)).collect();

        let model = sys.model(0.0, 0.0, *d).within("dynamics")?;
        let space = model.space().clone();
        let pe = embed(&(&sigma_minus().dag() * &sigma_minus()), 0, &space).within("hilbert")?;
        let (a, ad) = ladder_operators(*d).within("hilbert")?;
        let n = embed(&(&ad * &a), 1, &space).within("hilbert")?;
        let rho0 = QuantumState::basis(&space, &[1, 0]).within("hilbert")?;
        let times: Vec<f64> = (0..points).map(|i| window * i as f64 / (points - 1) as f64).collect();
        let opts = EvolveOptions { ode, ..EvolveOptions::observing(vec![pe, n]) };
        let res = evolve_with(&model, &rho0, &times, &opts).within("dynamics")?;
        let (p, nn) = (res.expectation_real(0), res.expectation_real(1));
        for k in 0..times.len() {
            traces.push(vec![id as f64, times[k], p[k], nn[k]]);
        }
        for w in &res.leakage_warnings {
            out.warn(format!("{name}: truncation leakage {:.2e} (threshold {:.0e})", w.population, w.threshold));
        }
        report.insert(
            (*name).into(),
            json!({
                "panel": id, "kappa_hz": hz(*kappa), "gamma1_hz": hz(*gamma1), "g_hz": hz(*g),
                "n_thermal": n_th, "transmission_peaks_hz": peaks,
            }),
        );
    }
    out.tables.push(spectra);
    out.tables.push(traces);
    out.report.extend(report);
    Ok(out)
}

/// Fixed qubit (caption qubit 1) and swept qubit (caption qubit 2) on a bus.
pub struct BusModel {
    pub omega_fixed: f64,
    pub anharm_fixed: f64,
    pub anharm_swept: f64,
    pub omega_swept_max: f64,
    pub g_fixed: f64,
    pub g_swept: f64,
    pub omega_r: f64,
    pub levels: usize,
    pub resonator: usize,
}

impl BusModel {
    pub fn from_config(cfg: &Resolved) -> Result<Self, CliError> {
        let ncut = cfg.dim("ncut")?;
        let q = |ej: &str, ec: &str| -> Result<(f64, f64), CliError> {
            let p = TransmonParams::new(cfg.omega(ej)?, cfg.omega(ec)?);
            let e = transmon_levels(&p, ncut, 3, 1e-9).within("devices")?;
            Ok((e[1] - e[0], (e[2] - e[1]) - (e[1] - e[0])))
        };
        let (w1, a1) = q("ej1_hz", "ec1_hz")?;
        let (w2, a2) = q("ej2_hz", "ec2_hz")?;
        Ok(Self {
            omega_fixed: w1,
            anharm_fixed: a1,
            anharm_swept: a2,
            omega_swept_max: w2,
            g_fixed: cfg.omega("g1_hz")?,
            g_swept: cfg.omega("g2_hz")?,
            omega_r: cfg.omega("omega_r_hz")?,
            levels: cfg.dim("transmon")?,
            resonator: cfg.dim("resonator")?,
        })
    }

    /// System with the swept qubit first, as `TwoQubitSystem` sweeps q1.
    pub fn system(&self, omega_swept: f64, coupled: bool) -> TwoQubitSystem {
        let s = if coupled { 1.0 } else { 0.0 };
        TwoQubitSystem {
            q1: Transmon { omega_q: omega_swept, ec: -self.anharm_swept },
            q2: Transmon { omega_q: self.omega_fixed, ec: -self.anharm_fixed },
            coupling: Coupling::Resonator {
                g1: s * self.g_swept,
                g2: s * self.g_fixed,
                omega_r: self.omega_r,
                levels: self.resonator,
            },
            levels: self.levels,
        }
    }

    /// Minimum gap of the pair of manifold-`k` levels that are degenerate
    /// at `omega_star` without coupling. Returns (ω, gap).
    pub fn anticrossing(&self, k: usize, omega_star: f64, energy_star: f64, half: f64) -> cqed_core::Result<(f64, f64)> {
        let bare = self.system(omega_star, false).manifold_energies(k)?;
        let tol = 1e-3 * half;
        let lower = bare.iter().filter(|&&e| e < energy_star - tol).count();
        self.system(omega_star, true).anticrossing(k, lower, (omega_star - half, omega_star + half))
    }
}

fn fig9(cfg: &Resolved) -> Result<ScenarioOutput, CliError> {
    let m = BusModel::from_config(cfg)?;
    let ws: Vec<f64> = cfg.sweep_values()?.into_iter().map(|f| TWO_PI * f).collect();
    let mut out = ScenarioOutput::default();
    if ws.iter().any(|&w| w > m.omega_swept_max) {
        out.warn(format!(
            "sweep exceeds qubit 2's maximum frequency {:.4e} Hz from its EJ and EC",
            hz(m.omega_swept_max)
        ));
    }
    for k in [1usize, 2] {
        let rows: Vec<Vec<f64>> = ws
            .par_iter()
            .map(|&w| m.system(w, true).manifold_energies(k))
            .collect::<cqed_core::Result<_>>()
            .within("gates")?;
        let n = rows.first().map_or(0, Vec::len);
        let mut cols = vec!["omega_q2_hz".to_string()];
        cols.extend((0..n).map(|i| format!("e{i}_hz")));
        let mut t = Table::with_columns(&format!("manifold{k}"), cols);
        for (w, e) in ws.iter().zip(rows) {
            let mut row = vec![hz(*w)];
            row.extend(e.iter().map(|x| hz(*x)));
            t.push(row);
        }
        out.tables.push(t);
    }
    let w1 = m.omega_fixed;
    let half = TWO_PI * 0.25e9;
    let (wq, gap) = m.anticrossing(1, w1, w1, half).within("gates")?;
    let j = mediated_j(m.g_swept, m.g_fixed, wq - m.omega_r, w1 - m.omega_r).within("gates")?;
    // |1,1> meets |1st, 2nd doubly excited> where ω2 = ω1 − α2.
    let w02 = w1 - m.anharm_swept;
    let (w02_min, gap02) = m.anticrossing(2, w02, w02 + w1, half).within("gates")?;
    let w20 = w1 + m.anharm_fixed;
    let (w20_min, gap20) = m.anticrossing(2, w20, w20 + w1, half).within("gates")?;
    out.note("qubit1_omega01_hz", hz(w1));
    out.note("qubit1_anharmonicity_hz", hz(m.anharm_fixed));
    out.note("qubit2_anharmonicity_hz", hz(m.anharm_swept));
    out.note("qubit2_max_omega01_hz", hz(m.omega_swept_max));
    out.note("anticrossing_qubit_qubit", json!({ "omega_q2_hz": hz(wq), "gap_hz": hz(gap), "two_j_formula_hz": hz(2.0 * j.abs()) }));
    out.note("anticrossing_11_02", json!({ "omega_q2_hz": hz(w02_min), "gap_hz": hz(gap02) }));
    out.note("anticrossing_11_20", json!({ "omega_q2_hz": hz(w20_min), "gap_hz": hz(gap20) }));
    Ok(out)
}

fn fig11(cfg: &Resolved) -> Result<ScenarioOutput, CliError> {
    let g1 = cfg.omega("gamma1_hz")?;
    let gp = cfg.omega("gamma_phi_hz")?;
    let d: Vec<f64> = cfg.sweep_values()?.into_iter().map(|f| TWO_PI * f).collect();
    let mut out = ScenarioOutput::default();
    let mut t = Table::new("lineshape", &["omega_rabi_hz", "detuning_hz", "p_e_master", "p_e_formula"]);
    let mut widths = serde_json::Map::new();
    for om in cfg.omegas("omega_rabi_hz")? {
        let me = qubit_lineshape(om, g1, gp, &d, LineshapeMethod::MasterEquation).within("dynamics")?;
        let fo = qubit_lineshape(om, g1, gp, &d, LineshapeMethod::Formula).within("dynamics")?;
        for k in 0..d.len() {
            t.push(vec![hz(om), hz(d[k]), me[k], fo[k]]);
        }
        widths.insert(format!("{}", hz(om)), json!(hz(qubit_lineshape_fwhm(om, g1, gp))));
    }
    out.tables.push(t);
    out.note("fwhm_hz", widths);
    Ok(out)
}

fn fig12(cfg: &Resolved) -> Result<ScenarioOutput, CliError> {
    let kappa = cfg.omega("kappa_hz")?;
    let gamma1 = cfg.omega("gamma1_hz")?;
    let rabi = cfg.omega("omega_rabi_hz")?;
    let range = cfg.omegas("detuning_a_hz")?;
    if range.len() != 2 {
        return Err(CliError::validation("`detuning_a_hz` must be [start, stop]"));
    }
    let na = cfg.count("detuning_a_points")?.max(2);
    let da: Vec<f64> = (0..na).map(|i| range[0] + (range[1] - range[0]) * i as f64 / (na - 1) as f64).collect();
    let chi_a = cfg.omega("chi_a_hz")?;
    let mut out = ScenarioOutput::default();
    let mut ta = Table::new("panel_a", &["epsilon_hz", "detuning_hz", "p_e"]);
    let mut peaks_a = Vec::new();
    for eps in cfg.omegas("epsilon_a_hz")? {
        let sys = AcStarkSystem { chi: chi_a, kappa, gamma1, gamma_phi: 0.0, delta_r: 0.0, epsilon: eps, omega_rabi: rabi };
        let dim = sys.default_resonator_dim();
        let w = two_tone_ac_stark(&sys, &da, StarkMethod::LinearResponse { resonator_dim: dim }).within("dynamics")?;
        for k in 0..da.len() {
            ta.push(vec![hz(eps), hz(da[k]), w[k]]);
        }
        let nbar = sys.pointer_amplitudes().0.norm_sqr();
        let peak = local_maxima(&da, &w).into_iter().max_by(|a, b| a.1.total_cmp(&b.1)).map(|p| hz(p.0));
        peaks_a.push(json!({
            "epsilon_hz": hz(eps), "n_bar": nbar, "resonator_dim": dim,
            "peak_hz": peak, "predicted_shift_hz": hz(2.0 * chi_a * nbar),
        }));
    }
    out.tables.push(ta);
    out.note("panel_a", peaks_a);

    let chi_b = cfg.omega("chi_b_hz")?;
    let sys = AcStarkSystem {
        chi: chi_b,
        kappa,
        gamma1,
        gamma_phi: 0.0,
        delta_r: chi_b,
        epsilon: cfg.omega("epsilon_b_hz")?,
        omega_rabi: rabi,
    };
    let db: Vec<f64> = cfg.sweep_values()?.into_iter().map(|f| TWO_PI * f).collect();
    let dim = sys.default_resonator_dim();
    let w = two_tone_ac_stark(&sys, &db, StarkMethod::LinearResponse { resonator_dim: dim }).within("dynamics")?;
    let mut tb = Table::new("panel_b", &["detuning_hz", "p_e"]);
    for k in 0..db.len() {
        tb.push(vec![hz(db[k]), w[k]]);
    }
    out.tables.push(tb);
    let peaks: Vec<f64> = local_maxima(&db, &w).into_iter().map(|p| p.0).collect();
    let spacing = if peaks.len() >= 2 {
        let idx: Vec<f64> = (0..peaks.len()).map(|i| i as f64).collect();
        Some(hz(linear_fit(&idx, &peaks).0))
    } else {
        None
    };
    let weights = number_split_weights(&db, &w, chi_b, cfg.count("peaks_b")?);
    let fit = poisson_goodness(&weights, cfg.positive("pseudo_counts")?).within("dynamics")?;
    out.note(
        "panel_b",
        json!({
            "resonator_dim": dim, "peaks_hz": peaks.iter().map(|p| hz(*p)).collect::<Vec<_>>(),
            "peak_spacing_hz": spacing, "predicted_spacing_hz": hz(2.0 * chi_b),
            "weights": weights, "poisson": fit,
        }),
    );
    Ok(out)
}

fn fig13(cfg: &Resolved) -> Result<ScenarioOutput, CliError> {
    let w01 = cfg.omega("omega01_hz")?;
    let w12 = cfg.omega("omega12_hz")?;
    let g = cfg.omega("g_hz")?;
    let wr = cfg.omega("omega_r_hz")?;
    let rdim = cfg.dim("resonator")?;
    let ns: Vec<f64> = cfg.sweep_values()?.into_iter().map(f64::round).collect();
    if ns.iter().any(|n| *n < 0.0 || *n as usize + 1 >= rdim) {
        return Err(CliError::validation(format!("photon numbers must be integers in [0, {})", rdim - 1)));
    }
    let mut out = ScenarioOutput::default();
    let mut t = Table::new("pull", &["transmon_levels", "sigma", "photons", "omega_r_sigma_hz"]);
    for levels in cfg.list("transmon_levels")? {
        let levels = levels as usize;
        let sys = RabiSystem { transmon_dim: levels, resonator_dim: rdim, omega_r: wr, omega_q: w01, ec: w01 - w12, g, rwa: true };
        let e = dressed_energies(&rabi_hamiltonian(&sys).within("coupling")?).within("coupling")?;
        let space = sys.space();
        for sigma in 0..levels.min(3) {
            for &n in &ns {
                let n = n as usize;
                let hi = space.index_of(&[sigma, n + 1]).within("hilbert")?;
                let lo = space.index_of(&[sigma, n]).within("hilbert")?;
                t.push(vec![levels as f64, sigma as f64, n as f64, hz(e[hi] - e[lo])]);
            }
        }
    }
    out.tables.push(t);
    out.note("critical_photons", ((w01 - wr) / (2.0 * g)).powi(2));
    Ok(out)
}

fn grid(cfg: &Resolved) -> Result<PhaseSpaceGrid, CliError> {
    Ok(PhaseSpaceGrid::square(cfg.positive("half_width")?, cfg.count("grid_points")?))
}

fn push_wigner(t: &mut Table, tag: Option<f64>, w: &PhaseSpaceFunction) {
    let (xs, ps) = (w.grid.xs(), w.grid.ps());
    for (ip, p) in ps.iter().enumerate() {
        for (ix, x) in xs.iter().enumerate() {
            let mut row: Vec<f64> = tag.into_iter().collect();
            row.extend([*x, *p, w.at(ix, ip)]);
            t.push(row);
        }
    }
}

fn fig17(cfg: &Resolved) -> Result<ScenarioOutput, CliError> {
    let dim = cfg.dim("fock")?;
    let sp = SqueezeParams::new(cfg.value("r")?, cfg.value("theta")?).within("phasespace")?;
    let state = squeezed_vacuum(&sp, dim).within("phasespace")?;
    let w = wigner(&state, &grid(cfg)?).within("phasespace")?;
    let mut out = ScenarioOutput::default();
    let mut tw = Table::new("wigner", &["x", "p", "w"]);
    push_wigner(&mut tw, None, &w);
    out.tables.push(tw);
    out.warnings.extend(w.warnings.iter().cloned());
    let phis = cfg.sweep_values()?;
    let mut ts = Table::new("squeezing", &["r", "phi", "variance", "variance_formula", "level_db"]);
    let mut worst = 0.0_f64;
    for r in cfg.list("level_r")? {
        let p = SqueezeParams::new(r, cfg.value("level_theta")?).within("phasespace")?;
        let s = squeezed_vacuum(&p, cfg.dim("fock_levels")?).within("phasespace")?;
        for &phi in &phis {
            let v = quadrature_variance(&s, phi).within("phasespace")?;
            let f = squeezed_vacuum_variance(&p, phi);
            worst = worst.max((v - f).abs());
            ts.push(vec![r, phi, v, f, squeezing_level_db(&p, phi)]);
        }
    }
    out.tables.push(ts);
    out.note("wigner_integral", w.integral());
    out.note("min_variance_formula", (-2.0 * sp.r).exp() / 2.0);
    out.note("max_variance_deviation", worst);
    Ok(out)
}

fn fig18(cfg: &Resolved) -> Result<ScenarioOutput, CliError> {
    let dim = cfg.dim("fock")?;
    let alpha = Complex64::new(cfg.value("alpha")?, 0.0);
    let g = grid(cfg)?;
    let four = cat_code(alpha, 4, dim).within("codes")?;
    let two = cat_code(alpha, 2, dim).within("codes")?;
    let even = (two.ket(0) + two.ket(1)) * Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let space = HilbertSpace::single(dim).within("hilbert")?;
    let states = [
        (4.0, QuantumState::ket(space.clone(), four.ket(0).clone()).within("hilbert")?),
        (2.0, QuantumState::ket(space, even).within("hilbert")?),
    ];
    let mut out = ScenarioOutput::default();
    let mut t = Table::new("wigner", &["components", "x", "p", "w"]);
    let mut summary = Vec::new();
    for (legs, s) in &states {
        let w = wigner(s, &g).within("phasespace")?;
        push_wigner(&mut t, Some(*legs), &w);
        out.warnings.extend(w.warnings.iter().cloned());
        summary.push(json!({ "components": legs, "min": w.min(), "max": w.max(), "integral": w.integral() }));
    }
    out.tables.push(t);
    out.note("cats", summary);
    Ok(out)
}

fn x_gate() -> CMat {
    let mut m = CMat::zeros(2, 2);
    m[(0, 1)] = Complex64::new(1.0, 0.0);
    m[(1, 0)] = Complex64::new(1.0, 0.0);
    m
}

fn gates(cfg: &Resolved) -> Result<ScenarioOutput, CliError> {
    let q = Transmon { omega_q: cfg.omega("omega_q_hz")?, ec: cfg.omega("ec_hz")? };
    let beta = cfg.value("drag_beta")?;
    let dim = cfg.dim("transmon")?;
    let times = cfg.sweep_values()?;
    let x = x_gate();
    let pulse = |sigma: f64, b: f64| -> cqed_core::Result<(f64, f64)> {
        let env = drag_envelope(1.0, sigma, q.ec, b)?.with_carrier(q.omega_q).scaled_to_angle(PI)?;
        let r = single_qubit_gate(&env, &q, dim, None, Some(&x))?;
        Ok((r.leakage, r.fidelity.unwrap_or(f64::NAN)))
    };
    let rows: Vec<Vec<f64>> = times
        .par_iter()
        .map(|&t| {
            let s = t / 4.0;
            let (lg, fg) = pulse(s, 0.0)?;
            let (ld, fd) = pulse(s, beta)?;
            Ok(vec![t, s, lg, ld, fg, fd])
        })
        .collect::<cqed_core::Result<_>>()
        .within("gates")?;
    let mut out = ScenarioOutput::default();
    let mut t = Table::new(
        "drag",
        &["gate_time_s", "sigma_s", "leakage_gaussian", "leakage_drag", "fidelity_gaussian", "fidelity_drag"],
    );
    rows.into_iter().for_each(|r| t.push(r));
    out.tables.push(t);

    let j = cfg.omega("j_hz")?;
    let sq = iswap_gate(j, PI / (4.0 * j));
    out.note("sqrt_iswap_fidelity", sq.fidelity);

    let ec = cfg.omega("cz_ec_hz")?;
    let sys = TwoQubitSystem::direct(
        Transmon { omega_q: cfg.omega("cz_omega1_hz")?, ec },
        Transmon { omega_q: cfg.omega("cz_omega2_hz")?, ec },
        j,
        3,
    );
    let czr = cz_11_02(&sys, &CzProtocol::Sudden, &CzOptions { idealized: true, ..Default::default() }).within("gates")?;
    out.warnings.extend(czr.warnings.iter().cloned());
    out.note(
        "cz_sudden_idealized",
        json!({ "fidelity": czr.fidelity, "leakage": czr.leakage, "conditional_phase": czr.phases.map(|p| p.conditional) }),
    );

    let delta = cfg.omega("cr_delta_hz")?;
    let cr_ec = cfg.omega("cr_ec_hz")?;
    let q2 = Transmon { omega_q: q.omega_q, ec: cr_ec };
    let q1 = Transmon { omega_q: q.omega_q + delta, ec: cr_ec };
    let cj = cfg.value("cr_j_over_delta")? * delta;
    let ce = cfg.value("cr_eps_over_delta")? * delta;
    let formula = cross_resonance_effective(&q1, &q2, cj, ce).within("gates")?;
    let numeric = cross_resonance_numeric(&TwoQubitSystem::direct(q1, q2, cj, 4), ce).within("gates")?;
    out.note(
        "cross_resonance",
        json!({
            "zx_formula_hz": hz(formula.zx), "zx_numeric_hz": numeric.get("ZX").map(hz),
            "zz_formula_hz": hz(formula.zz), "zz_numeric_hz": numeric.get("ZZ").map(hz),
        }),
    );

    let wm = cfg.omega("sideband_omega_m_hz")?;
    let sj = cfg.omega("sideband_j_hz")?;
    let curve: Vec<(f64, f64)> = (0..=40)
        .map(|i| {
            let r = 0.1 * i as f64;
            parametric_sideband(sj, r * wm, wm, wm).map(|s| (r, s.coupling / sj))
        })
        .collect::<cqed_core::Result<_>>()
        .within("gates")?;
    let best = golden_max(|r| parametric_sideband(sj, r * wm, wm, wm).map_or(f64::NAN, |s| s.coupling), 1.0, 3.0, 1e-6);
    let mut ts = Table::new("sideband", &["epsilon_over_omega_m", "coupling_over_j"]);
    curve.into_iter().for_each(|(r, c)| ts.push(vec![r, c]));
    out.tables.push(ts);
    out.note("sideband_peak_epsilon_over_omega_m", best);
    Ok(out)
}

fn codes(cfg: &Resolved) -> Result<ScenarioOutput, CliError> {
    let bdim = cfg.dim("binomial")?;
    let kts = cfg.sweep_values()?;
    let bin = binomial_code(bdim).within("codes")?;
    let four = four_qubit_code().within("codes")?;
    let bare = trivial_code(2).within("codes")?;
    let mode = move |k: f64| amplitude_damping_kraus(k, bdim);
    let qubits = |k: f64| -> cqed_core::Result<LossChannel> { Ok(amplitude_damping_kraus(k, 2)?.tensor_power(4)) };
    let bare_loss = |k: f64| amplitude_damping_kraus(k, 2);
    let order = KlOrder::Channel { kappa_ts: kts.clone(), max_losses: 1 };

    let mut out = ScenarioOutput::default();
    let mut t = Table::new("recovery", &["code", "kappa_t", "infidelity"]);
    let mut report = Vec::new();
    let mut record = |id: usize, code: &CodeSpec, curve: cqed_core::codes::RecoveryCurve, kl: serde_json::Value| {
        for (k, f) in curve.kappa_t.iter().zip(&curve.infidelity) {
            t.push(vec![id as f64, *k, *f]);
        }
        report.push(json!({
            "id": id, "code": code.name, "recovery": curve.recovery, "exponent": curve.exponent,
            "mean_excitations": code.mean_excitations(), "knill_laflamme": kl,
        }));
    };
    let kl = |code: &CodeSpec, ch: &(dyn Fn(f64) -> cqed_core::Result<LossChannel> + Sync)| -> Result<serde_json::Value, CliError> {
        let alg = knill_laflamme_check(code, &KlOrder::Algebraic, ch).within("codes")?;
        let chan = knill_laflamme_check(code, &order, ch).within("codes")?;
        Ok(json!({ "algebraic": alg.status, "channel": chan.status, "channel_order": chan.order }))
    };
    let c = recovery_benchmark(&bin, mode, Recovery::OptimalFromKl, &kts).within("codes")?;
    record(0, &bin, c, kl(&bin, &mode)?);
    let c = recovery_benchmark(&four, qubits, Recovery::OptimalFromKl, &kts).within("codes")?;
    record(1, &four, c, kl(&four, &qubits)?);
    let c = recovery_benchmark(&bare, bare_loss, Recovery::None, &kts).within("codes")?;
    record(2, &bare, c, kl(&bare, &bare_loss)?);
    out.tables.push(t);
    out.note("codes", report);

    let alpha = cfg.value("cat_alpha")?;
    let cat = cat_code(Complex64::new(alpha, 0.0), 2, cfg.dim("cat")?).within("codes")?;
    let (a, _) = ladder_operators(cfg.dim("cat")?).within("hilbert")?;
    let flip = (cat.ket(1).adjoint() * a.matrix() * cat.ket(0))[(0, 0)].norm();
    out.note(
        "cat2_bit_flip",
        json!({ "alpha": alpha, "element": flip, "formula": alpha * (-2.0 * alpha * alpha).exp() }),
    );
    Ok(out)
}
