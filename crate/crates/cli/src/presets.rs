//! Built-in scenarios. Figure presets carry the parameters printed in the
//! figure captions; grids, truncations and anything a caption leaves open
//! are artifact defaults listed in `defaults_note`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use clap::ValueEnum;
use serde::Serialize;

use crate::config::{Param, ScenarioConfig, Sweep};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Spectrum,
    Evolve,
    Readout,
    Gate,
    Code,
    Phasespace,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Evolve => "evolve",
            Command::Readout => "readout",
            Command::Gate => "gate",
            Command::Code => "code",
            Command::Phasespace => "phasespace",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub command: Command,
    pub description: &'static str,
    /// Which defaults are not caption values.
    pub defaults_note: &'static str,
    pub config: ScenarioConfig,
}

struct Builder(ScenarioConfig);

impl Builder {
    fn new(name: &str) -> Self {
        Self(ScenarioConfig::named(name))
    }

    fn p(mut self, key: &str, v: f64) -> Self {
        self.0.params.insert(key.into(), Param::Scalar(v));
        self
    }

    fn l(mut self, key: &str, v: &[f64]) -> Self {
        self.0.params.insert(key.into(), Param::List(v.to_vec()));
        self
    }

    fn dim(mut self, key: &str, v: usize) -> Self {
        self.0.dims.insert(key.into(), v);
        self
    }

    fn sweep(mut self, s: Sweep) -> Self {
        self.0.sweep = Some(s);
        self
    }

    fn seed(mut self, s: u64) -> Self {
        self.0.seed = Some(s);
        self
    }

    fn done(self) -> ScenarioConfig {
        self.0
    }
}

pub fn catalog() -> Vec<Preset> {
    vec![
        Preset {
            name: "fig5",
            command: Command::Spectrum,
            description: "transmon levels ω_j − ω_0 versus offset charge for several EJ/EC at fixed plasma frequency",
            defaults_note: "charge cutoff and ng grid",
            config: Builder::new("fig5")
                .p("plasma_hz", 5e9)
                .l("ej_over_ec", &[1.0, 5.0, 10.0, 50.0])
                .p("levels", 3.0)
                .dim("ncut", 20)
                .sweep(Sweep::linear("ng", -2.0, 2.0, 81))
                .done(),
        },
        Preset {
            name: "fig7",
            command: Command::Readout,
            description: "pointer-state trajectories and SNR versus 2χ/κ at τmκ = 10 and 200",
            defaults_note: "κ/2π = 1 MHz; ε sized for one steady photon at 2χ/κ = 1; shots, η = 1",
            config: Builder::new("fig7")
                .p("kappa_hz", 1e6)
                .p("photons", 1.0)
                .p("eta", 1.0)
                .l("tau_kappa", &[10.0, 200.0])
                .p("shots", 20000.0)
                .p("bins", 60.0)
                .p("trajectory_points", 2001.0)
                .sweep(Sweep::linear("two_chi_over_kappa", 0.1, 4.0, 40))
                .seed(7)
                .done(),
        },
        Preset {
            name: "fig8",
            command: Command::Evolve,
            description: "JC master-equation time traces from |e,0> and steady-state transmission in the bad-cavity, bad-qubit and strong-coupling regimes",
            defaults_note: "probe drive strength (relative to the smallest rate), time windows, resonator truncation; probe detuning in units of each panel's scale (κ, γ1, g)",
            config: Builder::new("fig8")
                .l("bad_cavity_hz", &[10e6, 0.0, 1e6])
                .l("bad_qubit_hz", &[0.0, 10e6, 1e6])
                .l("strong_hz", &[0.1e6, 0.1e6, 100e6])
                .l("strong_lossy_hz", &[1e6, 1e6, 100e6])
                .p("n_thermal", 0.35)
                .p("probe_fraction", 1e-3)
                .p("window_weak_s", 2e-6)
                .p("window_strong_s", 5e-8)
                .p("time_points", 401.0)
                .dim("resonator", 4)
                .dim("resonator_thermal", 8)
                .sweep(Sweep::linear("probe_detuning_scale", -1.5, 1.5, 601))
                .done(),
        },
        Preset {
            name: "fig9",
            command: Command::Spectrum,
            description: "two transmons on a bus: 1- and 2-excitation spectra versus the second qubit's frequency",
            defaults_note: "ωr/2π = 9.07 GHz; transmons enter as Duffing oscillators with charge-basis ω01 and anharmonicity",
            config: Builder::new("fig9")
                .p("ej1_hz", 28.48e9)
                .p("ej2_hz", 42.34e9)
                .p("ec1_hz", 317e6)
                .p("ec2_hz", 297e6)
                .p("g1_hz", 199e6)
                .p("g2_hz", 190e6)
                .p("omega_r_hz", 9.07e9)
                .dim("transmon", 5)
                .dim("resonator", 5)
                .dim("ncut", 25)
                .sweep(Sweep::linear("omega_q2_hz", 7.6e9, 9.6e9, 201))
                .done(),
        },
        Preset {
            name: "fig11",
            command: Command::Evolve,
            description: "power-broadened qubit line: steady-state excited population versus drive detuning",
            defaults_note: "detuning grid",
            config: Builder::new("fig11")
                .p("gamma1_hz", 0.1e6)
                .p("gamma_phi_hz", 0.1e6)
                .l("omega_rabi_hz", &[0.1e6, 0.5e6, 1e6])
                .sweep(Sweep::linear("detuning_hz", -3e6, 3e6, 241))
                .done(),
        },
        Preset {
            name: "fig12",
            command: Command::Evolve,
            description: "two-tone ac-Stark spectroscopy: shifted lines (χ/2π = 0.1 MHz) and number splitting (χ/2π = 5 MHz)",
            defaults_note: "spectroscopy Rabi frequency, γφ = 0, detuning grids, pseudo-count scale for the Poisson test",
            config: Builder::new("fig12")
                .p("chi_a_hz", 0.1e6)
                .p("kappa_hz", 0.1e6)
                .p("gamma1_hz", 0.1e6)
                .l("epsilon_a_hz", &[0.0, 0.2e6, 0.4e6])
                .p("chi_b_hz", 5e6)
                .p("epsilon_b_hz", 0.1e6)
                .p("omega_rabi_hz", 0.1e6)
                .l("detuning_a_hz", &[-1e6, 5e6])
                .p("detuning_a_points", 601.0)
                .p("peaks_b", 12.0)
                .p("pseudo_counts", 1000.0)
                .sweep(Sweep::linear("detuning_b_hz", -5e6, 125e6, 13001))
                .done(),
        },
        Preset {
            name: "fig13",
            command: Command::Spectrum,
            description: "nonlinear cavity pull: resonator frequency conditioned on the transmon state versus photon number",
            defaults_note: "ωr/2π = 7 GHz; resonator truncation",
            config: Builder::new("fig13")
                .p("omega01_hz", 6e9)
                .p("omega12_hz", 5.75e9)
                .p("g_hz", 0.1e9)
                .p("omega_r_hz", 7e9)
                .l("transmon_levels", &[2.0, 3.0, 6.0])
                .dim("resonator", 90)
                .sweep(Sweep::linear("photons", 0.0, 60.0, 61))
                .done(),
        },
        Preset {
            name: "fig17",
            command: Command::Phasespace,
            description: "squeezed vacuum: Wigner function and squeezing level versus quadrature angle",
            defaults_note: "Fock truncation and phase-space grid",
            config: Builder::new("fig17")
                .p("r", 0.75)
                .p("theta", PI / 2.0)
                .l("level_r", &[0.5, 1.0, 1.5])
                .p("level_theta", PI)
                .p("half_width", 4.5)
                .p("grid_points", 101.0)
                .dim("fock", 60)
                .dim("fock_levels", 240)
                .sweep(Sweep::linear("phi", 0.0, PI, 91))
                .done(),
        },
        Preset {
            name: "fig18",
            command: Command::Phasespace,
            description: "Wigner functions of four- and two-component cat states",
            defaults_note: "Fock truncation and phase-space grid",
            config: Builder::new("fig18")
                .p("alpha", 4.0)
                .p("half_width", 8.0)
                .p("grid_points", 161.0)
                .dim("fock", 70)
                .done(),
        },
        Preset {
            name: "gates",
            command: Command::Gate,
            description: "Gaussian versus DRAG π-pulse leakage over gate time, plus √iSWAP, 11-02 CZ, cross-resonance and sideband checks",
            defaults_note: "all values are artifact defaults",
            config: Builder::new("gates")
                .p("omega_q_hz", 5e9)
                .p("ec_hz", 200e6)
                .p("drag_beta", 1.0)
                .p("j_hz", 10e6)
                .p("cz_omega1_hz", 5.5e9)
                .p("cz_omega2_hz", 6.0e9)
                .p("cz_ec_hz", 250e6)
                .p("cr_delta_hz", 100e6)
                .p("cr_ec_hz", 300e6)
                .p("cr_j_over_delta", 0.02)
                .p("cr_eps_over_delta", 0.05)
                .p("sideband_omega_m_hz", 200e6)
                .p("sideband_j_hz", 5e6)
                .dim("transmon", 4)
                .sweep(Sweep::linear("gate_time_s", 3e-9, 10e-9, 8))
                .done(),
        },
        Preset {
            name: "codes",
            command: Command::Code,
            description: "Knill-Laflamme checks and recovery infidelity scaling for binomial, 4-qubit and cat codes",
            defaults_note: "all values are artifact defaults",
            config: Builder::new("codes")
                .p("cat_alpha", 2.0)
                .dim("binomial", 8)
                .dim("cat", 60)
                .sweep(Sweep::logarithmic("kappa_t", 1e-3, 3e-2, 8))
                .done(),
        },
    ]
}

pub fn find(name: &str) -> Option<Preset> {
    catalog().into_iter().find(|p| p.name == name)
}

/// Catalog entries by command, for help text.
pub fn by_command() -> BTreeMap<&'static str, Vec<&'static str>> {
    let mut m: BTreeMap<&'static str, Vec<&'static str>> = BTreeMap::new();
    for p in catalog() {
        m.entry(p.command.name()).or_default().push(p.name);
    }
    m
}
