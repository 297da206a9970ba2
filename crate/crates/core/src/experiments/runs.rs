//! Single runs: CPE at one ε, the limit PE run, and the limit oscillation run.

use std::path::Path;

use super::config::ExperimentConfig;
use super::presets::initial_state;
use crate::acoustic::{decompose, reconstruct};
use crate::cpe::{energy, stability_dt, CpeState, CpeStepper};
use crate::error::Result;
use crate::limit_pe::{PeState, PeStepper};
use crate::oscillation::{
    vertical_mean_sigma, LimitOperators, OscState, OscillationStepper, VpHistory,
};
use crate::params::PhysicalParams;
use crate::projections::{project_ker_perp, project_tau};
use crate::snapshot::Snapshot;
use crate::spectral::Spectral;

/// Columns of the CPE time series.
pub const CPE_COLUMNS: [&str; 10] = [
    "time", "xi_h1", "xi_h2", "v_h1", "v_h2", "e_l2", "e_h2", "g_eps", "p_tau_h1", "acoustic",
];

pub fn cpe_row(s: &CpeState, params: &PhysicalParams) -> Vec<f64> {
    let e = energy(s, params);
    let xi_h1 = s.xi.sobolev_norm(1);
    let p_tau = project_tau(&s.v).sobolev_norm(1);
    vec![
        s.time,
        xi_h1,
        s.xi.sobolev_norm(2),
        s.v.sobolev_norm(1),
        s.v.sobolev_norm(2),
        e.e_l2,
        e.e_h2,
        s.xi.mean(),
        p_tau,
        xi_h1 + p_tau,
    ]
}

/// Equal steps no longer than `dt` that land on every output time.
pub fn steps_between(t0: f64, t1: f64, dt: f64) -> (usize, f64) {
    let n = ((t1 - t0) / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    (n, (t1 - t0) / n as f64)
}

/// CPE step cap: advective CFL on the initial state, `dt_max`, and `eps_dt_factor·ε`.
pub fn cpe_dt(cfg: &ExperimentConfig, initial: &CpeState, eps: f64, sp: &Spectral) -> f64 {
    let n = &cfg.numerics;
    stability_dt(initial, sp, n.cfl, n.dt_max).min(n.eps_dt_factor * eps)
}

/// Step cap for the ε-free reference runs.
pub fn reference_dt(cfg: &ExperimentConfig, initial: &CpeState, sp: &Spectral) -> f64 {
    stability_dt(initial, sp, cfg.numerics.cfl, cfg.numerics.dt_max)
}

pub fn snapshot_path(dir: &Path, tag: &str, j: usize) -> std::path::PathBuf {
    dir.join("snapshots").join(format!("{tag}_{j:05}.mlsnap"))
}

pub(crate) fn maybe_snapshot(
    cfg: &ExperimentConfig,
    tag: &str,
    j: usize,
    s: &CpeState,
    params: &PhysicalParams,
) -> Result<()> {
    let c = cfg.snapshot_cadence;
    if c == 0 || !j.is_multiple_of(c) {
        return Ok(());
    }
    let path = snapshot_path(&cfg.output_dir, tag, j);
    if let Some(p) = path.parent() {
        std::fs::create_dir_all(p)?;
    }
    Snapshot {
        gamma: params.gamma(),
        eps: params.eps(),
        time: s.time,
        xi: s.xi.clone(),
        v: s.v.clone(),
    }
    .save(&path)
}

/// Samples of one CPE run; `failure` holds the reason if integration stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub eps: f64,
    pub dt: f64,
    pub rows: Vec<Vec<f64>>,
    pub failure: Option<String>,
}

pub fn simulate(cfg: &ExperimentConfig, eps: f64) -> Result<Simulation> {
    let params = cfg.params_for(eps)?;
    let sp = Spectral::new(cfg.grid);
    let initial = initial_state(&cfg.initial_data, &sp, cfg.seed);
    let dt = cpe_dt(cfg, &initial, eps, &sp);
    let mut stepper = CpeStepper::new(&sp, params);
    let times = cfg.sample_times();
    let mut s = initial;
    let tag = format!("eps_{eps}");
    let mut out = Simulation {
        eps,
        dt,
        rows: vec![cpe_row(&s, &params)],
        failure: None,
    };
    maybe_snapshot(cfg, &tag, 0, &s, &params)?;
    for (j, t) in times.iter().enumerate().skip(1) {
        match stepper.advance(&s, *t, dt) {
            Ok(next) => s = next,
            Err(e) => {
                out.failure = Some(e.to_string());
                break;
            }
        }
        out.rows.push(cpe_row(&s, &params));
        maybe_snapshot(cfg, &tag, j, &s, &params)?;
    }
    Ok(out)
}

/// Shared ε-free runs: `v_p` and `(V^o, g^o)` at every output time.
#[derive(Debug, Clone)]
pub struct Reference {
    pub times: Vec<f64>,
    pub pe: Vec<PeState>,
    pub vo: Vec<OscState>,
    pub g_o: f64,
    pub dt: f64,
}

/// `V^o(0) = decompose(ξ₀ − ∫ξ₀, P_τv₀)` on the dealiased band and `g^o = ∫ξ₀`.
pub fn limit_oscillation_initial(
    initial: &CpeState,
    params: &PhysicalParams,
    sp: &Spectral,
) -> OscState {
    let mut modes = decompose(&project_ker_perp(&initial.xi, &initial.v), params);
    modes.truncate(sp.grid());
    OscState {
        modes,
        g: initial.xi.mean(),
        time: 0.0,
    }
}

/// Limit PE run sampled at the output times, with `ū = ∫₀¹P_σv_p dz` kept at every step.
pub fn pe_run(cfg: &ExperimentConfig) -> Result<(Vec<PeState>, VpHistory, f64)> {
    let params = cfg.params;
    let sp = Spectral::new(cfg.grid);
    let initial = initial_state(&cfg.initial_data, &sp, cfg.seed);
    let dt = reference_dt(cfg, &initial, &sp);
    let times = cfg.sample_times();
    let mut stepper = PeStepper::new(&sp, params);
    let mut p = PeState::from_initial(&initial.v);
    let mut history = VpHistory::new();
    history.push(0.0, vertical_mean_sigma(&p.v_p))?;
    let mut out = vec![p.clone()];
    for w in times.windows(2) {
        let (n, h) = steps_between(w[0], w[1], dt);
        for i in 0..n {
            p = stepper.step(&p, h)?;
            if i + 1 == n {
                p.time = w[1];
            }
            history.push(p.time, vertical_mean_sigma(&p.v_p))?;
        }
        out.push(p.clone());
    }
    Ok((out, history, dt))
}

/// `(V^o, g^o)` sampled at the output times.
pub fn oscillation_run(
    cfg: &ExperimentConfig,
    history: &VpHistory,
    dt: f64,
) -> Result<Vec<OscState>> {
    let params = cfg.params;
    let sp = Spectral::new(cfg.grid);
    let initial = initial_state(&cfg.initial_data, &sp, cfg.seed);
    let ops = LimitOperators::new(&cfg.grid, &params);
    let osc = OscillationStepper::new(&ops);
    let mut o = limit_oscillation_initial(&initial, &params, &sp);
    let mut out = vec![o.clone()];
    for t in cfg.sample_times().iter().skip(1) {
        o = osc.advance(&o, history, *t, dt)?;
        out.push(o.clone());
    }
    Ok(out)
}

pub fn reference_runs(cfg: &ExperimentConfig) -> Result<Reference> {
    let (pe, history, dt) = pe_run(cfg)?;
    let vo = oscillation_run(cfg, &history, dt)?;
    let g_o = vo[0].g;
    Ok(Reference {
        times: cfg.sample_times(),
        pe,
        vo,
        g_o,
        dt,
    })
}

/// Columns of the limit PE series.
pub const PE_COLUMNS: [&str; 5] = ["time", "v_h1", "v_h2", "kinetic_energy", "p_tau_h1"];

pub fn pe_rows(pe: &[PeState]) -> Vec<Vec<f64>> {
    pe.iter()
        .map(|p| {
            vec![
                p.time,
                p.v_p.sobolev_norm(1),
                p.v_p.sobolev_norm(2),
                p.kinetic_energy(),
                project_tau(&p.v_p).sobolev_norm(1),
            ]
        })
        .collect()
}

/// Columns of the limit oscillation series.
pub const OSC_COLUMNS: [&str; 5] = ["time", "modes_l2", "profile_h1", "profile_h2", "g_o"];

pub fn osc_rows(vo: &[OscState], params: &PhysicalParams) -> Vec<Vec<f64>> {
    vo.iter()
        .map(|o| {
            let u = reconstruct(&o.modes, params);
            vec![
                o.time,
                o.modes.coefficient_norm_sq().sqrt(),
                u.sobolev_norm(1),
                u.sobolev_norm(2),
                o.g,
            ]
        })
        .collect()
}
