use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use lowmach_core::experiments::properties::PROPERTY_COLUMNS;
use lowmach_core::experiments::report::{write_numeric_table, write_table};
use lowmach_core::experiments::runs::{osc_rows, pe_rows, CPE_COLUMNS, OSC_COLUMNS, PE_COLUMNS};
use lowmach_core::experiments::{
    oscillation_run, pe_run, run_contrast, run_convergence, run_properties, run_resonance_audit,
    simulate, ExperimentConfig, Preset, PropertyOptions,
};
use lowmach_core::Grid;

#[derive(Parser)]
#[command(
    name = "lowmach",
    version,
    about = "Low Mach number limit experiments on T² × 2T"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML experiment configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Mach number(s), comma separated, strictly decreasing.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Grid as NX,NY,NZ.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<Grid>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// well, ill or random.
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output samples over [0, t_end].
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// One compressible run at the first ε.
    Simulate(Common),
    /// The limit primitive equations run.
    Limit(Common),
    /// The limit oscillation run (needs the limit PE run for its advecting field).
    Oscillate(Common),
    /// The full sweep over ε with error tables and fits.
    Converge(Common),
    /// sup_t(‖ξ‖_H¹ + ‖P_τv‖_H¹) per ε from CPE runs only, with its log-log slope.
    Contrast(Common),
    /// Invariant suites.
    Props {
        #[command(flatten)]
        common: Common,
        /// Relative perturbation of c in the eigenbasis (negative control).
        #[arg(long, default_value_t = 0.0)]
        perturb_eigenbasis: f64,
        /// Random samples per randomized check.
        #[arg(long, default_value_t = 20)]
        checks: usize,
    },
    /// Resonance audit over |k|, |l| <= K_MAX·π.
    Resonance {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 16.0)]
        k_max_pi: f64,
    },
}

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match parts.as_slice() {
        [nx, ny, nz] => Grid::new(*nx, *ny, *nz).map_err(|e| e.to_string()),
        _ => Err(format!("expected NX,NY,NZ, got {s:?}")),
    }
}

fn load(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(e) = &c.eps {
        cfg.eps_list = e.clone();
    }
    if let Some(g) = c.grid {
        cfg.grid = g;
    }
    if let Some(t) = c.t_end {
        cfg.t_end = t;
    }
    if let Some(o) = &c.out {
        cfg.output_dir = o.clone();
    }
    if let Some(p) = c.preset {
        cfg.initial_data.preset = p;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(n) = c.samples {
        cfg.numerics.samples = n;
    }
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    Ok(cfg)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.4e}"))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate(c) => {
            let cfg = load(&c)?;
            let eps = cfg.eps_list[0];
            let sim = simulate(&cfg, eps)?;
            let path = cfg.output_dir.join(format!("cpe_eps_{eps}.csv"));
            write_numeric_table(&path, &CPE_COLUMNS, &sim.rows)?;
            println!(
                "eps {eps}: dt {:.3e}, {} samples -> {}",
                sim.dt,
                sim.rows.len(),
                path.display()
            );
            if let Some(r) = sim.failure {
                println!("integration stopped: {r}");
                return Ok(false);
            }
        }
        Command::Limit(c) => {
            let cfg = load(&c)?;
            let (pe, _, dt) = pe_run(&cfg)?;
            let path = cfg.output_dir.join("limit_pe.csv");
            write_numeric_table(&path, &PE_COLUMNS, &pe_rows(&pe))?;
            println!(
                "limit PE: dt {dt:.3e}, {} samples -> {}",
                pe.len(),
                path.display()
            );
        }
        Command::Oscillate(c) => {
            let cfg = load(&c)?;
            let (_, history, dt) = pe_run(&cfg)?;
            let vo = oscillation_run(&cfg, &history, dt)?;
            let path = cfg.output_dir.join("limit_oscillation.csv");
            write_numeric_table(&path, &OSC_COLUMNS, &osc_rows(&vo, &cfg.params))?;
            println!(
                "limit oscillation: dt {dt:.3e}, {} samples -> {}",
                vo.len(),
                path.display()
            );
        }
        Command::Converge(c) => {
            let cfg = load(&c)?;
            let rep = run_convergence(&cfg)?;
            rep.write(&cfg.output_dir)?;
            println!(
                "{:>10} {:>7} {:>11} {:>11} {:>11} {:>11} {:>11}",
                "eps", "status", "raw", "tau_pair", "corrected", "g_dev", "energy"
            );
            for r in &rep.records {
                println!(
                    "{:>10} {:>7} {:>11} {:>11} {:>11} {:>11} {:>11}",
                    r.eps,
                    if r.succeeded() { "ok" } else { "failed" },
                    opt(r.sup("raw")),
                    opt(r.sup("tau_pair")),
                    opt(r.sup("corrected")),
                    opt(r.sup("g_dev")),
                    opt(r.sup("energy_ratio")),
                );
            }
            for f in &rep.fits {
                println!(
                    "{:<14} slope {:>9}  strictly decreasing: {}",
                    f.quantity,
                    opt(f.slope),
                    f.strictly_decreasing
                );
            }
            println!("report -> {}", cfg.output_dir.display());
            return Ok(rep.records.iter().all(|r| r.succeeded()));
        }
        Command::Contrast(c) => {
            let cfg = load(&c)?;
            let rep = run_contrast(&cfg)?;
            let path = cfg.output_dir.join("contrast.csv");
            rep.write(&path)?;
            for r in &rep.rows {
                println!(
                    "eps {:>10}  sup {:>11}  at t = {:.4e}",
                    r.eps,
                    opt(r.sup_acoustic),
                    r.t_sup
                );
            }
            println!(
                "slope {}  strictly decreasing: {} -> {}",
                opt(rep.slope),
                rep.strictly_decreasing,
                path.display()
            );
            return Ok(rep.rows.iter().all(|r| r.failure.is_none()));
        }
        Command::Props {
            common,
            perturb_eigenbasis,
            checks,
        } => {
            let cfg = load(&common)?;
            let opts = PropertyOptions {
                eigenbasis_perturbation: perturb_eigenbasis,
                samples: checks,
            };
            let rep = run_properties(&cfg, &opts)?;
            let path = cfg.output_dir.join("properties.csv");
            write_table(&path, &PROPERTY_COLUMNS, &rep.rows())?;
            for r in rep.rows() {
                println!(
                    "{:<12} {:<48} {:>12} <= {:>10}  {}",
                    r[0], r[1], r[2], r[3], r[4]
                );
            }
            println!(
                "gamma {} tolerance scale {} -> {}",
                rep.gamma,
                rep.tolerance_scale,
                path.display()
            );
            return Ok(rep.all_passed());
        }
        Command::Resonance { common, k_max_pi } => {
            let cfg = load(&common)?;
            if !(k_max_pi > 0.0) {
                bail!("--k-max-pi must be positive");
            }
            let rep = run_resonance_audit(k_max_pi * std::f64::consts::PI);
            rep.write(&cfg.output_dir, &cfg.params)?;
            let c = &rep.counts;
            println!(
                "pairs {} resonant {} characterization violations {} reversed-set members {} difference-set members {}",
                c.pairs, c.resonant, c.characterization_violations, c.reversed_members, c.difference_members
            );
            return Ok(rep.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
