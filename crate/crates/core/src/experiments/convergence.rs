//! The ε sweep: one CPE run per ε against shared limit runs, with sup-in-time errors and
//! log-log fits.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;

use super::config::ExperimentConfig;
use super::presets::initial_state;
use super::report::{
    fmt_value, loglog_slope, strictly_decreasing, write_numeric_table, write_table, EventLog,
};
use super::runs::{cpe_dt, cpe_row, maybe_snapshot, reference_runs, Reference};
use crate::cpe::{energy, CpeStepper};
use crate::error::{Error, Result};
use crate::oscillation::{error_norms, sources_kl};
use crate::spectral::Spectral;

/// Columns of a convergence time series: the CPE columns followed by the error columns.
pub const SERIES_COLUMNS: [&str; 17] = [
    "time",
    "xi_h1",
    "xi_h2",
    "v_h1",
    "v_h2",
    "e_l2",
    "e_h2",
    "g_eps",
    "p_tau_h1",
    "acoustic",
    "raw",
    "tau_pair",
    "tau_sum",
    "corrected",
    "g_dev",
    "source",
    "energy_ratio",
];

/// Index of a column in [`SERIES_COLUMNS`].
pub fn column(name: &str) -> usize {
    SERIES_COLUMNS
        .iter()
        .position(|c| *c == name)
        .unwrap_or_else(|| panic!("unknown column {name}"))
}

/// Time series of one ε run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub eps: f64,
    pub dt: f64,
    pub steps: usize,
    pub rows: Vec<Vec<f64>>,
    pub failure: Option<String>,
}

impl RunRecord {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }

    /// `sup_t` of a column over the output samples; `None` for a failed run.
    pub fn sup(&self, name: &str) -> Option<f64> {
        let c = column(name);
        self.succeeded()
            .then(|| self.rows.iter().map(|r| r[c]).fold(0.0, f64::max))
    }

    pub fn series(&self, name: &str) -> Vec<f64> {
        let c = column(name);
        self.rows.iter().map(|r| r[c]).collect()
    }
}

/// Quantities reported per ε, as sup over time.
pub const SUMMARY_QUANTITIES: [&str; 9] = [
    "raw",
    "tau_pair",
    "tau_sum",
    "corrected",
    "g_dev",
    "acoustic",
    "source",
    "energy_ratio",
    "v_h1",
];

/// Fit over the ε list for one quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    pub quantity: String,
    pub slope: Option<f64>,
    pub strictly_decreasing: bool,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub config: ExperimentConfig,
    pub reference_dt: f64,
    pub records: Vec<RunRecord>,
    pub fits: Vec<SlopeFit>,
    pub elapsed: Vec<f64>,
}

pub fn run_eps(cfg: &ExperimentConfig, eps: f64, reference: &Reference) -> Result<RunRecord> {
    let params = cfg.params_for(eps)?;
    let sp = Spectral::new(cfg.grid);
    let initial = initial_state(&cfg.initial_data, &sp, cfg.seed);
    let dt = cpe_dt(cfg, &initial, eps, &sp);
    let e0 = energy(&initial, &params).e_l2;
    let mut stepper = CpeStepper::new(&sp, params);
    let tag = format!("eps_{eps}");
    let mut rec = RunRecord {
        eps,
        dt,
        steps: 0,
        rows: Vec::new(),
        failure: None,
    };
    let mut s = initial;
    for (j, t) in reference.times.iter().enumerate() {
        if j > 0 {
            let (n, _) = super::runs::steps_between(s.time, *t, dt);
            match stepper.advance(&s, *t, dt) {
                Ok(next) => s = next,
                Err(e) => {
                    rec.failure = Some(e.to_string());
                    break;
                }
            }
            rec.steps += n;
        }
        let en = error_norms(
            &s,
            &reference.pe[j],
            &reference.vo[j].modes,
            reference.g_o,
            *t,
            &params,
        );
        let mut row = cpe_row(&s, &params);
        row.extend([
            en.raw,
            en.tau_pair,
            en.tau_sum,
            en.corrected,
            en.g_dev,
            sources_kl(&s, &params, &sp).remainder_size(),
            row[5] / e0,
        ]);
        debug_assert_eq!(row.len(), SERIES_COLUMNS.len());
        rec.rows.push(row);
        maybe_snapshot(cfg, &tag, j, &s, &params)?;
    }
    Ok(rec)
}

fn fits(eps: &[f64], records: &[RunRecord]) -> Vec<SlopeFit> {
    SUMMARY_QUANTITIES
        .iter()
        .map(|q| {
            let sups: Vec<Option<f64>> = records.iter().map(|r| r.sup(q)).collect();
            let ok: Vec<(f64, f64)> = eps
                .iter()
                .zip(&sups)
                .filter_map(|(e, s)| s.map(|s| (*e, s)))
                .collect();
            let (xs, ys): (Vec<f64>, Vec<f64>) = ok.iter().copied().unzip();
            SlopeFit {
                quantity: q.to_string(),
                slope: loglog_slope(&xs, &ys),
                strictly_decreasing: sups.iter().all(Option::is_some) && strictly_decreasing(&ys),
            }
        })
        .collect()
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(e.to_string()))
}

pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let reference = reference_runs(cfg)?;
    sweep(cfg, &reference)
}

/// The per-ε CPE runs against precomputed limit runs.
pub fn sweep(cfg: &ExperimentConfig, reference: &Reference) -> Result<ConvergenceReport> {
    let results: Vec<(Result<RunRecord>, f64)> = pool(cfg.numerics.threads)?.install(|| {
        cfg.eps_list
            .par_iter()
            .map(|&eps| {
                let start = Instant::now();
                let r = run_eps(cfg, eps, reference);
                (r, start.elapsed().as_secs_f64())
            })
            .collect()
    });
    let mut records = Vec::new();
    let mut elapsed = Vec::new();
    for ((r, secs), eps) in results.into_iter().zip(&cfg.eps_list) {
        records.push(match r {
            Ok(rec) => rec,
            Err(e) => RunRecord {
                eps: *eps,
                dt: f64::NAN,
                steps: 0,
                rows: Vec::new(),
                failure: Some(e.to_string()),
            },
        });
        elapsed.push(secs);
    }
    let fits = fits(&cfg.eps_list, &records);
    Ok(ConvergenceReport {
        config: cfg.clone(),
        reference_dt: reference.dt,
        records,
        fits,
        elapsed,
    })
}

/// Header of `summary.csv`.
pub fn summary_header() -> Vec<String> {
    let mut h = vec![
        "eps".to_string(),
        "status".into(),
        "dt".into(),
        "steps".into(),
    ];
    h.extend(SUMMARY_QUANTITIES.iter().map(|q| format!("sup_{q}")));
    h.push("corrected_over_tau_pair".into());
    h.push("reason".into());
    h
}

/// File name of the time series for one ε.
pub fn series_file(eps: f64) -> String {
    format!("series_eps_{eps}.csv")
}

impl ConvergenceReport {
    pub fn record(&self, eps: f64) -> Option<&RunRecord> {
        self.records.iter().find(|r| r.eps == eps)
    }

    pub fn fit(&self, quantity: &str) -> Option<&SlopeFit> {
        self.fits.iter().find(|f| f.quantity == quantity)
    }

    pub fn sups(&self, quantity: &str) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.sup(quantity)).collect()
    }

    pub fn summary_rows(&self) -> Vec<Vec<String>> {
        self.records
            .iter()
            .map(|r| {
                let mut row = vec![
                    fmt_value(Some(r.eps)),
                    if r.succeeded() {
                        "ok".into()
                    } else {
                        "failed".into()
                    },
                    fmt_value(Some(r.dt)),
                    r.steps.to_string(),
                ];
                row.extend(SUMMARY_QUANTITIES.iter().map(|q| fmt_value(r.sup(q))));
                let ratio = r
                    .sup("corrected")
                    .zip(r.sup("tau_pair"))
                    .map(|(c, t)| c / t);
                row.push(fmt_value(ratio));
                row.push(r.failure.clone().unwrap_or_default());
                row
            })
            .collect()
    }

    /// Writes `summary.csv`, `slopes.csv`, one series per ε and `events.ndjson`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let header = summary_header();
        let h: Vec<&str> = header.iter().map(String::as_str).collect();
        write_table(&dir.join("summary.csv"), &h, &self.summary_rows())?;
        let slopes: Vec<Vec<String>> = self
            .fits
            .iter()
            .map(|f| {
                vec![
                    f.quantity.clone(),
                    fmt_value(f.slope),
                    f.strictly_decreasing.to_string(),
                ]
            })
            .collect();
        write_table(
            &dir.join("slopes.csv"),
            &["quantity", "slope", "strictly_decreasing"],
            &slopes,
        )?;
        for r in &self.records {
            write_numeric_table(&dir.join(series_file(r.eps)), &SERIES_COLUMNS, &r.rows)?;
        }
        let mut log = EventLog::create(&dir.join("events.ndjson"))?;
        let c = &self.config;
        log.emit(json!({
            "event": "config",
            "grid": [c.grid.nx, c.grid.ny, c.grid.nz],
            "t_end": c.t_end,
            "eps_list": c.eps_list,
            "preset": c.initial_data.preset,
            "amplitude": c.initial_data.amplitude,
            "seed": c.seed,
        }))?;
        log.emit(
            json!({"event": "reference", "dt": self.reference_dt, "samples": c.numerics.samples}),
        )?;
        for (r, secs) in self.records.iter().zip(&self.elapsed) {
            log.emit(json!({
                "event": "run",
                "eps": r.eps,
                "status": if r.succeeded() { "ok" } else { "failed" },
                "dt": r.dt,
                "steps": r.steps,
                "reason": r.failure,
                "elapsed_s": secs,
            }))?;
        }
        for f in &self.fits {
            log.emit(json!({
                "event": "fit",
                "quantity": f.quantity,
                "slope": f.slope,
                "strictly_decreasing": f.strictly_decreasing,
            }))?;
        }
        log.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::{InitialData, Preset};
    use crate::experiments::runs::CPE_COLUMNS;
    use crate::grid::Grid;

    pub(crate) fn tiny(dir: &Path) -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        c.grid = Grid::new(8, 8, 4).unwrap();
        c.t_end = 0.02;
        c.eps_list = vec![0.2, 0.1];
        c.numerics.samples = 4;
        c.output_dir = dir.to_path_buf();
        c
    }

    #[test]
    fn columns_match_the_cpe_prefix() {
        assert_eq!(&SERIES_COLUMNS[..CPE_COLUMNS.len()], &CPE_COLUMNS);
        assert_eq!(column("corrected"), 13);
    }

    #[test]
    fn single_eps_gives_single_row() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = tiny(dir.path());
        c.eps_list = vec![0.1];
        let rep = run_convergence(&c).unwrap();
        assert_eq!(rep.summary_rows().len(), 1);
        let r = &rep.records[0];
        assert!(r.succeeded());
        assert_eq!(r.rows.len(), 5);
        // at t = 0 the raw and corrected errors vanish
        assert!(r.rows[0][column("raw")] < 1e-14);
        assert!(r.rows[0][column("corrected")] < 1e-12);
        assert!(rep
            .fits
            .iter()
            .all(|f| f.slope.is_none() && !f.strictly_decreasing));
    }

    #[test]
    fn failed_run_is_recorded_and_report_still_written() {
        let dir = tempfile::tempdir().unwrap();
        let c = tiny(dir.path());
        let reference = reference_runs(&c).unwrap();
        // e^{εξ} overflows on the first CPE step while the limit runs are fine
        let mut bad = c.clone();
        bad.initial_data = InitialData {
            preset: Preset::IllPrepared,
            amplitude: 1e5,
        };
        let rep = sweep(&bad, &reference).unwrap();
        assert!(rep.records.iter().all(|r| !r.succeeded()));
        assert!(rep.records[0]
            .failure
            .as_ref()
            .unwrap()
            .contains("integration failure"));
        rep.write(dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(1).unwrap().contains("failed"));
    }
}
