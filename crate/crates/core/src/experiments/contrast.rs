//! Acoustic size along CPE runs alone: `sup_t(‖ξ_ε‖_{H¹} + ‖P_τv_ε‖_{H¹})` per ε and its log-log fit.
//! No limit runs are needed, so the output grid can be fine enough to resolve the initial layer.

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::report::{fmt_value, loglog_slope, strictly_decreasing, write_table};
use super::runs::{simulate, CPE_COLUMNS};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct ContrastRow {
    pub eps: f64,
    /// `None` if the run stopped early.
    pub sup_acoustic: Option<f64>,
    /// Time at which the sup is attained.
    pub t_sup: f64,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContrastReport {
    pub rows: Vec<ContrastRow>,
    pub slope: Option<f64>,
    pub strictly_decreasing: bool,
}

pub fn run_contrast(cfg: &ExperimentConfig) -> Result<ContrastReport> {
    cfg.validate()?;
    let col = CPE_COLUMNS
        .iter()
        .position(|c| *c == "acoustic")
        .expect("acoustic column");
    let sims = cfg
        .eps_list
        .par_iter()
        .map(|&e| simulate(cfg, e))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<ContrastRow> = sims
        .into_iter()
        .map(|s| {
            let (t_sup, sup) = s
                .rows
                .iter()
                .map(|r| (r[0], r[col]))
                .fold((0.0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
            ContrastRow {
                eps: s.eps,
                sup_acoustic: s.failure.is_none().then_some(sup),
                t_sup,
                failure: s.failure,
            }
        })
        .collect();
    let ok: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.sup_acoustic.map(|s| (r.eps, s)))
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = ok.into_iter().unzip();
    let all_ok = rows.iter().all(|r| r.sup_acoustic.is_some());
    Ok(ContrastReport {
        slope: loglog_slope(&xs, &ys),
        strictly_decreasing: all_ok && strictly_decreasing(&ys),
        rows,
    })
}

impl ContrastReport {
    /// `contrast.csv`: one row per ε, then a `fit` row carrying the slope.
    pub fn write(&self, path: &std::path::Path) -> Result<()> {
        let mut rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    fmt_value(Some(r.eps)),
                    fmt_value(r.sup_acoustic),
                    fmt_value(Some(r.t_sup)),
                    r.failure.clone().unwrap_or_default(),
                ]
            })
            .collect();
        rows.push(vec![
            "fit".into(),
            fmt_value(self.slope),
            String::new(),
            self.strictly_decreasing.to_string(),
        ]);
        write_table(path, &["eps", "sup_acoustic", "t_sup", "note"], &rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::Preset;
    use crate::grid::Grid;

    #[test]
    fn well_prepared_starts_at_zero_and_grows() {
        let mut c = ExperimentConfig::default();
        c.grid = Grid::new(8, 8, 4).unwrap();
        c.t_end = 0.01;
        c.numerics.samples = 10;
        c.eps_list = vec![0.05, 0.025];
        c.initial_data.preset = Preset::WellPrepared;
        let r = run_contrast(&c).unwrap();
        assert_eq!(r.rows.len(), 2);
        for row in &r.rows {
            assert!(row.sup_acoustic.unwrap() > 0.0);
            assert!(row.t_sup > 0.0);
        }
        assert!(r.slope.is_some());
    }
}
