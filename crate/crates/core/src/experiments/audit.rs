//! Resonance table export and the empty-set verification counts.

use std::path::Path;

use super::report::write_table;
use crate::error::Result;
use crate::grid::{sg_nonzero, Lattice};
use crate::oscillation::resonance::{audit, enumerate_resonant, ResonanceAudit, ResonantTriple};
use crate::params::PhysicalParams;

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub k_max: f64,
    pub counts: ResonanceAudit,
    pub triples: Vec<ResonantTriple>,
    /// Every listed triple is co-linear.
    pub all_colinear: bool,
    /// The triples on the ray through (1, 0) are exactly the nonzero integer pairs `(a, b)`, `a + b ≠ 0`.
    pub axis_matches_1d: bool,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.counts.characterization_violations == 0
            && self.counts.reversed_members == 0
            && self.counts.difference_members == 0
            && self.all_colinear
            && self.axis_matches_1d
    }
}

/// `c(γ+1)/(2√(γ−1+c²))·sg(l)|l|`; the `+` branch is multiplied by `−i` times this, the `−` branch by `+i`.
pub fn q2_coefficient(l: Lattice, params: &PhysicalParams) -> f64 {
    let cq =
        params.c() * (params.gamma() + 1.0) / (2.0 * (params.gamma() - 1.0 + params.c2()).sqrt());
    cq * sg_nonzero(l) as f64 * l.length()
}

fn axis_check(triples: &[ResonantTriple], k_max: f64) -> bool {
    let n = (k_max / std::f64::consts::TAU * (1.0 + 1e-12)).floor() as i64;
    let mut on_axis: Vec<(i64, i64)> = triples
        .iter()
        .filter(|t| t.direction == Lattice(1, 0))
        .map(|t| (t.k.0, t.l.0))
        .collect();
    on_axis.sort_unstable();
    let mut brute = Vec::new();
    for a in -n..=n {
        for b in -n..=n {
            if a != 0 && b != 0 && a + b != 0 {
                brute.push((a, b));
            }
        }
    }
    on_axis == brute
}

/// Exhaustive sweep over `|k|, |l| ≤ k_max` (wavenumber units).
pub fn run_resonance_audit(k_max: f64) -> AuditReport {
    let counts = audit(k_max);
    let triples = enumerate_resonant(k_max);
    let all_colinear = triples
        .iter()
        .all(|t| t.k.cross(t.l) == 0 && t.k.cross(t.m) == 0);
    let axis_matches_1d = axis_check(&triples, k_max);
    AuditReport {
        k_max,
        counts,
        triples,
        all_colinear,
        axis_matches_1d,
    }
}

fn pair(k: Lattice) -> String {
    format!("({} {})", k.0, k.1)
}

impl AuditReport {
    /// `resonance_triples.csv` (k, l, m as integer index pairs in units of 2π, and the Q₂ coefficient)
    /// and `resonance_summary.csv`.
    pub fn write(&self, dir: &Path, params: &PhysicalParams) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let rows: Vec<Vec<String>> = self
            .triples
            .iter()
            .map(|t| {
                vec![
                    pair(t.k),
                    pair(t.l),
                    pair(t.m),
                    format!("{:e}", q2_coefficient(t.l, params)),
                ]
            })
            .collect();
        write_table(
            &dir.join("resonance_triples.csv"),
            &["k", "l", "m", "coefficient"],
            &rows,
        )?;
        let c = &self.counts;
        let summary = vec![vec![
            format!("{:e}", self.k_max),
            c.pairs.to_string(),
            c.resonant.to_string(),
            c.characterization_violations.to_string(),
            c.reversed_members.to_string(),
            c.difference_members.to_string(),
            self.all_colinear.to_string(),
            self.axis_matches_1d.to_string(),
        ]];
        write_table(
            &dir.join("resonance_summary.csv"),
            &[
                "k_max",
                "pairs",
                "resonant",
                "characterization_violations",
                "reversed_members",
                "difference_members",
                "all_colinear",
                "axis_matches_1d",
            ],
            &summary,
        )
    }
}
