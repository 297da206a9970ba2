//! The resonance-filtered limit operators `𝒜(D), 𝒬₁, 𝒬₂, 𝒬₃` on mode coefficients and the
//! stepper for `∂ₜV + 𝒬₁(v_p, V) + 𝒬₂(V, V) + 𝒬₃(g, V) − 𝒜(D)V = 0`.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;

use super::resonance::ray_of;
use crate::acoustic::{Branch, ModeCoefficients};
use crate::error::{Error, Result};
use crate::field::VectorField2;
use crate::grid::{sg_nonzero, Grid, Lattice};
use crate::params::PhysicalParams;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A pair `k → m` on the same circle `|m| = |k|`, with `l = m − k`.
#[derive(Debug, Clone, Copy)]
struct CircleLink {
    k: Lattice,
    m: Lattice,
    l: Lattice,
    /// `(m·k)/|k|²`
    geom: f64,
    same_branch: bool,
}

/// One ray through the origin: the band points `n·d`, `n ≠ 0`, with `d` primitive and `sg(d) = 1`.
#[derive(Debug, Clone)]
struct Ray {
    dir: Lattice,
    d_len: f64,
    steps: Vec<i64>,
    points: Vec<Lattice>,
}

/// Precomputed interaction tables on the dealiased band of a grid.
#[derive(Debug, Clone)]
pub struct LimitOperators {
    params: PhysicalParams,
    grid: Grid,
    circle: Vec<CircleLink>,
    rays: Vec<Ray>,
}

impl LimitOperators {
    pub fn new(grid: &Grid, params: &PhysicalParams) -> Self {
        let band = grid.band_modes();
        let mut by_norm: HashMap<i64, Vec<Lattice>> = HashMap::new();
        for &k in &band {
            by_norm.entry(k.norm2()).or_default().push(k);
        }
        let mut circle = Vec::new();
        for &k in &band {
            for &m in &by_norm[&k.norm2()] {
                circle.push(CircleLink {
                    k,
                    m,
                    l: m - k,
                    geom: m.dot(k) as f64 / k.norm2() as f64,
                    same_branch: sg_nonzero(m) == sg_nonzero(k),
                });
            }
        }
        let mut rays: HashMap<Lattice, Vec<(i64, Lattice)>> = HashMap::new();
        for &k in &band {
            let (d, n) = ray_of(k).expect("band modes are nonzero");
            rays.entry(d).or_default().push((n, k));
        }
        let mut rays: Vec<Ray> = rays
            .into_iter()
            .map(|(d, mut pts)| {
                pts.sort_by_key(|p| p.0);
                Ray {
                    dir: d,
                    d_len: d.length(),
                    steps: pts.iter().map(|p| p.0).collect(),
                    points: pts.iter().map(|p| p.1).collect(),
                }
            })
            .collect();
        rays.sort_by(|a, b| {
            a.points[0]
                .0
                .cmp(&b.points[0].0)
                .then(a.points[0].1.cmp(&b.points[0].1))
        });
        LimitOperators {
            params: *params,
            grid: *grid,
            circle,
            rays,
        }
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Number of primitive rays meeting the band.
    pub fn ray_count(&self) -> usize {
        self.rays.len()
    }

    /// Exponent of `𝒜(D)`: `−(μ+λ)c₁|k|²/2`.
    pub fn a_rate(&self, k: Lattice) -> f64 {
        let p = &self.params;
        -0.5 * (p.mu() + p.lambda()) * p.c1() * k.length().powi(2)
    }

    /// `a_k^± ↦ −(μ+λ)c₁|k|²/2 · a_k^±`.
    pub fn limit_a(&self, v: &ModeCoefficients) -> ModeCoefficients {
        v.map(|k, _| Complex64::new(self.a_rate(k), 0.0))
    }

    /// `a_k^± ↦ ∓ i c g √(γ−1)/2 · sg(k)|k| · a_k^±`.
    pub fn limit_q3(&self, g: f64, v: &ModeCoefficients) -> ModeCoefficients {
        let p = &self.params;
        let base = p.c() * g * (p.gamma() - 1.0).sqrt() / 2.0;
        v.map(|k, b| -I * (b.sign() * base * sg_nonzero(k) as f64 * k.length()))
    }

    /// `𝒬₁(v_p, V)` with `ubar = ∫₀¹ v_p dz`: transfers along circles `|m| = |k|` with weight
    /// `i(û_l·k)(m·k)/|k|²`, same branch when `sg(m) = sg(k)` and the opposite one otherwise.
    pub fn limit_q1(&self, ubar: &VectorField2, v: &ModeCoefficients) -> ModeCoefficients {
        let (nx, ny) = v.dims();
        let mut out = ModeCoefficients::zeros(nx, ny);
        for c in &self.circle {
            let ul = (ubar.x.get(c.l), ubar.y.get(c.l));
            let kk = c.k.wavevector();
            let w = I * (ul.0 * kk[0] + ul.1 * kk[1]) * c.geom;
            if w == Complex64::new(0.0, 0.0) {
                continue;
            }
            for b in Branch::BOTH {
                let to = if c.same_branch { b } else { b.flip() };
                out.add_at(c.m, to, w * v.get(c.k, b));
            }
        }
        out
    }

    /// `𝒬₂(V₁, V₂)` summed over resonant triads `m = k + l` (co-linear), same branch only, with
    /// weight `∓ i c(γ+1)/(2√(γ−1+c²)) · sg(l)|l|`. Computed as 1D convolutions along rays.
    pub fn limit_q2(&self, v1: &ModeCoefficients, v2: &ModeCoefficients) -> ModeCoefficients {
        let p = &self.params;
        let cq = p.c() * (p.gamma() + 1.0) / (2.0 * (p.gamma() - 1.0 + p.c2()).sqrt());
        let (nx, ny) = v1.dims();
        let grid = &self.grid;
        let parts: Vec<Vec<(Lattice, Branch, Complex64)>> = self
            .rays
            .par_iter()
            .map(|ray| {
                let mut acc = Vec::new();
                let n = ray.points.len();
                for b in Branch::BOTH {
                    let a1: Vec<Complex64> = ray.points.iter().map(|&k| v1.get(k, b)).collect();
                    let a2: Vec<Complex64> = ray.points.iter().map(|&k| v2.get(k, b)).collect();
                    let mut sums: HashMap<i64, Complex64> = HashMap::new();
                    for i in 0..n {
                        if a1[i] == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        for j in 0..n {
                            let s = ray.steps[i] + ray.steps[j];
                            if s == 0 || a2[j] == Complex64::new(0.0, 0.0) {
                                continue;
                            }
                            let w = -I * (b.sign() * cq * ray.d_len * ray.steps[j] as f64);
                            *sums.entry(s).or_default() += w * a1[i] * a2[j];
                        }
                    }
                    for (s, val) in sums {
                        let m = Lattice(ray.dir.0 * s, ray.dir.1 * s);
                        if grid.in_band(m) {
                            acc.push((m, b, val));
                        }
                    }
                }
                acc
            })
            .collect();
        let mut out = ModeCoefficients::zeros(nx, ny);
        for (m, b, val) in parts.into_iter().flatten() {
            out.add_at(m, b, val);
        }
        out
    }
}

/// `(V^o, g^o)` at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct OscState {
    pub modes: ModeCoefficients,
    pub g: f64,
    pub time: f64,
}

/// Switches for the explicit terms, used by verification runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LimitTerms {
    pub q1: bool,
    pub q2: bool,
    pub q3: bool,
}

impl Default for LimitTerms {
    fn default() -> Self {
        LimitTerms {
            q1: true,
            q2: true,
            q3: true,
        }
    }
}

/// Sampled vertical means `∫₀¹ v_p dz`, linearly interpolated in time.
#[derive(Debug, Clone, Default)]
pub struct VpHistory {
    times: Vec<f64>,
    ubar: Vec<VectorField2>,
}

impl VpHistory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a sample; times must increase.
    pub fn push(&mut self, t: f64, ubar: VectorField2) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::Domain(format!(
                    "history times must increase: {t} after {last}"
                )));
            }
        }
        self.times.push(t);
        self.ubar.push(ubar);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn at(&self, t: f64) -> Result<VectorField2> {
        let n = self.times.len();
        if n == 0 {
            return Err(Error::Domain("empty v_p history".into()));
        }
        let tol = 1e-12 * (1.0 + t.abs());
        if t < self.times[0] - tol || t > self.times[n - 1] + tol {
            return Err(Error::Domain(format!(
                "time {t} outside the v_p history [{}, {}]",
                self.times[0],
                self.times[n - 1]
            )));
        }
        if n == 1 {
            return Ok(self.ubar[0].clone());
        }
        let j = self.times.partition_point(|&s| s <= t).clamp(1, n - 1);
        let (t0, t1) = (self.times[j - 1], self.times[j]);
        let th = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        let mut out = &self.ubar[j - 1] * (1.0 - th);
        out.axpy(th, &self.ubar[j]);
        Ok(out)
    }
}

/// Lawson-Heun stepper with the exact `e^{𝒜(D)h}` factor; `g` is held at `g^o`.
#[derive(Debug, Clone)]
pub struct OscillationStepper<'a> {
    ops: &'a LimitOperators,
    terms: LimitTerms,
}

impl<'a> OscillationStepper<'a> {
    pub fn new(ops: &'a LimitOperators) -> Self {
        Self::with_terms(ops, LimitTerms::default())
    }

    pub fn with_terms(ops: &'a LimitOperators, terms: LimitTerms) -> Self {
        OscillationStepper { ops, terms }
    }

    pub fn operators(&self) -> &LimitOperators {
        self.ops
    }

    /// `−𝒬₁(ū, V) − 𝒬₂(V, V) − 𝒬₃(g, V)`.
    pub fn explicit(&self, v: &ModeCoefficients, g: f64, ubar: &VectorField2) -> ModeCoefficients {
        let (nx, ny) = v.dims();
        let mut out = ModeCoefficients::zeros(nx, ny);
        let m1 = Complex64::new(-1.0, 0.0);
        if self.terms.q1 {
            out.axpy(m1, &self.ops.limit_q1(ubar, v));
        }
        if self.terms.q2 {
            out.axpy(m1, &self.ops.limit_q2(v, v));
        }
        if self.terms.q3 {
            out.axpy(m1, &self.ops.limit_q3(g, v));
        }
        out
    }

    fn damp(&self, v: &ModeCoefficients, h: f64) -> ModeCoefficients {
        v.map(|k, _| Complex64::new((self.ops.a_rate(k) * h).exp(), 0.0))
    }

    pub fn step(
        &self,
        state: &OscState,
        ubar_now: &VectorField2,
        ubar_next: &VectorField2,
        h: f64,
    ) -> Result<OscState> {
        if !(h > 0.0) {
            return Err(Error::Domain(format!(
                "step size must be positive, got {h}"
            )));
        }
        let one = Complex64::new(1.0, 0.0);
        let n1 = self.explicit(&state.modes, state.g, ubar_now);
        let mut pred = state.modes.clone();
        pred.axpy(h * one, &n1);
        let pred = self.damp(&pred, h);
        let n2 = self.explicit(&pred, state.g, ubar_next);
        let mut next = state.modes.clone();
        next.axpy(0.5 * h * one, &n1);
        let mut next = self.damp(&next, h);
        next.axpy(0.5 * h * one, &n2);
        next.truncate(&self.ops.grid);
        next.make_real();
        if !next.is_finite() {
            return Err(Error::Integration {
                time: state.time + h,
                reason: "non-finite oscillation modes".into(),
            });
        }
        Ok(OscState {
            modes: next,
            g: state.g,
            time: state.time + h,
        })
    }

    /// Advances to `t_end` in equal steps no longer than `dt_max`, reading `ū` from `history`.
    pub fn advance(
        &self,
        state: &OscState,
        history: &VpHistory,
        t_end: f64,
        dt_max: f64,
    ) -> Result<OscState> {
        let span = t_end - state.time;
        if span <= 0.0 {
            return Ok(state.clone());
        }
        let n = (span / dt_max * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let h = span / n as f64;
        let mut s = state.clone();
        let mut u0 = history.at(s.time)?;
        for j in 0..n {
            let t1 = if j + 1 == n {
                t_end
            } else {
                state.time + (j + 1) as f64 * h
            };
            let u1 = history.at(t1)?;
            s = self.step(&s, &u0, &u1, t1 - s.time)?;
            s.time = t1;
            u0 = u1;
        }
        Ok(s)
    }
}

/// One step of the limit oscillation equation with all terms.
pub fn step_limit_oscillation(
    ops: &LimitOperators,
    state: &OscState,
    ubar_now: &VectorField2,
    ubar_next: &VectorField2,
    dt: f64,
) -> Result<OscState> {
    OscillationStepper::new(ops).step(state, ubar_now, ubar_next, dt)
}
