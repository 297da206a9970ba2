//! Picard iteration on the linearized system: coefficients are frozen from a guess
//! trajectory and the resulting linear problem is integrated with the same scheme.

use super::{
    pressure_factor, vertical_antiderivative, viscous_operator, CpeState, CpeStepper, CpeTendency,
    Propagator,
};
use crate::error::{Error, Result};
use crate::field::VectorField2;
use crate::params::PhysicalParams;
use crate::spectral::Spectral;

/// States at uniformly spaced times `t₀ + j·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<CpeState>,
}

impl Trajectory {
    /// The initial state held constant over `n_steps` steps up to `t_end`.
    pub fn constant(initial: &CpeState, t_end: f64, n_steps: usize) -> Self {
        let dt = (t_end - initial.time) / n_steps as f64;
        let states = (0..=n_steps)
            .map(|j| CpeState {
                time: initial.time + j as f64 * dt,
                ..initial.clone()
            })
            .collect();
        Trajectory { states }
    }

    /// Trajectory of the full stepper sampled at every step.
    pub fn direct(
        initial: &CpeState,
        t_end: f64,
        n_steps: usize,
        stepper: &mut CpeStepper<'_>,
    ) -> Result<Self> {
        let dt = (t_end - initial.time) / n_steps as f64;
        let mut states = vec![initial.clone()];
        for _ in 0..n_steps {
            let next = stepper.step(states.last().unwrap(), dt)?;
            states.push(next);
        }
        Ok(Trajectory { states })
    }

    pub fn dt(&self) -> f64 {
        let n = self.states.len();
        if n < 2 {
            return 0.0;
        }
        (self.states[n - 1].time - self.states[0].time) / (n - 1) as f64
    }

    /// Linear interpolation between samples.
    pub fn at(&self, t: f64) -> CpeState {
        let t0 = self.states[0].time;
        let dt = self.dt();
        if dt == 0.0 {
            return self.states[0].clone();
        }
        let x = ((t - t0) / dt).clamp(0.0, (self.states.len() - 1) as f64);
        let j = (x.floor() as usize).min(self.states.len() - 2);
        let th = x - j as f64;
        let (a, b) = (&self.states[j], &self.states[j + 1]);
        let mut s = a.clone();
        s.xi = &a.xi * (1.0 - th) + &(&b.xi * th);
        s.v = &a.v * (1.0 - th) + &(&b.v * th);
        s.time = t;
        s
    }
}

/// Norm of the difference of two trajectories in the fixed-point space:
/// `(sup‖Δξ‖² + sup‖Δv‖² + ∫‖∇Δv‖²)^{1/2}`, the time integral by the trapezoid rule.
pub fn y_norm(a: &Trajectory, b: &Trajectory) -> f64 {
    assert_eq!(
        a.states.len(),
        b.states.len(),
        "trajectories differ in length"
    );
    let dt = a.dt();
    let mut sxi = 0.0f64;
    let mut sv = 0.0f64;
    let mut grad = Vec::with_capacity(a.states.len());
    for (x, y) in a.states.iter().zip(&b.states) {
        sxi = sxi.max((&x.xi - &y.xi).sobolev_norm_sq(0));
        let dv = &x.v - &y.v;
        sv = sv.max(dv.sobolev_norm_sq(0));
        grad.push(dv.sobolev_norm_sq(1) - dv.sobolev_norm_sq(0));
    }
    let integral: f64 = grad.windows(2).map(|w| 0.5 * dt * (w[0] + w[1])).sum();
    (sxi + sv + integral).sqrt()
}

/// Grid data of a guess sample needed by the linearized right-hand side.
struct Frozen {
    vbar: (Vec<f64>, Vec<f64>),
    div_vbar: crate::field::ScalarField2,
    vel: (Vec<f64>, Vec<f64>),
    w: Vec<f64>,
    visc_factor: Vec<f64>,
    pressure: VectorField2,
}

fn freeze(g: &CpeState, params: &PhysicalParams, sp: &Spectral) -> Frozen {
    let grid = sp.grid();
    let eps = params.eps();
    let vbar = g.v.z_average();
    let w = sp.to_real3(&vertical_antiderivative(&super::vertical_source(
        &g.xi, &g.v, params, sp,
    )));
    let xi_p = sp.to_real2(&g.xi);
    let gx = sp.to_real2(&g.xi.dx());
    let gy = sp.to_real2(&g.xi.dy());
    let c2 = params.c2();
    let (px, py): (Vec<f64>, Vec<f64>) = (0..grid.n2())
        .map(|h| {
            let f = -c2 * pressure_factor(xi_p[h], eps);
            (f * gx[h], f * gy[h])
        })
        .unzip();
    let mut pressure = VectorField2::new(sp.from_real2(&px), sp.from_real2(&py));
    pressure.dealias(grid);
    pressure.axpy(-c2 / eps, &g.xi.grad());
    let ea = eps * params.alpha();
    let visc_factor = xi_p
        .iter()
        .map(|&x| params.c1() * (-ea * x).exp_m1())
        .collect();
    Frozen {
        vbar: (sp.to_real2(&vbar.x), sp.to_real2(&vbar.y)),
        div_vbar: vbar.div(),
        vel: sp.to_real_vec3(&g.v),
        w,
        visc_factor,
        pressure,
    }
}

/// Right-hand side of the linearized system minus the constant viscosity.
fn linear_forcing(
    fz: &Frozen,
    u: &CpeState,
    params: &PhysicalParams,
    sp: &Spectral,
) -> CpeTendency {
    let grid = sp.grid();
    let (nz, n3) = (grid.nz, grid.n3());
    let gx = sp.to_real2(&u.xi.dx());
    let gy = sp.to_real2(&u.xi.dy());
    let adv: Vec<f64> = (0..grid.n2())
        .map(|h| -(fz.vbar.0[h] * gx[h] + fz.vbar.1[h] * gy[h]))
        .collect();
    let mut xi_t = sp.from_real2(&adv).dealiased(grid);
    xi_t.axpy(-(params.gamma() - 1.0) / params.eps(), &fz.div_vbar);

    let v = &u.v;
    let (dxvx, dyvx) = sp.to_real3_pair(&v.x.dx(), &v.x.dy());
    let (dxvy, dyvy) = sp.to_real3_pair(&v.y.dx(), &v.y.dy());
    let (dzvx, dzvy) = sp.to_real3_pair(&v.x.dz(), &v.y.dz());
    let (visx, visy) = sp.to_real_vec3(&viscous_operator(v, params));
    let (a, b) = (&fz.vel.0, &fz.vel.1);
    let mut ax = vec![0.0; n3];
    let mut ay = vec![0.0; n3];
    for p in 0..n3 {
        let f = fz.visc_factor[p / nz];
        ax[p] = -(a[p] * dxvx[p] + b[p] * dyvx[p] + fz.w[p] * dzvx[p]) + f * visx[p];
        ay[p] = -(a[p] * dxvy[p] + b[p] * dyvy[p] + fz.w[p] * dzvy[p]) + f * visy[p];
    }
    let mut v_t = sp.from_real_vec3(&ax, &ay);
    v_t.dealias(grid);
    v_t.add_broadcast(1.0, &fz.pressure);
    CpeTendency { xi: xi_t, v: v_t }
}

/// One application of the fixed-point map: solve the linear system driven by `guess`.
pub fn picard_step(
    guess: &Trajectory,
    params: &PhysicalParams,
    sp: &Spectral,
) -> Result<Trajectory> {
    let n = guess.states.len();
    if n < 2 {
        return Err(Error::Domain(
            "guess trajectory needs at least two samples".into(),
        ));
    }
    let h = guess.dt();
    let prop = Propagator::viscous_only(h, params, sp.grid());
    let mut states = Vec::with_capacity(n);
    states.push(guess.states[0].clone());
    let mut fz_now = freeze(&guess.states[0], params, sp);
    for j in 0..n - 1 {
        let u = &states[j];
        let fz_next = freeze(&guess.states[j + 1], params, sp);
        let f1 = linear_forcing(&fz_now, u, params, sp);
        let mut pred = u.clone();
        pred.axpy(h, &f1);
        prop.apply(&mut pred);
        let f2 = linear_forcing(&fz_next, &pred, params, sp);
        let mut next = u.clone();
        next.axpy(0.5 * h, &f1);
        prop.apply(&mut next);
        next.axpy(0.5 * h, &f2);
        next.time = guess.states[j + 1].time;
        next.enforce_invariants(sp.grid());
        if !next.is_finite() {
            return Err(Error::Integration {
                time: next.time,
                reason: "non-finite Picard iterate".into(),
            });
        }
        states.push(next);
        fz_now = fz_next;
    }
    Ok(Trajectory { states })
}

/// History of a Picard run.
#[derive(Debug, Clone)]
pub struct PicardReport {
    pub trajectory: Trajectory,
    /// `‖𝒯ⁿ⁺¹ − 𝒯ⁿ‖` in the fixed-point norm, one entry per iteration.
    pub differences: Vec<f64>,
    /// Ratios of successive differences.
    pub ratios: Vec<f64>,
    pub converged: bool,
}

impl PicardReport {
    /// Longest run of consecutive ratios at or below `q`.
    pub fn contracting_run(&self, q: f64) -> usize {
        let mut best = 0;
        let mut cur = 0;
        for &r in &self.ratios {
            if r <= q {
                cur += 1;
                best = best.max(cur);
            } else {
                cur = 0;
            }
        }
        best
    }
}

/// Iterates the fixed-point map from the constant guess until successive iterates agree to
/// `rel_tol` (relative to the iterate), or `max_iter` is reached.
///
/// Early iterates may grow while the frozen acoustic coupling is resolved; the run is declared
/// non-contracting when two successive ratios exceed one without decreasing.
pub fn picard_iterate(
    initial: &CpeState,
    t_end: f64,
    n_steps: usize,
    params: &PhysicalParams,
    sp: &Spectral,
    max_iter: usize,
    rel_tol: f64,
) -> Result<PicardReport> {
    let mut guess = Trajectory::constant(initial, t_end, n_steps);
    let zero = Trajectory {
        states: guess
            .states
            .iter()
            .map(|s| CpeState {
                time: s.time,
                ..CpeState::zeros(sp.grid())
            })
            .collect(),
    };
    let mut differences = Vec::new();
    let mut ratios: Vec<f64> = Vec::new();
    for it in 0..max_iter {
        let next = picard_step(&guess, params, sp)?;
        let d = y_norm(&next, &guess);
        if let Some(&prev) = differences.last() {
            let r = if prev > 0.0 { d / prev } else { 0.0 };
            let n = ratios.len();
            if n >= 1 && r > 1.0 && ratios[n - 1] > 1.0 && r >= ratios[n - 1] {
                return Err(Error::NonContraction {
                    iterations: it + 1,
                    ratio: r,
                });
            }
            ratios.push(r);
        }
        differences.push(d);
        let scale = y_norm(&next, &zero);
        guess = next;
        if d <= rel_tol * scale.max(f64::MIN_POSITIVE) {
            return Ok(PicardReport {
                trajectory: guess,
                differences,
                ratios,
                converged: true,
            });
        }
    }
    Ok(PicardReport {
        trajectory: guess,
        differences,
        ratios,
        converged: false,
    })
}
