//! Time integration of the ε-perturbation system on T² × 2T.
//!
//! Unknowns are ξ (z-independent) and the horizontal velocity v (even in z). The 1/ε acoustic
//! block and the constant-coefficient viscosity are propagated exactly mode by mode; the rest
//! is advanced with a Lawson (integrating factor) Heun step.

mod picard;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::acoustic::AcousticState;
use crate::error::{Error, Result};
use crate::field::{ScalarField2, ScalarField3, VectorField2, VectorField3};
use crate::grid::Grid;
use crate::params::PhysicalParams;
use crate::projections::project_tau2;
use crate::spectral::Spectral;

pub use picard::{picard_iterate, picard_step, y_norm, PicardReport, Trajectory};

/// Solution of the ε-perturbation system at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct CpeState {
    pub xi: ScalarField2,
    pub v: VectorField3,
    pub time: f64,
}

/// Time derivative of a [`CpeState`].
#[derive(Debug, Clone, PartialEq)]
pub struct CpeTendency {
    pub xi: ScalarField2,
    pub v: VectorField3,
}

impl CpeTendency {
    pub fn zeros(g: &Grid) -> Self {
        CpeTendency {
            xi: ScalarField2::zeros_like_grid(g),
            v: VectorField3::zeros_like_grid(g),
        }
    }
}

impl CpeState {
    pub fn zeros(g: &Grid) -> Self {
        CpeState {
            xi: ScalarField2::zeros_like_grid(g),
            v: VectorField3::zeros_like_grid(g),
            time: 0.0,
        }
    }

    pub fn axpy(&mut self, a: f64, t: &CpeTendency) {
        self.xi.axpy(a, &t.xi);
        self.v.axpy(a, &t.v);
    }

    pub fn is_finite(&self) -> bool {
        self.xi.is_finite() && self.v.is_finite()
    }

    /// Restores reality, evenness in z and the dealiased band.
    pub fn enforce_invariants(&mut self, g: &Grid) {
        self.xi.dealias(g);
        self.xi.make_real();
        self.v = self.v.enforce_even();
        self.v.dealias(g);
        self.v.make_real();
    }

    /// Mean of ξ over T², the quantity g_ε.
    pub fn xi_mean(&self) -> f64 {
        self.xi.mean()
    }
}

/// Energy quantities monitored along a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    /// `½‖v‖² + c²/(γ−1)‖ξ‖²`.
    pub e_l2: f64,
    /// Same with H² norms.
    pub e_h2: f64,
    /// `c₁(μ‖∇ₕv‖² + λ‖divₕv‖² + ‖∂_z v‖²)`.
    pub dissipation: f64,
}

pub fn energy(state: &CpeState, params: &PhysicalParams) -> EnergyReport {
    let w = params.c2() / (params.gamma() - 1.0);
    let e_l2 = 0.5 * state.v.sobolev_norm_sq(0) + w * state.xi.sobolev_norm_sq(0);
    let e_h2 = 0.5 * state.v.sobolev_norm_sq(2) + w * state.xi.sobolev_norm_sq(2);
    let mut grad = 0.0;
    let mut dz = 0.0;
    for f in [&state.v.x, &state.v.y] {
        for (k, n, c) in f.modes() {
            grad += k.length().powi(2) * c.norm_sqr();
            dz += (PI * n as f64).powi(2) * c.norm_sqr();
        }
    }
    let div = state.v.div_h().sobolev_norm_sq(0);
    let dissipation = params.c1() * (params.mu() * grad + params.lambda() * div + dz);
    EnergyReport {
        e_l2,
        e_h2,
        dissipation,
    }
}

/// Advective CFL step `C·h/‖v‖_∞`, capped at `dt_max`.
pub fn stability_dt(state: &CpeState, sp: &Spectral, cfl: f64, dt_max: f64) -> f64 {
    let vmax = max_speed(&state.v, sp);
    if vmax <= 0.0 {
        return dt_max;
    }
    (cfl * sp.grid().spacing() / vmax).min(dt_max)
}

pub(crate) fn max_speed(v: &VectorField3, sp: &Spectral) -> f64 {
    let (a, b) = sp.to_real_vec3(v);
    a.iter()
        .zip(&b)
        .map(|(x, y)| (x * x + y * y).sqrt())
        .fold(0.0, f64::max)
}

/// `−∫₀^z f dz′` for an even f with no z-mean; returns an odd field.
pub fn vertical_antiderivative(f: &ScalarField3) -> ScalarField3 {
    let nz = f.dims().2;
    f.map_modes(|_, n, c| {
        if n == 0 || n.unsigned_abs() as usize * 2 == nz {
            Complex64::new(0.0, 0.0)
        } else {
            c * Complex64::new(0.0, 1.0 / (PI * n as f64))
        }
    })
    .odd_part()
}

/// Vertical velocity `w = −∫₀^z (εα ṽ·∇ₕξ + divₕ ṽ) dz′`.
pub fn reconstruct_w(
    xi: &ScalarField2,
    v: &VectorField3,
    params: &PhysicalParams,
    sp: &Spectral,
) -> ScalarField3 {
    vertical_antiderivative(&vertical_source(xi, v, params, sp))
}

/// `εα ṽ·∇ₕξ + divₕ ṽ`, product dealiased.
pub fn vertical_source(
    xi: &ScalarField2,
    v: &VectorField3,
    params: &PhysicalParams,
    sp: &Spectral,
) -> ScalarField3 {
    let vt = v.z_fluctuation();
    let mut f = vt.div_h();
    let ea = params.eps() * params.alpha();
    if ea != 0.0 && xi.max_abs() > 0.0 {
        let g = sp.grid();
        let gx = sp.to_real2(&xi.dx());
        let gy = sp.to_real2(&xi.dy());
        let (a, b) = sp.to_real_vec3(&vt);
        let nz = g.nz;
        let prod: Vec<f64> = (0..g.n3())
            .map(|p| a[p] * gx[p / nz] + b[p] * gy[p / nz])
            .collect();
        let pf = sp.from_real3(&prod).dealiased(g);
        f.axpy(ea, &pf);
    }
    f
}

/// `(expm1(x) − x)/x²`, accurate near zero.
#[inline]
pub(crate) fn phi2(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x / 120.0))
    } else {
        (x.exp_m1() - x) / (x * x)
    }
}

/// `(e^{εξ} − 1)/ε` written as `ξ + εξ²φ(εξ)` so nothing of size 1/ε is cancelled.
#[inline]
pub(crate) fn pressure_factor(xi: f64, eps: f64) -> f64 {
    xi + eps * xi * xi * phi2(eps * xi)
}

/// Constant-coefficient viscous operator `μΔₕv + λ∇ₕdivₕv + ∂_zz v` (without c₁).
pub fn viscous_operator(v: &VectorField3, params: &PhysicalParams) -> VectorField3 {
    let mut out = &v.laplacian_h() * params.mu();
    out.axpy(params.lambda(), &v.grad_div());
    out += &v.map(ScalarField3::dzz);
    out
}

/// Switches for the split terms, used by verification runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOptions {
    pub nonlinear: bool,
    pub viscous: bool,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions {
            nonlinear: true,
            viscous: true,
        }
    }
}

/// Everything except the exactly propagated linear part, dealiased.
fn nonlinear_terms(
    state: &CpeState,
    params: &PhysicalParams,
    sp: &Spectral,
    viscous: bool,
) -> CpeTendency {
    let g = sp.grid();
    let (nz, n3) = (g.nz, g.n3());
    let eps = params.eps();
    let v = &state.v;

    let xi_p = sp.to_real2(&state.xi);
    let gx = sp.to_real2(&state.xi.dx());
    let gy = sp.to_real2(&state.xi.dy());
    let vbar = v.z_average();
    let vbx = sp.to_real2(&vbar.x);
    let vby = sp.to_real2(&vbar.y);

    // ξ tendency: −v̄·∇ξ
    let nxi: Vec<f64> = (0..g.n2())
        .map(|h| -(vbx[h] * gx[h] + vby[h] * gy[h]))
        .collect();
    let xi_t = sp.from_real2(&nxi).dealiased(g);

    let (vx, vy) = sp.to_real_vec3(v);
    let (dxvx, dyvx) = sp.to_real3_pair(&v.x.dx(), &v.x.dy());
    let (dxvy, dyvy) = sp.to_real3_pair(&v.y.dx(), &v.y.dy());
    let (dzvx, dzvy) = sp.to_real3_pair(&v.x.dz(), &v.y.dz());

    // vertical velocity from ṽ on the grid
    let ea = eps * params.alpha();
    let prod: Vec<f64> = (0..n3)
        .map(|p| {
            let h = p / nz;
            (vx[p] - vbx[h]) * gx[h] + (vy[p] - vby[h]) * gy[h]
        })
        .collect();
    let mut f = sp.from_real3(&prod).dealiased(g);
    f *= ea;
    let mut div_t = v.div_h();
    div_t.add_broadcast(-1.0, &vbar.div());
    f += &div_t;
    let w = sp.to_real3(&vertical_antiderivative(&f));

    let mut ax = vec![0.0; n3];
    let mut ay = vec![0.0; n3];
    for p in 0..n3 {
        ax[p] = -(vx[p] * dxvx[p] + vy[p] * dyvx[p] + w[p] * dzvx[p]);
        ay[p] = -(vx[p] * dxvy[p] + vy[p] * dyvy[p] + w[p] * dzvy[p]);
    }
    if viscous {
        let (visx, visy) = sp.to_real_vec3(&viscous_operator(v, params));
        let c1 = params.c1();
        for p in 0..n3 {
            let fac = c1 * (-ea * xi_p[p / nz]).exp_m1();
            ax[p] += fac * visx[p];
            ay[p] += fac * visy[p];
        }
    }
    let mut v_t = sp.from_real_vec3(&ax, &ay);

    // pressure remainder −c²(ξ + εξ²φ(εξ))∇ξ, z-independent
    let c2 = params.c2();
    let (px, py): (Vec<f64>, Vec<f64>) = (0..g.n2())
        .map(|h| {
            let f = -c2 * pressure_factor(xi_p[h], eps);
            (f * gx[h], f * gy[h])
        })
        .unzip();
    v_t.add_broadcast(
        1.0,
        &VectorField2::new(sp.from_real2(&px), sp.from_real2(&py)),
    );
    v_t.dealias(g);
    CpeTendency { xi: xi_t, v: v_t }
}

/// Splits the right-hand side into the stiff acoustic block and the remaining terms.
///
/// `stiff = −(1/ε)((γ−1) divₕ P_τv̄, c²∇ₕξ)`; the full tendency is `soft` plus `stiff`
/// added to ξ and to the z-independent part of v.
pub fn rhs_split(
    state: &CpeState,
    params: &PhysicalParams,
    sp: &Spectral,
) -> (AcousticState, CpeTendency) {
    let eps = params.eps();
    let ptau = project_tau2(&state.v.z_average());
    let stiff = AcousticState {
        q: &ptau.div() * (-(params.gamma() - 1.0) / eps),
        u: &state.xi.grad() * (-params.c2() / eps),
    };
    let mut soft = nonlinear_terms(state, params, sp, true);
    soft.v
        .axpy(params.c1(), &viscous_operator(&state.v, params));
    (stiff, soft)
}

/// Full tendency `stiff + soft` assembled on the 3D layout.
pub fn full_rhs(state: &CpeState, params: &PhysicalParams, sp: &Spectral) -> CpeTendency {
    let (stiff, mut soft) = rhs_split(state, params, sp);
    soft.xi += &stiff.q;
    soft.v.add_broadcast(1.0, &stiff.u);
    soft
}

#[derive(Debug, Clone, Copy)]
enum ModeProp {
    /// Coupled (ξ, u_L) block of a horizontal mode with n = 0, plus transverse damping.
    Acoustic { e: [Complex64; 4], dt_t: f64 },
    /// Longitudinal and transverse damping factors.
    Damped { dl: f64, dt: f64 },
}

/// Exact propagator of the linear part for one step size.
pub(crate) struct Propagator {
    h: f64,
    modes: Vec<ModeProp>,
}

/// `exp(h·[[0, −iaκ], [−ibκ, −ν]])` in a form that never multiplies overflowing factors.
fn acoustic_block(h: f64, a: f64, b: f64, kappa: f64, nu: f64) -> [Complex64; 4] {
    let s2 = Complex64::new(0.25 * nu * nu - a * b * kappa * kappa, 0.0);
    let s = s2.sqrt();
    let half = -0.5 * nu * h;
    let (ch, shs) = if (s * h).norm() < 1e-5 {
        let x2 = s2 * h * h;
        let e = half.exp();
        (e * (1.0 + x2 / 2.0), e * h * (1.0 + x2 / 6.0))
    } else {
        let ep = (half + s * h).exp();
        let em = (half - s * h).exp();
        (0.5 * (ep + em), 0.5 * (ep - em) / s)
    };
    let i = Complex64::new(0.0, 1.0);
    // exp(hM) = e^{h tr/2}(cosh(hs) I + sinh(hs)/s · (M − tr/2 I))
    [
        ch + shs * (0.5 * nu),
        shs * (-i * a * kappa),
        shs * (-i * b * kappa),
        ch - shs * (0.5 * nu),
    ]
}

impl Propagator {
    fn new(h: f64, params: &PhysicalParams, g: &Grid, opts: StepOptions) -> Self {
        Self::build(h, params, g, opts, true)
    }

    /// Viscous damping only; every mode is treated as `Damped`.
    pub(crate) fn viscous_only(h: f64, params: &PhysicalParams, g: &Grid) -> Self {
        Self::build(h, params, g, StepOptions::default(), false)
    }

    fn build(h: f64, params: &PhysicalParams, g: &Grid, opts: StepOptions, acoustic: bool) -> Self {
        let (nx, ny, nz) = (g.nx, g.ny, g.nz);
        let c1 = if opts.viscous { params.c1() } else { 0.0 };
        let (mu, la) = (params.mu(), params.lambda());
        let a = (params.gamma() - 1.0) / params.eps();
        let b = params.c2() / params.eps();
        let probe = ScalarField3::zeros(nx, ny, nz);
        let modes = (0..nx * ny * nz)
            .map(|p| {
                let (k, n) = probe.mode_at(p);
                let k2 = k.length().powi(2);
                let kz2 = (PI * n as f64).powi(2);
                if acoustic && n == 0 && !k.is_zero() {
                    let e = acoustic_block(h, a, b, k.length(), c1 * (mu + la) * k2);
                    ModeProp::Acoustic {
                        e,
                        dt_t: (-c1 * mu * k2 * h).exp(),
                    }
                } else {
                    ModeProp::Damped {
                        dl: (-c1 * ((mu + la) * k2 + kz2) * h).exp(),
                        dt: (-c1 * (mu * k2 + kz2) * h).exp(),
                    }
                }
            })
            .collect();
        Propagator { h, modes }
    }

    pub(crate) fn apply(&self, state: &mut CpeState) {
        let (nx, ny, nz) = state.v.dims();
        let xi = state.xi.coeffs_mut();
        let (vx, vy) = (state.v.x.coeffs_mut(), state.v.y.coeffs_mut());
        for (p, m) in self.modes.iter().enumerate() {
            let h = p / nz;
            let k = crate::grid::Lattice(
                crate::grid::signed_index(h / ny, nx),
                crate::grid::signed_index(h % ny, ny),
            );
            if k.is_zero() {
                if let ModeProp::Damped { dt, .. } = *m {
                    vx[p] *= dt;
                    vy[p] *= dt;
                }
                continue;
            }
            let kk = k.wavevector();
            let len = k.length();
            let (ex, ey) = (kk[0] / len, kk[1] / len);
            let ul = ex * vx[p] + ey * vy[p];
            let ut = -ey * vx[p] + ex * vy[p];
            let (ul, ut) = match *m {
                ModeProp::Acoustic { e, dt_t } => {
                    let x = xi[h];
                    xi[h] = e[0] * x + e[1] * ul;
                    (e[2] * x + e[3] * ul, ut * dt_t)
                }
                ModeProp::Damped { dl, dt } => (ul * dl, ut * dt),
            };
            vx[p] = ex * ul - ey * ut;
            vy[p] = ey * ul + ex * ut;
        }
    }
}

/// Integrating-factor Heun stepper for the ε-perturbation system.
pub struct CpeStepper<'a> {
    sp: &'a Spectral,
    params: PhysicalParams,
    opts: StepOptions,
    prop: Option<Propagator>,
}

impl<'a> CpeStepper<'a> {
    pub fn new(sp: &'a Spectral, params: PhysicalParams) -> Self {
        Self::with_options(sp, params, StepOptions::default())
    }

    pub fn with_options(sp: &'a Spectral, params: PhysicalParams, opts: StepOptions) -> Self {
        CpeStepper {
            sp,
            params,
            opts,
            prop: None,
        }
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn spectral(&self) -> &Spectral {
        self.sp
    }

    fn propagator(&mut self, h: f64) -> &Propagator {
        if self.prop.as_ref().map(|p| p.h) != Some(h) {
            self.prop = Some(Propagator::new(h, &self.params, self.sp.grid(), self.opts));
        }
        self.prop.as_ref().unwrap()
    }

    fn soft(&self, s: &CpeState) -> CpeTendency {
        if self.opts.nonlinear {
            nonlinear_terms(s, &self.params, self.sp, self.opts.viscous)
        } else {
            CpeTendency::zeros(self.sp.grid())
        }
    }

    /// One step of size `h`.
    pub fn step(&mut self, state: &CpeState, h: f64) -> Result<CpeState> {
        if !(h > 0.0) {
            return Err(Error::Domain(format!(
                "step size must be positive, got {h}"
            )));
        }
        let n1 = self.soft(state);
        let mut pred = state.clone();
        pred.axpy(h, &n1);
        let mut next = state.clone();
        next.axpy(0.5 * h, &n1);
        {
            let prop = self.propagator(h);
            prop.apply(&mut pred);
            prop.apply(&mut next);
        }
        pred.time = state.time + h;
        let n2 = self.soft(&pred);
        next.axpy(0.5 * h, &n2);
        next.time = state.time + h;
        next.enforce_invariants(self.sp.grid());
        if !next.is_finite() {
            return Err(Error::Integration {
                time: next.time,
                reason: "non-finite coefficient".into(),
            });
        }
        Ok(next)
    }

    /// Advances to `t_end` in equal steps no longer than `dt_max`.
    pub fn advance(&mut self, state: &CpeState, t_end: f64, dt_max: f64) -> Result<CpeState> {
        let span = t_end - state.time;
        if span <= 0.0 {
            return Ok(state.clone());
        }
        let n = (span / dt_max).ceil().max(1.0) as usize;
        let h = span / n as f64;
        let mut s = state.clone();
        for j in 0..n {
            s = self.step(&s, h)?;
            if j + 1 == n {
                s.time = t_end;
            }
        }
        Ok(s)
    }
}

/// Single step with default options.
pub fn step(state: &CpeState, dt: f64, params: &PhysicalParams, sp: &Spectral) -> Result<CpeState> {
    CpeStepper::new(sp, *params).step(state, dt)
}

#[cfg(test)]
mod tests;
