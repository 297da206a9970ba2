//! The limit primitive equations: `∂ₜv_p + v_p·∇ₕv_p + w_p∂_z v_p + ∇ₕP = c₁(μΔₕ + λ∇ₕdivₕ + ∂_zz)v_p`
//! with `∫₀¹ divₕ v_p dz = 0`. The pressure is eliminated by `P_σ`.

use crate::cpe::{vertical_antiderivative, viscous_operator, CpeState, Propagator};
use crate::error::{Error, Result};
use crate::field::{ScalarField2, ScalarField3, VectorField2, VectorField3};
use crate::params::PhysicalParams;
use crate::projections::{project_sigma, project_tau};
use crate::spectral::Spectral;

/// Solution of the limit system at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct PeState {
    pub v_p: VectorField3,
    pub time: f64,
}

impl PeState {
    /// Limit initial data `P_σ v₀`.
    pub fn from_initial(v0: &VectorField3) -> Self {
        PeState {
            v_p: project_sigma(v0),
            time: 0.0,
        }
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.v_p.sobolev_norm_sq(0)
    }
}

/// `w_p = −∫₀^z divₕ v_p dz′`.
pub fn reconstruct_w_p(v_p: &VectorField3) -> ScalarField3 {
    vertical_antiderivative(&v_p.div_h())
}

/// Dealiased `v·∇ₕv + w∂_z v`.
pub(crate) fn advection(v: &VectorField3, w: &ScalarField3, sp: &Spectral) -> VectorField3 {
    let g = sp.grid();
    let (vx, vy) = sp.to_real_vec3(v);
    let (dxvx, dyvx) = sp.to_real3_pair(&v.x.dx(), &v.x.dy());
    let (dxvy, dyvy) = sp.to_real3_pair(&v.y.dx(), &v.y.dy());
    let (dzvx, dzvy) = sp.to_real3_pair(&v.x.dz(), &v.y.dz());
    let wp = sp.to_real3(w);
    let n3 = g.n3();
    let ax: Vec<f64> = (0..n3)
        .map(|p| vx[p] * dxvx[p] + vy[p] * dyvx[p] + wp[p] * dzvx[p])
        .collect();
    let ay: Vec<f64> = (0..n3)
        .map(|p| vx[p] * dxvy[p] + vy[p] * dyvy[p] + wp[p] * dzvy[p])
        .collect();
    let mut out = sp.from_real_vec3(&ax, &ay);
    out.dealias(g);
    out
}

fn unprojected_rhs(v: &VectorField3, params: &PhysicalParams, sp: &Spectral) -> VectorField3 {
    let w = reconstruct_w_p(v);
    let mut t = -advection(v, &w, sp);
    t.axpy(params.c1(), &viscous_operator(v, params));
    t
}

/// `P_σ(−v_p·∇ₕv_p − w_p∂_z v_p + c₁(μΔₕ + λ∇ₕdivₕ + ∂_zz)v_p)`.
pub fn pe_rhs(state: &PeState, params: &PhysicalParams, sp: &Spectral) -> VectorField3 {
    project_sigma(&unprojected_rhs(&state.v_p, params, sp))
}

/// `∇ₕP = P_τ(−v_p·∇ₕv_p − w_p∂_z v_p + viscous terms)`.
pub fn recover_pressure_gradient(
    state: &PeState,
    params: &PhysicalParams,
    sp: &Spectral,
) -> VectorField2 {
    project_tau(&unprojected_rhs(&state.v_p, params, sp))
}

/// Pressure itself, mean zero, from the recovered gradient.
pub fn recover_pressure(state: &PeState, params: &PhysicalParams, sp: &Spectral) -> ScalarField2 {
    let gp = recover_pressure_gradient(state, params, sp);
    crate::projections::solve_poisson(&gp.div()).psi
}

/// Heun stepper with the viscous part integrated exactly.
pub struct PeStepper<'a> {
    sp: &'a Spectral,
    params: PhysicalParams,
    prop: Option<Propagator>,
    h: f64,
}

impl<'a> PeStepper<'a> {
    pub fn new(sp: &'a Spectral, params: PhysicalParams) -> Self {
        PeStepper {
            sp,
            params,
            prop: None,
            h: f64::NAN,
        }
    }

    fn nonlinear(&self, v: &VectorField3) -> VectorField3 {
        let w = reconstruct_w_p(v);
        project_sigma(&-advection(v, &w, self.sp))
    }

    fn damp(&mut self, v: VectorField3, h: f64) -> VectorField3 {
        if self.h != h {
            self.prop = Some(Propagator::viscous_only(h, &self.params, self.sp.grid()));
            self.h = h;
        }
        let mut s = CpeState {
            xi: ScalarField2::zeros_like_grid(self.sp.grid()),
            v,
            time: 0.0,
        };
        self.prop.as_ref().unwrap().apply(&mut s);
        s.v
    }

    pub fn step(&mut self, state: &PeState, h: f64) -> Result<PeState> {
        if !(h > 0.0) {
            return Err(Error::Domain(format!(
                "step size must be positive, got {h}"
            )));
        }
        let n1 = self.nonlinear(&state.v_p);
        let mut pred = state.v_p.clone();
        pred.axpy(h, &n1);
        let pred = self.damp(pred, h);
        let n2 = self.nonlinear(&pred);
        let mut next = state.v_p.clone();
        next.axpy(0.5 * h, &n1);
        let mut next = self.damp(next, h);
        next.axpy(0.5 * h, &n2);
        let g = self.sp.grid();
        let mut v = project_sigma(&next.enforce_even());
        v.dealias(g);
        v.make_real();
        if !v.is_finite() {
            return Err(Error::Integration {
                time: state.time + h,
                reason: "non-finite limit velocity".into(),
            });
        }
        Ok(PeState {
            v_p: v,
            time: state.time + h,
        })
    }

    pub fn advance(&mut self, state: &PeState, t_end: f64, dt_max: f64) -> Result<PeState> {
        let span = t_end - state.time;
        if span <= 0.0 {
            return Ok(state.clone());
        }
        let n = (span / dt_max).ceil().max(1.0) as usize;
        let h = span / n as f64;
        let mut s = state.clone();
        for _ in 0..n {
            s = self.step(&s, h)?;
        }
        s.time = t_end;
        Ok(s)
    }
}

pub fn pe_step(
    state: &PeState,
    dt: f64,
    params: &PhysicalParams,
    sp: &Spectral,
) -> Result<PeState> {
    PeStepper::new(sp, *params).step(state, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::random;
    use crate::spectral::tau;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn sp() -> Spectral {
        Spectral::new(Grid::new(16, 16, 8).unwrap())
    }

    fn random_pe(s: &Spectral, seed: u64, amp: f64) -> PeState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PeState::from_initial(&random::vector3_even(s.grid(), &mut rng, amp, 1.5))
    }

    #[test]
    fn w_p_examples() {
        let s = sp();
        let psi = s.sample2(|x, y| tau(x).cos() * tau(y).sin());
        let v = VectorField2::new(-psi.dy(), psi.dx()).broadcast(8);
        assert!(reconstruct_w_p(&v).max_abs() < 1e-13);
        let vx = s.sample3(|x, _, z| tau(z).cos() * tau(x).sin());
        let v = VectorField3::new(vx, ScalarField3::zeros(16, 16, 8));
        let expect = s.sample3(|x, _, z| -tau(x).cos() * tau(z).sin());
        assert!((&reconstruct_w_p(&v) - &expect).max_abs() < 1e-14);
    }

    #[test]
    fn continuity_residual_and_boundaries() {
        let s = sp();
        let st = random_pe(&s, 1, 1.0);
        let w = reconstruct_w_p(&st.v_p);
        let res = &st.v_p.div_h() + &w.dz();
        assert!(res.max_abs() < 1e-12);
        let vals = s.to_real3(&w);
        for h in 0..256 {
            assert!(vals[h * 8].abs() < 1e-12 && vals[h * 8 + 4].abs() < 1e-12);
        }
    }

    #[test]
    fn tendency_is_sigma_and_zero_stays_zero() {
        let s = sp();
        let p = PhysicalParams::standard(0.1).unwrap();
        let st = random_pe(&s, 2, 1.0);
        let t = pe_rhs(&st, &p, &s);
        assert!(t.z_average().div().max_abs() < 1e-10);
        let zero = PeState {
            v_p: VectorField3::zeros(16, 16, 8),
            time: 0.0,
        };
        assert_eq!(pe_rhs(&zero, &p, &s).max_abs(), 0.0);
        assert_eq!(pe_step(&zero, 1e-3, &p, &s).unwrap().v_p.max_abs(), 0.0);
        assert_eq!(recover_pressure_gradient(&zero, &p, &s).max_abs(), 0.0);
    }

    #[test]
    fn projection_matches_explicit_pressure_solve() {
        let s = sp();
        let p = PhysicalParams::standard(0.1).unwrap();
        let st = random_pe(&s, 3, 1.0);
        let raw = unprojected_rhs(&st.v_p, &p, &s);
        // brute force: ΔP = ∫₀¹ divₕ(raw) dz, then subtract ∇P
        let pres = crate::projections::solve_poisson(&raw.z_average().div()).psi;
        let mut expect = raw.clone();
        expect.add_broadcast(-1.0, &pres.grad());
        assert!((&pe_rhs(&st, &p, &s) - &expect).max_abs() < 1e-12 * raw.max_abs());
        let gp = recover_pressure_gradient(&st, &p, &s);
        assert!((&gp - &pres.grad()).max_abs() < 1e-12 * raw.max_abs());
    }

    #[test]
    fn solenoidal_nonlinearity_has_no_pressure() {
        // a single shear mode u = (sin 2πy, 0) has v·∇v = 0
        let s = sp();
        let p = PhysicalParams::standard(0.1).unwrap();
        let st = PeState {
            v_p: VectorField3::new(
                s.sample2(|_, y| tau(y).sin()).broadcast(8),
                ScalarField3::zeros(16, 16, 8),
            ),
            time: 0.0,
        };
        assert!(recover_pressure_gradient(&st, &p, &s).max_abs() < 1e-13);
    }

    #[test]
    fn viscous_mode_decay() {
        let s = sp();
        let p = PhysicalParams::standard(0.1).unwrap();
        let vx = s.sample3(|_, y, z| tau(y).sin() * (PI * z).cos());
        let st = PeState {
            v_p: VectorField3::new(vx.clone(), ScalarField3::zeros(16, 16, 8)),
            time: 0.0,
        };
        let out = PeStepper::new(&s, p).advance(&st, 0.03, 0.01).unwrap();
        let rate = p.c1() * (p.mu() * 4.0 * PI * PI + PI * PI);
        assert!((&out.v_p.x - &(&vx * (-rate * 0.03).exp())).max_abs() < 1e-13);
    }

    #[test]
    fn order_two_and_energy_decay() {
        let s = sp();
        let p = PhysicalParams::standard(0.1).unwrap();
        let st = random_pe(&s, 4, 2.0);
        let mut stp = PeStepper::new(&s, p);
        let t = 0.02;
        let a = stp.advance(&st, t, t / 8.0).unwrap();
        let b = stp.advance(&st, t, t / 16.0).unwrap();
        let c = stp.advance(&st, t, t / 32.0).unwrap();
        let r = (&a.v_p - &b.v_p).sobolev_norm(0) / (&b.v_p - &c.v_p).sobolev_norm(0);
        assert!((3.3..4.8).contains(&r), "ratio {r}");
        let mut cur = st.clone();
        for _ in 0..20 {
            let next = stp.step(&cur, 1e-3).unwrap();
            assert!(next.kinetic_energy() <= cur.kinetic_energy() * (1.0 + 1e-10));
            assert!(project_tau(&next.v_p).max_abs() < 1e-12);
            cur = next;
        }
    }
}
