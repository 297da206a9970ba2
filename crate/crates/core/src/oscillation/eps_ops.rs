//! The ε-dependent operators `𝒜_ε(D), 𝒬_{ε,1}, 𝒬_{ε,2}, 𝒬_{ε,3}`, each evaluated literally as
//! `𝓛(−t/ε) ∘ (physical-space expression) ∘ 𝓛(t/ε)` on the grid.
//!
//! Inputs may be complex (single modes `V_k^±`); products use complex pseudo-spectral
//! multiplication, dealiased.

use crate::acoustic::{decompose, reconstruct, semigroup_modes, AcousticState, ModeCoefficients};
use crate::field::{ScalarField2, VectorField2};
use crate::params::PhysicalParams;
use crate::projections::{project_ker_perp2, project_tau2};
use crate::spectral::Spectral;

fn lifted(t: f64, eps: f64, v: &ModeCoefficients, params: &PhysicalParams) -> AcousticState {
    reconstruct(&semigroup_modes(t / eps, v, params), params)
}

fn pulled_back(t: f64, eps: f64, s: &AcousticState, params: &PhysicalParams) -> ModeCoefficients {
    semigroup_modes(-t / eps, &decompose(&project_ker_perp2(s), params), params)
}

/// `(a·∇)b` for complex 2D fields.
fn dot_grad(a: &VectorField2, b: &VectorField2, sp: &Spectral) -> VectorField2 {
    let comp = |f: &ScalarField2| {
        let mut o = sp.product2_complex(&a.x, &f.dx());
        o += &sp.product2_complex(&a.y, &f.dy());
        o
    };
    VectorField2::new(comp(&b.x), comp(&b.y))
}

fn scalar_times(q: &ScalarField2, u: &VectorField2, sp: &Spectral) -> VectorField2 {
    VectorField2::new(sp.product2_complex(q, &u.x), sp.product2_complex(q, &u.y))
}

/// `c₁(μΔₕu + λ∇ₕdivₕu)`.
fn lame(u: &VectorField2, params: &PhysicalParams) -> VectorField2 {
    let mut out = VectorField2::new(u.x.laplacian(), u.y.laplacian());
    out *= params.mu();
    out.axpy(params.lambda(), &u.div().grad());
    out *= params.c1();
    out
}

/// `𝒜_ε(D)V = 𝓛(−t/ε)(0, c₁(μΔₕ + λ∇ₕdivₕ)𝓛₂(t/ε)V)`.
pub fn op_a_eps(
    t: f64,
    eps: f64,
    v: &ModeCoefficients,
    params: &PhysicalParams,
) -> ModeCoefficients {
    let u = lifted(t, eps, v, params).u;
    let (nx, ny) = v.dims();
    let s = AcousticState {
        q: ScalarField2::zeros(nx, ny),
        u: lame(&u, params),
    };
    pulled_back(t, eps, &s, params)
}

/// `𝒬_{ε,1}(P_σu, V)`; `ubar` is the vertical mean `∫₀¹ P_σu dz`.
///
/// Since `𝓛₂V` does not depend on z, `P_τ(P_σu·∇𝓛₂V + 𝓛₂V·∇P_σu)` only sees `ubar`.
pub fn op_q1_eps(
    t: f64,
    eps: f64,
    ubar: &VectorField2,
    v: &ModeCoefficients,
    params: &PhysicalParams,
    sp: &Spectral,
) -> ModeCoefficients {
    let w = lifted(t, eps, v, params);
    let flux = scalar_times(&w.q, ubar, sp);
    let mut mom = dot_grad(ubar, &w.u, sp);
    mom += &dot_grad(&w.u, ubar, sp);
    let s = AcousticState {
        q: flux.div(),
        u: project_tau2(&mom),
    };
    pulled_back(t, eps, &s, params)
}

/// `𝒬_{ε,2}(V₁, V₂)`.
pub fn op_q2_eps(
    t: f64,
    eps: f64,
    v1: &ModeCoefficients,
    v2: &ModeCoefficients,
    params: &PhysicalParams,
    sp: &Spectral,
) -> ModeCoefficients {
    let w1 = lifted(t, eps, v1, params);
    let w2 = lifted(t, eps, v2, params);
    let g2 = w2.q.grad();
    let mut q = sp.product2_complex(&w1.u.x, &g2.x);
    q += &sp.product2_complex(&w1.u.y, &g2.y);
    let mut mom = dot_grad(&w1.u, &w2.u, sp);
    mom.axpy(params.c2(), &scalar_times(&w1.q, &g2, sp));
    let s = AcousticState {
        q: q.without_mean(),
        u: project_tau2(&mom),
    };
    pulled_back(t, eps, &s, params)
}

/// `𝒬_{ε,3}(g, V) = 𝓛(−t/ε)(0, P_τ(c²g∇ₕ𝓛₁(t/ε)V))`.
pub fn op_q3_eps(
    t: f64,
    eps: f64,
    g: f64,
    v: &ModeCoefficients,
    params: &PhysicalParams,
) -> ModeCoefficients {
    let q = lifted(t, eps, v, params).q;
    let (nx, ny) = v.dims();
    let s = AcousticState {
        q: ScalarField2::zeros(nx, ny),
        u: &q.grad() * (params.c2() * g),
    };
    pulled_back(t, eps, &s, params)
}
