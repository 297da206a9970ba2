//! Fast acoustic oscillations of the ε-system, their resonance-filtered limit, and the
//! corrected error `(ξ_ε − g^o, v_ε − v_p) − 𝓛(t/ε)V^o`.

mod eps_ops;
mod limit_ops;
pub mod resonance;

use crate::acoustic::{decompose, reconstruct, semigroup_modes, AcousticState, ModeCoefficients};
use crate::cpe::{pressure_factor, CpeState};
use crate::field::{ScalarField2, VectorField2, VectorField3};
use crate::limit_pe::PeState;
use crate::params::PhysicalParams;
use crate::projections::{project_sigma, project_sigma2, project_tau, project_tau2};
use crate::spectral::Spectral;

pub use eps_ops::{op_a_eps, op_q1_eps, op_q2_eps, op_q3_eps};
pub use limit_ops::{
    step_limit_oscillation, LimitOperators, LimitTerms, OscState, OscillationStepper, VpHistory,
};
pub use resonance::{
    enumerate_resonant, resonance_check, Resonance, ResonanceAudit, ResonantTriple,
};

/// `U^o_ε = (ξ − ∫ξ, P_τv)`, `V^o_ε = 𝓛(−t/ε)U^o_ε` and `g_ε = ∫ξ` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct OscVariables {
    pub u_osc: AcousticState,
    pub v_osc: ModeCoefficients,
    pub g: f64,
    pub t: f64,
}

pub fn oscillation_variables(state: &CpeState, t: f64, params: &PhysicalParams) -> OscVariables {
    let u_osc = AcousticState {
        q: state.xi.without_mean(),
        u: project_tau(&state.v),
    };
    let v_osc = semigroup_modes(-t / params.eps(), &decompose(&u_osc, params), params);
    OscVariables {
        u_osc,
        v_osc,
        g: state.xi.mean(),
        t,
    }
}

/// `∫₀¹ P_σu dz`, the horizontal field seen by `𝒬₁`.
pub fn vertical_mean_sigma(u: &VectorField3) -> VectorField2 {
    project_sigma2(&u.z_average())
}

/// `dg_ε/dt = −∫ 𝓛₂(t/ε)V · ∇ₕ𝓛₁(t/ε)V dxdy`.
pub fn g_rhs(v_osc: &ModeCoefficients, t: f64, params: &PhysicalParams) -> f64 {
    let w = reconstruct(&semigroup_modes(t / params.eps(), v_osc, params), params);
    let g = w.q.grad();
    -(w.u.x.integral_of_product(&g.x) + w.u.y.integral_of_product(&g.y)).re
}

/// The source terms `K, L₁, L₂` of the oscillation system.
#[derive(Debug, Clone, PartialEq)]
pub struct Sources {
    pub k: VectorField2,
    pub l1: VectorField2,
    pub l2: VectorField2,
}

impl Sources {
    /// `‖L₁‖_{H¹} + ‖L₂‖_{L²}`.
    pub fn remainder_size(&self) -> f64 {
        self.l1.sobolev_norm(1) + self.l2.sobolev_norm(0)
    }
}

/// `K = P_τ(−P_σv·∇ₕP_σv − divₕṽ P_σv)`,
/// `L₁ = −εα P_τ((ṽ·∇ₕξ)P_σv) + P_τ(c²(1 + εξ − e^{εξ})/ε ∇ₕξ)`,
/// `L₂ = P_τ(c₁(e^{−εαξ} − 1)(μΔₕv + λ∇ₕdivₕv))`.
pub fn sources_kl(state: &CpeState, params: &PhysicalParams, sp: &Spectral) -> Sources {
    let g = sp.grid();
    let (nz, n3) = (g.nz, g.n3());
    let eps = params.eps();
    let vs = project_sigma(&state.v);
    let vt = state.v.z_fluctuation();

    let (sx, sy) = sp.to_real_vec3(&vs);
    let (dxsx, dysx) = sp.to_real3_pair(&vs.x.dx(), &vs.x.dy());
    let (dxsy, dysy) = sp.to_real3_pair(&vs.y.dx(), &vs.y.dy());
    let (tx, ty) = sp.to_real_vec3(&vt);
    let divt = sp.to_real3(&vt.div_h());
    let xi = sp.to_real2(&state.xi);
    let gx = sp.to_real2(&state.xi.dx());
    let gy = sp.to_real2(&state.xi.dy());

    let mut kx = vec![0.0; n3];
    let mut ky = vec![0.0; n3];
    let mut ax = vec![0.0; n3];
    let mut ay = vec![0.0; n3];
    let ea = eps * params.alpha();
    for p in 0..n3 {
        let h = p / nz;
        kx[p] = -(sx[p] * dxsx[p] + sy[p] * dysx[p]) - divt[p] * sx[p];
        ky[p] = -(sx[p] * dxsy[p] + sy[p] * dysy[p]) - divt[p] * sy[p];
        let adv = tx[p] * gx[h] + ty[p] * gy[h];
        ax[p] = -ea * adv * sx[p];
        ay[p] = -ea * adv * sy[p];
    }
    let avg = |a: &[f64], b: &[f64]| {
        let mut f = sp.from_real_vec3(a, b);
        f.dealias(g);
        project_tau(&f)
    };
    let k = avg(&kx, &ky);
    let mut l1 = avg(&ax, &ay);

    let c2 = params.c2();
    // c²(1 + εξ − e^{εξ})/ε = −c²(pressure_factor − ξ)
    let (px, py): (Vec<f64>, Vec<f64>) = (0..g.n2())
        .map(|h| {
            let f = -c2 * (pressure_factor(xi[h], eps) - xi[h]);
            (f * gx[h], f * gy[h])
        })
        .unzip();
    let mut pr = VectorField2::new(sp.from_real2(&px), sp.from_real2(&py));
    pr.dealias(g);
    l1 += &project_tau2(&pr);

    let mut lame = &state.v.laplacian_h() * params.mu();
    lame.axpy(params.lambda(), &state.v.grad_div());
    let (lx, ly) = sp.to_real_vec3(&lame);
    let c1 = params.c1();
    let (bx, by): (Vec<f64>, Vec<f64>) = (0..n3)
        .map(|p| {
            let f = c1 * (-ea * xi[p / nz]).exp_m1();
            (f * lx[p], f * ly[p])
        })
        .unzip();
    let l2 = avg(&bx, &by);
    Sources { k, l1, l2 }
}

/// Error norms at one time, all in `H¹(T² × 2T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    /// `‖P_σv_ε − v_p‖`
    pub raw: f64,
    /// `‖(ξ_ε − g^o, P_τv_ε)‖`
    pub tau_pair: f64,
    /// `‖ξ_ε − g^o‖ + ‖P_τv_ε‖`
    pub tau_sum: f64,
    /// `‖(ξ_ε − g^o, v_ε − v_p) − 𝓛(t/ε)V^o‖`
    pub corrected: f64,
    /// `|g_ε − g^o|`
    pub g_dev: f64,
}

fn h1_sq_2d(f: &ScalarField2) -> f64 {
    f.sobolev_norm_sq(1)
}

pub fn error_norms(
    cpe: &CpeState,
    pe: &PeState,
    v_osc_limit: &ModeCoefficients,
    g_o: f64,
    t: f64,
    params: &PhysicalParams,
) -> ErrorNorms {
    let mut xi_dev = cpe.xi.clone();
    xi_dev.add_at(
        crate::grid::Lattice(0, 0),
        num_complex::Complex64::new(-g_o, 0.0),
    );
    let ptau = project_tau(&cpe.v);
    let raw = (&project_sigma(&cpe.v) - &pe.v_p).sobolev_norm(1);
    let (xq, pt) = (h1_sq_2d(&xi_dev), ptau.sobolev_norm_sq(1));
    let ansatz = reconstruct(
        &semigroup_modes(t / params.eps(), v_osc_limit, params),
        params,
    );
    let q = &xi_dev - &ansatz.q;
    let mut dv = &cpe.v - &pe.v_p;
    dv.add_broadcast(-1.0, &ansatz.u);
    ErrorNorms {
        raw,
        tau_pair: (xq + pt).sqrt(),
        tau_sum: xq.sqrt() + pt.sqrt(),
        corrected: (h1_sq_2d(&q) + dv.sobolev_norm_sq(1)).sqrt(),
        g_dev: (cpe.xi.mean() - g_o).abs(),
    }
}

/// `‖(ξ_ε − g^o, v_ε − v_p) − 𝓛(t/ε)V^o‖_{H¹(T² × 2T)}`.
pub fn corrected_error(
    cpe: &CpeState,
    pe: &PeState,
    v_osc_limit: &ModeCoefficients,
    g_o: f64,
    t: f64,
    params: &PhysicalParams,
) -> f64 {
    error_norms(cpe, pe, v_osc_limit, g_o, t, params).corrected
}
