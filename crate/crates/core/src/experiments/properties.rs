//! Pass/fail suites over the invariants of the solver modules.
//!
//! Every check reports a measured defect and the tolerance it is held to. Tolerances are
//! multiplied by [`tolerance_scale`], which grows like `1/(γ−1)` as γ → 1 because the weights
//! `c²` and `γ−1` of the acoustic block separate by that factor.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use crate::acoustic::{
    apply_l, conjugate_vector, decompose, eigen_vector, eigenvalue, reconstruct, semigroup_modes,
    weighted_inner, weighted_sobolev_norm, Branch,
};
use crate::cpe::{reconstruct_w, vertical_source, CpeState, CpeStepper};
use crate::error::Result;
use crate::field::ScalarField3;
use crate::grid::{Grid, Lattice};
use crate::limit_pe::{reconstruct_w_p, PeState, PeStepper};
use crate::oscillation::resonance::{audit, lattice_ball};
use crate::oscillation::LimitOperators;
use crate::params::PhysicalParams;
use crate::projections::{project_sigma, project_tau};
use crate::random;
use crate::spectral::Spectral;

/// One measured defect against its tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    /// NaN never passes.
    pub fn passed(&self) -> bool {
        self.value <= self.tolerance
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropertyOptions {
    /// Relative change of `c` in the eigenbasis used by the eigen-relation suite; 0 in normal runs.
    pub eigenbasis_perturbation: f64,
    /// Random samples per randomized check.
    pub samples: usize,
}

impl Default for PropertyOptions {
    fn default() -> Self {
        PropertyOptions {
            eigenbasis_perturbation: 0.0,
            samples: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub gamma: f64,
    pub tolerance_scale: f64,
    pub checks: Vec<Check>,
}

pub const SUITES: [&str; 7] = [
    "spectral",
    "projections",
    "eigen",
    "semigroup",
    "cpe",
    "limit_pe",
    "oscillation",
];

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn suite_passed(&self, suite: &str) -> bool {
        self.checks
            .iter()
            .filter(|c| c.suite == suite)
            .all(Check::passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }

    pub fn rows(&self) -> Vec<Vec<String>> {
        self.checks
            .iter()
            .map(|c| {
                vec![
                    c.suite.to_string(),
                    c.name.clone(),
                    format!("{:e}", c.value),
                    format!("{:e}", c.tolerance),
                    if c.passed() {
                        "pass".into()
                    } else {
                        "FAIL".into()
                    },
                ]
            })
            .collect()
    }
}

pub const PROPERTY_COLUMNS: [&str; 5] = ["suite", "check", "value", "tolerance", "status"];

/// `max(1, 1/(γ−1))`.
pub fn tolerance_scale(params: &PhysicalParams) -> f64 {
    (1.0 / (params.gamma() - 1.0)).max(1.0)
}

struct Suite {
    name: &'static str,
    scale: f64,
    out: Vec<Check>,
}

impl Suite {
    fn new(name: &'static str, scale: f64) -> Self {
        Suite {
            name,
            scale,
            out: Vec::new(),
        }
    }

    fn check(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        self.out.push(Check {
            suite: self.name,
            name: name.into(),
            value,
            tolerance: tolerance * self.scale,
        });
    }
}

fn rel(defect: f64, size: f64) -> f64 {
    if size > 0.0 {
        defect / size
    } else {
        defect
    }
}

fn spectral_suite(g: &Grid, rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<Check> {
    let sp = Spectral::new(*g);
    let mut s = Suite::new("spectral", scale);
    let (mut rt, mut herm, mut pars, mut fluct) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..n {
        let f = random::scalar3_even(g, rng, 1.0, 1.0);
        let back = sp.from_real3(&sp.to_real3(&f));
        rt = rt.max(rel((&back - &f).sobolev_norm(0), f.sobolev_norm(0)));
        let a = random::scalar2(g, rng, 1.0, 1.0);
        let b = random::scalar2(g, rng, 1.0, 1.0);
        herm = herm.max(sp.product2(&a, &b).hermitian_defect());
        pars = pars.max(rel(
            (f.sobolev_norm_sq(0) - sp.mean_square3(&f)).abs(),
            f.sobolev_norm_sq(0),
        ));
        fluct = fluct.max(f.z_fluctuation().z_average().max_abs());
    }
    s.check("transform round trip", rt, 1e-12);
    s.check("hermitian symmetry of products", herm, 1e-13);
    s.check("parseval", pars, 1e-12);
    s.check("z-average of fluctuation", fluct, 1e-13);
    // Highest index below Nyquist, capped at 2, so the mode is resolved on every grid.
    let below_nyquist = |n: usize| (n as i64 / 2 - 1).min(2);
    let k = Lattice(below_nyquist(g.nx), -below_nyquist(g.ny).min(1));
    let m = below_nyquist(g.nz);
    let one = Complex64::new(1.0, 0.0);
    let f = ScalarField3::from_modes(g.nx, g.ny, g.nz, &[(k, m, one)]);
    let w = k.wavevector();
    let dx = (f.dx().get(k, m) - Complex64::new(0.0, w[0])).norm();
    let dy = (f.dy().get(k, m) - Complex64::new(0.0, w[1])).norm();
    let dz = (f.dz().get(k, m) - Complex64::new(0.0, std::f64::consts::PI * m as f64)).norm();
    s.check("single-mode derivatives", dx.max(dy).max(dz), 1e-13);
    s.out
}

fn projection_suite(g: &Grid, rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<Check> {
    let mut s = Suite::new("projections", scale);
    let (mut id_s, mut id_t, mut orth, mut comp, mut bound) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..n {
        let u = random::vector3_even(g, rng, 1.0, 1.0);
        let nu = u.sobolev_norm(0);
        let ps = project_sigma(&u);
        let pt = project_tau(&u);
        id_s = id_s.max(rel((&project_sigma(&ps) - &ps).sobolev_norm(0), nu));
        let pt3 = pt.broadcast(g.nz);
        id_t = id_t.max(rel((&project_tau(&pt3) - &pt).sobolev_norm(0), nu));
        orth = orth.max(rel(ps.inner(&pt3).norm(), nu * nu));
        let mut rest = &u - &ps;
        rest -= &pt3;
        comp = comp.max(rel(rest.sobolev_norm(0), nu));
        for k in 0..=2 {
            bound = bound.max(ps.sobolev_norm(k) / u.sobolev_norm(k) - 1.0);
        }
    }
    s.check("P_sigma idempotent", id_s, 1e-12);
    s.check("P_tau idempotent", id_t, 1e-12);
    s.check("orthogonality", orth, 1e-12);
    s.check("completeness", comp, 1e-13);
    s.check("P_sigma bounded by 1 in H^0..H^2", bound, 1e-12);
    s.out
}

/// `L V` for the amplitude vector of a single mode `e^{ik·x}`.
fn l_amplitude(k: Lattice, v: [f64; 3], params: &PhysicalParams) -> [Complex64; 3] {
    let w = k.wavevector();
    let i = Complex64::new(0.0, 1.0);
    [
        i * (params.gamma() - 1.0) * (w[0] * v[1] + w[1] * v[2]),
        i * params.c2() * w[0] * v[0],
        i * params.c2() * w[1] * v[0],
    ]
}

fn eigen_suite(
    params: &PhysicalParams,
    perturbation: f64,
    g: &Grid,
    rng: &mut ChaCha8Rng,
    n: usize,
    scale: f64,
) -> Result<Vec<Check>> {
    let mut s = Suite::new("eigen", scale);
    // the basis is built for a sound speed c(1 + δ); ρ̄ = (1 + δ)^{2/(γ−1)} does exactly that
    let basis = if perturbation == 0.0 {
        *params
    } else {
        let g1 = params.gamma() - 1.0;
        PhysicalParams::new(
            params.gamma(),
            params.mu(),
            params.lambda(),
            params.rho_bar() * (1.0 + perturbation).powf(2.0 / g1),
            params.eps(),
        )?
    };
    let (mut eig, mut bio) = (0.0f64, 0.0f64);
    for k in lattice_ball(16.0 * std::f64::consts::PI) {
        for b in Branch::BOTH {
            let v = eigen_vector(k, b, &basis);
            let lv = l_amplitude(k, v, params);
            let lam = eigenvalue(k, b, params);
            let res: f64 = (0..3)
                .map(|j| (lv[j] - lam * v[j]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let nv: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            eig = eig.max(res / nv);
            for b2 in Branch::BOTH {
                let w = conjugate_vector(k, b2, &basis);
                let ip: f64 = (0..3).map(|j| v[j] * w[j]).sum();
                let target = if b == b2 { 1.0 } else { 0.0 };
                bio = bio.max((ip - target).abs());
            }
        }
    }
    s.check("eigen-relation residual, |k| <= 16 pi", eig, 1e-12);
    s.check("biorthogonality, |k| <= 16 pi", bio, 1e-12);
    let mut anti = 0.0f64;
    for _ in 0..n {
        let u = random::acoustic_state(g, rng, 1.0, 1.0);
        let v = random::acoustic_state(g, rng, 1.0, 1.0);
        let a = weighted_inner(&v, &apply_l(&u, params), params);
        let b = weighted_inner(&u, &apply_l(&v, params), params);
        anti = anti.max(rel((a + b).abs(), a.abs() + b.abs()));
    }
    s.check("A-weighted anti-symmetry", anti, 1e-12);
    Ok(s.out)
}

fn semigroup_suite(
    params: &PhysicalParams,
    g: &Grid,
    rng: &mut ChaCha8Rng,
    n: usize,
    scale: f64,
) -> Vec<Check> {
    let mut s = Suite::new("semigroup", scale);
    let (mut law, mut id, mut norm, mut rt) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let times = [0.3, 1.7, 1e4];
    for _ in 0..n {
        let v = random::modes(g, rng, 1.0, 1.0);
        let size = v.coefficient_norm_sq().sqrt();
        id = id.max(rel(
            (&semigroup_modes(0.0, &v, params) - &v)
                .coefficient_norm_sq()
                .sqrt(),
            size,
        ));
        let st = reconstruct(&v, params);
        rt = rt.max(rel(
            (&decompose(&st, params) - &v).coefficient_norm_sq().sqrt(),
            size,
        ));
        for &t in &times {
            let two = semigroup_modes(t, &semigroup_modes(0.5, &v, params), params);
            let one = semigroup_modes(t + 0.5, &v, params);
            law = law.max(rel((&two - &one).coefficient_norm_sq().sqrt(), size));
            let lt = reconstruct(&one, params);
            for k in 0..=2 {
                let (a, b) = (
                    weighted_sobolev_norm(&lt, k, params),
                    weighted_sobolev_norm(&st, k, params),
                );
                norm = norm.max(rel((a - b).abs(), b));
            }
        }
    }
    s.check("identity at t = 0", id, 1e-12);
    s.check("decompose after reconstruct", rt, 1e-12);
    s.check("group law", law, 1e-10);
    s.check("A-weighted H^s norm preservation, s = 0, 1, 2", norm, 1e-10);
    s.out
}

fn w_defects(s: &CpeState, params: &PhysicalParams, sp: &Spectral) -> (f64, f64) {
    let g = sp.grid();
    let f = vertical_source(&s.xi, &s.v, params, sp);
    let w = reconstruct_w(&s.xi, &s.v, params, sp);
    let wr = sp.to_real3(&w);
    let nz = g.nz;
    let bnd = (0..g.n2())
        .map(|h| wr[h * nz].abs().max(wr[h * nz + nz / 2].abs()))
        .fold(0.0, f64::max);
    let res = rel((&w.dz() + &f).max_abs(), f.max_abs());
    (bnd, res)
}

fn cpe_suite(
    params: &PhysicalParams,
    rng: &mut ChaCha8Rng,
    n: usize,
    scale: f64,
) -> Result<Vec<Check>> {
    let mut s = Suite::new("cpe", scale);
    let g = Grid::new(16, 16, 8)?;
    let sp = Spectral::new(g);
    let mut stepper = CpeStepper::new(&sp, *params);
    let zero = CpeState::zeros(&g);
    let z = stepper.step(&zero, 1e-3)?;
    s.check(
        "zero state stays zero",
        z.xi.max_abs().max(z.v.max_abs()),
        0.0,
    );
    let (mut bnd, mut res, mut sym) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..n.min(5) {
        let mut st = random::cpe_state(&g, rng, 0.05, 1.5);
        // keep e^{−εαξ} inside (1/2, 2) as γ → 1
        st.xi *= params.alpha().recip().min(1.0);
        for _ in 0..3 {
            let (b, r) = w_defects(&st, params, &sp);
            bnd = bnd.max(b);
            res = res.max(r);
            st = stepper.step(&st, 1e-3)?;
            sym = sym
                .max(st.v.parity_defect(1.0))
                .max(st.xi.hermitian_defect())
                .max(st.v.hermitian_defect());
        }
    }
    s.check("w at z in {0, 1}", bnd, 1e-12);
    s.check("dz w residual (relative)", res, 1e-12);
    s.check("evenness and reality after steps", sym, 1e-13);
    Ok(s.out)
}

fn limit_pe_suite(params: &PhysicalParams, rng: &mut ChaCha8Rng, scale: f64) -> Result<Vec<Check>> {
    let mut s = Suite::new("limit_pe", scale);
    let g = Grid::new(16, 16, 8)?;
    let sp = Spectral::new(g);
    let mut stepper = PeStepper::new(&sp, *params);
    let mut p = PeState::from_initial(&random::vector3_even(&g, rng, 0.2, 1.5));
    let (mut ptau, mut wb, mut growth) = (0.0f64, 0.0f64, f64::NEG_INFINITY);
    for _ in 0..10 {
        let next = stepper.step(&p, 1e-3)?;
        ptau = ptau.max(project_tau(&next.v_p).max_abs());
        let w = sp.to_real3(&reconstruct_w_p(&next.v_p));
        let nz = g.nz;
        wb = wb.max(
            (0..g.n2())
                .map(|h| w[h * nz].abs().max(w[h * nz + nz / 2].abs()))
                .fold(0.0, f64::max),
        );
        growth = growth.max(next.kinetic_energy() - p.kinetic_energy());
        p = next;
    }
    s.check("P_tau v_p", ptau, 1e-12);
    s.check("w_p at z in {0, 1}", wb, 1e-12);
    s.check("kinetic energy increase per step", growth.max(0.0), 0.0);
    Ok(s.out)
}

fn oscillation_suite(
    params: &PhysicalParams,
    rng: &mut ChaCha8Rng,
    scale: f64,
) -> Result<Vec<Check>> {
    let mut s = Suite::new("oscillation", scale);
    let a = audit(8.0 * std::f64::consts::PI);
    s.check(
        "co-linearity characterization violations",
        a.characterization_violations as f64,
        0.0,
    );
    s.check(
        "members of the reversed set",
        a.reversed_members as f64,
        0.0,
    );
    s.check(
        "members of the difference set",
        a.difference_members as f64,
        0.0,
    );
    let g = Grid::new(16, 16, 8)?;
    let ops = LimitOperators::new(&g, params);
    let v = random::modes(&g, rng, 1.0, 1.0);
    let u = crate::projections::project_sigma2(&random::vector2(&g, rng, 1.0, 1.0));
    let mut real = 0.0f64;
    for out in [
        ops.limit_q1(&u, &v),
        ops.limit_q2(&v, &v),
        ops.limit_q3(0.7, &v),
        ops.limit_a(&v),
    ] {
        real = real.max(rel(out.reality_defect(), out.max_abs()));
    }
    s.check("reality through the limit operators", real, 1e-12);
    // Q₃ only rotates phases: Re Σ conj(a)·(Q₃a) = 0
    let q3 = ops.limit_q3(1.0, &v);
    let ip: f64 = v
        .entries()
        .iter()
        .map(|(k, b, c)| (c.conj() * q3.get(*k, *b)).re)
        .sum();
    s.check(
        "Q3 skew",
        rel(ip.abs(), v.coefficient_norm_sq() * q3.max_abs()),
        1e-12,
    );
    Ok(s.out)
}

pub fn run_properties(cfg: &ExperimentConfig, opts: &PropertyOptions) -> Result<PropertyReport> {
    cfg.validate()?;
    let params = cfg.params_for(cfg.eps_list[0])?;
    let scale = tolerance_scale(&params);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = opts.samples.max(1);
    let mut checks = spectral_suite(&cfg.grid, &mut rng, n, scale);
    checks.extend(projection_suite(&cfg.grid, &mut rng, n, scale));
    let small = Grid::new(16, 16, 8)?;
    checks.extend(eigen_suite(
        &params,
        opts.eigenbasis_perturbation,
        &small,
        &mut rng,
        n,
        scale,
    )?);
    checks.extend(semigroup_suite(&params, &small, &mut rng, n, scale));
    checks.extend(cpe_suite(&params, &mut rng, n, scale)?);
    checks.extend(limit_pe_suite(&params, &mut rng, scale)?);
    checks.extend(oscillation_suite(&params, &mut rng, scale)?);
    Ok(PropertyReport {
        gamma: params.gamma(),
        tolerance_scale: scale,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        c.grid = Grid::new(16, 16, 8).unwrap();
        c
    }

    #[test]
    fn default_suites_pass() {
        let r = run_properties(
            &quick(),
            &PropertyOptions {
                samples: 4,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(r.all_passed(), "{:#?}", r.failures());
        for s in SUITES {
            assert!(r.checks.iter().any(|c| c.suite == s), "suite {s} is empty");
        }
    }

    #[test]
    fn perturbed_eigenbasis_fails_only_the_eigen_suite() {
        let opts = PropertyOptions {
            eigenbasis_perturbation: 1e-6,
            samples: 2,
        };
        let r = run_properties(&quick(), &opts).unwrap();
        assert!(!r.suite_passed("eigen"));
        for s in SUITES.iter().filter(|s| **s != "eigen") {
            assert!(r.suite_passed(s), "{s}: {:#?}", r.failures());
        }
    }

    #[test]
    fn near_degenerate_gamma_passes_with_scaled_tolerances() {
        let mut c = quick();
        c.params = PhysicalParams::new(1.0001, 1.0, 1.0, 1.0, 0.1).unwrap();
        let r = run_properties(
            &c,
            &PropertyOptions {
                samples: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((r.tolerance_scale - 1e4).abs() < 1e-6);
        assert!(r.all_passed(), "{:#?}", r.failures());
    }
}
