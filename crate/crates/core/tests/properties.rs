//! Randomized invariants of every solver module.

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lowmach_core::acoustic::{
    apply_l, conjugate_vector, decompose, eigen_vector, reconstruct, semigroup_modes,
    weighted_sobolev_norm, Branch,
};
use lowmach_core::cpe::{reconstruct_w, CpeStepper};
use lowmach_core::experiments::report::loglog_slope;
use lowmach_core::experiments::ExperimentConfig;
use lowmach_core::limit_pe::{reconstruct_w_p, PeState, PeStepper};
use lowmach_core::oscillation::resonance::{
    colinear_characterization, in_difference_set, in_reversed_set, resonance_check, Resonance,
};
use lowmach_core::oscillation::LimitOperators;
use lowmach_core::projections::{project_sigma, project_sigma2, project_tau};
use lowmach_core::snapshot::Snapshot;
use lowmach_core::{random, Grid, Lattice, PhysicalParams, ScalarField3, Spectral};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small() -> Grid {
    Grid::new(16, 16, 8).unwrap()
}

fn rel(d: f64, s: f64) -> f64 {
    if s > 0.0 {
        d / s
    } else {
        d
    }
}

fn params(gamma: f64) -> PhysicalParams {
    PhysicalParams::new(gamma, 1.0, 1.0, 1.0, 0.1).unwrap()
}

fn lattice(r: i64) -> impl Strategy<Value = Lattice> {
    (-r..=r, -r..=r).prop_map(|(a, b)| Lattice(a, b))
}

fn nonzero(r: i64) -> impl Strategy<Value = Lattice> {
    lattice(r).prop_filter("k != 0", |k| !k.is_zero())
}

fn z_boundary(sp: &Spectral, w: &ScalarField3) -> f64 {
    let g = sp.grid();
    let vals = sp.to_real3(w);
    (0..g.n2())
        .map(|h| vals[h * g.nz].abs().max(vals[h * g.nz + g.nz / 2].abs()))
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn derived_constants(gamma in 1.01f64..5.0, rho in 0.2f64..3.0) {
        let p = PhysicalParams::new(gamma, 1.0, 1.0, rho, 0.1).unwrap();
        prop_assert!(p.c2() > 0.0 && p.alpha() > 0.0);
        prop_assert!((p.varsigma().powi(2) - p.c2() * (gamma - 1.0)).abs() <= 1e-12 * p.c2() * gamma);
        prop_assert!((p.c2() - gamma / (gamma - 1.0) * rho.powf(gamma - 1.0)).abs() <= 1e-12 * p.c2());
        let unit = PhysicalParams::new(gamma, 1.0, 1.0, 1.0, 0.1).unwrap();
        prop_assert!((unit.c1() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn transforms_round_trip_and_parseval(seed in any::<u64>()) {
        let g = small();
        let sp = Spectral::new(g);
        let mut r = rng(seed);
        let f = random::scalar3_even(&g, &mut r, 1.0, 1.0);
        let back = sp.from_real3(&sp.to_real3(&f));
        prop_assert!(rel((&back - &f).sobolev_norm(0), f.sobolev_norm(0)) <= 1e-12);
        prop_assert!(rel((f.sobolev_norm_sq(0) - sp.mean_square3(&f)).abs(), f.sobolev_norm_sq(0)) <= 1e-12);
        prop_assert!(f.z_fluctuation().z_average().max_abs() <= 1e-13);
        let a = random::scalar2(&g, &mut r, 1.0, 1.0);
        let b = random::scalar2(&g, &mut r, 1.0, 1.0);
        prop_assert!(sp.product2(&a, &b).hermitian_defect() <= 1e-13);
    }

    #[test]
    fn single_mode_derivatives_are_exact(k in lattice(5), n in -3i64..=3) {
        let g = small();
        let one = Complex64::new(1.0, 0.0);
        let f = ScalarField3::from_modes(g.nx, g.ny, g.nz, &[(k, n, one)]);
        let w = k.wavevector();
        prop_assert_eq!(f.dx().get(k, n), Complex64::new(0.0, w[0]));
        prop_assert_eq!(f.dy().get(k, n), Complex64::new(0.0, w[1]));
        prop_assert!((f.dz().get(k, n) - Complex64::new(0.0, PI * n as f64)).norm() <= 1e-15);
    }

    #[test]
    fn projections_split_fields(seed in any::<u64>()) {
        let g = small();
        let mut r = rng(seed);
        let u = random::vector3_even(&g, &mut r, 1.0, 1.0);
        let nu = u.sobolev_norm(0);
        let ps = project_sigma(&u);
        let pt = project_tau(&u);
        let pt3 = pt.broadcast(g.nz);
        prop_assert!(rel((&project_sigma(&ps) - &ps).sobolev_norm(0), nu) <= 1e-12);
        prop_assert!(rel((&project_tau(&pt3) - &pt).sobolev_norm(0), nu) <= 1e-12);
        prop_assert!(rel(ps.inner(&pt3).norm(), nu * nu) <= 1e-12);
        let mut rest = &u - &ps;
        rest -= &pt3;
        prop_assert!(rel(rest.sobolev_norm(0), nu) <= 1e-13);
        for s in 0..=2 {
            prop_assert!(ps.sobolev_norm(s) <= u.sobolev_norm(s) * (1.0 + 1e-12));
        }
        // the vertical mean of P_σu is divergence free
        prop_assert!(rel(ps.z_average().div().max_abs(), u.sobolev_norm(1)) <= 1e-12);
    }

    #[test]
    fn eigenpairs(k in nonzero(8), gamma in 1.05f64..4.0) {
        let p = params(gamma);
        let w = k.wavevector();
        for b in Branch::BOTH {
            let v = eigen_vector(k, b, &p);
            // L on the amplitude vector of e^{ik·x}
            let lv = [
                Complex64::new(0.0, (gamma - 1.0) * (w[0] * v[1] + w[1] * v[2])),
                Complex64::new(0.0, p.c2() * w[0] * v[0]),
                Complex64::new(0.0, p.c2() * w[1] * v[0]),
            ];
            let sign = if b == Branch::Plus { -1.0 } else { 1.0 };
            let sg = lowmach_core::sg(k).unwrap() as f64;
            let lam = Complex64::new(0.0, sign * p.varsigma() * sg * k.length());
            let res: f64 = (0..3).map(|j| (lv[j] - lam * v[j]).norm_sqr()).sum::<f64>().sqrt();
            let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!(res <= 1e-12 * nv * (1.0 + k.length()));
            for b2 in Branch::BOTH {
                let c = conjugate_vector(k, b2, &p);
                let ip: f64 = (0..3).map(|j| v[j] * c[j]).sum();
                let target = if b == b2 { 1.0 } else { 0.0 };
                prop_assert!((ip - target).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn semigroup_is_a_weighted_isometry(seed in any::<u64>(), t in -50.0f64..50.0, s in -50.0f64..50.0, gamma in 1.1f64..3.0) {
        let g = small();
        let p = params(gamma);
        let v = random::modes(&g, &mut rng(seed), 1.0, 1.0);
        let size = v.coefficient_norm_sq().sqrt();
        let two = semigroup_modes(t, &semigroup_modes(s, &v, &p), &p);
        let one = semigroup_modes(t + s, &v, &p);
        prop_assert!(rel((&two - &one).coefficient_norm_sq().sqrt(), size) <= 1e-10);
        let (a, b) = (reconstruct(&one, &p), reconstruct(&v, &p));
        for k in 0..=2 {
            let (na, nb) = (weighted_sobolev_norm(&a, k, &p), weighted_sobolev_norm(&b, k, &p));
            prop_assert!(rel((na - nb).abs(), nb) <= 1e-10);
        }
        prop_assert!(rel((&decompose(&b, &p) - &v).coefficient_norm_sq().sqrt(), size) <= 1e-12);
        prop_assert!(a.q.hermitian_defect() <= 1e-12 && a.u.hermitian_defect() <= 1e-12);
        // L maps the kernel complement into itself: the q-mean stays zero
        prop_assert!(apply_l(&b, &p).q.mean().abs() <= 1e-12);
    }

    #[test]
    fn resonance_is_the_colinear_characterization(k in nonzero(12), l in nonzero(12)) {
        prop_assume!(!(k + l).is_zero());
        let resonant = resonance_check(k, l).unwrap() == Resonance::Resonant;
        prop_assert_eq!(resonant, colinear_characterization(k, l).unwrap());
        if resonant {
            prop_assert_eq!(k.cross(l), 0);
        }
        prop_assert!(!in_reversed_set(k, l).unwrap());
        prop_assert!(!in_difference_set(k, l).unwrap());
    }

    #[test]
    fn colinear_triads_resolve_by_signed_steps(d in nonzero(3), a in -6i64..=6, b in -6i64..=6) {
        prop_assume!(a != 0 && b != 0 && a + b != 0);
        let (k, l) = (Lattice(a * d.0, a * d.1), Lattice(b * d.0, b * d.1));
        // along a ray sg(·)|·| is the signed step times |d|, so every co-linear triad resonates
        prop_assert_eq!(resonance_check(k, l).unwrap(), Resonance::Resonant);
        prop_assert!(colinear_characterization(k, l).unwrap());
    }

    #[test]
    fn limit_operators_keep_reality(seed in any::<u64>(), g0 in -1.0f64..1.0) {
        let g = Grid::new(12, 12, 4).unwrap();
        let p = params(2.0);
        let ops = LimitOperators::new(&g, &p);
        let mut r = rng(seed);
        let v = random::modes(&g, &mut r, 1.0, 1.0);
        let u = project_sigma2(&random::vector2(&g, &mut r, 1.0, 1.0));
        for out in [ops.limit_q1(&u, &v), ops.limit_q2(&v, &v), ops.limit_q3(g0, &v), ops.limit_a(&v)] {
            prop_assert!(rel(out.reality_defect(), out.max_abs()) <= 1e-12);
        }
    }

    #[test]
    fn loglog_slope_recovers_powers(c in 0.1f64..10.0, q in -3.0f64..3.0) {
        let xs = [0.1, 0.05, 0.025, 0.0125];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| c * x.powf(q)).collect();
        prop_assert!((loglog_slope(&xs, &ys).unwrap() - q).abs() <= 1e-10);
    }

    #[test]
    fn eps_list_validation(list in prop::collection::vec(1e-4f64..0.999, 1..6)) {
        let mut c = ExperimentConfig::default();
        c.eps_list = list.clone();
        let ok = list.windows(2).all(|w| w[1] < w[0]);
        prop_assert_eq!(c.validate().is_ok(), ok);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn cpe_steps_keep_structure(seed in any::<u64>(), eps in 0.01f64..0.5) {
        let g = small();
        let sp = Spectral::new(g);
        let p = PhysicalParams::standard(eps).unwrap();
        let mut stepper = CpeStepper::new(&sp, p);
        let mut s = random::cpe_state(&g, &mut rng(seed), 0.1, 1.5);
        for _ in 0..3 {
            let w = reconstruct_w(&s.xi, &s.v, &p, &sp);
            prop_assert!(z_boundary(&sp, &w) <= 1e-12);
            prop_assert!(w.parity_defect(-1.0) <= 1e-14);
            s = stepper.step(&s, 1e-3).unwrap();
            prop_assert!(s.v.parity_defect(1.0) <= 1e-13);
            prop_assert!(s.xi.hermitian_defect() <= 1e-13 && s.v.hermitian_defect() <= 1e-13);
        }
    }

    #[test]
    fn pe_steps_stay_in_the_primitive_class(seed in any::<u64>()) {
        let g = small();
        let sp = Spectral::new(g);
        let p = PhysicalParams::standard(0.1).unwrap();
        let mut stepper = PeStepper::new(&sp, p);
        let mut st = PeState::from_initial(&random::vector3_even(&g, &mut rng(seed), 0.2, 1.5));
        for _ in 0..5 {
            let next = stepper.step(&st, 1e-3).unwrap();
            prop_assert!(project_tau(&next.v_p).max_abs() <= 1e-12);
            prop_assert!(z_boundary(&sp, &reconstruct_w_p(&next.v_p)) <= 1e-12);
            prop_assert!(next.kinetic_energy() <= st.kinetic_energy() * (1.0 + 1e-12));
            st = next;
        }
    }

    #[test]
    fn snapshots_round_trip(seed in any::<u64>(), t in 0.0f64..10.0) {
        let g = Grid::new(8, 6, 4).unwrap();
        let s = random::cpe_state(&g, &mut rng(seed), 1.0, 1.0);
        let snap = Snapshot { gamma: 2.0, eps: 0.05, time: t, xi: s.xi, v: s.v };
        let mut buf = Vec::new();
        snap.write(&mut buf).unwrap();
        prop_assert_eq!(Snapshot::read(&mut buf.as_slice()).unwrap(), snap);
    }
}
