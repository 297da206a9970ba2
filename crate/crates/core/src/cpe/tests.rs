use super::*;
use crate::acoustic::semigroup;
use crate::grid::Lattice;
use crate::random;
use crate::spectral::tau;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sp(n: usize, nz: usize) -> Spectral {
    Spectral::new(Grid::new(n, n, nz).unwrap())
}

/// Dealiased grid product of a 3D and a 2D real field, computed independently of the solver.
fn prod32(sp: &Spectral, a: &ScalarField3, b: &ScalarField2) -> ScalarField3 {
    let g = sp.grid();
    let pa = sp.to_real3(a);
    let pb = sp.to_real2(b);
    let v: Vec<f64> = pa
        .iter()
        .enumerate()
        .map(|(p, x)| x * pb[p / g.nz])
        .collect();
    sp.from_real3(&v).dealiased(g)
}

fn prod33(sp: &Spectral, a: &ScalarField3, b: &ScalarField3) -> ScalarField3 {
    let pa = sp.to_real3(a);
    let pb = sp.to_real3(b);
    let v: Vec<f64> = pa.iter().zip(&pb).map(|(x, y)| x * y).collect();
    sp.from_real3(&v).dealiased(sp.grid())
}

fn map2(sp: &Spectral, a: &ScalarField2, f: impl Fn(f64) -> f64) -> Vec<f64> {
    sp.to_real2(a).into_iter().map(f).collect()
}

#[test]
fn w_vanishes_for_z_independent_v() {
    let s = sp(16, 8);
    let p = PhysicalParams::standard(0.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let xi = random::scalar2(s.grid(), &mut rng, 0.3, 1.5);
    let v2 = random::vector2(s.grid(), &mut rng, 1.0, 1.5);
    let w = reconstruct_w(&xi, &v2.broadcast(8), &p, &s);
    assert!(w.max_abs() < 1e-15);
}

#[test]
fn w_antiderivative_example() {
    let s = sp(16, 8);
    let p = PhysicalParams::standard(0.1).unwrap();
    let vx = s.sample3(|x, _, z| tau(z).cos() * tau(x).sin());
    let v = VectorField3::new(vx, ScalarField3::zeros(16, 16, 8));
    let w = reconstruct_w(&ScalarField2::zeros(16, 16), &v, &p, &s);
    let expect = s.sample3(|x, _, z| -tau(x).cos() * tau(z).sin());
    assert!((&w - &expect).max_abs() < 1e-14);
}

#[test]
fn w_residual_and_boundary_values() {
    let s = sp(16, 8);
    let p = PhysicalParams::standard(0.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let st = random::cpe_state(s.grid(), &mut rng, 0.5, 1.5);
    let w = reconstruct_w(&st.xi, &st.v, &p, &s);
    let vt = st.v.z_fluctuation();
    let mut res = w.dz();
    res += &(&prod32(&s, &vt.x, &st.xi.dx()) * (p.eps() * p.alpha()));
    res += &(&prod32(&s, &vt.y, &st.xi.dy()) * (p.eps() * p.alpha()));
    res += &vt.div_h();
    assert!(res.max_abs() < 1e-12, "residual {}", res.max_abs());
    assert!(w.parity_defect(-1.0) < 1e-15);
    let vals = s.to_real3(&w);
    let nz = 8;
    for h in 0..256 {
        assert!(vals[h * nz].abs() < 1e-12);
        assert!(vals[h * nz + nz / 2].abs() < 1e-12);
    }
}

#[test]
fn rhs_split_trivial_cases() {
    let s = sp(16, 8);
    let p = PhysicalParams::standard(0.1).unwrap();
    let zero = CpeState::zeros(s.grid());
    let (stiff, soft) = rhs_split(&zero, &p, &s);
    assert_eq!(stiff.max_abs(), 0.0);
    assert_eq!(soft.xi.max_abs() + soft.v.max_abs(), 0.0);
    let psi = s.sample2(|x, y| tau(x).sin() * tau(y).sin());
    let st = CpeState {
        xi: ScalarField2::zeros(16, 16),
        v: VectorField2::new(-psi.dy(), psi.dx()).broadcast(8),
        time: 0.0,
    };
    let (stiff, _) = rhs_split(&st, &p, &s);
    assert!(stiff.max_abs() < 1e-13);
}

#[test]
fn rhs_split_reassembles_the_full_right_hand_side() {
    let s = sp(16, 8);
    let g = *s.grid();
    let p = PhysicalParams::standard(0.05).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let st = random::cpe_state(&g, &mut rng, 0.4, 1.5);
    let got = full_rhs(&st, &p, &s);

    // independent evaluation of the system as written, with the 1/ε terms in physical space
    let (eps, c2, c1, ea) = (p.eps(), p.c2(), p.c1(), p.eps() * p.alpha());
    let w = reconstruct_w(&st.xi, &st.v, &p, &s);
    let nz = g.nz;
    let mut xi_t = -(&prod32(&s, &st.v.x, &st.xi.dx()) + &prod32(&s, &st.v.y, &st.xi.dy()));
    xi_t -= &(&(&st.v.div_h() + &w.dz()) * ((p.gamma() - 1.0) / eps));
    // must be z-independent
    let xi_z = xi_t.z_mean_mode().broadcast(nz);
    assert!((&xi_t - &xi_z).max_abs() < 1e-9 * xi_t.max_abs());
    let e_xi = xi_t.z_mean_mode() - &got.xi;
    assert!(
        e_xi.sobolev_norm(0) < 1e-12 * got.xi.sobolev_norm(0),
        "{}",
        e_xi.sobolev_norm(0)
    );

    let ep = map2(&s, &st.xi, |x| c2 * (eps * x).exp() / eps);
    let em = map2(&s, &st.xi, |x| c1 * (-ea * x).exp());
    let gx = s.to_real2(&st.xi.dx());
    let gy = s.to_real2(&st.xi.dy());
    let px: Vec<f64> = (0..g.n2()).map(|h| ep[h] * gx[h]).collect();
    let py: Vec<f64> = (0..g.n2()).map(|h| ep[h] * gy[h]).collect();
    let pres = VectorField2::new(
        s.from_real2(&px).dealiased(&g),
        s.from_real2(&py).dealiased(&g),
    );
    let vis = viscous_operator(&st.v, &p);
    for (comp, (vc, (pc, visc))) in [(&st.v.x, (&pres.x, &vis.x)), (&st.v.y, (&pres.y, &vis.y))]
        .into_iter()
        .enumerate()
    {
        let mut t = -(&prod33(&s, &st.v.x, &vc.dx()) + &prod33(&s, &st.v.y, &vc.dy()));
        t -= &prod33(&s, &w, &vc.dz());
        t.add_broadcast(-1.0, pc);
        // e^{−εαξ} is not band limited; evaluate the product on the grid directly
        let pv = s.to_real3(visc);
        let raw: Vec<f64> = pv.iter().enumerate().map(|(q, x)| x * em[q / nz]).collect();
        t += &s.from_real3(&raw).dealiased(&g);
        let got_c = if comp == 0 { &got.v.x } else { &got.v.y };
        let err = (&t - got_c).sobolev_norm(0);
        assert!(
            err < 1e-12 * got_c.sobolev_norm(0),
            "component {comp}: {err}"
        );
    }
}

#[test]
fn zero_state_stays_zero() {
    let s = sp(8, 4);
    let p = PhysicalParams::standard(0.1).unwrap();
    let zero = CpeState::zeros(s.grid());
    let next = step(&zero, 1e-3, &p, &s).unwrap();
    assert_eq!(next.xi.max_abs() + next.v.max_abs(), 0.0);
    assert_eq!(next.time, 1e-3);
}

#[test]
fn linear_acoustics_match_the_semigroup() {
    let s = sp(16, 4);
    let p = PhysicalParams::standard(0.05).unwrap();
    let xi = s.sample2(|x, _| 0.1 * tau(x).sin());
    let st = CpeState {
        xi: xi.clone(),
        v: VectorField3::zeros(16, 16, 4),
        time: 0.0,
    };
    let mut stepper = CpeStepper::with_options(
        &s,
        p,
        StepOptions {
            nonlinear: false,
            viscous: false,
        },
    );
    let t = 0.137;
    let out = stepper.advance(&st, t, 1e-2).unwrap();
    let u0 = AcousticState {
        q: xi,
        u: VectorField2::zeros(16, 16),
    };
    let exact = semigroup(t / p.eps(), &u0, &p);
    assert!((&out.xi - &exact.q).max_abs() < 1e-13);
    assert!((&out.v.z_mean_mode() - &exact.u).max_abs() < 1e-13);
}

#[test]
fn viscous_decay_matches_closed_form() {
    let s = sp(16, 8);
    let p = PhysicalParams::standard(0.1).unwrap();
    // transverse mode: u = (0, sin(2πx))·cos(πz)
    let vy = s.sample3(|x, _, z| tau(x).sin() * (std::f64::consts::PI * z).cos());
    let st = CpeState {
        xi: ScalarField2::zeros(16, 16),
        v: VectorField3::new(ScalarField3::zeros(16, 16, 8), vy.clone()),
        time: 0.0,
    };
    let mut stepper = CpeStepper::new(&s, p);
    let out = stepper.advance(&st, 0.05, 1e-2).unwrap();
    let rate = p.mu() * (2.0 * PI).powi(2) + PI * PI;
    let expect = &vy * (-rate * 0.05).exp();
    assert!((&out.v.y - &expect).max_abs() < 1e-14);
    let e = energy(&out, &p);
    assert!(e.e_l2 < energy(&st, &p).e_l2);
}

#[test]
fn second_order_self_convergence() {
    let s = sp(16, 8);
    let p = PhysicalParams::standard(0.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let st = random::cpe_state(s.grid(), &mut rng, 0.3, 2.0);
    let mut stepper = CpeStepper::new(&s, p);
    let t = 0.02;
    let a = stepper.advance(&st, t, t / 8.0).unwrap();
    let b = stepper.advance(&st, t, t / 16.0).unwrap();
    let c = stepper.advance(&st, t, t / 32.0).unwrap();
    let d1 = (&a.v - &b.v).sobolev_norm(0) + (&a.xi - &b.xi).sobolev_norm(0);
    let d2 = (&b.v - &c.v).sobolev_norm(0) + (&b.xi - &c.xi).sobolev_norm(0);
    let ratio = d1 / d2;
    assert!((3.3..4.8).contains(&ratio), "ratio {ratio}");
}

#[test]
fn step_preserves_invariants() {
    let s = sp(16, 8);
    let p = PhysicalParams::standard(0.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let st = random::cpe_state(s.grid(), &mut rng, 0.3, 1.5);
    let out = step(&st, 1e-3, &p, &s).unwrap();
    assert!(out.v.parity_defect(1.0) < 1e-15);
    assert!(out.v.hermitian_defect() < 1e-13);
    assert!(out.xi.hermitian_defect() < 1e-13);
}

#[test]
fn non_finite_state_is_reported() {
    let s = sp(8, 4);
    let p = PhysicalParams::standard(0.1).unwrap();
    let mut st = CpeState::zeros(s.grid());
    st.xi.set(Lattice(1, 0), Complex64::new(f64::NAN, 0.0));
    assert!(matches!(
        step(&st, 1e-3, &p, &s),
        Err(Error::Integration { .. })
    ));
}

#[test]
fn energy_of_single_mode() {
    let s = sp(8, 4);
    let p = PhysicalParams::standard(0.1).unwrap();
    let st = CpeState {
        xi: s.sample2(|x, _| tau(x).sin()),
        v: VectorField3::zeros(8, 8, 4),
        time: 0.0,
    };
    let e = energy(&st, &p);
    // c²/(γ−1)·½
    assert!((e.e_l2 - 1.0).abs() < 1e-14);
    assert!((e.e_h2 - (1.0 + 4.0 * PI * PI).powi(2)).abs() < 1e-9);
    assert_eq!(energy(&CpeState::zeros(s.grid()), &p).e_l2, 0.0);
}

#[test]
fn stability_dt_scaling() {
    let s = sp(16, 8);
    let zero = CpeState::zeros(s.grid());
    assert_eq!(stability_dt(&zero, &s, 0.5, 0.01), 0.01);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let st = random::cpe_state(s.grid(), &mut rng, 1.0, 1.0);
    let d1 = stability_dt(&st, &s, 0.5, 1.0);
    let st2 = CpeState {
        v: &st.v * 2.0,
        ..st.clone()
    };
    let d2 = stability_dt(&st2, &s, 0.5, 1.0);
    assert!((d1 / d2 - 2.0).abs() < 1e-12);
}

#[test]
fn picard_zero_data_gives_zero() {
    let s = sp(8, 4);
    let p = PhysicalParams::standard(0.05).unwrap();
    let zero = CpeState::zeros(s.grid());
    let guess = Trajectory::constant(&zero, 0.01, 4);
    let out = picard_step(&guess, &p, &s).unwrap();
    assert!(out
        .states
        .iter()
        .all(|st| st.xi.max_abs() + st.v.max_abs() == 0.0));
}

#[test]
fn picard_reproduces_its_fixed_point() {
    let s = sp(8, 4);
    let p = PhysicalParams::standard(0.05).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let st = random::cpe_state(s.grid(), &mut rng, 0.2, 2.0);
    let rep = picard_iterate(&st, 0.01, 20, &p, &s, 60, 1e-13).unwrap();
    assert!(rep.converged, "{:?}", rep.differences);
    let again = picard_step(&rep.trajectory, &p, &s).unwrap();
    let d = y_norm(&again, &rep.trajectory);
    assert!(d < 1e-11, "{d}");
}
