//! The splitting `u = P_σ u + P_τ u` of horizontal velocities.
//!
//! `P_τ u = ∇ₕψ` where `Δₕψ = ∫₀¹ divₕ u dz` with zero mean on T², and `P_σ = I − P_τ`.

use crate::acoustic::AcousticState;
use crate::field::{ScalarField2, VectorField2, VectorField3};

/// Mean-zero solution of a Poisson problem on T².
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    pub psi: ScalarField2,
    /// Mean of the source that had to be discarded (torus compatibility).
    pub discarded_mean: f64,
}

impl Potential {
    pub fn has_compatibility_warning(&self) -> bool {
        self.discarded_mean.abs() > 1e-10
    }
}

/// Solves `Δψ = src − mean(src)` with `mean(ψ) = 0`.
pub fn solve_poisson(src: &ScalarField2) -> Potential {
    let discarded_mean = src.mean_complex().norm();
    let psi = src.map_modes(|k, c| {
        if k.is_zero() {
            c * 0.0
        } else {
            -c / k.length().powi(2)
        }
    });
    Potential {
        psi,
        discarded_mean,
    }
}

/// Gradient part of a 2D field: the longitudinal component of every nonzero mode.
pub fn project_tau2(u: &VectorField2) -> VectorField2 {
    solve_poisson(&u.div()).psi.grad()
}

pub fn project_sigma2(u: &VectorField2) -> VectorField2 {
    u - &project_tau2(u)
}

/// `P_τ u = ∇ₕψ_u`, a z-independent field.
pub fn project_tau(u: &VectorField3) -> VectorField2 {
    project_tau2(&u.z_average())
}

/// `P_σ u = u − ∇ₕψ_u`.
pub fn project_sigma(u: &VectorField3) -> VectorField3 {
    let mut out = u.clone();
    out.add_broadcast(-1.0, &project_tau(u));
    out
}

/// `(q − ∫q, P_τ u)`.
pub fn project_ker_perp(q: &ScalarField2, u: &VectorField3) -> AcousticState {
    AcousticState {
        q: q.without_mean(),
        u: project_tau(u),
    }
}

/// Same projection for a state already living on T².
pub fn project_ker_perp2(state: &AcousticState) -> AcousticState {
    AcousticState {
        q: state.q.without_mean(),
        u: project_tau2(&state.u),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::spectral::{tau, Spectral};
    use std::f64::consts::PI;

    fn sp() -> Spectral {
        Spectral::new(Grid::new(16, 16, 8).unwrap())
    }

    #[test]
    fn poisson_examples() {
        let s = sp();
        let src = s.sample2(|x, _| -4.0 * PI * PI * tau(x).sin());
        let p = solve_poisson(&src);
        assert!((&p.psi - &s.sample2(|x, _| tau(x).sin())).max_abs() < 1e-14);
        assert!(!p.has_compatibility_warning());
        let src = s.sample2(|x, y| -8.0 * PI * PI * tau(x).sin() * tau(y).sin());
        let p = solve_poisson(&src);
        assert!((&p.psi - &s.sample2(|x, y| tau(x).sin() * tau(y).sin())).max_abs() < 1e-14);
        assert_eq!(
            solve_poisson(&ScalarField2::zeros(16, 16)).psi.max_abs(),
            0.0
        );
    }

    #[test]
    fn poisson_flags_incompatible_source() {
        let s = sp();
        let p = solve_poisson(&s.sample2(|x, _| 1.0 + tau(x).cos()));
        assert!(p.has_compatibility_warning());
        assert_eq!(p.psi.mean(), 0.0);
    }

    #[test]
    fn gradient_is_pure_tau() {
        let s = sp();
        let phi = s.sample2(|x, _| 0.2 * tau(x).sin());
        let u = phi.grad().broadcast(8);
        assert!((&project_tau(&u) - &phi.grad()).max_abs() < 1e-14);
        assert!(project_sigma(&u).max_abs() < 1e-14);
    }

    #[test]
    fn rotational_is_pure_sigma() {
        let s = sp();
        let psi = s.sample2(|x, y| tau(x).sin() * tau(2.0 * y).cos());
        let u = VectorField2::new(-psi.dy(), psi.dx()).broadcast(8);
        assert!((&project_sigma(&u) - &u).max_abs() < 1e-14);
    }

    #[test]
    fn vertically_oscillating_gradient_is_sigma() {
        let s = sp();
        let gx = s.sample3(|x, _, z| tau(z).cos() * tau(x).cos() * 2.0 * PI);
        let u = VectorField3::new(gx, crate::field::ScalarField3::zeros(16, 16, 8));
        assert!(project_tau(&u).max_abs() < 1e-14);
        assert!((&project_sigma(&u) - &u).max_abs() < 1e-14);
    }

    #[test]
    fn ker_perp_examples() {
        let s = sp();
        let q = s.sample2(|_, _| 3.0);
        let st = project_ker_perp(&q, &VectorField3::zeros(16, 16, 8));
        assert!(st.q.max_abs() < 1e-15 && st.u.max_abs() < 1e-15);
        let q = s.sample2(|x, _| tau(x).sin());
        let psi = s.sample2(|x, y| tau(x).cos() * tau(y).cos());
        let u = VectorField2::new(-psi.dy(), psi.dx()).broadcast(8);
        let st = project_ker_perp(&q, &u);
        assert!((&st.q - &q).max_abs() < 1e-15);
        assert!(st.u.max_abs() < 1e-14);
    }
}
