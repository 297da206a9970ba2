//! Seeded random smooth fields for property checks.

use num_complex::Complex64;
use rand::Rng;

use crate::acoustic::{AcousticState, Branch, ModeCoefficients};
use crate::cpe::CpeState;
use crate::field::{ScalarField2, ScalarField3, VectorField2, VectorField3};
use crate::grid::{Grid, Lattice};

fn amp<R: Rng>(rng: &mut R, n2: f64, decay: f64) -> Complex64 {
    let s = (1.0 + n2).powf(-decay);
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * s
}

/// Real field on the dealiased band with amplitudes decaying like `(1+|n|²)^{−decay}`.
pub fn scalar2<R: Rng>(g: &Grid, rng: &mut R, scale: f64, decay: f64) -> ScalarField2 {
    let mut f = ScalarField2::zeros_like_grid(g);
    for k in g.band_modes().into_iter().chain([Lattice(0, 0)]) {
        f.set(k, amp(rng, k.norm2() as f64, decay) * scale);
    }
    f.make_real();
    f
}

/// Real field even in z on the dealiased band.
pub fn scalar3_even<R: Rng>(g: &Grid, rng: &mut R, scale: f64, decay: f64) -> ScalarField3 {
    let mut f = ScalarField3::zeros_like_grid(g);
    let cz = g.cutoff_z();
    for k in g.band_modes().into_iter().chain([Lattice(0, 0)]) {
        for n in -cz..=cz {
            f.set(k, n, amp(rng, (k.norm2() + n * n) as f64, decay) * scale);
        }
    }
    let mut f = f.even_part();
    f.make_real();
    f
}

pub fn vector2<R: Rng>(g: &Grid, rng: &mut R, scale: f64, decay: f64) -> VectorField2 {
    VectorField2::new(scalar2(g, rng, scale, decay), scalar2(g, rng, scale, decay))
}

pub fn vector3_even<R: Rng>(g: &Grid, rng: &mut R, scale: f64, decay: f64) -> VectorField3 {
    VectorField3::new(
        scalar3_even(g, rng, scale, decay),
        scalar3_even(g, rng, scale, decay),
    )
}

pub fn acoustic_state<R: Rng>(g: &Grid, rng: &mut R, scale: f64, decay: f64) -> AcousticState {
    AcousticState {
        q: scalar2(g, rng, scale, decay),
        u: vector2(g, rng, scale, decay),
    }
}

pub fn cpe_state<R: Rng>(g: &Grid, rng: &mut R, scale: f64, decay: f64) -> CpeState {
    CpeState {
        xi: scalar2(g, rng, scale, decay),
        v: vector3_even(g, rng, scale, decay),
        time: 0.0,
    }
}

/// Real mode coefficients on the dealiased band.
pub fn modes<R: Rng>(g: &Grid, rng: &mut R, scale: f64, decay: f64) -> ModeCoefficients {
    let mut m = ModeCoefficients::zeros(g.nx, g.ny);
    for k in g.band_modes() {
        for b in Branch::BOTH {
            m.set(k, b, amp(rng, k.norm2() as f64, decay) * scale);
        }
    }
    m.make_real();
    m
}
