//! Initial data for the experiment presets.

use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{InitialData, Preset};
use crate::cpe::CpeState;
use crate::field::{ScalarField3, VectorField3};
use crate::random;
use crate::spectral::Spectral;

/// `0.5(−∂_y, ∂_x)(sin2πx sin2πy)·(1 + 0.3cos2πz)`.
fn solenoidal_part(sp: &Spectral) -> VectorField3 {
    let x = sp.sample3(|x, y, z| {
        -0.5 * TAU * (TAU * x).sin() * (TAU * y).cos() * (1.0 + 0.3 * (TAU * z).cos())
    });
    let y = sp.sample3(|x, y, z| {
        0.5 * TAU * (TAU * x).cos() * (TAU * y).sin() * (1.0 + 0.3 * (TAU * z).cos())
    });
    VectorField3::new(x, y)
}

/// `∇ₕ(0.2 sin2πx)`.
fn gradient_part(sp: &Spectral) -> VectorField3 {
    let x = sp.sample3(|x, _, _| 0.4 * PI * (TAU * x).cos());
    VectorField3::new(x, ScalarField3::zeros_like_grid(sp.grid()))
}

pub fn initial_state(data: &InitialData, sp: &Spectral, seed: u64) -> CpeState {
    let g = sp.grid();
    let a = data.amplitude;
    let mut s = match data.preset {
        Preset::WellPrepared => CpeState {
            xi: crate::field::ScalarField2::zeros_like_grid(g),
            v: solenoidal_part(sp),
            time: 0.0,
        },
        Preset::IllPrepared => {
            let xi = sp.sample2(|x, y| 0.3 * ((TAU * x).cos() + (TAU * y).sin()));
            let mut v = solenoidal_part(sp);
            v += &gradient_part(sp);
            CpeState { xi, v, time: 0.0 }
        }
        Preset::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            random::cpe_state(g, &mut rng, 0.3, 1.5)
        }
    };
    s.xi *= a;
    s.v *= a;
    s.enforce_invariants(g);
    s
}
