//! Grids and integer wavenumber lattices on T² × 2T.
//!
//! Horizontal wavenumbers are `2π·n`, vertical ones `π·n` (period 2 in z).
//! Lattice vectors are carried as integer index pairs so resonance tests stay exact.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer horizontal lattice index; the physical wavevector is `2π·n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Lattice(pub i64, pub i64);

impl Lattice {
    pub fn is_zero(self) -> bool {
        self.0 == 0 && self.1 == 0
    }
    /// Squared integer length `n₁² + n₂²`.
    pub fn norm2(self) -> i64 {
        self.0 * self.0 + self.1 * self.1
    }
    /// Physical wavevector `2π·n`.
    pub fn wavevector(self) -> [f64; 2] {
        [2.0 * PI * self.0 as f64, 2.0 * PI * self.1 as f64]
    }
    /// Physical length `|k| = 2π|n|`.
    pub fn length(self) -> f64 {
        2.0 * PI * (self.norm2() as f64).sqrt()
    }
    pub fn dot(self, o: Lattice) -> i64 {
        self.0 * o.0 + self.1 * o.1
    }
    pub fn cross(self, o: Lattice) -> i64 {
        self.0 * o.1 - self.1 * o.0
    }
}

impl std::ops::Add for Lattice {
    type Output = Lattice;
    fn add(self, o: Lattice) -> Lattice {
        Lattice(self.0 + o.0, self.1 + o.1)
    }
}

impl std::ops::Sub for Lattice {
    type Output = Lattice;
    fn sub(self, o: Lattice) -> Lattice {
        Lattice(self.0 - o.0, self.1 - o.1)
    }
}

impl std::ops::Neg for Lattice {
    type Output = Lattice;
    fn neg(self) -> Lattice {
        Lattice(-self.0, -self.1)
    }
}

/// Generalized sign: `+1` iff `k₁ > 0`, or `k₁ = 0` and `k₂ > 0`.
pub fn sg(k: Lattice) -> Result<i64> {
    if k.is_zero() {
        return Err(Error::Domain("sg is undefined at k = 0".into()));
    }
    Ok(sg_nonzero(k))
}

/// `sg` for callers that already excluded the zero vector.
#[inline]
pub(crate) fn sg_nonzero(k: Lattice) -> i64 {
    if k.0 > 0 || (k.0 == 0 && k.1 > 0) {
        1
    } else {
        -1
    }
}

/// Signed integer index of storage slot `j` on an axis of length `n` (FFT ordering).
#[inline]
pub fn signed_index(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Storage slot of signed index `m` on an axis of length `n`.
#[inline]
pub fn slot(m: i64, n: usize) -> usize {
    m.rem_euclid(n as i64) as usize
}

/// Slot of the negated wavenumber.
#[inline]
pub fn mirror(j: usize, n: usize) -> usize {
    (n - j) % n
}

fn default_dealias() -> f64 {
    2.0 / 3.0
}

/// Resolution of a simulation on T² × 2T.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    #[serde(default = "default_dealias")]
    pub dealias_fraction: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, nz: usize) -> Result<Self> {
        Self::with_dealias(nx, ny, nz, default_dealias())
    }

    pub fn with_dealias(nx: usize, ny: usize, nz: usize, dealias_fraction: f64) -> Result<Self> {
        let g = Grid {
            nx,
            ny,
            nz,
            dealias_fraction,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("nx", self.nx), ("ny", self.ny), ("nz", self.nz)] {
            if n < 2 || n % 2 != 0 {
                return Err(Error::Domain(format!(
                    "{name} must be even and positive, got {n}"
                )));
            }
        }
        if !(self.dealias_fraction > 0.0 && self.dealias_fraction <= 1.0) {
            return Err(Error::Domain(format!(
                "dealias fraction must lie in (0, 1], got {}",
                self.dealias_fraction
            )));
        }
        Ok(())
    }

    /// Largest retained |index| on an axis of length `n`.
    pub fn cutoff(&self, n: usize) -> i64 {
        let c = self.dealias_fraction * (n / 2) as f64;
        // strict inequality so 3·cutoff < n for the two-thirds rule
        let cut = c.ceil() as i64 - 1;
        if self.dealias_fraction >= 1.0 {
            (n / 2) as i64 - 1
        } else {
            cut.max(0)
        }
    }

    pub fn cutoff_x(&self) -> i64 {
        self.cutoff(self.nx)
    }
    pub fn cutoff_y(&self) -> i64 {
        self.cutoff(self.ny)
    }
    pub fn cutoff_z(&self) -> i64 {
        self.cutoff(self.nz)
    }

    pub fn in_band(&self, k: Lattice) -> bool {
        k.0.abs() <= self.cutoff_x() && k.1.abs() <= self.cutoff_y()
    }

    pub fn in_band_z(&self, n: i64) -> bool {
        n.abs() <= self.cutoff_z()
    }

    /// Nonzero horizontal lattice vectors inside the dealiased band.
    pub fn band_modes(&self) -> Vec<Lattice> {
        let (cx, cy) = (self.cutoff_x(), self.cutoff_y());
        (-cx..=cx)
            .flat_map(|a| (-cy..=cy).map(move |b| Lattice(a, b)))
            .filter(|k| !k.is_zero())
            .collect()
    }

    /// Smallest grid spacing of the physical mesh.
    pub fn spacing(&self) -> f64 {
        (1.0 / self.nx as f64)
            .min(1.0 / self.ny as f64)
            .min(2.0 / self.nz as f64)
    }

    pub fn n2(&self) -> usize {
        self.nx * self.ny
    }
    pub fn n3(&self) -> usize {
        self.nx * self.ny * self.nz
    }
}
