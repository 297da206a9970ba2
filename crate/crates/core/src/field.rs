//! Spectral field containers.
//!
//! Every field stores Fourier coefficients `c` with `f(x) = Σ c·e^{i(k·x + k_z z)}` on the unit
//! torus T² (and period-2 z), so `‖f‖²_{L²}` is `Σ|c|²` and single modes are orthonormal.
//! Layout is row-major `(ix, iy[, iz])` with FFT index ordering on each axis.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::grid::{mirror, signed_index, slot, Grid, Lattice};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Multiplier of a first derivative; the unpaired Nyquist slot is dropped to keep reality.
#[inline]
fn d1(m: i64, n: usize, scale: f64) -> f64 {
    if m.unsigned_abs() as usize * 2 == n {
        0.0
    } else {
        scale * m as f64
    }
}

/// Weight of mode `e^{iπnz}` in the average over z ∈ (0, 1).
#[inline]
pub fn z_average_weight(n: i64) -> Complex64 {
    if n == 0 {
        Complex64::new(1.0, 0.0)
    } else if n % 2 == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(0.0, 2.0 / (PI * n as f64))
    }
}

/// Horizontal scalar field (no z dependence), e.g. ξ.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField2 {
    nx: usize,
    ny: usize,
    data: Vec<Complex64>,
}

/// Scalar field on T² × 2T, e.g. the vertical velocity w.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField3 {
    nx: usize,
    ny: usize,
    nz: usize,
    data: Vec<Complex64>,
}

/// Horizontal vector field on T².
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField2 {
    pub x: ScalarField2,
    pub y: ScalarField2,
}

/// Horizontal velocity on T² × 2T.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField3 {
    pub x: ScalarField3,
    pub y: ScalarField3,
}

impl ScalarField2 {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        ScalarField2 {
            nx,
            ny,
            data: vec![Complex64::new(0.0, 0.0); nx * ny],
        }
    }

    pub fn zeros_like_grid(g: &Grid) -> Self {
        Self::zeros(g.nx, g.ny)
    }

    /// Wraps raw coefficients in storage order; panics on a length mismatch.
    pub fn from_coefficients(nx: usize, ny: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(
            data.len(),
            nx * ny,
            "coefficient count does not match {nx}x{ny}"
        );
        ScalarField2 { nx, ny, data }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }
    pub fn coeffs(&self) -> &[Complex64] {
        &self.data
    }
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }
    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.data
    }

    #[inline]
    pub fn lattice_at(&self, idx: usize) -> Lattice {
        Lattice(
            signed_index(idx / self.ny, self.nx),
            signed_index(idx % self.ny, self.ny),
        )
    }

    #[inline]
    pub fn index_of(&self, k: Lattice) -> usize {
        slot(k.0, self.nx) * self.ny + slot(k.1, self.ny)
    }

    /// True when `k` is representable on this grid (Nyquist slots count as representable).
    pub fn contains(&self, k: Lattice) -> bool {
        k.0.abs() <= (self.nx / 2) as i64 && k.1.abs() <= (self.ny / 2) as i64
    }

    pub fn get(&self, k: Lattice) -> Complex64 {
        if self.contains(k) {
            self.data[self.index_of(k)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn set(&mut self, k: Lattice, c: Complex64) {
        let i = self.index_of(k);
        self.data[i] = c;
    }

    pub fn add_at(&mut self, k: Lattice, c: Complex64) {
        let i = self.index_of(k);
        self.data[i] += c;
    }

    /// Builds a field from `(k, c)` pairs.
    pub fn from_modes(nx: usize, ny: usize, modes: &[(Lattice, Complex64)]) -> Self {
        let mut f = Self::zeros(nx, ny);
        for &(k, c) in modes {
            f.add_at(k, c);
        }
        f
    }

    /// Applies a per-mode multiplier.
    pub fn map_modes(&self, mut f: impl FnMut(Lattice, Complex64) -> Complex64) -> Self {
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(i, &c)| f(self.lattice_at(i), c))
            .collect();
        ScalarField2 {
            nx: self.nx,
            ny: self.ny,
            data,
        }
    }

    pub fn modes(&self) -> impl Iterator<Item = (Lattice, Complex64)> + '_ {
        self.data
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.lattice_at(i), c))
    }

    pub fn dx(&self) -> Self {
        let n = self.nx;
        self.map_modes(|k, c| I * d1(k.0, n, 2.0 * PI) * c)
    }
    pub fn dy(&self) -> Self {
        let n = self.ny;
        self.map_modes(|k, c| I * d1(k.1, n, 2.0 * PI) * c)
    }
    pub fn laplacian(&self) -> Self {
        self.map_modes(|k, c| -k.length().powi(2) * c)
    }
    pub fn grad(&self) -> VectorField2 {
        VectorField2 {
            x: self.dx(),
            y: self.dy(),
        }
    }

    /// Mean over T² (the zero mode); real part for real fields.
    pub fn mean(&self) -> f64 {
        self.data[0].re
    }
    pub fn mean_complex(&self) -> Complex64 {
        self.data[0]
    }

    pub fn sobolev_norm(&self, s: u32) -> f64 {
        self.sobolev_norm_sq(s).sqrt()
    }

    pub fn sobolev_norm_sq(&self, s: u32) -> f64 {
        self.modes()
            .map(|(k, c)| (1.0 + k.length().powi(2)).powi(s as i32) * c.norm_sqr())
            .sum()
    }

    /// `∫ a·conj(b)`.
    pub fn inner(&self, o: &Self) -> Complex64 {
        self.data
            .iter()
            .zip(&o.data)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    /// `∫ a·b` without conjugation.
    pub fn integral_of_product(&self, o: &Self) -> Complex64 {
        (0..self.data.len())
            .map(|i| {
                let k = self.lattice_at(i);
                self.data[i] * o.get(-k)
            })
            .sum()
    }

    /// Largest violation of `c(−k) = conj(c(k))`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for ix in 0..self.nx {
            for iy in 0..self.ny {
                let a = self.data[ix * self.ny + iy];
                let b = self.data[mirror(ix, self.nx) * self.ny + mirror(iy, self.ny)];
                worst = worst.max((a - b.conj()).norm());
            }
        }
        worst
    }

    /// Replaces the field by its real part in physical space.
    pub fn make_real(&mut self) {
        let src = self.data.clone();
        for ix in 0..self.nx {
            for iy in 0..self.ny {
                let b = src[mirror(ix, self.nx) * self.ny + mirror(iy, self.ny)];
                let i = ix * self.ny + iy;
                self.data[i] = 0.5 * (src[i] + b.conj());
            }
        }
    }

    /// Zeros modes outside the dealiased band.
    pub fn dealias(&mut self, g: &Grid) {
        let (cx, cy) = (g.cutoff(self.nx), g.cutoff(self.ny));
        for i in 0..self.data.len() {
            let k = self.lattice_at(i);
            if k.0.abs() > cx || k.1.abs() > cy {
                self.data[i] = Complex64::new(0.0, 0.0);
            }
        }
    }

    pub fn dealiased(mut self, g: &Grid) -> Self {
        self.dealias(g);
        self
    }

    /// Removes the mean.
    pub fn without_mean(&self) -> Self {
        let mut f = self.clone();
        f.data[0] = Complex64::new(0.0, 0.0);
        f
    }

    pub fn scale_complex(&mut self, a: Complex64) {
        self.data.iter_mut().for_each(|c| *c *= a);
    }

    pub fn axpy(&mut self, a: f64, x: &Self) {
        self.data
            .iter_mut()
            .zip(&x.data)
            .for_each(|(c, d)| *c += a * d);
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// The same field as a z-independent 3D field.
    pub fn broadcast(&self, nz: usize) -> ScalarField3 {
        let mut f = ScalarField3::zeros(self.nx, self.ny, nz);
        for (i, &c) in self.data.iter().enumerate() {
            f.data[i * nz] = c;
        }
        f
    }
}

impl ScalarField3 {
    pub fn zeros(nx: usize, ny: usize, nz: usize) -> Self {
        ScalarField3 {
            nx,
            ny,
            nz,
            data: vec![Complex64::new(0.0, 0.0); nx * ny * nz],
        }
    }

    pub fn zeros_like_grid(g: &Grid) -> Self {
        Self::zeros(g.nx, g.ny, g.nz)
    }

    pub fn from_coefficients(nx: usize, ny: usize, nz: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(
            data.len(),
            nx * ny * nz,
            "coefficient count does not match {nx}x{ny}x{nz}"
        );
        ScalarField3 { nx, ny, nz, data }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nz)
    }
    pub fn coeffs(&self) -> &[Complex64] {
        &self.data
    }
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }
    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.data
    }

    #[inline]
    pub fn mode_at(&self, idx: usize) -> (Lattice, i64) {
        let iz = idx % self.nz;
        let h = idx / self.nz;
        (
            Lattice(
                signed_index(h / self.ny, self.nx),
                signed_index(h % self.ny, self.ny),
            ),
            signed_index(iz, self.nz),
        )
    }

    #[inline]
    pub fn index_of(&self, k: Lattice, n: i64) -> usize {
        (slot(k.0, self.nx) * self.ny + slot(k.1, self.ny)) * self.nz + slot(n, self.nz)
    }

    pub fn get(&self, k: Lattice, n: i64) -> Complex64 {
        if k.0.abs() <= (self.nx / 2) as i64
            && k.1.abs() <= (self.ny / 2) as i64
            && n.abs() <= (self.nz / 2) as i64
        {
            self.data[self.index_of(k, n)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn set(&mut self, k: Lattice, n: i64, c: Complex64) {
        let i = self.index_of(k, n);
        self.data[i] = c;
    }

    pub fn add_at(&mut self, k: Lattice, n: i64, c: Complex64) {
        let i = self.index_of(k, n);
        self.data[i] += c;
    }

    pub fn from_modes(
        nx: usize,
        ny: usize,
        nz: usize,
        modes: &[(Lattice, i64, Complex64)],
    ) -> Self {
        let mut f = Self::zeros(nx, ny, nz);
        for &(k, n, c) in modes {
            f.add_at(k, n, c);
        }
        f
    }

    pub fn map_modes(&self, mut f: impl FnMut(Lattice, i64, Complex64) -> Complex64) -> Self {
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let (k, n) = self.mode_at(i);
                f(k, n, c)
            })
            .collect();
        ScalarField3 {
            nx: self.nx,
            ny: self.ny,
            nz: self.nz,
            data,
        }
    }

    pub fn modes(&self) -> impl Iterator<Item = (Lattice, i64, Complex64)> + '_ {
        self.data.iter().enumerate().map(move |(i, &c)| {
            let (k, n) = self.mode_at(i);
            (k, n, c)
        })
    }

    pub fn dx(&self) -> Self {
        let n = self.nx;
        self.map_modes(|k, _, c| I * d1(k.0, n, 2.0 * PI) * c)
    }
    pub fn dy(&self) -> Self {
        let n = self.ny;
        self.map_modes(|k, _, c| I * d1(k.1, n, 2.0 * PI) * c)
    }
    pub fn dz(&self) -> Self {
        let n = self.nz;
        self.map_modes(|_, m, c| I * d1(m, n, PI) * c)
    }
    pub fn dzz(&self) -> Self {
        self.map_modes(|_, n, c| -(PI * n as f64).powi(2) * c)
    }
    pub fn laplacian_h(&self) -> Self {
        self.map_modes(|k, _, c| -k.length().powi(2) * c)
    }

    /// Average over z ∈ (0, 1), computed by exact quadrature of each z mode.
    pub fn z_average(&self) -> ScalarField2 {
        let mut out = ScalarField2::zeros(self.nx, self.ny);
        let weights: Vec<Complex64> = (0..self.nz)
            .map(|iz| z_average_weight(signed_index(iz, self.nz)))
            .collect();
        for (h, col) in self.data.chunks_exact(self.nz).enumerate() {
            out.data[h] = col.iter().zip(&weights).map(|(c, w)| c * w).sum();
        }
        out
    }

    /// `f − f̄` with `f̄` the average over z ∈ (0, 1).
    pub fn z_fluctuation(&self) -> Self {
        let avg = self.z_average();
        let mut out = self.clone();
        for (h, c) in avg.data.iter().enumerate() {
            out.data[h * self.nz] -= c;
        }
        out
    }

    /// The `n = 0` vertical mode as a 2D field.
    pub fn z_mean_mode(&self) -> ScalarField2 {
        let data = self.data.chunks_exact(self.nz).map(|col| col[0]).collect();
        ScalarField2 {
            nx: self.nx,
            ny: self.ny,
            data,
        }
    }

    /// Keeps the even-in-z (cosine) part.
    pub fn even_part(&self) -> Self {
        self.z_parity_part(1.0)
    }

    /// Keeps the odd-in-z (sine) part.
    pub fn odd_part(&self) -> Self {
        self.z_parity_part(-1.0)
    }

    fn z_parity_part(&self, sign: f64) -> Self {
        let nz = self.nz;
        let mut out = self.clone();
        for (col_out, col) in out
            .data
            .chunks_exact_mut(nz)
            .zip(self.data.chunks_exact(nz))
        {
            for iz in 0..nz {
                col_out[iz] = 0.5 * (col[iz] + sign * col[mirror(iz, nz)]);
            }
        }
        out
    }

    /// Largest violation of `c(k, −n) = ±c(k, n)`.
    pub fn parity_defect(&self, sign: f64) -> f64 {
        let nz = self.nz;
        self.data
            .chunks_exact(nz)
            .flat_map(|col| (0..nz).map(move |iz| (col[iz] - sign * col[mirror(iz, nz)]).norm()))
            .fold(0.0, f64::max)
    }

    pub fn sobolev_norm(&self, s: u32) -> f64 {
        self.sobolev_norm_sq(s).sqrt()
    }

    pub fn sobolev_norm_sq(&self, s: u32) -> f64 {
        self.modes()
            .map(|(k, n, c)| {
                let w = 1.0 + k.length().powi(2) + (PI * n as f64).powi(2);
                w.powi(s as i32) * c.norm_sqr()
            })
            .sum()
    }

    pub fn inner(&self, o: &Self) -> Complex64 {
        self.data
            .iter()
            .zip(&o.data)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn hermitian_defect(&self) -> f64 {
        let (nx, ny, nz) = (self.nx, self.ny, self.nz);
        let mut worst = 0.0f64;
        for ix in 0..nx {
            for iy in 0..ny {
                for iz in 0..nz {
                    let a = self.data[(ix * ny + iy) * nz + iz];
                    let b = self.data[(mirror(ix, nx) * ny + mirror(iy, ny)) * nz + mirror(iz, nz)];
                    worst = worst.max((a - b.conj()).norm());
                }
            }
        }
        worst
    }

    pub fn make_real(&mut self) {
        let (nx, ny, nz) = (self.nx, self.ny, self.nz);
        let src = self.data.clone();
        for ix in 0..nx {
            for iy in 0..ny {
                for iz in 0..nz {
                    let i = (ix * ny + iy) * nz + iz;
                    let b = src[(mirror(ix, nx) * ny + mirror(iy, ny)) * nz + mirror(iz, nz)];
                    self.data[i] = 0.5 * (src[i] + b.conj());
                }
            }
        }
    }

    pub fn dealias(&mut self, g: &Grid) {
        let (cx, cy, cz) = (g.cutoff(self.nx), g.cutoff(self.ny), g.cutoff(self.nz));
        for i in 0..self.data.len() {
            let (k, n) = self.mode_at(i);
            if k.0.abs() > cx || k.1.abs() > cy || n.abs() > cz {
                self.data[i] = Complex64::new(0.0, 0.0);
            }
        }
    }

    pub fn dealiased(mut self, g: &Grid) -> Self {
        self.dealias(g);
        self
    }

    pub fn scale_complex(&mut self, a: Complex64) {
        self.data.iter_mut().for_each(|c| *c *= a);
    }

    pub fn axpy(&mut self, a: f64, x: &Self) {
        self.data
            .iter_mut()
            .zip(&x.data)
            .for_each(|(c, d)| *c += a * d);
    }

    /// Adds a z-independent field to the `n = 0` mode.
    pub fn add_broadcast(&mut self, a: f64, f: &ScalarField2) {
        for (h, c) in f.data.iter().enumerate() {
            self.data[h * self.nz] += a * c;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl VectorField2 {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        VectorField2 {
            x: ScalarField2::zeros(nx, ny),
            y: ScalarField2::zeros(nx, ny),
        }
    }
    pub fn zeros_like_grid(g: &Grid) -> Self {
        Self::zeros(g.nx, g.ny)
    }
    pub fn new(x: ScalarField2, y: ScalarField2) -> Self {
        assert_eq!(x.dims(), y.dims());
        VectorField2 { x, y }
    }
    pub fn dims(&self) -> (usize, usize) {
        self.x.dims()
    }
    pub fn div(&self) -> ScalarField2 {
        let mut d = self.x.dx();
        let dy = self.y.dy();
        d += &dy;
        d
    }
    /// Scalar curl `∂ₓu₂ − ∂ᵧu₁`.
    pub fn curl(&self) -> ScalarField2 {
        let mut d = self.y.dx();
        let dy = self.x.dy();
        d -= &dy;
        d
    }
    pub fn sobolev_norm(&self, s: u32) -> f64 {
        (self.x.sobolev_norm_sq(s) + self.y.sobolev_norm_sq(s)).sqrt()
    }
    pub fn sobolev_norm_sq(&self, s: u32) -> f64 {
        self.x.sobolev_norm_sq(s) + self.y.sobolev_norm_sq(s)
    }
    pub fn inner(&self, o: &Self) -> Complex64 {
        self.x.inner(&o.x) + self.y.inner(&o.y)
    }
    pub fn hermitian_defect(&self) -> f64 {
        self.x.hermitian_defect().max(self.y.hermitian_defect())
    }
    pub fn make_real(&mut self) {
        self.x.make_real();
        self.y.make_real();
    }
    pub fn dealias(&mut self, g: &Grid) {
        self.x.dealias(g);
        self.y.dealias(g);
    }
    pub fn broadcast(&self, nz: usize) -> VectorField3 {
        VectorField3 {
            x: self.x.broadcast(nz),
            y: self.y.broadcast(nz),
        }
    }
    pub fn axpy(&mut self, a: f64, o: &Self) {
        self.x.axpy(a, &o.x);
        self.y.axpy(a, &o.y);
    }
    pub fn scale_complex(&mut self, a: Complex64) {
        self.x.scale_complex(a);
        self.y.scale_complex(a);
    }
    pub fn max_abs(&self) -> f64 {
        self.x.max_abs().max(self.y.max_abs())
    }
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl VectorField3 {
    pub fn zeros(nx: usize, ny: usize, nz: usize) -> Self {
        VectorField3 {
            x: ScalarField3::zeros(nx, ny, nz),
            y: ScalarField3::zeros(nx, ny, nz),
        }
    }
    pub fn zeros_like_grid(g: &Grid) -> Self {
        Self::zeros(g.nx, g.ny, g.nz)
    }
    pub fn new(x: ScalarField3, y: ScalarField3) -> Self {
        assert_eq!(x.dims(), y.dims());
        VectorField3 { x, y }
    }
    pub fn dims(&self) -> (usize, usize, usize) {
        self.x.dims()
    }
    pub fn div_h(&self) -> ScalarField3 {
        let mut d = self.x.dx();
        let dy = self.y.dy();
        d += &dy;
        d
    }
    pub fn map(&self, f: impl Fn(&ScalarField3) -> ScalarField3) -> Self {
        VectorField3 {
            x: f(&self.x),
            y: f(&self.y),
        }
    }
    pub fn dz(&self) -> Self {
        self.map(ScalarField3::dz)
    }
    pub fn laplacian_h(&self) -> Self {
        self.map(ScalarField3::laplacian_h)
    }
    /// `∇ₕ divₕ u`.
    pub fn grad_div(&self) -> Self {
        let d = self.div_h();
        VectorField3 {
            x: d.dx(),
            y: d.dy(),
        }
    }
    pub fn z_average(&self) -> VectorField2 {
        VectorField2 {
            x: self.x.z_average(),
            y: self.y.z_average(),
        }
    }
    pub fn z_fluctuation(&self) -> Self {
        self.map(ScalarField3::z_fluctuation)
    }
    pub fn z_mean_mode(&self) -> VectorField2 {
        VectorField2 {
            x: self.x.z_mean_mode(),
            y: self.y.z_mean_mode(),
        }
    }
    /// Projection onto the even-in-z subspace.
    pub fn enforce_even(&self) -> Self {
        self.map(ScalarField3::even_part)
    }
    pub fn parity_defect(&self, sign: f64) -> f64 {
        self.x.parity_defect(sign).max(self.y.parity_defect(sign))
    }
    pub fn sobolev_norm(&self, s: u32) -> f64 {
        self.sobolev_norm_sq(s).sqrt()
    }
    pub fn sobolev_norm_sq(&self, s: u32) -> f64 {
        self.x.sobolev_norm_sq(s) + self.y.sobolev_norm_sq(s)
    }
    pub fn inner(&self, o: &Self) -> Complex64 {
        self.x.inner(&o.x) + self.y.inner(&o.y)
    }
    pub fn hermitian_defect(&self) -> f64 {
        self.x.hermitian_defect().max(self.y.hermitian_defect())
    }
    pub fn make_real(&mut self) {
        self.x.make_real();
        self.y.make_real();
    }
    pub fn dealias(&mut self, g: &Grid) {
        self.x.dealias(g);
        self.y.dealias(g);
    }
    pub fn add_broadcast(&mut self, a: f64, f: &VectorField2) {
        self.x.add_broadcast(a, &f.x);
        self.y.add_broadcast(a, &f.y);
    }
    pub fn axpy(&mut self, a: f64, o: &Self) {
        self.x.axpy(a, &o.x);
        self.y.axpy(a, &o.y);
    }
    pub fn max_abs(&self) -> f64 {
        self.x.max_abs().max(self.y.max_abs())
    }
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

macro_rules! scalar_ops {
    ($t:ty) => {
        impl AddAssign<&$t> for $t {
            fn add_assign(&mut self, o: &$t) {
                assert_eq!(self.data.len(), o.data.len(), "field shapes differ");
                self.data.iter_mut().zip(&o.data).for_each(|(a, b)| *a += b);
            }
        }
        impl SubAssign<&$t> for $t {
            fn sub_assign(&mut self, o: &$t) {
                assert_eq!(self.data.len(), o.data.len(), "field shapes differ");
                self.data.iter_mut().zip(&o.data).for_each(|(a, b)| *a -= b);
            }
        }
        impl MulAssign<f64> for $t {
            fn mul_assign(&mut self, s: f64) {
                self.data.iter_mut().for_each(|a| *a *= s);
            }
        }
    };
}

macro_rules! vector_ops {
    ($t:ty) => {
        impl AddAssign<&$t> for $t {
            fn add_assign(&mut self, o: &$t) {
                self.x += &o.x;
                self.y += &o.y;
            }
        }
        impl SubAssign<&$t> for $t {
            fn sub_assign(&mut self, o: &$t) {
                self.x -= &o.x;
                self.y -= &o.y;
            }
        }
        impl MulAssign<f64> for $t {
            fn mul_assign(&mut self, s: f64) {
                self.x *= s;
                self.y *= s;
            }
        }
    };
}

macro_rules! common_ops {
    ($t:ty) => {
        impl Add<&$t> for &$t {
            type Output = $t;
            fn add(self, o: &$t) -> $t {
                let mut r = self.clone();
                r += o;
                r
            }
        }
        impl Sub<&$t> for &$t {
            type Output = $t;
            fn sub(self, o: &$t) -> $t {
                let mut r = self.clone();
                r -= o;
                r
            }
        }
        impl Add<&$t> for $t {
            type Output = $t;
            fn add(mut self, o: &$t) -> $t {
                self += o;
                self
            }
        }
        impl Sub<&$t> for $t {
            type Output = $t;
            fn sub(mut self, o: &$t) -> $t {
                self -= o;
                self
            }
        }
        impl Mul<f64> for &$t {
            type Output = $t;
            fn mul(self, s: f64) -> $t {
                let mut r = self.clone();
                r *= s;
                r
            }
        }
        impl Mul<f64> for $t {
            type Output = $t;
            fn mul(mut self, s: f64) -> $t {
                self *= s;
                self
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(mut self) -> $t {
                self *= -1.0;
                self
            }
        }
        impl Neg for &$t {
            type Output = $t;
            fn neg(self) -> $t {
                self * -1.0
            }
        }
    };
}

scalar_ops!(ScalarField2);
scalar_ops!(ScalarField3);
vector_ops!(VectorField2);
vector_ops!(VectorField3);
common_ops!(ScalarField2);
common_ops!(ScalarField3);
common_ops!(VectorField2);
common_ops!(VectorField3);

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// sin(2πx) as coefficients: (e^{i2πx} − e^{−i2πx})/(2i).
    fn sin_x(nx: usize, ny: usize) -> ScalarField2 {
        ScalarField2::from_modes(
            nx,
            ny,
            &[(Lattice(1, 0), c(0.0, -0.5)), (Lattice(-1, 0), c(0.0, 0.5))],
        )
    }

    #[test]
    fn single_mode_derivative_is_exact() {
        let k = Lattice(3, -2);
        let a = c(0.7, -0.2);
        let f = ScalarField2::from_modes(16, 16, &[(k, a)]);
        let d = f.dx();
        assert_eq!(d.get(k), I * (2.0 * PI * 3.0) * a);
        let f3 = ScalarField3::from_modes(8, 8, 8, &[(k, 3, a)]);
        assert_eq!(f3.dz().get(k, 3), I * (3.0 * PI) * a);
        assert_eq!(f3.dy().get(k, 3), I * (2.0 * PI * -2.0) * a);
    }

    #[test]
    fn sobolev_norms_of_sine() {
        let f = sin_x(8, 8);
        assert!((f.sobolev_norm(0) - 0.5f64.sqrt()).abs() < 1e-15);
        let expect = ((1.0 + 4.0 * PI * PI) / 2.0).sqrt();
        assert!((f.sobolev_norm(1) - expect).abs() < 1e-13);
        assert_eq!(ScalarField2::zeros(4, 4).sobolev_norm(2), 0.0);
        assert!(f.sobolev_norm(2) > f.sobolev_norm(1));
    }

    #[test]
    fn z_average_examples() {
        let k = Lattice(1, 0);
        // cos(2πz)·g: cos(πnz) with n = 2
        let f = ScalarField3::from_modes(8, 8, 8, &[(k, 2, c(0.5, 0.0)), (k, -2, c(0.5, 0.0))]);
        assert!(f.z_average().max_abs() < 1e-15);
        assert!((&f.z_fluctuation() - &f).max_abs() < 1e-15);
        // 1 + cos(2πz)
        let g = ScalarField3::from_modes(
            8,
            8,
            8,
            &[
                (Lattice(0, 0), 0, c(1.0, 0.0)),
                (Lattice(0, 0), 2, c(0.5, 0.0)),
                (Lattice(0, 0), -2, c(0.5, 0.0)),
            ],
        );
        assert!((g.z_average().mean() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn z_average_of_odd_modes_uses_quadrature() {
        // sin(πz) has average 2/π over (0, 1)
        let z0 = Lattice(0, 0);
        let f = ScalarField3::from_modes(4, 4, 8, &[(z0, 1, c(0.0, -0.5)), (z0, -1, c(0.0, 0.5))]);
        assert!((f.z_average().mean_complex() - c(2.0 / PI, 0.0)).norm() < 1e-15);
        // cos(πz) has average 0
        let g = ScalarField3::from_modes(4, 4, 8, &[(z0, 1, c(0.5, 0.0)), (z0, -1, c(0.5, 0.0))]);
        assert!(g.z_average().max_abs() < 1e-16);
    }

    #[test]
    fn parity_filters() {
        let k = Lattice(1, 1);
        let sine = ScalarField3::from_modes(4, 4, 8, &[(k, 2, c(0.0, -0.5)), (k, -2, c(0.0, 0.5))]);
        assert!(sine.even_part().max_abs() < 1e-16);
        let cosine =
            ScalarField3::from_modes(4, 4, 8, &[(k, 2, c(0.5, 0.0)), (k, -2, c(0.5, 0.0))]);
        assert_eq!(cosine.even_part(), cosine);
        let mixed = &sine + &cosine;
        assert_eq!(mixed.even_part(), cosine);
        assert_eq!(mixed.odd_part(), sine);
    }

    #[test]
    fn make_real_is_projection() {
        let mut f = ScalarField2::from_modes(8, 8, &[(Lattice(1, 2), c(1.0, 2.0))]);
        assert!(f.hermitian_defect() > 0.1);
        f.make_real();
        assert!(f.hermitian_defect() < 1e-15);
        let g = f.clone();
        f.make_real();
        assert_eq!(f, g);
    }

    #[test]
    fn integral_of_product_matches_parseval() {
        let f = sin_x(8, 8);
        // ∫ sin² = 1/2
        assert!((f.integral_of_product(&f) - c(0.5, 0.0)).norm() < 1e-15);
    }
}
