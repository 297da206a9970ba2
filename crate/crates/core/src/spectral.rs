//! Forward and inverse transforms between coefficients and grid values.
//!
//! Grid point `j` on an axis of length `n` sits at `x_j = L·j/n` with `L = 1` horizontally and
//! `L = 2` vertically. Forward transforms are normalized by `1/N` so coefficients are the
//! Fourier amplitudes.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::field::{ScalarField2, ScalarField3, VectorField3};
use crate::grid::{mirror, Grid};

struct AxisPlans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl AxisPlans {
    fn new(planner: &mut FftPlanner<f64>, n: usize) -> Self {
        AxisPlans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }
    fn get(&self, inverse: bool) -> &Arc<dyn Fft<f64>> {
        if inverse {
            &self.inverse
        } else {
            &self.forward
        }
    }
}

/// FFT plans for one grid. Cheap to share between threads.
pub struct Spectral {
    grid: Grid,
    px: AxisPlans,
    py: AxisPlans,
    pz: AxisPlans,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral")
            .field("grid", &self.grid)
            .finish()
    }
}

/// Transforms along the middle axis of a buffer viewed as `[outer][n][inner]`.
fn fft_axis(
    buf: &mut [Complex64],
    n: usize,
    inner: usize,
    plan: &Arc<dyn Fft<f64>>,
    tmp: &mut Vec<Complex64>,
) {
    let block = n * inner;
    if inner == 1 {
        plan.process(buf);
        return;
    }
    tmp.resize(block, Complex64::new(0.0, 0.0));
    for chunk in buf.chunks_exact_mut(block) {
        for j in 0..n {
            for r in 0..inner {
                tmp[r * n + j] = chunk[j * inner + r];
            }
        }
        plan.process(tmp);
        for j in 0..n {
            for r in 0..inner {
                chunk[j * inner + r] = tmp[r * n + j];
            }
        }
    }
}

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let px = AxisPlans::new(&mut planner, grid.nx);
        let py = AxisPlans::new(&mut planner, grid.ny);
        let pz = AxisPlans::new(&mut planner, grid.nz);
        Spectral { grid, px, py, pz }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn fft2(&self, buf: &mut [Complex64], inverse: bool) {
        let g = &self.grid;
        let mut tmp = Vec::new();
        fft_axis(buf, g.ny, 1, self.py.get(inverse), &mut tmp);
        fft_axis(buf, g.nx, g.ny, self.px.get(inverse), &mut tmp);
        if !inverse {
            let s = 1.0 / g.n2() as f64;
            buf.iter_mut().for_each(|c| *c *= s);
        }
    }

    fn fft3(&self, buf: &mut [Complex64], inverse: bool) {
        let g = &self.grid;
        let mut tmp = Vec::new();
        fft_axis(buf, g.nz, 1, self.pz.get(inverse), &mut tmp);
        fft_axis(buf, g.ny, g.nz, self.py.get(inverse), &mut tmp);
        fft_axis(buf, g.nx, g.ny * g.nz, self.px.get(inverse), &mut tmp);
        if !inverse {
            let s = 1.0 / g.n3() as f64;
            buf.iter_mut().for_each(|c| *c *= s);
        }
    }

    fn check2(&self, f: &ScalarField2) {
        assert_eq!(
            f.dims(),
            (self.grid.nx, self.grid.ny),
            "2D field does not match the grid"
        );
    }

    fn check3(&self, f: &ScalarField3) {
        assert_eq!(
            f.dims(),
            (self.grid.nx, self.grid.ny, self.grid.nz),
            "3D field does not match the grid"
        );
    }

    /// Complex grid values of a 2D field.
    pub fn to_grid2(&self, f: &ScalarField2) -> Vec<Complex64> {
        self.check2(f);
        let mut buf = f.coeffs().to_vec();
        self.fft2(&mut buf, true);
        buf
    }

    pub fn from_grid2(&self, mut vals: Vec<Complex64>) -> ScalarField2 {
        assert_eq!(vals.len(), self.grid.n2());
        self.fft2(&mut vals, false);
        ScalarField2::from_coefficients(self.grid.nx, self.grid.ny, vals)
    }

    pub fn to_grid3(&self, f: &ScalarField3) -> Vec<Complex64> {
        self.check3(f);
        let mut buf = f.coeffs().to_vec();
        self.fft3(&mut buf, true);
        buf
    }

    pub fn from_grid3(&self, mut vals: Vec<Complex64>) -> ScalarField3 {
        assert_eq!(vals.len(), self.grid.n3());
        self.fft3(&mut vals, false);
        let g = &self.grid;
        ScalarField3::from_coefficients(g.nx, g.ny, g.nz, vals)
    }

    /// Real grid values of a real 2D field.
    pub fn to_real2(&self, f: &ScalarField2) -> Vec<f64> {
        self.to_grid2(f).into_iter().map(|c| c.re).collect()
    }

    pub fn from_real2(&self, vals: &[f64]) -> ScalarField2 {
        self.from_grid2(vals.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn to_real3(&self, f: &ScalarField3) -> Vec<f64> {
        self.to_grid3(f).into_iter().map(|c| c.re).collect()
    }

    pub fn from_real3(&self, vals: &[f64]) -> ScalarField3 {
        self.from_grid3(vals.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Grid values of two real 3D fields for the price of one complex transform.
    pub fn to_real3_pair(&self, a: &ScalarField3, b: &ScalarField3) -> (Vec<f64>, Vec<f64>) {
        self.check3(a);
        self.check3(b);
        let i = Complex64::new(0.0, 1.0);
        let mut buf: Vec<Complex64> = a
            .coeffs()
            .iter()
            .zip(b.coeffs())
            .map(|(x, y)| x + i * y)
            .collect();
        self.fft3(&mut buf, true);
        buf.into_iter().map(|c| (c.re, c.im)).unzip()
    }

    /// Coefficients of two real 3D fields from their grid values.
    pub fn from_real3_pair(&self, a: &[f64], b: &[f64]) -> (ScalarField3, ScalarField3) {
        let g = &self.grid;
        let mut buf: Vec<Complex64> = a
            .iter()
            .zip(b)
            .map(|(&x, &y)| Complex64::new(x, y))
            .collect();
        self.fft3(&mut buf, false);
        let (nx, ny, nz) = (g.nx, g.ny, g.nz);
        let mut fa = vec![Complex64::new(0.0, 0.0); buf.len()];
        let mut fb = fa.clone();
        for ix in 0..nx {
            for iy in 0..ny {
                for iz in 0..nz {
                    let p = (ix * ny + iy) * nz + iz;
                    let q = (mirror(ix, nx) * ny + mirror(iy, ny)) * nz + mirror(iz, nz);
                    let (c, m) = (buf[p], buf[q].conj());
                    fa[p] = 0.5 * (c + m);
                    fb[p] = Complex64::new(0.0, -0.5) * (c - m);
                }
            }
        }
        (
            ScalarField3::from_coefficients(nx, ny, nz, fa),
            ScalarField3::from_coefficients(nx, ny, nz, fb),
        )
    }

    /// Grid values of both components of a real vector field.
    pub fn to_real_vec3(&self, v: &VectorField3) -> (Vec<f64>, Vec<f64>) {
        self.to_real3_pair(&v.x, &v.y)
    }

    pub fn from_real_vec3(&self, a: &[f64], b: &[f64]) -> VectorField3 {
        let (x, y) = self.from_real3_pair(a, b);
        VectorField3 { x, y }
    }

    /// Samples a function of `(x, y)` on the grid and transforms it.
    pub fn sample2(&self, f: impl Fn(f64, f64) -> f64) -> ScalarField2 {
        let g = &self.grid;
        let mut vals = Vec::with_capacity(g.n2());
        for ix in 0..g.nx {
            for iy in 0..g.ny {
                vals.push(f(ix as f64 / g.nx as f64, iy as f64 / g.ny as f64));
            }
        }
        self.from_real2(&vals)
    }

    /// Samples a function of `(x, y, z)`, z ∈ [0, 2), on the grid and transforms it.
    pub fn sample3(&self, f: impl Fn(f64, f64, f64) -> f64) -> ScalarField3 {
        let g = &self.grid;
        let mut vals = Vec::with_capacity(g.n3());
        for ix in 0..g.nx {
            for iy in 0..g.ny {
                for iz in 0..g.nz {
                    vals.push(f(
                        ix as f64 / g.nx as f64,
                        iy as f64 / g.ny as f64,
                        2.0 * iz as f64 / g.nz as f64,
                    ));
                }
            }
        }
        self.from_real3(&vals)
    }

    /// Dealiased product of two real 2D fields.
    pub fn product2(&self, a: &ScalarField2, b: &ScalarField2) -> ScalarField2 {
        let pa = self.to_real2(a);
        let pb = self.to_real2(b);
        let v: Vec<f64> = pa.iter().zip(&pb).map(|(x, y)| x * y).collect();
        self.from_real2(&v).dealiased(&self.grid)
    }

    /// Dealiased product of two complex-valued 2D fields (no reality assumed).
    pub fn product2_complex(&self, a: &ScalarField2, b: &ScalarField2) -> ScalarField2 {
        let pa = self.to_grid2(a);
        let pb = self.to_grid2(b);
        let v: Vec<Complex64> = pa.iter().zip(&pb).map(|(x, y)| x * y).collect();
        self.from_grid2(v).dealiased(&self.grid)
    }

    /// Grid coordinate of z slot `iz`.
    pub fn z_at(&self, iz: usize) -> f64 {
        2.0 * iz as f64 / self.grid.nz as f64
    }

    /// Quadrature of `|f|²` on the 3D grid over one period, normalized by volume.
    pub fn mean_square3(&self, f: &ScalarField3) -> f64 {
        let v = self.to_grid3(f);
        v.iter().map(|c| c.norm_sqr()).sum::<f64>() / v.len() as f64
    }

    pub fn mean_square2(&self, f: &ScalarField2) -> f64 {
        let v = self.to_grid2(f);
        v.iter().map(|c| c.norm_sqr()).sum::<f64>() / v.len() as f64
    }
}

/// `2πx` helper used by presets and tests.
#[inline]
pub fn tau(x: f64) -> f64 {
    2.0 * PI * x
}
