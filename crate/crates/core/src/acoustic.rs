//! The acoustic operator `L(q, u) = ((γ−1) divₕ u, c² ∇ₕ q)` on T², its eigenbasis and the
//! exact solution group `𝓛(t) = e^{−tL}`.

use std::ops::{AddAssign, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ScalarField2, VectorField2};
use crate::grid::{sg_nonzero, Grid, Lattice};
use crate::params::PhysicalParams;
use crate::projections::{project_sigma2, project_tau2};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A pair `(q, u)` on T².
#[derive(Debug, Clone, PartialEq)]
pub struct AcousticState {
    pub q: ScalarField2,
    pub u: VectorField2,
}

impl AcousticState {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        AcousticState {
            q: ScalarField2::zeros(nx, ny),
            u: VectorField2::zeros(nx, ny),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.q.dims()
    }

    pub fn sobolev_norm(&self, s: u32) -> f64 {
        (self.q.sobolev_norm_sq(s) + self.u.sobolev_norm_sq(s)).sqrt()
    }

    /// `⟨self, o⟩ = ∫ self·conj(o)`.
    pub fn inner(&self, o: &Self) -> Complex64 {
        self.q.inner(&o.q) + self.u.inner(&o.u)
    }

    pub fn axpy(&mut self, a: f64, o: &Self) {
        self.q.axpy(a, &o.q);
        self.u.axpy(a, &o.u);
    }

    pub fn scaled(&self, a: f64) -> Self {
        AcousticState {
            q: &self.q * a,
            u: &self.u * a,
        }
    }

    pub fn scale_complex(&mut self, a: Complex64) {
        self.q.scale_complex(a);
        self.u.scale_complex(a);
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.q.hermitian_defect().max(self.u.hermitian_defect())
    }

    pub fn max_abs(&self) -> f64 {
        self.q.max_abs().max(self.u.max_abs())
    }

    /// Component lying in ker L: the mean of q and the solenoidal part of u.
    pub fn kernel_part(&self) -> Self {
        let mut q = ScalarField2::zeros(self.q.dims().0, self.q.dims().1);
        q.set(Lattice(0, 0), self.q.mean_complex());
        AcousticState {
            q,
            u: project_sigma2(&self.u),
        }
    }

    /// Component in `(ker L)^⊥`.
    pub fn kernel_perp_part(&self) -> Self {
        AcousticState {
            q: self.q.without_mean(),
            u: project_tau2(&self.u),
        }
    }
}

impl AddAssign<&AcousticState> for AcousticState {
    fn add_assign(&mut self, o: &AcousticState) {
        self.q += &o.q;
        self.u += &o.u;
    }
}

impl SubAssign<&AcousticState> for AcousticState {
    fn sub_assign(&mut self, o: &AcousticState) {
        self.q -= &o.q;
        self.u -= &o.u;
    }
}

impl std::ops::Sub<&AcousticState> for &AcousticState {
    type Output = AcousticState;
    fn sub(self, o: &AcousticState) -> AcousticState {
        let mut r = self.clone();
        r -= o;
        r
    }
}

impl std::ops::Add<&AcousticState> for &AcousticState {
    type Output = AcousticState;
    fn add(self, o: &AcousticState) -> AcousticState {
        let mut r = self.clone();
        r += o;
        r
    }
}

/// `L(q, u) = ((γ−1) div u, c² ∇q)`.
pub fn apply_l(state: &AcousticState, params: &PhysicalParams) -> AcousticState {
    AcousticState {
        q: &state.u.div() * (params.gamma() - 1.0),
        u: &state.q.grad() * params.c2(),
    }
}

/// `⟨U₁, A U₂⟩` with `A = diag(c², γ−1, γ−1)`, real part.
pub fn weighted_inner(a: &AcousticState, b: &AcousticState, params: &PhysicalParams) -> f64 {
    weighted_inner_complex(a, b, params).re
}

pub fn weighted_inner_complex(
    a: &AcousticState,
    b: &AcousticState,
    params: &PhysicalParams,
) -> Complex64 {
    params.c2() * a.q.inner(&b.q) + (params.gamma() - 1.0) * a.u.inner(&b.u)
}

/// `(Σ(1+|k|²)^s (c²|q_k|² + (γ−1)|u_k|²))^{1/2}`, the norm in which `L` is skew and `𝓛(t)` an isometry.
pub fn weighted_sobolev_norm(state: &AcousticState, s: u32, params: &PhysicalParams) -> f64 {
    (params.c2() * state.q.sobolev_norm_sq(s) + (params.gamma() - 1.0) * state.u.sobolev_norm_sq(s))
        .sqrt()
}

/// Branch label of the eigenpair `V_k^±`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];

    /// `+1` for `Plus`, `−1` for `Minus`.
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Branch {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }
}

/// Amplitude vector `(q, u₁, u₂)` of `V_k^±` multiplying `e^{ik·x}`.
pub fn eigen_vector(k: Lattice, b: Branch, params: &PhysicalParams) -> [f64; 3] {
    let g1 = params.gamma() - 1.0;
    let c = params.c();
    let kk = k.wavevector();
    let len = k.length();
    let s = sg_nonzero(k) as f64 * b.sign();
    let n = 1.0 / ((g1 + params.c2()).sqrt() * len);
    [n * g1.sqrt() * len, -n * c * s * kk[0], -n * c * s * kk[1]]
}

/// Amplitude vector of the biorthogonal partner `V_k^{*,±}`.
pub fn conjugate_vector(k: Lattice, b: Branch, params: &PhysicalParams) -> [f64; 3] {
    let g1 = params.gamma() - 1.0;
    let c = params.c();
    let kk = k.wavevector();
    let len = k.length();
    let s = sg_nonzero(k) as f64 * b.sign();
    let n = (g1 + params.c2()).sqrt() / (2.0 * c * g1.sqrt() * len);
    [
        n * c * len,
        -n * g1.sqrt() * s * kk[0],
        -n * g1.sqrt() * s * kk[1],
    ]
}

/// Eigenvalue of L on `V_k^±`: `∓iς·sg(k)|k|`.
pub fn eigenvalue(k: Lattice, b: Branch, params: &PhysicalParams) -> Complex64 {
    -I * b.sign() * frequency(k, params)
}

/// `ς·sg(k)|k|`.
#[inline]
pub fn frequency(k: Lattice, params: &PhysicalParams) -> f64 {
    params.varsigma() * sg_nonzero(k) as f64 * k.length()
}

fn single_mode(k: Lattice, amp: [f64; 3], nx: usize, ny: usize) -> AcousticState {
    let one = Complex64::new(1.0, 0.0);
    AcousticState {
        q: ScalarField2::from_modes(nx, ny, &[(k, one * amp[0])]),
        u: VectorField2::new(
            ScalarField2::from_modes(nx, ny, &[(k, one * amp[1])]),
            ScalarField2::from_modes(nx, ny, &[(k, one * amp[2])]),
        ),
    }
}

fn check_mode(k: Lattice, grid: &Grid) -> Result<()> {
    if k.is_zero() {
        return Err(Error::Domain("eigenmodes are defined for k != 0".into()));
    }
    if k.0.abs() >= (grid.nx / 2) as i64 || k.1.abs() >= (grid.ny / 2) as i64 {
        return Err(Error::Domain(format!(
            "mode {k:?} is not resolved on the grid"
        )));
    }
    Ok(())
}

/// `V_k^±` as a complex state on the grid.
pub fn eigenmode(
    k: Lattice,
    b: Branch,
    params: &PhysicalParams,
    grid: &Grid,
) -> Result<AcousticState> {
    check_mode(k, grid)?;
    Ok(single_mode(k, eigen_vector(k, b, params), grid.nx, grid.ny))
}

/// `V_k^{*,±}` as a complex state on the grid.
pub fn conjugate_mode(
    k: Lattice,
    b: Branch,
    params: &PhysicalParams,
    grid: &Grid,
) -> Result<AcousticState> {
    check_mode(k, grid)?;
    Ok(single_mode(
        k,
        conjugate_vector(k, b, params),
        grid.nx,
        grid.ny,
    ))
}

/// Coefficients `a_k^±` of a state in the `V_k^±` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCoefficients {
    nx: usize,
    ny: usize,
    plus: Vec<Complex64>,
    minus: Vec<Complex64>,
}

impl ModeCoefficients {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); nx * ny];
        ModeCoefficients {
            nx,
            ny,
            plus: z.clone(),
            minus: z,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    fn index(&self, k: Lattice) -> usize {
        crate::grid::slot(k.0, self.nx) * self.ny + crate::grid::slot(k.1, self.ny)
    }

    pub fn lattice_at(&self, idx: usize) -> Lattice {
        use crate::grid::signed_index;
        Lattice(
            signed_index(idx / self.ny, self.nx),
            signed_index(idx % self.ny, self.ny),
        )
    }

    pub fn get(&self, k: Lattice, b: Branch) -> Complex64 {
        if k.0.abs() > (self.nx / 2) as i64 || k.1.abs() > (self.ny / 2) as i64 {
            return Complex64::new(0.0, 0.0);
        }
        let i = self.index(k);
        match b {
            Branch::Plus => self.plus[i],
            Branch::Minus => self.minus[i],
        }
    }

    pub fn set(&mut self, k: Lattice, b: Branch, c: Complex64) {
        let i = self.index(k);
        match b {
            Branch::Plus => self.plus[i] = c,
            Branch::Minus => self.minus[i] = c,
        }
    }

    pub fn add_at(&mut self, k: Lattice, b: Branch, c: Complex64) {
        let i = self.index(k);
        match b {
            Branch::Plus => self.plus[i] += c,
            Branch::Minus => self.minus[i] += c,
        }
    }

    pub fn branch(&self, b: Branch) -> &[Complex64] {
        match b {
            Branch::Plus => &self.plus,
            Branch::Minus => &self.minus,
        }
    }

    pub fn branch_mut(&mut self, b: Branch) -> &mut [Complex64] {
        match b {
            Branch::Plus => &mut self.plus,
            Branch::Minus => &mut self.minus,
        }
    }

    /// Single coefficient `a_k^b = 1`.
    pub fn unit(nx: usize, ny: usize, k: Lattice, b: Branch) -> Self {
        let mut m = Self::zeros(nx, ny);
        m.set(k, b, Complex64::new(1.0, 0.0));
        m
    }

    /// Nonzero entries as `(k, branch, a)`.
    pub fn entries(&self) -> Vec<(Lattice, Branch, Complex64)> {
        let mut out = Vec::new();
        for i in 0..self.plus.len() {
            let k = self.lattice_at(i);
            for b in Branch::BOTH {
                let a = self.branch(b)[i];
                if a != Complex64::new(0.0, 0.0) {
                    out.push((k, b, a));
                }
            }
        }
        out
    }

    /// Largest violation of `a_{−k}^± = conj(a_k^±)`.
    pub fn reality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.plus.len() {
            let k = self.lattice_at(i);
            let j = self.index(-k);
            worst = worst
                .max((self.plus[i] - self.plus[j].conj()).norm())
                .max((self.minus[i] - self.minus[j].conj()).norm());
        }
        worst
    }

    pub fn make_real(&mut self) {
        let (p, m) = (self.plus.clone(), self.minus.clone());
        for i in 0..p.len() {
            let j = self.index(-self.lattice_at(i));
            self.plus[i] = 0.5 * (p[i] + p[j].conj());
            self.minus[i] = 0.5 * (m[i] + m[j].conj());
        }
    }

    /// `Σ|a_k^+|² + |a_k^−|²`.
    pub fn coefficient_norm_sq(&self) -> f64 {
        self.plus
            .iter()
            .chain(&self.minus)
            .map(|c| c.norm_sqr())
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.plus
            .iter()
            .chain(&self.minus)
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.plus
            .iter()
            .chain(&self.minus)
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn axpy(&mut self, a: Complex64, o: &Self) {
        for (x, y) in self.plus.iter_mut().zip(&o.plus) {
            *x += a * y;
        }
        for (x, y) in self.minus.iter_mut().zip(&o.minus) {
            *x += a * y;
        }
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        let mut r = self.clone();
        r.plus
            .iter_mut()
            .chain(r.minus.iter_mut())
            .for_each(|c| *c *= a);
        r
    }

    /// Multiplies `a_k^b` by `f(k, b)`; the zero mode is left at zero.
    pub fn map(&self, f: impl Fn(Lattice, Branch) -> Complex64) -> Self {
        let mut r = self.clone();
        for i in 0..r.plus.len() {
            let k = r.lattice_at(i);
            if k.is_zero() {
                continue;
            }
            r.plus[i] *= f(k, Branch::Plus);
            r.minus[i] *= f(k, Branch::Minus);
        }
        r
    }

    /// Keeps only modes inside the dealiased band of `grid`.
    pub fn truncate(&mut self, grid: &Grid) {
        for i in 0..self.plus.len() {
            let k = self.lattice_at(i);
            if k.is_zero() || !grid.in_band(k) {
                self.plus[i] = Complex64::new(0.0, 0.0);
                self.minus[i] = Complex64::new(0.0, 0.0);
            }
        }
    }
}

impl std::ops::Sub<&ModeCoefficients> for &ModeCoefficients {
    type Output = ModeCoefficients;
    fn sub(self, o: &ModeCoefficients) -> ModeCoefficients {
        let mut r = self.clone();
        r.axpy(Complex64::new(-1.0, 0.0), o);
        r
    }
}

impl std::ops::Add<&ModeCoefficients> for &ModeCoefficients {
    type Output = ModeCoefficients;
    fn add(self, o: &ModeCoefficients) -> ModeCoefficients {
        let mut r = self.clone();
        r.axpy(Complex64::new(1.0, 0.0), o);
        r
    }
}

/// `a_k^± = ⟨U, V_k^{*,±}⟩`. Kernel components of U do not contribute.
pub fn decompose(state: &AcousticState, params: &PhysicalParams) -> ModeCoefficients {
    let (nx, ny) = state.dims();
    let mut out = ModeCoefficients::zeros(nx, ny);
    let (q, ux, uy) = (state.q.coeffs(), state.u.x.coeffs(), state.u.y.coeffs());
    for i in 0..q.len() {
        let k = state.q.lattice_at(i);
        if k.is_zero() {
            continue;
        }
        for b in Branch::BOTH {
            let w = conjugate_vector(k, b, params);
            out.branch_mut(b)[i] = q[i] * w[0] + ux[i] * w[1] + uy[i] * w[2];
        }
    }
    out
}

/// `Σ a_k^± V_k^±`.
pub fn reconstruct(modes: &ModeCoefficients, params: &PhysicalParams) -> AcousticState {
    let (nx, ny) = modes.dims();
    let mut out = AcousticState::zeros(nx, ny);
    for i in 0..nx * ny {
        let k = modes.lattice_at(i);
        if k.is_zero() {
            continue;
        }
        for b in Branch::BOTH {
            let a = modes.branch(b)[i];
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let v = eigen_vector(k, b, params);
            out.q.coeffs_mut()[i] += a * v[0];
            out.u.x.coeffs_mut()[i] += a * v[1];
            out.u.y.coeffs_mut()[i] += a * v[2];
        }
    }
    out
}

/// `𝓛(t)` in coefficient space: `a_k^± ↦ a_k^± e^{±iς sg(k)|k| t}`.
pub fn semigroup_modes(
    t: f64,
    modes: &ModeCoefficients,
    params: &PhysicalParams,
) -> ModeCoefficients {
    modes.map(|k, b| {
        let (s, c) = (b.sign() * frequency(k, params) * t).sin_cos();
        Complex64::new(c, s)
    })
}

/// `𝓛(t)U` for a general state; the kernel component is left unchanged.
pub fn semigroup(t: f64, state: &AcousticState, params: &PhysicalParams) -> AcousticState {
    let modes = decompose(state, params);
    let mut out = state - &reconstruct(&modes, params);
    out += &reconstruct(&semigroup_modes(t, &modes, params), params);
    out
}

/// First component `𝓛₁(t)V`.
pub fn semigroup_q(t: f64, modes: &ModeCoefficients, params: &PhysicalParams) -> ScalarField2 {
    reconstruct(&semigroup_modes(t, modes, params), params).q
}

/// Second component `𝓛₂(t)V`.
pub fn semigroup_u(t: f64, modes: &ModeCoefficients, params: &PhysicalParams) -> VectorField2 {
    reconstruct(&semigroup_modes(t, modes, params), params).u
}

/// `U(t) = 𝓛(t/ε)U₀ + ∫₀ᵗ 𝓛((t−s)/ε) G(s) ds` by the trapezoid rule on the samples of G.
///
/// `forcing` holds `(s_j, G(s_j))` with increasing times starting at 0 and ending at `t`.
pub fn duhamel(
    u0: &AcousticState,
    forcing: &[(f64, AcousticState)],
    eps: f64,
    t: f64,
    params: &PhysicalParams,
) -> Result<AcousticState> {
    let mut out = semigroup(t / eps, u0, params);
    if forcing.is_empty() {
        return Ok(out);
    }
    let tol = 1e-12 * t.abs().max(1.0);
    let (first, last) = (forcing[0].0, forcing[forcing.len() - 1].0);
    if first.abs() > tol || (last - t).abs() > tol {
        return Err(Error::Domain(format!(
            "forcing samples cover [{first}, {last}], need [0, {t}]"
        )));
    }
    if forcing.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Domain("forcing sample times must increase".into()));
    }
    for w in forcing.windows(2) {
        let h = w[1].0 - w[0].0;
        for (s, g) in [&w[0], &w[1]] {
            let term = semigroup((t - s) / eps, g, params);
            out.axpy(0.5 * h, &term);
        }
    }
    Ok(out)
}
