//! Periodic-grid Fourier machinery.
//!
//! The domain `[-L, L)` is sampled at `N` equally spaced nodes
//! `x_j = -L + j Δx`, `Δx = 2L/N`. With the scale `s = π/L` the nodes map
//! to `x̃_j = s x_j + π = 2πj/N`, and the transform pair is
//!
//! ```text
//! û(k) = N^{-1/2} Σ_j u(x_j) exp(-i k x̃_j),     -N/2 ≤ k ≤ N/2 - 1
//! u(x) = N^{-1/2} Σ_k û(k) exp(+i k (s x + π))
//! ```
//!
//! so `d/dx` acts on coefficients as multiplication by `i s k`. Coefficients
//! are stored in FFT order: index `j < N/2` holds `k = j`, index `j ≥ N/2`
//! holds `k = j - N`. The Nyquist mode `k = -N/2` has no conjugate partner
//! and is zeroed by odd derivatives, antiderivatives and non-grid shifts.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{CrbError, Result};

/// Complex coefficient type used throughout the crate.
pub type C64 = Complex64;

/// Relative tolerance for round-off level checks.
pub const ROUNDOFF_TOL: f64 = 1e-12;
/// Relative tolerance for conjugate-symmetry and zero-mean checks.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Uniform periodic grid on `[-L, L)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    half_length: f64,
    n_points: usize,
}

impl GridSpec {
    /// Builds a grid with half-length `L` and `N` points. `N` must be even.
    pub fn new(half_length: f64, n_points: usize) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(CrbError::Config(format!(
                "grid half-length must be positive and finite, got {half_length}"
            )));
        }
        if n_points < 2 || n_points % 2 != 0 {
            return Err(CrbError::Config(format!(
                "grid point count must be even and at least 2, got {n_points}"
            )));
        }
        Ok(Self { half_length, n_points })
    }

    /// Builds a grid from a target spacing, rounding `2L/Δx` to the nearest
    /// even integer.
    pub fn from_spacing(half_length: f64, dx: f64) -> Result<Self> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(CrbError::Config(format!("grid spacing must be positive, got {dx}")));
        }
        let n = (2.0 * half_length / dx / 2.0).round() as usize * 2;
        Self::new(half_length, n.max(2))
    }

    /// Half-length `L`.
    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    /// Number of nodes `N`.
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Node spacing `Δx = 2L/N`.
    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.n_points as f64
    }

    /// Wavenumber scale `s = π/L`.
    pub fn scale(&self) -> f64 {
        PI / self.half_length
    }

    /// Node `x_j = -L + j Δx`.
    pub fn node(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.dx()
    }

    /// All nodes `x_0 … x_{N-1}`.
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.node(j)).collect()
    }

    /// Samples a function at the nodes.
    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.n_points).map(|j| f(self.node(j))).collect()
    }

    /// Integer wavenumber stored at FFT index `idx`.
    pub fn wavenumber(&self, idx: usize) -> i64 {
        let n = self.n_points;
        if idx < n / 2 {
            idx as i64
        } else {
            idx as i64 - n as i64
        }
    }

    /// FFT index of the Nyquist mode `k = -N/2`.
    pub fn nyquist_index(&self) -> usize {
        self.n_points / 2
    }

    /// Grid mean `(1/2L) ∫ f dx`, which equals the arithmetic mean of the
    /// samples for periodic data.
    pub fn mean(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() / f.len() as f64
    }

    /// Periodic trapezoid integral over one period.
    pub fn integral(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() * self.dx()
    }

    /// Whether `a` is an integer multiple of `Δx` up to round-off.
    pub fn is_grid_multiple(&self, a: f64) -> bool {
        let r = a / self.dx();
        (r - r.round()).abs() <= 1e-9 * r.abs().max(1.0)
    }

    /// Checks that another grid is identical.
    pub fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(CrbError::GridMismatch(format!("{self} vs {other}")))
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GridSpec(L={}, N={})", self.half_length, self.n_points)
    }
}

/// Reusable FFT scratch space for the hot paths of the solvers.
#[derive(Clone, Debug)]
pub struct FftScratch {
    buf: Vec<C64>,
    work: Vec<C64>,
}

/// Cached FFT plans and wavenumber tables for one grid.
///
/// Cheap to clone; plans are shared through `Arc`.
#[derive(Clone)]
pub struct Spectral {
    grid: GridSpec,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    /// `s k` per FFT index (Nyquist carries `-s N/2`).
    kappa: Arc<Vec<f64>>,
    norm: f64,
    dealias: bool,
}

impl fmt::Debug for Spectral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral")
            .field("grid", &self.grid)
            .field("dealias", &self.dealias)
            .finish()
    }
}

impl Spectral {
    /// Plans forward and inverse transforms for the grid.
    pub fn new(grid: GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.n_points();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let s = grid.scale();
        let kappa = (0..n).map(|i| s * grid.wavenumber(i) as f64).collect();
        Self {
            grid,
            fft,
            ifft,
            kappa: Arc::new(kappa),
            norm: 1.0 / (n as f64).sqrt(),
            dealias: false,
        }
    }

    /// Enables the 2/3-rule truncation applied after every pseudospectral
    /// product evaluated through [`Spectral::dealias_in_place`].
    pub fn with_dealiasing(mut self, on: bool) -> Self {
        self.dealias = on;
        self
    }

    /// Whether 2/3-rule truncation is active.
    pub fn dealiasing(&self) -> bool {
        self.dealias
    }

    /// The grid these plans belong to.
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.grid.n_points()
    }

    /// Always false; grids have at least two points.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// `s k` for every FFT index.
    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    /// Allocates scratch space sized for these plans.
    pub fn scratch(&self) -> FftScratch {
        let n = self.len();
        let w = self
            .fft
            .get_inplace_scratch_len()
            .max(self.ifft.get_inplace_scratch_len());
        FftScratch {
            buf: vec![C64::new(0.0, 0.0); n],
            work: vec![C64::new(0.0, 0.0); w],
        }
    }

    fn forward_raw(&self, buf: &mut [C64], work: &mut [C64]) {
        self.fft.process_with_scratch(buf, work);
        let norm = self.norm;
        buf.iter_mut().for_each(|z| *z *= norm);
    }

    fn inverse_raw(&self, buf: &mut [C64], work: &mut [C64]) {
        self.ifft.process_with_scratch(buf, work);
        let norm = self.norm;
        buf.iter_mut().for_each(|z| *z *= norm);
    }

    /// Forward transform of a real field.
    pub fn forward(&self, field: &[f64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.len()];
        let mut sc = self.scratch();
        self.forward_into(field, &mut out, &mut sc);
        out
    }

    /// Forward transform of a real field into `out`.
    pub fn forward_into(&self, field: &[f64], out: &mut [C64], sc: &mut FftScratch) {
        assert_eq!(field.len(), self.len(), "field length must equal N");
        for (o, &v) in out.iter_mut().zip(field) {
            *o = C64::new(v, 0.0);
        }
        self.forward_raw(out, &mut sc.work);
    }

    /// Inverse transform with a conjugate-symmetry check: the imaginary
    /// residue must not exceed `SYMMETRY_TOL` relative to the field scale.
    pub fn inverse(&self, coeffs: &[C64]) -> Result<Vec<f64>> {
        assert_eq!(coeffs.len(), self.len(), "coefficient length must equal N");
        let mut buf = coeffs.to_vec();
        let mut sc = self.scratch();
        self.inverse_raw(&mut buf, &mut sc.work);
        let scale = buf.iter().map(|z| z.re.abs()).fold(0.0, f64::max).max(1.0);
        let resid = buf.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if resid > SYMMETRY_TOL * scale {
            return Err(CrbError::Data(format!(
                "coefficients are not conjugate-symmetric: imaginary residue {resid:e}"
            )));
        }
        Ok(buf.into_iter().map(|z| z.re).collect())
    }

    /// Inverse transform keeping only the real part, without checks.
    pub fn inverse_real(&self, coeffs: &[C64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        let mut sc = self.scratch();
        self.inverse_real_into(coeffs, &mut out, &mut sc);
        out
    }

    /// Unchecked inverse transform into `out`.
    pub fn inverse_real_into(&self, coeffs: &[C64], out: &mut [f64], sc: &mut FftScratch) {
        sc.buf.copy_from_slice(coeffs);
        self.inverse_raw(&mut sc.buf, &mut sc.work);
        for (o, z) in out.iter_mut().zip(&sc.buf) {
            *o = z.re;
        }
    }

    /// Forward transforms of two real fields with a single complex FFT.
    ///
    /// With `z = a + i b` and `Z = F{z}`, the Hermitian parts separate as
    /// `â_k = (Z_k + conj Z_{-k})/2` and `b̂_k = (Z_k - conj Z_{-k})/(2i)`.
    pub fn forward_pair_into(&self, a: &[f64], b: &[f64], out_a: &mut [C64], out_b: &mut [C64], sc: &mut FftScratch) {
        let n = self.len();
        for ((z, &x), &y) in sc.buf.iter_mut().zip(a).zip(b) {
            *z = C64::new(x, y);
        }
        self.forward_raw(&mut sc.buf, &mut sc.work);
        for i in 0..n {
            let j = if i == 0 { 0 } else { n - i };
            let zk = sc.buf[i];
            let zm = sc.buf[j].conj();
            out_a[i] = (zk + zm) * 0.5;
            let d = (zk - zm) * 0.5;
            out_b[i] = C64::new(d.im, -d.re);
        }
    }

    /// Inverse transforms of two Hermitian spectra with one complex FFT.
    pub fn inverse_pair_into(&self, a: &[C64], b: &[C64], out_a: &mut [f64], out_b: &mut [f64], sc: &mut FftScratch) {
        for ((z, &x), &y) in sc.buf.iter_mut().zip(a).zip(b) {
            // x + i y
            *z = C64::new(x.re - y.im, x.im + y.re);
        }
        self.inverse_raw(&mut sc.buf, &mut sc.work);
        for ((z, oa), ob) in sc.buf.iter().zip(out_a.iter_mut()).zip(out_b.iter_mut()) {
            *oa = z.re;
            *ob = z.im;
        }
    }

    /// Multiplies coefficients by `(i s k)^order` in place. Odd orders zero
    /// the Nyquist mode; the `k = 0` coefficient always becomes zero.
    pub fn derivative_in_place(&self, coeffs: &mut [C64], order: u32) {
        if order == 0 {
            return;
        }
        let ik_pow = |kap: f64| -> C64 {
            let mag = kap.powi(order as i32);
            match order % 4 {
                0 => C64::new(mag, 0.0),
                1 => C64::new(0.0, mag),
                2 => C64::new(-mag, 0.0),
                _ => C64::new(0.0, -mag),
            }
        };
        for (c, &kap) in coeffs.iter_mut().zip(self.kappa.iter()) {
            *c *= ik_pow(kap);
        }
        if order % 2 == 1 {
            coeffs[self.grid.nyquist_index()] = C64::new(0.0, 0.0);
        }
    }

    /// Returns the coefficients of the `order`-th derivative.
    pub fn derivative(&self, coeffs: &[C64], order: u32) -> Vec<C64> {
        let mut out = coeffs.to_vec();
        self.derivative_in_place(&mut out, order);
        out
    }

    /// Derivative of a real field, returned in physical space.
    pub fn differentiate(&self, field: &[f64], order: u32) -> Vec<f64> {
        let c = self.derivative(&self.forward(field), order);
        self.inverse_real(&c)
    }

    /// Represents `u(x + a)` with periodic wrap-around in place.
    pub fn phase_shift_in_place(&self, coeffs: &mut [C64], a: f64) {
        if a == 0.0 {
            return;
        }
        let keep_nyquist = self.grid.is_grid_multiple(a);
        for (c, &kap) in coeffs.iter_mut().zip(self.kappa.iter()) {
            *c *= C64::from_polar(1.0, kap * a);
        }
        let ny = self.grid.nyquist_index();
        if keep_nyquist {
            // The Nyquist factor exp(-i π a/Δx) is exactly ±1 for grid
            // multiples; restore it without round-off.
            let m = (a / self.grid.dx()).round() as i64;
            let kap = self.kappa[ny];
            let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            coeffs[ny] *= C64::from_polar(1.0, -kap * a) * sign;
        } else {
            coeffs[ny] = C64::new(0.0, 0.0);
        }
    }

    /// Returns the coefficients of `u(x + a)`.
    pub fn phase_shift(&self, coeffs: &[C64], a: f64) -> Vec<C64> {
        let mut out = coeffs.to_vec();
        self.phase_shift_in_place(&mut out, a);
        out
    }

    /// Evaluates a real field at `x + a` for every node.
    pub fn shift_field(&self, field: &[f64], a: f64) -> Vec<f64> {
        let c = self.phase_shift(&self.forward(field), a);
        self.inverse_real(&c)
    }

    fn check_zero_mean(&self, coeffs: &[C64]) -> Result<()> {
        let scale = coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        if coeffs[0].norm() > SYMMETRY_TOL * scale {
            return Err(CrbError::Precondition(format!(
                "antiderivative requires zero-mean input, k=0 coefficient is {:e}",
                coeffs[0].norm()
            )));
        }
        Ok(())
    }

    /// Periodic zero-mean antiderivative in coefficient space: `ĉ(k)/(isk)`
    /// for `k ≠ 0`, with the mean and Nyquist modes set to zero.
    pub fn antiderivative_coeffs(&self, coeffs: &[C64]) -> Result<Vec<C64>> {
        self.check_zero_mean(coeffs)?;
        Ok(self.antiderivative_coeffs_unchecked(coeffs))
    }

    /// As [`Spectral::antiderivative_coeffs`] but silently discards the mean.
    pub fn antiderivative_coeffs_unchecked(&self, coeffs: &[C64]) -> Vec<C64> {
        let mut out = coeffs.to_vec();
        self.antiderivative_in_place(&mut out);
        out
    }

    /// In-place zero-mean antiderivative (mean discarded).
    pub fn antiderivative_in_place(&self, coeffs: &mut [C64]) {
        coeffs[0] = C64::new(0.0, 0.0);
        for (c, &kap) in coeffs.iter_mut().zip(self.kappa.iter()).skip(1) {
            // 1/(i κ) = -i/κ
            *c = C64::new(c.im / kap, -c.re / kap);
        }
        coeffs[self.grid.nyquist_index()] = C64::new(0.0, 0.0);
    }

    /// Periodic antiderivative shifted so that its value at `x = -L` is 0.
    pub fn antiderivative_zero_at_left(&self, coeffs: &[C64]) -> Result<Vec<f64>> {
        let a = self.antiderivative_coeffs(coeffs)?;
        let mut f = self.inverse_real(&a);
        let f0 = f[0];
        f.iter_mut().for_each(|v| *v -= f0);
        Ok(f)
    }

    /// Real-field convenience wrapper: zero-mean periodic antiderivative of
    /// `field - mean(field)`.
    pub fn zero_mean_antiderivative(&self, field: &[f64]) -> Vec<f64> {
        let c = self.forward(field);
        self.inverse_real(&self.antiderivative_coeffs_unchecked(&c))
    }

    /// Zeroes every mode with `|k| > N/3` (2/3 rule) when dealiasing is on.
    pub fn dealias_in_place(&self, coeffs: &mut [C64]) {
        if !self.dealias {
            return;
        }
        let cut = self.len() as i64 / 3;
        for (i, c) in coeffs.iter_mut().enumerate() {
            if self.grid.wavenumber(i).abs() > cut {
                *c = C64::new(0.0, 0.0);
            }
        }
    }

    /// Removes the mean of a real field in place and returns it.
    pub fn remove_mean(&self, field: &mut [f64]) -> f64 {
        let m = self.grid.mean(field);
        field.iter_mut().for_each(|v| *v -= m);
        m
    }
}

/// Cumulative trapezoid integral from `-L` to each node. The first entry is
/// zero; no periodicity is assumed.
pub fn cumulative_quadrature(grid: &GridSpec, field: &[f64]) -> Vec<f64> {
    let dx = grid.dx();
    let mut out = Vec::with_capacity(field.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in field.windows(2) {
        acc += 0.5 * dx * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Maximum absolute value of a slice.
pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
