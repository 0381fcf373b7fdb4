//! Uniform periodic grid on the circle and the Fourier-multiplier calculus.
//!
//! Grid nodes are `s_j = -pi + 2 pi j / N` with `N` a power of two. Spectral
//! coefficients follow `f(s) = sum_n c(n) e^{i n s}` for `n` in `-N/2 .. N/2 - 1`.
//! Odd symbols (odd derivatives, the Hilbert transform) drop the Nyquist mode
//! since its sampled image is identically zero; even symbols keep it.

use std::ops::{Add, Mul, Neg, Sub};

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::real::Real;

/// Fraction of spectral energy above `N/3` that triggers a resolution warning.
pub const BAND_RESOLUTION_THRESHOLD: f64 = 1e-8;

/// Real samples of a 2π-periodic function on the uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGridFunction<R> {
    values: Vec<R>,
}

/// Complex Fourier coefficients of a grid function, stored in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeffs<R> {
    coeffs: Vec<Complex<R>>,
}

/// Selects the homogeneous (`Ḣ^s`) or inhomogeneous (`H^s`) Sobolev norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SobolevKind {
    Homogeneous,
    Inhomogeneous,
}

/// Grid node `s_j` for an `n`-point grid.
#[inline]
pub fn grid_node<R: Real>(n: usize, j: usize) -> R {
    -R::PI() + R::two_pi() * R::from_usize_lossy(j) / R::from_usize_lossy(n)
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        Err(Error::NotPowerOfTwo(n))
    } else {
        Ok(())
    }
}

impl<R: Real> PeriodicGridFunction<R> {
    pub fn new(values: Vec<R>) -> Result<Self> {
        check_len(values.len())?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { values })
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(n: usize, f: impl Fn(R) -> R) -> Result<Self> {
        check_len(n)?;
        Self::new((0..n).map(|j| f(grid_node(n, j))).collect())
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::constant(n, R::zero())
    }

    pub fn constant(n: usize, c: R) -> Result<Self> {
        check_len(n)?;
        Ok(Self { values: vec![c; n] })
    }

    /// Wraps values produced by an arithmetic pipeline on an existing grid.
    /// Callers guarantee the length; finiteness is checked by the evolution loop.
    pub(crate) fn from_raw(values: Vec<R>) -> Self {
        debug_assert!(values.len().is_power_of_two());
        Self { values }
    }

    #[inline]
    pub fn n_points(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn values(&self) -> &[R] {
        &self.values
    }

    pub fn into_values(self) -> Vec<R> {
        self.values
    }

    pub fn nodes(&self) -> Vec<R> {
        let n = self.n_points();
        (0..n).map(|j| grid_node(n, j)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(R) -> R) -> Self {
        Self::from_raw(self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise map that also receives the grid node.
    pub fn map_with_node(&self, f: impl Fn(R, R) -> R) -> Self {
        let n = self.n_points();
        Self::from_raw(
            self.values
                .iter()
                .enumerate()
                .map(|(j, &v)| f(grid_node(n, j), v))
                .collect(),
        )
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(R, R) -> R) -> Result<Self> {
        if other.n_points() != self.n_points() {
            return Err(Error::LengthMismatch {
                expected: self.n_points(),
                actual: other.n_points(),
            });
        }
        Ok(Self::from_raw(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    /// `self + scale * other`.
    pub fn axpy(&self, scale: R, other: &Self) -> Self {
        assert_eq!(self.n_points(), other.n_points(), "grid size mismatch");
        Self::from_raw(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a + scale * b)
                .collect(),
        )
    }

    /// Mean value `(1/2π) ∫ f`, exact for the trapezoid rule.
    pub fn mean(&self) -> R {
        self.values.iter().copied().sum::<R>() / R::from_usize_lossy(self.n_points())
    }

    pub fn sup_norm(&self) -> R {
        self.values
            .iter()
            .fold(R::zero(), |acc, v| acc.max(v.abs()))
    }

    /// Index and value of the largest sample (first one on ties).
    pub fn argmax(&self) -> (usize, R) {
        extremum(&self.values, |a, b| a > b)
    }

    /// Index and value of the smallest sample (first one on ties).
    pub fn argmin(&self) -> (usize, R) {
        extremum(&self.values, |a, b| a < b)
    }

    /// Trapezoid approximation of `∫_{S^1} f g ds`.
    pub fn l2_inner(&self, other: &Self) -> R {
        assert_eq!(self.n_points(), other.n_points(), "grid size mismatch");
        let h = R::two_pi() / R::from_usize_lossy(self.n_points());
        h * self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a * b)
            .sum::<R>()
    }

    pub fn l2_norm_sq(&self) -> R {
        self.l2_inner(self)
    }
}

fn extremum<R: Real>(values: &[R], better: impl Fn(R, R) -> bool) -> (usize, R) {
    let mut best = (0, values[0]);
    for (i, &v) in values.iter().enumerate().skip(1) {
        if better(v, best.1) {
            best = (i, v);
        }
    }
    best
}

impl<R: Real> Add for &PeriodicGridFunction<R> {
    type Output = PeriodicGridFunction<R>;
    fn add(self, rhs: Self) -> Self::Output {
        self.axpy(R::one(), rhs)
    }
}

impl<R: Real> Sub for &PeriodicGridFunction<R> {
    type Output = PeriodicGridFunction<R>;
    fn sub(self, rhs: Self) -> Self::Output {
        self.axpy(-R::one(), rhs)
    }
}

impl<R: Real> Mul<R> for &PeriodicGridFunction<R> {
    type Output = PeriodicGridFunction<R>;
    fn mul(self, rhs: R) -> Self::Output {
        self.map(|v| v * rhs)
    }
}

impl<R: Real> Neg for &PeriodicGridFunction<R> {
    type Output = PeriodicGridFunction<R>;
    fn neg(self) -> Self::Output {
        self.map(|v| -v)
    }
}

/// Signed mode carried by FFT slot `k` of an `n`-point transform.
#[inline]
pub fn mode_of_index(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// FFT slot of signed mode `m` (which must lie in `-n/2 .. n/2 - 1`).
#[inline]
fn index_of_mode(m: i64, n: usize) -> usize {
    if m >= 0 {
        m as usize
    } else {
        (m + n as i64) as usize
    }
}

#[inline]
fn alternating<R: Real>(k: usize) -> R {
    if k % 2 == 0 {
        R::one()
    } else {
        -R::one()
    }
}

impl<R: Real> SpectralCoeffs<R> {
    pub fn zeros(n: usize) -> Result<Self> {
        check_len(n)?;
        Ok(Self {
            coeffs: vec![Complex::new(R::zero(), R::zero()); n],
        })
    }

    #[inline]
    pub fn n_points(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of mode `m`; zero outside the resolved band.
    pub fn mode(&self, m: i64) -> Complex<R> {
        let n = self.n_points() as i64;
        if m < -n / 2 || m >= n / 2 {
            Complex::new(R::zero(), R::zero())
        } else {
            self.coeffs[index_of_mode(m, self.n_points())]
        }
    }

    pub fn set_mode(&mut self, m: i64, c: Complex<R>) {
        let n = self.n_points() as i64;
        assert!(m >= -n / 2 && m < n / 2, "mode {m} outside the grid band");
        let idx = index_of_mode(m, self.n_points());
        self.coeffs[idx] = c;
    }

    /// `(mode, coefficient)` pairs in ascending mode order.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex<R>)> + '_ {
        let n = self.n_points() as i64;
        (-n / 2..n / 2).map(move |m| (m, self.mode(m)))
    }

    pub fn as_fft_order(&self) -> &[Complex<R>] {
        &self.coeffs
    }

    /// Evaluates the real trigonometric interpolant at an arbitrary point; the
    /// Nyquist coefficient is read as `cos(N s / 2)`.
    pub fn evaluate(&self, s: R) -> R {
        let n = self.n_points();
        let half = n / 2;
        let mut acc = self.coeffs[0].re;
        for k in 1..half {
            let c = self.coeffs[k];
            let (sin, cos) = (R::from_usize_lossy(k) * s).sin_cos();
            acc += R::lit(2.0) * (c.re * cos - c.im * sin);
        }
        if n > 1 {
            acc += self.coeffs[half].re * (R::from_usize_lossy(half) * s).cos();
        }
        acc
    }

    /// Multiplies every mode by `symbol(m)`.
    pub fn apply(&self, symbol: impl Fn(i64) -> Complex<R>) -> Self {
        let n = self.n_points();
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c * symbol(mode_of_index(k, n)))
                .collect(),
        }
    }

    /// Discrete energy `sum |c(n)|^2 |n|^{2s}` (mode 0 excluded) plus
    /// `|c(0)|^2` when `include_mean`.
    fn weighted_energy(&self, s: R, include_mean: bool) -> R {
        let mut acc = if include_mean {
            self.coeffs[0].norm_sqr()
        } else {
            R::zero()
        };
        for (m, c) in self.modes().filter(|(m, _)| *m != 0) {
            let w = R::from_i64_lossy(m.abs()).powf(R::lit(2.0) * s);
            acc += w * c.norm_sqr();
        }
        acc
    }
}

fn fft_in_place<R: Real>(buf: &mut [Complex<R>], inverse: bool) {
    let mut planner = FftPlanner::new();
    let plan = if inverse {
        planner.plan_fft_inverse(buf.len())
    } else {
        planner.plan_fft_forward(buf.len())
    };
    plan.process(buf);
}

/// Discrete Fourier transform onto the `e^{ins}` basis of the shifted grid.
pub fn dft<R: Real>(f: &PeriodicGridFunction<R>) -> SpectralCoeffs<R> {
    let n = f.n_points();
    let mut buf: Vec<Complex<R>> = f
        .values
        .iter()
        .map(|&v| Complex::new(v, R::zero()))
        .collect();
    fft_in_place(&mut buf, false);
    let inv_n = R::one() / R::from_usize_lossy(n);
    for (k, c) in buf.iter_mut().enumerate() {
        // The grid starts at -pi, which multiplies mode m by (-1)^m.
        *c = *c * (alternating::<R>(k) * inv_n);
    }
    SpectralCoeffs { coeffs: buf }
}

/// Inverse of [`dft`]; the imaginary residue of non-Hermitian input is discarded.
pub fn idft<R: Real>(c: &SpectralCoeffs<R>) -> PeriodicGridFunction<R> {
    let mut buf: Vec<Complex<R>> = c
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, &v)| v * alternating::<R>(k))
        .collect();
    fft_in_place(&mut buf, true);
    PeriodicGridFunction::from_raw(buf.into_iter().map(|v| v.re).collect())
}

/// Applies a Fourier multiplier; `drop_nyquist` zeroes the `-N/2` mode.
pub fn apply_multiplier<R: Real>(
    f: &PeriodicGridFunction<R>,
    drop_nyquist: bool,
    symbol: impl Fn(i64) -> Complex<R>,
) -> PeriodicGridFunction<R> {
    let n = f.n_points() as i64;
    idft(&dft(f).apply(|m| {
        if drop_nyquist && m == -n / 2 {
            Complex::new(R::zero(), R::zero())
        } else {
            symbol(m)
        }
    }))
}

/// Spectral derivative of the given order, symbol `(i n)^order`.
pub fn derivative<R: Real>(f: &PeriodicGridFunction<R>, order: u32) -> PeriodicGridFunction<R> {
    if order == 0 {
        return f.clone();
    }
    let i_pow = match order % 4 {
        0 => Complex::new(R::one(), R::zero()),
        1 => Complex::new(R::zero(), R::one()),
        2 => Complex::new(-R::one(), R::zero()),
        _ => Complex::new(R::zero(), -R::one()),
    };
    apply_multiplier(f, order % 2 == 1, |m| {
        i_pow * R::from_i64_lossy(m).powi(order as i32)
    })
}

/// Periodic Hilbert transform, symbol `-i sgn(n)`.
pub fn hilbert<R: Real>(f: &PeriodicGridFunction<R>) -> PeriodicGridFunction<R> {
    apply_multiplier(f, true, |m| {
        Complex::new(R::zero(), -R::from_i64_lossy(m.signum()))
    })
}

/// Fractional power `Λ^s` with symbol `|n|^s`, `s >= -1`.
///
/// The mean mode is annihilated for `s != 0`; negative powers require a
/// zero-mean input.
pub fn lambda_pow<R: Real>(f: &PeriodicGridFunction<R>, s: R) -> Result<PeriodicGridFunction<R>> {
    if !(s >= -R::one()) {
        return Err(Error::InvalidArgument(format!(
            "fractional power {s} below -1"
        )));
    }
    let coeffs = dft(f);
    if s < R::zero() {
        let mean = coeffs.mode(0).re;
        let scale = R::one().max(f.sup_norm());
        if mean.abs() > R::lit(1e3) * R::epsilon() * scale {
            return Err(Error::NonZeroMean {
                power: s.to_f64().unwrap_or(f64::NAN),
                mean: mean.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    if s == R::zero() {
        return Ok(f.clone());
    }
    Ok(idft(&coeffs.apply(|m| {
        if m == 0 {
            Complex::new(R::zero(), R::zero())
        } else {
            Complex::new(R::from_i64_lossy(m.abs()).powf(s), R::zero())
        }
    })))
}

/// `Λ f = |n| f̂`, the common special case of [`lambda_pow`].
pub fn lambda<R: Real>(f: &PeriodicGridFunction<R>) -> PeriodicGridFunction<R> {
    apply_multiplier(f, false, |m| {
        Complex::new(R::from_i64_lossy(m.abs()), R::zero())
    })
}

/// Squared Sobolev norm with the convention `||f||^2_{L^2} = ∫_{S^1} |f|^2 = 2π sum |c(n)|^2`.
pub fn sobolev_norm_sq<R: Real>(f: &PeriodicGridFunction<R>, s: R, kind: SobolevKind) -> R {
    let c = dft(f);
    R::two_pi() * c.weighted_energy(s, kind == SobolevKind::Inhomogeneous)
}

pub fn sobolev_norm<R: Real>(f: &PeriodicGridFunction<R>, s: R, kind: SobolevKind) -> R {
    sobolev_norm_sq(f, s, kind).sqrt()
}

/// Band-limited interpolation onto a grid `factor` times finer.
///
/// `factor` must be a power of two so the refined grid stays admissible. The
/// Nyquist coefficient is split evenly between `±N/2`.
pub fn refine<R: Real>(f: &PeriodicGridFunction<R>, factor: usize) -> Result<PeriodicGridFunction<R>> {
    if factor == 0 || !factor.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "refinement factor {factor} is not a power of two"
        )));
    }
    if factor == 1 {
        return Ok(f.clone());
    }
    let n = f.n_points();
    let c = dft(f);
    let mut fine = SpectralCoeffs::zeros(n * factor)?;
    let half = n as i64 / 2;
    for (m, v) in c.modes() {
        if m == -half {
            let split = v * R::lit(0.5);
            fine.set_mode(-half, split);
            fine.set_mode(half, split);
        } else {
            fine.set_mode(m, v);
        }
    }
    let values = idft(&fine).into_values();
    Ok(PeriodicGridFunction::from_raw(values))
}

/// Samples on the half-shifted grid `s_j + π/N`, via one 2x refinement.
pub fn half_shift<R: Real>(f: &PeriodicGridFunction<R>) -> PeriodicGridFunction<R> {
    let fine = refine(f, 2).expect("factor 2 is a power of two");
    PeriodicGridFunction::from_raw(fine.values.iter().skip(1).step_by(2).copied().collect())
}

/// `sup |f|` read off the 4x band-limited refinement.
pub fn refined_sup_norm<R: Real>(f: &PeriodicGridFunction<R>) -> R {
    refine(f, 4).expect("factor 4 is a power of two").sup_norm()
}

/// `|f|_{W^{1,∞}} = sup |f| + sup |f'|`, both on the 4x refinement.
pub fn w1_inf_norm<R: Real>(f: &PeriodicGridFunction<R>) -> R {
    refined_sup_norm(f) + refined_sup_norm(&derivative(f, 1))
}

/// Fraction of the spectral energy carried by modes with `|n| > N/3`.
pub fn band_energy_fraction<R: Real>(f: &PeriodicGridFunction<R>) -> R {
    let c = dft(f);
    let cutoff = f.n_points() as i64 / 3;
    let (mut top, mut total) = (R::zero(), R::zero());
    for (m, v) in c.modes() {
        let e = v.norm_sqr();
        total += e;
        if m.abs() > cutoff {
            top += e;
        }
    }
    if total == R::zero() {
        R::zero()
    } else {
        top / total
    }
}

/// Logs a warning when `f` carries more than [`BAND_RESOLUTION_THRESHOLD`] of
/// its energy in the top third of the spectrum. Returns whether it is resolved.
pub fn warn_if_unresolved<R: Real>(f: &PeriodicGridFunction<R>, context: &str) -> bool {
    let frac = band_energy_fraction(f);
    let resolved = frac <= R::lit(BAND_RESOLUTION_THRESHOLD);
    if !resolved {
        log::warn!(
            "{context}: {:.3e} of the spectral energy sits in the top third of the band (N = {})",
            frac.to_f64().unwrap_or(f64::NAN),
            f.n_points()
        );
    }
    resolved
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    type G = PeriodicGridFunction<f64>;

    fn sample(n: usize, f: impl Fn(f64) -> f64) -> G {
        G::from_fn(n, f).unwrap()
    }

    fn max_diff(a: &G, b: &G) -> f64 {
        (a - b).sup_norm()
    }

    /// Real trigonometric polynomial with modes below the Nyquist frequency.
    fn band_limited(n: usize, mean: f64, cos_sin: &[(f64, f64)]) -> G {
        sample(n, |s| {
            mean + cos_sin
                .iter()
                .enumerate()
                .map(|(k, (a, b))| {
                    let m = (k + 1) as f64;
                    a * (m * s).cos() + b * (m * s).sin()
                })
                .sum::<f64>()
        })
    }

    fn coeffs_strategy() -> impl Strategy<Value = (f64, Vec<(f64, f64)>)> {
        (
            -1.0..1.0f64,
            prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..12),
        )
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert_eq!(G::new(vec![0.0; 12]), Err(Error::NotPowerOfTwo(12)));
        assert_eq!(G::zeros(0), Err(Error::NotPowerOfTwo(0)));
        assert!(matches!(G::new(vec![f64::NAN; 4]), Err(Error::NonFinite(0))));
    }

    #[test]
    fn constant_has_only_mean_mode() {
        let c = dft(&G::constant(16, 1.0).unwrap());
        for (m, v) in c.modes() {
            let expect = if m == 0 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(v.re, expect, epsilon = 1e-15);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn single_cosine_mode() {
        let c = dft(&sample(32, |s| (3.0 * s).cos()));
        for (m, v) in c.modes() {
            let expect = if m.abs() == 3 { 0.5 } else { 0.0 };
            assert_abs_diff_eq!(v.re, expect, epsilon = 1e-15);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn dft_matches_direct_summation() {
        let n = 16;
        let f = sample(n, |s| (s.sin() * 1.7).exp() + 0.3 * (5.0 * s).cos());
        let c = dft(&f);
        for m in -(n as i64) / 2..(n as i64) / 2 {
            let (mut re, mut im) = (0.0, 0.0);
            for (j, &v) in f.values().iter().enumerate() {
                let s = grid_node::<f64>(n, j);
                re += v * (m as f64 * s).cos() / n as f64;
                im -= v * (m as f64 * s).sin() / n as f64;
            }
            assert_abs_diff_eq!(c.mode(m).re, re, epsilon = 1e-14);
            assert_abs_diff_eq!(c.mode(m).im, im, epsilon = 1e-14);
        }
        assert!(max_diff(&idft(&c), &f) < 1e-13);
    }

    #[test]
    fn derivative_of_modes_and_constants() {
        let n = 64;
        for k in 1..6 {
            let kf = k as f64;
            let d = derivative(&sample(n, |s| (kf * s).cos()), 1);
            assert!(max_diff(&d, &sample(n, |s| -kf * (kf * s).sin())) < 1e-12);
        }
        for order in 1..5 {
            assert!(derivative(&G::constant(n, 2.5).unwrap(), order).sup_norm() < 1e-14);
        }
    }

    #[test]
    fn second_derivative_is_grid_converged() {
        let coarse = derivative(&sample(64, |s| s.cos().exp()), 2);
        let fine = derivative(&sample(128, |s| s.cos().exp()), 2);
        for (j, &v) in coarse.values().iter().enumerate() {
            assert_abs_diff_eq!(v, fine.values()[2 * j], epsilon = 1e-10);
        }
    }

    #[test]
    fn odd_derivative_drops_nyquist() {
        let n = 16;
        let nyq = sample(n, |s| (8.0 * s).cos());
        assert!(derivative(&nyq, 1).sup_norm() < 1e-12);
        assert!(max_diff(&derivative(&nyq, 2), &(&nyq * -64.0)) < 1e-10);
    }

    /// Midpoint rule for `(1/2π) p.v.∫ cot(α/2) f(s-α) dα`; symmetric nodes
    /// realize the principal value.
    fn hilbert_by_quadrature(f: impl Fn(f64) -> f64, s: f64, nodes: usize) -> f64 {
        let h = 2.0 * PI / nodes as f64;
        (0..nodes)
            .map(|j| {
                let a = -PI + (j as f64 + 0.5) * h;
                (a / 2.0).tan().recip() * f(s - a)
            })
            .sum::<f64>()
            * h
            / (2.0 * PI)
    }

    #[test]
    fn hilbert_matches_kernel_quadrature() {
        let n = 32;
        for k in 1..5 {
            let kf = k as f64;
            let hc = hilbert(&sample(n, |s| (kf * s).cos()));
            let hs = hilbert(&sample(n, |s| (kf * s).sin()));
            for (j, s) in hc.nodes().into_iter().enumerate() {
                let qc = hilbert_by_quadrature(|x| (kf * x).cos(), s, 2048);
                let qs = hilbert_by_quadrature(|x| (kf * x).sin(), s, 2048);
                assert_abs_diff_eq!(hc.values()[j], qc, epsilon = 1e-8);
                assert_abs_diff_eq!(hs.values()[j], qs, epsilon = 1e-8);
                assert_abs_diff_eq!(hc.values()[j], (kf * s).sin(), epsilon = 1e-12);
                assert_abs_diff_eq!(hs.values()[j], -(kf * s).cos(), epsilon = 1e-12);
            }
        }
        assert!(hilbert(&G::constant(n, 3.0).unwrap()).sup_norm() < 1e-15);
    }

    #[test]
    fn lambda_is_the_defining_multiplier() {
        let n = 64;
        for k in 1..7 {
            let kf = k as f64;
            let f = sample(n, |s| (kf * s).cos());
            let l = lambda_pow(&f, 1.0).unwrap();
            assert!(max_diff(&l, &(&f * kf)) < 1e-12);
        }
    }

    #[test]
    fn lambda_pow_argument_errors() {
        let f = sample(16, |s| 1.0 + s.cos());
        assert!(matches!(lambda_pow(&f, -0.5), Err(Error::NonZeroMean { .. })));
        assert!(matches!(lambda_pow(&f, -1.5), Err(Error::InvalidArgument(_))));
        let g = sample(16, |s| (2.0 * s).cos());
        let inv = lambda_pow(&g, -1.0).unwrap();
        assert!(max_diff(&inv, &(&g * 0.5)) < 1e-14);
    }

    #[test]
    fn sobolev_norms_of_a_mode() {
        let n = 64;
        for k in 1..5 {
            let kf = k as f64;
            let f = sample(n, |s| (kf * s).cos());
            for s in [0.0, 0.5, 1.0, 1.5] {
                let got = sobolev_norm_sq(&f, s, SobolevKind::Homogeneous);
                assert_abs_diff_eq!(got, PI * kf.powf(2.0 * s), epsilon = 1e-11);
            }
        }
        let c = G::constant(n, 0.7).unwrap();
        assert_eq!(sobolev_norm(&c, 1.5, SobolevKind::Homogeneous), 0.0);
        assert_abs_diff_eq!(
            sobolev_norm_sq(&c, 1.5, SobolevKind::Inhomogeneous),
            2.0 * PI * 0.49,
            epsilon = 1e-13
        );
    }

    #[test]
    fn refine_is_exact_on_band_limited_input() {
        let coarse = sample(16, |s| (2.0 * s).cos());
        let fine = refine(&coarse, 4).unwrap();
        assert!(max_diff(&fine, &sample(64, |s| (2.0 * s).cos())) < 1e-13);
        let c = refine(&G::constant(8, -1.25).unwrap(), 8).unwrap();
        assert!(max_diff(&c, &G::constant(64, -1.25).unwrap()) < 1e-15);
        assert!(refine(&coarse, 3).is_err());
    }

    #[test]
    fn refined_maximum_dominates_coarse_maximum() {
        for n in [8, 16, 32] {
            let f = sample(n, |s| s.sin().exp());
            let fine = refine(&f, 4).unwrap();
            assert!(fine.argmax().1 >= f.argmax().1);
            // Brute force: the refined grid contains every coarse node.
            for (j, &v) in f.values().iter().enumerate() {
                assert_abs_diff_eq!(fine.values()[4 * j], v, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn half_shift_samples_between_nodes() {
        let n = 32;
        let f = sample(n, |s| (3.0 * s).sin() + 0.5 * s.cos());
        let shifted = half_shift(&f);
        for (j, &v) in shifted.values().iter().enumerate() {
            let s = grid_node::<f64>(n, j) + PI / n as f64;
            assert_abs_diff_eq!(v, (3.0 * s).sin() + 0.5 * s.cos(), epsilon = 1e-13);
        }
    }

    #[test]
    fn evaluate_reproduces_samples_and_interpolates() {
        let n = 16;
        let f = sample(n, |s| (2.0 * s).cos() - 0.3 * (5.0 * s).sin() + 0.25);
        let c = dft(&f);
        for (j, &v) in f.values().iter().enumerate() {
            assert_abs_diff_eq!(c.evaluate(grid_node(n, j)), v, epsilon = 1e-13);
        }
        let x = 0.123;
        assert_abs_diff_eq!(
            c.evaluate(x),
            (2.0 * x).cos() - 0.3 * (5.0 * x).sin() + 0.25,
            epsilon = 1e-13
        );
    }

    #[test]
    fn band_resolution_guard() {
        let smooth = sample(64, |s| s.cos().exp());
        assert!(band_energy_fraction(&smooth) < 1e-12);
        assert!(warn_if_unresolved(&smooth, "test"));
        let rough = sample(16, |s| (7.0 * s).cos());
        assert!(!warn_if_unresolved(&rough, "test"));
    }

    #[test]
    fn generic_over_f32() {
        let f = PeriodicGridFunction::<f32>::from_fn(32, |s| (2.0 * s).cos()).unwrap();
        let l = lambda(&f);
        let expected = &f * 2.0f32;
        assert!((&l - &expected).sup_norm() < 1e-5);
        let hh = hilbert(&hilbert(&f));
        assert!((&hh + &f).sup_norm() < 1e-5);
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(values in prop::collection::vec(-1.0..1.0f64, 32)) {
            let f = G::new(values).unwrap();
            prop_assert!(max_diff(&idft(&dft(&f)), &f) < 1e-13);
        }

        #[test]
        fn coefficients_are_hermitian(values in prop::collection::vec(-1.0..1.0f64, 16)) {
            let c = dft(&G::new(values).unwrap());
            for m in 1..8 {
                let (a, b) = (c.mode(m), c.mode(-m));
                prop_assert!((a.re - b.re).abs() < 1e-14 && (a.im + b.im).abs() < 1e-14);
            }
        }

        #[test]
        fn hilbert_squared_is_minus_identity_off_the_mean((mean, cs) in coeffs_strategy()) {
            let f = band_limited(32, mean, &cs);
            let hh = hilbert(&hilbert(&f));
            let expected = f.map(|v| -(v - mean));
            prop_assert!(max_diff(&hh, &expected) < 1e-12);
        }

        #[test]
        fn lambda_equals_hilbert_of_derivative((mean, cs) in coeffs_strategy()) {
            let f = band_limited(32, mean, &cs);
            let a = lambda_pow(&f, 1.0).unwrap();
            let b = hilbert(&derivative(&f, 1));
            prop_assert!(max_diff(&a, &b) < 1e-12);
        }

        #[test]
        fn half_powers_compose((_, cs) in coeffs_strategy()) {
            let f = band_limited(32, 0.0, &cs);
            let half = lambda_pow(&lambda_pow(&f, 0.5).unwrap(), 0.5).unwrap();
            prop_assert!(max_diff(&half, &lambda(&f)) < 1e-12);
            let h1 = sobolev_norm(&f, 1.0, SobolevKind::Homogeneous);
            let d = derivative(&f, 1).l2_norm_sq().sqrt();
            prop_assert!((h1 - d).abs() < 1e-12);
        }

        #[test]
        fn parseval(values in prop::collection::vec(-1.0..1.0f64, 64)) {
            let f = G::new(values).unwrap();
            let lhs = f.l2_norm_sq();
            let rhs = sobolev_norm_sq(&f, 0.0, SobolevKind::Inhomogeneous);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn refine_preserves_coefficients((mean, cs) in coeffs_strategy()) {
            let f = band_limited(32, mean, &cs);
            let (c, cf) = (dft(&f), dft(&refine(&f, 4).unwrap()));
            for m in -15..16 {
                prop_assert!((c.mode(m) - cf.mode(m)).norm() < 1e-14);
            }
            for m in 16..64 {
                prop_assert!(cf.mode(m).norm() < 1e-14 && cf.mode(-m).norm() < 1e-14);
            }
        }
    }
}
