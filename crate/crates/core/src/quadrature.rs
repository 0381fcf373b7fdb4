//! Quadrature on the circle for principal-value, log-singular and
//! removable-singularity integrands.
//!
//! Nodes sit at `α_j = -π + (j + 1/2) 2π/N` and never touch `α = 0`, so
//! kernels with a removable singularity at the origin need no special casing
//! and odd kernels such as `cot(α/2)` integrate to their principal value.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::real::Real;

/// Midpoint-offset rule with precomputed node tables.
#[derive(Debug, Clone)]
pub struct QuadratureRule<R> {
    nodes: Vec<R>,
    weight: R,
    cos: Vec<R>,
    sin: Vec<R>,
    sin_half_sq: Vec<R>,
    log_weights: Vec<R>,
}

impl<R: Real> QuadratureRule<R> {
    pub fn new(n_nodes: usize) -> Result<Self> {
        if n_nodes < 2 || n_nodes % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "quadrature needs an even node count >= 2, got {n_nodes}"
            )));
        }
        let n = R::from_usize_lossy(n_nodes);
        let h = R::two_pi() / n;
        let half = R::lit(0.5);
        let nodes: Vec<R> = (0..n_nodes)
            .map(|j| -R::PI() + (R::from_usize_lossy(j) + half) * h)
            .collect();
        let cos = nodes.iter().map(|a| a.cos()).collect();
        let sin = nodes.iter().map(|a| a.sin()).collect();
        let sin_half_sq = nodes
            .iter()
            .map(|&a| {
                let s = (a * half).sin();
                s * s
            })
            .collect();
        let log_weights = log_kernel_weights(&nodes, h);
        Ok(Self {
            nodes,
            weight: h,
            cos,
            sin,
            sin_half_sq,
            log_weights,
        })
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[R] {
        &self.nodes
    }

    /// The uniform weight `2π/N`.
    #[inline]
    pub fn weight(&self) -> R {
        self.weight
    }

    pub fn weights(&self) -> Vec<R> {
        vec![self.weight; self.n_nodes()]
    }

    pub fn sample(&self, f: impl Fn(R) -> R) -> Vec<R> {
        self.nodes.iter().map(|&a| f(a)).collect()
    }

    #[inline]
    pub fn cos_nodes(&self) -> &[R] {
        &self.cos
    }

    #[inline]
    pub fn sin_nodes(&self) -> &[R] {
        &self.sin
    }

    /// `sin^2(α_j / 2)`.
    #[inline]
    pub fn sin_half_sq(&self) -> &[R] {
        &self.sin_half_sq
    }

    /// Product weights `W_j` with `Σ W_j g(α_j) = ∫ log(2|sin(α/2)|) g(α) dα`
    /// for trigonometric `g` of degree below `N/2`.
    #[inline]
    pub fn log_weights(&self) -> &[R] {
        &self.log_weights
    }

    fn check(&self, samples: &[R]) -> Result<()> {
        if samples.len() != self.n_nodes() {
            return Err(Error::LengthMismatch {
                expected: self.n_nodes(),
                actual: samples.len(),
            });
        }
        Ok(())
    }

    /// Midpoint sum `Σ w_j f(α_j)`.
    pub fn integrate(&self, samples: &[R]) -> Result<R> {
        self.check(samples)?;
        Ok(self.weight * samples.iter().copied().sum::<R>())
    }

    /// `∫ log(2|sin(α/2)|) g(α) dα` from the discrete Fourier coefficients of
    /// `g` and the series `log(2|sin(α/2)|) = -Σ_{k≥1} cos(kα)/k`, truncated
    /// below `N/2`.
    pub fn log_split_integral(&self, g: &[R]) -> Result<R> {
        self.check(g)?;
        let n = self.n_nodes();
        let mut buf: Vec<Complex<R>> = g.iter().map(|&v| Complex::new(v, R::zero())).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let inv_n = R::one() / R::from_usize_lossy(n);
        let first = self.nodes[0];
        let mut acc = R::zero();
        for k in 1..n / 2 {
            let kf = R::from_usize_lossy(k);
            // FFT index k carries e^{-ik(α_j - α_0)}; restore the offset phase.
            let phase = Complex::new(R::zero(), -kf * first).exp();
            let coeff = buf[k] * phase * inv_n;
            acc += R::lit(2.0) * coeff.re / kf;
        }
        Ok(-R::PI() * acc)
    }

    /// Same functional as [`Self::log_split_integral`] through the
    /// precomputed product weights; `O(N)` per call.
    pub fn log_weighted_sum(&self, g: &[R]) -> Result<R> {
        self.check(g)?;
        Ok(self
            .log_weights
            .iter()
            .zip(g)
            .map(|(&w, &v)| w * v)
            .sum())
    }

    /// Plain midpoint rule applied to `log(2|sin(α/2)|) g(α)`; first-order
    /// accurate, kept as a cross-check.
    pub fn naive_log_integral(&self, g: &[R]) -> Result<R> {
        self.check(g)?;
        Ok(self.weight
            * self
                .sin_half_sq
                .iter()
                .zip(g)
                .map(|(&s2, &v)| (R::lit(4.0) * s2).ln() * R::lit(0.5) * v)
                .sum::<R>())
    }
}

fn log_kernel_weights<R: Real>(nodes: &[R], h: R) -> Vec<R> {
    let n = nodes.len();
    let first = nodes[0];
    let mut buf = vec![Complex::new(R::zero(), R::zero()); n];
    for (k, slot) in buf.iter_mut().enumerate().take(n / 2).skip(1) {
        let kf = R::from_usize_lossy(k);
        *slot = Complex::new(R::zero(), kf * first).exp() / kf;
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = -h;
    buf.into_iter().map(|c| scale * c.re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rule(n: usize) -> QuadratureRule<f64> {
        QuadratureRule::new(n).unwrap()
    }

    #[test]
    fn nodes_avoid_the_origin_and_weights_sum_to_two_pi() {
        for n in [2, 8, 64] {
            let q = rule(n);
            assert!(q.nodes().iter().all(|a| a.abs() > 1e-12 && (a.abs() - PI).abs() > 1e-12));
            assert_abs_diff_eq!(q.weights().iter().sum::<f64>(), 2.0 * PI, epsilon = 1e-13);
        }
        assert!(QuadratureRule::<f64>::new(7).is_err());
        assert!(QuadratureRule::<f64>::new(0).is_err());
    }

    #[test]
    fn integrate_examples() {
        let q = rule(64);
        assert_abs_diff_eq!(q.integrate(&q.sample(f64::cos)).unwrap(), 0.0, epsilon = 1e-12);
        let cot = q.sample(|a| (a / 2.0).tan().recip());
        assert_abs_diff_eq!(q.integrate(&cot).unwrap(), 0.0, epsilon = 1e-12);
        let s2 = q.sample(|a| (a / 2.0).sin().powi(2));
        assert_abs_diff_eq!(q.integrate(&s2).unwrap(), PI, epsilon = 1e-12);
        assert!(matches!(
            q.integrate(&[1.0; 3]),
            Err(Error::LengthMismatch { expected: 64, actual: 3 })
        ));
    }

    #[test]
    fn log_split_examples() {
        let n = 64;
        let q = rule(n);
        assert_abs_diff_eq!(q.log_split_integral(&q.sample(f64::cos)).unwrap(), -PI, epsilon = 1e-12);
        assert_abs_diff_eq!(q.log_split_integral(&vec![1.0; n]).unwrap(), 0.0, epsilon = 1e-12);
        for k in 1..=n / 4 {
            let kf = k as f64;
            let g = q.sample(|a| (kf * a).cos());
            assert_abs_diff_eq!(q.log_split_integral(&g).unwrap(), -PI / kf, epsilon = 1e-10);
            assert_abs_diff_eq!(q.log_weighted_sum(&g).unwrap(), -PI / kf, epsilon = 1e-10);
        }
    }

    #[test]
    fn log_weights_match_direct_cosine_sum() {
        let n = 32;
        let q = rule(n);
        let h = 2.0 * PI / n as f64;
        for (j, &a) in q.nodes().iter().enumerate() {
            let direct: f64 = -(1..n / 2).map(|k| (k as f64 * a).cos() / k as f64).sum::<f64>() * h;
            assert_abs_diff_eq!(q.log_weights()[j], direct, epsilon = 1e-13);
        }
    }

    #[test]
    fn naive_log_rule_converges_monotonically_to_the_split_rule() {
        let g = |a: f64| a.cos().exp();
        let mut last = f64::INFINITY;
        for n in [16, 32, 64, 128, 256, 512, 1024] {
            let q = rule(n);
            let samples = q.sample(g);
            let gap = (q.naive_log_integral(&samples).unwrap()
                - q.log_split_integral(&samples).unwrap())
            .abs();
            let bound = 8.0 * (n as f64).ln() / n as f64;
            assert!(gap < bound, "n = {n}: gap {gap:e} above {bound:e}");
            assert!(gap < last, "n = {n}: gap {gap:e} did not decrease from {last:e}");
            last = gap;
        }
    }

    proptest! {
        #[test]
        fn exact_for_low_degree_trig_polynomials(
            mean in -1.0..1.0f64,
            cs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..15),
        ) {
            let q = rule(32);
            let samples = q.sample(|a| {
                mean + cs.iter().enumerate().map(|(k, (c, s))| {
                    let m = (k + 1) as f64;
                    c * (m * a).cos() + s * (m * a).sin()
                }).sum::<f64>()
            });
            prop_assert!((q.integrate(&samples).unwrap() - 2.0 * PI * mean).abs() < 1e-12);
            let split = q.log_split_integral(&samples).unwrap();
            let weighted = q.log_weighted_sum(&samples).unwrap();
            let series: f64 = -cs.iter().enumerate().map(|(k, (c, _))| PI * c / (k + 1) as f64).sum::<f64>();
            prop_assert!((split - series).abs() < 1e-12);
            prop_assert!((weighted - split).abs() < 1e-12);
        }
    }
}
