//! Right-hand side of the radial (normal-only) Peskin model.
//!
//! With `r = 1 + h(s)`, `θ = h(s) - h(s-α)` and `ρ = r - θ = 1 + h(s-α)`,
//! the curve `X = M + (1 + h) γ` evolves by
//!
//! ```text
//! ∂_t h + γ·Ṁ = J1 + J2 + J3,     Ṁ = (1/4)(1/2π) ∫ h (cos s, sin s) ds,
//! ```
//!
//! where every `J` is an integral over the offset `α` with kernel denominator
//! `D = 4 r ρ sin²(α/2) + θ² = |X(s) - X(s-α)|²`. The log singularity of
//! `J1` is split as `log D = log(4 sin²(α/2)) + log(r ρ + θ²/(4 sin²(α/2)))`;
//! the first piece goes through the log-split rule, the second is smooth.
//! `J2`, `J3` and the derivative terms have at most odd `1/α` poles, which the
//! symmetric offset nodes resolve as principal values.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;
use crate::real::Real;
use crate::spectral::{derivative, grid_node, half_shift, lambda, PeriodicGridFunction};

/// Smallest admissible kernel denominator before the geometry is declared degenerate.
pub const MIN_DENOMINATOR: f64 = 1e-14;

type Grid<R> = PeriodicGridFunction<R>;

/// Radial perturbation `h`, drift point `M` and time of `X = M + (1 + h) γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialState<R> {
    pub h: Grid<R>,
    pub m: [R; 2],
    pub t: R,
}

impl<R: Real> RadialState<R> {
    /// Rejects states whose curve is not a graph over the unit circle.
    pub fn new(h: Grid<R>, m: [R; 2], t: R) -> Result<Self> {
        let (i, lowest) = h.argmin();
        if R::one() + lowest <= R::zero() {
            return Err(Error::Geometry {
                s: grid_node::<f64>(h.n_points(), i),
                alpha: 0.0,
                reason: "1 + h must stay positive".into(),
            });
        }
        Ok(Self { h, m, t })
    }

    pub fn initial(h: Grid<R>) -> Result<Self> {
        Self::new(h, [R::zero(); 2], R::zero())
    }
}

/// The three integral terms of the scalar equation.
#[derive(Debug, Clone, PartialEq)]
pub struct JTerms<R> {
    pub j1: Grid<R>,
    pub j2: Grid<R>,
    pub j3: Grid<R>,
}

impl<R: Real> JTerms<R> {
    pub fn sum(&self) -> Grid<R> {
        &(&self.j1 + &self.j2) + &self.j3
    }
}

/// `𝒥_1 … 𝒥_7` of the evolution equation for `h'`:
/// `∂_t h' + γ'·Ṁ = Σ 𝒥_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeTerms<R> {
    pub terms: [Grid<R>; 7],
}

impl<R: Real> DerivativeTerms<R> {
    pub fn sum(&self) -> Grid<R> {
        let mut acc = self.terms[0].clone();
        for t in &self.terms[1..] {
            acc = &acc + t;
        }
        acc
    }
}

/// Values of `h`, `h'`, `h''` at `s_i - α_j`, which all land on the
/// half-shifted grid when the rule has as many nodes as the grid has points.
struct ShiftedSamples<R> {
    h: Vec<R>,
    hp: Vec<R>,
    hpp: Vec<R>,
    n: usize,
}

impl<R: Real> ShiftedSamples<R> {
    fn new(h: &Grid<R>, hp: &Grid<R>, hpp: &Grid<R>) -> Self {
        Self {
            h: half_shift(h).into_values(),
            hp: half_shift(hp).into_values(),
            hpp: half_shift(hpp).into_values(),
            n: h.n_points(),
        }
    }

    /// Half-shifted index of `s_i - α_j`.
    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        (i + self.n + self.n / 2 - 1 - j) % self.n
    }
}

fn check_rule<R: Real>(h: &Grid<R>, rule: &QuadratureRule<R>) -> Result<()> {
    if rule.n_nodes() != h.n_points() {
        return Err(Error::LengthMismatch {
            expected: h.n_points(),
            actual: rule.n_nodes(),
        });
    }
    Ok(())
}

fn check_graph<R: Real>(h: &Grid<R>, shifted: &ShiftedSamples<R>) -> Result<()> {
    let lowest = h
        .values()
        .iter()
        .chain(&shifted.h)
        .fold(R::infinity(), |m, &v| m.min(v));
    if R::one() + lowest <= R::zero() {
        return Err(Error::Geometry {
            s: f64::NAN,
            alpha: f64::NAN,
            reason: format!(
                "curve crosses the origin: 1 + min h = {}",
                (R::one() + lowest).to_f64().unwrap_or(f64::NAN)
            ),
        });
    }
    Ok(())
}

fn degenerate<R: Real>(n: usize, i: usize, alpha: R, d: R) -> Error {
    Error::Geometry {
        s: grid_node::<f64>(n, i),
        alpha: alpha.to_f64().unwrap_or(f64::NAN),
        reason: format!(
            "kernel denominator {:e} below {MIN_DENOMINATOR:e}",
            d.to_f64().unwrap_or(f64::NAN)
        ),
    }
}

/// Auxiliary fields at one target point `s_i`, sampled at every rule node.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxFields<R> {
    /// `r = 1 + h(s)`.
    pub r: R,
    /// `r' = h'(s)`.
    pub r_prime: R,
    /// `θ(s, s-α) = h(s) - h(s-α)`.
    pub theta: Vec<R>,
    /// `η(s, s-α, α) = h(s) - h(s-α) cos α`.
    pub eta: Vec<R>,
    /// `∂_α θ = h'(s-α)`.
    pub theta_alpha: Vec<R>,
    /// `h''(s-α)`.
    pub shifted_second: Vec<R>,
}

impl<R: Real> AuxFields<R> {
    pub fn at(h: &Grid<R>, rule: &QuadratureRule<R>, target: usize) -> Result<Self> {
        check_rule(h, rule)?;
        let hp = derivative(h, 1);
        let hpp = derivative(h, 2);
        let shifted = ShiftedSamples::new(h, &hp, &hpp);
        Ok(Self::from_shifted(h, &hp, &shifted, rule, target))
    }

    fn from_shifted(
        h: &Grid<R>,
        hp: &Grid<R>,
        shifted: &ShiftedSamples<R>,
        rule: &QuadratureRule<R>,
        target: usize,
    ) -> Self {
        let hs = h.values()[target];
        let n = h.n_points();
        let (mut theta, mut eta, mut theta_alpha, mut second) = (
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        );
        for (j, &ca) in rule.cos_nodes().iter().enumerate() {
            let m = shifted.index(target, j);
            let shifted_h = shifted.h[m];
            theta.push(hs - shifted_h);
            eta.push(hs - shifted_h * ca);
            theta_alpha.push(shifted.hp[m]);
            second.push(shifted.hpp[m]);
        }
        Self {
            r: R::one() + hs,
            r_prime: hp.values()[target],
            theta,
            eta,
            theta_alpha,
            shifted_second: second,
        }
    }
}

/// Evaluates `J1`, `J2`, `J3` at every grid point.
pub fn j_terms<R: Real>(h: &Grid<R>, rule: &QuadratureRule<R>) -> Result<JTerms<R>> {
    check_rule(h, rule)?;
    let n = h.n_points();
    let hp = derivative(h, 1);
    let hpp = derivative(h, 2);
    let shifted = ShiftedSamples::new(h, &hp, &hpp);
    check_graph(h, &shifted)?;

    let two = R::lit(2.0);
    let four = R::lit(4.0);
    let min_d = R::lit(MIN_DENOMINATOR);
    let w = rule.weight();
    let c1 = -R::one() / (R::lit(8.0) * R::PI());
    let c2 = w / (four * R::PI());
    let c3 = w / (two * R::PI());

    let rows: Vec<(R, R, R)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let r = R::one() + h.values()[i];
            let (mut log_part, mut smooth_part, mut k2, mut k3) =
                (R::zero(), R::zero(), R::zero(), R::zero());
            for j in 0..n {
                let m = shifted.index(i, j);
                let rho = R::one() + shifted.h[m];
                let (rho_p, rho_pp) = (shifted.hp[m], shifted.hpp[m]);
                let theta = r - rho;
                let (s2, ca, sa) = (rule.sin_half_sq()[j], rule.cos_nodes()[j], rule.sin_nodes()[j]);
                let d = four * r * rho * s2 + theta * theta;
                if d < min_d {
                    return Err(degenerate(n, i, rule.nodes()[j], d));
                }
                // ∂²_α[(r - θ) cos α] = (h''(s-α) - ρ) cos α + 2 h'(s-α) sin α.
                let g = (rho_pp - rho) * ca + two * rho_p * sa;
                log_part += rule.log_weights()[j] * g;
                smooth_part += (r * rho + theta * theta / (four * s2)).ln() * g;
                let a = two * r * s2 + theta * ca;
                // ∂²_α θ + (r - θ) = ρ - h''(s-α).
                k2 += a * (two * r * s2 - theta) / d * (rho - rho_pp);
                k3 += a * sa / d * rho_p;
            }
            let j1 = c1 * (two * log_part + w * smooth_part);
            Ok((j1, c2 * k2, c3 * r * k3))
        })
        .collect::<Result<_>>()?;

    Ok(split_rows(rows))
}

fn split_rows<R: Real>(rows: Vec<(R, R, R)>) -> JTerms<R> {
    let (mut j1, mut j2, mut j3) = (
        Vec::with_capacity(rows.len()),
        Vec::with_capacity(rows.len()),
        Vec::with_capacity(rows.len()),
    );
    for (a, b, c) in rows {
        j1.push(a);
        j2.push(b);
        j3.push(c);
    }
    JTerms {
        j1: Grid::from_raw(j1),
        j2: Grid::from_raw(j2),
        j3: Grid::from_raw(j3),
    }
}

/// The same three terms written directly in `h`, with kernel factors
/// `[r - ρ cos α][r cos α - ρ]` and `(h''(s-α) - 1 - h(s-α))`.
///
/// Against [`j_terms`] this differs by the double sign flip
/// `r cos α - ρ = -(2 r sin²(α/2) - θ)`, `h''(s-α) - ρ = -(∂²_α θ + ρ)`,
/// and by forming the denominator as `r² + ρ² - 2 r ρ cos α`.
pub fn j_terms_expanded<R: Real>(h: &Grid<R>, rule: &QuadratureRule<R>) -> Result<JTerms<R>> {
    check_rule(h, rule)?;
    let n = h.n_points();
    let hp = derivative(h, 1);
    let hpp = derivative(h, 2);
    let shifted = ShiftedSamples::new(h, &hp, &hpp);
    check_graph(h, &shifted)?;

    let two = R::lit(2.0);
    let four = R::lit(4.0);
    let w = rule.weight();
    let rows: Vec<(R, R, R)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let r = R::one() + h.values()[i];
            let (mut j1, mut j2, mut j3) = (R::zero(), R::zero(), R::zero());
            for j in 0..n {
                let m = shifted.index(i, j);
                let rho = R::one() + shifted.h[m];
                let (ca, sa) = (rule.cos_nodes()[j], rule.sin_nodes()[j]);
                let s2 = rule.sin_half_sq()[j];
                let d = r * r + rho * rho - two * r * rho * ca;
                if d < R::lit(MIN_DENOMINATOR) {
                    return Err(degenerate(n, i, rule.nodes()[j], d));
                }
                let bracket = shifted.hpp[m] - R::one() - shifted.h[m];
                let second = bracket * ca + two * shifted.hp[m] * sa;
                j1 += rule.log_weights()[j] * two * second
                    + w * (d / (four * s2)).ln() * second;
                j2 += w * (r - rho * ca) * (r * ca - rho) / d * bracket;
                j3 += w * (r - rho * ca) * sa / d * shifted.hp[m];
            }
            let j1 = -j1 / (R::lit(8.0) * R::PI());
            Ok((j1, j2 / (four * R::PI()), r * j3 / (two * R::PI())))
        })
        .collect::<Result<_>>()?;
    Ok(split_rows(rows))
}

/// `dM/dt = (1/4)(1/2π) ∫ h (cos s, sin s) ds` by the trapezoid rule.
pub fn m_dot<R: Real>(h: &Grid<R>) -> [R; 2] {
    let quarter = R::lit(0.25);
    let n = R::from_usize_lossy(h.n_points());
    let (mut cx, mut cy) = (R::zero(), R::zero());
    for (s, &v) in h.nodes().into_iter().zip(h.values()) {
        let (sin, cos) = s.sin_cos();
        cx += v * cos;
        cy += v * sin;
    }
    [quarter * cx / n, quarter * cy / n]
}

/// `dM/dt` from the first Fourier coefficient: `(1/4)(Re ĥ(1), -Im ĥ(1))`.
pub fn m_dot_spectral<R: Real>(h: &Grid<R>) -> [R; 2] {
    let c1 = crate::spectral::dft(h).mode(1);
    let quarter = R::lit(0.25);
    [quarter * c1.re, -quarter * c1.im]
}

/// `s ↦ γ(s)·Ṁ`, equal to a quarter of the projection of `h` onto `{cos, sin}` halved.
pub fn gamma_dot_mdot<R: Real>(h: &Grid<R>) -> Grid<R> {
    let [mx, my] = m_dot(h);
    h.map_with_node(|s, _| mx * s.cos() + my * s.sin())
}

/// `s ↦ γ'(s)·Ṁ`.
pub fn gamma_prime_dot_mdot<R: Real>(h: &Grid<R>) -> Grid<R> {
    let [mx, my] = m_dot(h);
    h.map_with_node(|s, _| -mx * s.sin() + my * s.cos())
}

/// `∂_t h = J1 + J2 + J3 - γ·Ṁ`.
pub fn rhs<R: Real>(h: &Grid<R>, rule: &QuadratureRule<R>) -> Result<Grid<R>> {
    Ok(&j_terms(h, rule)?.sum() - &gamma_dot_mdot(h))
}

/// Linearization about the unit circle: `-(1/4)Λh + (1/4)(1/2π)∫ h(s-α) cos α dα`,
/// or just `-(1/4)Λh` when the drift term absorbs the convolution.
pub fn linearized_rhs<R: Real>(h: &Grid<R>, absorb_m: bool) -> Grid<R> {
    let principal = &lambda(h) * R::lit(-0.25);
    if absorb_m {
        return principal;
    }
    // (1/2π)∫ h(s-α) cos α dα keeps half of the |n| = 1 content.
    let c = crate::spectral::dft(h).mode(1);
    let eighth = R::lit(0.125);
    let convolution = h.map_with_node(|s, _| {
        let (sin, cos) = s.sin_cos();
        eighth * R::lit(2.0) * (c.re * cos - c.im * sin)
    });
    &principal + &convolution
}

/// `𝒩(h) = rhs(h) + (1/4)Λh`, so that `∂_t h + (1/4)Λh = 𝒩(h)`.
pub fn nonlinearity<R: Real>(h: &Grid<R>, rule: &QuadratureRule<R>) -> Result<Grid<R>> {
    Ok(rhs(h, rule)?.axpy(R::lit(0.25), &lambda(h)))
}

/// Evaluates `𝒥_1 … 𝒥_7` as written in the `h'` evolution equation; second
/// derivatives enter only through `ρ'' = h''(s-α)`.
pub fn derivative_decomposition<R: Real>(
    h: &Grid<R>,
    rule: &QuadratureRule<R>,
) -> Result<DerivativeTerms<R>> {
    check_rule(h, rule)?;
    let n = h.n_points();
    let hp = derivative(h, 1);
    let hpp = derivative(h, 2);
    let shifted = ShiftedSamples::new(h, &hp, &hpp);
    check_graph(h, &shifted)?;

    let two = R::lit(2.0);
    let four = R::lit(4.0);
    let w = rule.weight();
    let inv_2pi = R::one() / R::two_pi();
    let rows: Vec<[R; 7]> = (0..n)
        .into_par_iter()
        .map(|i| {
            let aux = AuxFields::from_shifted(h, &hp, &shifted, rule, i);
            let (r, rp) = (aux.r, aux.r_prime);
            let mut acc = [R::zero(); 7];
            for j in 0..n {
                let theta = aux.theta[j];
                let rho = r - theta;
                let (rho_p, rho_pp) = (aux.theta_alpha[j], aux.shifted_second[j]);
                let (ca, sa) = (rule.cos_nodes()[j], rule.sin_nodes()[j]);
                let d = four * r * rho * rule.sin_half_sq()[j] + theta * theta;
                if d < R::lit(MIN_DENOMINATOR) {
                    return Err(degenerate(n, i, rule.nodes()[j], d));
                }
                let a = r - rho * ca;
                let b = r * ca - rho;
                // (∂_s + ∂_α) D / 2 along fixed ρ.
                let dd = r * rp - rho * rp * ca + r * rho * sa;
                let tension = rho_pp - rho;

                let n1 = r * rp + rho * rho_p - (rp * rho + r * rho_p) * ca;
                acc[0] += n1 / d * (ca * rho - sa * rho_p);
                let n2 = -r * rp + rp * rho * ca - r * rho * sa;
                acc[1] += n2 / d * (-sa * rho_p - ca * rho_pp);
                acc[2] += ((rp + rho * sa) * b + a * (rp * ca - r * sa)) / d * tension;
                acc[3] += a * b / (d * d) * dd * tension;
                acc[4] += (rp * a * sa + r * rp * sa) / d * rho_p;
                let cos2 = two * ca * ca - R::one();
                acc[5] += (r * r * ca - r * rho * cos2) / d * rho_p;
                acc[6] += r * a * sa / (d * d) * (two * r * rp + two * rho * (r * sa - rp * ca)) * rho_p;
            }
            let half = R::lit(0.5);
            Ok([
                half * inv_2pi * w * acc[0],
                -half * inv_2pi * w * acc[1],
                w * acc[2] / (four * R::PI()),
                -inv_2pi * w * acc[3],
                inv_2pi * w * acc[4],
                inv_2pi * w * acc[5],
                -inv_2pi * w * acc[6],
            ])
        })
        .collect::<Result<_>>()?;

    let terms = std::array::from_fn(|k| Grid::from_raw(rows.iter().map(|row| row[k]).collect()));
    Ok(DerivativeTerms { terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::refine;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    type G = Grid<f64>;

    fn sample(n: usize, f: impl Fn(f64) -> f64) -> G {
        G::from_fn(n, f).unwrap()
    }

    fn rule(n: usize) -> QuadratureRule<f64> {
        QuadratureRule::new(n).unwrap()
    }

    fn smooth(s: f64) -> f64 {
        0.05 * s.cos() + 0.04 * (2.0 * s + 0.3).sin() + 0.02 * (3.0 * s + 1.0).cos()
            + 0.01 * (5.0 * s).sin()
    }

    #[test]
    fn circle_terms_match_brute_force_quadrature() {
        let n = 64;
        let t = j_terms(&G::zeros(n).unwrap(), &rule(n)).unwrap();
        assert!(t.j1.values().iter().all(|v| (v + 0.25).abs() < 1e-13));
        assert!(t.j2.values().iter().all(|v| (v - 0.25).abs() < 1e-13));
        assert!(t.j3.sup_norm() < 1e-14);

        // 10^6-node midpoint sums of the circle kernels.
        let nodes = 1_000_000;
        let h = 2.0 * PI / nodes as f64;
        let (mut j1, mut j2) = (0.0, 0.0);
        for j in 0..nodes {
            let a = -PI + (j as f64 + 0.5) * h;
            let s2 = (a / 2.0).sin().powi(2);
            j1 += (4.0 * s2).ln() * (-a.cos()) * h;
            j2 += s2 * h;
        }
        assert_abs_diff_eq!(-j1 / (8.0 * PI), -0.25, epsilon = 1e-5);
        assert_abs_diff_eq!(j2 / (4.0 * PI), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn circle_is_stationary() {
        let n = 256;
        let out = rhs(&G::zeros(n).unwrap(), &rule(n)).unwrap();
        assert!(out.sup_norm() < 1e-10);
    }

    #[test]
    fn concentric_circles_are_stationary() {
        let n = 64;
        for c in [0.3, -0.2, 1.0] {
            let h = G::constant(n, c).unwrap();
            let t = j_terms(&h, &rule(n)).unwrap();
            let drift = gamma_dot_mdot(&h);
            assert!((&t.sum() - &drift).sup_norm() < 1e-12 * (1.0 + c * c));
        }
    }

    #[test]
    fn small_modes_decay_at_the_linear_rate() {
        let n = 64;
        let a = 1e-6;
        for k in 1..6 {
            let kf = k as f64;
            let h = sample(n, |s| a * (kf * s).cos());
            let out = rhs(&h, &rule(n)).unwrap();
            let expect = sample(n, |s| -a * kf / 4.0 * (kf * s).cos());
            assert!((&out - &expect).sup_norm() < 10.0 * a * a, "mode {k}");
        }
    }

    #[test]
    fn expanded_form_agrees_with_auxiliary_form() {
        for n in [32, 128] {
            let h = sample(n, smooth);
            let a = j_terms(&h, &rule(n)).unwrap();
            let b = j_terms_expanded(&h, &rule(n)).unwrap();
            assert!((&a.j1 - &b.j1).sup_norm() < 1e-10);
            assert!((&a.j2 - &b.j2).sup_norm() < 1e-10);
            assert!((&a.j3 - &b.j3).sup_norm() < 1e-10);
        }
    }

    #[test]
    fn aux_field_identities() {
        let n = 128;
        let h = sample(n, smooth);
        let q = rule(n);
        let hp_sup = refine(&derivative(&h, 1), 8).unwrap().sup_norm();
        for target in [0, 17, 64, 101] {
            let aux = AuxFields::at(&h, &q, target).unwrap();
            // Smallest offsets are the two nodes next to α = 0.
            for j in [n / 2 - 1, n / 2] {
                let alpha = q.nodes()[j].abs();
                assert!(aux.theta[j].abs() <= hp_sup * alpha * (1.0 + 1e-9));
            }
            for (j, &s2) in q.sin_half_sq().iter().enumerate() {
                let shifted_h = aux.r - 1.0 - aux.theta[j];
                assert_abs_diff_eq!(aux.eta[j], aux.theta[j] + 2.0 * shifted_h * s2, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn drift_velocity_examples() {
        let n = 64;
        assert_eq!(m_dot(&G::zeros(n).unwrap()), [0.0, 0.0]);
        let [x, y] = m_dot(&sample(n, f64::cos));
        assert_abs_diff_eq!(x, 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(y, 0.0, epsilon = 1e-15);
        let [x, y] = m_dot(&sample(n, |s| (3.0 * s).cos()));
        assert!(x.abs() < 1e-15 && y.abs() < 1e-15);
        let h = sample(n, |s| (s + 0.4).sin().exp());
        let (a, b) = (m_dot(&h), m_dot_spectral(&h));
        assert_abs_diff_eq!(a[0], b[0], epsilon = 1e-12);
        assert_abs_diff_eq!(a[1], b[1], epsilon = 1e-12);
    }

    #[test]
    fn drift_projection_examples() {
        let n = 64;
        let g = gamma_dot_mdot(&sample(n, f64::cos));
        assert!((&g - &sample(n, |s| s.cos() / 8.0)).sup_norm() < 1e-15);
        assert!(gamma_dot_mdot(&sample(n, |s| (2.0 * s).cos())).sup_norm() < 1e-15);
        assert!(gamma_dot_mdot(&G::constant(n, 1.0).unwrap()).sup_norm() < 1e-15);
    }

    #[test]
    fn linearized_examples() {
        let n = 32;
        let c1 = sample(n, f64::cos);
        let free = linearized_rhs(&c1, false);
        assert!((&free - &sample(n, |s| -s.cos() / 8.0)).sup_norm() < 1e-14);
        let absorbed = linearized_rhs(&c1, true);
        assert!((&absorbed - &sample(n, |s| -s.cos() / 4.0)).sup_norm() < 1e-14);
        let c5 = sample(n, |s| (5.0 * s).cos());
        let expect = sample(n, |s| -1.25 * (5.0 * s).cos());
        for absorb in [false, true] {
            assert!((&linearized_rhs(&c5, absorb) - &expect).sup_norm() < 1e-13);
        }
        // The drift term exactly cancels the convolution.
        let h = sample(n, smooth);
        let diff = &linearized_rhs(&h, false) - &gamma_dot_mdot(&h);
        assert!((&diff - &linearized_rhs(&h, true)).sup_norm() < 1e-15);
    }

    #[test]
    fn nonlinearity_is_quadratically_small() {
        let n = 64;
        let q = rule(n);
        assert!(nonlinearity(&G::zeros(n).unwrap(), &q).unwrap().sup_norm() < 1e-15);
        let ratio = |a: f64| {
            let h = sample(n, |s| a * (2.0 * s).cos());
            nonlinearity(&h, &q).unwrap().sup_norm() / (a * a)
        };
        let (k3, k4) = (ratio(1e-3), ratio(1e-4));
        assert!(k3 < 10.0 && k4 < 10.0);
        assert!((k3 - k4).abs() < 0.05 * k4, "K(1e-3) = {k3}, K(1e-4) = {k4}");

        let h = sample(n, smooth);
        let direct = nonlinearity(&h, &q).unwrap();
        let composed = rhs(&h, &q).unwrap().axpy(0.25, &crate::spectral::lambda_pow(&h, 1.0).unwrap());
        assert!((&direct - &composed).sup_norm() < 1e-12);
    }

    #[test]
    fn rhs_converges_under_grid_doubling() {
        let mut last = f64::INFINITY;
        for n in [16, 32, 64] {
            let coarse = rhs(&sample(n, smooth), &rule(n)).unwrap();
            let fine = rhs(&sample(2 * n, smooth), &rule(2 * n)).unwrap();
            let err = coarse
                .values()
                .iter()
                .enumerate()
                .map(|(j, v)| (v - fine.values()[2 * j]).abs())
                .fold(0.0, f64::max);
            assert!(err < last / 4.0 || err < 1e-13, "n = {n}: {err:e} vs {last:e}");
            last = err;
        }
    }

    #[test]
    fn derivative_terms_vanish_on_the_circle() {
        let n = 128;
        let d = derivative_decomposition(&G::zeros(n).unwrap(), &rule(n)).unwrap();
        assert!(d.sum().sup_norm() < 1e-13);
        // Terms carrying an h' prefactor vanish individually.
        for k in [1, 3, 4, 6] {
            assert!(d.terms[k].sup_norm() < 1e-13, "term {}", k + 1);
        }
    }

    #[test]
    fn derivative_terms_sum_to_the_derivative_of_the_j_sum() {
        let n = 128;
        let h = sample(n, smooth);
        let q = rule(n);
        let d = derivative_decomposition(&h, &q).unwrap().sum();
        let spectral = derivative(&j_terms(&h, &q).unwrap().sum(), 1);
        assert!((&d - &spectral).sup_norm() < 1e-12);
    }

    #[test]
    fn derivative_terms_linearize_correctly() {
        let n = 64;
        let a = 1e-6;
        let h = sample(n, |s| a * (2.0 * s).cos());
        let d = derivative_decomposition(&h, &rule(n)).unwrap().sum();
        let out = &d - &gamma_prime_dot_mdot(&h);
        let expect = sample(n, |s| a * (2.0 * s).sin());
        assert!((&out - &expect).sup_norm() < 20.0 * a * a);
    }

    #[test]
    fn geometry_guards() {
        let n = 16;
        let h = G::constant(n, -1.5).unwrap();
        assert!(matches!(rhs(&h, &rule(n)), Err(Error::Geometry { .. })));
        let ok = sample(n, |s| 0.1 * s.cos());
        assert!(matches!(rhs(&ok, &rule(32)), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn generic_over_f32() {
        let n = 32;
        let h = PeriodicGridFunction::<f32>::from_fn(n, |s| 1e-3 * (2.0 * s).cos()).unwrap();
        let q = QuadratureRule::<f32>::new(n).unwrap();
        let out = rhs(&h, &q).unwrap();
        let expect = linearized_rhs(&h, true);
        assert!((&out - &expect).sup_norm() < 1e-5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn translation_of_the_sum_matches_the_expanded_form(
            coeffs in prop::collection::vec((-0.03..0.03f64, -0.03..0.03f64), 4),
        ) {
            let n = 32;
            let h = sample(n, |s| coeffs.iter().enumerate().map(|(k, (a, b))| {
                let m = (k + 1) as f64;
                a * (m * s).cos() + b * (m * s).sin()
            }).sum());
            let q = rule(n);
            let a = j_terms(&h, &q).unwrap().sum();
            let b = j_terms_expanded(&h, &q).unwrap().sum();
            prop_assert!((&a - &b).sup_norm() < 1e-10);
        }
    }
}
