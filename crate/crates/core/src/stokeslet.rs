//! Full vector contour dynamics of an elastic string in 2D Stokes flow,
//! `∂_t X(s) = ∫ G(X(s) - X(σ)) ∂²_σ X(σ) dσ`, and its linearization about the
//! unit circle.
//!
//! This is an independent ground truth for the radial model. It integrates
//! over the grid nodes themselves (not the half-offset nodes of
//! [`crate::quadrature`]) with trigonometric product weights for
//! `log(2|sin((s-σ)/2)|)` and explicit diagonal limits for the smooth
//! remainders, so no kernel code is shared with [`crate::model`].

use rayon::prelude::*;
use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::spectral::{
    derivative, dft, grid_node, hilbert, lambda, warn_if_unresolved, PeriodicGridFunction,
};

type Grid<R> = PeriodicGridFunction<R>;

/// Curves whose discrete chord-arc constant falls below this are rejected.
pub const CHORD_ARC_THRESHOLD: f64 = 1e-6;

/// `G(z) = -(1/4π) log|z| I + (1/4π) z⊗z / |z|²`.
pub fn stokeslet<R: Real>(z: [R; 2]) -> Result<[[R; 2]; 2]> {
    let r2 = z[0] * z[0] + z[1] * z[1];
    if r2 == R::zero() || !r2.is_finite() {
        return Err(Error::InvalidArgument(
            "Stokeslet is singular at z = 0".into(),
        ));
    }
    let c = R::one() / (R::lit(4.0) * R::PI());
    let log_part = -c * R::lit(0.5) * r2.ln();
    let (a, b, d) = (c * z[0] * z[0] / r2, c * z[0] * z[1] / r2, c * z[1] * z[1] / r2);
    Ok([[log_part + a, b], [b, log_part + d]])
}

/// A closed parametrized curve `s ↦ (X1(s), X2(s))` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorCurveState<R> {
    pub x1: Grid<R>,
    pub x2: Grid<R>,
    pub t: R,
}

impl<R: Real> VectorCurveState<R> {
    pub fn new(x1: Grid<R>, x2: Grid<R>, t: R) -> Result<Self> {
        if x1.n_points() != x2.n_points() {
            return Err(Error::LengthMismatch {
                expected: x1.n_points(),
                actual: x2.n_points(),
            });
        }
        Ok(Self { x1, x2, t })
    }

    /// `X = M + (1 + h) γ` with `γ(s) = (cos s, sin s)`.
    pub fn from_radial(h: &Grid<R>, m: [R; 2], t: R) -> Self {
        let x1 = h.map_with_node(|s, v| m[0] + (R::one() + v) * s.cos());
        let x2 = h.map_with_node(|s, v| m[1] + (R::one() + v) * s.sin());
        Self { x1, x2, t }
    }

    pub fn n_points(&self) -> usize {
        self.x1.n_points()
    }

    pub fn translated(&self, c: [R; 2]) -> Self {
        Self {
            x1: self.x1.map(|v| v + c[0]),
            x2: self.x2.map(|v| v + c[1]),
            t: self.t,
        }
    }

    /// `min |X(s) - X(σ)| / |2 sin((s-σ)/2)|` over node pairs, with `|X'(s)|`
    /// on the diagonal.
    pub fn chord_arc_constant(&self) -> R {
        let n = self.n_points();
        let (x1, x2) = (self.x1.values(), self.x2.values());
        let d1 = derivative(&self.x1, 1);
        let d2 = derivative(&self.x2, 1);
        let speed = d1
            .values()
            .iter()
            .zip(d2.values())
            .fold(R::infinity(), |m, (&a, &b)| m.min(a.hypot(b)));
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut best = R::infinity();
                for j in i + 1..n {
                    let half = R::PI() * R::from_usize_lossy(j - i) / R::from_usize_lossy(n);
                    let chord = (x1[i] - x1[j]).hypot(x2[i] - x2[j]);
                    best = best.min(chord / (R::lit(2.0) * half.sin().abs()));
                }
                best
            })
            .reduce(|| speed, |a, b| a.min(b))
    }

    /// Enclosed area `(1/2) ∫ (X1 X2' - X2 X1') ds`.
    pub fn area(&self) -> R {
        let d1 = derivative(&self.x1, 1);
        let d2 = derivative(&self.x2, 1);
        let a = self.x1.zip_map(&d2, |a, b| a * b).expect("same grid");
        let b = self.x2.zip_map(&d1, |a, b| a * b).expect("same grid");
        let integrand = &a - &b;
        R::lit(0.5) * R::two_pi() * integrand.mean()
    }
}

/// On-grid product weights `K_m` with `Σ K_m g(2πm/N) = ∫ log(2|sin(t/2)|) g(t) dt`
/// for trigonometric `g` of degree at most `N/2`.
#[derive(Debug, Clone)]
pub struct LogKernelWeights<R> {
    weights: Vec<R>,
}

impl<R: Real> LogKernelWeights<R> {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        let nf = R::from_usize_lossy(n);
        let weights = (0..n)
            .map(|m| {
                let t = R::two_pi() * R::from_usize_lossy(m) / nf;
                let mut acc = R::zero();
                for k in 1..n / 2 {
                    let kf = R::from_usize_lossy(k);
                    acc += (kf * t).cos() / kf;
                }
                let nyquist = if m % 2 == 0 { R::one() } else { -R::one() };
                -(R::two_pi() / nf) * (acc + nyquist / nf)
            })
            .collect();
        Ok(Self { weights })
    }

    pub fn n_points(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[R] {
        &self.weights
    }
}

/// `∂_t X` for the curve `x`, evaluated at every node.
pub fn full_contour_rhs<R: Real>(
    x: &VectorCurveState<R>,
    kernel: &LogKernelWeights<R>,
) -> Result<(Grid<R>, Grid<R>)> {
    let n = x.n_points();
    if kernel.n_points() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: kernel.n_points(),
        });
    }
    warn_if_unresolved(&x.x1, "contour X1");
    warn_if_unresolved(&x.x2, "contour X2");
    let (p1, p2) = (derivative(&x.x1, 1), derivative(&x.x2, 1));
    let (a1, a2) = (derivative(&x.x1, 2), derivative(&x.x2, 2));
    let (x1, x2) = (x.x1.values(), x.x2.values());
    let (p1, p2, a1, a2) = (p1.values(), p2.values(), a1.values(), a2.values());

    let w = R::two_pi() / R::from_usize_lossy(n);
    let c = R::one() / (R::lit(4.0) * R::PI());
    let threshold = R::lit(CHORD_ARC_THRESHOLD);
    let half_sines: Vec<R> = (0..n)
        .map(|m| (R::PI() * R::from_usize_lossy(m) / R::from_usize_lossy(n)).sin().abs() * R::lit(2.0))
        .collect();

    let rows: Vec<[R; 2]> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut singular = [R::zero(); 2];
            let mut smooth = [R::zero(); 2];
            let mut dyadic = [R::zero(); 2];
            for m in 0..n {
                let j = (i + m) % n;
                let f = [a1[j], a2[j]];
                let (log_ratio, e) = if m == 0 {
                    let speed = p1[i].hypot(p2[i]);
                    if speed < threshold {
                        return Err(chord_arc(speed));
                    }
                    (speed.ln(), [p1[i] / speed, p2[i] / speed])
                } else {
                    let z = [x1[i] - x1[j], x2[i] - x2[j]];
                    let dist = z[0].hypot(z[1]);
                    let ratio = dist / half_sines[m];
                    if ratio < threshold {
                        return Err(chord_arc(ratio));
                    }
                    (ratio.ln(), [z[0] / dist, z[1] / dist])
                };
                let k = kernel.weights()[m];
                let proj = e[0] * f[0] + e[1] * f[1];
                for d in 0..2 {
                    singular[d] += k * f[d];
                    smooth[d] += log_ratio * f[d];
                    dyadic[d] += e[d] * proj;
                }
            }
            Ok(std::array::from_fn(|d| {
                c * (w * (dyadic[d] - smooth[d]) - singular[d])
            }))
        })
        .collect::<Result<_>>()?;

    Ok((
        Grid::from_raw(rows.iter().map(|r| r[0]).collect()),
        Grid::from_raw(rows.iter().map(|r| r[1]).collect()),
    ))
}

fn chord_arc<R: Real>(value: R) -> Error {
    Error::ChordArc {
        constant: value.to_f64().unwrap_or(f64::NAN),
        threshold: CHORD_ARC_THRESHOLD,
    }
}

/// `γ(s)·V(s)` for a vector field sampled on the grid.
pub fn normal_component<R: Real>(v: &(Grid<R>, Grid<R>)) -> Grid<R> {
    let n = v.0.n_points();
    Grid::from_raw(
        (0..n)
            .map(|j| {
                let (sin, cos) = grid_node::<R>(n, j).sin_cos();
                v.0.values()[j] * cos + v.1.values()[j] * sin
            })
            .collect(),
    )
}

/// `(-(1/4)ΛY1 - (1/4)ℋY2, -(1/4)ΛY2 + (1/4)ℋY1)`.
pub fn linear_vector_rhs<R: Real>(y1: &Grid<R>, y2: &Grid<R>) -> Result<(Grid<R>, Grid<R>)> {
    if y1.n_points() != y2.n_points() {
        return Err(Error::LengthMismatch {
            expected: y1.n_points(),
            actual: y2.n_points(),
        });
    }
    let q = R::lit(0.25);
    let out1 = (&lambda(y1) * (-q)).axpy(-q, &hilbert(y2));
    let out2 = (&lambda(y2) * (-q)).axpy(q, &hilbert(y1));
    Ok((out1, out2))
}

/// Eigenvalues of the linear vector system restricted to one Fourier mode.
#[derive(Debug, Clone, PartialEq)]
pub struct KleinGordonReport {
    pub mode: i64,
    /// Complex `2×2` symbol read off [`linear_vector_rhs`].
    pub symbol: [[Complex<f64>; 2]; 2],
    pub eigenvalues: [Complex<f64>; 2],
    /// `|λ² + (|n|/2) λ + (n² - 1)/16|` for each eigenvalue.
    pub residuals: [f64; 2],
}

impl KleinGordonReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals[0].max(self.residuals[1])
    }
}

fn probe_size(n: i64) -> usize {
    (4 * n.unsigned_abs() as usize).next_power_of_two().max(16)
}

/// Reads the mode-`n` symbol of [`linear_vector_rhs`] and checks its
/// eigenvalues against `λ² + (|n|/2)λ + (n² - 1)/16 = 0`.
pub fn klein_gordon_residual(n: i64) -> Result<KleinGordonReport> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "the mean mode decouples from the linear vector system".into(),
        ));
    }
    let size = probe_size(n);
    let nf = n as f64;
    let probe = Grid::<f64>::from_fn(size, |s| (nf * s).cos())?;
    let zero = Grid::<f64>::zeros(size)?;
    let input = dft(&probe).mode(n);
    let column = |y1: &Grid<f64>, y2: &Grid<f64>| -> Result<[Complex<f64>; 2]> {
        let (o1, o2) = linear_vector_rhs(y1, y2)?;
        Ok([dft(&o1).mode(n) / input, dft(&o2).mode(n) / input])
    };
    let c0 = column(&probe, &zero)?;
    let c1 = column(&zero, &probe)?;
    let symbol = [[c0[0], c1[0]], [c0[1], c1[1]]];

    let tr = symbol[0][0] + symbol[1][1];
    let det = symbol[0][0] * symbol[1][1] - symbol[0][1] * symbol[1][0];
    let disc = (tr * tr * 0.25 - det).sqrt();
    let eigenvalues = [tr * 0.5 + disc, tr * 0.5 - disc];
    let b = nf.abs() / 2.0;
    let c = (nf * nf - 1.0) / 16.0;
    let residuals = eigenvalues.map(|l| (l * l + l * b + c).norm());
    Ok(KleinGordonReport {
        mode: n,
        symbol,
        eigenvalues,
        residuals,
    })
}

/// Real `4×4` matrix of [`linear_vector_rhs`] on the basis
/// `(cos ns, 0), (sin ns, 0), (0, cos ns), (0, sin ns)`.
pub fn real_mode_matrix(n: i64) -> Result<[[f64; 4]; 4]> {
    if n <= 0 {
        return Err(Error::InvalidArgument(format!("mode must be positive, got {n}")));
    }
    let size = probe_size(n);
    let nf = n as f64;
    let cos = Grid::<f64>::from_fn(size, |s| (nf * s).cos())?;
    let sin = Grid::<f64>::from_fn(size, |s| (nf * s).sin())?;
    let zero = Grid::<f64>::zeros(size)?;
    let inputs = [(&cos, &zero), (&sin, &zero), (&zero, &cos), (&zero, &sin)];
    let norm = cos.l2_norm_sq();
    let mut m = [[0.0; 4]; 4];
    for (col, (y1, y2)) in inputs.iter().enumerate() {
        let (o1, o2) = linear_vector_rhs(y1, y2)?;
        let coords = [o1.l2_inner(&cos), o1.l2_inner(&sin), o2.l2_inner(&cos), o2.l2_inner(&sin)];
        for (row, v) in coords.iter().enumerate() {
            m[row][col] = v / norm;
        }
    }
    Ok(m)
}

/// One explicit RK4 step of the full vector dynamics (demo only).
pub fn vector_rk4_step<R: Real>(
    x: &VectorCurveState<R>,
    kernel: &LogKernelWeights<R>,
    dt: R,
) -> Result<VectorCurveState<R>> {
    let stage = |base: &VectorCurveState<R>, k: &(Grid<R>, Grid<R>), c: R| VectorCurveState {
        x1: base.x1.axpy(c, &k.0),
        x2: base.x2.axpy(c, &k.1),
        t: base.t + c,
    };
    let half = R::lit(0.5) * dt;
    let k1 = full_contour_rhs(x, kernel)?;
    let k2 = full_contour_rhs(&stage(x, &k1, half), kernel)?;
    let k3 = full_contour_rhs(&stage(x, &k2, half), kernel)?;
    let k4 = full_contour_rhs(&stage(x, &k3, dt), kernel)?;
    let sixth = dt / R::lit(6.0);
    let two = R::lit(2.0);
    let combine = |a: &Grid<R>, b: &Grid<R>, c: &Grid<R>, d: &Grid<R>, base: &Grid<R>| {
        base.axpy(sixth, a)
            .axpy(two * sixth, b)
            .axpy(two * sixth, c)
            .axpy(sixth, d)
    };
    let out = VectorCurveState {
        x1: combine(&k1.0, &k2.0, &k3.0, &k4.0, &x.x1),
        x2: combine(&k1.1, &k2.1, &k3.1, &k4.1, &x.x2),
        t: x.t + dt,
    };
    if !(out.x1.is_finite() && out.x2.is_finite()) {
        return Err(Error::Blowup {
            t: out.t.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(out)
}
