//! Runtime monitors: norms and extremum locations, the `W^{1,∞}` maximum
//! principle with a fitted decay rate, the `H^{3/2}` energy inequality, the
//! weak-form residual and pointwise sign checks for `Λ`.

use crate::error::{Error, Result};
use crate::evolution::{trapezoid, Trajectory};
use crate::model::{nonlinearity, RadialState};
use crate::quadrature::QuadratureRule;
use crate::real::Real;
use crate::spectral::{
    derivative, dft, grid_node, half_shift, hilbert, lambda, refine, sobolev_norm, sobolev_norm_sq,
    PeriodicGridFunction, SobolevKind,
};

type Grid<R> = PeriodicGridFunction<R>;

/// Refinement factor for sup-norms and extremum locations.
pub const REFINEMENT: usize = 4;

/// Largest `|h0|_{W^{1,∞}}` accepted by the monitors.
pub const SMALL_DATA_BOUND: f64 = 0.05;

/// Snapshot of norms and extremum locations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub sup_h: f64,
    pub sup_hprime: f64,
    pub argmax_s0: f64,
    pub argmin_s0: f64,
    pub argmax_s1: f64,
    pub argmin_s1: f64,
    pub l2_hprime_sq: f64,
    /// `‖Λ^{1/2} h'‖²_{L²}`.
    pub hhalf_hprime_sq: f64,
    /// `‖h‖_{H^{3/2}}`.
    pub h32_norm: f64,
    pub m: [f64; 2],
    pub mean_h: f64,
}

impl DiagnosticsRecord {
    /// `sup|h| + sup|h'|`.
    pub fn w1_inf(&self) -> f64 {
        self.sup_h + self.sup_hprime
    }
}

fn f64_of<R: Real>(v: R) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Refined-grid locations of the maximum and minimum, and the sup-norm.
fn extrema<R: Real>(f: &Grid<R>) -> (f64, f64, f64) {
    let fine = refine(f, REFINEMENT).expect("refinement factor is a power of two");
    let n = fine.n_points();
    let (imax, _) = fine.argmax();
    let (imin, _) = fine.argmin();
    (grid_node(n, imax), grid_node(n, imin), f64_of(fine.sup_norm()))
}

pub fn measure<R: Real>(state: &RadialState<R>) -> DiagnosticsRecord {
    let h = &state.h;
    let hp = derivative(h, 1);
    let (argmax_s0, argmin_s0, sup_h) = extrema(h);
    let (argmax_s1, argmin_s1, sup_hprime) = extrema(&hp);
    DiagnosticsRecord {
        t: f64_of(state.t),
        sup_h,
        sup_hprime,
        argmax_s0,
        argmin_s0,
        argmax_s1,
        argmin_s1,
        l2_hprime_sq: f64_of(sobolev_norm_sq(h, R::one(), SobolevKind::Homogeneous)),
        hhalf_hprime_sq: f64_of(sobolev_norm_sq(h, R::lit(1.5), SobolevKind::Homogeneous)),
        h32_norm: f64_of(sobolev_norm(h, R::lit(1.5), SobolevKind::Inhomogeneous)),
        m: [f64_of(state.m[0]), f64_of(state.m[1])],
        mean_h: f64_of(h.mean()),
    }
}

fn check_small_data<R>(traj: &Trajectory<R>) -> Result<f64> {
    let first = traj
        .snapshots
        .first()
        .ok_or_else(|| Error::Precondition("empty trajectory".into()))?;
    let norm = first.1.w1_inf();
    if !(norm <= SMALL_DATA_BOUND) {
        return Err(Error::Precondition(format!(
            "|h0|_W1inf = {norm:.4} exceeds the small-data bound {SMALL_DATA_BOUND}"
        )));
    }
    Ok(norm)
}

/// Least-squares slope of `(x, y)` pairs.
fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Exponential decay rate of `values` over the trailing half of `times`.
pub fn fit_decay_rate(times: &[f64], values: &[f64]) -> Option<f64> {
    let start = times.len() / 2;
    let points: Vec<(f64, f64)> = times[start..]
        .iter()
        .zip(&values[start..])
        .filter(|(_, &v)| v > 0.0)
        .map(|(&t, &v)| (t, v.ln()))
        .collect();
    if points.len() + start < times.len() {
        return None;
    }
    slope(&points).map(|s| -s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxPrincipleReport {
    pub initial_norm: f64,
    pub tolerance: f64,
    /// Largest increase of `sup|h| + sup|h'|` between consecutive snapshots.
    pub max_increase: f64,
    /// `(t, increase)` for every interval exceeding the tolerance.
    pub violations: Vec<(f64, f64)>,
    /// Fitted `δ` in `sup|h'| ~ e^{-δt}`; `None` for vanishing data.
    pub delta: Option<f64>,
}

impl MaxPrincipleReport {
    pub fn monotone(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn decays(&self) -> bool {
        self.delta.is_some_and(|d| d > 0.0)
    }
}

/// Checks that `|h(t)|_{W^{1,∞}}` never increases and fits the decay of `h'`.
pub fn maximum_principle_monitor<R>(traj: &Trajectory<R>) -> Result<MaxPrincipleReport> {
    let initial_norm = check_small_data(traj)?;
    let tolerance = 1e-8 * (1.0 + initial_norm);
    let recs: Vec<&DiagnosticsRecord> = traj.records().collect();
    let mut max_increase = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    for w in recs.windows(2) {
        let inc = w[1].w1_inf() - w[0].w1_inf();
        max_increase = max_increase.max(inc);
        if inc > tolerance {
            violations.push((w[1].t, inc));
        }
    }
    let delta = if initial_norm > 1e-14 {
        let times: Vec<f64> = recs.iter().map(|r| r.t).collect();
        let sups: Vec<f64> = recs.iter().map(|r| r.sup_hprime).collect();
        fit_decay_rate(&times, &sups)
    } else {
        None
    };
    Ok(MaxPrincipleReport {
        initial_norm,
        tolerance,
        max_increase: max_increase.max(0.0),
        violations,
        delta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySample {
    pub t: f64,
    /// `d/dt ‖h'‖² + (1/4)‖Λ^{1/2}h'‖²`.
    pub lhs: f64,
    /// `|h|²_{W^{1,∞}}`.
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub samples: Vec<EnergySample>,
    /// Smallest `K` with `lhs <= K rhs` at every interior snapshot.
    pub k: Option<f64>,
    /// `∫₀ᵀ ‖h‖²_{H^{3/2}} dt`.
    pub h32_integral: f64,
}

impl EnergyReport {
    pub fn holds_with(&self, k: f64) -> bool {
        self.samples
            .iter()
            .all(|s| s.lhs <= k * s.rhs + 1e-14 * s.rhs.max(1e-30))
    }
}

/// Evaluates the `H^{3/2}` energy inequality on the recorded snapshots.
pub fn energy_monitor<R>(traj: &Trajectory<R>) -> Result<EnergyReport> {
    check_small_data(traj)?;
    let recs: Vec<&DiagnosticsRecord> = traj.records().collect();
    let samples: Vec<EnergySample> = recs
        .windows(3)
        .map(|w| {
            let ddt = (w[2].l2_hprime_sq - w[0].l2_hprime_sq) / (w[2].t - w[0].t);
            EnergySample {
                t: w[1].t,
                lhs: ddt + 0.25 * w[1].hhalf_hprime_sq,
                rhs: w[1].w1_inf().powi(2),
            }
        })
        .collect();
    let k = samples
        .iter()
        .filter(|s| s.rhs > 1e-28)
        .map(|s| s.lhs / s.rhs)
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))));
    let h32: Vec<(f64, f64)> = recs.iter().map(|r| (r.t, r.h32_norm.powi(2))).collect();
    Ok(EnergyReport {
        samples,
        k,
        h32_integral: trapezoid(&h32),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyEnergyReport {
    /// `-∫ f'' f' Λf`, spectrally.
    pub lhs: f64,
    /// `(1/4)∬ (f'(s)+f'(σ))(f'(s)-f'(σ))² / (4π sin²((s-σ)/2))`, by a double sum.
    pub double_sum: f64,
    /// `(1/2) |f'|_∞ ‖f'‖²_{Ḣ^{1/2}}`.
    pub bound: f64,
}

impl ToyEnergyReport {
    pub fn identity_gap(&self) -> f64 {
        (self.lhs - self.double_sum).abs()
    }

    pub fn bound_holds(&self) -> bool {
        self.lhs <= self.bound + 1e-10
    }
}

/// Energy identity of the toy equation `∂_t f + f'Λf + Λf = 0`.
pub fn toy_energy_check<R: Real>(f: &Grid<R>) -> ToyEnergyReport {
    let n = f.n_points();
    let g = derivative(f, 1);
    let g2 = derivative(f, 2);
    let lhs = -f64_of(g2.zip_map(&g, |a, b| a * b).expect("same grid").l2_inner(&lambda(f)));

    let gv: Vec<f64> = g.values().iter().map(|&v| f64_of(v)).collect();
    let g2v: Vec<f64> = g2.values().iter().map(|&v| f64_of(v)).collect();
    let step = std::f64::consts::TAU / n as f64;
    let mut sum = 0.0;
    for i in 0..n {
        // Diagonal limit of (g(s)-g(σ))²/(4π sin²) is g'(s)²/π.
        sum += 2.0 * gv[i] * g2v[i] * g2v[i] / std::f64::consts::PI;
        for j in 0..n {
            if j != i {
                let half = 0.5 * step * (i as f64 - j as f64);
                let d = gv[i] - gv[j];
                sum += (gv[i] + gv[j]) * d * d / (4.0 * std::f64::consts::PI * half.sin().powi(2));
            }
        }
    }
    let double_sum = 0.25 * sum * step * step;
    let sup = f64_of(refine(&g, REFINEMENT).expect("power of two").sup_norm());
    let h12 = f64_of(sobolev_norm_sq(&g, R::lit(0.5), SobolevKind::Homogeneous));
    ToyEnergyReport {
        lhs,
        double_sum,
        bound: 0.5 * sup * h12,
    }
}

/// Space-time test function `φ(t, s)` with its time derivative.
pub struct TestFunction {
    value: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    time_derivative: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl TestFunction {
    pub fn new(
        value: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        time_derivative: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Box::new(value),
            time_derivative: Box::new(time_derivative),
        }
    }

    /// `φ(t, s) = χ(t) ψ(s)`.
    pub fn separable(
        chi: impl Fn(f64) -> f64 + Send + Sync + Clone + 'static,
        chi_dot: impl Fn(f64) -> f64 + Send + Sync + 'static,
        psi: impl Fn(f64) -> f64 + Send + Sync + Clone + 'static,
    ) -> Self {
        let psi2 = psi.clone();
        Self::new(move |t, s| chi(t) * psi(s), move |t, s| chi_dot(t) * psi2(s))
    }

    pub fn zero() -> Self {
        Self::new(|_, _| 0.0, |_, _| 0.0)
    }

    pub fn value(&self, t: f64, s: f64) -> f64 {
        (self.value)(t, s)
    }

    pub fn time_derivative(&self, t: f64, s: f64) -> f64 {
        (self.time_derivative)(t, s)
    }
}

/// `|-∫φ(0)h₀ + ∫∫[-∂_tφ h + (1/4)Λφ h - 𝒩 φ]|` with the trapezoid rule over
/// snapshots. `nonlinear` supplies `𝒩` at each snapshot.
pub fn weak_residual_with<R: Real>(
    traj: &Trajectory<R>,
    phi: &TestFunction,
    nonlinear: impl Fn(&RadialState<R>) -> Result<Grid<R>>,
) -> Result<f64> {
    let (first, last) = match (traj.snapshots.first(), traj.snapshots.last()) {
        (Some(a), Some(b)) if traj.len() >= 2 => (a, b),
        _ => return Err(Error::Precondition("weak residual needs two snapshots".into())),
    };
    let n = first.0.h.n_points();
    let sample = |t: f64, f: &dyn Fn(f64, f64) -> f64| -> Result<Grid<R>> {
        Grid::from_fn(n, |s: R| R::lit(f(t, f64_of(s))))
    };
    let t_end = last.1.t;
    let end = sample(t_end, &|t, s| phi.value(t, s))?;
    if f64_of(end.sup_norm()) > 1e-12 {
        return Err(Error::Precondition(format!(
            "test function does not vanish at t = {t_end}"
        )));
    }
    let t0 = first.1.t;
    let initial = f64_of(sample(t0, &|t, s| phi.value(t, s))?.l2_inner(&first.0.h));
    let quarter = R::lit(0.25);
    let integrand = traj
        .snapshots
        .iter()
        .map(|(state, rec)| {
            let p = sample(rec.t, &|t, s| phi.value(t, s))?;
            let pt = sample(rec.t, &|t, s| phi.time_derivative(t, s))?;
            let nl = nonlinear(state)?;
            let v = -pt.l2_inner(&state.h) + quarter * lambda(&p).l2_inner(&state.h) - nl.l2_inner(&p);
            Ok((rec.t, f64_of(v)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((trapezoid(&integrand) - initial).abs())
}

/// [`weak_residual_with`] using the model nonlinearity.
pub fn weak_residual<R: Real>(traj: &Trajectory<R>, phi: &TestFunction) -> Result<f64> {
    let n = traj
        .snapshots
        .first()
        .map(|(s, _)| s.h.n_points())
        .ok_or_else(|| Error::Precondition("empty trajectory".into()))?;
    let rule = QuadratureRule::new(n)?;
    weak_residual_with(traj, phi, |s| nonlinearity(&s.h, &rule))
}

/// Sign and identity checks for `Λ` at the extrema of `f` and `f'`.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    /// `Λf'(s̄) - Λf(s̄)` at the maximum of `f'` (expected `>= 0`).
    pub a_at_max: f64,
    /// The same at the minimum of `f'` (expected `<= 0`).
    pub a_at_min: f64,
    /// `Λ_b f - ℋ_b f` at the maximum of `f'`.
    pub b_at_max: f64,
    pub b_at_min: f64,
    /// `Λf` at the maximum and minimum of the zero-mean part of `f`;
    /// `None` when `f` is constant.
    pub c_at_max: Option<f64>,
    pub c_at_min: Option<f64>,
    /// Sup error of the offset-integral form of `Λf'` on `N` and `2N` nodes.
    pub d_errors: [f64; 2],
    pub d_tolerance: f64,
}

/// Slack for the sign checks.
pub const SIGN_SLACK: f64 = 1e-10;

impl LemmaReport {
    pub fn a_pass(&self) -> bool {
        self.a_at_max >= -SIGN_SLACK && self.a_at_min <= SIGN_SLACK
    }

    pub fn b_pass(&self) -> bool {
        self.b_at_max >= -SIGN_SLACK && self.b_at_min <= SIGN_SLACK
    }

    pub fn c_pass(&self) -> bool {
        match (self.c_at_max, self.c_at_min) {
            (Some(hi), Some(lo)) => hi > 0.0 && lo < 0.0,
            _ => true,
        }
    }

    pub fn d_pass(&self) -> bool {
        let [coarse, fine] = self.d_errors;
        coarse <= self.d_tolerance && (fine < coarse || coarse < 1e-12)
    }

    pub fn all_pass(&self) -> bool {
        self.a_pass() && self.b_pass() && self.c_pass() && self.d_pass()
    }
}

fn point_value<R: Real>(f: &Grid<R>, s: f64) -> f64 {
    f64_of(dft(f).evaluate(R::lit(s)))
}

/// `(1/2π) Σ w b(α) (1 + sin α)/(2 sin²(α/2)) (f'(s) - f'(s-α))` on `4N` offset nodes.
fn weighted_difference<R: Real>(fp: &Grid<R>, b: &Grid<R>, s: f64) -> Result<f64> {
    let rule = QuadratureRule::<f64>::new(4 * fp.n_points().max(b.n_points()))?;
    let cf = dft(fp);
    let cb = dft(b);
    let at = f64_of(cf.evaluate(R::lit(s)));
    let mut acc = 0.0;
    for (j, &a) in rule.nodes().iter().enumerate() {
        let weight = f64_of(cb.evaluate(R::lit(a))).max(0.0);
        let kernel = (1.0 + rule.sin_nodes()[j]) / (2.0 * rule.sin_half_sq()[j]);
        acc += weight * kernel * (at - f64_of(cf.evaluate(R::lit(s - a))));
    }
    Ok(acc * rule.weight() / std::f64::consts::TAU)
}

/// `Λf'` from `f'(s)/2 + (1/2π)∫ [f'(s)α - (f(s) - f(s-α))] cos(α/2)/(2 sin³(α/2)) dα`
/// over `α ∈ (-π, π)` on the offset nodes of an `N`-point rule.
///
/// Dropping `f'(s)/2` gives the form obtained by integrating by parts
/// without the boundary contribution at `α = ±π`.
pub fn lambda_derivative_offset_form<R: Real>(f: &Grid<R>, with_boundary_term: bool) -> Result<Grid<R>> {
    let n = f.n_points();
    let rule = QuadratureRule::<R>::new(n)?;
    let fp = derivative(f, 1);
    let shifted = half_shift(f);
    let half = R::lit(0.5);
    let w = rule.weight() / R::two_pi();
    let values = (0..n)
        .map(|i| {
            let (fs, fps) = (f.values()[i], fp.values()[i]);
            let mut acc = R::zero();
            for (j, &a) in rule.nodes().iter().enumerate() {
                let m = (i + n + n / 2 - 1 - j) % n;
                let sh = (a * half).sin();
                acc += (fps * a - (fs - shifted.values()[m])) * (a * half).cos() / (R::lit(2.0) * sh * sh * sh);
            }
            let boundary = if with_boundary_term { half * fps } else { R::zero() };
            boundary + w * acc
        })
        .collect();
    Grid::new(values)
}

/// Runs the four pointwise checks on `f` with weight `b >= 0`.
pub fn lemma_checks<R: Real>(f: &Grid<R>, b: &Grid<R>) -> Result<LemmaReport> {
    if b.values().iter().any(|&v| v < R::zero()) {
        return Err(Error::InvalidArgument("weight b must be nonnegative".into()));
    }
    let fp = derivative(f, 1);
    let (s_max, s_min, _) = extrema(&fp);
    let gap = &lambda(&fp) - &hilbert(&fp);
    let a_at_max = point_value(&gap, s_max);
    let a_at_min = point_value(&gap, s_min);
    let b_at_max = weighted_difference(&fp, b, s_max)?;
    let b_at_min = weighted_difference(&fp, b, s_min)?;

    let centered = f.map(|v| v - f.mean());
    let scale = R::one() + f.sup_norm();
    let (c_at_max, c_at_min) = if centered.sup_norm() > R::lit(1e-12) * scale {
        let (smax, smin, _) = extrema(&centered);
        let lf = lambda(&centered);
        (Some(point_value(&lf, smax)), Some(point_value(&lf, smin)))
    } else {
        (None, None)
    };

    let fine = refine(f, 2)?;
    let err = |g: &Grid<R>| -> Result<f64> {
        let exact = lambda(&derivative(g, 1));
        Ok(f64_of((&lambda_derivative_offset_form(g, true)? - &exact).sup_norm()))
    };
    let d_errors = [err(f)?, err(&fine)?];
    // Second-order rule: the integrand has a derivative jump at α = ±π.
    let step = R::two_pi() / R::from_usize_lossy(f.n_points());
    let third = f64_of(refine(&derivative(f, 3), REFINEMENT)?.sup_norm());
    let d_tolerance =
        f64_of(step * step) * (third + f64_of(fp.sup_norm()) + f64_of(f.sup_norm())) + 1e-12;

    Ok(LemmaReport {
        a_at_max,
        a_at_min,
        b_at_max,
        b_at_min,
        c_at_max,
        c_at_min,
        d_errors,
        d_tolerance,
    })
}
