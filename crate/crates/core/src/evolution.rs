//! Time integration of `∂_t h + (1/4)Λh - εh'' = 𝒩(h)`, `Ṁ = m_dot(h)`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use rustfft::num_complex::Complex;

use crate::diagnostics::{measure, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::model::{m_dot, nonlinearity, rhs, RadialState};
use crate::quadrature::QuadratureRule;
use crate::real::Real;
use crate::spectral::{apply_multiplier, derivative, sobolev_norm_sq, PeriodicGridFunction, SobolevKind};

type Grid<R> = PeriodicGridFunction<R>;

/// Explicit RK4 requires `dt (N/8 + εN²/4) <= EXPLICIT_RK4_CFL`, i.e.
/// `dt <= 20/N` without viscosity. The stability interval of RK4 on the
/// negative real axis is about `2.78`.
pub const EXPLICIT_RK4_CFL: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    ExplicitRk4,
    /// Integrating-factor RK4: the linear part `|n|/4 + εn²` is integrated exactly.
    #[default]
    IfRk4,
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit-rk4" => Ok(Self::ExplicitRk4),
            "if-rk4" => Ok(Self::IfRk4),
            other => Err(Error::InvalidArgument(format!(
                "unknown scheme '{other}' (expected explicit-rk4 or if-rk4)"
            ))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ExplicitRk4 => "explicit-rk4",
            Self::IfRk4 => "if-rk4",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub n_points: usize,
    pub dt: f64,
    pub t_end: f64,
    pub epsilon: f64,
    pub scheme: Scheme,
    pub mollify_init: bool,
    pub snapshot_stride: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n_points: 128,
            dt: 1e-2,
            t_end: 1.0,
            epsilon: 0.0,
            scheme: Scheme::IfRk4,
            mollify_init: false,
            snapshot_stride: 10,
        }
    }
}

impl SolverConfig {
    /// Largest stable explicit RK4 step for this grid and viscosity.
    pub fn cfl_limit(&self) -> f64 {
        let n = self.n_points as f64;
        EXPLICIT_RK4_CFL / (n / 8.0 + self.epsilon * n * n / 4.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 4 || !self.n_points.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(self.n_points));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "t_end must be nonnegative, got {}",
                self.t_end
            )));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be nonnegative, got {}",
                self.epsilon
            )));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidArgument("snapshot_stride must be at least 1".into()));
        }
        if self.scheme == Scheme::ExplicitRk4 && self.dt > self.cfl_limit() {
            return Err(Error::Cfl {
                dt: self.dt,
                limit: self.cfl_limit(),
            });
        }
        Ok(())
    }

    fn linear_rate<R: Real>(&self, m: i64) -> R {
        let m = R::from_i64_lossy(m);
        m.abs() * R::lit(0.25) + R::lit(self.epsilon) * m * m
    }
}

/// `e^{-L dt}` applied in Fourier space; the exact flow of the linearized problem.
pub fn linear_solution<R: Real>(h: &Grid<R>, cfg: &SolverConfig, dt: R) -> Grid<R> {
    apply_multiplier(h, false, |m| {
        Complex::new((-cfg.linear_rate::<R>(m) * dt).exp(), R::zero())
    })
}

/// Spectral heat mollification `ĥ(n) e^{-εn²}`.
pub fn mollify<R: Real>(h: &Grid<R>, epsilon: R) -> Grid<R> {
    apply_multiplier(h, false, |m| {
        let m = R::from_i64_lossy(m);
        Complex::new((-epsilon * m * m).exp(), R::zero())
    })
}

fn explicit_force<R: Real>(h: &Grid<R>, cfg: &SolverConfig, rule: &QuadratureRule<R>) -> Result<Grid<R>> {
    let base = rhs(h, rule)?;
    if cfg.epsilon == 0.0 {
        return Ok(base);
    }
    Ok(base.axpy(R::lit(cfg.epsilon), &derivative(h, 2)))
}

fn add_drift<R: Real>(m: [R; 2], dt: R, stages: [[R; 2]; 4]) -> [R; 2] {
    let sixth = dt / R::lit(6.0);
    let two = R::lit(2.0);
    std::array::from_fn(|d| {
        m[d] + sixth * (stages[0][d] + two * stages[1][d] + two * stages[2][d] + stages[3][d])
    })
}

/// Advances `(h, M)` by `dt` with the configured scheme.
pub fn advance<R: Real>(
    state: &RadialState<R>,
    cfg: &SolverConfig,
    rule: &QuadratureRule<R>,
    dt: R,
) -> Result<RadialState<R>> {
    let h = &state.h;
    let half = R::lit(0.5) * dt;
    let sixth = dt / R::lit(6.0);
    let two = R::lit(2.0);
    let (h_new, m_new) = match cfg.scheme {
        Scheme::ExplicitRk4 => {
            let k1 = explicit_force(h, cfg, rule)?;
            let h2 = h.axpy(half, &k1);
            let k2 = explicit_force(&h2, cfg, rule)?;
            let h3 = h.axpy(half, &k2);
            let k3 = explicit_force(&h3, cfg, rule)?;
            let h4 = h.axpy(dt, &k3);
            let k4 = explicit_force(&h4, cfg, rule)?;
            let out = h
                .axpy(sixth, &k1)
                .axpy(two * sixth, &k2)
                .axpy(two * sixth, &k3)
                .axpy(sixth, &k4);
            let drift = [m_dot(h), m_dot(&h2), m_dot(&h3), m_dot(&h4)];
            (out, add_drift(state.m, dt, drift))
        }
        Scheme::IfRk4 => {
            // Stages of RK4 for v = e^{Lt} h, mapped back to h.
            let e_half = |f: &Grid<R>| linear_solution(f, cfg, half);
            let k1 = nonlinearity(h, rule)?;
            let h_half = e_half(h);
            let h2 = e_half(&h.axpy(half, &k1));
            let k2 = nonlinearity(&h2, rule)?;
            let h3 = h_half.axpy(half, &k2);
            let k3 = nonlinearity(&h3, rule)?;
            let h4 = e_half(&h_half.axpy(dt, &k3));
            let k4 = nonlinearity(&h4, rule)?;
            let mid = e_half(&k2.axpy(R::one(), &k3));
            let out = linear_solution(&h.axpy(sixth, &k1), cfg, dt)
                .axpy(two * sixth, &mid)
                .axpy(sixth, &k4);
            let drift = [m_dot(h), m_dot(&h2), m_dot(&h3), m_dot(&h4)];
            (out, add_drift(state.m, dt, drift))
        }
    };
    let t = state.t + dt;
    if !h_new.is_finite() || !m_new.iter().all(|v| v.is_finite()) {
        return Err(Error::Blowup {
            t: t.to_f64().unwrap_or(f64::NAN),
        });
    }
    RadialState::new(h_new, m_new, t)
}

/// One step of size `cfg.dt`.
pub fn step<R: Real>(state: &RadialState<R>, cfg: &SolverConfig, rule: &QuadratureRule<R>) -> Result<RadialState<R>> {
    advance(state, cfg, rule, R::lit(cfg.dt))
}

/// Recorded states with their diagnostics, plus the reason for an early stop.
#[derive(Debug, Clone)]
pub struct Trajectory<R> {
    pub snapshots: Vec<(RadialState<R>, DiagnosticsRecord)>,
    pub aborted: Option<Error>,
}

impl<R: Real> Trajectory<R> {
    /// Wraps externally produced states, measuring each one.
    pub fn from_states(states: Vec<RadialState<R>>) -> Result<Self> {
        if states.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::InvalidArgument("snapshot times must increase strictly".into()));
        }
        Ok(Self {
            snapshots: states.into_iter().map(|s| {
                let d = measure(&s);
                (s, d)
            }).collect(),
            aborted: None,
        })
    }
}

impl<R> Trajectory<R> {
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = &DiagnosticsRecord> {
        self.snapshots.iter().map(|(_, d)| d)
    }

    pub fn times(&self) -> Vec<f64> {
        self.records().map(|d| d.t).collect()
    }

    pub fn last_state(&self) -> &RadialState<R> {
        &self.snapshots.last().expect("trajectory is never empty").0
    }

    pub fn completed(&self) -> bool {
        self.aborted.is_none()
    }
}

/// Integrates from `h0` to `cfg.t_end`, recording every `snapshot_stride`
/// steps and at the final time. The last step is shortened to land on
/// `t_end`. Geometry failures stop the run and are stored in
/// [`Trajectory::aborted`].
pub fn simulate<R: Real>(h0: &Grid<R>, cfg: &SolverConfig) -> Result<Trajectory<R>> {
    cfg.validate()?;
    if h0.n_points() != cfg.n_points {
        return Err(Error::LengthMismatch {
            expected: cfg.n_points,
            actual: h0.n_points(),
        });
    }
    let h0 = if cfg.mollify_init && cfg.epsilon > 0.0 {
        mollify(h0, R::lit(cfg.epsilon))
    } else {
        h0.clone()
    };
    let initial = RadialState::initial(h0)?;
    log::info!(
        "simulate: N = {}, dt = {}, T = {}, eps = {}, scheme = {}, |h0|_W1inf = {:.3e}",
        cfg.n_points,
        cfg.dt,
        cfg.t_end,
        cfg.epsilon,
        cfg.scheme,
        measure(&initial).w1_inf()
    );
    let rule = QuadratureRule::new(cfg.n_points)?;
    let n_steps = (cfg.t_end / cfg.dt - 1e-9).ceil().max(0.0) as usize;
    let mut traj = Trajectory {
        snapshots: vec![(initial.clone(), measure(&initial))],
        aborted: None,
    };
    let mut state = initial;
    for k in 1..=n_steps {
        let target = if k == n_steps { cfg.t_end } else { k as f64 * cfg.dt };
        let dt = R::lit(target) - state.t;
        match advance(&state, cfg, &rule, dt) {
            Ok(next) => state = next,
            Err(e @ (Error::Geometry { .. } | Error::Blowup { .. })) => {
                log::warn!("simulate: stopped at t = {}: {e}", state.t);
                traj.aborted = Some(e);
                return Ok(traj);
            }
            Err(e) => return Err(e),
        }
        if k % cfg.snapshot_stride == 0 || k == n_steps {
            let d = measure(&state);
            traj.snapshots.push((state.clone(), d));
        }
    }
    Ok(traj)
}

/// Discrete `L²([0,T]; H¹)` distance between trajectories sharing snapshot times.
pub fn l2_h1_distance<R: Real>(a: &Trajectory<R>, b: &Trajectory<R>) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let sq: Vec<(f64, f64)> = a
        .snapshots
        .iter()
        .zip(&b.snapshots)
        .map(|((x, _), (y, _))| {
            let diff = &x.h - &y.h;
            let v = sobolev_norm_sq(&diff, R::one(), SobolevKind::Inhomogeneous);
            (x.t.to_f64().unwrap_or(f64::NAN), v.to_f64().unwrap_or(f64::NAN))
        })
        .collect();
    Ok(trapezoid(&sq).sqrt())
}

pub(crate) fn trapezoid(samples: &[(f64, f64)]) -> f64 {
    samples
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum()
}

#[derive(Debug, Clone)]
pub struct SweepReport<R> {
    pub epsilons: Vec<f64>,
    pub trajectories: Vec<Trajectory<R>>,
    /// `d_k = ‖h_{ε_k} - h_{ε_{k+1}}‖_{L²H¹}`.
    pub distances: Vec<f64>,
    /// The same initial data run with `ε = 0`.
    pub inviscid: Trajectory<R>,
    /// Per `ε`, whether `‖h'‖²_{L²}` sits strictly below the inviscid run at
    /// every snapshot after the first.
    pub dissipates_faster: Vec<bool>,
}

impl<R> SweepReport<R> {
    pub fn distances_decreasing(&self) -> bool {
        self.distances.windows(2).all(|w| w[1] < w[0])
    }

    pub fn all_dissipate_faster(&self) -> bool {
        self.dissipates_faster.iter().all(|&b| b)
    }
}

/// Runs `simulate` for each `ε` (concurrently) and for `ε = 0`, and
/// measures consecutive `L²H¹` distances.
pub fn viscosity_sweep<R: Real>(h0: &Grid<R>, cfg: &SolverConfig, eps_list: &[f64]) -> Result<SweepReport<R>> {
    if eps_list.len() < 2 {
        return Err(Error::InvalidArgument("a sweep needs at least two viscosities".into()));
    }
    if eps_list.iter().any(|&e| !(e > 0.0)) || eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument(
            "viscosities must be positive and strictly descending".into(),
        ));
    }
    let mut runs: Vec<Result<Trajectory<R>>> = eps_list
        .par_iter()
        .chain([0.0].par_iter())
        .map(|&epsilon| {
            let cfg = SolverConfig {
                epsilon,
                ..cfg.clone()
            };
            simulate(h0, &cfg)
        })
        .collect();
    let inviscid = runs.pop().expect("baseline run")?;
    let trajectories = runs.into_iter().collect::<Result<Vec<_>>>()?;
    if let Some(e) = trajectories.iter().chain([&inviscid]).find_map(|t| t.aborted.clone()) {
        return Err(e);
    }
    let distances = trajectories
        .windows(2)
        .map(|w| l2_h1_distance(&w[0], &w[1]))
        .collect::<Result<Vec<_>>>()?;
    let dissipates_faster = trajectories
        .iter()
        .map(|tr| {
            tr.records()
                .zip(inviscid.records())
                .skip(1)
                .all(|(v, b)| v.l2_hprime_sq < b.l2_hprime_sq)
        })
        .collect();
    Ok(SweepReport {
        epsilons: eps_list.to_vec(),
        trajectories,
        distances,
        inviscid,
        dissipates_faster,
    })
}
