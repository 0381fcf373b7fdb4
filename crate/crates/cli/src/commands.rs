//! The five subcommands. Each fills a [`Recorder`] and writes its artifacts.

use npeskin::diagnostics::{fit_decay_rate, lemma_checks, maximum_principle_monitor, toy_energy_check};
use npeskin::evolution::{linear_solution, simulate, viscosity_sweep, Trajectory};
use npeskin::model::{derivative_decomposition, j_terms, rhs};
use npeskin::sampling::{random_weight, seeded_rng, SmoothSampler};
use npeskin::spectral::{derivative, w1_inf_norm};
use npeskin::stokeslet::{full_contour_rhs, klein_gordon_residual, normal_component};
use npeskin::{Curve, GridFunction, Kernel, Rule};
use rand::Rng;
use rayon::prelude::*;

use crate::init::parse_init;
use crate::output::{diagnostics_rows, snapshot_rows, OutputDir, Recorder, DIAGNOSTICS_COLUMNS};
use crate::settings::Settings;
use crate::CliError;

pub const SUITES: [&str; 5] = ["lemmas", "decomposition", "klein-gordon", "toy-energy", "stationarity"];

fn initial_data(s: &Settings) -> Result<GridFunction, CliError> {
    let default = format!("{}*cos(2*s)", s.amplitude);
    parse_init(s.init.as_deref().unwrap_or(&default), s.n)
}

fn single_epsilon(s: &Settings) -> Result<f64, CliError> {
    match s.epsilon.as_slice() {
        [e] => Ok(*e),
        _ => Err(CliError::Config("this command takes a single epsilon".into())),
    }
}

fn write_trajectory(out: &mut OutputDir, prefix: &str, traj: &Trajectory<f64>) -> Result<(), CliError> {
    out.write_csv(&format!("{prefix}diagnostics.csv"), &DIAGNOSTICS_COLUMNS, &diagnostics_rows(traj.records()))?;
    for (k, (state, _)) in traj.snapshots.iter().enumerate() {
        out.write_csv(&format!("{prefix}snapshots/h_{k:05}.csv"), &["s", "h"], &snapshot_rows(&state.h))?;
    }
    Ok(())
}

fn completion_check(rec: &mut Recorder, name: &str, traj: &Trajectory<f64>) {
    let t = traj.times().last().copied().unwrap_or(0.0);
    match &traj.aborted {
        None => rec.check(name, true, format!("reached t = {t}")),
        Some(e) => rec.check(name, false, format!("aborted at t = {t}: {e}")),
    }
}

pub fn simulate_cmd(s: &Settings, rec: &mut Recorder, out: &mut OutputDir) -> Result<(), CliError> {
    let cfg = s.solver(single_epsilon(s)?)?;
    let h0 = initial_data(s)?;
    let traj = rec.time("simulate", || simulate(&h0, &cfg)).map_err(|e| CliError::Config(e.to_string()))?;
    rec.time("write", || write_trajectory(out, "", &traj))?;
    completion_check(rec, "completed", &traj);
    match maximum_principle_monitor(&traj) {
        Ok(r) => rec.check(
            "maximum principle",
            r.monotone(),
            format!("initial W1inf {:.3e}, worst increase {:.3e} (tolerance {:.1e})", r.initial_norm, r.max_increase, r.tolerance),
        ),
        Err(e) => log::info!("maximum principle monitor skipped: {e}"),
    }
    Ok(())
}

pub fn linear_cmd(s: &Settings, rec: &mut Recorder, out: &mut OutputDir) -> Result<(), CliError> {
    let cfg = s.solver(single_epsilon(s)?)?;
    let h0 = initial_data(s)?;
    let traj = rec.time("simulate", || simulate(&h0, &cfg)).map_err(|e| CliError::Config(e.to_string()))?;
    completion_check(rec, "completed", &traj);
    let start = &traj.snapshots[0].0.h;
    let scale = start.sup_norm().max(f64::MIN_POSITIVE);
    let rows: Vec<Vec<f64>> = traj
        .snapshots
        .iter()
        .map(|(state, r)| {
            let lin = linear_solution(start, &cfg, r.t);
            let dev = (&state.h - &lin).sup_norm() / scale;
            vec![r.t, state.h.l2_norm_sq().sqrt(), lin.l2_norm_sq().sqrt(), dev]
        })
        .collect();
    rec.time("write", || -> Result<(), CliError> {
        write_trajectory(out, "", &traj)?;
        out.write_csv("linear.csv", &["t", "l2_nonlinear", "l2_linear", "relative_sup_deviation"], &rows)?;
        Ok(())
    })?;
    let times: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let column = |col: usize| rows.iter().map(|r| r[col]).collect::<Vec<_>>();
    let (nl, lin) = (fit_decay_rate(&times, &column(1)), fit_decay_rate(&times, &column(2)));
    match (nl, lin) {
        (Some(a), Some(b)) => rec.check(
            "linear decay rate",
            (a - b).abs() <= 0.01 * b.abs().max(0.01),
            format!("fitted L2 decay rate {a:.6}, linear prediction {b:.6}"),
        ),
        _ => rec.check("linear decay rate", false, "too few snapshots to fit a rate".into()),
    }
    Ok(())
}

pub fn sweep_cmd(s: &Settings, rec: &mut Recorder, out: &mut OutputDir) -> Result<(), CliError> {
    let cfg = s.solver(0.0)?;
    for &e in &s.epsilon {
        s.solver(e)?;
    }
    let h0 = initial_data(s)?;
    let report = rec
        .time("sweep", || viscosity_sweep(&h0, &cfg, &s.epsilon))
        .map_err(|e| match e {
            npeskin::Error::InvalidArgument(m) => CliError::Config(m),
            other => CliError::Failed(other.to_string()),
        })?;
    rec.time("write", || -> Result<(), CliError> {
        for (k, tr) in report.trajectories.iter().enumerate() {
            out.write_csv(&format!("eps_{k}/diagnostics.csv"), &DIAGNOSTICS_COLUMNS, &diagnostics_rows(tr.records()))?;
        }
        out.write_csv("inviscid/diagnostics.csv", &DIAGNOSTICS_COLUMNS, &diagnostics_rows(report.inviscid.records()))?;
        let rows: Vec<Vec<f64>> = report
            .distances
            .iter()
            .enumerate()
            .map(|(k, d)| vec![report.epsilons[k], report.epsilons[k + 1], *d])
            .collect();
        out.write_csv("sweep.csv", &["epsilon_a", "epsilon_b", "l2h1_distance"], &rows)?;
        Ok(())
    })?;
    rec.check(
        "distances decreasing",
        report.distances_decreasing(),
        format!("{:?}", report.distances),
    );
    rec.check(
        "faster dissipation",
        report.all_dissipate_faster(),
        format!("{:?}", report.dissipates_faster),
    );
    Ok(())
}

pub fn oracle_cmd(s: &Settings, rec: &mut Recorder, out: &mut OutputDir) -> Result<(), CliError> {
    let h = match &s.init {
        Some(text) => parse_init(text, s.n)?,
        None => SmoothSampler::default()
            .sample_scaled(s.n, s.amplitude, &mut seeded_rng(s.seed))
            .map_err(|e| CliError::Config(e.to_string()))?,
    };
    let rule = Rule::new(s.n).map_err(|e| CliError::Config(e.to_string()))?;
    let kernel = rec.time("weights", || Kernel::new(s.n)).map_err(|e| CliError::Config(e.to_string()))?;
    let curve = Curve::from_radial(&h, [0.0, 0.0], 0.0);
    let evaluated = rec.time("evaluate", || -> Result<_, npeskin::Error> {
        let scalar = j_terms(&h, &rule)?.sum();
        let vector = normal_component(&full_contour_rhs(&curve, &kernel)?);
        Ok((scalar, vector))
    });
    let (scalar, vector) = match evaluated {
        Ok(pair) => pair,
        Err(e) => {
            rec.check("oracle identity", false, e.to_string());
            return Ok(());
        }
    };
    let err = (&scalar - &vector).sup_norm();
    let rel = err / scalar.sup_norm().max(f64::MIN_POSITIVE);
    let rows: Vec<Vec<f64>> = h
        .nodes()
        .into_iter()
        .enumerate()
        .map(|(j, sj)| vec![sj, h.values()[j], scalar.values()[j], vector.values()[j]])
        .collect();
    out.write_csv("oracle.csv", &["s", "h", "scalar", "contour_normal"], &rows)?;
    rec.check(
        "oracle identity",
        err <= 1e-6,
        format!("W1inf {:.3e}: sup error {err:.3e} (relative {rel:.3e})", w1_inf_norm(&h)),
    );
    Ok(())
}

pub fn verify_cmd(s: &Settings, rec: &mut Recorder, _out: &mut OutputDir) -> Result<(), CliError> {
    let suites: Vec<&str> = if s.suite == "all" {
        SUITES.to_vec()
    } else {
        let chosen: Vec<&str> = s.suite.split(',').map(str::trim).collect();
        if let Some(bad) = chosen.iter().find(|c| !SUITES.contains(c)) {
            return Err(CliError::Config(format!("unknown suite `{bad}` (expected one of {SUITES:?} or all)")));
        }
        chosen
    };
    for suite in suites {
        let (pass, detail) = rec.time(suite, || run_suite(suite, s))?;
        rec.check(suite, pass, detail);
    }
    Ok(())
}

fn run_suite(suite: &str, s: &Settings) -> Result<(bool, String), CliError> {
    let lib = |e: npeskin::Error| CliError::Failed(e.to_string());
    let mut rng = seeded_rng(s.seed);
    Ok(match suite {
        "lemmas" => {
            let n = 64;
            let weights = (0..20).map(|_| random_weight::<f64>(n, 4, &mut rng)).collect::<Result<Vec<_>, _>>().map_err(lib)?;
            let sampler = SmoothSampler { with_mean: true, ..SmoothSampler::default() };
            let fs = (0..50).map(|_| sampler.sample(n, &mut rng)).collect::<Result<Vec<_>, _>>().map_err(lib)?;
            let reports = fs
                .par_iter()
                .enumerate()
                .map(|(k, f)| lemma_checks(f, &weights[k % 20]))
                .collect::<Result<Vec<_>, _>>()
                .map_err(lib)?;
            let passed = reports.iter().filter(|r| r.all_pass()).count();
            (passed == 50, format!("{passed}/50 functions pass all four checks"))
        }
        "decomposition" => {
            let mut detail = Vec::new();
            let mut pass = true;
            for _ in 0..5 {
                let seed: u64 = rng.gen();
                let tau = |n: usize| -> Result<f64, npeskin::Error> {
                    let sampler = SmoothSampler { max_mode: 6, ..SmoothSampler::default() };
                    let h = sampler.sample_scaled(n, 0.2, &mut seeded_rng(seed))?;
                    let rule = Rule::new(n)?;
                    let d = derivative_decomposition(&h, &rule)?.sum();
                    Ok((&d - &derivative(&j_terms(&h, &rule)?.sum(), 1)).sup_norm())
                };
                let (a, b) = (tau(16).map_err(lib)?, tau(32).map_err(lib)?);
                pass &= b < a / 2.0;
                detail.push(format!("{a:.1e}->{b:.1e}"));
            }
            (pass, format!("derivative mismatch N=16 -> 32: {}", detail.join(", ")))
        }
        "klein-gordon" => {
            let mut worst: f64 = 0.0;
            for n in (1..=64i64).flat_map(|n| [n, -n]) {
                worst = worst.max(klein_gordon_residual(n).map_err(lib)?.max_residual());
            }
            (worst <= 1e-12, format!("max residual over 1 <= |n| <= 64: {worst:.2e}"))
        }
        "toy-energy" => {
            let mut worst_gap: f64 = 0.0;
            let mut pass = true;
            for _ in 0..50 {
                let f: GridFunction = SmoothSampler::default().sample(64, &mut rng).map_err(lib)?;
                let r = toy_energy_check(&f);
                pass &= r.bound_holds() && r.identity_gap() < 1e-10 * (1.0 + r.lhs.abs());
                worst_gap = worst_gap.max(r.identity_gap());
            }
            (pass, format!("50 samples, worst identity gap {worst_gap:.2e}"))
        }
        "stationarity" => {
            let zero = GridFunction::zeros(s.n).map_err(|e| CliError::Config(e.to_string()))?;
            let scalar = rhs(&zero, &Rule::new(s.n).map_err(lib)?).map_err(lib)?.sup_norm();
            let circle = Curve::from_radial(&zero, [0.0, 0.0], 0.0);
            let (v1, v2) = full_contour_rhs(&circle, &Kernel::new(s.n).map_err(lib)?).map_err(lib)?;
            let vector = v1.sup_norm().max(v2.sup_norm());
            (scalar.max(vector) <= 1e-10, format!("scalar {scalar:.2e}, contour {vector:.2e}"))
        }
        other => return Err(CliError::Config(format!("unknown suite `{other}`"))),
    })
}
