use std::path::Path;

use clap::ValueEnum;
use ergodic_core::cocycle::{lyapunov_sweep, vanishing_set, EnergyGrid};
use ergodic_core::determinism::{
    construct_witness, defect_profile, translate_convergence, witness_search_over, Side, WitnessPair,
};
use ergodic_core::dynamics::{sample_points, Dynamics, Point};
use ergodic_core::sampling::SamplingFunction;
use ergodic_core::spectra::{box_eigenvalues, ids, merge_intervals, thouless_gamma};
use serde_json::{json, Value};

use crate::output::{point_json, Run};
use crate::{reproduce, CliError, CliResult, ExperimentConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Lyapunov,
    Ids,
    ThoulessCheck,
    Spectrum,
    Witness,
    Defect,
    Translate,
    Reproduce,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Lyapunov => "lyapunov",
            Command::Ids => "ids",
            Command::ThoulessCheck => "thouless-check",
            Command::Spectrum => "spectrum",
            Command::Witness => "witness",
            Command::Defect => "defect",
            Command::Translate => "translate",
            Command::Reproduce => "reproduce",
        }
    }
}

fn need<T: Clone>(v: &Option<T>, key: &str, cmd: Command) -> CliResult<T> {
    v.clone()
        .ok_or_else(|| CliError::MissingKey(format!("'{}' needs '{key}' in the config", cmd.name())))
}

struct Setup {
    dynamics: Dynamics,
    function: SamplingFunction,
}

fn setup(cfg: &ExperimentConfig, cmd: Command) -> CliResult<Setup> {
    Ok(Setup {
        dynamics: need(&cfg.dynamics, "dyn", cmd)?,
        function: need(&cfg.function, "f", cmd)?,
    })
}

fn samples(cfg: &ExperimentConfig, d: &Dynamics, cmd: Command, count: usize) -> CliResult<Vec<Point>> {
    let seed = need(&cfg.seed, "seed", cmd)?;
    Ok(sample_points(d, count, seed))
}

/// Runs `cmd` and writes its artifacts and manifest into `out`.
pub fn run(cmd: Command, cfg: &ExperimentConfig, out: &Path) -> CliResult<()> {
    if cmd == Command::Reproduce {
        let seed = need(&cfg.seed, "seed", cmd)?;
        let report = reproduce::reproduce(seed, out)?;
        for line in report.lines() {
            println!("{line}");
        }
        return Ok(());
    }
    let text = cfg.serialize();
    let mut run = Run::new(out, cmd.name(), &text)?;
    let result = execute(cmd, cfg, &mut run);
    let message = result.as_ref().err().map(ToString::to_string);
    run.finish(message.as_deref())?;
    result
}

fn execute(cmd: Command, cfg: &ExperimentConfig, run: &mut Run) -> CliResult<()> {
    let Setup {
        dynamics: d,
        function: f,
    } = setup(cfg, cmd)?;
    match cmd {
        Command::Lyapunov => {
            let grid = need(&cfg.energies, "energies", cmd)?;
            let omegas = samples(cfg, &d, cmd, cfg.samples)?;
            let table = run.time("lyapunov_sweep", || {
                lyapunov_sweep(&f, &d, &omegas, grid, cfg.lyapunov_settings())
            })?;
            for row in table.rows.iter().filter(|r| r.flagged) {
                run.warn(format!("E={:e}: {} seed(s) failed", row.energy, row.errors.len()));
            }
            run.write_csv(
                "lyapunov.csv",
                &["E", "gamma", "stderr", "n_steps", "seed_count", "flagged"],
                table.rows.iter().map(|r| {
                    vec![
                        r.energy.into(),
                        r.gamma.into(),
                        r.stderr.into(),
                        r.n_steps.into(),
                        r.seed_count.into(),
                        r.flagged.into(),
                    ]
                }),
            )?;
            let v = vanishing_set(&table, cfg.threshold);
            run.write_json(
                "vanishing_set.json",
                &json!({
                    "threshold": v.threshold,
                    "grid": grid_json(&v.grid),
                    "measure_estimate": v.measure_estimate,
                    "measure_at_half_threshold": v.measure_at_half_threshold,
                    "measure_at_double_threshold": v.measure_at_double_threshold,
                    "flagged_energies": v.flagged_energies,
                }),
            )?;
        }
        Command::Ids => {
            let grid = need(&cfg.energies, "energies", cmd)?;
            let omegas = samples(cfg, &d, cmd, cfg.samples)?;
            let t = run.time("ids", || ids(&f, &d, cfg.box_size, &omegas, grid, cfg.tol))?;
            run.write_csv(
                "ids.csv",
                &["E", "k", "boundary_sensitivity"],
                t.energies
                    .iter()
                    .zip(&t.k_values)
                    .zip(&t.boundary_sensitivity)
                    .map(|((&e, &k), &b)| vec![e.into(), k.into(), b.into()]),
            )?;
            if t.max_boundary_sensitivity > 2.0 / t.box_size as f64 {
                run.warn(format!(
                    "boundary sensitivity {:e} exceeds 2/n",
                    t.max_boundary_sensitivity
                ));
            }
        }
        Command::ThoulessCheck => {
            let grid = need(&cfg.energies, "energies", cmd)?;
            let omegas = samples(cfg, &d, cmd, cfg.samples)?;
            let pool = run.time("box_eigenvalues", || {
                box_eigenvalues(&f, &d, &omegas, cfg.box_size, 1, cfg.tol)
            })?;
            let table = run.time("lyapunov_sweep", || {
                lyapunov_sweep(&f, &d, &omegas, grid, cfg.lyapunov_settings())
            })?;
            let mut rows = Vec::new();
            for row in &table.rows {
                let t = thouless_gamma(row.energy, &pool, cfg.exclusion_radius)?;
                if t.ill_conditioned {
                    run.warn(format!(
                        "E={:e}: {} of {} terms excluded",
                        row.energy,
                        t.excluded,
                        pool.values.len()
                    ));
                }
                rows.push(vec![
                    row.energy.into(),
                    t.gamma.into(),
                    row.gamma.into(),
                    row.stderr.into(),
                    (t.gamma - row.gamma).abs().into(),
                    t.excluded.into(),
                    t.ill_conditioned.into(),
                ]);
            }
            run.write_csv(
                "thouless.csv",
                &[
                    "E",
                    "gamma_thouless",
                    "gamma_cocycle",
                    "stderr",
                    "difference",
                    "excluded",
                    "ill_conditioned",
                ],
                rows,
            )?;
        }
        Command::Spectrum => {
            let omegas = samples(cfg, &d, cmd, cfg.samples)?;
            let pool = run.time("box_eigenvalues", || {
                box_eigenvalues(&f, &d, &omegas, cfg.box_size, 1, cfg.tol)
            })?;
            let intervals = merge_intervals(&pool.values, cfg.merge_gap);
            let list: Vec<Value> = intervals.iter().map(|&(lo, hi)| json!([lo, hi])).collect();
            run.write_json("spectrum.json", &Value::Array(list))?;
        }
        Command::Witness => {
            let omegas = samples(cfg, &d, cmd, cfg.samples)?;
            let delta_min = cfg.delta_min.unwrap_or_else(|| f.largest_jump() / 2.0);
            let s = run.time("witness_search", || {
                witness_search_over(&f, &d, omegas, cfg.m, cfg.eps, delta_min, cfg.max_pairs)
            })?;
            let constructed = match cfg.omega0 {
                Some(w0) => Some(run.time("construct_witness", || {
                    construct_witness(&f, &d, w0, cfg.m, (Side::Left, Side::Right), cfg.eps)
                })?),
                None => None,
            };
            if s.pairs_found > s.pairs.len() as u64 {
                run.warn(format!("{} qualifying pairs, {} written", s.pairs_found, s.pairs.len()));
            }
            run.write_json(
                "witnesses.json",
                &json!({
                    "m": s.m,
                    "eps": s.eps,
                    "delta_min": s.delta_min,
                    "sample_count": s.sample_count,
                    "pairs_found": s.pairs_found,
                    "max_delta": s.max_delta,
                    "pairs": s.pairs.iter().map(witness_json).collect::<Vec<_>>(),
                    "constructed": constructed.as_ref().map(witness_json),
                }),
            )?;
        }
        Command::Defect => {
            let seed = need(&cfg.seed, "seed", cmd)?;
            let p = run.time("defect_profile", || {
                defect_profile(&f, &d, &cfg.m_values, cfg.eps, cfg.samples, seed)
            })?;
            run.write_csv(
                "defect.csv",
                &["m", "defect", "pairs_found"],
                p.m_values
                    .iter()
                    .zip(&p.defect)
                    .zip(&p.pairs_found)
                    .map(|((&m, &x), &n)| vec![m.into(), x.into(), n.into()]),
            )?;
        }
        Command::Translate => {
            let omega = need(&cfg.omega, "omega", cmd)?.resolve(&d)?;
            let omega1 = need(&cfg.omega1, "omega1", cmd)?.resolve(&d)?;
            let rows = run.time("translate_convergence", || {
                translate_convergence(&f, &d, omega, omega1, cfg.depth)
            })?;
            run.write_csv(
                "translate.csv",
                &[
                    "i",
                    "n",
                    "distance_raw",
                    "distance",
                    "window",
                    "discrepancy",
                    "fixed_window_discrepancy",
                ],
                rows.iter().enumerate().map(|(i, r)| {
                    vec![
                        i.into(),
                        r.n.into(),
                        r.distance.raw().into(),
                        r.distance.to_f64().into(),
                        r.window.into(),
                        r.discrepancy.into(),
                        r.fixed_window_discrepancy.into(),
                    ]
                }),
            )?;
        }
        Command::Reproduce => unreachable!("handled by run"),
    }
    Ok(())
}

pub fn grid_json(g: &EnergyGrid) -> Value {
    json!({ "min": g.min, "max": g.max, "count": g.count })
}

pub fn witness_json(w: &WitnessPair) -> Value {
    json!({
        "omega_a": point_json(&w.omega_a),
        "omega_b": point_json(&w.omega_b),
        "m": w.m,
        "eps": w.eps,
        "delta": w.delta,
        "left_a": w.left_a.values,
        "left_b": w.left_b.values,
        "v0_a": w.v0_a,
        "v0_b": w.v0_b,
    })
}
