//! The acceptance suite with pinned parameters.
//!
//! [`run_suite`] evaluates criteria 1–7 and writes their artifacts;
//! [`reproduce`] runs it on one and on eight worker threads and adds
//! criterion 8, byte-for-byte agreement of the two artifact trees.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ergodic_core::cocycle::{lyapunov, lyapunov_sweep, vanishing_set, EnergyGrid, LyapunovSettings};
use ergodic_core::determinism::{
    construct_witness, defect_profile, translate_convergence, witness_search, Side, TranslateRow,
};
use ergodic_core::dynamics::{sample_points, Dynamics, TorusPoint};
use ergodic_core::sampling::SamplingFunction;
use ergodic_core::spectra::{box_eigenvalues, merge_intervals, thouless_gamma, JacobiMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::commands::witness_json;
use crate::output::{Cell, Run, MANIFEST, VOLATILE_MANIFEST_KEYS};
use crate::{CliError, CliResult};

/// Worker counts whose artifacts must agree.
pub const THREAD_COUNTS: [usize; 2] = [1, 8];

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Outcome {
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!("{verdict} criterion {} ({}): {}", self.id, self.title, self.detail)
    }
}

fn golden() -> Dynamics {
    Dynamics::rotation(TorusPoint::GOLDEN)
}

fn step() -> SamplingFunction {
    SamplingFunction::step(vec![TorusPoint::ZERO, TorusPoint::HALF], vec![1.0, 0.0]).expect("valid step")
}

fn free() -> SamplingFunction {
    SamplingFunction::constant(0.0).expect("valid constant")
}

fn free_lyapunov(seed: u64, run: &mut Run) -> CliResult<Outcome> {
    let d = golden();
    let omega = sample_points(&d, 1, seed)[0];
    let settings = LyapunovSettings::with_steps(1_000_000);
    let energies = [-3.0, -2.5, -1.9, -1.0, 0.0, 1.0, 1.9, 2.5, 3.0];
    let estimates = energies
        .par_iter()
        .map(|&e| lyapunov(e, &free(), &d, omega, settings))
        .collect::<Result<Vec<_>, _>>()?;
    let (mut band, mut outside) = (0.0f64, 0.0f64);
    let mut rows = Vec::new();
    for g in &estimates {
        let expected = if g.energy.abs() < 2.0 {
            0.0
        } else {
            (g.energy.abs() / 2.0).acosh()
        };
        let err = (g.gamma - expected).abs();
        if g.energy.abs() < 2.0 {
            band = band.max(g.gamma.abs());
        } else {
            outside = outside.max(err);
        }
        rows.push(vec![
            g.energy.into(),
            g.gamma.into(),
            g.stderr.into(),
            expected.into(),
            err.into(),
        ]);
    }
    run.write_csv(
        "c1_free_lyapunov.csv",
        &["E", "gamma", "stderr", "expected", "error"],
        rows,
    )?;
    Ok(Outcome {
        id: 1,
        title: "free-case Lyapunov exponent",
        passed: band < 2e-3 && outside < 1e-4,
        detail: format!("max |γ| in band {band:.3e} (< 2e-3); max |γ − arccosh(|E|/2)| outside {outside:.3e} (< 1e-4)"),
    })
}

/// Slack on eigenvalue ordering, far above the 1e-14 bisection tolerance.
const INTERLACE_SLACK: f64 = 1e-12;

fn free_box(seed: u64, run: &mut Run) -> CliResult<Outcome> {
    let n = 1000;
    let ev = JacobiMatrix::new(vec![0.0; n])?.eigenvalues(1e-12)?;
    let mut worst = 0.0f64;
    let mut rows = Vec::with_capacity(n);
    for (i, &e) in ev.iter().enumerate() {
        let want = 2.0 * ((n - i) as f64 * PI / (n + 1) as f64).cos();
        worst = worst.max((e - want).abs());
        rows.push(vec![(i + 1).into(), e.into(), want.into(), (e - want).abs().into()]);
    }
    run.write_csv("c2_free_box.csv", &["k", "eigenvalue", "closed_form", "error"], rows)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC2);
    let mut rows = Vec::new();
    let mut all_ok = true;
    for instance in 0..100usize {
        let len = rng.gen_range(2..=16);
        let diag: Vec<f64> = (0..len).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let full = JacobiMatrix::new(diag.clone())?;
        let ev = full.eigenvalues(1e-14)?;
        let sub = JacobiMatrix::new(diag[..len - 1].to_vec())?.eigenvalues(1e-14)?;
        let interlaced = sub
            .iter()
            .enumerate()
            .all(|(i, &mu)| ev[i] <= mu + INTERLACE_SLACK && mu <= ev[i + 1] + INTERLACE_SLACK);
        let trace_error = (ev.iter().sum::<f64>() - full.trace()).abs();
        let ok = interlaced && trace_error <= 1e-9 * len as f64;
        all_ok &= ok;
        rows.push(vec![instance.into(), len.into(), interlaced.into(), trace_error.into()]);
    }
    run.write_csv(
        "c2_random_matrices.csv",
        &["instance", "n", "interlaced", "trace_error"],
        rows,
    )?;
    Ok(Outcome {
        id: 2,
        title: "free-box eigenvalues",
        passed: worst < 1e-10 && all_ok,
        detail: format!(
            "max |λ_k − 2cos(kπ/1001)| {worst:.3e} (< 1e-10); interlacing and trace {} on 100 random matrices",
            if all_ok { "hold" } else { "fail" }
        ),
    })
}

fn herman(seed: u64, run: &mut Run) -> CliResult<Outcome> {
    let d = golden();
    let f = SamplingFunction::cosine(4.0)?;
    let pool = box_eigenvalues(&f, &d, &sample_points(&d, 10, seed.wrapping_add(3)), 1000, 1, 1e-12)?;
    let intervals = merge_intervals(&pool.values, 0.01);
    let probe = box_eigenvalues(&f, &d, &sample_points(&d, 1, seed.wrapping_add(33)), 1000, 1, 1e-12)?;
    let energies: Vec<f64> = (1..=50).map(|j| probe.values[j * probe.values.len() / 51]).collect();
    let inside = energies
        .iter()
        .all(|&e| intervals.iter().any(|&(lo, hi)| lo <= e && e <= hi));
    let omegas = sample_points(&d, 2, seed.wrapping_add(303));
    let settings = LyapunovSettings::with_steps(1_000_000);
    let rows = energies
        .par_iter()
        .map(|&e| -> CliResult<_> {
            let grid = EnergyGrid::single(e)?;
            let row = lyapunov_sweep(&f, &d, &omegas, grid, settings)?.rows.remove(0);
            Ok((row, thouless_gamma(e, &pool, None)?))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let (mut diff, mut rel, mut ill) = (0.0f64, 0.0f64, 0usize);
    let mut table = Vec::new();
    for (c, t) in &rows {
        diff = diff.max((c.gamma - t.gamma).abs());
        rel = rel.max((c.gamma / LN_2 - 1.0).abs()).max((t.gamma / LN_2 - 1.0).abs());
        ill += usize::from(t.ill_conditioned || c.flagged);
        table.push(vec![
            c.energy.into(),
            c.gamma.into(),
            c.stderr.into(),
            t.gamma.into(),
            t.excluded.into(),
            t.ill_conditioned.into(),
        ]);
    }
    run.write_csv(
        "c3_herman.csv",
        &[
            "E",
            "gamma_cocycle",
            "stderr",
            "gamma_thouless",
            "excluded",
            "ill_conditioned",
        ],
        table,
    )?;
    let list: Vec<Value> = intervals.iter().map(|&(lo, hi)| json!([lo, hi])).collect();
    run.write_json("c3_spectrum.json", &Value::Array(list))?;
    Ok(Outcome {
        id: 3,
        title: "Herman / almost-Mathieu cross-check",
        passed: inside && diff < 0.02 && rel < 0.02 && ill == 0,
        detail: format!(
            "50 energies in spectrum: {inside}; max |γ − γ_T| {diff:.4} (< 0.02); max relative distance to log 2 {rel:.4} (< 0.02); flagged {ill}"
        ),
    })
}

fn vanishing(seed: u64, run: &mut Run) -> CliResult<Outcome> {
    let d = golden();
    let omegas = sample_points(&d, 1, seed.wrapping_add(4));
    let grid = EnergyGrid::new(-2.0, 3.0, 400)?;
    let threshold = 0.02;
    let mut rows = Vec::new();
    let band = vanishing_set(
        &lyapunov_sweep(&free(), &d, &omegas, grid, LyapunovSettings::with_steps(1_000_000))?,
        threshold,
    );
    rows.push(vec![
        Cell::Text("free".into()),
        1_000_000u64.into(),
        band.measure_estimate.into(),
        band.measure_at_half_threshold.into(),
        band.measure_at_double_threshold.into(),
    ]);
    let mut measures = Vec::new();
    for n in [10_000u64, 100_000, 1_000_000] {
        let v = vanishing_set(
            &lyapunov_sweep(&step(), &d, &omegas, grid, LyapunovSettings::with_steps(n))?,
            threshold,
        );
        rows.push(vec![
            Cell::Text("step".into()),
            n.into(),
            v.measure_estimate.into(),
            v.measure_at_half_threshold.into(),
            v.measure_at_double_threshold.into(),
        ]);
        measures.push(v.measure_estimate);
    }
    run.write_csv(
        "c4_vanishing_set.csv",
        &[
            "potential",
            "n_steps",
            "measure",
            "measure_half_threshold",
            "measure_double_threshold",
        ],
        rows,
    )?;
    let ratio = measures[2] / band.measure_estimate;
    let monotone = measures.windows(2).all(|w| w[1] <= w[0]);
    Ok(Outcome {
        id: 4,
        title: "vanishing-set dichotomy trend",
        passed: ratio <= 0.25 && monotone,
        detail: format!(
            "step measure {:.4} / {:.4} / {:.4} at 1e4 / 1e5 / 1e6 steps (nonincreasing: {monotone}); free band {:.4}; ratio {ratio:.3} (<= 0.25)",
            measures[0], measures[1], measures[2], band.measure_estimate
        ),
    })
}

fn witnesses(seed: u64, run: &mut Run) -> CliResult<Outcome> {
    let d = golden();
    let mut constructed = Vec::new();
    let mut all_built = true;
    for m in [5, 10, 20, 40] {
        match construct_witness(&step(), &d, TorusPoint::HALF, m, (Side::Left, Side::Right), 0.0) {
            Ok(w) => {
                all_built &= w.eps == 0.0 && w.delta >= 1.0 && w.verify();
                constructed.push(witness_json(&w));
            }
            Err(e) => {
                all_built = false;
                constructed.push(json!({ "m": m, "error": e.to_string() }));
            }
        }
    }
    let s = witness_search(&step(), &d, 10, 0.0, 0.9, 100_000, seed.wrapping_add(5))?;
    let verified = s.pairs.iter().filter(|p| p.verify()).count();
    run.write_json(
        "c5_witnesses.json",
        &json!({
            "constructed": constructed,
            "search": {
                "m": s.m,
                "eps": s.eps,
                "delta_min": s.delta_min,
                "sample_count": s.sample_count,
                "pairs_found": s.pairs_found,
                "max_delta": s.max_delta,
                "first_pairs": s.pairs.iter().take(8).map(witness_json).collect::<Vec<_>>(),
            },
        }),
    )?;
    Ok(Outcome {
        id: 5,
        title: "witness existence",
        passed: all_built && verified >= 1 && verified == s.pairs.len(),
        detail: format!(
            "constructed m = 5, 10, 20, 40 with eps 0, delta 1: {all_built}; search found {} pairs, {verified} verified and written",
            s.pairs_found
        ),
    })
}

fn continuity(seed: u64, run: &mut Run) -> CliResult<Outcome> {
    let d = golden();
    let f = SamplingFunction::cosine(2.0)?;
    let s = witness_search(&f, &d, 10, 1e-6, 0.5, 100_000, seed.wrapping_add(6))?;
    let p = defect_profile(&f, &d, &[5, 10, 20, 40], 1e-4, 100_000, seed.wrapping_add(6))?;
    run.write_csv(
        "c6_defect.csv",
        &["m", "defect", "pairs_found"],
        p.m_values
            .iter()
            .zip(&p.defect)
            .zip(&p.pairs_found)
            .map(|((&m, &x), &n)| vec![m.into(), x.into(), n.into()]),
    )?;
    let worst = p.defect.iter().copied().fold(0.0, f64::max);
    Ok(Outcome {
        id: 6,
        title: "continuity contrapositive",
        passed: s.pairs_found == 0 && worst <= 0.01,
        detail: format!(
            "cosine search pairs {} (expect 0); max defect over m = 5..40 at eps 1e-4 {worst:.3e} (<= 0.01)",
            s.pairs_found
        ),
    })
}

fn translate_rows(rows: &[TranslateRow]) -> Vec<Vec<Cell>> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                i.into(),
                r.n.into(),
                r.distance.raw().into(),
                r.distance.to_f64().into(),
                r.window.into(),
                r.discrepancy.into(),
                r.fixed_window_discrepancy.into(),
            ]
        })
        .collect()
}

const TRANSLATE_HEADER: [&str; 7] = [
    "i",
    "n",
    "distance_raw",
    "distance",
    "window",
    "discrepancy",
    "fixed_window_discrepancy",
];

fn translates(seed: u64, run: &mut Run) -> CliResult<Outcome> {
    let d = golden();
    let depth = 8;
    let omega = sample_points(&d, 1, seed.wrapping_add(7))[0];
    let cos_rows = translate_convergence(&SamplingFunction::cosine(2.0)?, &d, omega, omega, depth)?;
    run.write_csv("c7_cosine_translates.csv", &TRANSLATE_HEADER, translate_rows(&cos_rows))?;
    let returns: Vec<f64> = cos_rows
        .iter()
        .filter(|r| r.n > 0)
        .map(|r| r.fixed_window_discrepancy)
        .collect();
    let nonincreasing = returns.windows(2).all(|w| w[1] <= w[0]);
    let last = returns.last().copied().unwrap_or(f64::NAN);
    let times: Vec<String> = cos_rows.iter().filter(|r| r.n > 0).map(|r| r.n.to_string()).collect();

    let candidates = sample_points(&d, 16, seed.wrapping_add(77));
    let (mut step_rows, mut step_err) = (None, None);
    for pair in candidates.chunks(2) {
        match translate_convergence(&step(), &d, pair[0], pair[1], depth) {
            Ok(rows) => {
                step_rows = Some(rows);
                break;
            }
            Err(e) => step_err = Some(e),
        }
    }
    let step_rows = match (step_rows, step_err) {
        (Some(r), _) => r,
        (None, Some(e)) => return Err(e.into()),
        (None, None) => unreachable!("16 candidates give 8 pairs"),
    };
    run.write_csv("c7_step_translates.csv", &TRANSLATE_HEADER, translate_rows(&step_rows))?;
    let locks = step_rows.iter().position(|r| r.fixed_window_discrepancy == 0.0);
    Ok(Outcome {
        id: 7,
        title: "translate convergence",
        passed: nonincreasing && last < 1e-3 && locks.is_some(),
        detail: format!(
            "cosine return times {}: discrepancy nonincreasing {nonincreasing}, final {last:.3e} (< 1e-3); step discrepancy exactly 0 from row {}",
            times.join(","),
            locks.map_or("never".into(), |i| i.to_string())
        ),
    })
}

type Criterion = fn(u64, &mut Run) -> CliResult<Outcome>;

const CRITERIA: [Criterion; 7] = [
    free_lyapunov,
    free_box,
    herman,
    vanishing,
    witnesses,
    continuity,
    translates,
];

/// Evaluates criteria 1–7, writing artifacts, `report.json` and a manifest into `dir`.
pub fn run_suite(seed: u64, dir: &Path) -> CliResult<Vec<Outcome>> {
    let mut run = Run::new(dir, "suite", &format!("seed = {seed}\n"))?;
    let mut outcomes = Vec::new();
    for (i, criterion) in CRITERIA.iter().enumerate() {
        let started = Instant::now();
        let outcome = criterion(seed, &mut run);
        run.record(&format!("criterion_{}", i + 1), started.elapsed().as_secs_f64());
        match outcome {
            Ok(o) => outcomes.push(o),
            Err(e) => {
                let message = e.to_string();
                run.finish(Some(&message))?;
                return Err(e);
            }
        }
    }
    run.write_json(
        "report.json",
        &json!({ "seed": seed.to_string(), "criteria": outcomes.iter().map(outcome_json).collect::<Vec<_>>() }),
    )?;
    run.finish(None)?;
    Ok(outcomes)
}

fn outcome_json(o: &Outcome) -> Value {
    json!({ "id": o.id, "title": o.title, "passed": o.passed, "detail": o.detail })
}

fn files_under(root: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path.strip_prefix(root).expect("under root").to_path_buf());
            }
        }
    }
    out.sort();
    Ok(out)
}

fn stable_manifest(bytes: &[u8]) -> Option<Value> {
    let mut v: Value = serde_json::from_slice(bytes).ok()?;
    let map = v.as_object_mut()?;
    for key in VOLATILE_MANIFEST_KEYS {
        map.remove(key);
    }
    Some(v)
}

/// Files that differ between two artifact trees (manifests compared without
/// their timing and thread-count fields).
pub fn compare_trees(a: &Path, b: &Path) -> std::io::Result<Vec<String>> {
    let (fa, fb) = (files_under(a)?, files_under(b)?);
    let mut diffs = Vec::new();
    let all: BTreeMap<&PathBuf, ()> = fa.iter().chain(&fb).map(|p| (p, ())).collect();
    for rel in all.keys() {
        let (pa, pb) = (a.join(rel), b.join(rel));
        if !pa.exists() || !pb.exists() {
            diffs.push(format!("{} present in only one run", rel.display()));
            continue;
        }
        let (ba, bb) = (fs::read(&pa)?, fs::read(&pb)?);
        let same = if rel.file_name().is_some_and(|n| n == MANIFEST) {
            stable_manifest(&ba).is_some() && stable_manifest(&ba) == stable_manifest(&bb)
        } else {
            ba == bb
        };
        if !same {
            diffs.push(format!("{} differs", rel.display()));
        }
    }
    Ok(diffs)
}

/// Runs the suite once per entry of [`THREAD_COUNTS`] under `dir/threads-N`,
/// adds the determinism criterion and writes `report.txt`/`report.json`.
/// Returns the report text, one line per criterion.
pub fn reproduce(seed: u64, dir: &Path) -> CliResult<String> {
    let mut run = Run::new(dir, "reproduce", &format!("seed = {seed}\n"))?;
    let mut per_threads = Vec::new();
    for threads in THREAD_COUNTS {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {threads} worker threads: {e}")))?;
        let sub = dir.join(format!("threads-{threads}"));
        if sub.exists() {
            fs::remove_dir_all(&sub)?;
        }
        let outcomes = run.time(&format!("suite_threads_{threads}"), || {
            pool.install(|| run_suite(seed, &sub))
        })?;
        per_threads.push((sub, outcomes));
    }
    let (first_dir, mut outcomes) = per_threads.remove(0);
    let mut diffs = Vec::new();
    let mut consistent = true;
    for (other_dir, other) in &per_threads {
        diffs.extend(compare_trees(&first_dir, other_dir)?);
        consistent &= *other == outcomes;
    }
    outcomes.push(Outcome {
        id: 8,
        title: "toolchain determinism",
        passed: diffs.is_empty() && consistent,
        detail: if diffs.is_empty() {
            format!("artifacts byte-identical at {THREAD_COUNTS:?} threads")
        } else {
            format!("{} differing artifacts: {}", diffs.len(), diffs.join("; "))
        },
    });
    let text: String = outcomes.iter().map(|o| o.line() + "\n").collect();
    run.write("report.txt", &text)?;
    run.write_json(
        "report.json",
        &json!({ "seed": seed.to_string(), "criteria": outcomes.iter().map(outcome_json).collect::<Vec<_>>() }),
    )?;
    run.finish(None)?;
    Ok(text)
}
