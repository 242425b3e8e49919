use std::collections::{BTreeSet, HashMap};

use ergodic_core::determinism::{
    construct_witness, defect_profile, translate_convergence, witness_search, witness_search_over, Side,
};
use ergodic_core::dynamics::{sample_points, Dynamics, Point, TorusPoint};
use ergodic_core::sampling::{potential, CosinePiece, SamplingFunction};
use ergodic_core::Error;
use std::f64::consts::PI;

fn golden() -> Dynamics {
    Dynamics::rotation(TorusPoint::GOLDEN)
}

fn step() -> SamplingFunction {
    SamplingFunction::step(vec![TorusPoint::ZERO, TorusPoint::HALF], vec![1.0, 0.0]).unwrap()
}

fn grid(count: u64) -> Vec<Point> {
    (0..count)
        .map(|i| Point::Circle(TorusPoint::from_ratio(i, count)))
        .collect()
}

/// All pairs `(a, b)`, `a < b`, whose left windows agree within `eps` and whose
/// values at 0 differ by at least `delta_min` (and by something).
fn brute_force(
    f: &SamplingFunction,
    d: &Dynamics,
    points: &[Point],
    m: usize,
    eps: f64,
    delta_min: f64,
) -> BTreeSet<(Point, Point)> {
    let windows: Vec<Vec<f64>> = points
        .iter()
        .map(|&w| potential(f, d, w, -(m as i64), 0).unwrap().values)
        .collect();
    let mut out = BTreeSet::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let (a, b) = (&windows[i], &windows[j]);
            let close = a[..m].iter().zip(&b[..m]).all(|(x, y)| (x - y).abs() <= eps);
            let gap = (a[m] - b[m]).abs();
            if close && gap >= delta_min && gap > 0.0 {
                out.insert((points[i].min(points[j]), points[i].max(points[j])));
            }
        }
    }
    out
}

fn found(
    f: &SamplingFunction,
    d: &Dynamics,
    points: Vec<Point>,
    m: usize,
    eps: f64,
    dmin: f64,
) -> BTreeSet<(Point, Point)> {
    let s = witness_search_over(f, d, points, m, eps, dmin, usize::MAX).unwrap();
    assert_eq!(s.pairs.len() as u64, s.pairs_found);
    s.pairs.iter().map(|p| (p.omega_a, p.omega_b)).collect()
}

#[test]
fn exact_search_matches_all_pairs_oracle() {
    let points = grid(10_000);
    for (f, m) in [
        (step(), 10),
        (step(), 3),
        (
            SamplingFunction::step(
                vec![TorusPoint::ZERO, TorusPoint::from_f64(0.2), TorusPoint::from_f64(0.7)],
                vec![0.0, 2.0, 1.0],
            )
            .unwrap(),
            6,
        ),
    ] {
        let oracle = brute_force(&f, &golden(), &points, m, 0.0, 0.5);
        let got = found(&f, &golden(), points.clone(), m, 0.0, 0.5);
        assert!(!oracle.is_empty());
        assert!(
            got.is_superset(&oracle),
            "lost {} pairs",
            oracle.difference(&got).count()
        );
        assert_eq!(got, oracle);
    }
}

#[test]
fn coarse_search_pairs_are_true_pairs() {
    let f = SamplingFunction::cosine(2.0).unwrap();
    let points = grid(3000);
    let eps = 0.05;
    let oracle = brute_force(&f, &golden(), &points, 2, eps, 0.0);
    let got = found(&f, &golden(), points, 2, eps, 0.0);
    assert!(!got.is_empty());
    assert!(got.is_subset(&oracle));
}

#[test]
fn pairs_are_canonical_and_order_free() {
    let f = step();
    let points = sample_points(&golden(), 5000, 4);
    let mut reversed = points.clone();
    reversed.reverse();
    let a = witness_search_over(&f, &golden(), points, 8, 0.0, 0.9, usize::MAX).unwrap();
    let b = witness_search_over(&f, &golden(), reversed, 8, 0.0, 0.9, usize::MAX).unwrap();
    assert!(a.pairs.iter().all(|p| p.omega_a < p.omega_b && p.verify()));
    let set = |s: &ergodic_core::determinism::WitnessSearch| -> BTreeSet<(Point, Point)> {
        s.pairs.iter().map(|p| (p.omega_a, p.omega_b)).collect()
    };
    assert_eq!(set(&a), set(&b));
    assert_eq!(a.pairs_found, b.pairs_found);
}

#[test]
fn step_witnesses_for_every_window() {
    for m in [5, 10, 20, 40] {
        let w = construct_witness(&step(), &golden(), TorusPoint::HALF, m, (Side::Left, Side::Right), 0.0).unwrap();
        assert_eq!((w.eps, w.delta), (0.0, 1.0), "m={m}");
        assert!(w.verify());
        let flipped =
            construct_witness(&step(), &golden(), TorusPoint::HALF, m, (Side::Right, Side::Left), 0.0).unwrap();
        assert_eq!((flipped.omega_a, flipped.omega_b), (w.omega_a, w.omega_b));
    }
}

#[test]
fn step_witness_at_zero_wraps() {
    let w = construct_witness(&step(), &golden(), TorusPoint::ZERO, 12, (Side::Left, Side::Right), 0.0).unwrap();
    assert_eq!(w.delta, 1.0);
    assert!(w.verify());
}

#[test]
fn piecewise_cosine_witness_keeps_half_the_jump() {
    let b = TorusPoint::from_f64(0.4);
    let f = SamplingFunction::piecewise_cosine(
        vec![TorusPoint::ZERO, b],
        vec![
            CosinePiece {
                amplitude: 1.0,
                phase: 0.0,
            },
            CosinePiece {
                amplitude: 2.0,
                phase: 1.0,
            },
        ],
    )
    .unwrap();
    let jump = f.one_sided_limits(b).unwrap().jump;
    assert!(jump > 0.1);
    let w = construct_witness(&f, &golden(), b, 10, (Side::Left, Side::Right), 1e-6).unwrap();
    assert!(w.eps <= 1e-6);
    assert!(w.delta >= jump / 2.0);
    assert!(w.verify());
}

#[test]
fn unsupported_inputs() {
    let skew = Dynamics::skew_shift(TorusPoint::GOLDEN);
    assert!(matches!(
        construct_witness(&step(), &skew, TorusPoint::HALF, 5, (Side::Left, Side::Right), 0.0),
        Err(Error::UnsupportedDynamics(_))
    ));
    let f = SamplingFunction::cosine(1.0).unwrap();
    assert!(matches!(
        construct_witness(&f, &golden(), TorusPoint::HALF, 5, (Side::Left, Side::Right), 0.0),
        Err(Error::Guard(_))
    ));
}

/// Independent float scan: left codes of the step over a fine grid.
fn step_codes_split(m: i64, count: u64) -> bool {
    let alpha = (5f64.sqrt() - 1.0) / 2.0;
    let mut seen: HashMap<u64, [bool; 2]> = HashMap::new();
    for i in 0..count {
        let x = i as f64 / count as f64;
        let code = (1..=m).fold(0u64, |c, k| {
            let y = (x - k as f64 * alpha).rem_euclid(1.0);
            (c << 1) | u64::from(y < 0.5)
        });
        seen.entry(code).or_default()[usize::from(x < 0.5)] = true;
    }
    seen.values().any(|s| s[0] && s[1])
}

#[test]
fn step_search_finds_verified_pairs() {
    assert!(step_codes_split(10, 1_000_000));
    let s = witness_search(&step(), &golden(), 10, 0.0, 0.9, 100_000, 7).unwrap();
    assert!(!s.pairs.is_empty());
    assert!(s.pairs_found >= s.pairs.len() as u64);
    assert!(s.pairs.iter().all(|p| p.verify() && p.eps == 0.0 && p.delta == 1.0));
}

#[test]
fn cosine_search_is_empty() {
    for lambda in [1.0, 2.0, 4.0] {
        let f = SamplingFunction::cosine(lambda).unwrap();
        let s = witness_search(&f, &golden(), 10, 1e-6, 0.5, 100_000, 3).unwrap();
        assert!(s.pairs.is_empty());
        assert_eq!(s.pairs_found, 0);
    }
}

#[test]
fn step_defect_is_the_jump() {
    let p = defect_profile(&step(), &golden(), &[1, 5, 10, 20, 40], 0.0, 100_000, 11).unwrap();
    assert_eq!(p.defect, vec![1.0; 5]);
    assert!(p.pairs_found.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn defect_vanishes_once_codes_separate() {
    let f = SamplingFunction::step(
        vec![TorusPoint::ZERO, TorusPoint::from_f64(0.3), TorusPoint::from_f64(0.55)],
        vec![0.0, 1.0, 2.0],
    )
    .unwrap();
    let d = golden();
    let samples = 40;
    let p = defect_profile(&f, &d, &[1, 4, 16, 64, 256], 0.0, samples, 5).unwrap();
    assert!(p.defect.windows(2).all(|w| w[0] >= w[1]));
    let points = sample_points(&d, samples, 5);
    for (&m, &defect) in p.m_values.iter().zip(&p.defect) {
        let lefts: Vec<Vec<f64>> = points
            .iter()
            .map(|&w| potential(&f, &d, w, -(m as i64), -1).unwrap().values)
            .collect();
        let distinct: BTreeSet<Vec<u64>> = lefts.iter().map(|v| v.iter().map(|x| x.to_bits()).collect()).collect();
        if distinct.len() == samples {
            assert_eq!(defect, 0.0, "m={m}");
        }
    }
    assert_eq!(*p.defect.last().unwrap(), 0.0);
}

#[test]
fn cosine_defect_is_small_and_monotone() {
    for lambda in [1.0, 2.0, 4.0] {
        let f = SamplingFunction::cosine(lambda).unwrap();
        let ms = [5, 10, 20];
        let mut last: Option<Vec<f64>> = None;
        for eps in [1e-5, 1e-4, 1e-3] {
            let p = defect_profile(&f, &golden(), &ms, eps, 50_000, 9).unwrap();
            assert!(p.defect.windows(2).all(|w| w[0] >= w[1]), "{p:?}");
            for &d in &p.defect {
                assert!(d <= 10.0 * 2.0 * PI * lambda * eps, "λ={lambda} eps={eps}: {d}");
            }
            if let Some(prev) = &last {
                assert!(prev.iter().zip(&p.defect).all(|(a, b)| a <= b));
            }
            last = Some(p.defect);
        }
    }
}

#[test]
fn cosine_translates_obey_lipschitz_bound() {
    let lambda = 2.0;
    let f = SamplingFunction::cosine(lambda).unwrap();
    let d = golden();
    let omega = Point::Circle(TorusPoint::from_f64(0.1));
    let omega1 = Point::Circle(TorusPoint::from_f64(0.37));
    let rows = translate_convergence(&f, &d, omega, omega1, 12).unwrap();
    assert_eq!(rows.len(), 12);
    for r in &rows {
        let bound = 2.0 * PI * lambda * r.distance.to_f64();
        assert!(r.discrepancy <= r.fixed_window_discrepancy);
        assert!(r.fixed_window_discrepancy <= bound * (1.0 + 1e-9) + 1e-12, "{r:?}");
    }
    assert!(rows
        .windows(2)
        .all(|w| w[1].fixed_window_discrepancy <= w[0].fixed_window_discrepancy));
}

#[test]
fn step_translates_lock_in() {
    let f = step();
    let d = golden();
    let omega = d.origin();
    let omega1 = Point::Circle(TorusPoint::from_f64(0.3));
    let depth = 10;
    let rows = translate_convergence(&f, &d, omega, omega1, depth).unwrap();
    let margin = (-(depth as i64)..=depth as i64)
        .map(|n| {
            let x = d.iterate(omega1, n).unwrap().circle().unwrap();
            x.distance(TorusPoint::ZERO).min(x.distance(TorusPoint::HALF))
        })
        .min()
        .unwrap();
    for r in &rows {
        if r.distance < margin {
            assert_eq!(r.fixed_window_discrepancy, 0.0, "{r:?}");
        }
    }
    assert_eq!(rows.last().unwrap().fixed_window_discrepancy, 0.0);
}

#[test]
fn translate_refuses_breakpoint_orbits() {
    let e = translate_convergence(
        &step(),
        &golden(),
        golden().origin(),
        Point::Circle(TorusPoint::GOLDEN),
        4,
    );
    assert!(matches!(e, Err(Error::Guard(_))));
}
