use ergodic_core::cocycle::{lyapunov, EnergyGrid, LyapunovSettings};
use ergodic_core::dynamics::{sample_points, Dynamics, Point, TorusPoint};
use ergodic_core::sampling::SamplingFunction;
use ergodic_core::spectra::{box_eigenvalues, ids, spectrum_approx, thouless_gamma, EigenSample, JacobiMatrix};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

/// Coefficients (constant term first) of det(x − J) via the three-term recurrence.
fn char_poly(diag: &[f64]) -> Vec<f64> {
    let mut prev = vec![1.0];
    let mut cur = vec![-diag[0], 1.0];
    for &d in &diag[1..] {
        let mut next = vec![0.0; cur.len() + 1];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= d * c;
        }
        for (i, &p) in prev.iter().enumerate() {
            next[i] -= p;
        }
        prev = cur;
        cur = next;
    }
    cur
}

fn eval(poly: &[f64], z: Complex64) -> Complex64 {
    poly.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Durand–Kerner on a monic polynomial, then Newton polishing on the real parts.
fn poly_roots(poly: &[f64]) -> Vec<f64> {
    let n = poly.len() - 1;
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * 3.0).collect();
    for _ in 0..2000 {
        let prev = z.clone();
        for i in 0..n {
            let denom = (0..n)
                .filter(|&j| j != i)
                .fold(Complex64::new(1.0, 0.0), |acc, j| acc * (z[i] - z[j]));
            let step = eval(poly, z[i]) / denom;
            z[i] -= step;
        }
        if z.iter().zip(&prev).all(|(a, b)| (a - b).norm() < 1e-15) {
            break;
        }
    }
    let dpoly: Vec<f64> = poly.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect();
    let mut roots: Vec<f64> = z
        .iter()
        .map(|r| {
            let mut x = r.re;
            for _ in 0..5 {
                let d = eval(&dpoly, x.into()).re;
                if d != 0.0 {
                    x -= eval(poly, x.into()).re / d;
                }
            }
            x
        })
        .collect();
    roots.sort_by(f64::total_cmp);
    roots
}

fn diag_strategy(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, 1..=max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn bisection_matches_characteristic_polynomial_roots(diag in diag_strategy(8)) {
        let got = JacobiMatrix::new(diag.clone()).unwrap().eigenvalues(1e-13).unwrap();
        let want = poly_roots(&char_poly(&diag));
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() < 1e-8, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn eigenvalues_interlace_with_the_sub_box(diag in prop::collection::vec(-3.0f64..3.0, 2..16)) {
        let full = JacobiMatrix::new(diag.clone()).unwrap().eigenvalues(1e-14).unwrap();
        let sub = JacobiMatrix::new(diag[..diag.len() - 1].to_vec()).unwrap().eigenvalues(1e-14).unwrap();
        for (i, &mu) in sub.iter().enumerate() {
            prop_assert!(full[i] < mu && mu < full[i + 1], "{i}: {} {mu} {}", full[i], full[i + 1]);
        }
    }

    #[test]
    fn trace_equals_eigenvalue_sum(diag in prop::collection::vec(-5.0f64..5.0, 1..300)) {
        let j = JacobiMatrix::new(diag).unwrap();
        let sum: f64 = j.eigenvalues(1e-13).unwrap().iter().sum();
        prop_assert!((sum - j.trace()).abs() <= 1e-9 * j.len() as f64);
    }

    #[test]
    fn eigenvalues_respect_gershgorin(diag in prop::collection::vec(-5.0f64..5.0, 1..100)) {
        let j = JacobiMatrix::new(diag).unwrap();
        let (lo, hi) = j.gershgorin();
        let ev = j.eigenvalues(1e-12).unwrap();
        prop_assert_eq!(ev.len(), j.len());
        prop_assert!(ev.iter().all(|&e| lo <= e && e <= hi));
    }

    #[test]
    fn ids_is_nondecreasing(lambda in 0.5f64..5.0, seed in any::<u64>()) {
        let d = Dynamics::rotation(TorusPoint::GOLDEN);
        let f = SamplingFunction::cosine(lambda).unwrap();
        let grid = EnergyGrid::new(-lambda - 3.0, lambda + 3.0, 101).unwrap();
        let t = ids(&f, &d, 40, &sample_points(&d, 3, seed), grid, 1e-12).unwrap();
        prop_assert!(t.k_values.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(t.k_values[0], 0.0);
        prop_assert_eq!(*t.k_values.last().unwrap(), 1.0);
    }
}

fn free() -> (SamplingFunction, Dynamics) {
    (
        SamplingFunction::constant(0.0).unwrap(),
        Dynamics::rotation(TorusPoint::GOLDEN),
    )
}

fn free_sample(n: usize) -> EigenSample {
    let (f, d) = free();
    box_eigenvalues(&f, &d, &[d.origin()], n, 1, 1e-12).unwrap()
}

#[test]
fn free_ids_matches_arccos_law() {
    let (f, d) = free();
    let n = 200;
    let grid = EnergyGrid::new(-2.5, 2.5, 201).unwrap();
    let t = ids(&f, &d, n, &[d.origin()], grid, 1e-12).unwrap();
    for (&e, &k) in t.energies.iter().zip(&t.k_values) {
        let want = if e <= -2.0 {
            0.0
        } else if e >= 2.0 {
            1.0
        } else {
            (-e / 2.0).acos() / PI
        };
        assert!((k - want).abs() <= 2.0 / n as f64, "E={e}: {k} vs {want}");
    }
    assert_eq!(t.max_boundary_sensitivity, 0.0);
}

#[test]
fn ids_saturates_outside_gershgorin() {
    let d = Dynamics::rotation(TorusPoint::SQRT2_MINUS_1);
    let f = SamplingFunction::step(vec![TorusPoint::ZERO, TorusPoint::HALF], vec![-1.0, 2.0]).unwrap();
    let grid = EnergyGrid::new(-3.0 - 1e-9, 4.0 + 1e-9, 2).unwrap();
    let t = ids(&f, &d, 64, &sample_points(&d, 4, 3), grid, 1e-12).unwrap();
    assert_eq!(t.k_values, vec![0.0, 1.0]);
}

#[test]
fn ids_rejects_small_boxes() {
    let (f, d) = free();
    assert!(ids(&f, &d, 7, &[d.origin()], EnergyGrid::new(-1.0, 1.0, 3).unwrap(), 1e-12).is_err());
}

#[test]
fn thouless_free_outside_band() {
    let s = free_sample(2000);
    let t = thouless_gamma(3.0, &s, None).unwrap();
    assert!((t.gamma - 1.5f64.acosh()).abs() < 0.02, "{}", t.gamma);
    assert_eq!(t.excluded, 0);
}

#[test]
fn thouless_far_energy_is_log_e() {
    let d = Dynamics::rotation(TorusPoint::GOLDEN);
    let f = SamplingFunction::cosine(3.0).unwrap();
    let s = box_eigenvalues(&f, &d, &sample_points(&d, 4, 8), 300, 1, 1e-12).unwrap();
    let t = thouless_gamma(100.0, &s, None).unwrap();
    assert!((t.gamma / 100f64.ln() - 1.0).abs() < 0.01);
}

#[test]
fn thouless_matches_cocycle_on_free_band() {
    let s = free_sample(1000);
    let (f, d) = free();
    let settings = LyapunovSettings::with_steps(100_000);
    for e in EnergyGrid::new(-2.0, 2.0, 50).unwrap().energies() {
        let t = thouless_gamma(e, &s, None).unwrap();
        if t.ill_conditioned {
            continue;
        }
        let g = lyapunov(e, &f, &d, d.origin(), settings).unwrap();
        assert!((t.gamma - g.gamma).abs() < 0.02, "E={e}: {} vs {}", t.gamma, g.gamma);
    }
}

#[test]
fn thouless_matches_cocycle_on_cosine_spectrum() {
    let d = Dynamics::rotation(TorusPoint::GOLDEN);
    let f = SamplingFunction::cosine(4.0).unwrap();
    let s = box_eigenvalues(&f, &d, &sample_points(&d, 4, 21), 1000, 1, 1e-11).unwrap();
    let (lo, hi) = (s.values[0], *s.values.last().unwrap());
    let settings = LyapunovSettings::with_steps(200_000);
    let omega = sample_points(&d, 1, 5)[0];
    let mut checked = 0;
    for e in EnergyGrid::new(lo, hi, 50).unwrap().energies() {
        let t = thouless_gamma(e, &s, None).unwrap();
        if t.ill_conditioned {
            continue;
        }
        let g = lyapunov(e, &f, &d, omega, settings).unwrap();
        assert!((t.gamma - g.gamma).abs() < 0.02, "E={e}: {} vs {}", t.gamma, g.gamma);
        assert!(t.gamma > 2f64.ln() - 0.02);
        checked += 1;
    }
    assert!(checked >= 45);
}

#[test]
fn free_spectrum_is_one_band() {
    let (f, d) = free();
    let n = 500;
    let gap = 0.01;
    let iv = spectrum_approx(&f, &d, n, &[d.origin()], 1e-12, gap).unwrap();
    assert_eq!(iv.len(), 1);
    assert!((iv[0].0 + 2.0).abs() <= gap + 1.0 / n as f64);
    assert!((iv[0].1 - 2.0).abs() <= gap + 1.0 / n as f64);
}

#[test]
fn constant_potential_shifts_the_band() {
    let d = Dynamics::rotation(TorusPoint::GOLDEN);
    let (c, n, gap) = (1.75, 500, 0.01);
    let f = SamplingFunction::constant(c).unwrap();
    let iv = spectrum_approx(&f, &d, n, &[d.origin()], 1e-12, gap).unwrap();
    assert_eq!(iv.len(), 1);
    assert!((iv[0].0 - (c - 2.0)).abs() <= gap + 1.0 / n as f64);
    assert!((iv[0].1 - (c + 2.0)).abs() <= gap + 1.0 / n as f64);
}

#[test]
fn step_spectrum_stays_in_envelope() {
    let d = Dynamics::rotation(TorusPoint::GOLDEN);
    let lambda = 12.0;
    let f = SamplingFunction::step(vec![TorusPoint::ZERO, TorusPoint::HALF], vec![0.0, lambda]).unwrap();
    let gap = 0.05;
    let iv = spectrum_approx(&f, &d, 300, &sample_points(&d, 3, 4), 1e-12, gap).unwrap();
    assert!(iv.len() >= 2);
    let bound = f.bound();
    assert!(iv
        .iter()
        .all(|&(lo, hi)| lo >= -bound - 2.0 - gap && hi <= bound + 2.0 + gap));
    assert!(iv.windows(2).all(|w| w[0].1 < w[1].0));
}

#[test]
fn symbol_shift_boxes_work() {
    let d = Dynamics::symbol_shift(2, 17).unwrap();
    let f = SamplingFunction::symbol_table(vec![0.0, 1.0]).unwrap();
    let omegas: Vec<Point> = sample_points(&d, 2, 9);
    let s = box_eigenvalues(&f, &d, &omegas, 100, 1, 1e-12).unwrap();
    assert_eq!(s.values.len(), 200);
    assert!(s.values.iter().all(|&e| (-2.0..=3.0).contains(&e)));
}
