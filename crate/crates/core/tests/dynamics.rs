use ergodic_core::dynamics::{continued_fraction, return_times, sample_points, Dynamics, Point, TorusPoint};
use num_bigint::BigUint;
use proptest::prelude::*;

fn two_pow_64() -> BigUint {
    BigUint::from(1u8) << 64usize
}

#[test]
fn named_constants_are_floors_of_the_irrationals() {
    // floor(2^64 (√5 − 1)/2) = floor((isqrt(5·2^128) − 2^64) / 2)
    let s5 = (BigUint::from(5u8) << 128usize).sqrt();
    let golden = (s5 - two_pow_64()) >> 1;
    assert_eq!(golden, BigUint::from(TorusPoint::GOLDEN.raw()));

    let s2 = (BigUint::from(2u8) << 128usize).sqrt();
    let sqrt2m1 = s2 - two_pow_64();
    assert_eq!(sqrt2m1, BigUint::from(TorusPoint::SQRT2_MINUS_1.raw()));
}

#[test]
fn double_golden_matches_rational_oracle() {
    let d = Dynamics::rotation(TorusPoint::GOLDEN);
    let got = d.iterate(Point::Circle(TorusPoint::ZERO), 2).unwrap();
    let expect = (BigUint::from(TorusPoint::GOLDEN.raw()) * 2u8) % two_pow_64();
    assert_eq!(BigUint::from(got.circle().unwrap().raw()), expect);
}

#[test]
fn rotation_iterate_matches_bigint_for_many_n() {
    let alpha = TorusPoint::SQRT2_MINUS_1;
    let d = Dynamics::rotation(alpha);
    let omega = TorusPoint::from_raw(0x1234_5678_9ABC_DEF0);
    for &n in &[1i64, 7, 1_000_003, -5, -(1 << 40), (1 << 62) - 1] {
        let got = d.iterate(Point::Circle(omega), n).unwrap().circle().unwrap();
        let m = two_pow_64();
        let n_mod = if n >= 0 {
            BigUint::from(n as u64)
        } else {
            &m - BigUint::from(n.unsigned_abs())
        };
        let expect = (BigUint::from(omega.raw()) + n_mod * BigUint::from(alpha.raw())) % &m;
        assert_eq!(BigUint::from(got.raw()), expect, "n = {n}");
    }
}

fn dynamics_strategy() -> impl Strategy<Value = Dynamics> {
    prop_oneof![
        any::<u64>().prop_map(|a| Dynamics::rotation(TorusPoint::from_raw(a))),
        any::<u64>().prop_map(|a| Dynamics::skew_shift(TorusPoint::from_raw(a))),
        (2u32..6, any::<u64>()).prop_map(|(k, s)| Dynamics::symbol_shift(k, s).unwrap()),
    ]
}

fn point_for(d: &Dynamics, a: u64, b: u64) -> Point {
    match d {
        Dynamics::Rotation { .. } => Point::Circle(TorusPoint::from_raw(a)),
        Dynamics::SkewShift { .. } => Point::Pair(TorusPoint::from_raw(a), TorusPoint::from_raw(b)),
        Dynamics::SymbolShift { .. } => {
            let mut p = d.origin();
            if let Point::Symbol(ref mut s) = p {
                s.offset = (a as i64) >> 3;
            }
            p
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn group_law_is_exact(
        d in dynamics_strategy(),
        a in any::<u64>(),
        b in any::<u64>(),
        m in -(1i64 << 61)..(1i64 << 61),
        n in -(1i64 << 61)..(1i64 << 61),
    ) {
        let w = point_for(&d, a, b);
        let lhs = d.iterate(d.iterate(w, m).unwrap(), n).unwrap();
        prop_assert_eq!(lhs, d.iterate(w, m + n).unwrap());
        prop_assert_eq!(d.iterate(d.iterate(w, n).unwrap(), -n).unwrap(), w);
    }
}

#[test]
fn golden_orbit_equidistributes() {
    let d = Dynamics::rotation(TorusPoint::GOLDEN);
    let n = 1_000_000usize;
    let orbit = d.orbit_iter(Point::Circle(TorusPoint::ZERO)).unwrap();
    let mut hits = [0usize; 3];
    let intervals = [(0.0, 0.1), (0.25, 0.75), (0.37, 0.38)];
    for p in orbit.take(n) {
        let x = p.circle().unwrap().to_f64();
        for (h, (a, b)) in hits.iter_mut().zip(intervals) {
            if x >= a && x < b {
                *h += 1;
            }
        }
    }
    for (h, (a, b)) in hits.iter().zip(intervals) {
        let frac = *h as f64 / n as f64;
        assert!((frac - (b - a)).abs() < 1e-2, "[{a},{b}): {frac}");
    }
}

fn bigint_euclid(raw: u64, depth: usize) -> Vec<BigUint> {
    let (mut num, mut den) = (BigUint::from(raw), two_pow_64());
    let mut out = vec![&num / &den];
    num %= &den;
    while num != BigUint::from(0u8) && out.len() <= depth {
        out.push(&den / &num);
        let r = &den % &num;
        den = num;
        num = r;
    }
    out
}

#[test]
fn continued_fraction_matches_bigint_euclid() {
    for raw in [
        TorusPoint::GOLDEN.raw(),
        TorusPoint::SQRT2_MINUS_1.raw(),
        12345,
        u64::MAX,
        1,
    ] {
        let cf = continued_fraction(TorusPoint::from_raw(raw), 200).unwrap();
        let expect = bigint_euclid(raw, 200);
        let got: Vec<BigUint> = cf.partial_quotients.iter().map(|&a| BigUint::from(a)).collect();
        assert_eq!(got, expect, "raw = {raw}");
        let last = cf.convergents.last().unwrap();
        // The expansion of a dyadic rational terminates at its exact value.
        assert_eq!(
            BigUint::from(last.0) * two_pow_64(),
            BigUint::from(last.1) * BigUint::from(raw)
        );
    }
}

#[test]
fn convergents_are_reduced_increasing_best_approximations() {
    for alpha in [
        TorusPoint::GOLDEN,
        TorusPoint::SQRT2_MINUS_1,
        TorusPoint::from_f64(0.2137),
    ] {
        let cf = continued_fraction(alpha, 60).unwrap();
        for w in cf.convergents.windows(2) {
            let ((p, q), (_, q_next)) = (w[0], w[1]);
            assert!(q_next > q);
            assert_eq!(num_gcd(p, q), 1);
            let d = cf.return_distance(q).to_f64();
            assert!(d <= 1.0 / q_next as f64 + 2f64.powi(-60), "q = {q}: {d}");
        }
    }
}

fn num_gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[test]
fn golden_self_returns_are_fibonacci() {
    let d = Dynamics::rotation(TorusPoint::GOLDEN);
    let cf = continued_fraction(TorusPoint::GOLDEN, 30).unwrap();
    let qs: Vec<u128> = cf.denominators().collect();
    let w = Point::Circle(TorusPoint::from_f64(0.4142));
    let r = return_times(&d, w, w, 20).unwrap();
    assert_eq!(r.len(), 20);
    for (k, rt) in r.iter().enumerate() {
        assert_eq!(rt.n as u128, qs[k]);
        assert!(rt.distance.to_f64() < 1.0 / qs[k + 1] as f64);
        // brute force minimum over 1 ≤ n ≤ q_k
        let brute = (1..=rt.n)
            .map(|n| d.iterate(w, n).unwrap().distance(&w).unwrap())
            .min()
            .unwrap();
        assert_eq!(brute, rt.distance);
    }
}

#[test]
fn inhomogeneous_returns_obey_scale_bound() {
    let d = Dynamics::rotation(TorusPoint::GOLDEN);
    let cf = continued_fraction(TorusPoint::GOLDEN, 90).unwrap();
    let qs: Vec<u128> = cf.denominators().collect();
    for (i, pair) in sample_points(&d, 40, 11).chunks(2).enumerate() {
        let r = return_times(&d, pair[0], pair[1], 8).unwrap();
        assert_eq!(r.len(), 8, "pair {i}");
        for w in r.windows(2) {
            assert!(w[1].n > w[0].n);
            assert!(w[1].distance <= w[0].distance);
        }
        for rt in &r {
            let q = qs.iter().find(|&&q| q >= rt.n as u128).unwrap();
            assert!(rt.distance.to_f64() <= 1.0 / *q as f64 + 1e-15);
        }
    }
}

#[test]
fn skew_shift_return_times_are_monotone() {
    let d = Dynamics::skew_shift(TorusPoint::GOLDEN);
    let w = Point::Pair(TorusPoint::from_f64(0.2), TorusPoint::from_f64(0.9));
    let r = return_times(&d, w, w, 6).unwrap();
    assert!(!r.is_empty());
    for pair in r.windows(2) {
        assert!(pair[1].n > pair[0].n && pair[1].distance < pair[0].distance);
    }
}
