use frugal_core::evaluation::{
    calibration, ccr, coverage, dm_test_modified, fva, hln_factor, interval_score_w, mase,
    monetize, msis, msis_with, EvalError, Loss, MsisForm, CPU_HOUR_RATE,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

/// Brute-force seasonal-naive scale with explicit indexing.
fn oracle_scale(train: &[f64], s: usize) -> f64 {
    let mut total = 0.0;
    let mut count = 0;
    let mut i = s;
    while i < train.len() {
        let diff = train[i] - train[i - s];
        total += if diff < 0.0 { -diff } else { diff };
        count += 1;
        i += 1;
    }
    total / count as f64
}

fn oracle_w(l: f64, u: f64, y: f64, alpha: f64) -> f64 {
    let below = (l - y).max(0.0);
    let above = (y - u).max(0.0);
    (u - l) + (2.0 / alpha) * below + (2.0 / alpha) * above
}

struct Case {
    train: Vec<f64>,
    test: Vec<f64>,
    point: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    alpha: f64,
    s: usize,
}

fn random_case(rng: &mut ChaCha8Rng) -> Case {
    let s = [1usize, 2, 4, 12][rng.random_range(0..4)];
    let n = s + rng.random_range(2..30);
    let h = rng.random_range(1..10);
    let mut draw = |lo: f64, hi: f64| rng.random_range(lo..hi);
    let train: Vec<f64> = (0..n).map(|_| draw(-50.0, 50.0)).collect();
    let test: Vec<f64> = (0..h).map(|_| draw(-50.0, 50.0)).collect();
    let point: Vec<f64> = (0..h).map(|_| draw(-50.0, 50.0)).collect();
    let lower: Vec<f64> = point.iter().map(|p| p - draw(0.0, 30.0)).collect();
    let upper: Vec<f64> = point.iter().map(|p| p + draw(0.0, 30.0)).collect();
    let alpha = draw(0.01, 0.5);
    Case {
        train,
        test,
        point,
        lower,
        upper,
        alpha,
        s,
    }
}

#[test]
fn metrics_match_brute_force_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let c = random_case(&mut rng);
        let h = c.test.len();
        let scale = oracle_scale(&c.train, c.s);

        let mut abs_sum = 0.0;
        let mut w_sum = 0.0;
        let mut inside = Vec::new();
        for t in 0..h {
            abs_sum += (c.test[t] - c.point[t]).abs();
            w_sum += oracle_w(c.lower[t], c.upper[t], c.test[t], c.alpha);
            inside.push(!(c.test[t] < c.lower[t] || c.test[t] > c.upper[t]));
        }
        let m = mase(&c.train, &c.test, &c.point, c.s).unwrap();
        assert!(rel_close(m, abs_sum / h as f64 / scale, 1e-12));
        let v = msis(&c.train, &c.test, &c.lower, &c.upper, c.alpha, c.s).unwrap();
        assert!(rel_close(v, w_sum / h as f64 / scale, 1e-12));
        let v = msis_with(
            &c.train,
            &c.test,
            &c.lower,
            &c.upper,
            c.alpha,
            c.s,
            MsisForm::Sum,
        )
        .unwrap();
        assert!(rel_close(v, w_sum / scale, 1e-12));
        for t in 0..h {
            let w = interval_score_w(c.lower[t], c.upper[t], c.test[t], c.alpha);
            assert!(rel_close(
                w,
                oracle_w(c.lower[t], c.upper[t], c.test[t], c.alpha),
                1e-12
            ));
        }
        assert_eq!(coverage(&c.test, &c.lower, &c.upper), inside);
    }
}

#[test]
fn hand_computed_examples() {
    assert_eq!(
        mase(&[1.0, 2.0, 3.0, 4.0], &[5.0, 6.0], &[5.0, 5.0], 1),
        Ok(0.5)
    );
    assert_eq!(mase(&[3.0, 1.0, 4.0], &[7.0, 2.0], &[7.0, 2.0], 1), Ok(0.0));
    let seasonal = [1.0, 2.0, 3.0, 4.0, 1.0, 2.0, 3.0, 4.0];
    assert_eq!(
        mase(&seasonal, &[1.0], &[2.0], 4),
        Err(EvalError::ZeroDenominator)
    );
    assert_eq!(interval_score_w(0.0, 1.0, 0.5, 0.05), 1.0);
    assert!((interval_score_w(0.0, 1.0, -0.1, 0.05) - 5.0).abs() < 1e-12);
    assert!((interval_score_w(0.0, 1.0, 1.2, 0.2) - 3.0).abs() < 1e-12);
    assert_eq!(
        msis(&[0.0, 2.0, 0.0, 2.0], &[2.0], &[1.0], &[3.0], 0.05, 1),
        Ok(1.0)
    );
}

#[test]
fn constant_width_inside_gives_width_over_scale() {
    let train = [1.0, 4.0, 2.0, 8.0, 5.0];
    let scale = (3.0 + 2.0 + 6.0 + 3.0) / 4.0;
    let test = [3.0, 4.0, 5.0];
    let lower: Vec<f64> = test.iter().map(|y| y - 1.5).collect();
    let upper: Vec<f64> = test.iter().map(|y| y + 0.5).collect();
    let v = msis(&train, &test, &lower, &upper, 0.05, 1).unwrap();
    assert!((v - 2.0 / scale).abs() < 1e-12);
}

#[test]
fn calibration_extremes() {
    let test = [1.0, 5.0, -3.0, 2.0];
    let wide = coverage(&test, &[-1e300; 4], &[1e300; 4]);
    let c = calibration(&[wide.clone(), wide]).unwrap();
    assert_eq!(c.overall, 1.0);
    assert_eq!(c.per_step, vec![1.0; 4]);
    let degenerate = coverage(&test, &[0.0; 4], &[0.0; 4]);
    assert_eq!(calibration(&[degenerate]).unwrap().overall, 0.0);
}

#[test]
fn value_added_examples() {
    let v = fva(0.942, 0.947);
    assert!((v - (-0.5308)).abs() < 1e-3 && (v * 10.0).round() / 10.0 == -0.5);
    let v = fva(0.962, 0.938);
    assert!((v - 2.4948).abs() < 1e-3 && (v * 10.0).round() / 10.0 == 2.5);
    assert_eq!(fva(0.8, 0.8), 0.0);
    assert!((ccr(0.450, 0.973) - (-116.22)).abs() < 0.01);
    assert_eq!(ccr(0.3, 0.3), 0.0);
    assert!((ccr(0.029, 0.141) - (-386.2)).abs() < 0.1);
    assert!((monetize(7.6e6 * 3600.0, CPU_HOUR_RATE) - 380_000.0).abs() < 1e-6);
    assert_eq!(monetize(0.0, CPU_HOUR_RATE), 0.0);
    assert!((monetize(3600.0, 0.05) - 0.05).abs() < 1e-15);
}

/// Unnormalised t density after the substitution x = tan(theta).
fn t_kernel(theta: f64, nu: f64) -> f64 {
    let x = theta.tan();
    let c = theta.cos();
    (1.0 + x * x / nu).powf(-(nu + 1.0) / 2.0) / (c * c)
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

/// Two-sided t tail probability by quadrature.
fn oracle_t_two_sided(t: f64, nu: f64) -> f64 {
    let half = std::f64::consts::FRAC_PI_2;
    let total = simpson(|th| t_kernel(th, nu), 0.0, half * (1.0 - 1e-12), 200_000);
    let inner = simpson(|th| t_kernel(th, nu), 0.0, t.abs().atan(), 200_000);
    1.0 - inner / total
}

fn oracle_dm(a: &[f64], b: &[f64], h: usize, squared: bool) -> Option<(f64, f64)> {
    let m = a.len();
    let loss = |e: f64| if squared { e * e } else { e.abs() };
    let d: Vec<f64> = (0..m).map(|t| loss(a[t]) - loss(b[t])).collect();
    let mut dbar = 0.0;
    for v in &d {
        dbar += v;
    }
    dbar /= m as f64;
    let mut lrv = 0.0;
    for k in 0..h {
        let mut g = 0.0;
        for t in k..m {
            g += (d[t] - dbar) * (d[t - k] - dbar);
        }
        g /= m as f64;
        lrv += if k == 0 { g } else { 2.0 * g };
    }
    if lrv <= 0.0 {
        return None;
    }
    let (mf, hf) = (m as f64, h as f64);
    let stat =
        dbar / (lrv / mf).sqrt() * ((mf + 1.0 - 2.0 * hf + hf * (hf - 1.0) / mf) / mf).sqrt();
    Some((stat, oracle_t_two_sided(stat, mf - 1.0)))
}

#[test]
fn dm_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut checked = 0;
    while checked < 50 {
        let m = rng.random_range(4..80);
        let h = rng.random_range(1..=(m - 1).min(6));
        let squared = rng.random_bool(0.5);
        let a: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..m)
            .map(|_| {
                let e: f64 = StandardNormal.sample(&mut rng);
                1.3 * e
            })
            .collect();
        let loss = if squared {
            Loss::Squared
        } else {
            Loss::Absolute
        };
        match oracle_dm(&a, &b, h, squared) {
            Some((stat, p)) => {
                let r = dm_test_modified(&a, &b, h, loss).unwrap();
                assert!(
                    rel_close(r.statistic, stat, 1e-9),
                    "{} vs {}",
                    r.statistic,
                    stat
                );
                assert!((r.p_value - p).abs() < 1e-9, "{} vs {}", r.p_value, p);
                checked += 1;
            }
            None => assert_eq!(
                dm_test_modified(&a, &b, h, loss),
                Err(EvalError::DegenerateVariance)
            ),
        }
    }
}

#[test]
fn dm_one_step_factor_is_exact() {
    for m in 4..500 {
        assert_eq!(hln_factor(m, 1), ((m as f64 - 1.0) / m as f64).sqrt());
    }
}

#[test]
fn dm_detects_a_shifted_loss() {
    let mut rejections = 0;
    for rep in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(10_000 + rep);
        let shift = Exp::new(10.0).unwrap();
        let b: Vec<f64> = (0..200).map(|_| StandardNormal.sample(&mut rng)).collect();
        let a: Vec<f64> = b
            .iter()
            .map(|e: &f64| e.abs() + shift.sample(&mut rng))
            .collect();
        let r = dm_test_modified(&a, &b, 1, Loss::Absolute).unwrap();
        if r.p_value < 0.05 && r.statistic > 0.0 {
            rejections += 1;
        }
    }
    assert!(rejections >= 95, "{rejections}/100");
}

fn finite_vec(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, len)
}

proptest! {
    #[test]
    fn mase_and_msis_are_scale_invariant(
        train in finite_vec(12),
        test in finite_vec(4),
        point in finite_vec(4),
        spread in prop::collection::vec(0.0f64..20.0, 4),
        c in 0.01f64..100.0,
    ) {
        let lower: Vec<f64> = point.iter().zip(&spread).map(|(p, s)| p - s).collect();
        let upper: Vec<f64> = point.iter().zip(&spread).map(|(p, s)| p + s).collect();
        let scale = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| x * c).collect() };
        if let Ok(m) = mase(&train, &test, &point, 2) {
            let ms = mase(&scale(&train), &scale(&test), &scale(&point), 2).unwrap();
            prop_assert!(rel_close(m, ms, 1e-12));
            let s1 = msis(&train, &test, &lower, &upper, 0.05, 2).unwrap();
            let s2 = msis(&scale(&train), &scale(&test), &scale(&lower), &scale(&upper), 0.05, 2).unwrap();
            prop_assert!(rel_close(s1, s2, 1e-12));
        }
    }

    #[test]
    fn score_is_at_least_the_width(l in -50.0f64..50.0, w in 0.0f64..50.0, y in -100.0f64..100.0, alpha in 0.01f64..0.99) {
        let u = l + w;
        let s = interval_score_w(l, u, y, alpha);
        prop_assert!(s >= u - l);
        prop_assert_eq!(s == u - l, l <= y && y <= u);
    }

    #[test]
    fn widening_inside_intervals_raises_msis(delta in 0.001f64..10.0) {
        let train = [2.0, 5.0, 3.0, 6.0, 4.0];
        let test = [4.0, 5.0];
        let lo = [3.0, 4.0];
        let hi = [5.0, 6.0];
        let wlo: Vec<f64> = lo.iter().map(|v| v - delta).collect();
        let whi: Vec<f64> = hi.iter().map(|v| v + delta).collect();
        let base = msis(&train, &test, &lo, &hi, 0.1, 1).unwrap();
        let wide = msis(&train, &test, &wlo, &whi, 0.1, 1).unwrap();
        prop_assert!(wide > base);
    }

    #[test]
    fn fva_signs_are_opposite(a in 0.01f64..10.0, b in 0.01f64..10.0) {
        prop_assume!((a - b).abs() > 1e-9);
        prop_assert!(fva(a, b).signum() == -fva(b, a).signum());
    }

    #[test]
    fn dm_swap_negates(a in finite_vec(20), b in finite_vec(20), h in 1usize..4) {
        if let (Ok(x), Ok(y)) = (
            dm_test_modified(&a, &b, h, Loss::Squared),
            dm_test_modified(&b, &a, h, Loss::Squared),
        ) {
            prop_assert!((x.statistic + y.statistic).abs() <= 1e-12 * x.statistic.abs().max(1.0));
            prop_assert!((x.p_value - y.p_value).abs() < 1e-12);
        }
    }
}
