//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use frugal_core::arima::{arima_fit, count_order_tuples};
use frugal_core::ets::{ets_forecast, ets_select, EtsParams, EtsState};
use frugal_core::evaluation::{
    coverage, dm_test_modified, hln_factor, interval_score_w, mase, msis_with,
    seasonal_naive_scale, EvalError, Loss, MsisForm,
};
use frugal_core::harness::{fva_table, run_benchmark, BenchReport, ExperimentConfig, PoolScoreRow};
use frugal_core::pools::{
    criterion_value, criterion_value_with, enumerate_balanced_pools, ets_pool, profile_class,
    AiccForm, CriterionKind, EtsPoolName,
};
use frugal_core::{load_dataset, ArimaOrder, DataFormat, EtsFit, EtsModelSpec};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

type Outcome = Result<String, String>;

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/m3")
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let sizes = |seasonal: bool| -> Vec<usize> {
        EtsPoolName::ALL
            .iter()
            .map(|&n| ets_pool(n, seasonal).len())
            .collect()
    };
    let seasonal = sizes(true);
    let plain = sizes(false);
    let tuples: Vec<usize> = (1..=8).map(|k| count_order_tuples(k, true)).collect();
    let models = EtsModelSpec::applicable();
    let plain_pools = enumerate_balanced_pools(&models, false).map_err(|e| e.to_string())?;
    let (plain_total, plain_count) = (plain_pools.total(), plain_pools.count() as u64);
    let seasonal_pools = enumerate_balanced_pools(&models, true).map_err(|e| e.to_string())?;
    let (seasonal_total, seasonal_count) = (seasonal_pools.total(), seasonal_pools.count() as u64);
    let secs = started.elapsed().as_secs_f64();
    let ok = seasonal == [19, 15, 12, 16, 8]
        && plain == [8, 6, 5, 8, 4]
        && tuples == [5, 15, 35, 70, 126, 210, 330, 495]
        && (plain_total, plain_count) == (189, 189)
        && (seasonal_total, seasonal_count) == (337_365, 337_365)
        && secs < 1.0;
    ensure(
        ok,
        format!(
            "pools {seasonal:?} / {plain:?}, tuples {tuples:?}, balanced {plain_count} and {seasonal_count}, {secs:.3}s"
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let log_lik = rng.random_range(-5000.0..500.0);
        let k = rng.random_range(1..30usize);
        let n = rng.random_range(k + 2..k + 500);
        let (l, kf, nf) = (log_lik, k as f64, n as f64);
        let aic = 2.0 * kf - 2.0 * l;
        let bic = kf * nf.ln() - 2.0 * l;
        let aicc = aic + (2.0 * kf * kf + 2.0 * kf) / (nf - kf - 1.0);
        let ours = [
            criterion_value(l, k, n, CriterionKind::Aic).unwrap(),
            criterion_value(l, k, n, CriterionKind::Bic).unwrap(),
            criterion_value(l, k, n, CriterionKind::Aicc).unwrap(),
        ];
        for (a, b) in ours.iter().zip([aic, bic, aicc]) {
            worst = worst.max((a - b).abs() / b.abs());
        }
        let halved = criterion_value_with(l, k, n, CriterionKind::Aicc, AiccForm::Paper).unwrap();
        let gap = ours[2] - halved;
        let expected = kf * (kf + 1.0) / (nf - kf - 1.0);
        if !rel_close(gap, expected, 1e-9) {
            return Err(format!("AICc forms differ by {gap}, expected {expected}"));
        }
    }
    ensure(
        worst <= 1e-12,
        format!("20 triples, worst relative error {worst:.2e}"),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..100 {
        let s = [1usize, 4, 12][rng.random_range(0..3)];
        let n = s + rng.random_range(2..25);
        let h = rng.random_range(1..8);
        let train: Vec<f64> = (0..n).map(|_| rng.random_range(-20.0..20.0)).collect();
        let test: Vec<f64> = (0..h).map(|_| rng.random_range(-20.0..20.0)).collect();
        let point: Vec<f64> = (0..h).map(|_| rng.random_range(-20.0..20.0)).collect();
        let lower: Vec<f64> = point
            .iter()
            .map(|p| p - rng.random_range(0.0..10.0))
            .collect();
        let upper: Vec<f64> = point
            .iter()
            .map(|p| p + rng.random_range(0.0..10.0))
            .collect();
        let alpha = rng.random_range(0.01..0.5);

        let mut scale = 0.0;
        for i in s..n {
            scale += (train[i] - train[i - s]).abs();
        }
        scale /= (n - s) as f64;
        let mut abs = 0.0;
        let mut score = 0.0;
        let mut inside = Vec::new();
        for i in 0..h {
            abs += (test[i] - point[i]).abs();
            let mut w = upper[i] - lower[i];
            if test[i] < lower[i] {
                w += 2.0 / alpha * (lower[i] - test[i]);
            }
            if test[i] > upper[i] {
                w += 2.0 / alpha * (test[i] - upper[i]);
            }
            if !rel_close(
                interval_score_w(lower[i], upper[i], test[i], alpha),
                w,
                1e-12,
            ) {
                return Err(format!("case {case}: interval score mismatch"));
            }
            score += w;
            inside.push(lower[i] <= test[i] && test[i] <= upper[i]);
        }
        let ok = rel_close(seasonal_naive_scale(&train, s).unwrap(), scale, 1e-12)
            && rel_close(
                mase(&train, &test, &point, s).unwrap(),
                abs / h as f64 / scale,
                1e-12,
            )
            && rel_close(
                msis_with(&train, &test, &lower, &upper, alpha, s, MsisForm::Mean).unwrap(),
                score / h as f64 / scale,
                1e-12,
            )
            && coverage(&test, &lower, &upper) == inside;
        if !ok {
            return Err(format!("case {case}: metric mismatch"));
        }
    }
    let seasonal = [1.0, 2.0, 3.0, 4.0, 1.0, 2.0, 3.0, 4.0];
    let hand = mase(&[1.0, 2.0, 3.0, 4.0], &[5.0, 6.0], &[5.0, 5.0], 1) == Ok(0.5)
        && mase(&[3.0, 1.0, 4.0], &[7.0, 2.0], &[7.0, 2.0], 1) == Ok(0.0)
        && mase(&seasonal, &[1.0], &[2.0], 4) == Err(EvalError::ZeroDenominator);
    ensure(hand, "100 random cases and 3 hand examples agree".into())
}

struct Sim {
    spec: &'static str,
    period: usize,
}

/// Draw `n` observations from a homoscedastic additive-error model.
fn simulate(sim: &Sim, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let sigma = 1.0;
    let mut level = 50.0;
    let mut trend = 0.5;
    let mut season = [6.0, -2.0, 4.0, -8.0];
    let (alpha, beta, phi, gamma) = (0.3, 0.1, 0.95, 0.1);
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        let e = sigma * normal(rng);
        match sim.spec {
            "ANN" => {
                out.push(level + e);
                level += alpha * e;
            }
            "AAdN" => {
                let mu = level + phi * trend;
                out.push(mu + e);
                level = mu + alpha * e;
                trend = phi * trend + beta * e;
            }
            "ANA" => {
                let j = t % sim.period;
                out.push(level + season[j] + e);
                level += alpha * e;
                season[j] += gamma * e;
            }
            _ => unreachable!(),
        }
    }
    out
}

fn criterion_4() -> Outcome {
    let started = Instant::now();
    let criterion = ExperimentConfig::default().criterion;
    let mut details = Vec::new();
    let mut ok = true;
    for sim in [
        Sim {
            spec: "ANN",
            period: 1,
        },
        Sim {
            spec: "AAdN",
            period: 1,
        },
        Sim {
            spec: "ANA",
            period: 4,
        },
    ] {
        let target = profile_class(&sim.spec.parse().unwrap());
        let pool = ets_pool(EtsPoolName::Reduced, sim.period > 1);
        let mut hits = 0;
        for seed in 0..200u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(4_000 + seed);
            let y = simulate(&sim, 200, &mut rng);
            let sel = ets_select(&y, sim.period, &pool, criterion).map_err(|e| e.to_string())?;
            if profile_class(&sel.fit.spec) == target {
                hits += 1;
            }
        }
        ok &= hits >= 180;
        details.push(format!("{} {hits}/200", sim.spec));
    }
    let mut hits = 0;
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(40_000 + seed);
        let mut x = 0.0;
        let y: Vec<f64> = (0..200)
            .map(|_| {
                x = 0.7 * x + normal(&mut rng);
                x
            })
            .collect();
        let fit = arima_fit(&y, ArimaOrder::new(1, 0, 0, false)).map_err(|e| e.to_string())?;
        if (fit.ar[0] - 0.7).abs() <= 0.1 {
            hits += 1;
        }
    }
    ok &= hits >= 180;
    let secs = started.elapsed().as_secs_f64();
    ok &= secs < 300.0;
    details.push(format!("AR(1) {hits}/200, {secs:.1}s"));
    ensure(ok, details.join(", "))
}

fn bench_config(pools: &[&str]) -> ExperimentConfig {
    ExperimentConfig {
        pools: pools.iter().map(|p| p.parse().unwrap()).collect(),
        workers: 1,
        ..ExperimentConfig::default()
    }
}

fn criterion_5() -> Outcome {
    let ds = load_dataset(data_dir().join("m3_monthly.csv"), DataFormat::WideCsv, None)
        .map_err(|e| e.to_string())?
        .truncated(300);
    let pools = [
        "ets:reduced",
        "ets:no_mult_trend",
        "ets:all",
        "arima:K2",
        "arima:K3",
    ];
    let report = run_benchmark(&bench_config(&pools), &ds).map_err(|e| e.to_string())?;
    let cost = |label: &str| {
        report
            .pool(label)
            .and_then(|p| p.cost_mean_seconds)
            .unwrap_or(f64::NAN)
    };
    let c: Vec<f64> = pools.iter().map(|p| cost(p)).collect();
    let ratio = c[4] / c[3];
    ensure(
        c[0] < c[1] && c[1] < c[2] && ratio >= 3.0,
        format!(
            "{} series, mean cost {:.4} < {:.4} < {:.4} s, K3/K2 = {ratio:.2}",
            ds.len(),
            c[0],
            c[1],
            c[2]
        ),
    )
}

fn levels_monotone(report: &BenchReport) -> bool {
    report.pools.iter().all(|p| {
        let overall: Vec<f64> = p.coverage.values().map(|c| c.overall).collect();
        overall.windows(2).all(|w| w[0] <= w[1])
    })
}

fn criterion_6() -> Outcome {
    let ds = load_dataset(data_dir().join("m3_yearly.csv"), DataFormat::WideCsv, None)
        .map_err(|e| e.to_string())?;
    let report = run_benchmark(&bench_config(&["ets:reduced", "ets:all"]), &ds)
        .map_err(|e| e.to_string())?;
    let reduced = report.pool("ets:reduced").ok_or("missing pool")?;
    let all = report.pool("ets:all").ok_or("missing pool")?;
    let (mr, ma) = (
        reduced.mase_mean.unwrap_or(f64::NAN),
        all.mase_mean.unwrap_or(f64::NAN),
    );
    let (sr, sa) = (reduced.msis_mean["0.95"], all.msis_mean["0.95"]);
    let attributed = all.explosive.count == all.explosive.multiplicative_trend;
    ensure(
        ds.len() == 645 && mr <= ma + 0.02 && sr <= sa && attributed && levels_monotone(&report),
        format!(
            "{} series, MASE {mr:.3} vs {ma:.3}, MSIS {sr:.3} vs {sa:.3}, explosive {} ({} multiplicative trend)",
            ds.len(),
            all.explosive.count,
            all.explosive.multiplicative_trend
        ),
    )
}

fn criterion_7() -> Outcome {
    let row = |label: &str, mase: f64, cost: f64| PoolScoreRow {
        label: label.into(),
        mase,
        cost_seconds: cost,
    };
    let t = fva_table(&[
        row("reduced", 0.942, 0.450),
        row("no_mult_trend", 0.947, 0.973),
        row("all", 1.046, 1.375),
    ]);
    let got = [
        t.rows[1].fva_vs[0],
        t.rows[2].fva_vs[0],
        t.rows[2].fva_vs[1],
        t.rows[1].ccr_vs[0],
        t.rows[2].ccr_vs[0],
        t.rows[2].ccr_vs[1],
    ];
    let want = [-0.5, -11.0, -10.5, -116.0, -206.0, -41.0];
    let ok = got.iter().zip(want).all(|(g, w)| (g - w).abs() <= 0.5);
    let shown: Vec<String> = got.iter().map(|v| format!("{v:.1}")).collect();
    ensure(ok, format!("FVA/CCR {}", shown.join(" ")))
}

fn criterion_8() -> Outcome {
    let (n, h) = (100, 6);
    let spec: EtsModelSpec = "ANN".parse().unwrap();
    let params = EtsParams {
        alpha: 0.3,
        beta: None,
        gamma: None,
        phi: None,
    };
    let levels = [0.8, 0.85, 0.9, 0.95, 0.99];
    let mut hits = [0usize; 5];
    let mut total = 0;
    for seed in 0..2000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(8_000 + seed);
        let y = simulate(
            &Sim {
                spec: "ANN",
                period: 1,
            },
            n + h,
            &mut rng,
        );
        let state = EtsState {
            level: 50.0,
            trend: None,
            season: Vec::new(),
        };
        let fit =
            EtsFit::from_parameters(&y[..n], 1, spec, params, state).map_err(|e| e.to_string())?;
        let fc = ets_forecast(&fit, h, &levels, 1, seed).map_err(|e| e.to_string())?;
        for (i, iv) in fc.intervals.iter().enumerate() {
            hits[i] += coverage(&y[n..], &iv.lower, &iv.upper)
                .iter()
                .filter(|b| **b)
                .count();
        }
        total += h;
    }
    let rates: Vec<f64> = hits.iter().map(|&k| k as f64 / total as f64).collect();
    let monotone = rates.windows(2).all(|w| w[0] <= w[1]);
    let shown: Vec<String> = rates.iter().map(|r| format!("{r:.3}")).collect();
    ensure(
        (0.93..=0.97).contains(&rates[3]) && monotone,
        format!("coverage at 80..99% = {}", shown.join(" ")),
    )
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = data_dir().join("m3_quarterly.csv");
    let run = |workers: &str| -> Result<String, String> {
        let out = dir.path().join(format!("report_{workers}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_frugal"))
            .args(["bench", "--input"])
            .arg(&input)
            .args(["--limit", "40", "--pools", "ets:reduced,ets:all,arima:K1"])
            .args(["--workers", workers, "--seed", "7", "--quiet", "--out"])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(String::from_utf8_lossy(&status.stderr).into_owned());
        }
        let text = std::fs::read_to_string(&out).map_err(|e| e.to_string())?;
        let report: BenchReport = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        serde_json::to_string_pretty(&report.without_timings()).map_err(|e| e.to_string())
    };
    let a = run("1")?;
    let b = run("2")?;
    ensure(
        a == b,
        format!(
            "workers 1 and 2 give {} identical bytes outside timings",
            a.len()
        ),
    )
}

/// Two-sided Student t tail by Simpson quadrature under x = tan(theta).
fn t_two_sided(t: f64, nu: f64) -> f64 {
    let kernel = |th: f64| {
        let x = th.tan();
        let c = th.cos();
        (1.0 + x * x / nu).powf(-(nu + 1.0) / 2.0) / (c * c)
    };
    let simpson = |a: f64, b: f64| {
        let n = 200_000;
        let step = (b - a) / n as f64;
        let mut s = kernel(a) + kernel(b);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * kernel(a + i as f64 * step);
        }
        s * step / 3.0
    };
    let total = simpson(0.0, std::f64::consts::FRAC_PI_2 * (1.0 - 1e-12));
    1.0 - simpson(0.0, t.abs().atan()) / total
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut checked = 0;
    while checked < 50 {
        let m = rng.random_range(5..80);
        let h = rng.random_range(1..=(m - 1).min(5));
        let a: Vec<f64> = (0..m).map(|_| normal(&mut rng)).collect();
        let b: Vec<f64> = (0..m).map(|_| 1.2 * normal(&mut rng)).collect();
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.abs() - y.abs()).collect();
        let mf = m as f64;
        let dbar = d.iter().sum::<f64>() / mf;
        let mut lrv = 0.0;
        for k in 0..h {
            let g: f64 = (k..m)
                .map(|t| (d[t] - dbar) * (d[t - k] - dbar))
                .sum::<f64>()
                / mf;
            lrv += if k == 0 { g } else { 2.0 * g };
        }
        if lrv <= 0.0 {
            continue;
        }
        let hf = h as f64;
        let stat =
            dbar / (lrv / mf).sqrt() * ((mf + 1.0 - 2.0 * hf + hf * (hf - 1.0) / mf) / mf).sqrt();
        let p = t_two_sided(stat, mf - 1.0);
        let r = dm_test_modified(&a, &b, h, Loss::Absolute).map_err(|e| e.to_string())?;
        if !rel_close(r.statistic, stat, 1e-9) || (r.p_value - p).abs() > 1e-9 {
            return Err(format!(
                "case {checked}: ({}, {}) vs ({stat}, {p})",
                r.statistic, r.p_value
            ));
        }
        checked += 1;
    }
    let exact = (4..1000).all(|m| hln_factor(m, 1) == ((m as f64 - 1.0) / m as f64).sqrt());
    ensure(exact, "50 cases within 1e-9, h=1 factor exact".into())
}

fn main() -> ExitCode {
    let checks: [fn() -> Outcome; 10] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
    ];
    let mut failed = 0;
    for (i, check) in checks.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} PASS: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL: {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
