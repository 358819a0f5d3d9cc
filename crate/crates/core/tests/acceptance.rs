//! Acceptance criteria A1-A10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use entangle_geom::complexity::{self, predicted_ratio, purity_from_complexity};
use entangle_geom::geodesics::{self, integrate_geodesic, GeodesicState};
use entangle_geom::oracle::{MetricSource, OracleCase};
use entangle_geom::scattering::{self as sc, ScatteringConfig, WaveVectors};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        (a - b).abs()
    } else {
        ((a - b) / b).abs()
    }
}

fn config(mu: f64, v: f64, d: f64, k0: f64) -> ScatteringConfig {
    ScatteringConfig {
        mu_reduced: mu,
        potential: v,
        d,
        k0,
        sigma0: 0.01,
        r0: 5.0,
        a_s: None,
    }
}

fn oracle_max(cases: &[OracleCase]) -> (bool, f64, usize) {
    let reports: Vec<_> = cases
        .iter()
        .map(|c| c.run(MetricSource::Analytic))
        .collect();
    let worst = reports
        .iter()
        .map(|r| r.max_rel_err)
        .fold(
            0.0,
            |a: f64, b| if b.is_nan() { f64::NAN } else { a.max(b) },
        );
    (reports.iter().all(|r| r.passed), worst, reports.len())
}

fn a1() -> Outcome {
    let mut cases = Vec::new();
    for sigma in [0.1, 1.0, 10.0] {
        for r in [0.0, 0.5, -0.9] {
            cases.push(OracleCase::Normalization { sigma, r });
        }
    }
    let (ok, worst, n) = oracle_max(&cases);
    outcome(
        ok && worst <= 1e-8,
        format!("{n} (sigma, r) pairs, max |mass - 1| = {worst:.2e} (tol 1e-8)"),
    )
}

fn a2() -> Outcome {
    let mut cases = Vec::new();
    for sigma in [0.1, 1.0, 10.0] {
        for r in [0.0, 0.5, -0.5, 0.9, -0.9] {
            cases.push(OracleCase::Metric { sigma, r });
        }
    }
    let (ok, worst, n) = oracle_max(&cases);
    outcome(
        ok && worst <= 1e-7,
        format!("{n} points, max rel err = {worst:.2e} (tol 1e-7)"),
    )
}

fn a3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cases: Vec<_> = (0..20)
        .map(|_| OracleCase::Christoffel {
            theta: [
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
                rng.gen_range(0.1..5.0),
            ],
            r: rng.gen_range(-0.95..0.95),
        })
        .collect();
    let (ok, worst, n) = oracle_max(&cases);
    outcome(
        ok && worst <= 1e-6,
        format!("{n} random points, max rel err = {worst:.2e} (tol 1e-6)"),
    )
}

fn a4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for r in [0.0, 0.01, 0.5] {
        for _ in 0..10 {
            let start = GeodesicState::new(
                [
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(0.5..2.0),
                ],
                [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ],
            );
            match integrate_geodesic(&start, r, 10.0, 1e-10) {
                Ok(p) => worst = worst.max(p.speed_drift),
                Err(e) => return outcome(false, format!("r={r}: {e}")),
            }
        }
    }
    let (s0, ds0) = (0.8, 0.4);
    let pure = match integrate_geodesic(
        &GeodesicState::new([0.0, 0.0, s0], [0.0, 0.0, ds0]),
        0.0,
        10.0,
        1e-10,
    ) {
        Ok(p) => p,
        Err(e) => return outcome(false, format!("pure sigma: {e}")),
    };
    let pure_err = pure
        .samples
        .iter()
        .map(|s| rel(s.sigma(), s0 * (ds0 / s0 * s.tau).exp()))
        .fold(0.0, f64::max);
    outcome(
        worst <= 1e-8 && pure_err <= 1e-8,
        format!("max speed drift = {worst:.2e}, pure-sigma rel err = {pure_err:.2e} (tol 1e-8)"),
    )
}

fn a5() -> Outcome {
    let mut worst_series = 0.0f64;
    let mut worst_potential = 0.0f64;
    let mut worst_kin = 0.0f64;
    for kd in [1e-3, 5e-3, 1e-2, 2e-2, 5e-2] {
        for r in [1e-4, 5e-4, 1e-3, 5e-3, 1e-2] {
            let c = config(0.5, 0.0, kd, 1.0).with_r_ig(r);
            let r_ig = sc::r_ig_from_potential(&c);
            let exact = match sc::phase_shift_exact(&c) {
                Ok(v) => v,
                Err(e) => return outcome(false, e.to_string()),
            };
            let low = sc::phase_shift_low_energy(r_ig, c.d, c.k0);
            worst_series = worst_series.max(rel(low, exact));
            worst_potential = worst_potential.max(rel(sc::phase_shift_potential(&c), low));
            if let WaveVectors::Propagating { k_in, k_out } = sc::wave_vectors(&c) {
                worst_kin = worst_kin.max(rel(k_in, (1.0 - r_ig).sqrt() * k_out));
            } else {
                return outcome(false, "unexpected evanescent case");
            }
        }
    }
    outcome(
        worst_series <= 0.01 && worst_potential <= 1e-15 && worst_kin <= 1e-15,
        format!(
            "25 points: series rel err {worst_series:.2e} (tol 1e-2), potential form {worst_potential:.1e}, k_in identity {worst_kin:.1e} (tol 1e-15)"
        ),
    )
}

fn a6() -> Outcome {
    let mut worst = 0.0f64;
    for r in [0.01, 0.1, 0.19, 0.5] {
        let c = config(0.5, 0.0, 0.2, 1.0).with_r_ig(r);
        match complexity::complexity_ratio(&c) {
            Ok(rep) => {
                if rep.predicted_ratio != predicted_ratio(sc::r_ig_from_potential(&c)) {
                    return outcome(false, "predicted_ratio differs from closed form");
                }
                worst = worst.max(rel(rep.ratio, rep.predicted_ratio));
            }
            Err(e) => return outcome(false, format!("r={r}: {e}")),
        }
    }
    outcome(
        worst <= 0.02,
        format!("max |C_corr/C_uncorr - sqrt((1-r)/(1+r))| rel = {worst:.2e} (tol 2e-2)"),
    )
}

fn a7() -> Outcome {
    let c = ScatteringConfig {
        potential: 1e-5,
        d: 0.2,
        ..config(0.5, 0.0, 0.2, 1.0)
    };
    let low = sc::purity_low_energy(&c);
    let e1 = rel(sc::purity_general(&c, sc::phase_shift_potential(&c)), low);
    let mut e2 = 0.0f64;
    for a_s in [0.0, 1e-6, 1e-4, 1e-3] {
        let ca = ScatteringConfig {
            a_s: Some(a_s),
            ..c
        };
        let rq = sc::r_qm(&ca).unwrap();
        e2 = e2.max(rel(
            sc::purity_general(&ca, sc::theta_from_scattering_length(c.k0, a_s)),
            1.0 - rq * rq,
        ));
    }
    let r = sc::r_ig_from_potential(&c);
    let e3 = match purity_from_complexity(&c, 1.0, predicted_ratio(r)) {
        Ok(p) => rel(p, low),
        Err(e) => return outcome(false, e.to_string()),
    };
    let worst = e1.max(e2).max(e3);
    outcome(
        worst <= 1e-12,
        format!("chain errors {e1:.1e}, {e2:.1e}, {e3:.1e} (tol 1e-12)"),
    )
}

fn a8() -> Outcome {
    match sc::r_upper_bound(1.0, 1e-3) {
        Ok(b) => {
            let e = rel(b, 2e-6);
            outcome(
                e <= 1e-5,
                format!("r_upper_bound = {b:e}, rel err vs 2e-6 = {e:.1e} (tol 1e-5)"),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn a9() -> Outcome {
    let (k0, s0) = (1.0, 1e-3);
    let zero = sc::entanglement_duration(k0, s0, 0.0);
    if !matches!(zero, Ok(v) if v == 0.0) {
        return outcome(false, format!("duration(0) = {zero:?}"));
    }
    let bound = sc::r_upper_bound(k0, s0).unwrap();
    let mut prev = 0.0;
    for i in 1..200 {
        let d = match sc::entanglement_duration(k0, s0, bound * i as f64 / 200.0) {
            Ok(d) => d,
            Err(e) => return outcome(false, format!("closed form at {i}/200 of bound: {e}")),
        };
        if d <= prev {
            return outcome(
                false,
                format!("closed form not increasing at {i}/200 of bound"),
            );
        }
        prev = d;
    }
    let mut numeric = Vec::new();
    for r in [0.0, 1e-9, 1e-7, 5e-7, 1e-6] {
        match geodesics::duration_numeric(k0, s0, r, geodesics::DEFAULT_EPSILON) {
            Ok(v) => numeric.push(v),
            Err(e) => return outcome(false, format!("numeric at r={r}: {e}")),
        }
    }
    let vanishes = numeric[0] == 0.0 && numeric[1].abs() < 0.05 * numeric[2];
    let monotone = numeric[2] > 0.0 && numeric[3] > numeric[2] && numeric[4] > numeric[3];
    outcome(
        vanishes && monotone,
        format!(
            "closed form increasing on 199 points; numeric {:.3e} {:.3e} {:.3e} {:.3e} {:.3e} at r = 0, 1e-9, 1e-7, 5e-7, 1e-6",
            numeric[0], numeric[1], numeric[2], numeric[3], numeric[4]
        ),
    )
}

fn a10() -> Outcome {
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return outcome(false, e.to_string()),
    };
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"mu_reduced":0.5,"V":1e-5,"d":0.2,"k0":1.0,"sigma0":0.01,"R0":5.0}"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("sweep{i}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_entangle-geom"))
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .args([
                "sweep", "--param", "V", "--from", "0", "--to", "1e-4", "--steps", "50",
            ])
            .status();
        match status {
            Ok(s) if s.success() => outputs.push(std::fs::read(&out).unwrap()),
            other => return outcome(false, format!("sweep run {i}: {other:?}")),
        }
    }
    let lines = outputs[0].iter().filter(|&&b| b == b'\n').count();
    outcome(
        outputs[0] == outputs[1] && lines == 51,
        format!(
            "two sweep runs, {} bytes, {lines} lines, identical = {}",
            outputs[0].len(),
            outputs[0] == outputs[1]
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome, u64);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("A1 normalization", a1, 10),
        ("A2 metric oracle", a2, 30),
        ("A3 christoffel oracle", a3, 5),
        ("A4 geodesic speed conservation", a4, 30),
        ("A5 phase-shift series", a5, 5),
        ("A6 complexity ratio", a6, 60),
        ("A7 purity chain", a7, 1),
        ("A8 correlation bound", a8, 1),
        ("A9 duration properties", a9, 60),
        ("A10 determinism", a10, 10),
    ];
    let mut all = true;
    for (name, f, limit) in criteria {
        let start = Instant::now();
        let o = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let passed = o.passed && in_time;
        all &= passed;
        println!(
            "{} {name}: {} [{:.2} s, limit {limit} s]",
            if passed { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
