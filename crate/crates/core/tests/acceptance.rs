//! Acceptance suite: each test checks one criterion at its stated tolerance
//! and prints a single `criterion N: PASS|FAIL` line.

use std::io::Write;
use std::time::{Duration, Instant};

use ffgalois::census::{chebotarev_report, omega_ell_census, omega_p_census, Level, DEFAULT_CENSUS_BUDGET};
use ffgalois::ec_finite::{point_count_naive, Curve};
use ffgalois::experiments::{cmd_census, cmd_density, cmd_sieve, cmd_torsion, with_threads, RunConfig};
use ffgalois::gl2::{c_of_g, class_table, gl2_order, hypothesis_check, sl2_order, HypothesisResult};
use ffgalois::sieve::{l_of_q, l_of_q_brute, OmegaProfile, SieveParams};
use ffgalois::make_field;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(n: u32, pass: bool, elapsed: Duration, limit: Duration, detail: &str) {
    let ok = pass && elapsed <= limit;
    // Written straight to stderr so the line survives the harness output capture.
    let line = format!(
        "criterion {n}: {} ({detail}; {:.1}s of {:.0}s)\n",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {n} failed: {detail}");
    assert!(elapsed <= limit, "criterion {n} exceeded its time limit");
}

fn density_config(q: u64, x_min: u32, x_max: u32, depth: u32, ells: Vec<u32>, threads: usize) -> RunConfig {
    RunConfig {
        q,
        x_min,
        x_max,
        depth: Some(depth),
        ells: Some(ells),
        threads,
        budget: 1 << 22,
        ..Default::default()
    }
}

#[test]
fn criterion_01_class_tables() {
    let start = Instant::now();
    let mut pass = true;
    for ell in [2u32, 3, 5, 7, 11, 13] {
        let t = class_table(ell).unwrap();
        let l = ell as u64;
        pass &= t.classes.len() as u64 == l * l - 1;
        pass &= t.classes.iter().map(|c| c.size).sum::<u64>() == gl2_order(ell);
        pass &= gl2_order(ell) == (l * l - 1) * (l * l - l);
        let det1: Vec<u64> = t.det1_classes().iter().map(|&i| t.class(i).size).collect();
        pass &= det1.iter().sum::<u64>() == l * (l * l - 1) && sl2_order(ell) == l * (l * l - 1);
        if ell == 3 {
            let mut sizes = det1.clone();
            sizes.sort_unstable();
            pass &= sizes == vec![1, 1, 6, 8, 8];
        }
    }
    verdict(1, pass, start.elapsed(), Duration::from_secs(10), "class counts and sizes for l <= 13");
}

fn census_csv_bodies(threads: usize) -> Vec<String> {
    let mut out = Vec::new();
    for q in [5u64, 7] {
        for n in 1..=3 {
            for level in [Level::Ell(2), Level::Ell(3), Level::P] {
                let run = with_threads(threads, || cmd_census(q, n, level, DEFAULT_CENSUS_BUDGET)).unwrap().unwrap();
                out.push(run.to_csv());
            }
        }
    }
    out
}

#[test]
fn criterion_02_census_totals() {
    let start = Instant::now();
    let mut pass = true;
    let mut runs = 0;
    for q in [5u64, 7] {
        for n in 1..=3 {
            for level in [Level::Ell(2), Level::Ell(3), Level::P] {
                let census = match level {
                    Level::Ell(ell) => omega_ell_census(q, n, ell, DEFAULT_CENSUS_BUDGET).unwrap(),
                    Level::P => omega_p_census(q, n, DEFAULT_CENSUS_BUDGET).unwrap(),
                };
                let qn = q.pow(n);
                pass &= census.counts.iter().sum::<u64>() == qn * qn - qn;
                pass &= census.total == qn * qn - qn;
                if let Level::Ell(ell) = level {
                    let t = class_table(ell).unwrap();
                    let det = (qn % ell as u64) as u32;
                    pass &= t.classes.iter().all(|c| c.det == det || census.counts[c.id] == 0);
                }
                runs += 1;
            }
        }
    }
    verdict(2, pass, start.elapsed(), Duration::from_secs(60), &format!("{runs} censuses sum to q^2n - q^n"));
}

#[test]
fn criterion_03_chebotarev_envelope() {
    let start = Instant::now();
    let q = 5u64;
    let table = class_table(2).unwrap();
    let mut pass = true;
    let mut fitted = Vec::new();
    let mut worst = 0.0f64;
    for n in 1..=5u32 {
        let census = omega_ell_census(q, n, 2, DEFAULT_CENSUS_BUDGET).unwrap();
        let report = chebotarev_report(&census, Some(&table)).unwrap();
        let bound = 3.0 * (q as f64).powf(-(n as f64) / 2.0);
        for row in &report.rows {
            let target = table.class(row.class_id).size as f64 / 6.0;
            let dev = (row.density - target).abs();
            if n >= 2 {
                pass &= dev <= bound;
                worst = worst.max(dev / bound);
            }
        }
        fitted.push(report.fitted_constant.unwrap());
    }
    let at2 = fitted[1];
    let bounded = fitted[1..].iter().all(|&c| c <= 2.0 * at2);
    pass &= bounded;
    verdict(
        3,
        pass,
        start.elapsed(),
        Duration::from_secs(300),
        &format!("worst deviation/envelope {worst:.3}, fitted constants {fitted:.4?}"),
    );
}

#[test]
fn criterion_04_mod_p_census() {
    let start = Instant::now();
    let (q, n) = (5u64, 2u32);
    let census = omega_p_census(q, n, DEFAULT_CENSUS_BUDGET).unwrap();
    let report = chebotarev_report(&census, None).unwrap();
    let p = 5.0f64;
    let bound = 3.0 * (q as f64).powf(-(n as f64) / 2.0) * (p - 1.0).sqrt();
    let mut pass = report.rows.len() == 4 && report.rows.iter().all(|r| (r.density - 0.25).abs() <= bound);
    let field = make_field(5, 2).unwrap();
    let mut zero = 0u64;
    for a in field.elements() {
        for b in field.elements() {
            if let Ok(c) = Curve::new(field.clone(), a, b) {
                zero += (point_count_naive(&c).trace.rem_euclid(5) == 0) as u64;
            }
        }
    }
    pass &= census.supersingular == zero;
    verdict(
        4,
        pass,
        start.elapsed(),
        Duration::from_secs(30),
        &format!("supersingular {} vs trace = 0 count {zero}", census.supersingular),
    );
}

fn soundness_csv(threads: usize) -> Result<Vec<String>, ffgalois::Error> {
    [2u32, 4, 6]
        .iter()
        .map(|&d| {
            let c = density_config(5, 1, 1, d, vec![2], threads);
            with_threads(threads, || cmd_density(&c)).unwrap().map(|r| r.to_csv())
        })
        .collect()
}

#[test]
fn criterion_05_oracle_soundness() {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for d in [2u32, 4, 6] {
        // cmd_density returns an invariant violation if any curve is certified
        // at l = 2 while its exact image is proper.
        match cmd_density(&density_config(5, 1, 1, d, vec![2], 1)) {
            Ok(r) => {
                let row = &r.rows[0];
                let exact = row.exact_nonsurjective.unwrap();
                let nc = row.per_level[0].not_certified;
                pass &= row.curves == 620 && exact <= nc;
                detail.push(format!("D={d}: {} curves, exact {exact} <= not certified {nc}", row.curves));
            }
            Err(e) => {
                pass = false;
                detail.push(format!("D={d}: {e}"));
            }
        }
    }
    verdict(5, pass, start.elapsed(), Duration::from_secs(120), &detail.join(", "));
}

/// Exact non-surjective counts for q = 11, l = 2 at x = 0, 1, 2, observed on
/// the first verified run and kept as regression anchors.
const DENSITY_ANCHORS: Option<[(u64, u64); 3]> = Some([(110, 110), (1320, 14_630), (27_280, 1_771_550)]);

fn density_trend(threads: usize) -> ffgalois::experiments::DensityReport {
    let c = density_config(11, 0, 2, 1, vec![2], threads);
    with_threads(threads, || cmd_density(&c)).unwrap().unwrap()
}

#[test]
fn criterion_06_density_trend() {
    let start = Instant::now();
    let report = density_trend(1);
    let ratios: Vec<f64> = report.rows.iter().map(|r| r.exact_ratio.unwrap()).collect();
    let counts: Vec<(u64, u64)> = report.rows.iter().map(|r| (r.exact_nonsurjective.unwrap(), r.curves)).collect();
    let mut pass = ratios.windows(2).all(|w| w[1] < w[0]) && ratios[2] < 0.5 * ratios[0];
    pass &= counts[0].1 == 110 && counts[1].1 == 14_630;
    if let Some(anchors) = DENSITY_ANCHORS {
        pass &= counts.as_slice() == anchors.as_slice();
    }
    verdict(
        6,
        pass,
        start.elapsed(),
        Duration::from_secs(900),
        &format!("(exact, curves) by x: {counts:?}, ratios {ratios:.6?}"),
    );
}

#[test]
fn criterion_07_sieve() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut pass = true;
    for _ in 0..20 {
        let omega: Vec<BigRational> = (0..6)
            .map(|_| {
                let den: i64 = rng.gen_range(2..12);
                BigRational::new(rng.gen_range(0..den).into(), den.into())
            })
            .collect();
        let filter: Vec<bool> = (0..6).map(|_| rng.gen_bool(0.7)).collect();
        let profile = OmegaProfile::new(5, omega, filter).unwrap();
        for big_q in 0..=6 {
            pass &= l_of_q(&profile, big_q).unwrap() == l_of_q_brute(&profile, big_q).unwrap();
        }
    }
    let params = SieveParams { q: 5, r: 1, big_q: 1, g: 0 };
    let table = class_table(2).unwrap();
    let mut detail = Vec::new();
    for id in table.det1_classes() {
        let rep = cmd_sieve(&params, Level::Ell(2), id, true, 1 << 20).unwrap();
        pass &= rep.pass == Some(true);
        detail.push(format!("class {id}: bound {:.1} >= actual {}", rep.bound, rep.actual.unwrap()));
    }
    verdict(
        7,
        pass,
        start.elapsed(),
        Duration::from_secs(60),
        &format!("DP equals brute force on 20 profiles; {}", detail.join(", ")),
    );
}

#[test]
fn criterion_08_hypothesis_and_constant() {
    let start = Instant::now();
    let pass = c_of_g(0) == 15
        && hypothesis_check(5, 0).unwrap() == HypothesisResult::Fail { witness: 11 }
        && hypothesis_check(11, 0).unwrap() == HypothesisResult::Pass
        && hypothesis_check(13, 0).unwrap() == HypothesisResult::Pass;
    verdict(8, pass, start.elapsed(), Duration::from_secs(1), "c(0) = 15 and hypothesis checks");
}

#[test]
fn criterion_09_torsion_trend() {
    let start = Instant::now();
    // cmd_torsion reports an invariant violation for any b = 0 curve with an odd bound.
    let c = density_config(11, 0, 1, 4, vec![], 1);
    let (pass, detail) = match cmd_torsion(&c) {
        Ok(r) => {
            let f: Vec<f64> = r.rows.iter().map(|r| r.fraction).collect();
            let b0: Vec<u64> = r.rows.iter().map(|r| r.b_zero_curves).collect();
            (f[1] < f[0], format!("fractions {f:.4?}, b = 0 curves {b0:?} all even"))
        }
        Err(e) => (false, e.to_string()),
    };
    verdict(9, pass, start.elapsed(), Duration::from_secs(600), &detail);
}

#[test]
fn criterion_10_determinism() {
    let start = Instant::now();
    let mut pass = true;
    let base_census = census_csv_bodies(1);
    let base_sound = soundness_csv(1).unwrap();
    let base_density = density_trend(1).to_csv();
    for threads in [4usize, 8] {
        pass &= census_csv_bodies(threads) == base_census;
        pass &= soundness_csv(threads).unwrap() == base_sound;
        pass &= density_trend(threads).to_csv() == base_density;
    }
    verdict(
        10,
        pass,
        start.elapsed(),
        Duration::from_secs(3600),
        "criteria 2, 5, 6 CSV bodies at 1, 4, 8 threads",
    );
}
