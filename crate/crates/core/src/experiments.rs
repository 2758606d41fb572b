//! Drivers that assemble the modules into reproducible experiments with
//! CSV or JSON output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{generated_subgroup, prime_power, primes_below};
use crate::census::{chebotarev_report, omega_ell_census, omega_p_census, CensusTable, DeviationReport, Level};
use crate::error::{Error, Result};
use crate::field::{make_field, Field};
use crate::function_field::{enumerate_box, CurveBox, CurvePair, PolyOverFq};
use crate::galois::{
    default_scan_depth, exact_mod2, image_report, torsion_bound_scan, EllTracker, FrobRecord, GlobalCurve,
    ImageReport, Mod2Image, ScanContext,
};
use crate::gl2::{c_of_g, class_table, hypothesis_check, HypothesisResult};
use crate::sieve::{omega_profile, sieve_report, verify_sieve, OmegaProfile, SieveParams, SieveReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunConfig {
    pub q: u64,
    pub x_min: u32,
    pub x_max: u32,
    /// Scan depth; `None` selects [`default_scan_depth`].
    pub depth: Option<u32>,
    /// Levels to test; `None` selects every prime below `c(g)`.
    pub ells: Option<Vec<u32>>,
    pub g: u64,
    pub threads: usize,
    /// Largest box enumerated exhaustively, in pairs.
    pub budget: u128,
    /// Pairs drawn when a box exceeds the budget.
    pub sample_size: u64,
    pub seed: u64,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            q: 11,
            x_min: 0,
            x_max: 1,
            depth: None,
            ells: None,
            g: 0,
            threads: 1,
            budget: 1 << 22,
            sample_size: 20_000,
            seed: 1,
            format: OutputFormat::Csv,
        }
    }
}

impl RunConfig {
    pub fn field(&self) -> Result<Field> {
        let (p, k) = prime_power(self.q).ok_or_else(|| Error::InvalidInput(format!("{} is not a prime power", self.q)))?;
        make_field(p, k)
    }

    pub fn p(&self) -> u64 {
        crate::arith::prime_factors(self.q)[0]
    }

    pub fn levels(&self) -> Vec<u32> {
        match &self.ells {
            Some(v) => v.clone(),
            None => primes_below(c_of_g(self.g)).into_iter().map(|l| l as u32).collect(),
        }
    }

    pub fn scan_depth(&self) -> u32 {
        self.depth.unwrap_or_else(|| default_scan_depth(self.q, &self.levels()))
    }

    /// `# key=value` comment lines recording the full configuration.
    pub fn header(&self, command: &str) -> String {
        let ells: Vec<String> = self.levels().iter().map(|l| l.to_string()).collect();
        format!(
            "# ffgalois {command}\n# q={} x_min={} x_max={} depth={} ells={} g={} threads={} budget={} sample_size={} seed={}\n",
            self.q,
            self.x_min,
            self.x_max,
            self.scan_depth(),
            ells.join(";"),
            self.g,
            self.threads,
            self.budget,
            self.sample_size,
            self.seed
        )
    }
}

/// Runs `f` on a dedicated rayon pool with `threads` workers.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Which pairs of a box to visit: all of them, or a seeded uniform sample.
enum BoxPlan {
    Exhaustive(u64),
    Sample(Vec<u64>),
}

impl BoxPlan {
    fn new(cbox: &CurveBox, config: &RunConfig, x: u32) -> Self {
        let total = cbox.total_pairs();
        if total <= config.budget && total <= u64::MAX as u128 {
            BoxPlan::Exhaustive(total as u64)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ ((x as u64) << 32));
            let bound = total.min(u64::MAX as u128) as u64;
            BoxPlan::Sample((0..config.sample_size).map(|_| rng.gen_range(0..bound)).collect())
        }
    }

    fn sampled(&self) -> bool {
        matches!(self, BoxPlan::Sample(_))
    }

    /// Folds `visit` over the nonsingular pairs in parallel chunks and merges
    /// the per-chunk accumulators with `merge`, an associative and commutative
    /// operation, so the result does not depend on the thread count.
    fn fold<A, V, M>(&self, cbox: &CurveBox, init: impl Fn() -> A + Sync + Send, visit: V, merge: M) -> Result<A>
    where
        A: Send,
        V: Fn(&mut A, &CurvePair) -> Result<()> + Sync + Send,
        M: Fn(A, A) -> A + Sync + Send,
    {
        const CHUNK: u64 = 2048;
        let run = |idxs: &mut dyn Iterator<Item = u64>| -> Result<A> {
            let mut acc = init();
            for i in idxs {
                let pair = cbox.pair_at(i);
                if pair.discriminant().is_zero() {
                    continue;
                }
                visit(&mut acc, &pair)?;
            }
            Ok(acc)
        };
        let parts: Vec<Result<A>> = match self {
            BoxPlan::Exhaustive(total) => (0..total.div_ceil(CHUNK))
                .into_par_iter()
                .map(|c| run(&mut (c * CHUNK..((c + 1) * CHUNK).min(*total))))
                .collect(),
            BoxPlan::Sample(idx) => idx
                .par_chunks(CHUNK as usize)
                .map(|chunk| run(&mut chunk.iter().copied()))
                .collect(),
        };
        let mut acc = init();
        for part in parts {
            acc = merge(acc, part?);
        }
        Ok(acc)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct DensityCounts {
    curves: u64,
    not_certified: Vec<u64>,
    exact_images: [u64; 4],
    union: u64,
    bracket_violations: u64,
}

impl DensityCounts {
    fn new(levels: usize) -> Self {
        DensityCounts {
            not_certified: vec![0; levels],
            ..Default::default()
        }
    }

    fn merge(mut self, o: DensityCounts) -> Self {
        self.curves += o.curves;
        for (a, b) in self.not_certified.iter_mut().zip(o.not_certified) {
            *a += b;
        }
        for (a, b) in self.exact_images.iter_mut().zip(o.exact_images) {
            *a += b;
        }
        self.union += o.union;
        self.bracket_violations += o.bracket_violations;
        self
    }
}

/// Per-curve certification outcome for each level: `true` when certified.
pub fn certify_levels(ctx: &ScanContext, e: &GlobalCurve, levels: &[u32]) -> Result<Vec<bool>> {
    let p = ctx.p();
    let mut trackers: Vec<Option<EllTracker>> = levels
        .iter()
        .map(|&l| (l as u64 != p).then(|| EllTracker::new(l, ctx.q())).transpose())
        .collect::<Result<_>>()?;
    let wants_p = levels.iter().any(|&l| l as u64 == p);
    let mut p_done = !wants_p || e.hasse().is_zero();
    let mut p_gens: Vec<u64> = Vec::new();
    let mut p_certified = false;
    ctx.for_each_record(e, |r: &FrobRecord| {
        let mut all = true;
        for t in trackers.iter_mut().flatten() {
            t.observe(ctx, r)?;
            all &= t.is_certified();
        }
        if !p_done && r.ordinary {
            p_gens.push(r.trace.rem_euclid(p as i64) as u64);
            if generated_subgroup(p_gens.iter().copied(), p).len() as u64 == p - 1 {
                p_certified = true;
                p_done = true;
            }
        }
        Ok(if all && p_done { ControlFlow::Break(()) } else { ControlFlow::Continue(()) })
    })?;
    Ok(levels
        .iter()
        .zip(&trackers)
        .map(|(_, t)| match t {
            Some(t) => t.is_certified(),
            None => p_certified,
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelDensity {
    pub ell: u32,
    pub not_certified: u64,
    pub ratio: f64,
    pub stderr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityRow {
    pub x: u32,
    pub total_pairs: u128,
    pub sampled: bool,
    pub curves: u64,
    pub per_level: Vec<LevelDensity>,
    /// Exact mod-2 image counts: trivial, order 2, cyclic 3, full.
    pub exact_images: Option<[u64; 4]>,
    pub exact_nonsurjective: Option<u64>,
    pub exact_ratio: Option<f64>,
    pub union: u64,
    pub union_ratio: f64,
    pub reference: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub q: u64,
    pub depth: u32,
    pub levels: Vec<u32>,
    pub hypothesis: HypothesisResult,
    pub rows: Vec<DensityRow>,
    /// `c` with `c x / q^{x/2}` equal to the union ratio at the largest `x > 0`.
    pub fitted_reference_constant: Option<f64>,
}

fn stderr(r: f64, n: u64, sampled: bool) -> Option<f64> {
    (sampled && n > 0).then(|| (r * (1.0 - r) / n as f64).sqrt())
}

fn ratio(k: u64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        k as f64 / n as f64
    }
}

/// Density of curves in `C(x)` whose image is not certified maximal, per
/// level and in union, with the exact count for `l = 2`.
pub fn cmd_density(config: &RunConfig) -> Result<DensityReport> {
    let base = config.field()?;
    let p = config.p();
    let hypothesis = hypothesis_check(p, config.g)?;
    let levels = config.levels();
    for &l in &levels {
        if l as u64 != p {
            class_table(l)?;
        }
    }
    let depth = config.scan_depth();
    let ctx = ScanContext::new(&base, depth)?;
    let with_exact = levels.contains(&2);
    let two_pos = levels.iter().position(|&l| l == 2);
    let mut rows = Vec::new();
    for x in config.x_min..=config.x_max {
        let cbox = CurveBox::new(base.clone(), x);
        let plan = BoxPlan::new(&cbox, config, x);
        let counts = plan.fold(
            &cbox,
            || DensityCounts::new(levels.len()),
            |acc, pair| {
                let e = GlobalCurve::from_pair(pair)?;
                let cert = certify_levels(&ctx, &e, &levels)?;
                acc.curves += 1;
                for (slot, &c) in acc.not_certified.iter_mut().zip(&cert) {
                    *slot += !c as u64;
                }
                acc.union += cert.iter().any(|&c| !c) as u64;
                if with_exact {
                    let img = exact_mod2(&e);
                    acc.exact_images[img.index()] += 1;
                    if !img.is_surjective() && two_pos.is_some_and(|i| cert[i]) {
                        acc.bracket_violations += 1;
                    }
                }
                Ok(())
            },
            DensityCounts::merge,
        )?;
        if counts.bracket_violations > 0 {
            return Err(Error::InvariantViolation(format!(
                "{} curves certified at l = 2 with a proper exact mod-2 image (x = {x})",
                counts.bracket_violations
            )));
        }
        let n = counts.curves;
        let sampled = plan.sampled();
        let per_level = levels
            .iter()
            .zip(&counts.not_certified)
            .map(|(&ell, &k)| {
                let r = ratio(k, n);
                LevelDensity {
                    ell,
                    not_certified: k,
                    ratio: r,
                    stderr: stderr(r, n, sampled),
                }
            })
            .collect();
        let exact_nonsurjective = with_exact.then(|| counts.exact_images[..3].iter().sum::<u64>());
        rows.push(DensityRow {
            x,
            total_pairs: cbox.total_pairs(),
            sampled,
            curves: n,
            per_level,
            exact_images: with_exact.then_some(counts.exact_images),
            exact_nonsurjective,
            exact_ratio: exact_nonsurjective.map(|k| ratio(k, n)),
            union: counts.union,
            union_ratio: ratio(counts.union, n),
            reference: x as f64 / (config.q as f64).powf(x as f64 / 2.0),
        });
    }
    let fitted_reference_constant = rows
        .iter()
        .rev()
        .find(|r| r.x > 0)
        .map(|r| r.union_ratio / r.reference);
    Ok(DensityReport {
        q: config.q,
        depth,
        levels,
        hypothesis,
        rows,
        fitted_reference_constant,
    })
}

impl DensityReport {
    /// Long format: one line per `(x, kind, l)`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,kind,ell,count,curves,ratio,stderr,reference,sampled\n");
        for r in &self.rows {
            let mut line = |kind: &str, ell: String, count: u64, ratio: f64, se: Option<f64>| {
                let _ = writeln!(
                    out,
                    "{},{kind},{ell},{count},{},{:.12},{},{:.12},{}",
                    r.x,
                    r.curves,
                    ratio,
                    se.map(|s| format!("{s:.12}")).unwrap_or_default(),
                    r.reference,
                    r.sampled
                );
            };
            for l in &r.per_level {
                line("not_certified", l.ell.to_string(), l.not_certified, l.ratio, l.stderr);
            }
            if let (Some(k), Some(ratio)) = (r.exact_nonsurjective, r.exact_ratio) {
                line("exact_nonsurjective", "2".into(), k, ratio, stderr(ratio, r.curves, r.sampled));
            }
            line("union", String::new(), r.union, r.union_ratio, stderr(r.union_ratio, r.curves, r.sampled));
        }
        out
    }
}

/// A census at one level together with its deviation report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusRun {
    pub census: CensusTable,
    pub report: DeviationReport,
}

/// Runs a census for `n`, checking the total identity `q^{2n} - q^n`.
pub fn cmd_census(q: u64, n: u32, level: Level, budget: u128) -> Result<CensusRun> {
    let census = match level {
        Level::Ell(ell) => omega_ell_census(q, n, ell, budget)?,
        Level::P => omega_p_census(q, n, budget)?,
    };
    let expected = census.pairs() - census.field_order();
    if census.total != expected {
        return Err(Error::InvariantViolation(format!(
            "census total {} differs from q^(2n) - q^n = {expected}",
            census.total
        )));
    }
    let report = match level {
        Level::Ell(ell) => {
            let table = class_table(ell)?;
            let det = (census.field_order() % ell as u64) as u32;
            if let Some(c) = table.classes.iter().find(|c| c.det != det && census.counts[c.id] != 0) {
                return Err(Error::InvariantViolation(format!("class {} has det {} but count {}", c.id, c.det, census.counts[c.id])));
            }
            chebotarev_report(&census, Some(&table))?
        }
        Level::P => chebotarev_report(&census, None)?,
    };
    Ok(CensusRun { census, report })
}

impl CensusRun {
    pub fn to_csv(&self) -> String {
        self.report.to_csv()
    }
}

/// Sieve quantities for the class (or residue) `target` at `level`, and,
/// for `l = 2`, verification against `W_C(R)` built from the exact mod-2 image.
pub fn cmd_sieve(params: &SieveParams, level: Level, target: usize, verify: bool, budget: u128) -> Result<SieveReport> {
    let profile = omega_profile(params.q, level, target, params.big_q.max(1), budget)?;
    if !verify {
        return sieve_report(params, &profile);
    }
    if level != Level::Ell(2) {
        return Err(Error::InvalidInput("verification needs the exact oracle, available for l = 2 only".into()));
    }
    let w = w_c_mod2(params.q, params.r, target, budget)?;
    verify_sieve(&w, params, &profile)
}

/// The exact mod-2 images containing the class with id `class` of `GL_2(F_2)`.
fn image_meets(img: Mod2Image, class: usize) -> Result<bool> {
    let t = class_table(2)?;
    let c = t.class(class);
    Ok(match (c.scalar, c.trace) {
        (true, _) => true,
        (false, 0) => matches!(img, Mod2Image::Order2 | Mod2Image::Full),
        _ => matches!(img, Mod2Image::Cyclic3 | Mod2Image::Full),
    })
}

/// `W_C(R)`: the curves of the box whose mod-2 image misses the class `C`.
pub fn w_c_mod2(q: u64, r: u32, class: usize, budget: u128) -> Result<Vec<CurvePair>> {
    let (p, k) = prime_power(q).ok_or_else(|| Error::InvalidInput(format!("{q} is not a prime power")))?;
    let base = make_field(p, k)?;
    let cbox = CurveBox::new(base, r);
    let mut out = Vec::new();
    for pair in enumerate_box(&cbox, budget)? {
        let e = GlobalCurve::from_pair(&pair)?;
        if !image_meets(exact_mod2(&e), class)? {
            out.push(pair);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub p: u64,
    pub g: u64,
    pub c: u64,
    pub result: HypothesisResult,
}

pub fn cmd_check(p: u64, g: u64) -> Result<CheckReport> {
    Ok(CheckReport {
        p,
        g,
        c: c_of_g(g),
        result: hypothesis_check(p, g)?,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct TorsionCounts {
    curves: u64,
    nontrivial: u64,
    histogram: BTreeMap<u64, u64>,
    b_zero: u64,
    b_zero_odd: u64,
}

impl TorsionCounts {
    fn merge(mut self, o: TorsionCounts) -> Self {
        self.curves += o.curves;
        self.nontrivial += o.nontrivial;
        for (k, v) in o.histogram {
            *self.histogram.entry(k).or_insert(0) += v;
        }
        self.b_zero += o.b_zero;
        self.b_zero_odd += o.b_zero_odd;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TorsionRow {
    pub x: u32,
    pub sampled: bool,
    pub curves: u64,
    pub nontrivial: u64,
    pub fraction: f64,
    pub histogram: BTreeMap<u64, u64>,
    pub b_zero_curves: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TorsionReport {
    pub q: u64,
    pub depth: u32,
    pub rows: Vec<TorsionRow>,
}

/// Fraction of `C(x)` with prime-to-p torsion bound `> 1`, and the bound histogram.
pub fn cmd_torsion(config: &RunConfig) -> Result<TorsionReport> {
    let base = config.field()?;
    let depth = config.depth.unwrap_or(4);
    let ctx = ScanContext::new(&base, depth)?;
    let mut rows = Vec::new();
    for x in config.x_min..=config.x_max {
        let cbox = CurveBox::new(base.clone(), x);
        let plan = BoxPlan::new(&cbox, config, x);
        let counts = plan.fold(
            &cbox,
            TorsionCounts::default,
            |acc, pair| {
                let e = GlobalCurve::from_pair(pair)?;
                let bound = torsion_bound_scan(&ctx, &e)?;
                acc.curves += 1;
                acc.nontrivial += (bound > 1) as u64;
                *acc.histogram.entry(bound).or_insert(0) += 1;
                if pair.b.is_zero() {
                    acc.b_zero += 1;
                    acc.b_zero_odd += (bound % 2 == 1) as u64;
                }
                Ok(())
            },
            TorsionCounts::merge,
        )?;
        if counts.b_zero_odd > 0 {
            return Err(Error::InvariantViolation(format!(
                "{} curves with b = 0 have an odd torsion bound (x = {x})",
                counts.b_zero_odd
            )));
        }
        rows.push(TorsionRow {
            x,
            sampled: plan.sampled(),
            curves: counts.curves,
            nontrivial: counts.nontrivial,
            fraction: ratio(counts.nontrivial, counts.curves),
            histogram: counts.histogram,
            b_zero_curves: counts.b_zero,
        });
    }
    Ok(TorsionReport {
        q: config.q,
        depth,
        rows,
    })
}

impl TorsionReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,curves,nontrivial,fraction,b_zero_curves,histogram,sampled\n");
        for r in &self.rows {
            let hist: Vec<String> = r.histogram.iter().map(|(k, v)| format!("{k}:{v}")).collect();
            let _ = writeln!(
                out,
                "{},{},{},{:.12},{},{},{}",
                r.x,
                r.curves,
                r.nontrivial,
                r.fraction,
                r.b_zero_curves,
                hist.join(";"),
                r.sampled
            );
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRecordOut {
    pub prime: String,
    pub degree: u32,
    pub n: u64,
    pub trace: i64,
    pub ordinary: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanOutput {
    pub q: u64,
    pub a: String,
    pub b: String,
    pub hasse: String,
    pub records: Vec<ScanRecordOut>,
    pub report: ImageReport,
}

/// Frobenius records and the image report for one curve.
pub fn cmd_scan(config: &RunConfig, a: &str, b: &str) -> Result<ScanOutput> {
    let base = config.field()?;
    let e = GlobalCurve::new(PolyOverFq::parse(&base, a)?, PolyOverFq::parse(&base, b)?)?;
    let ctx = ScanContext::new(&base, config.scan_depth())?;
    let (records, report) = image_report(&ctx, &e, &config.levels())?;
    let records = records
        .iter()
        .map(|r| ScanRecordOut {
            prime: ctx.prime(r.degree, r.prime_index).to_string(),
            degree: r.degree,
            n: r.n,
            trace: r.trace,
            ordinary: r.ordinary,
        })
        .collect();
    Ok(ScanOutput {
        q: config.q,
        a: e.a.to_string(),
        b: e.b.to_string(),
        hasse: e.hasse().to_string(),
        records,
        report,
    })
}

/// Profile for `omega` read from a census-free constant, used by the CLI when
/// no census level is given.
pub fn constant_profile(q: u64, max_degree: u32, num: i64, den: i64) -> Result<OmegaProfile> {
    if den == 0 {
        return Err(Error::DivisionByZero);
    }
    OmegaProfile::constant(q, max_degree, num_rational::BigRational::new(num.into(), den.into()))
}
