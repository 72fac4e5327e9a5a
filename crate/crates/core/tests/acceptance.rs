//! End-to-end acceptance checks. Runs as a plain binary and prints one
//! `PASS` or `FAIL` line per criterion; exits nonzero if any fails.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use poplabel::engine::RunLimits;
use poplabel::experiments::calibrate::broadcast_ratios;
use poplabel::experiments::{
    check_cells, emit, fit, sweep, CellSummary, Calibration, ExperimentSpec, Report, SweepOptions, SweepResult,
};
use poplabel::labeling::{run_config, ProtocolConfig, ProtocolKind, SingleCycle};
use poplabel::verify::state_lower_bound;

type Check = Result<String, String>;

struct Ctx {
    root: PathBuf,
    /// Every labeling cell swept so far, by output directory.
    swept: BTreeMap<String, Vec<CellSummary>>,
}

impl Ctx {
    fn new() -> Self {
        let root = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
        let _ = fs::remove_dir_all(&root);
        Self {
            root,
            swept: BTreeMap::new(),
        }
    }

    /// Sweeps `spec`, writes its files under `name` and remembers the cells.
    fn sweep(&mut self, name: &str, spec: &str) -> Result<SweepResult, String> {
        let spec = ExperimentSpec::from_json(spec).map_err(|e| format!("{name}: {e}"))?;
        let result = run_spec(&spec, None)?;
        let fits = spec
            .fits
            .iter()
            .map(|&m| fit(&result.cells, m))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("{name}: {e}"))?;
        let mut report = Report::new(Some(&spec), result.clone(), fits);
        report.records = None;
        emit(&self.root.join(name), &report).map_err(|e| e.to_string())?;
        self.swept.insert(name.to_string(), result.cells.clone());
        Ok(result)
    }

    fn cells_csv(&self, name: &str) -> Result<String, String> {
        let path = self.root.join(name).join("cells.csv");
        fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))
    }
}

fn run_spec(spec: &ExperimentSpec, jobs: Option<usize>) -> Result<SweepResult, String> {
    let r = sweep(spec, &SweepOptions { jobs, cancel: None }).map_err(|e| e.to_string())?;
    if r.interrupted {
        return Err("sweep interrupted".into());
    }
    Ok(r)
}

fn mean(c: &CellSummary) -> Result<(f64, f64), String> {
    c.interactions
        .map(|s| (s.mean, s.stderr))
        .ok_or_else(|| format!("{} n={} has no completed runs", c.protocol, c.n))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn all_clean(c: &CellSummary) -> Result<(), String> {
    ensure(c.validity_failures == 0, || {
        format!("{} n={}: {} invalid runs", c.protocol, c.n, c.validity_failures)
    })?;
    ensure(c.safety_violations == 0, || {
        format!("{} n={}: {} runs with safety violations", c.protocol, c.n, c.safety_violations)
    })
}

fn single_cycle_correct(ctx: &mut Ctx) -> Check {
    let r = ctx.sweep(
        "single-cycle",
        r#"{"protocol":"single-cycle","grid":{"n":[4,16,36,64],"leader":["oracle"]},
            "trials":100,"master_seed":11,"retain_records":true}"#,
    )?;
    let records = r.records.as_ref().ok_or("records not retained")?;
    let mut worst = Vec::new();
    for (c, recs) in r.cells.iter().zip(records) {
        all_clean(c)?;
        ensure(c.completed == c.trials && c.trials == 100, || {
            format!("n={}: {}/{} completed", c.n, c.completed, c.trials)
        })?;
        ensure(recs.iter().all(|r| r.silence_certified == Some(true)), || {
            format!("n={}: a final configuration was not certified silent", c.n)
        })?;
        ensure(c.max_label == Some(c.n as u64), || format!("n={}: max label {:?}", c.n, c.max_label))?;
        let cap = c.n as f64 + 5.0 * (c.n as f64).sqrt() + 4.0;
        let census = c.census_max.unwrap_or(usize::MAX);
        ensure(census as f64 <= cap, || format!("n={}: census {census} > {cap}", c.n))?;
        worst.push(format!("n={} census {census}<={cap}", c.n));
    }
    Ok(worst.join(", "))
}

fn single_cycle_oracle(ctx: &mut Ctx) -> Check {
    let exact = common::expected_hitting_time(&SingleCycle::new(4).map_err(|e| e.to_string())?).expected;
    let r = ctx.sweep(
        "single-cycle-n4",
        r#"{"protocol":"single-cycle","grid":{"n":[4],"leader":["oracle"]},"trials":100000,"master_seed":12}"#,
    )?;
    let c = &r.cells[0];
    all_clean(c)?;
    let (m, se) = mean(c)?;
    let z = (m - exact) / se;
    ensure(c.completed == 100_000 && z.abs() <= 3.0, || {
        format!("mean {m:.3} vs exact {exact:.3}, z={z:.2}, completed {}", c.completed)
    })?;
    Ok(format!("mean {m:.3} vs exact {exact:.3} (z={z:.2})"))
}

fn interval_two_n(ctx: &mut Ctx) -> Check {
    let r = ctx.sweep(
        "interval-2n",
        r#"{"protocol":"interval-2n","grid":{"n":[128,256,512,1024,2048,4096],"leader":["elected"]},
            "trials":200,"master_seed":13,"fits":["n-ln-n"]}"#,
    )?;
    for c in &r.cells {
        all_clean(c)?;
        ensure(c.completion_rate() >= 0.99, || {
            format!("n={}: completion {}/{}", c.n, c.completed, c.trials)
        })?;
        let max = c.max_label.unwrap_or(0);
        ensure(max <= 2 * c.n as u64, || format!("n={}: label {max} > 2n", c.n))?;
    }
    let f = fit(&r.cells, poplabel::experiments::Model::NLnN).map_err(|e| e.to_string())?;
    let spread = f.ratio_spread();
    ensure(f.r_squared >= 0.98 && spread <= 2.0, || {
        format!("R^2 {:.4}, ratio spread {spread:.3}", f.r_squared)
    })?;
    Ok(format!("R^2 {:.4}, mean/(n ln n) spread {spread:.3}", f.r_squared))
}

fn interval_eps(ctx: &mut Ctx) -> Check {
    let r = ctx.sweep(
        "interval-eps",
        r#"{"protocol":"interval-eps","grid":{"n":[1024],"epsilon":[0.25,0.5],"leader":["oracle"]},
            "trials":200,"master_seed":14}"#,
    )?;
    for c in &r.cells {
        all_clean(c)?;
        let eps = c.epsilon.ok_or("cell without epsilon")?;
        let cap = ((1.0 + eps) * c.n as f64).ceil() as u64;
        let max = c.max_label.unwrap_or(0);
        ensure(max <= cap, || format!("eps={eps}: label {max} > {cap}"))?;
        ensure(c.completed == c.trials, || format!("eps={eps}: {}/{} completed", c.completed, c.trials))?;
    }
    let by_eps = |e: f64| r.cells.iter().find(|c| c.epsilon == Some(e)).ok_or("missing cell");
    let (quarter, _) = mean(by_eps(0.25)?)?;
    let (half, _) = mean(by_eps(0.5)?)?;
    let ratio = quarter / half;
    ensure((1.5..=2.8).contains(&ratio), || format!("ratio {ratio:.3}"))?;
    Ok(format!("mean ratio eps 0.25/0.5 = {ratio:.3}"))
}

fn k_cycle(ctx: &mut Ctx) -> Check {
    let r = ctx.sweep(
        "k-cycle",
        r#"{"protocol":"k-cycle","grid":{"n":[256],"k":[1,4],"leader":["oracle"]},"trials":200,"master_seed":15}"#,
    )?;
    let by_k = |k: usize| r.cells.iter().find(|c| c.k == Some(k)).ok_or("missing cell");
    let (one, four) = (by_k(1)?, by_k(4)?);
    for c in [one, four] {
        all_clean(c)?;
        ensure(c.completed == c.trials, || {
            format!("k={:?}: {}/{} completed", c.k, c.completed, c.trials)
        })?;
        let census = c.census_max.unwrap_or(usize::MAX);
        ensure(census <= 256 + 12 * 32, || format!("k={:?}: census {census}", c.k))?;
    }
    let (m1, se1) = mean(one)?;
    let (m4, se4) = mean(four)?;
    let sep = (m1 - m4) / se1.hypot(se4);
    ensure(sep > 3.0, || format!("k=1 {m1:.0} vs k=4 {m4:.0}, separation {sep:.2} sigma"))?;
    Ok(format!("k=1 {m1:.0} vs k=4 {m4:.0} ({sep:.1} sigma)"))
}

fn pool_bound(ctx: &mut Ctx) -> Check {
    let mut out = Vec::new();
    for (name, spec) in [
        (
            "dispenser",
            r#"{"protocol":"dispenser","grid":{"n":[32]},"trials":500,"master_seed":16}"#,
        ),
        (
            "single-cycle-n32",
            r#"{"protocol":"single-cycle","generalized":true,"grid":{"n":[32],"leader":["oracle"]},
                "trials":500,"master_seed":16}"#,
        ),
    ] {
        let r = ctx.sweep(name, spec)?;
        let c = &r.cells[0];
        all_clean(c)?;
        let (m, se) = mean(c)?;
        ensure(c.completed == 500 && m + 3.0 * se >= 1024.0, || {
            format!("{name}: mean {m:.1} + 3se {:.1} < 1024", 3.0 * se)
        })?;
        out.push(format!("{name} mean {m:.0}"));
    }
    Ok(out.join(", "))
}

fn state_bound(ctx: &mut Ctx) -> Check {
    let mut checked = 0;
    let mut tight = Vec::new();
    for cells in ctx.swept.values() {
        for c in cells {
            let cfg = c.config().map_err(|e| e.to_string())?;
            let traits = cfg.traits().map_err(|e| e.to_string())?;
            if !traits.state_bound_applies() {
                continue;
            }
            let bound = state_lower_bound(c.n);
            let census = c.census_min.ok_or_else(|| format!("{} n={}: no census", c.protocol, c.n))?;
            ensure(census as f64 >= bound, || {
                format!("{} n={}: census {census} < {bound:.2}", c.protocol, c.n)
            })?;
            checked += 1;
            if cfg.kind == ProtocolKind::SingleCycle {
                let gap = c.census_max.unwrap_or(usize::MAX) as f64 - bound;
                ensure(gap <= 6.0 * (c.n as f64).sqrt(), || format!("single-cycle n={}: gap {gap:.2}", c.n))?;
                tight.push(format!("n={} gap {gap:.1}", c.n));
            }
        }
        for check in check_cells(cells).map_err(|e| e.to_string())? {
            ensure(check.is_consistent(), || format!("{check:?}"))?;
        }
    }
    ensure(checked > 0, || "no cell to check".into())?;
    Ok(format!("{checked} cells; single-cycle {}", tight.join(", ")))
}

fn broadcast(_ctx: &mut Ctx) -> Check {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/broadcast.json");
    let cal = Calibration::load(&fixture).map_err(|e| e.to_string())?;
    let c_hat = cal.constant.ok_or("fixture has no constant")?;
    let mut medians = Vec::new();
    let mut out = Vec::new();
    for n in [256, 1024, 4096] {
        let mut ratios = broadcast_ratios(n, 200, 18).map_err(|e| e.to_string())?;
        let within = ratios.iter().filter(|&&r| r <= c_hat).count();
        ensure(within * 100 >= 95 * ratios.len(), || {
            format!("n={n}: {within}/200 within {c_hat:.3} n ln n")
        })?;
        ratios.sort_by(f64::total_cmp);
        let median = (ratios[99] + ratios[100]) / 2.0;
        medians.push(median);
        out.push(format!("n={n} {within}/200, median {median:.3}"));
    }
    let (lo, hi) = medians
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &m| (lo.min(m), hi.max(m)));
    let spread = hi / lo - 1.0;
    ensure(spread <= 0.25, || format!("median spread {:.1}%", spread * 100.0))?;
    Ok(format!("c={c_hat:.3}; {}; spread {:.1}%", out.join(", "), spread * 100.0))
}

fn safety_contrast(ctx: &mut Ctx) -> Check {
    const NAIVE_SEED: u64 = 0;
    let naive = ProtocolConfig::new(ProtocolKind::Naive, 3);
    let rec = run_config(&naive, &RunLimits::new(10_000), NAIVE_SEED).map_err(|e| e.to_string())?;
    ensure(!rec.safety.is_ok(), || format!("naive n=3 seed {NAIVE_SEED}: no violation"))?;

    // The diagonal variant never goes silent; its runs stop at the cap.
    ctx.sweep(
        "diagonal",
        r#"{"protocol":"single-cycle-diagonal","grid":{"n":[16,64],"leader":["oracle"]},"trials":20,
            "master_seed":19,"limits":{"max_interactions":1000000}}"#,
    )?;
    let mut runs: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for c in ctx.swept.values().flatten() {
        let e = runs.entry(c.protocol.as_str()).or_default();
        e.0 += c.trials;
        e.1 += c.safety_violations;
    }
    let others: Vec<_> = runs.iter().filter(|(p, _)| **p != "naive").collect();
    let expected = ProtocolKind::ALL.len() - 1;
    ensure(others.len() == expected, || {
        format!("only {} of {expected} protocols exercised: {others:?}", others.len())
    })?;
    let dirty: Vec<_> = others.iter().filter(|(_, v)| v.1 > 0).collect();
    ensure(dirty.is_empty(), || format!("violations: {dirty:?}"))?;
    let total: usize = others.iter().map(|(_, v)| v.0).sum();
    Ok(format!("naive seed {NAIVE_SEED} violates; 0 violations in {total} runs of {expected} protocols"))
}

fn randomized_collisions(ctx: &mut Ctx) -> Check {
    let r = ctx.sweep(
        "randomized-cube",
        r#"{"protocol":"randomized-cube","grid":{"n":[32]},"trials":1000,"master_seed":20}"#,
    )?;
    let c = &r.cells[0];
    ensure(c.completed == 1000, || format!("{}/1000 completed", c.completed))?;
    let n = 32u64;
    let range = (n * n * n) as f64;
    let distinct: f64 = (0..n).map(|i| 1.0 - i as f64 / range).product();
    let p = 1.0 - distinct;
    let sigma = (p * (1.0 - p) / 1000.0).sqrt();
    let freq = c.validity_failures as f64 / 1000.0;
    ensure((freq - p).abs() <= 3.0 * sigma, || {
        format!("duplicate rate {freq:.4} vs {p:.4} +- {:.4}", 3.0 * sigma)
    })?;
    Ok(format!("duplicate rate {freq:.4} vs exact {p:.4} (sigma {sigma:.4})"))
}

fn determinism(ctx: &mut Ctx) -> Check {
    // Whole sweep again, single-threaded this time.
    let first = ctx.cells_csv("single-cycle")?;
    let spec = ExperimentSpec::from_json(
        r#"{"protocol":"single-cycle","grid":{"n":[4,16,36,64],"leader":["oracle"]},"trials":100,"master_seed":11}"#,
    )
    .map_err(|e| e.to_string())?;
    let again = run_spec(&spec, Some(1))?;
    let dir = ctx.root.join("rerun-single-cycle");
    emit(&dir, &Report::new(Some(&spec), again, Vec::new())).map_err(|e| e.to_string())?;
    let second = fs::read_to_string(dir.join("cells.csv")).map_err(|e| e.to_string())?;
    ensure(first == second, || "single-cycle cells.csv differs on rerun".into())?;

    // One cell cut out of a larger grid keeps its seeds and its row.
    let spec = ExperimentSpec::from_json(
        r#"{"protocol":"interval-2n","grid":{"n":[128],"leader":["elected"]},"trials":200,"master_seed":13}"#,
    )
    .map_err(|e| e.to_string())?;
    let dir = ctx.root.join("rerun-interval-2n");
    emit(&dir, &Report::new(Some(&spec), run_spec(&spec, None)?, Vec::new())).map_err(|e| e.to_string())?;
    let row = fs::read_to_string(dir.join("cells.csv")).map_err(|e| e.to_string())?;
    let row = row.lines().nth(1).ok_or("empty rerun")?;
    let full = ctx.cells_csv("interval-2n")?;
    ensure(full.lines().any(|l| l == row), || "interval-2n n=128 row differs on rerun".into())?;
    Ok("single-cycle sweep and interval-2n n=128 cell reproduce byte for byte".into())
}

type Criterion = (u8, &'static str, Duration, fn(&mut Ctx) -> Check);

fn main() -> ExitCode {
    let min = |m: u64| Duration::from_secs(60 * m);
    // Criteria that inspect earlier runs come last.
    let criteria: &[Criterion] = &[
        (1, "single-cycle correctness", min(10), single_cycle_correct),
        (2, "single-cycle exact expectation", min(2), single_cycle_oracle),
        (3, "interval-2n scaling", min(20), interval_two_n),
        (4, "interval-eps ratio", min(15), interval_eps),
        (5, "k-cycle speedup", min(15), k_cycle),
        (6, "pool lower bound", min(2), pool_bound),
        (8, "broadcast calibration", min(5), broadcast),
        (10, "randomized collision rate", min(1), randomized_collisions),
        (7, "state lower bound", min(1), state_bound),
        (9, "safety contrast", min(5), safety_contrast),
        (11, "determinism", min(10), determinism),
    ];
    let mut ctx = Ctx::new();
    let mut failed = 0;
    for &(id, name, budget, check) in criteria {
        let start = Instant::now();
        let mut result = check(&mut ctx);
        let took = start.elapsed();
        if result.is_ok() && took > budget {
            result = Err(format!("took {took:.1?}, budget {budget:?}"));
        }
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} c{id} {name}: {detail} ({:.1}s)", took.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
