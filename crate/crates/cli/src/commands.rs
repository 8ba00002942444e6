//! One function per subcommand. Each returns whether all checks it ran met
//! their expectation.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use lax_oleinik::oracle::godunov_at;
use lax_oleinik::{biconjugate_residual, cross_validate, fenchel_dual, ConvexFlux, DualGridSpec, FvConfig};
use serde_json::{json, Value};

use crate::checks::{self, all_meet_expectation, worst_margin};
use crate::output::{self, fmt_f64, write_json, write_solution, VERSION};
use crate::pipeline;
use crate::scenario::{validate_times, CheckKind, FluxSpec, Scenario, SchemaError};

pub fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> anyhow::Result<Vec<T>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<T>().map_err(|_| SchemaError(format!("bad {what} entry {s:?}")).into()))
        .collect()
}

fn out_dir(s: &Scenario, flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| s.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"))
}

fn run_meta(s: &Scenario, seed: u64) -> Value {
    json!({
        "scenario": s.label(),
        "pipeline": format!("{:?}", s.pipeline).to_lowercase(),
        "seed": seed,
        "negative_control": s.negative_control.is_some(),
    })
}

pub struct TransformArgs {
    pub flux: Option<String>,
    pub scenario: Option<PathBuf>,
    pub q_range: Option<(f64, f64, usize)>,
    pub out: Option<PathBuf>,
    pub dump_flux: Option<PathBuf>,
    pub check_biconjugate: bool,
}

fn load_flux(args: &TransformArgs) -> anyhow::Result<ConvexFlux<f64>> {
    match (&args.flux, &args.scenario) {
        (Some(spec), _) => {
            let path = Path::new(spec);
            let text = if path.exists() { fs::read_to_string(path)? } else { spec.clone() };
            FluxSpec::parse(&text)?.build()
        }
        (None, Some(path)) => Scenario::load(path)?.flux(),
        (None, None) => Err(SchemaError("transform needs --flux or --scenario".into()).into()),
    }
}

pub fn transform(args: TransformArgs) -> anyhow::Result<bool> {
    let f = load_flux(&args)?;
    let spec = match args.q_range {
        Some((lo, hi, n)) => DualGridSpec::new(lo, hi, n).map_err(|e| SchemaError(e.to_string()))?,
        None => DualGridSpec::default_for(&f),
    };
    let mut ok = true;
    if let Some(path) = &args.dump_flux {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
        w.write_record(["p", "f", "slope_left", "slope_right"])?;
        for p in f.grid().points() {
            let (l, r) = f.slopes(p);
            w.write_record([fmt_f64(p), fmt_f64(f.eval(p)), fmt_f64(l), fmt_f64(r)])?;
        }
        w.flush()?;
    }
    if let Some(path) = &args.out {
        let dual = fenchel_dual(&f, spec)?;
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
        w.write_record(["q", "fstar"])?;
        for (q, v) in dual.grid().points().zip(dual.values()) {
            w.write_record([fmt_f64(q), fmt_f64(*v)])?;
        }
        w.flush()?;
    }
    if args.check_biconjugate {
        let residual = biconjugate_residual(&f, spec)?;
        let allowed = 2.0 * f.grid().step;
        ok = residual <= allowed;
        println!("biconjugate residual {residual:.6e} (allowed {allowed:.6e}): {}", if ok { "pass" } else { "fail" });
    }
    Ok(ok)
}

pub struct SolveArgs {
    pub scenario: PathBuf,
    pub times: Option<String>,
    pub out_dir: Option<PathBuf>,
    pub emit_gnuplot: bool,
}

pub fn solve(args: SolveArgs) -> anyhow::Result<bool> {
    let mut s = Scenario::load(&args.scenario)?;
    if let Some(t) = &args.times {
        s.times = parse_list(t, "time")?;
        validate_times(&s.times)?;
    }
    let dir = out_dir(&s, args.out_dir);
    write_run(&s, &dir, args.emit_gnuplot)?;
    println!("wrote {} profiles to {}", s.times.len(), dir.display());
    Ok(true)
}

fn write_run(s: &Scenario, dir: &Path, gnuplot: bool) -> anyhow::Result<(lax_oleinik::Solution<f64>, ConvexFlux<f64>)> {
    let f = s.flux()?;
    let u0 = s.initial();
    let solved = pipeline::solve(s, &f, &u0, &s.times).with_context(|| format!("solving {}", s.label()))?;
    write_solution(dir, &solved.solution, run_meta(s, s.seed))?;
    if let Some(ladder) = &solved.ladder {
        let mut ladder = ladder.clone();
        ladder["version"] = json!(VERSION);
        write_json(&dir.join("ladder.json"), &ladder)?;
    }
    if gnuplot {
        output::write_gnuplot(dir, &solved.solution, &s.label())?;
    }
    Ok((solved.solution, f))
}

pub struct OracleArgs {
    pub scenario: PathBuf,
    pub nx: Option<usize>,
    pub cfl: f64,
    pub out: Option<PathBuf>,
}

pub fn oracle(args: OracleArgs) -> anyhow::Result<bool> {
    let s = Scenario::load(&args.scenario)?;
    let grid = s.grid.with_cells(args.nx.unwrap_or(s.grid.nx));
    let u0 = s.initial_on(grid)?;
    let f = s.flux()?;
    let t_end = *s.times.last().expect("validated");
    let cfg = FvConfig::new(args.cfl, grid.nx + 1, t_end).map_err(|e| SchemaError(e.to_string()))?;
    let mut sol = godunov_at(&u0, &f, cfg, &s.times)?;
    sol.meta.flux_id = s.flux.id().to_string();
    let dir = args.out.unwrap_or_else(|| out_dir(&s, None).join("oracle"));
    let mut meta = run_meta(&s, s.seed);
    meta["scheme"] = json!("godunov");
    meta["cfl"] = json!(args.cfl);
    write_solution(&dir, &sol, meta)?;
    println!("wrote {} oracle profiles to {}", s.times.len(), dir.display());
    Ok(true)
}

pub fn crosscheck(a: &Path, b: &Path, window: (f64, f64), out: Option<&Path>) -> anyhow::Result<bool> {
    let sa = output::read_solution(a)?;
    let sb = output::read_solution(b)?;
    let gaps = cross_validate(&sa, &sb, window)?;
    let mut text = String::from("t,l1_gap\n");
    for (t, gap) in &gaps {
        text.push_str(&format!("{},{}\n", fmt_f64(*t), fmt_f64(*gap)));
    }
    print!("{text}");
    if let Some(path) = out {
        fs::write(path, &text)?;
    }
    Ok(true)
}

pub struct VerifyArgs {
    pub scenario: PathBuf,
    pub checks: Option<String>,
    pub seed: Option<u64>,
    pub report: Option<PathBuf>,
}

fn resolve_checks(s: &Scenario, flag: &Option<String>) -> anyhow::Result<Vec<CheckKind>> {
    match flag {
        Some(list) => list.split(',').filter(|c| !c.trim().is_empty()).map(CheckKind::parse).collect(),
        None => Ok(s.checks.clone()),
    }
}

fn print_reports(reports: &[lax_oleinik::verify::CheckReport]) {
    for r in reports {
        let status = match (r.status, r.meets_expectation()) {
            (lax_oleinik::verify::Status::NotApplicable, _) => "n/a ",
            (_, true) => "pass",
            (_, false) => "FAIL",
        };
        let time = r.time.map(|t| format!(" t={t}")).unwrap_or_default();
        println!("{status} {:<24}{time} lhs={:.6e} rhs={:.6e} margin={:.3e} {}", r.name, r.lhs, r.rhs, r.margin, r.details);
    }
}

pub fn verify(args: VerifyArgs) -> anyhow::Result<bool> {
    let s = Scenario::load(&args.scenario)?;
    let checks = resolve_checks(&s, &args.checks)?;
    let seed = args.seed.unwrap_or(s.seed);
    let f = s.flux()?;
    let u0 = s.initial();
    let sol = pipeline::solve(&s, &f, &u0, &s.times)?.solution;
    let reports = checks::run_checks(&s, &f, &u0, &sol, &checks, seed)?;
    print_reports(&reports);
    if let Some(path) = &args.report {
        write_json(path, &serde_json::to_value(&reports)?)?;
    }
    Ok(all_meet_expectation(&reports))
}

pub struct RunArgs {
    pub scenario: PathBuf,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub emit_gnuplot: bool,
}

/// Solve, write artifacts, verify, and write `report.json`.
pub fn run(args: RunArgs) -> anyhow::Result<bool> {
    let s = Scenario::load(&args.scenario)?;
    let seed = args.seed.unwrap_or(s.seed);
    let dir = out_dir(&s, args.out_dir);
    let (sol, f) = write_run(&s, &dir, args.emit_gnuplot)?;
    let u0 = s.initial();
    let reports = checks::run_checks(&s, &f, &u0, &sol, &s.checks, seed)?;
    print_reports(&reports);
    write_json(&dir.join("report.json"), &serde_json::to_value(&reports)?)?;
    let ok = all_meet_expectation(&reports);
    println!("{}: {} checks, {}", s.label(), reports.len(), if ok { "all pass" } else { "failures" });
    Ok(ok)
}

/// Growth allowed between consecutive gaps of a refinement table.
pub const SWEEP_GROWTH: f64 = 1.5;

pub fn sweep(scenario: &Path, nx_list: &[usize], cfl: f64, out: Option<&Path>) -> anyhow::Result<bool> {
    let s = Scenario::load(scenario)?;
    if nx_list.is_empty() || nx_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SchemaError("nx list must be nonempty and increasing".into()).into());
    }
    let f = s.flux()?;
    let t_end = *s.times.last().expect("validated");
    let mut text = String::from("nx,h,t,l1_gap,gap_over_h,worst_margin\n");
    let mut gaps = Vec::new();
    let u_ref = s.initial_on(s.grid)?;
    // gaps at rounding level carry no refinement signal
    let floor = 1e-10 * (s.grid.xmax - s.grid.xmin) * u_ref.sup_norm().max(1.0);
    for &nx in nx_list {
        let grid = s.grid.with_cells(nx);
        if nx < crate::scenario::MIN_CELLS {
            return Err(SchemaError(format!("nx {nx} below {}", crate::scenario::MIN_CELLS)).into());
        }
        let mut local = s.clone();
        local.grid = grid;
        let u0 = s.initial_on(grid)?;
        let sol = pipeline::solve(&local, &f, &u0, &[t_end])?.solution;
        let fv = godunov_at(&u0, &f, FvConfig::new(cfl, nx + 1, t_end).map_err(|e| SchemaError(e.to_string()))?, &[t_end])?;
        let gap = cross_validate(&sol, &fv, (grid.xmin, grid.xmax))?[0].1;
        let reports = checks::run_checks(&local, &f, &u0, &sol, &local.checks, s.seed)?;
        let h = (grid.xmax - grid.xmin) / nx as f64;
        text.push_str(&format!("{nx},{},{},{},{},{}\n", fmt_f64(h), fmt_f64(t_end), fmt_f64(gap), fmt_f64(gap / h), fmt_f64(worst_margin(&reports))));
        gaps.push(gap);
    }
    print!("{text}");
    if let Some(path) = out {
        fs::write(path, &text)?;
    }
    let ok = gaps.windows(2).all(|w| w[1] <= SWEEP_GROWTH * w[0] + floor);
    if !ok {
        eprintln!("refinement gaps grow by more than a factor {SWEEP_GROWTH}");
    }
    Ok(ok)
}
