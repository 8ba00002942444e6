//! On-disk layout of a run: one CSV per output time plus `meta.json`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use lax_oleinik::{Extension, Profile, Solution, UniformGrid};
use serde_json::{json, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const META_FILE: &str = "meta.json";

/// 17 significant digits: enough to read back the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn profile_file(k: usize) -> String {
    format!("profile_{k:03}.csv")
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn write_json(path: &Path, value: &Value) -> anyhow::Result<()> {
    // serde_json maps keep keys ordered, so re-parsing sorts them
    let sorted: Value = serde_json::from_str(&value.to_string())?;
    let mut text = serde_json::to_string_pretty(&sorted)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn csv_writer(path: &Path) -> anyhow::Result<csv::Writer<fs::File>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path).with_context(|| format!("creating {}", path.display()))
}

/// Writes `x, u` and, when the solution carries value slices,
/// `V, y_minus, y_plus` per knot.
pub fn write_profile(path: &Path, sol: &Solution<f64>, k: usize) -> anyhow::Result<()> {
    let mut w = csv_writer(path)?;
    let p = &sol.profiles[k];
    let slice = sol.slices.get(k);
    if slice.is_some() {
        w.write_record(["x", "u", "V", "y_minus", "y_plus"])?;
    } else {
        w.write_record(["x", "u"])?;
    }
    for (i, x) in p.grid.points().enumerate() {
        let mut row = vec![fmt_f64(x), fmt_f64(p.values[i])];
        if let Some(s) = slice {
            row.extend([fmt_f64(s.values[i]), fmt_f64(s.y_minus[i]), fmt_f64(s.y_plus[i])]);
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn grid_json(g: &UniformGrid<f64>) -> Value {
    json!({ "xmin": g.start, "xmax": g.end(), "nx": g.len - 1, "h": g.step })
}

/// Writes every profile and a `meta.json` describing them; `extra` is merged
/// into the metadata.
pub fn write_solution(dir: &Path, sol: &Solution<f64>, extra: Value) -> anyhow::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut files = Vec::new();
    let mut entries = Vec::new();
    for (k, &t) in sol.times.iter().enumerate() {
        let name = profile_file(k);
        let path = dir.join(&name);
        write_profile(&path, sol, k)?;
        entries.push(json!({ "t": t, "file": name }));
        files.push(path);
    }
    let m = &sol.meta;
    let mut meta = json!({
        "version": VERSION,
        "grid": grid_json(&sol.grid),
        "times": sol.times,
        "files": entries,
        "L": m.speed,
        "M": m.window,
        "lip_v0": m.lip_v0,
        "C1": m.c1,
        "flux_id": m.flux_id,
    });
    if let (Value::Object(meta), Value::Object(extra)) = (&mut meta, extra) {
        meta.extend(extra);
    }
    write_json(&dir.join(META_FILE), &meta)?;
    Ok(files)
}

/// Reads back a directory written by [`write_solution`]. Only `x, u` are
/// used; value slices are not restored.
pub fn read_solution(dir: &Path) -> anyhow::Result<Solution<f64>> {
    let meta_path = dir.join(META_FILE);
    let text = fs::read_to_string(&meta_path).with_context(|| format!("reading {}", meta_path.display()))?;
    let meta: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", meta_path.display()))?;
    let Some(entries) = meta["files"].as_array() else {
        bail!("{} lists no files", meta_path.display());
    };
    let mut times = Vec::new();
    let mut profiles = Vec::new();
    for e in entries {
        let t = e["t"].as_f64().context("file entry without time")?;
        let name = e["file"].as_str().context("file entry without name")?;
        let mut r = csv::Reader::from_path(dir.join(name)).with_context(|| format!("reading {name}"))?;
        let (mut xs, mut us) = (Vec::new(), Vec::new());
        for rec in r.records() {
            let rec = rec?;
            xs.push(rec[0].parse::<f64>()?);
            us.push(rec[1].parse::<f64>()?);
        }
        if xs.len() < 2 {
            bail!("{name} has fewer than two rows");
        }
        let grid = UniformGrid::spanning(xs[0], xs[xs.len() - 1], xs.len());
        let extension = Extension::Constant { left: us[0], right: us[us.len() - 1] };
        profiles.push(Profile::new(grid, us, extension)?);
        times.push(t);
    }
    let Some(first) = profiles.first() else {
        bail!("{} lists no profiles", dir.display());
    };
    let grid = first.grid;
    let initial = first.clone();
    Ok(Solution { grid, times, profiles, slices: Vec::new(), initial, meta: Default::default() })
}

/// A gnuplot script plotting `u` at every output time.
pub fn write_gnuplot(dir: &Path, sol: &Solution<f64>, title: &str) -> anyhow::Result<PathBuf> {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key outside\n");
    s.push_str("set xlabel 'x'\nset ylabel 'u'\n");
    s.push_str(&format!("set title '{}'\n", title.replace('\'', "")));
    s.push_str("set terminal pngcairo size 1000,600\n");
    s.push_str("set output 'profiles.png'\n");
    let plots: Vec<String> =
        sol.times.iter().enumerate().map(|(k, t)| format!("'{}' using 1:2 skip 1 with lines title 't = {t}'", profile_file(k))).collect();
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    let path = dir.join("plot.gp");
    fs::write(&path, s).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use lax_oleinik::{presets, solve_linf};

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn solution_round_trip() {
        let g = UniformGrid::spanning(-2.0, 2.0, 41);
        let u0 = Profile::from_fn(g, |x: f64| if x < 0.0 { 1.0 } else { 0.0 });
        let sol = solve_linf(&u0, &presets::burgers(3.0, 121), &[0.5, 1.0]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_solution(dir.path(), &sol, json!({"name": "t"})).unwrap();
        let back = read_solution(dir.path()).unwrap();
        assert_eq!(back.times, sol.times);
        for (a, b) in back.profiles.iter().zip(&sol.profiles) {
            assert_eq!(a.values, b.values);
        }
        let meta: Value = serde_json::from_str(&fs::read_to_string(dir.path().join(META_FILE)).unwrap()).unwrap();
        assert_eq!(meta["version"], VERSION);
        let header = fs::read_to_string(dir.path().join(profile_file(0))).unwrap();
        assert!(header.starts_with("x,u,V,y_minus,y_plus\n"));
    }
}
