//! Learning-curve plots and AUC tables from saved runs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use eerlab::engine::{aggregate, mean_std, read_summary, ExperimentResult};
use eerlab::strategies::Strategy;

use crate::{Failure, Result};

const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

pub fn cmd_report(run_dirs: &[PathBuf], out: &Path) -> Result<bool> {
    let mut results = Vec::new();
    for dir in run_dirs {
        if !dir.is_dir() {
            return Err(Failure::Usage(format!("{} is not a directory", dir.display())));
        }
        results.extend(load_runs(dir)?);
    }
    if results.is_empty() {
        return Err(Failure::Runtime("no run summaries found".into()));
    }

    // One plot per dataset setting.
    let mut groups: BTreeMap<String, Vec<ExperimentResult>> = BTreeMap::new();
    for r in results {
        groups.entry(format!("{}_{}", r.config.name, r.shift_rule)).or_default().push(r);
    }
    fs::create_dir_all(out)?;
    let mut csv = csv_writer(&out.join("auc_table.csv"))?;
    csv.write_record(["setting", "strategy", "mean_auc", "std_auc", "n_seeds"]).map_err(runtime)?;
    let mut md = String::from("| setting | strategy | AUC (mean ± std) | seeds |\n|---|---|---|---|\n");
    for (setting, runs) in &groups {
        let budgets = runs[0].budgets();
        if let Some(r) = runs.iter().find(|r| r.budgets() != budgets) {
            return Err(Failure::Runtime(format!(
                "{setting}: run {} seed {} has label budgets {:?}, expected {budgets:?}",
                r.strategy,
                r.seed,
                r.budgets()
            )));
        }
        fs::write(out.join(format!("{setting}.svg")), curves_svg(setting, runs))?;
        for row in aggregate(runs) {
            csv.write_record([
                setting.clone(),
                row.strategy.to_string(),
                row.mean_auc.to_string(),
                row.std_auc.to_string(),
                row.n_seeds.to_string(),
            ])
            .map_err(runtime)?;
            let _ = writeln!(
                md,
                "| {setting} | {} | {:.4} ± {:.4} | {} |",
                row.strategy, row.mean_auc, row.std_auc, row.n_seeds
            );
        }
    }
    csv.flush()?;
    fs::write(out.join("auc_table.md"), &md)?;
    print!("{md}");
    Ok(true)
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(runtime)
}

/// Every `.json` in `dir` that parses as a run summary, in file-name order.
/// Other JSON files (aggregates, analysis reports) are skipped.
fn load_runs(dir: &Path) -> Result<Vec<ExperimentResult>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    Ok(paths.iter().filter_map(|p| read_summary(p).ok()).collect())
}

/// Mean test accuracy per strategy with a ±1 std band.
fn curves_svg(title: &str, runs: &[ExperimentResult]) -> String {
    let (w, h, left, right, top, bottom) = (640.0, 420.0, 60.0, 150.0, 30.0, 45.0);
    let xs: Vec<f64> = runs[0].budgets().iter().map(|&b| b as f64).collect();
    let mut strategies: Vec<Strategy> = Vec::new();
    for r in runs {
        if !strategies.contains(&r.strategy) {
            strategies.push(r.strategy);
        }
    }
    let curves: Vec<(Strategy, Vec<(f64, f64)>)> = strategies
        .iter()
        .map(|&s| {
            let group: Vec<Vec<f64>> = runs.iter().filter(|r| r.strategy == s).map(|r| r.accuracies()).collect();
            let stats = (0..xs.len())
                .map(|k| mean_std(&group.iter().map(|a| a[k]).collect::<Vec<_>>()))
                .map(|(m, sd)| (m, if sd.is_finite() { sd } else { 0.0 }))
                .collect();
            (s, stats)
        })
        .collect();

    let (x0, x1) = (xs[0], xs[xs.len() - 1].max(xs[0] + 1.0));
    let lo = curves.iter().flat_map(|(_, c)| c.iter().map(|(m, s)| m - s)).fold(f64::INFINITY, f64::min);
    let hi = curves.iter().flat_map(|(_, c)| c.iter().map(|(m, s)| m + s)).fold(f64::NEG_INFINITY, f64::max);
    let (y0, y1) = if hi - lo < 1e-9 { (lo - 0.05, hi + 0.05) } else { (lo - 0.02 * (hi - lo), hi + 0.02 * (hi - lo)) };
    let px = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let py = |y: f64| h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
        (w - right + left) / 2.0,
        escape(title)
    );
    let (ax0, ax1, ay0, ay1) = (left, w - right, h - bottom, top);
    let _ = writeln!(svg, r#"<path d="M{ax0},{ay1} L{ax0},{ay0} L{ax1},{ay0}" fill="none" stroke="black"/>"#);
    for k in 0..=4 {
        let y = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(svg, r#"<text x="{}" y="{:.1}" text-anchor="end">{y:.3}</text>"#, ax0 - 6.0, py(y) + 4.0);
    }
    for &x in &xs {
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{}" text-anchor="middle">{x}</text>"#, px(x), ay0 + 16.0);
    }
    let _ =
        writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">labeled points</text>"#, (ax0 + ax1) / 2.0, h - 8.0);
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">test accuracy</text>"#,
        (ay0 + ay1) / 2.0,
        (ay0 + ay1) / 2.0
    );

    for (k, (s, stats)) in curves.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let upper = xs.iter().zip(stats).map(|(&x, (m, sd))| format!("{:.2},{:.2}", px(x), py(m + sd)));
        let lower = xs.iter().zip(stats).rev().map(|(&x, (m, sd))| format!("{:.2},{:.2}", px(x), py(m - sd)));
        let band: Vec<String> = upper.chain(lower).collect();
        let _ =
            writeln!(svg, r#"<polygon points="{}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#, band.join(" "));
        let line: Vec<String> =
            xs.iter().zip(stats).map(|(&x, (m, _))| format!("{:.2},{:.2}", px(x), py(*m))).collect();
        let _ =
            writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, line.join(" "));
        let ly = top + 10.0 + 18.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            ax1 + 12.0,
            ax1 + 32.0
        );
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{s}</text>"#, ax1 + 38.0, ly + 4.0);
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
