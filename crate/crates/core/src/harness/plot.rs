//! Dependency-free SVG line plots of per-track SINR and RMSE.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::output::SummaryRow;
use crate::cost::Objective;
use crate::error::Result;
use crate::policy::PolicyKind;
use crate::scene::Scenario;

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 260.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

type Series = Vec<(f64, f64)>;

fn bounds(series: &[(PolicyKind, Series)]) -> (f64, f64, f64, f64) {
    let pts = series.iter().flat_map(|(_, s)| s.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    (x0, x1, y0, y1)
}

fn panel(out: &mut String, dx: f64, title: &str, ylabel: &str, series: &[(PolicyKind, Series)]) {
    let (x0, x1, y0, y1) = bounds(series);
    let px = |x: f64| dx + MARGIN + (x - x0) / (x1 - x0) * (PANEL_W - 1.5 * MARGIN);
    let py = |y: f64| PANEL_H - MARGIN - (y - y0) / (y1 - y0) * (PANEL_H - 1.8 * MARGIN);
    let _ = writeln!(
        out,
        r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        px(x0),
        py(y1),
        px(x1) - px(x0),
        py(y0) - py(y1)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{title}</text>"#,
        dx + PANEL_W / 2.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">track</text>"#,
        dx + PANEL_W / 2.0,
        PANEL_H - 12.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="12" transform="rotate(-90 {:.1} {:.1})">{ylabel}</text>"#,
        dx + 14.0,
        PANEL_H / 2.0,
        dx + 14.0,
        PANEL_H / 2.0
    );
    for (v, anchor_y) in [(y0, py(y0)), (y1, py(y1))] {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{v:.2}</text>"#,
            px(x0) - 4.0,
            anchor_y + 3.0
        );
    }
    for (x, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="{anchor}" font-size="10">{x}</text>"#,
            px(x),
            py(y0) + 14.0
        );
    }
    for (i, (policy, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        let ly = 40.0 + 14.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{ly:.1}" fill="{color}" font-size="11">{policy}</text>"#,
            dx + PANEL_W - 90.0
        );
    }
}

/// SVG with SINR-vs-track and RMSE-vs-track panels, one series per policy.
pub fn render_plot(scenario: Scenario, objective: Objective, rows: &[SummaryRow]) -> String {
    let mut sinr: BTreeMap<PolicyKind, Series> = BTreeMap::new();
    let mut rmse: BTreeMap<PolicyKind, Series> = BTreeMap::new();
    for r in rows
        .iter()
        .filter(|r| r.scenario == scenario && r.objective == objective)
    {
        let x = r.track as f64 + 1.0;
        sinr.entry(r.policy).or_default().push((x, r.sinr_db_mean));
        rmse.entry(r.policy).or_default().push((x, r.rmse_mean));
    }
    let sinr: Vec<_> = sinr.into_iter().collect();
    let rmse: Vec<_> = rmse.into_iter().collect();
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{PANEL_H}" font-family="sans-serif">"#,
        2.0 * PANEL_W
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    panel(
        &mut out,
        0.0,
        &format!("SINR ({scenario}, {objective})"),
        "SINR (dB)",
        &sinr,
    );
    panel(
        &mut out,
        PANEL_W,
        &format!("RMSE ({scenario}, {objective})"),
        "RMSE",
        &rmse,
    );
    out.push_str("</svg>\n");
    out
}

/// Writes `<scenario>_<objective>.svg` into `dir` for each combination present.
pub fn emit_plots(rows: &[SummaryRow], dir: &Path) -> Result<Vec<PathBuf>> {
    let mut combos: Vec<(Scenario, Objective)> =
        rows.iter().map(|r| (r.scenario, r.objective)).collect();
    combos.sort();
    combos.dedup();
    let mut files = Vec::new();
    for (scenario, objective) in combos {
        let path = dir.join(format!("{scenario}_{objective}.svg"));
        std::fs::write(&path, render_plot(scenario, objective, rows))?;
        files.push(path);
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(policy: PolicyKind, track: u32) -> SummaryRow {
        SummaryRow {
            policy,
            objective: Objective::Tracking,
            scenario: Scenario::StochasticOrder3,
            track,
            seeds: 1,
            sinr_db_mean: 10.0 + track as f64,
            sinr_db_se: 0.0,
            rmse_mean: 5.0,
            rmse_se: 0.0,
            cost_mean: 1.0,
            cost_se: 0.0,
            collision_mean: 0.1,
            collision_se: 0.0,
        }
    }

    #[test]
    fn no_rows_no_files() {
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_plots(&[], dir.path()).unwrap().is_empty());
    }

    #[test]
    fn one_series_per_policy_and_deterministic() {
        let rows: Vec<_> = PolicyKind::ALL
            .into_iter()
            .flat_map(|p| (0..4).map(move |t| row(p, t)))
            .collect();
        let svg = render_plot(Scenario::StochasticOrder3, Objective::Tracking, &rows);
        assert_eq!(svg.matches("<polyline").count(), 6);
        assert_eq!(
            svg,
            render_plot(Scenario::StochasticOrder3, Objective::Tracking, &rows)
        );
        let dir = tempfile::tempdir().unwrap();
        let files = emit_plots(&rows, dir.path()).unwrap();
        assert_eq!(files.len(), 1);
        assert!(files[0].ends_with("stochastic_order3_tracking.svg"));
    }
}
