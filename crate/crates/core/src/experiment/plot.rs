use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::experiment::run::{means_by_horizon, model_labels, ConvergenceRecord};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

/// A named sequence of `(T, value)` points.
pub type Series = (String, Vec<(f64, f64)>);

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn decade_range(values: impl Iterator<Item = f64>) -> (i32, i32) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (lo, hi) = (lo.log10().floor() as i32, hi.log10().ceil() as i32);
    if lo == hi {
        (lo, hi + 1)
    } else {
        (lo, hi)
    }
}

/// Renders one log-log panel, or `None` when no series has a positive point.
pub fn render_panel(title: &str, ylabel: &str, series: &[Series]) -> Option<String> {
    let series: Vec<(String, Vec<(f64, f64)>)> = series
        .iter()
        .map(|(l, pts)| (l.clone(), pts.iter().copied().filter(|p| p.0 > 0.0 && p.1 > 0.0).collect::<Vec<_>>()))
        .filter(|(_, pts)| !pts.is_empty())
        .collect();
    if series.is_empty() {
        return None;
    }
    let all = || series.iter().flat_map(|s| s.1.iter().copied());
    let (x0, x1) = decade_range(all().map(|p| p.0));
    let (y0, y1) = decade_range(all().map(|p| p.1));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x.log10() - x0 as f64) / (x1 - x0) as f64 * pw;
    let sy = |y: f64| TOP + ph - (y.log10() - y0 as f64) / (y1 - y0) as f64 * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#, LEFT + pw / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );
    for k in x0..=x1 {
        let x = LEFT + (k - x0) as f64 / (x1 - x0) as f64 * pw;
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{TOP:.2}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd"/>"##, TOP + ph);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{k}</text>"#, TOP + ph + 18.0);
    }
    for k in y0..=y1 {
        let y = TOP + ph - (k - y0) as f64 / (y1 - y0) as f64 * ph;
        let _ = writeln!(s, r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##, LEFT + pw);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{k}</text>"#, LEFT - 6.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">T</text>"#, LEFT + pw / 2.0, HEIGHT - 16.0);
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(ylabel)
    );
    for (i, (label, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, coords.join(" "));
        for p in pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(p.0), sy(p.1));
        }
        let ly = TOP + 16.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 16.0;
        let _ = writeln!(s, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 26.0, ly + 4.0, escape(label));
    }
    s.push_str("</svg>\n");
    Some(s)
}

fn series_of(records: &[ConvergenceRecord], column: fn(&ConvergenceRecord) -> f64) -> Vec<Series> {
    model_labels(records)
        .into_iter()
        .map(|label| {
            let sel: Vec<&ConvergenceRecord> = records.iter().filter(|r| r.model == label).collect();
            let pts = means_by_horizon(&sel, column).into_iter().map(|(t, v)| (t as f64, v)).collect();
            (label, pts)
        })
        .collect()
}

/// Writes `subopt.svg` and `potgap.svg` into `dir` and returns the written
/// paths; a panel without positive data is skipped with a notice.
pub fn emit_plots(records: &[ConvergenceRecord], dir: &Path) -> Result<Vec<PathBuf>> {
    let panels: [(&str, &str, &str, fn(&ConvergenceRecord) -> f64); 2] = [
        ("subopt.svg", "Suboptimality", "mean suboptimality", |r| r.subopt),
        ("potgap.svg", "Distance to the optimal potential", "mean squared potential gap", |r| r.potgap),
    ];
    let mut written = Vec::new();
    for (file, title, ylabel, column) in panels {
        match render_panel(title, ylabel, &series_of(records, column)) {
            Some(svg) => {
                let path = dir.join(file);
                std::fs::write(&path, svg)?;
                written.push(path);
            }
            None => log::warn!("no positive data for {file}; panel omitted"),
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_panel_omitted() {
        assert!(render_panel("t", "y", &[]).is_none());
        assert!(render_panel("t", "y", &[("a".into(), vec![(10.0, -1.0)])]).is_none());
    }

    #[test]
    fn ticks_increase() {
        let svg = render_panel("t", "y", &[("a".into(), vec![(100.0, 0.5), (10_000.0, 0.003)])]).unwrap();
        let labels: Vec<i32> = svg
            .lines()
            .filter(|l| l.contains("text-anchor=\"middle\">1e"))
            .map(|l| l.split(">1e").nth(1).unwrap().trim_end_matches("</text>").parse().unwrap())
            .collect();
        assert_eq!(labels, vec![2, 3, 4]);
    }
}
