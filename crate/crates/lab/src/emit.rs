//! Writing a report to disk: CSV tables, the JSON summary and SVG plots.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{LabError, Result};
use crate::report::Report;

pub const BOUNDARY_HEADER: &str = "lambda,zeta,xi,err_zeta,err_xi";
pub const TRUNCATION_HEADER: &str = "series,lower,upper,re,im";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            _ => Err(LabError::Validation(format!("unknown format '{s}', expected csv, json or svg"))),
        }
    }
}

/// `csv,json` style lists.
pub fn parse_formats(list: &str) -> Result<Vec<Format>> {
    let mut formats = Vec::new();
    for f in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let f = f.parse()?;
        if !formats.contains(&f) {
            formats.push(f);
        }
    }
    Ok(formats)
}

fn boundary_csv(report: &Report) -> String {
    let mut out = String::from(BOUNDARY_HEADER);
    out.push('\n');
    if let Some(b) = &report.series.boundary {
        for i in 0..b.lambda.len() {
            let _ = writeln!(out, "{},{},{},{},{}", b.lambda[i], b.zeta[i], b.xi[i], b.err_zeta[i], b.err_xi[i]);
        }
    }
    out
}

fn truncation_csv(report: &Report) -> String {
    let mut out = String::from(TRUNCATION_HEADER);
    out.push('\n');
    for t in &report.series.truncations {
        for i in 0..t.lower.len() {
            let _ = writeln!(out, "{},{},{},{},{}", t.name, t.lower[i], t.upper[i], t.re[i], t.im[i]);
        }
    }
    out
}

struct Line<'a> {
    name: &'a str,
    x: &'a [f64],
    y: Vec<f64>,
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Minimal line plot. With `log_x` non-positive abscissae are dropped.
fn line_plot(title: &str, lines: &[Line], log_x: bool) -> String {
    let (w, h, m) = (720.0, 420.0, 50.0);
    let tx = |x: f64| if log_x { x.log10() } else { x };
    let points: Vec<Vec<(f64, f64)>> = lines
        .iter()
        .map(|l| {
            l.x.iter()
                .zip(&l.y)
                .filter(|(x, y)| (!log_x || **x > 0.0) && x.is_finite() && y.is_finite())
                .map(|(x, y)| (tx(*x), *y))
                .collect()
        })
        .collect();
    let all = points.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if !(x0 < x1) {
        x1 = x0 + 1.0;
    }
    if !(y0 < y1) {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(
        svg,
        r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * m,
        h - 2.0 * m
    );
    let xl = |x: f64| if log_x { format!("1e{x:.1}") } else { format!("{x:.3}") };
    let _ = writeln!(svg, r#"<text x="{m}" y="{}">{}</text>"#, h - m + 16.0, xl(x0));
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, w - m, h - m + 16.0, xl(x1));
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{y0:.3e}</text>"#, m - 4.0, h - m);
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{y1:.3e}</text>"#, m - 4.0, m + 4.0);
    for (i, (line, pts)) in lines.iter().zip(&points).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#, path.join(" "));
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            w - m - 140.0,
            m + 16.0 * (i + 1) as f64,
            escape(line.name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn svg_files(report: &Report) -> Vec<(&'static str, String)> {
    let mut files = Vec::new();
    if let Some(b) = &report.series.boundary {
        files.push(("zeta.svg", line_plot("zeta", &[Line { name: "zeta", x: &b.lambda, y: b.zeta.clone() }], false)));
        files.push(("xi.svg", line_plot("xi", &[Line { name: "xi", x: &b.lambda, y: b.xi.clone() }], false)));
    }
    if !report.series.profiles.is_empty() {
        let lines: Vec<Line> = report
            .series
            .profiles
            .iter()
            .map(|p| Line { name: &p.name, x: &p.t, y: p.t_times_measure.clone() })
            .collect();
        files.push(("weakl1.svg", line_plot("t m(t)", &lines, true)));
    }
    if !report.series.truncations.is_empty() {
        let lines: Vec<Line> = report
            .series
            .truncations
            .iter()
            .map(|t| Line { name: &t.name, x: &t.upper, y: t.re.iter().zip(&t.im).map(|(a, b)| a.hypot(*b)).collect() })
            .collect();
        files.push(("truncation.svg", line_plot("|partial A-integral| against upper level", &lines, true)));
    }
    files
}

/// Writes the requested formats into `dir`, creating it if needed, and
/// returns the paths in write order. The summary lists every file written.
pub fn emit(report: &Report, formats: &[Format], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| LabError::io(format!("creating {}", dir.display()), e))?;
    let mut files: Vec<(String, String)> = Vec::new();
    if formats.contains(&Format::Csv) {
        files.push(("boundary.csv".into(), boundary_csv(report)));
        files.push(("truncation.csv".into(), truncation_csv(report)));
    }
    if formats.contains(&Format::Svg) {
        files.extend(svg_files(report).into_iter().map(|(n, s)| (n.to_string(), s)));
    }
    if formats.contains(&Format::Json) {
        let mut names: Vec<String> = files.iter().map(|f| f.0.clone()).collect();
        names.push(SUMMARY_FILE.into());
        let with_artifacts = Report { artifacts: names, ..report.clone() };
        files.push((SUMMARY_FILE.into(), with_artifacts.to_json()?));
    }
    let mut paths = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| LabError::io(format!("writing {}", path.display()), e))?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_lists_parse_and_dedup() {
        assert_eq!(parse_formats("csv, json,csv").unwrap(), vec![Format::Csv, Format::Json]);
        assert!(parse_formats("png").is_err());
        assert!(parse_formats("").unwrap().is_empty());
    }

    #[test]
    fn plot_survives_flat_and_empty_lines() {
        let x = [1.0, 2.0];
        let svg = line_plot("t", &[Line { name: "a<b", x: &x, y: vec![0.0, 0.0] }], true);
        assert!(svg.contains("a&lt;b"));
        assert!(!svg.contains("NaN"));
        let svg = line_plot("t", &[Line { name: "e", x: &[], y: Vec::new() }], false);
        assert!(svg.ends_with("</svg>\n"));
    }
}
