//! SAPPHIRE plot as a static SVG: the cut function on a log axis above one
//! color strip per annotation column.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{ensure, Context, Result};
use sapphire_core::progindex::{read_progress_csv, ProgressTable};

const WIDTH: f64 = 960.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 16.0;
const CURVE_HEIGHT: f64 = 320.0;
const STRIP_HEIGHT: f64 = 18.0;
const STRIP_GAP: f64 = 6.0;
const MARGIN_BOTTOM: f64 = 36.0;
/// Cut values of zero are drawn at this height.
const LOG_FLOOR: f64 = 0.5;

const CATEGORICAL: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];
const GRADIENT: [&str; 8] = [
    "#440154", "#46327e", "#365c8d", "#277f8e", "#1fa187", "#4ac16d", "#a0da39", "#fde725",
];

/// Reads a progress CSV and writes its SVG plot.
pub fn emit_sapphire_svg(progress_csv: &Path, svg: &Path) -> Result<()> {
    let table = read_progress_csv(progress_csv).with_context(|| format!("reading {}", progress_csv.display()))?;
    let text = render_svg(&table)?;
    std::fs::write(svg, text).with_context(|| format!("writing {}", svg.display()))
}

/// Color index per position: categorical when the column holds few distinct
/// integers, binned along a gradient otherwise.
pub fn strip_colors(values: &[f64]) -> Vec<&'static str> {
    let mut distinct: Vec<f64> = Vec::new();
    let categorical = values.iter().all(|v| {
        if v.fract() != 0.0 || !v.is_finite() {
            return false;
        }
        if !distinct.contains(v) {
            distinct.push(*v);
        }
        distinct.len() <= CATEGORICAL.len()
    });
    if categorical {
        distinct.sort_by(f64::total_cmp);
        return values
            .iter()
            .map(|v| CATEGORICAL[distinct.iter().position(|d| d == v).unwrap_or(0)])
            .collect();
    }
    let lo = values.iter().copied().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    values
        .iter()
        .map(|&v| {
            if !v.is_finite() || !(span > 0.0) {
                return GRADIENT[0];
            }
            let k = ((v - lo) / span * GRADIENT.len() as f64) as usize;
            GRADIENT[k.min(GRADIENT.len() - 1)]
        })
        .collect()
}

pub fn render_svg(table: &ProgressTable) -> Result<String> {
    let n = table.rows.len();
    ensure!(n >= 1, "progress table is empty");
    let cuts = table.cut_values();
    ensure!(cuts.len() + 1 == n, "progress table has {} cut values for {n} rows", cuts.len());

    let strips = table.annotation_names.len();
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let strips_top = MARGIN_TOP + CURVE_HEIGHT + STRIP_GAP;
    let height = strips_top + strips as f64 * (STRIP_HEIGHT + STRIP_GAP) + MARGIN_BOTTOM;
    let x_of = |pos: f64| MARGIN_LEFT + pos / n as f64 * plot_w;

    let max_cut = cuts.iter().copied().max().unwrap_or(1).max(1) as f64;
    let log_lo = LOG_FLOOR.log10();
    let log_hi = (max_cut * 1.5).log10();
    let y_of = |c: f64| {
        let l = c.max(LOG_FLOOR).log10();
        MARGIN_TOP + CURVE_HEIGHT * (1.0 - (l - log_lo) / (log_hi - log_lo))
    };

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height:.0}" viewBox="0 0 {WIDTH} {height:.0}" font-family="sans-serif" font-size="11">"#
    )?;
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
    writeln!(
        s,
        r#"<rect class="frame" x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{CURVE_HEIGHT}" fill="none" stroke="black"/>"#
    )?;

    let mut decade = 1.0;
    while decade <= max_cut * 1.5 {
        let y = y_of(decade);
        writeln!(
            s,
            r##"<line x1="{MARGIN_LEFT}" x2="{:.1}" y1="{y:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.1}" y="{:.2}" text-anchor="end">{decade}</text>"##,
            MARGIN_LEFT + plot_w,
            MARGIN_LEFT - 4.0,
            y + 4.0
        )?;
        decade *= 10.0;
    }

    // split after position p sits at x(p + 1)
    s.push_str(r#"<polyline class="cut" fill="none" stroke="black" stroke-width="1" points=""#);
    for (p, c) in cuts.iter().enumerate() {
        if p > 0 {
            s.push(' ');
        }
        write!(s, "{:.2},{:.2}", x_of((p + 1) as f64), y_of(*c as f64))?;
    }
    s.push_str("\"/>\n");

    for (k, name) in table.annotation_names.iter().enumerate() {
        let y = strips_top + k as f64 * (STRIP_HEIGHT + STRIP_GAP);
        let values: Vec<f64> = table.rows.iter().map(|r| r.annotations[k]).collect();
        let colors = strip_colors(&values);
        writeln!(s, r#"<g class="strip" data-name="{}">"#, escape(name))?;
        let mut start = 0;
        for p in 1..=n {
            if p == n || colors[p] != colors[start] {
                writeln!(
                    s,
                    r#"<rect x="{:.2}" y="{y:.2}" width="{:.2}" height="{STRIP_HEIGHT}" fill="{}" data-start="{start}" data-end="{p}"/>"#,
                    x_of(start as f64),
                    x_of(p as f64) - x_of(start as f64),
                    colors[start]
                )?;
                start = p;
            }
        }
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.2}" text-anchor="end">{}</text></g>"#,
            MARGIN_LEFT - 4.0,
            y + STRIP_HEIGHT - 5.0,
            escape(name)
        )?;
    }

    writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">progress index (N = {n})</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        height - 10.0
    )?;
    writeln!(
        s,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">cut</text>"#,
        MARGIN_TOP + CURVE_HEIGHT / 2.0,
        MARGIN_TOP + CURVE_HEIGHT / 2.0
    )?;
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Points of the cut polyline, parsed back from an SVG produced here.
pub fn cut_points(svg: &str) -> Vec<(f64, f64)> {
    let Some(start) = svg.find(r#"class="cut""#) else {
        return Vec::new();
    };
    let rest = &svg[start..];
    let Some(p) = rest.find("points=\"") else {
        return Vec::new();
    };
    let body = &rest[p + 8..];
    let body = &body[..body.find('"').unwrap_or(body.len())];
    body.split_whitespace()
        .filter_map(|pt| {
            let (x, y) = pt.split_once(',')?;
            Some((x.parse().ok()?, y.parse().ok()?))
        })
        .collect()
}

/// `(fill, start, end)` of each run in the strip named `name`.
pub fn strip_runs(svg: &str, name: &str) -> Vec<(String, usize, usize)> {
    let tag = format!(r#"<g class="strip" data-name="{}">"#, escape(name));
    let Some(start) = svg.find(&tag) else {
        return Vec::new();
    };
    let group = &svg[start..];
    let group = &group[..group.find("</g>").unwrap_or(group.len())];
    let attr = |line: &str, key: &str| -> Option<String> {
        let k = format!("{key}=\"");
        let i = line.find(&k)? + k.len();
        Some(line[i..i + line[i..].find('"')?].to_owned())
    };
    group
        .lines()
        .filter(|l| l.starts_with("<rect"))
        .filter_map(|l| {
            Some((
                attr(l, "fill")?,
                attr(l, "data-start")?.parse().ok()?,
                attr(l, "data-end")?.parse().ok()?,
            ))
        })
        .collect()
}
