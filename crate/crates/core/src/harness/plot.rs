//! Deterministic SVG rendering of phase diagrams and `C0` scatters.

use std::fmt::Write as _;
use std::path::Path;

use super::c0::C0Scatter;
use super::sweep::PhaseDiagram;
use crate::error::{Error, Result};

const WIDTH: f64 = 600.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 70.0;
const TOP: f64 = 40.0;
const PLOT_W: f64 = 480.0;
const PLOT_H: f64 = 360.0;

pub enum PlotData<'a> {
    Diagram(&'a PhaseDiagram),
    Scatter(&'a C0Scatter),
}

pub fn emit_plot(data: PlotData<'_>, path: &Path) -> Result<()> {
    let svg = match data {
        PlotData::Diagram(d) => render_heatmap(d)?,
        PlotData::Scatter(s) => render_scatter(s)?,
    };
    std::fs::write(path, svg)?;
    Ok(())
}

fn header(out: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{title}</text>"#, LEFT + PLOT_W / 2.0);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{x_label}</text>"#,
        LEFT + PLOT_W / 2.0,
        TOP + PLOT_H + 40.0
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{:.1}" text-anchor="middle" transform="rotate(-90 20 {:.1})">{y_label}</text>"#,
        TOP + PLOT_H / 2.0,
        TOP + PLOT_H / 2.0
    );
}

fn frame(out: &mut String) {
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{PLOT_W}" height="{PLOT_H}" fill="none" stroke="black"/>"#
    );
    out.push_str("</svg>\n");
}

/// Keeps at most ~12 tick labels along an axis.
fn tick_stride(count: usize) -> usize {
    count.div_ceil(12).max(1)
}

pub fn render_heatmap(d: &PhaseDiagram) -> Result<String> {
    let cells: Vec<_> = d.cells.iter().filter(|c| c.trials > 0).collect();
    if cells.is_empty() {
        return Err(Error::InvalidInput("phase diagram has no completed cells".into()));
    }
    let mut ms: Vec<usize> = cells.iter().map(|c| c.m).collect();
    let mut ss: Vec<usize> = cells.iter().map(|c| c.s).collect();
    ms.sort_unstable();
    ms.dedup();
    ss.sort_unstable();
    ss.dedup();
    let cw = PLOT_W / ms.len() as f64;
    let ch = PLOT_H / ss.len() as f64;

    let mut out = String::new();
    header(&mut out, "Perfect recovery rate (white = 100%)", "m", "s");
    let _ = writeln!(out, r##"<rect x="{LEFT}" y="{TOP}" width="{PLOT_W}" height="{PLOT_H}" fill="#c8c8ff"/>"##);
    for c in &cells {
        let col = ms.binary_search(&c.m).unwrap_or(0);
        let row = ss.binary_search(&c.s).unwrap_or(0);
        let x = LEFT + col as f64 * cw;
        let y = TOP + PLOT_H - (row + 1) as f64 * ch;
        let v = (c.rate.clamp(0.0, 1.0) * 255.0).round() as u8;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{cw:.2}" height="{ch:.2}" fill="rgb({v},{v},{v})"><title>m={} s={} rate={:.4}</title></rect>"#,
            c.m, c.s, c.rate
        );
    }
    let stride = tick_stride(ms.len());
    for (i, m) in ms.iter().enumerate().filter(|(i, _)| i % stride == 0) {
        let x = LEFT + (i as f64 + 0.5) * cw;
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.1}" text-anchor="middle">{m}</text>"#, TOP + PLOT_H + 16.0);
    }
    let stride = tick_stride(ss.len());
    for (i, s) in ss.iter().enumerate().filter(|(i, _)| i % stride == 0) {
        let y = TOP + PLOT_H - (i as f64 + 0.5) * ch + 4.0;
        let _ = writeln!(out, r#"<text x="{:.1}" y="{y:.2}" text-anchor="end">{s}</text>"#, LEFT - 6.0);
    }
    frame(&mut out);
    Ok(out)
}

pub fn render_scatter(sc: &C0Scatter) -> Result<String> {
    if sc.points.is_empty() {
        return Err(Error::InvalidInput("scatter has no points".into()));
    }
    let s_min = sc.points.iter().map(|p| p.s).min().unwrap_or(0) as f64 - 0.5;
    let s_max = sc.points.iter().map(|p| p.s).max().unwrap_or(0) as f64 + 0.5;
    let y_max = sc.points.iter().map(|p| p.ratio).fold(0.0, f64::max).max(1e-12) * 1.05;
    let px = |s: f64| LEFT + (s - s_min) / (s_max - s_min) * PLOT_W;
    let py = |r: f64| TOP + PLOT_H - r / y_max * PLOT_H;

    let mut out = String::new();
    header(&mut out, "Lower bounds on C0", "s", "C0 bound");
    for p in &sc.points {
        let _ = writeln!(
            out,
            r##"<circle cx="{:.2}" cy="{:.2}" r="2" fill="#1f4e9c" fill-opacity="0.5"/>"##,
            px(p.s as f64),
            py(p.ratio)
        );
    }
    let mut s_values: Vec<usize> = sc.points.iter().map(|p| p.s).collect();
    s_values.sort_unstable();
    s_values.dedup();
    let stride = tick_stride(s_values.len());
    for s in s_values.iter().step_by(stride) {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.1}" text-anchor="middle">{s}</text>"#,
            px(*s as f64),
            TOP + PLOT_H + 16.0
        );
    }
    for k in 0..=4 {
        let r = y_max * k as f64 / 4.0;
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.2}" text-anchor="end">{r:.3}</text>"#, LEFT - 6.0, py(r) + 4.0);
    }
    frame(&mut out);
    Ok(out)
}
