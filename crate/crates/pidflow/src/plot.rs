//! Self-contained SVG line plots with a log-scale y axis.
//!
//! Single static file, no scripts, no timestamps, so identical inputs
//! produce identical bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

const WIDTH: f64 = 840.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 78.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 42.0;
const MARGIN_BOTTOM: f64 = 56.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// One labeled curve; non-positive values are skipped on the log axis.
pub struct Series<'a> {
    pub label: String,
    pub times: &'a [f64],
    pub values: &'a [f64],
}

/// Renders a log-y line plot of the given series into `path`. The
/// `provenance` string (config hash and seed) is embedded as an XML
/// comment so the file is self-identifying; no timestamps are written.
pub fn render_log_plot(
    path: &Path,
    title: &str,
    y_label: &str,
    series: &[Series],
    provenance: &str,
) -> Result<()> {
    if series.is_empty() {
        return Err(Error::InvalidConfig("plot needs at least one series".into()));
    }
    let mut t_max = f64::NEG_INFINITY;
    let mut v_min = f64::INFINITY;
    let mut v_max = f64::NEG_INFINITY;
    for s in series {
        for (&t, &v) in s.times.iter().zip(s.values) {
            t_max = t_max.max(t);
            if v > 0.0 && v.is_finite() {
                v_min = v_min.min(v);
                v_max = v_max.max(v);
            }
        }
    }
    if !v_max.is_finite() || t_max <= 0.0 {
        return Err(Error::InvalidConfig(
            "plot needs positive finite samples".into(),
        ));
    }
    let mut dec_hi = v_max.log10().ceil();
    let mut dec_lo = v_min.log10().floor();
    if dec_hi == dec_lo {
        dec_hi += 1.0;
    }
    // Cap the span so a roundoff floor cannot stretch the axis unreadably.
    if dec_hi - dec_lo > 18.0 {
        dec_lo = dec_hi - 18.0;
    }

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_of = |t: f64| MARGIN_LEFT + t / t_max * plot_w;
    let y_of = |v: f64| {
        let d = v.log10().clamp(dec_lo, dec_hi);
        MARGIN_TOP + (dec_hi - d) / (dec_hi - dec_lo) * plot_h
    };

    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )?;
    if !provenance.is_empty() {
        writeln!(w, "<!-- {} -->", escape(provenance))?;
    }
    writeln!(w, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#)?;
    writeln!(
        w,
        r#"<text x="{:.1}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    )?;

    // Decade grid lines and y tick labels.
    let decades = (dec_hi - dec_lo) as i64;
    let label_every = (decades as f64 / 9.0).ceil().max(1.0) as i64;
    for k in 0..=decades {
        let d = dec_lo + k as f64;
        let y = MARGIN_TOP + (dec_hi - d) / (dec_hi - dec_lo) * plot_h;
        writeln!(
            w,
            r##"<line x1="{MARGIN_LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd" stroke-width="1"/>"##,
            WIDTH - MARGIN_RIGHT
        )?;
        if k % label_every == 0 {
            writeln!(
                w,
                r#"<text x="{:.1}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="end">1e{}</text>"#,
                MARGIN_LEFT - 8.0,
                y + 4.0,
                d as i64
            )?;
        }
    }
    // x ticks: six evenly spaced.
    for k in 0..=6 {
        let t = t_max * k as f64 / 6.0;
        let x = x_of(t);
        writeln!(
            w,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd" stroke-width="1"/>"##,
            MARGIN_TOP,
            HEIGHT - MARGIN_BOTTOM
        )?;
        writeln!(
            w,
            r#"<text x="{x:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">{t:.1}</text>"#,
            HEIGHT - MARGIN_BOTTOM + 18.0
        )?;
    }
    // Axes frame.
    writeln!(
        w,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w:.1}" height="{plot_h:.1}" fill="none" stroke="black" stroke-width="1"/>"#
    )?;
    writeln!(
        w,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle">time</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    )?;
    writeln!(
        w,
        r#"<text x="20" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 20 {:.1})">{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(y_label)
    )?;

    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let mut d = String::new();
        let mut pen_down = false;
        for (&t, &v) in s.times.iter().zip(s.values) {
            if v > 0.0 && v.is_finite() {
                let cmd = if pen_down { 'L' } else { 'M' };
                d.push_str(&format!("{cmd}{:.2},{:.2} ", x_of(t), y_of(v)));
                pen_down = true;
            } else {
                pen_down = false;
            }
        }
        writeln!(
            w,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.6"/>"#,
            d.trim_end()
        )?;
        // Legend entry.
        let ly = MARGIN_TOP + 16.0 + idx as f64 * 18.0;
        let lx = WIDTH - MARGIN_RIGHT - 190.0;
        writeln!(
            w,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#,
            lx + 26.0
        )?;
        writeln!(
            w,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12">{}</text>"#,
            lx + 32.0,
            ly + 4.0,
            escape(&s.label)
        )?;
    }
    writeln!(w, "</svg>")?;
    w.flush()?;
    Ok(())
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
