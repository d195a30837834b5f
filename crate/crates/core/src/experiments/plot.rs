//! Two-panel SVG of CCE gap and per-player CCE values against iteration.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::bundle::{write_aggregate_csv, AggregateRow, ResultBundle};
use crate::error::{Error, Result};

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 360.0;
const PANEL: f64 = 380.0;
const MARGIN: f64 = 50.0;
const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct Panel {
    x0: f64,
    y_min: f64,
    y_max: f64,
    x_max: f64,
}

impl Panel {
    fn new(x0: f64, lows: impl Iterator<Item = f64>, highs: impl Iterator<Item = f64>, x_max: usize) -> Self {
        let mut y_min = lows.fold(f64::INFINITY, f64::min);
        let mut y_max = highs.fold(f64::NEG_INFINITY, f64::max);
        if (y_max - y_min).abs() < 1e-12 {
            y_min -= 0.5;
            y_max += 0.5;
        }
        Panel {
            x0,
            y_min,
            y_max,
            x_max: x_max.max(1) as f64,
        }
    }

    fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 / self.x_max * PANEL
    }

    fn y(&self, v: f64) -> f64 {
        let top = MARGIN;
        let bottom = HEIGHT - MARGIN;
        bottom - (v - self.y_min) / (self.y_max - self.y_min) * (bottom - top)
    }

    fn frame(&self, svg: &mut String, title: &str) {
        let (top, bottom) = (MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(
            svg,
            r#"<rect x="{:.1}" y="{top:.1}" width="{PANEL:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
            self.x0,
            bottom - top
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">{title}</text>"#,
            self.x0 + PANEL / 2.0,
            top - 12.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="11">iteration</text>"#,
            self.x0 + PANEL / 2.0,
            bottom + 30.0
        );
        for (v, anchor) in [(self.y_min, bottom), (self.y_max, top)] {
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{v:.3e}</text>"#,
                self.x0 - 4.0,
                anchor + 4.0
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{}</text>"#,
            self.x0 + PANEL,
            bottom + 14.0,
            self.x_max as usize
        );
    }

    fn series(&self, svg: &mut String, mean: &[f64], std: &[f64], colour: &str) {
        if mean.len() == 1 {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{colour}"/>"#,
                self.x(0),
                self.y(mean[0])
            );
            return;
        }
        let mut band = String::new();
        for (i, (m, s)) in mean.iter().zip(std).enumerate() {
            let _ = write!(band, "{:.2},{:.2} ", self.x(i), self.y(m + s));
        }
        for (i, (m, s)) in mean.iter().zip(std).enumerate().rev() {
            let _ = write!(band, "{:.2},{:.2} ", self.x(i), self.y(m - s));
        }
        let _ = writeln!(
            svg,
            r#"<polygon points="{}" fill="{colour}" fill-opacity="0.2" stroke="none"/>"#,
            band.trim_end()
        );
        let line: Vec<String> = mean
            .iter()
            .enumerate()
            .map(|(i, m)| format!("{:.2},{:.2}", self.x(i), self.y(*m)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            line.join(" ")
        );
    }
}

/// SVG with the mean CCE gap (left) and mean per-player CCE values (right),
/// each with a one-standard-deviation band.
pub fn render_svg(rows: &[AggregateRow], title: &str) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Parse("nothing to plot: empty trace".into()));
    }
    let last = rows.len() - 1;
    let gap_mean: Vec<f64> = rows.iter().map(|r| r.cce_gap_mean).collect();
    let gap_std: Vec<f64> = rows.iter().map(|r| r.cce_gap_std).collect();
    let n = rows[0].value_mean.len();
    let left = Panel::new(
        MARGIN + 20.0,
        rows.iter().map(|r| (r.cce_gap_mean - r.cce_gap_std).min(0.0)),
        rows.iter().map(|r| r.cce_gap_mean + r.cce_gap_std),
        last,
    );
    let right = Panel::new(
        MARGIN * 2.0 + PANEL + 40.0,
        rows.iter().flat_map(|r| r.value_mean.iter().zip(&r.value_std).map(|(m, s)| m - s)).collect::<Vec<_>>().into_iter(),
        rows.iter().flat_map(|r| r.value_mean.iter().zip(&r.value_std).map(|(m, s)| m + s)).collect::<Vec<_>>().into_iter(),
        last,
    );
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="16" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    left.frame(&mut svg, "CCE gap");
    left.series(&mut svg, &gap_mean, &gap_std, COLOURS[0]);
    right.frame(&mut svg, "CCE value per player");
    for p in 0..n {
        let mean: Vec<f64> = rows.iter().map(|r| r.value_mean[p]).collect();
        let std: Vec<f64> = rows.iter().map(|r| r.value_std[p]).collect();
        let colour = COLOURS[p % COLOURS.len()];
        right.series(&mut svg, &mean, &std, colour);
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" fill="{colour}">player {p}</text>"#,
            right.x0 + PANEL + 6.0,
            MARGIN + 14.0 * (p as f64 + 1.0)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Write `<stem>.svg` and its companion `<stem>.csv` into `out`. Returns
/// the paths written. Nothing is written when the bundle has no records.
pub fn plot_bundle(bundle: &ResultBundle, out: &Path) -> Result<Vec<PathBuf>> {
    let config = &bundle.header.config;
    let title = format!("{} / {} ({} seeds)", config.neupl.run.game, config.algo, bundle.runs.len());
    let svg = render_svg(&bundle.aggregate, &title)?;
    let mut csv = Vec::new();
    write_aggregate_csv(&bundle.aggregate, &mut csv)?;
    fs::create_dir_all(out)?;
    let stem: String = config
        .neupl
        .run
        .game
        .to_string()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    let svg_path = out.join(format!("{stem}.svg"));
    let csv_path = out.join(format!("{stem}.csv"));
    fs::write(&svg_path, svg)?;
    fs::write(&csv_path, csv)?;
    Ok(vec![svg_path, csv_path])
}
