//! Minimal polyline SVG plots.

use std::fmt::Write;

pub struct Line<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

pub struct Panel<'a> {
    pub y_label: &'a str,
    pub lines: Vec<Line<'a>>,
}

const WIDTH: f64 = 720.0;
const PANEL_H: f64 = 180.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const GAP: f64 = 30.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn bounds<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * lo.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1.0) * 1e-3;
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn path(points: impl Iterator<Item = (f64, f64)>) -> String {
    let mut d = String::new();
    let mut pen_down = false;
    for (x, y) in points {
        if !(x.is_finite() && y.is_finite()) {
            pen_down = false;
            continue;
        }
        let _ = write!(d, "{}{x:.2},{y:.2} ", if pen_down { 'L' } else { 'M' });
        pen_down = true;
    }
    d
}

/// Panels stacked vertically over a shared x axis.
pub fn stacked(title: &str, x_label: &str, panels: &[Panel]) -> String {
    let height = MARGIN_T + panels.len() as f64 * (PANEL_H + GAP) + 20.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="13">{title}</text>"#,
        WIDTH / 2.0
    );
    let (x0, x1) = bounds(
        panels
            .iter()
            .flat_map(|p| p.lines.iter().flat_map(|l| l.x.iter())),
    );
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    for (k, panel) in panels.iter().enumerate() {
        let top = MARGIN_T + k as f64 * (PANEL_H + GAP);
        let (y0, y1) = bounds(panel.lines.iter().flat_map(|l| l.y.iter()));
        let _ = writeln!(
            s,
            "<rect x=\"{MARGIN_L}\" y=\"{top}\" width=\"{plot_w}\" height=\"{PANEL_H}\" fill=\"none\" stroke=\"#888\"/>"
        );
        let _ = writeln!(
            s,
            r#"<text x="12" y="{:.1}" transform="rotate(-90 12 {:.1})" text-anchor="middle">{}</text>"#,
            top + PANEL_H / 2.0,
            top + PANEL_H / 2.0,
            panel.y_label
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{y1:.4}</text>"#,
            MARGIN_L - 4.0,
            top + 10.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{y0:.4}</text>"#,
            MARGIN_L - 4.0,
            top + PANEL_H
        );
        for (j, line) in panel.lines.iter().enumerate() {
            let pts = line.x.iter().zip(line.y).map(|(&x, &y)| {
                (
                    MARGIN_L + (x - x0) / (x1 - x0) * plot_w,
                    top + PANEL_H - (y - y0) / (y1 - y0) * PANEL_H,
                )
            });
            let color = COLORS[j % COLORS.len()];
            let _ = writeln!(
                s,
                r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.2"/>"#,
                path(pts)
            );
            if !line.label.is_empty() {
                let _ = writeln!(
                    s,
                    r#"<text x="{:.1}" y="{:.1}" fill="{color}">{}</text>"#,
                    MARGIN_L + 8.0,
                    top + 14.0 + 12.0 * j as f64,
                    line.label
                );
            }
        }
    }
    let bottom = MARGIN_T + panels.len() as f64 * (PANEL_H + GAP) - GAP + 14.0;
    let _ = writeln!(s, r#"<text x="{MARGIN_L}" y="{bottom:.1}">{x0:.4}</text>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{bottom:.1}" text-anchor="end">{x1:.4}</text>"#,
        WIDTH - MARGIN_R
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{bottom:.1}" text-anchor="middle">{x_label}</text>"#,
        WIDTH / 2.0
    );
    s.push_str("</svg>\n");
    s
}

/// Polylines in the unit shape disc, `x′` to the right and `z′` up.
pub fn disc(title: &str, polylines: &[Vec<(f64, f64)>]) -> String {
    let size = 520.0;
    let c = size / 2.0;
    let scale = 0.45 * size;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{}" font-family="sans-serif" font-size="11">"#,
        size + 20.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{c}" y="16" text-anchor="middle" font-size="13">{title}</text>"#
    );
    let _ = writeln!(
        s,
        "<circle cx=\"{c}\" cy=\"{}\" r=\"{scale}\" fill=\"none\" stroke=\"#888\"/>",
        c + 20.0
    );
    for line in polylines {
        let pts = line
            .iter()
            .map(|&(x, z)| (c + scale * x, c + 20.0 - scale * z));
        let _ = writeln!(
            s,
            r#"<path d="{}" fill="none" stroke="{}" stroke-width="0.8"/>"#,
            path(pts),
            COLORS[0]
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn breaks_path_on_nan() {
        let d = path([(0.0, 0.0), (1.0, f64::NAN), (2.0, 2.0), (3.0, 3.0)].into_iter());
        assert_eq!(d, "M0.00,0.00 M2.00,2.00 L3.00,3.00 ");
    }

    #[test]
    fn stacked_has_one_path_per_line() {
        let x = [0.0, 1.0, 2.0];
        let y = [1.0, 0.0, 1.0];
        let panels = [
            Panel {
                y_label: "a",
                lines: vec![Line {
                    label: "",
                    x: &x,
                    y: &y,
                }],
            },
            Panel {
                y_label: "b",
                lines: vec![
                    Line {
                        label: "u",
                        x: &x,
                        y: &y,
                    },
                    Line {
                        label: "w",
                        x: &x,
                        y: &y,
                    },
                ],
            },
        ];
        let svg = stacked("t", "x", &panels);
        assert_eq!(svg.matches("<path").count(), 3);
        assert!(svg.ends_with("</svg>\n"));
    }
}
