//! Static SVG line plots of closed-loop runs, no external renderer.

use std::fmt::Write as _;

use lpv_dpc::control::TrajectoryLog;

const WIDTH: f64 = 760.0;
const PANEL_HEIGHT: f64 = 150.0;
const MARGIN_LEFT: f64 = 62.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 24.0;
const PANEL_GAP: f64 = 34.0;

struct Series<'a> {
    label: &'a str,
    color: &'a str,
    dashed: bool,
    points: Vec<(f64, f64)>,
}

fn series_bounds(series: &[Series<'_>]) -> (f64, f64, f64, f64) {
    let (mut x_min, mut x_max, mut y_min, mut y_max) =
        if let Some(p) = series.iter().flat_map(|s| s.points.iter()).next() {
            (p.0, p.0, p.1, p.1)
        } else {
            (0.0, 1.0, 0.0, 1.0)
        };
    for s in series {
        for (x, y) in &s.points {
            x_min = x_min.min(*x);
            x_max = x_max.max(*x);
            y_min = y_min.min(*y);
            y_max = y_max.max(*y);
        }
    }
    if (x_max - x_min).abs() < 1e-12 {
        x_max = x_min + 1.0;
    }
    if (y_max - y_min).abs() < 1e-12 {
        y_max = y_min + 1.0;
        y_min -= 1.0;
    }
    let pad = 0.06 * (y_max - y_min);
    (x_min, x_max, y_min - pad, y_max + pad)
}

fn panel(out: &mut String, series: &[Series<'_>], title: &str, y_offset: f64, x_label: &str) {
    let (x_min, x_max, y_min, y_max) = series_bounds(series);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = PANEL_HEIGHT;
    let sx = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |y: f64| y_offset + plot_h - (y - y_min) / (y_max - y_min) * plot_h;

    let _ = writeln!(
        out,
        r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#888" stroke-width="1"/>"##,
        MARGIN_LEFT, y_offset, plot_w, plot_h
    );
    let _ = writeln!(
        out,
        r##"<text x="{:.1}" y="{:.1}" font-size="12" font-family="monospace">{}</text>"##,
        MARGIN_LEFT,
        y_offset - 7.0,
        title
    );
    // Axis extremes.
    for (val, y) in [(y_max, y_offset + 11.0), (y_min, y_offset + plot_h - 2.0)] {
        let _ = writeln!(
            out,
            r##"<text x="{:.1}" y="{:.1}" font-size="10" font-family="monospace" text-anchor="end">{val:.3}</text>"##,
            MARGIN_LEFT - 5.0,
            y
        );
    }
    for (val, anchor, x) in [
        (x_min, "start", MARGIN_LEFT),
        (x_max, "end", MARGIN_LEFT + plot_w),
    ] {
        let _ = writeln!(
            out,
            r##"<text x="{x:.1}" y="{:.1}" font-size="10" font-family="monospace" text-anchor="{anchor}">{val:.2}</text>"##,
            y_offset + plot_h + 12.0
        );
    }
    let _ = writeln!(
        out,
        r##"<text x="{:.1}" y="{:.1}" font-size="10" font-family="monospace" text-anchor="middle">{x_label}</text>"##,
        MARGIN_LEFT + plot_w / 2.0,
        y_offset + plot_h + 12.0
    );
    // Zero line when visible.
    if y_min < 0.0 && y_max > 0.0 {
        let _ = writeln!(
            out,
            r##"<line x1="{:.1}" y1="{:.2}" x2="{:.1}" y2="{:.2}" stroke="#ccc" stroke-width="1"/>"##,
            MARGIN_LEFT,
            sy(0.0),
            MARGIN_LEFT + plot_w,
            sy(0.0)
        );
    }
    let mut legend_x = MARGIN_LEFT + 8.0;
    for s in series {
        let mut path = String::new();
        for (i, (x, y)) in s.points.iter().enumerate() {
            let _ = write!(path, "{}{:.2},{:.2} ", if i == 0 { "M" } else { "L" }, sx(*x), sy(*y));
        }
        let dash = if s.dashed { r##" stroke-dasharray="6 3""## } else { "" };
        let _ = writeln!(
            out,
            r##"<path d="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"##,
            path.trim_end(),
            s.color
        );
        let _ = writeln!(
            out,
            r##"<text x="{legend_x:.1}" y="{:.1}" font-size="10" font-family="monospace" fill="{}">{}</text>"##,
            y_offset + 12.0,
            s.color,
            s.label
        );
        legend_x += 12.0 * (s.label.len() as f64).max(3.0);
    }
}

/// Renders reference/output, input and scheduling panels for one run.
pub fn render_log(log: &TrajectoryLog<f64>, title: &str) -> String {
    let records = log.records();
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let take = |f: &dyn Fn(&lpv_dpc::control::LogRecord<f64>) -> f64| -> Vec<(f64, f64)> {
        records.iter().zip(&t).map(|(r, t)| (*t, f(r))).collect()
    };

    let n_p = records.first().map(|r| r.p.len()).unwrap_or(1);
    let mut p_series = Vec::new();
    let palette = ["#2b8a3e", "#845ef7", "#e8590c"];
    for i in 0..n_p {
        p_series.push(Series {
            label: if n_p == 1 { "p" } else { ["p_1", "p_2", "p_3"][i.min(2)] },
            color: palette[i % palette.len()],
            dashed: false,
            points: take(&move |r| r.p[i]),
        });
    }

    let panels: Vec<(&str, Vec<Series<'_>>)> = vec![
        (
            "output tracking",
            vec![
                Series {
                    label: "r",
                    color: "#e6a117",
                    dashed: true,
                    points: take(&|r| r.r[0]),
                },
                Series {
                    label: "y",
                    color: "#1864ab",
                    dashed: false,
                    points: take(&|r| r.y[0]),
                },
            ],
        ),
        (
            "control input",
            vec![Series {
                label: "u",
                color: "#c92a2a",
                dashed: false,
                points: take(&|r| r.u[0]),
            }],
        ),
        ("scheduling", p_series),
    ];

    let total_h = MARGIN_TOP + panels.len() as f64 * (PANEL_HEIGHT + PANEL_GAP) + 8.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{total_h:.0}" viewBox="0 0 {WIDTH:.0} {total_h:.0}">"#
    );
    let _ = writeln!(
        out,
        r##"<rect width="100%" height="100%" fill="white"/><text x="{:.1}" y="16" font-size="13" font-family="monospace" font-weight="bold">{title}</text>"##,
        MARGIN_LEFT
    );
    let mut y = MARGIN_TOP + 14.0;
    let last = panels.len() - 1;
    for (i, (name, series)) in panels.iter().enumerate() {
        let x_label = if i == last { "time [s]" } else { "" };
        panel(&mut out, series, name, y, x_label);
        y += PANEL_HEIGHT + PANEL_GAP;
    }
    let _ = writeln!(out, "</svg>");
    out
}
