//! Hand-written SVG for sweeps: three stacked panels sharing the `a` axis
//! (energies, half-widths, mixing coefficients), plus a gnuplot script that
//! draws the same layout from `sweep.dat`.

use std::fmt::Write as _;

use ep_lab_core::SweepResult;

const WIDTH: f64 = 640.0;
const PANEL_HEIGHT: f64 = 200.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 110.0;
const TOP: f64 = 28.0;
const BOTTOM: f64 = 30.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

struct Series<'a> {
    label: &'a str,
    values: Vec<f64>,
    color: &'a str,
    dashed: bool,
}

struct Panel<'a> {
    ylabel: &'a str,
    series: Vec<Series<'a>>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    if hi - lo < 1e-12 * lo.abs().max(1.0) {
        let pad = 0.1 * lo.abs().max(1e-3);
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn draw_panel(svg: &mut String, panel: &Panel, xs: &[f64], xr: (f64, f64), y0: f64) {
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = PANEL_HEIGHT - TOP - BOTTOM;
    let top = y0 + TOP;
    let yr = range(panel.series.iter().flat_map(|s| s.values.iter().copied()));
    let px = |x: f64| LEFT + (x - xr.0) / (xr.1 - xr.0) * plot_w;
    let py = |y: f64| top + (yr.1 - y) / (yr.1 - yr.0) * plot_h;

    let _ = writeln!(
        svg,
        r##"<rect x="{LEFT:.2}" y="{top:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="#000"/>"##
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = xr.0 + t * (xr.1 - xr.0);
        let yv = yr.0 + t * (yr.1 - yr.0);
        let (x, y) = (px(xv), py(yv));
        let bottom = top + plot_h;
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="#000"/><text x="{x:.2}" y="{:.2}" font-size="10" text-anchor="middle">{xv:.3}</text>"##,
            bottom - 4.0,
            bottom + 13.0
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#000"/><text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{yv:.4}</text>"##,
            LEFT + 4.0,
            LEFT - 4.0,
            y + 3.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" font-size="12" transform="rotate(-90 16 {:.2})" text-anchor="middle">{}</text>"#,
        top + plot_h / 2.0,
        top + plot_h / 2.0,
        escape(panel.ylabel)
    );

    for (i, s) in panel.series.iter().enumerate() {
        let mut points = String::new();
        for (&x, &y) in xs.iter().zip(&s.values) {
            if y.is_finite() {
                let _ = write!(points, "{:.2},{:.2} ", px(x), py(y));
            }
        }
        let dash = if s.dashed { r#" stroke-dasharray="4 3""# } else { "" };
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.2"{dash} points="{}"/>"#,
            s.color,
            points.trim_end()
        );
        let ly = top + 12.0 + 14.0 * i as f64;
        let lx = WIDTH - RIGHT + 10.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}"{dash}/><text x="{:.2}" y="{ly:.2}" font-size="11">{}</text>"#,
            ly - 4.0,
            lx + 18.0,
            ly - 4.0,
            s.color,
            lx + 22.0,
            escape(s.label)
        );
    }
}

pub fn sweep_svg(result: &SweepResult) -> String {
    let xs = result.column(|r| r.a);
    let xr = (result.config.a_grid.start, result.config.a_grid.stop);
    let col = |f: fn(&ep_lab_core::SweepRow) -> f64| result.column(f);
    let panels = [
        Panel {
            ylabel: "E",
            series: vec![
                Series { label: "E1", values: col(|r| r.energies[0]), color: COLORS[0], dashed: false },
                Series { label: "E2", values: col(|r| r.energies[1]), color: COLORS[1], dashed: false },
                Series { label: "e1", values: col(|r| r.bare[0]), color: COLORS[0], dashed: true },
                Series { label: "e2", values: col(|r| r.bare[1]), color: COLORS[1], dashed: true },
            ],
        },
        Panel {
            ylabel: "Γ/2",
            series: vec![
                Series { label: "Γ1/2", values: col(|r| r.half_widths[0]), color: COLORS[0], dashed: false },
                Series { label: "Γ2/2", values: col(|r| r.half_widths[1]), color: COLORS[1], dashed: false },
            ],
        },
        Panel {
            ylabel: "|b|²",
            series: vec![
                Series { label: "|b11|²", values: col(|r| r.mixing_sq[0][0]), color: COLORS[0], dashed: false },
                Series { label: "|b12|²", values: col(|r| r.mixing_sq[0][1]), color: COLORS[2], dashed: false },
                Series { label: "|b21|²", values: col(|r| r.mixing_sq[1][0]), color: COLORS[1], dashed: true },
                Series { label: "|b22|²", values: col(|r| r.mixing_sq[1][1]), color: COLORS[3], dashed: true },
            ],
        },
    ];

    let height = PANEL_HEIGHT * panels.len() as f64 + 20.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="#fff"/>"##);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="16" font-size="13" text-anchor="middle">{}</text>"#,
        LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
        escape(&result.config.name)
    );
    for (i, panel) in panels.iter().enumerate() {
        draw_panel(&mut svg, panel, &xs, xr, 10.0 + PANEL_HEIGHT * i as f64);
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">a</text>"#,
        LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
        height - 4.0
    );
    svg.push_str("</svg>\n");
    svg
}

/// Script that renders `data` into `plot.svg` with the same three panels.
pub fn gnuplot_script(title: &str, data: &str) -> String {
    let title = title.replace('\'', "");
    format!(
        "set terminal svg size 640,620
set output 'plot.svg'
set multiplot layout 3,1 title '{title}'
set xlabel 'a'
set ylabel 'E'
plot '{data}' using 1:2 with lines title 'E1', '' using 1:3 with lines title 'E2', \\
     '' using 1:14 with lines dashtype 2 title 'e1', '' using 1:15 with lines dashtype 2 title 'e2'
set ylabel 'Gamma/2'
plot '{data}' using 1:4 with lines title 'G1/2', '' using 1:5 with lines title 'G2/2'
set ylabel '|b|^2'
plot '{data}' using 1:6 with lines title '|b11|^2', '' using 1:7 with lines title '|b12|^2', \\
     '' using 1:8 with lines dashtype 2 title '|b21|^2', '' using 1:9 with lines dashtype 2 title '|b22|^2'
unset multiplot
"
    )
}
