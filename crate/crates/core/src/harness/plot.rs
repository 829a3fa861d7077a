//! Self-contained SVG line chart: mean rate versus sweep value, one
//! series per (strategy, protocol) cell. The output is built from fixed
//! formatting only, so identical reports render identical bytes.

use super::{ExperimentReport, HarnessError, Protocol};
use crate::baselines::Strategy;
use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 62.0;
const MARGIN_RIGHT: f64 = 18.0;
const MARGIN_TOP: f64 = 24.0;
const MARGIN_BOTTOM: f64 = 46.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

struct Series {
    strategy: Strategy,
    protocol: Protocol,
    points: Vec<(f64, f64)>,
}

fn collect_series(report: &ExperimentReport) -> Vec<Series> {
    let mut series: Vec<Series> = Vec::new();
    for aggregate in &report.aggregates {
        let found = series
            .iter_mut()
            .find(|s| s.strategy == aggregate.strategy && s.protocol == aggregate.protocol);
        let point = (aggregate.sweep, aggregate.mean_rate);
        match found {
            Some(s) => s.points.push(point),
            None => series.push(Series {
                strategy: aggregate.strategy,
                protocol: aggregate.protocol,
                points: vec![point],
            }),
        }
    }
    for s in &mut series {
        s.points
            .sort_by(|a, b| a.0.partial_cmp(&b.0).expect("sweep values are finite"));
    }
    series
}

/// Renders the report as an SVG document string.
pub fn svg_string(report: &ExperimentReport) -> Result<String, HarnessError> {
    if report.aggregates.is_empty() {
        return Err(HarnessError::EmptyReport);
    }
    let series = collect_series(report);

    let xs: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
    let ys: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.1)).collect();
    let (mut x_min, mut x_max) = min_max(&xs);
    if (x_max - x_min).abs() < 1e-12 {
        x_min -= 0.5;
        x_max += 0.5;
    }
    let y_min = 0.0;
    let mut y_max = ys.iter().cloned().fold(0.0_f64, f64::max) * 1.05;
    if y_max <= 0.0 {
        y_max = 1.0;
    }

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let map_x = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let map_y = |y: f64| MARGIN_TOP + plot_h - (y - y_min) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"monospace\" font-size=\"12\">"
    )
    .unwrap();
    writeln!(
        svg,
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    )
    .unwrap();

    // axes
    writeln!(
        svg,
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
        MARGIN_LEFT,
        MARGIN_TOP + plot_h,
        MARGIN_LEFT + plot_w,
        MARGIN_TOP + plot_h
    )
    .unwrap();
    writeln!(
        svg,
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
        MARGIN_LEFT,
        MARGIN_TOP,
        MARGIN_LEFT,
        MARGIN_TOP + plot_h
    )
    .unwrap();

    // ticks and grid
    const TICKS: usize = 5;
    for i in 0..=TICKS {
        let f = i as f64 / TICKS as f64;
        let x_val = x_min + f * (x_max - x_min);
        let y_val = y_min + f * (y_max - y_min);
        let x = map_x(x_val);
        let y = map_y(y_val);
        writeln!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
            MARGIN_TOP + plot_h,
            MARGIN_TOP + plot_h + 5.0
        )
        .unwrap();
        writeln!(
            svg,
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{x_val:.1}</text>",
            MARGIN_TOP + plot_h + 18.0
        )
        .unwrap();
        writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"black\"/>",
            MARGIN_LEFT - 5.0,
            MARGIN_LEFT
        )
        .unwrap();
        writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{y_val:.2}</text>",
            MARGIN_LEFT - 8.0,
            y + 4.0
        )
        .unwrap();
        if i > 0 {
            writeln!(
                svg,
                "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" \
                 stroke=\"#dddddd\" stroke-dasharray=\"3,3\"/>",
                MARGIN_LEFT,
                MARGIN_LEFT + plot_w
            )
            .unwrap();
        }
    }

    // axis labels
    writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">sweep value</text>",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 8.0
    )
    .unwrap();
    writeln!(
        svg,
        "<text x=\"14\" y=\"{:.2}\" text-anchor=\"middle\" \
         transform=\"rotate(-90 14 {:.2})\">mean min rate (bit/s/Hz)</text>",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    )
    .unwrap();

    // series
    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let mut path = String::new();
        for (x, y) in &s.points {
            if !path.is_empty() {
                path.push(' ');
            }
            write!(path, "{:.2},{:.2}", map_x(*x), map_y(*y)).unwrap();
        }
        writeln!(
            svg,
            "<polyline points=\"{path}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>"
        )
        .unwrap();
        for (x, y) in &s.points {
            writeln!(
                svg,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>",
                map_x(*x),
                map_y(*y)
            )
            .unwrap();
        }
        // legend entry
        let ly = MARGIN_TOP + 8.0 + 16.0 * idx as f64;
        let lx = MARGIN_LEFT + 12.0;
        writeln!(
            svg,
            "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" \
             stroke=\"{color}\" stroke-width=\"2\"/>",
            lx + 22.0
        )
        .unwrap();
        writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\">{}/{}</text>",
            lx + 28.0,
            ly + 4.0,
            s.strategy,
            s.protocol
        )
        .unwrap();
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

fn min_max(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::super::{Protocol, ReportRow};
    use super::*;

    fn report() -> ExperimentReport {
        let mut rows = Vec::new();
        for (strategy, base) in [(Strategy::CrsSca, 2.0), (Strategy::Nrs, 1.0)] {
            for (i, sweep) in [0.0, 10.0, 20.0].into_iter().enumerate() {
                rows.push(ReportRow {
                    sweep,
                    strategy,
                    protocol: Protocol::OneBest,
                    trial: 0,
                    rate: base + i as f64,
                    theta: 0.7,
                    iterations: 4,
                    wall_ms: 0,
                    channel_hash: 1,
                });
            }
        }
        ExperimentReport::from_rows(rows, 0)
    }

    #[test]
    fn renders_one_polyline_per_series() {
        let svg = svg_string(&report()).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 6);
        assert!(svg.contains("crs_sca/one_best"));
        assert!(svg.contains("nrs/one_best"));
    }

    #[test]
    fn rendering_is_deterministic() {
        assert_eq!(svg_string(&report()).unwrap(), svg_string(&report()).unwrap());
    }

    #[test]
    fn empty_report_is_an_error() {
        let empty = ExperimentReport::from_rows(vec![], 0);
        assert!(matches!(svg_string(&empty), Err(HarnessError::EmptyReport)));
    }

    #[test]
    fn single_sweep_point_still_renders() {
        let rows = vec![ReportRow {
            sweep: 20.0,
            strategy: Strategy::Sdma,
            protocol: Protocol::Optimal,
            trial: 0,
            rate: 1.5,
            theta: 1.0,
            iterations: 3,
            wall_ms: 0,
            channel_hash: 9,
        }];
        let svg = svg_string(&ExperimentReport::from_rows(rows, 0)).unwrap();
        assert!(svg.contains("sdma/optimal"));
    }
}
