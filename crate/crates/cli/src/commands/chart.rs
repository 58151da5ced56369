//! `egospeed chart`: SVG line chart of speed traces.
//!
//! Input rows come from the estimate command; each file contributes its
//! `scaled` column (falling back to `smoothed`, then `raw`) and the first
//! file carrying ground truth contributes a reference series. The SVG is
//! written directly with fixed two-decimal coordinates, so identical inputs
//! give identical bytes.

use std::fs;
use std::path::Path;

use crate::error::CliError;
use crate::ChartArgs;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];
const GT_COLOR: &str = "#555555";

struct Series {
    label: String,
    color: String,
    points: Vec<(f64, f64)>,
}

pub fn run(args: ChartArgs) -> Result<(), CliError> {
    let mut series = Vec::new();
    let mut gt: Option<Series> = None;
    for (idx, path) in args.traces.iter().enumerate() {
        let (trace, file_gt) = parse_trace(path)?;
        series.push(Series {
            label: stem(path),
            color: PALETTE[idx % PALETTE.len()].to_string(),
            points: trace,
        });
        if gt.is_none() {
            if let Some(points) = file_gt {
                gt = Some(Series {
                    label: "ground truth".into(),
                    color: GT_COLOR.into(),
                    points,
                });
            }
        }
    }
    if let Some(gt) = gt {
        series.insert(0, gt);
    }
    series.retain(|s| !s.points.is_empty());
    if series.is_empty() {
        return Err(CliError::data("no plottable samples in the given traces"));
    }

    let svg = render(&series);
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(&args.out, svg)?;
    println!("wrote {} with {} series", args.out.display(), series.len());
    Ok(())
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("trace")
        .to_string()
}

type Points = Vec<(f64, f64)>;

/// Read (frame, value) points for the trace and, when present, ground truth.
fn parse_trace(path: &Path) -> Result<(Points, Option<Points>), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::data(format!("{}: empty trace", path.display())))?;
    let columns: Vec<&str> = header.split(',').collect();
    let col = |name: &str| columns.iter().position(|c| *c == name);
    let frame_col = col("frame_index")
        .ok_or_else(|| CliError::data(format!("{}: no frame_index column", path.display())))?;
    let value_col = col("scaled")
        .or_else(|| col("smoothed"))
        .or_else(|| col("raw"))
        .ok_or_else(|| {
            CliError::data(format!(
                "{}: no scaled, smoothed, or raw column",
                path.display()
            ))
        })?;
    let gt_col = col("gt");

    let mut points = Vec::new();
    let mut gt_points = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let frame: f64 = fields
            .get(frame_col)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| {
                CliError::data(format!("{}:{}: bad frame index", path.display(), lineno + 2))
            })?;
        if let Some(v) = fields.get(value_col).and_then(|v| v.parse::<f64>().ok()) {
            points.push((frame, v));
        }
        if let Some(gi) = gt_col {
            if let Some(v) = fields.get(gi).and_then(|v| v.parse::<f64>().ok()) {
                gt_points.push((frame, v));
            }
        }
    }
    let gt = (!gt_points.is_empty()).then_some(gt_points);
    Ok((points, gt))
}

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 48.0;

fn render(series: &[Series]) -> String {
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (0.0f64, f64::NEG_INFINITY);
    for s in series {
        for &(x, y) in &s.points {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
    }
    if x_max <= x_min {
        x_max = x_min + 1.0;
    }
    if y_max <= y_min {
        y_max = y_min + 1.0;
    }
    y_max += 0.05 * (y_max - y_min);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = move |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = move |y: f64| MARGIN_TOP + plot_h - (y - y_min) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">speed per frame</text>\n",
        MARGIN_LEFT
    ));

    // frame and axis labels
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let y_val = y_min + t * (y_max - y_min);
        let y_px = sy(y_val);
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{y_px:.2}\" x2=\"{:.2}\" y2=\"{y_px:.2}\" stroke=\"#dddddd\"/>\n",
            MARGIN_LEFT,
            WIDTH - MARGIN_RIGHT
        ));
        svg.push_str(&format!(
            "<text x=\"8\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\">{y_val:.2}</text>\n",
            y_px + 4.0
        ));
        let x_val = x_min + t * (x_max - x_min);
        let x_px = sx(x_val);
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{x_val:.0}</text>\n",
            x_px,
            HEIGHT - MARGIN_BOTTOM + 20.0
        ));
    }
    svg.push_str(&format!(
        "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{plot_w:.2}\" height=\"{plot_h:.2}\" fill=\"none\" stroke=\"#333333\"/>\n",
        MARGIN_LEFT, MARGIN_TOP
    ));

    for s in series {
        let coords: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            s.color,
            coords.join(" ")
        ));
    }

    // legend, top right
    for (i, s) in series.iter().enumerate() {
        let y = MARGIN_TOP + 14.0 + 16.0 * i as f64;
        let x = WIDTH - MARGIN_RIGHT - 180.0;
        svg.push_str(&format!(
            "<rect x=\"{x:.2}\" y=\"{:.2}\" width=\"12\" height=\"4\" fill=\"{}\"/>\n",
            y - 4.0,
            s.color
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            x + 18.0,
            s.label
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
