//! Writes a sweep to disk: a CSV of the grid, a JSON metadata file, and
//! an SVG line chart. All three are byte-deterministic functions of the
//! sweep result and the metadata strings.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::eval::{EvalError, SweepResult};

const CHART_WIDTH: f64 = 800.0;
const CHART_HEIGHT: f64 = 500.0;
const PLOT_LEFT: f64 = 70.0;
const PLOT_TOP: f64 = 50.0;
const PLOT_RIGHT: f64 = 620.0;
const PLOT_BOTTOM: f64 = 440.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

#[derive(Serialize)]
struct ReportMetadata<'a> {
    tool_version: &'a str,
    dataset_hash: &'a str,
    axis: &'a str,
    fixed: &'a [(String, f64)],
    repeats: usize,
    base_seed: u64,
    grid: Vec<f64>,
    models: Vec<String>,
}

fn write_file(path: &Path, contents: &str) -> Result<(), EvalError> {
    std::fs::write(path, contents).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Escapes the five XML special characters for text nodes and attributes.
fn xml_escape(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for c in raw.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn render_csv(result: &SweepResult) -> String {
    let mut out = String::from("model,axis,value,mean_acc,std_acc,repeats,seed\n");
    for p in &result.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.model, result.axis, p.value, p.mean_acc, p.std_acc, result.repeats,
            result.base_seed
        );
    }
    out
}

/// Accuracy-vs-axis line chart, one series per model, mean +/- std
/// whiskers at each point. Hand-built but strictly well-formed XML.
fn render_svg(result: &SweepResult) -> String {
    let grid = result.grid();
    let (x_min, x_max) = grid
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let x_of = |v: f64| {
        if x_max > x_min {
            PLOT_LEFT + (v - x_min) / (x_max - x_min) * (PLOT_RIGHT - PLOT_LEFT)
        } else {
            (PLOT_LEFT + PLOT_RIGHT) / 2.0
        }
    };
    let y_of = |acc: f64| PLOT_BOTTOM - acc.clamp(0.0, 1.0) * (PLOT_BOTTOM - PLOT_TOP);

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{CHART_WIDTH}\" \
         height=\"{CHART_HEIGHT}\" viewBox=\"0 0 {CHART_WIDTH} {CHART_HEIGHT}\">"
    );
    let _ = writeln!(
        s,
        "<rect x=\"0\" y=\"0\" width=\"{CHART_WIDTH}\" height=\"{CHART_HEIGHT}\" \
         fill=\"#ffffff\"/>"
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"18\">accuracy vs {}</text>",
        (PLOT_LEFT + PLOT_RIGHT) / 2.0,
        xml_escape(&result.axis)
    );

    // Horizontal gridlines and y tick labels at 0, 0.25, ..., 1.
    for k in 0..=4 {
        let acc = k as f64 * 0.25;
        let y = y_of(acc);
        let _ = writeln!(
            s,
            "<line x1=\"{PLOT_LEFT:.2}\" y1=\"{y:.2}\" x2=\"{PLOT_RIGHT:.2}\" \
             y2=\"{y:.2}\" stroke=\"#dddddd\" stroke-width=\"1\"/>"
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" \
             font-size=\"12\">{acc}</text>",
            PLOT_LEFT - 8.0,
            y + 4.0
        );
    }
    // X ticks at each grid value.
    for &v in &grid {
        let x = x_of(v);
        let _ = writeln!(
            s,
            "<line x1=\"{x:.2}\" y1=\"{PLOT_BOTTOM:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" \
             stroke=\"#999999\" stroke-width=\"1\"/>",
            PLOT_BOTTOM + 6.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" \
             font-family=\"sans-serif\" font-size=\"12\">{v}</text>",
            PLOT_BOTTOM + 22.0
        );
    }
    // Axis frame and labels.
    let _ = writeln!(
        s,
        "<rect x=\"{PLOT_LEFT:.2}\" y=\"{PLOT_TOP:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
         fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>",
        PLOT_RIGHT - PLOT_LEFT,
        PLOT_BOTTOM - PLOT_TOP
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"14\">{}</text>",
        (PLOT_LEFT + PLOT_RIGHT) / 2.0,
        CHART_HEIGHT - 14.0,
        xml_escape(&result.axis)
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"start\" font-family=\"sans-serif\" \
         font-size=\"14\">accuracy</text>",
        8.0,
        PLOT_TOP - 10.0
    );

    // One polyline + markers + whiskers per model.
    for (m, name) in result.model_names().iter().enumerate() {
        let color = PALETTE[m % PALETTE.len()];
        let series = result.series(name);
        let mut pts = String::new();
        for p in &series {
            let _ = write!(pts, "{:.2},{:.2} ", x_of(p.value), y_of(p.mean_acc));
        }
        let _ = writeln!(
            s,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>",
            pts.trim_end()
        );
        for p in &series {
            let x = x_of(p.value);
            let y = y_of(p.mean_acc);
            if p.std_acc > 0.0 {
                let _ = writeln!(
                    s,
                    "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" \
                     stroke=\"{color}\" stroke-width=\"1\"/>",
                    y_of(p.mean_acc + p.std_acc),
                    y_of(p.mean_acc - p.std_acc)
                );
            }
            let _ = writeln!(s, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{color}\"/>");
        }
        // Legend entry.
        let ly = PLOT_TOP + 10.0 + m as f64 * 22.0;
        let _ = writeln!(
            s,
            "<line x1=\"{:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" \
             stroke=\"{color}\" stroke-width=\"2\"/>",
            PLOT_RIGHT + 16.0,
            PLOT_RIGHT + 44.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"start\" \
             font-family=\"sans-serif\" font-size=\"13\">{}</text>",
            PLOT_RIGHT + 50.0,
            ly + 4.0,
            xml_escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `<axis>.csv`, `<axis>_meta.json`, and `<axis>.svg` into
/// `out_dir` (created if missing) and returns the written paths in that
/// order. Reruns with equal inputs produce byte-identical files.
pub fn emit_report(
    result: &SweepResult,
    tool_version: &str,
    dataset_hash: &str,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, EvalError> {
    std::fs::create_dir_all(out_dir).map_err(|source| EvalError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;

    let csv_path = out_dir.join(format!("{}.csv", result.axis));
    write_file(&csv_path, &render_csv(result))?;

    let meta = ReportMetadata {
        tool_version,
        dataset_hash,
        axis: &result.axis,
        fixed: &result.fixed,
        repeats: result.repeats,
        base_seed: result.base_seed,
        grid: result.grid(),
        models: result.model_names(),
    };
    let meta_path = out_dir.join(format!("{}_meta.json", result.axis));
    let mut meta_json =
        serde_json::to_string_pretty(&meta).expect("metadata serialization cannot fail");
    meta_json.push('\n');
    write_file(&meta_path, &meta_json)?;

    let svg_path = out_dir.join(format!("{}.svg", result.axis));
    write_file(&svg_path, &render_svg(result))?;

    Ok(vec![csv_path, meta_path, svg_path])
}
