//! SVG heatmaps of similarity matrices.
//!
//! Colors run linearly from white at the low end to dark blue at the high
//! end. Cosine plots use the fixed range [-1, 1] so plots of different words
//! are comparable; euclidean plots use the matrix's own [min, max].

use std::fmt::Write as _;

use diachron_core::simmat::{Metric, SimilarityMatrix};

use crate::{CliError, Result};

const CELL: usize = 24;
const LEFT: usize = 80;
const TOP: usize = 40;
const LEGEND_W: usize = 16;
const LOW: [f64; 3] = [255.0, 255.0, 255.0];
const HIGH: [f64; 3] = [8.0, 48.0, 107.0];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Hex color of position `x` in `[0, 1]` along the ramp.
pub fn ramp(x: f64) -> String {
    let x = x.clamp(0.0, 1.0);
    let c: Vec<u8> = (0..3).map(|i| (LOW[i] + (HIGH[i] - LOW[i]) * x).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Value range mapped onto the ramp.
pub fn value_range(m: &SimilarityMatrix) -> (f64, f64) {
    match m.metric {
        Metric::Cosine => (-1.0, 1.0),
        Metric::Euclidean => {
            let lo = m.values().iter().copied().fold(f64::INFINITY, f64::min);
            let hi = m.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi > lo {
                (lo, hi)
            } else {
                (lo, lo + 1.0)
            }
        }
    }
}

/// Render `m` with period `labels` on both axes.
pub fn render_svg(m: &SimilarityMatrix, labels: &[String], title: &str) -> Result<String> {
    let t = m.num_periods();
    if t < 2 {
        return Err(CliError::Usage("heatmap needs at least 2 periods".into()));
    }
    if labels.len() != t {
        return Err(CliError::Usage(format!("{} labels for {t} periods", labels.len())));
    }
    let (lo, hi) = value_range(m);
    let grid = t * CELL;
    let legend_x = LEFT + grid + 24;
    let width = legend_x + LEGEND_W + 64;
    let height = TOP + grid + 70;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="10">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{width}" height="{height}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{LEFT}" y="20" font-size="13">{}</text>"#, escape(title)).unwrap();
    for i in 0..t {
        for j in 0..t {
            let v = m.get(i, j);
            writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="{}"><title>{} / {}: {v:.4}</title></rect>"#,
                LEFT + j * CELL,
                TOP + i * CELL,
                ramp((v - lo) / (hi - lo)),
                escape(&labels[i]),
                escape(&labels[j]),
            )
            .unwrap();
        }
    }
    for (i, l) in labels.iter().enumerate() {
        let centre = i * CELL + CELL / 2;
        writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            LEFT - 4,
            TOP + centre,
            escape(l)
        )
        .unwrap();
        let (x, y) = (LEFT + centre, TOP + grid + 6);
        writeln!(
            s,
            r#"<text x="{x}" y="{y}" text-anchor="end" dominant-baseline="middle" transform="rotate(-90 {x} {y})">{}</text>"#,
            escape(l)
        )
        .unwrap();
    }

    writeln!(s, r#"<defs><linearGradient id="ramp" x1="0" y1="1" x2="0" y2="0">"#).unwrap();
    for k in 0..=4 {
        let x = k as f64 / 4.0;
        writeln!(s, r#"<stop offset="{x}" stop-color="{}"/>"#, ramp(x)).unwrap();
    }
    writeln!(s, "</linearGradient></defs>").unwrap();
    writeln!(
        s,
        r#"<rect x="{legend_x}" y="{TOP}" width="{LEGEND_W}" height="{grid}" fill="url(#ramp)" stroke="black" stroke-width="0.5"/>"#
    )
    .unwrap();
    for (frac, v) in [(0.0, hi), (0.5, (lo + hi) / 2.0), (1.0, lo)] {
        writeln!(
            s,
            r#"<text x="{}" y="{}" dominant-baseline="middle">{v:.3}</text>"#,
            legend_x + LEGEND_W + 4,
            TOP as f64 + frac * grid as f64
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{legend_x}" y="{}">{}</text>"#,
        TOP + grid + 20,
        m.metric
    )
    .unwrap();
    s.push_str("</svg>\n");
    Ok(s)
}
