//! SVG rendering of a height-1 `(p, q)` polygon.

use std::fmt::Write;

use num_bigint::BigInt;
use sasakit::json::bigint_to_f64;

const CELL: f64 = 40.0;
const MARGIN: f64 = 30.0;

pub fn polygon_svg(points: &[(BigInt, BigInt)]) -> String {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .map(|(p, q)| (bigint_to_f64(p), bigint_to_f64(q)))
        .collect();
    let min_x = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min).floor();
    let max_x = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max).ceil();
    let min_y = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).floor();
    let max_y = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).ceil();
    let width = (max_x - min_x) * CELL + 2.0 * MARGIN;
    let height = (max_y - min_y) * CELL + 2.0 * MARGIN;
    // SVG y grows downward
    let sx = |x: f64| MARGIN + (x - min_x) * CELL;
    let sy = |y: f64| MARGIN + (max_y - y) * CELL;

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    )
    .unwrap();
    writeln!(out, r##"<g fill="#bbb">"##).unwrap();
    for gx in (min_x as i64)..=(max_x as i64) {
        for gy in (min_y as i64)..=(max_y as i64) {
            writeln!(
                out,
                r#"<circle cx="{}" cy="{}" r="1.5"/>"#,
                sx(gx as f64),
                sy(gy as f64)
            )
            .unwrap();
        }
    }
    writeln!(out, "</g>").unwrap();
    let path: Vec<String> = pts
        .iter()
        .map(|&(x, y)| format!("{},{}", sx(x), sy(y)))
        .collect();
    writeln!(
        out,
        r##"<polygon points="{}" fill="#dde8f5" stroke="#1f4e8c" stroke-width="2"/>"##,
        path.join(" ")
    )
    .unwrap();
    for (i, (&(x, y), (p, q))) in pts.iter().zip(points).enumerate() {
        writeln!(
            out,
            r##"<circle cx="{}" cy="{}" r="4" fill="#1f4e8c"><title>{i}: ({p}, {q})</title></circle>"##,
            sx(x),
            sy(y)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}
