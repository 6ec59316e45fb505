//! Deterministic SVG contour rendering of the streamfunction.
//!
//! Marching squares on the sampled grid, eleven contour levels placed
//! symmetrically about zero at `max|psi| * (i - 6) / 6`, each level in its
//! own `<g data-level="...">` group. Segments are chained into polylines
//! and closed loops get an explicit `Z`, so the innermost cell contour of
//! a single vortex shows up as exactly one closed path. All coordinates
//! are fixed-precision, making byte output a pure function of the grid.

use crate::fields::FieldGrid;

const MARGIN: f64 = 24.0;
const SCALE: f64 = 240.0;

pub(crate) fn render_psi_contours(grid: &FieldGrid) -> String {
    let width = grid.length * SCALE + 2.0 * MARGIN;
    let height = SCALE + 2.0 * MARGIN;
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\">\n"
    ));
    out.push_str(&format!(
        "  <rect x=\"{MARGIN:.1}\" y=\"{MARGIN:.1}\" width=\"{:.1}\" height=\"{SCALE:.1}\" \
         fill=\"none\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n",
        grid.length * SCALE
    ));

    let max = grid.psi.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if max > 0.0 {
        for i in 1..=11 {
            let level = max * (i as f64 - 6.0) / 6.0;
            let colour = if level < 0.0 {
                "#2166ac"
            } else if level > 0.0 {
                "#b2182b"
            } else {
                "#888888"
            };
            out.push_str(&format!("  <g data-level=\"{level:.6e}\">\n"));
            for chain in chains(grid, level) {
                out.push_str("    <path d=\"");
                for (k, (s, z)) in chain.points.iter().enumerate() {
                    let x = MARGIN + z / (grid.nz - 1) as f64 * grid.length * SCALE;
                    let y = MARGIN + (1.0 - s / (grid.nr - 1) as f64) * SCALE;
                    out.push_str(&format!("{}{x:.3} {y:.3}", if k == 0 { "M" } else { " L" }));
                }
                if chain.closed {
                    out.push_str(" Z");
                }
                out.push_str(&format!(
                    "\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"1\"/>\n"
                ));
            }
            out.push_str("  </g>\n");
        }
    }
    out.push_str("</svg>\n");
    out
}

/// One contour component in fractional grid-index coordinates `(s, z)`.
struct Chain {
    points: Vec<(f64, f64)>,
    closed: bool,
}

type Point = (f64, f64);

fn quantize(p: Point) -> (i64, i64) {
    ((p.0 * 1e6).round() as i64, (p.1 * 1e6).round() as i64)
}

/// Marching squares, then segment chaining.
fn chains(grid: &FieldGrid, level: f64) -> Vec<Chain> {
    let at = |i: usize, j: usize| grid.psi[i * grid.nz + j];
    let mut segments: Vec<(Point, Point)> = Vec::new();

    for i in 0..grid.nr - 1 {
        for j in 0..grid.nz - 1 {
            // Corners in order: 0 (i,j), 1 (i,j+1), 2 (i+1,j+1), 3 (i+1,j);
            // edge k joins corner k and corner (k+1) % 4.
            let corner = [
                (i as f64, j as f64),
                (i as f64, j as f64 + 1.0),
                (i as f64 + 1.0, j as f64 + 1.0),
                (i as f64 + 1.0, j as f64),
            ];
            let value = [at(i, j), at(i, j + 1), at(i + 1, j + 1), at(i + 1, j)];
            let inside = [
                value[0] > level,
                value[1] > level,
                value[2] > level,
                value[3] > level,
            ];
            let mut crossings: Vec<(usize, Point)> = Vec::new();
            for k in 0..4 {
                let k2 = (k + 1) % 4;
                if inside[k] != inside[k2] {
                    let t = (level - value[k]) / (value[k2] - value[k]);
                    let p = (
                        corner[k].0 + t * (corner[k2].0 - corner[k].0),
                        corner[k].1 + t * (corner[k2].1 - corner[k].1),
                    );
                    crossings.push((k, p));
                }
            }
            match crossings.len() {
                2 => segments.push((crossings[0].1, crossings[1].1)),
                4 => {
                    // Saddle: the cell average decides which corners the
                    // contour separates.
                    let center_inside = 0.25 * value.iter().sum::<f64>() > level;
                    let edge = |k: usize| crossings.iter().find(|(e, _)| *e == k).unwrap().1;
                    if inside[0] == center_inside {
                        segments.push((edge(0), edge(1)));
                        segments.push((edge(2), edge(3)));
                    } else {
                        segments.push((edge(3), edge(0)));
                        segments.push((edge(1), edge(2)));
                    }
                }
                _ => {}
            }
        }
    }

    chain_segments(segments)
}

fn chain_segments(segments: Vec<(Point, Point)>) -> Vec<Chain> {
    use std::collections::HashMap;
    let mut adjacency: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (idx, (a, b)) in segments.iter().enumerate() {
        adjacency.entry(quantize(*a)).or_default().push(idx);
        adjacency.entry(quantize(*b)).or_default().push(idx);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let mut points = vec![segments[start].0, segments[start].1];
        // Extend forwards, then backwards.
        for forwards in [true, false] {
            loop {
                let tip = if forwards {
                    *points.last().unwrap()
                } else {
                    points[0]
                };
                let Some(candidates) = adjacency.get(&quantize(tip)) else {
                    break;
                };
                let Some(&next) = candidates.iter().find(|idx| !used[**idx]) else {
                    break;
                };
                used[next] = true;
                let (a, b) = segments[next];
                let far = if quantize(a) == quantize(tip) { b } else { a };
                if forwards {
                    points.push(far);
                } else {
                    points.insert(0, far);
                }
            }
        }
        let closed = points.len() > 2 && quantize(points[0]) == quantize(*points.last().unwrap());
        if closed {
            points.pop();
        }
        out.push(Chain { points, closed });
    }
    out
}
