//! Minimal SVG output: polylines and contour lines with plain axes.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sim::DensityGrid;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 48.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#7f7f7f"];

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

impl Curve {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
            dashed: false,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn around<'a>(points: impl Iterator<Item = &'a (f64, f64)>) -> Self {
        let mut f = Frame {
            x0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y0: f64::INFINITY,
            y1: f64::NEG_INFINITY,
        };
        for (x, y) in points {
            f.x0 = f.x0.min(*x);
            f.x1 = f.x1.max(*x);
            f.y0 = f.y0.min(*y);
            f.y1 = f.y1.max(*y);
        }
        if !(f.x1 > f.x0) {
            f.x0 -= 0.5;
            f.x1 += 0.5;
        }
        if !(f.y1 > f.y0) {
            f.y0 -= 0.5;
            f.y1 += 0.5;
        }
        f
    }

    fn map(&self, (x, y): (f64, f64)) -> (f64, f64) {
        let px = MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN);
        let py = HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN);
        (px, py)
    }
}

fn open_document(frame: &Frame, title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (left, bottom) = (MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<line x1="{left}" y1="{bottom}" x2="{}" y2="{bottom}" stroke="black"/>"#,
        WIDTH - MARGIN
    );
    let _ = writeln!(s, r#"<line x1="{left}" y1="{bottom}" x2="{left}" y2="{MARGIN}" stroke="black"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{left}" y="{}" font-size="11">{:.3}</text><text x="{}" y="{}" font-size="11" text-anchor="end">{:.3}</text>"#,
        bottom + 16.0,
        frame.x0,
        WIDTH - MARGIN,
        bottom + 16.0,
        frame.x1
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{bottom}" font-size="11" text-anchor="end">{:.3}</text><text x="{}" y="{}" font-size="11" text-anchor="end">{:.3}</text>"#,
        left - 4.0,
        frame.y0,
        left - 4.0,
        MARGIN + 4.0,
        frame.y1
    );
    if !title.is_empty() {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            MARGIN / 2.0,
            escape(title)
        );
    }
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn path_data(frame: &Frame, points: &[(f64, f64)], closed: bool) -> String {
    let mut d = String::new();
    for (i, p) in points.iter().enumerate() {
        let (x, y) = frame.map(*p);
        let _ = write!(d, "{}{x:.2},{y:.2}", if i == 0 { "M" } else { " L" });
    }
    if closed {
        d.push_str(" Z");
    }
    d
}

/// One `<path>` per curve; nothing is written when there is nothing to draw.
pub fn write_curves(path: &Path, title: &str, curves: &[Curve]) -> Result<()> {
    if curves.is_empty() || curves.iter().any(|c| c.points.is_empty()) {
        return Err(Error::EmptyInput);
    }
    let frame = Frame::around(curves.iter().flat_map(|c| c.points.iter()));
    let mut s = open_document(&frame, title);
    for (k, c) in curves.iter().enumerate() {
        let dash = if c.dashed { r#" stroke-dasharray="4 3""# } else { "" };
        let _ = writeln!(
            s,
            r#"<path d="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}><title>{}</title></path>"#,
            path_data(&frame, &c.points, false),
            COLORS[k % COLORS.len()],
            escape(&c.label)
        );
    }
    s.push_str("</svg>\n");
    std::fs::write(path, s)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContourLine {
    pub level: f64,
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
}

/// Identifies a grid edge: horizontal from `(i, j)` to `(i+1, j)` or
/// vertical from `(i, j)` to `(i, j+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

/// Marching squares on the density grid, segments chained into lines.
pub fn contour_lines(grid: &DensityGrid, level: f64) -> Vec<ContourLine> {
    let v = &grid.values;
    let nx = grid.xs.len();
    let ny = grid.ys.len();
    let crossing = |e: Edge| -> (f64, f64) {
        let (a, b, pa, pb) = match e {
            Edge::H(i, j) => (v[i][j], v[i + 1][j], (grid.xs[i], grid.ys[j]), (grid.xs[i + 1], grid.ys[j])),
            Edge::V(i, j) => (v[i][j], v[i][j + 1], (grid.xs[i], grid.ys[j]), (grid.xs[i], grid.ys[j + 1])),
        };
        let t = (level - a) / (b - a);
        (pa.0 + t * (pb.0 - pa.0), pa.1 + t * (pb.1 - pa.1))
    };
    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for i in 0..nx.saturating_sub(1) {
        for j in 0..ny.saturating_sub(1) {
            let above = |a: usize, b: usize| v[a][b] >= level;
            let corners = [above(i, j), above(i + 1, j), above(i + 1, j + 1), above(i, j + 1)];
            let bottom = Edge::H(i, j);
            let right = Edge::V(i + 1, j);
            let top = Edge::H(i, j + 1);
            let left = Edge::V(i, j);
            let crossed: Vec<Edge> = [
                (corners[0] != corners[1], bottom),
                (corners[1] != corners[2], right),
                (corners[2] != corners[3], top),
                (corners[3] != corners[0], left),
            ]
            .iter()
            .filter(|(c, _)| *c)
            .map(|(_, e)| *e)
            .collect();
            match crossed.len() {
                2 => segments.push((crossed[0], crossed[1])),
                4 => {
                    let center = (v[i][j] + v[i + 1][j] + v[i + 1][j + 1] + v[i][j + 1]) / 4.0;
                    // corners 0 and 2 share a side of the level
                    if (center >= level) == corners[0] {
                        segments.push((bottom, right));
                        segments.push((top, left));
                    } else {
                        segments.push((bottom, left));
                        segments.push((top, right));
                    }
                }
                _ => {}
            }
        }
    }
    let mut by_edge: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        by_edge.entry(*a).or_default().push(k);
        by_edge.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    let next_from = |edge: Edge, used: &[bool]| -> Option<usize> {
        by_edge.get(&edge)?.iter().copied().find(|k| !used[*k])
    };
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (first, second) = segments[start];
        // walk forward from `second`, then backward from `first`
        let mut forward = vec![first, second];
        let mut cur = second;
        while let Some(k) = next_from(cur, &used) {
            used[k] = true;
            let (a, b) = segments[k];
            cur = if a == cur { b } else { a };
            forward.push(cur);
        }
        let closed = forward.len() > 2 && forward.first() == forward.last();
        if !closed {
            let mut backward = Vec::new();
            let mut cur = first;
            while let Some(k) = next_from(cur, &used) {
                used[k] = true;
                let (a, b) = segments[k];
                cur = if a == cur { b } else { a };
                backward.push(cur);
            }
            backward.reverse();
            backward.extend(forward);
            forward = backward;
        } else {
            forward.pop();
        }
        lines.push(ContourLine {
            level,
            points: forward.into_iter().map(crossing).collect(),
            closed,
        });
    }
    lines
}

/// Contours of `grid` at `levels`, optionally over a reference grid drawn dashed.
pub fn write_contours(
    path: &Path,
    title: &str,
    grid: &DensityGrid,
    levels: &[f64],
    reference: Option<&DensityGrid>,
) -> Result<()> {
    if levels.is_empty() || grid.xs.len() < 2 || grid.ys.len() < 2 {
        return Err(Error::EmptyInput);
    }
    let corners = [
        (grid.xs[0], grid.ys[0]),
        (*grid.xs.last().unwrap(), *grid.ys.last().unwrap()),
    ];
    let frame = Frame::around(corners.iter());
    let mut s = open_document(&frame, title);
    let layers = std::iter::once((grid, false)).chain(reference.map(|r| (r, true)));
    for (g, dashed) in layers {
        for (k, level) in levels.iter().enumerate() {
            for line in contour_lines(g, *level) {
                let dash = if dashed { r#" stroke-dasharray="4 3""# } else { "" };
                let _ = writeln!(
                    s,
                    r#"<path d="{}" fill="none" stroke="{}" stroke-width="1.2"{dash}><title>{level}</title></path>"#,
                    path_data(&frame, &line.points, line.closed),
                    COLORS[k % COLORS.len()]
                );
            }
        }
    }
    s.push_str("</svg>\n");
    std::fs::write(path, s)?;
    Ok(())
}
