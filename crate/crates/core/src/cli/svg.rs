//! Plain SVG overlay of planar convex sets and labelled points.

use crate::convex_sets::ConvexSet;
use crate::double_projection::FigurePoint;

const SIZE: f64 = 480.0;
const COLORS: [&str; 5] = ["#000000", "#d62728", "#1f77b4", "#2ca02c", "#9467bd"];

struct Window {
    lo: [f64; 2],
    span: f64,
}

impl Window {
    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.lo[0]) / self.span * SIZE, SIZE - (y - self.lo[1]) / self.span * SIZE)
    }
}

fn window(points: &[FigurePoint]) -> Window {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points {
        for k in 0..2 {
            lo[k] = lo[k].min(p.point[k]);
            hi[k] = hi[k].max(p.point[k]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-3) * 2.0;
    let mid = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
    Window { lo: [mid[0] - span / 2.0, mid[1] - span / 2.0], span }
}

/// Chord of the set clipped to a generous multiple of the window.
fn chord(set: &ConvexSet, reach: f64) -> Option<([f64; 2], [f64; 2])> {
    let (a, b) = match set {
        ConvexSet::Segment { a, b } => (a.clone(), b.clone()),
        ConvexSet::HalfLine { origin, direction } => (origin.clone(), origin + direction * reach),
        ConvexSet::Line { point, direction } => (point - direction * reach, point + direction * reach),
        _ => return None,
    };
    (a.len() == 2).then(|| ([a[0], a[1]], [b[0], b[1]]))
}

pub fn overlay(sets: &[(&str, &ConvexSet)], points: &[FigurePoint]) -> String {
    let w = window(points);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    for (i, (name, set)) in sets.iter().enumerate() {
        let Some((a, b)) = chord(set, 10.0 * w.span) else { continue };
        let (x1, y1) = w.map(a[0], a[1]);
        let (x2, y2) = w.map(b[0], b[1]);
        let dash = if i == 0 { "" } else { " stroke-dasharray=\"6 4\"" };
        out.push_str(&format!(
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"#555\" stroke-width=\"1.5\"{dash}/>\n"
        ));
        let (lx, ly) = w.map(set.base_point()[0], set.base_point()[1]);
        out.push_str(&format!("<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" fill=\"#555\">{name}</text>\n", lx + 6.0, ly - 6.0));
    }
    for (i, p) in points.iter().enumerate() {
        let (x, y) = w.map(p.point[0], p.point[1]);
        let c = COLORS[i % COLORS.len()];
        out.push_str(&format!("<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"4\" fill=\"{c}\"/>\n"));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" fill=\"{c}\">{}</text>\n",
            x + 6.0,
            y + 14.0,
            p.label
        ));
    }
    out.push_str("</svg>\n");
    out
}
