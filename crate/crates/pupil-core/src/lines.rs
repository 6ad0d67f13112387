//! Connected edge pixels as ordered polylines, plus the straightness filter.

use crate::raster::EdgeImage;

/// Integer pixel coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PixelPoint {
    pub x: i32,
    pub y: i32,
}

impl PixelPoint {
    pub fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }
}

/// Ordered run of 8-connected edge pixels. `closed` lines loop back to
/// their first point; open lines end at pixels with a single neighbor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polyline {
    pub points: Vec<PixelPoint>,
    pub closed: bool,
}

impl Polyline {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Arithmetic centroid of all points.
    pub fn centroid(&self) -> (f64, f64) {
        let n = self.points.len().max(1) as f64;
        let sx: f64 = self.points.iter().map(|p| p.x as f64).sum();
        let sy: f64 = self.points.iter().map(|p| p.y as f64).sum();
        (sx / n, sy / n)
    }
}

/// Traversal neighbor order; fixed so polyline ordering is reproducible.
const NEIGHBOR_ORDER: [(i64, i64); 8] = [
    (1, 0),   // E
    (1, 1),   // SE
    (0, 1),   // S
    (-1, 1),  // SW
    (-1, 0),  // W
    (-1, -1), // NW
    (0, -1),  // N
    (1, -1),  // NE
];

/// Collect every edge pixel into exactly one polyline.
///
/// Open lines are started first, at pixels with exactly one neighbor;
/// whatever remains (cycles) is collected as closed lines starting at the
/// first unvisited pixel in raster order. The input is expected to have at
/// most two neighbors per pixel (junction-free); extra branches are simply
/// consumed by later traversals.
pub fn collect_lines(edges: &EdgeImage) -> Vec<Polyline> {
    let (w, h) = (edges.width(), edges.height());
    let mut visited = vec![false; w * h];
    let mut lines = Vec::new();

    let trace = |sx: usize, sy: usize, visited: &mut Vec<bool>| -> Vec<PixelPoint> {
        let mut points = Vec::new();
        let (mut cx, mut cy) = (sx as i64, sy as i64);
        loop {
            visited[cy as usize * w + cx as usize] = true;
            points.push(PixelPoint::new(cx as i32, cy as i32));
            let mut next = None;
            for (dx, dy) in NEIGHBOR_ORDER {
                let (nx, ny) = (cx + dx, cy + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                if edges.get(nx as usize, ny as usize) && !visited[ny as usize * w + nx as usize] {
                    next = Some((nx, ny));
                    break;
                }
            }
            match next {
                Some((nx, ny)) => (cx, cy) = (nx, ny),
                None => break,
            }
        }
        points
    };

    // Phase 1: open lines from single-neighbor endpoints.
    for y in 0..h {
        for x in 0..w {
            if edges.get(x, y) && !visited[y * w + x] && edges.neighbor_count(x, y) == 1 {
                let points = trace(x, y, &mut visited);
                lines.push(Polyline {
                    points,
                    closed: false,
                });
            }
        }
    }

    // Phase 2: whatever remains loops back onto itself.
    for y in 0..h {
        for x in 0..w {
            if edges.get(x, y) && !visited[y * w + x] {
                let points = trace(x, y, &mut visited);
                let closed = points.len() >= 3 && {
                    let first = points[0];
                    let last = points[points.len() - 1];
                    (first.x - last.x).abs() <= 1 && (first.y - last.y).abs() <= 1
                };
                lines.push(Polyline { points, closed });
            }
        }
    }

    lines
}

/// Decide whether a line is curved.
///
/// A curved line keeps its pixels away from the centroid of the line: if
/// the nearest pixel is closer than `min_mean_line_dist` the line is
/// straight. The line must also have spread in both axes, so axis-aligned
/// runs never count as curved regardless of the distance test.
pub fn is_curved(line: &Polyline, min_mean_line_dist: f64) -> bool {
    if line.points.len() < 2 {
        return false;
    }
    let (min_x, max_x) = line
        .points
        .iter()
        .fold((i32::MAX, i32::MIN), |(lo, hi), p| (lo.min(p.x), hi.max(p.x)));
    let (min_y, max_y) = line
        .points
        .iter()
        .fold((i32::MAX, i32::MIN), |(lo, hi), p| (lo.min(p.y), hi.max(p.y)));
    if max_x == min_x || max_y == min_y {
        return false;
    }
    let (cx, cy) = line.centroid();
    let min_dist = line
        .points
        .iter()
        .map(|p| ((p.x as f64 - cx).powi(2) + (p.y as f64 - cy).powi(2)).sqrt())
        .fold(f64::INFINITY, f64::min);
    min_dist >= min_mean_line_dist
}

/// Drop short and straight lines.
pub fn prune_lines(lines: Vec<Polyline>, min_line_length: usize, min_mean_line_dist: f64) -> Vec<Polyline> {
    lines
        .into_iter()
        .filter(|l| l.len() >= min_line_length && is_curved(l, min_mean_line_dist))
        .collect()
}
