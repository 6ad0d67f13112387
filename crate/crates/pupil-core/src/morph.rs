//! Edge-image filtering that isolates line segments able to belong to an
//! ellipse arc.
//!
//! Two interchangeable approaches are provided. The default, mask-based one
//! runs four stages over the binary edge image:
//!
//! 1. thinning — no fully-set 2x2 block survives,
//! 2. junction removal — pixels joining more than two lines are dropped,
//! 3. straightening — one-pixel lateral jogs are moved back in line,
//! 4. orthogonal break-up — pixels connecting two segments that meet at a
//!    right angle are removed, so each surviving line has a consistent
//!    bend direction.
//!
//! The alternative, algorithmic approach splits collected polylines where
//! the chord angle/distance progression stops looking like an ellipse
//! traversal (see [`break_line_algorithmic`]).
//!
//! Scan order is row-major top-left to bottom-right and pattern effects
//! apply immediately, so results are deterministic.

use crate::lines::{PixelPoint, Polyline};
use crate::raster::EdgeImage;

/// Per-cell obligations and effects of one oriented stencil.
///
/// `require_set` / `require_clear` cells gate the match and lie within the
/// 3x3 window around the anchor; `context_set` / `context_clear` cells are
/// arm-continuation checks just outside the window that disambiguate
/// motifs a 3x3 window cannot tell apart (a jog in a straight line versus
/// the apex of two lines meeting at a right angle). `delete` and `add`
/// list the rewrite.
#[derive(Debug, Clone)]
pub struct Pattern {
    require_set: Vec<(i8, i8)>,
    require_clear: Vec<(i8, i8)>,
    context_set: Vec<(i8, i8)>,
    context_clear: Vec<(i8, i8)>,
    delete: Vec<(i8, i8)>,
    add: Vec<(i8, i8)>,
}

impl Pattern {
    fn rotated(&self) -> Pattern {
        // 90 degrees clockwise in screen coordinates (y down).
        let rot = |cells: &[(i8, i8)]| cells.iter().map(|&(dx, dy)| (-dy, dx)).collect();
        Pattern {
            require_set: rot(&self.require_set),
            require_clear: rot(&self.require_clear),
            context_set: rot(&self.context_set),
            context_clear: rot(&self.context_clear),
            delete: rot(&self.delete),
            add: rot(&self.add),
        }
    }

    fn matches(&self, e: &EdgeImage, x: i64, y: i64) -> bool {
        let at = |cells: &[(i8, i8)], want: bool| {
            cells
                .iter()
                .all(|&(dx, dy)| e.get_checked(x + dx as i64, y + dy as i64) == want)
        };
        at(&self.require_set, true)
            && at(&self.require_clear, false)
            && at(&self.context_set, true)
            && at(&self.context_clear, false)
    }

    fn apply(&self, e: &mut EdgeImage, x: i64, y: i64) {
        let w = e.width() as i64;
        let h = e.height() as i64;
        for &(dx, dy) in &self.delete {
            let (px, py) = (x + dx as i64, y + dy as i64);
            if px >= 0 && py >= 0 && px < w && py < h {
                e.set(px as usize, py as usize, false);
            }
        }
        for &(dx, dy) in &self.add {
            let (px, py) = (x + dx as i64, y + dy as i64);
            if px >= 0 && py >= 0 && px < w && py < h {
                e.set(px as usize, py as usize, true);
            }
        }
    }
}

/// A base stencil together with its rotations.
#[derive(Debug, Clone)]
pub struct PatternSet {
    patterns: Vec<Pattern>,
}

impl PatternSet {
    /// Close a base pattern under quarter-turn rotations.
    fn rotations_of(base: Pattern, turns: usize) -> Self {
        debug_assert!(!base.delete.is_empty() || !base.add.is_empty());
        debug_assert!(base
            .require_set
            .iter()
            .chain(&base.require_clear)
            .chain(&base.delete)
            .chain(&base.add)
            .all(|&(dx, dy)| dx.abs() <= 1 && dy.abs() <= 1));
        let mut patterns = Vec::with_capacity(turns);
        let mut p = base;
        for _ in 0..turns {
            patterns.push(p.clone());
            p = p.rotated();
        }
        Self { patterns }
    }

    fn merged(sets: Vec<PatternSet>) -> Self {
        Self {
            patterns: sets.into_iter().flat_map(|s| s.patterns).collect(),
        }
    }

    /// One raster-order pass; effects apply immediately. Returns the number
    /// of rewrites.
    fn run_pass(&self, e: &mut EdgeImage) -> usize {
        let mut rewrites = 0;
        for y in 0..e.height() as i64 {
            for x in 0..e.width() as i64 {
                if !e.get(x as usize, y as usize) {
                    continue;
                }
                for p in &self.patterns {
                    if p.matches(e, x, y) {
                        p.apply(e, x, y);
                        rewrites += 1;
                        break;
                    }
                }
            }
        }
        rewrites
    }
}

/// Stencils that delete one corner of every fully-set 2x2 block.
fn thin_patterns() -> PatternSet {
    PatternSet::rotations_of(
        Pattern {
            require_set: vec![(0, 0), (1, 0), (0, 1), (1, 1)],
            require_clear: vec![],
            context_set: vec![],
            context_clear: vec![],
            delete: vec![(0, 0)],
            add: vec![],
        },
        4,
    )
}

/// Ring cells in cyclic order with their adjacency inside the 3x3 window:
/// consecutive cells touch, and each orthogonal cell also touches the next
/// orthogonal one diagonally across the skipped corner.
const RING: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
];

/// True when the set neighbors of (x, y) form one 8-connected cluster
/// within the ring, i.e. the pixel is redundant for connectivity.
fn ring_single_cluster(e: &EdgeImage, x: i64, y: i64) -> bool {
    let mut set = [false; 8];
    let mut n = 0;
    for (i, (dx, dy)) in RING.iter().enumerate() {
        if e.get_checked(x + dx, y + dy) {
            set[i] = true;
            n += 1;
        }
    }
    if n == 0 {
        return false;
    }
    // Adjacency among ring cells: cyclic neighbors plus the four
    // corner-skipping chords (N-E, E-S, S-W, W-N at indices 1,3,5,7).
    let adjacent = |a: usize, b: usize| {
        let d = (a as i64 - b as i64).rem_euclid(8);
        d == 1 || d == 7 || (d == 2 && a % 2 == 1) || (d == 6 && b % 2 == 1)
    };
    let first = set.iter().position(|&s| s).unwrap();
    let mut seen = [false; 8];
    let mut stack = vec![first];
    seen[first] = true;
    let mut visited = 1;
    while let Some(a) = stack.pop() {
        for b in 0..8 {
            if set[b] && !seen[b] && adjacent(a, b) {
                seen[b] = true;
                visited += 1;
                stack.push(b);
            }
        }
    }
    visited == n
}

/// Stencils that move a one-pixel lateral jog back into line: the anchor
/// sits one pixel off a line whose neighbors pass it diagonally on the
/// same side. The context cells reject the apex of two diagonal lines
/// (left to the break-up stage) and guarantee the moved pixel touches
/// nothing but its two diagonal companions.
fn jog_patterns() -> PatternSet {
    PatternSet::rotations_of(
        Pattern {
            require_set: vec![(0, 0), (-1, -1), (1, -1)],
            require_clear: vec![(0, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0)],
            context_set: vec![],
            context_clear: vec![(-2, -2), (2, -2), (-1, -2), (0, -2), (1, -2)],
            delete: vec![(0, 0)],
            add: vec![(0, -1)],
        },
        4,
    )
}

/// Stencils that separate two line segments meeting at a right angle.
///
/// The apex form catches two diagonal runs joined at a single pixel; the
/// corner form catches a horizontal run meeting a vertical run, where the
/// corner pixel alone cannot be removed without leaving a diagonal bridge,
/// so one arm pixel goes with it.
fn break_patterns() -> PatternSet {
    let apex = PatternSet::rotations_of(
        Pattern {
            require_set: vec![(0, 0), (-1, -1), (1, -1)],
            require_clear: vec![(0, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0)],
            context_set: vec![(-2, -2), (2, -2)],
            context_clear: vec![],
            delete: vec![(0, 0)],
            add: vec![],
        },
        4,
    );
    let corner = PatternSet::rotations_of(
        Pattern {
            require_set: vec![(0, 0), (0, -1), (-1, 0)],
            require_clear: vec![(1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, -1)],
            context_set: vec![(0, -2), (-2, 0)],
            context_clear: vec![],
            delete: vec![(0, 0), (-1, 0)],
            add: vec![],
        },
        4,
    );
    PatternSet::merged(vec![apex, corner])
}

/// Thin the edge image: no fully-set 2x2 block survives and redundant
/// pixels of double-wide diagonal staircases are eroded, repeating until a
/// fixpoint. One-pixel-wide lines pass through unchanged; a pixel whose
/// removal would disconnect its neighborhood is only removed when a solid
/// block leaves no alternative.
pub fn thin_edges(e: &EdgeImage) -> EdgeImage {
    let mut out = e.clone();
    let patterns = thin_patterns();
    let budget = out.width() * out.height() + 1;
    for _ in 0..budget {
        let mut rewrites = patterns.run_pass(&mut out);
        for y in 0..out.height() as i64 {
            for x in 0..out.width() as i64 {
                if !out.get(x as usize, y as usize) {
                    continue;
                }
                let degree = out.neighbor_count(x as usize, y as usize);
                let delete = if degree >= 3 {
                    ring_single_cluster(&out, x, y)
                } else if degree == 2 {
                    // A pixel whose two neighbors already touch each other
                    // is a redundant double; erode it when it props up an
                    // over-connected neighbor, which the junction stage
                    // would otherwise cut the chain at.
                    redundant_double(&out, x, y)
                } else {
                    false
                };
                if delete {
                    out.set(x as usize, y as usize, false);
                    rewrites += 1;
                }
            }
        }
        if rewrites == 0 {
            break;
        }
    }
    out
}

/// Degree-2 pixel whose neighbors are mutually adjacent and at least one
/// of them has three or more neighbors of its own.
fn redundant_double(e: &EdgeImage, x: i64, y: i64) -> bool {
    let mut nbrs = [(0i64, 0i64); 2];
    let mut n = 0;
    for (dx, dy) in RING {
        if e.get_checked(x + dx, y + dy) {
            if n == 2 {
                return false;
            }
            nbrs[n] = (x + dx, y + dy);
            n += 1;
        }
    }
    if n != 2 {
        return false;
    }
    let (a, b) = (nbrs[0], nbrs[1]);
    if (a.0 - b.0).abs() > 1 || (a.1 - b.1).abs() > 1 {
        return false;
    }
    let over = |p: (i64, i64)| {
        p.0 >= 0
            && p.1 >= 0
            && (p.0 as usize) < e.width()
            && (p.1 as usize) < e.height()
            && e.neighbor_count(p.0 as usize, p.1 as usize) >= 3
    };
    over(a) || over(b)
}

/// Delete every pixel with more than two set 8-neighbors. Counts are taken
/// on the input image, so the result is independent of scan order.
pub fn delete_junctions(e: &EdgeImage) -> EdgeImage {
    let mut out = e.clone();
    for y in 0..e.height() {
        for x in 0..e.width() {
            if e.get(x, y) && e.neighbor_count(x, y) > 2 {
                out.set(x, y, false);
            }
        }
    }
    out
}

/// Rewrite one-pixel lateral jogs so lines run straight. Single pass.
pub fn straighten_edges(e: &EdgeImage) -> EdgeImage {
    let mut out = e.clone();
    jog_patterns().run_pass(&mut out);
    out
}

/// Delete pixels that connect two line segments meeting at a right angle.
/// Single pass; the output edge set is a subset of the input.
pub fn break_orthogonals(e: &EdgeImage) -> EdgeImage {
    let mut out = e.clone();
    break_patterns().run_pass(&mut out);
    out
}

/// The full mask-based filter: thin, drop junctions, straighten, break
/// orthogonal connections.
pub fn filter_edges_morphologic(e: &EdgeImage) -> EdgeImage {
    let thinned = thin_edges(e);
    let pruned = delete_junctions(&thinned);
    let straightened = straighten_edges(&pruned);
    break_orthogonals(&straightened)
}

// ---------------------------------------------------------------------------
// Algorithmic line splitting
// ---------------------------------------------------------------------------

/// Chords shorter than this carry no usable direction information.
const SPLIT_MIN_CHORD: f64 = 3.0;
/// Slack on chord-length comparisons, in pixels.
const SPLIT_DIST_TOL: f64 = 2.0;
/// How far from 90 degrees the chord angle must move before the normal's
/// sign can be fixed.
const SPLIT_FLIP_MARGIN_DEG: f64 = 12.0;
/// Minimum chord length for fixing the normal's sign; shorter chords let a
/// one-pixel jog at the line start fake the side.
const SPLIT_ORIENT_DIST: f64 = 8.0;
/// The angle counts as having reached zero below this, enabling the
/// growing phase.
const SPLIT_NEAR_ZERO_DEG: f64 = 20.0;

/// Rounding of integer pixels perturbs short chords far more than long
/// ones.
fn split_angle_tol_deg(dist: f64) -> f64 {
    (90.0 / dist).max(3.0)
}

/// Split a polyline wherever its course cannot belong to a single ellipse.
///
/// Walking an ellipse from any starting point, the angle between the
/// starting tangent-normal and the start-to-current chord falls
/// monotonically from 90 toward 0 degrees; past the far side it grows back
/// toward 90 while the chord length shrinks. The normal is flipped once at
/// the start if the angle opens the wrong way. A point violating the
/// expected progression — the angle re-opening before it ever came near
/// zero (angle breaking) or the chord growing again during the return
/// (distance breaking) — starts a new sub-line at that point. The
/// concatenation of the returned sub-lines is exactly the input point
/// sequence and every sub-line keeps at least two points.
pub fn break_line_algorithmic(line: &Polyline) -> Vec<Polyline> {
    let pts = &line.points;
    if pts.len() <= 2 {
        return vec![line.clone()];
    }

    let as_f = |p: PixelPoint| (p.x as f64, p.y as f64);
    let mut segments: Vec<Polyline> = Vec::new();
    let mut start = 0usize;

    while start < pts.len() {
        if pts.len() - start <= 2 {
            // Too short to track; attach to the previous segment so every
            // output keeps at least two points.
            if let Some(prev) = segments.last_mut() {
                prev.points.extend_from_slice(&pts[start..]);
            } else {
                segments.push(Polyline {
                    points: pts[start..].to_vec(),
                    closed: false,
                });
            }
            break;
        }

        let (sx, sy) = as_f(pts[start]);
        let (nx, ny) = as_f(pts[start + 1]);
        let dir = (nx - sx, ny - sy);
        let mut normal = (-dir.1, dir.0);
        let mut oriented = false;
        let mut growing = false;
        let mut min_angle = 180.0f64;
        let mut max_dist = 0.0f64;
        let mut grow_max_angle = 0.0f64;
        let mut grow_min_dist = f64::INFINITY;
        let mut pending: Option<usize> = None;
        let mut split_at = None;

        for (i, &p) in pts.iter().enumerate().skip(start + 2) {
            let (px, py) = as_f(p);
            let v = (px - sx, py - sy);
            let dist = (v.0 * v.0 + v.1 * v.1).sqrt();
            if dist < SPLIT_MIN_CHORD {
                continue;
            }
            let mut angle = chord_angle_deg(normal, v);
            if !oriented {
                if dist < SPLIT_ORIENT_DIST || (angle - 90.0).abs() <= SPLIT_FLIP_MARGIN_DEG {
                    continue; // side still ambiguous
                }
                if angle > 90.0 {
                    normal = (-normal.0, -normal.1);
                    angle = 180.0 - angle;
                }
                oriented = true;
                min_angle = angle;
                max_dist = dist;
                continue;
            }
            if angle > 90.0 {
                angle = 180.0 - angle; // walked past the normal's plane
            }

            let tol = split_angle_tol_deg(dist);
            let ok = if !growing {
                if angle <= min_angle + tol {
                    min_angle = min_angle.min(angle);
                    max_dist = max_dist.max(dist);
                    true
                } else if min_angle <= SPLIT_NEAR_ZERO_DEG && dist <= max_dist + SPLIT_DIST_TOL {
                    // The angle came near zero and the chord stopped
                    // growing: the walk passed the far side of the curve.
                    growing = true;
                    grow_max_angle = angle;
                    grow_min_dist = dist;
                    true
                } else {
                    false // angle breaking
                }
            } else if angle >= grow_max_angle - tol && dist <= grow_min_dist + SPLIT_DIST_TOL {
                grow_max_angle = grow_max_angle.max(angle);
                grow_min_dist = grow_min_dist.min(dist);
                true
            } else {
                false // angle reversal or distance breaking
            };

            // A lone violating sample is rounding jitter; split only when
            // the violation persists into the next tracked sample.
            if ok {
                pending = None;
            } else if let Some(first) = pending {
                split_at = Some(first);
                break;
            } else {
                pending = Some(i);
            }
        }

        match split_at {
            Some(i) => {
                segments.push(Polyline {
                    points: pts[start..i].to_vec(),
                    closed: false,
                });
                start = i;
            }
            None => {
                segments.push(Polyline {
                    points: pts[start..].to_vec(),
                    closed: if start == 0 { line.closed } else { false },
                });
                break;
            }
        }
    }

    segments
}

/// Unsigned angle between two vectors, in degrees within [0, 180].
fn chord_angle_deg(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dot = a.0 * b.0 + a.1 * b.1;
    let na = (a.0 * a.0 + a.1 * a.1).sqrt();
    let nb = (b.0 * b.0 + b.1 * b.1).sqrt();
    if na == 0.0 || nb == 0.0 {
        return 90.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0).acos().to_degrees()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn edge_from_points(w: usize, h: usize, pts: &[(usize, usize)]) -> EdgeImage {
        let mut e = EdgeImage::new(w, h);
        for &(x, y) in pts {
            e.set(x, y, true);
        }
        e
    }

    fn has_solid_block(e: &EdgeImage) -> bool {
        for y in 0..e.height() - 1 {
            for x in 0..e.width() - 1 {
                if e.get(x, y) && e.get(x + 1, y) && e.get(x, y + 1) && e.get(x + 1, y + 1) {
                    return true;
                }
            }
        }
        false
    }

    fn component_count(e: &EdgeImage) -> usize {
        let (w, h) = (e.width(), e.height());
        let mut seen = vec![false; w * h];
        let mut count = 0;
        for y in 0..h {
            for x in 0..w {
                if !e.get(x, y) || seen[y * w + x] {
                    continue;
                }
                count += 1;
                let mut stack = vec![(x as i64, y as i64)];
                seen[y * w + x] = true;
                while let Some((cx, cy)) = stack.pop() {
                    for dy in -1..=1 {
                        for dx in -1..=1 {
                            let (nx, ny) = (cx + dx, cy + dy);
                            if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                                continue;
                            }
                            if e.get(nx as usize, ny as usize) && !seen[ny as usize * w + nx as usize]
                            {
                                seen[(ny as usize) * w + nx as usize] = true;
                                stack.push((nx, ny));
                            }
                        }
                    }
                }
            }
        }
        count
    }

    fn random_edges(seed: u64, w: usize, h: usize, percent: u64) -> EdgeImage {
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(12345);
        let mut e = EdgeImage::new(w, h);
        for y in 0..h {
            for x in 0..w {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                if state % 100 < percent {
                    e.set(x, y, true);
                }
            }
        }
        e
    }

    #[test]
    fn thin_empty_stays_empty() {
        let e = EdgeImage::new(8, 8);
        assert_eq!(thin_edges(&e).count_set(), 0);
    }

    #[test]
    fn thin_removes_one_pixel_of_isolated_block() {
        let e = edge_from_points(8, 8, &[(3, 3), (4, 3), (3, 4), (4, 4)]);
        let t = thin_edges(&e);
        assert_eq!(t.count_set(), 3, "exactly one pixel of the block removed");
        assert!(!has_solid_block(&t));
        assert_eq!(component_count(&t), 1);
    }

    #[test]
    fn thin_leaves_diagonal_line_alone() {
        let pts: Vec<(usize, usize)> = (1..7).map(|i| (i, i)).collect();
        let e = edge_from_points(8, 8, &pts);
        assert_eq!(thin_edges(&e), e);
    }

    #[test]
    fn thin_clears_all_blocks_on_random_images() {
        for seed in 0..50 {
            let e = random_edges(seed, 32, 32, 45);
            let t = thin_edges(&e);
            assert!(!has_solid_block(&t), "solid block survived seed {seed}");
            // Subset property.
            for y in 0..32 {
                for x in 0..32 {
                    assert!(!t.get(x, y) || e.get(x, y));
                }
            }
        }
    }

    #[test]
    fn junction_deletion_splits_plus_shape() {
        // Center with four straight arms of length three. The center joins
        // four lines; the arm pixels adjacent to it also see more than two
        // neighbors because opposite arms touch diagonally through them.
        let mut pts = vec![(8, 8)];
        for d in 1..=3usize {
            pts.push((8 + d, 8));
            pts.push((8 - d, 8));
            pts.push((8, 8 + d));
            pts.push((8, 8 - d));
        }
        let e = edge_from_points(17, 17, &pts);
        assert_eq!(e.neighbor_count(8, 8), 4, "oracle: center has 4 neighbors");
        let out = delete_junctions(&e);
        assert!(!out.get(8, 8), "junction center deleted");
        // The four arms survive as separate components.
        assert_eq!(component_count(&out), 4);
        for y in 0..17 {
            for x in 0..17 {
                if out.get(x, y) {
                    assert!(out.neighbor_count(x, y) <= 2);
                }
            }
        }
    }

    #[test]
    fn junction_deletion_keeps_simple_arc() {
        let pts = [(2, 5), (3, 4), (4, 3), (5, 3), (6, 3), (7, 4), (8, 5)];
        let e = edge_from_points(12, 8, &pts);
        assert_eq!(delete_junctions(&e), e);
    }

    #[test]
    fn junction_deletion_empty() {
        let e = EdgeImage::new(5, 5);
        assert_eq!(delete_junctions(&e).count_set(), 0);
    }

    #[test]
    fn junction_postcondition_on_random_images() {
        for seed in 0..50 {
            let out = delete_junctions(&random_edges(seed, 32, 32, 30));
            for y in 0..32 {
                for x in 0..32 {
                    if out.get(x, y) {
                        assert!(out.neighbor_count(x, y) <= 2, "seed {seed} at ({x},{y})");
                    }
                }
            }
        }
    }

    #[test]
    fn straighten_rewrites_jog() {
        // Horizontal line with a one-pixel dip; oracle is the mask itself:
        // the dipped pixel is deleted and the in-line pixel added.
        let pts = [(2, 5), (3, 5), (4, 6), (5, 5), (6, 5)];
        let e = edge_from_points(10, 10, &pts);
        let s = straighten_edges(&e);
        assert!(!s.get(4, 6), "jog pixel removed");
        assert!(s.get(4, 5), "in-line pixel added");
        assert_eq!(s.count_set(), 5);
        assert_eq!(component_count(&s), 1, "connectivity preserved");
    }

    #[test]
    fn straighten_leaves_straight_line() {
        let pts: Vec<(usize, usize)> = (1..8).map(|x| (x, 4)).collect();
        let e = edge_from_points(10, 10, &pts);
        assert_eq!(straighten_edges(&e), e);
    }

    #[test]
    fn straighten_empty() {
        let e = EdgeImage::new(6, 6);
        assert_eq!(straighten_edges(&e).count_set(), 0);
    }

    #[test]
    fn straighten_vertical_jog() {
        let pts = [(5, 2), (5, 3), (6, 4), (5, 5), (5, 6)];
        let e = edge_from_points(10, 10, &pts);
        let s = straighten_edges(&e);
        assert!(!s.get(6, 4));
        assert!(s.get(5, 4));
        assert_eq!(component_count(&s), 1);
    }

    #[test]
    fn break_splits_l_corner() {
        // Horizontal run meets vertical run at (6, 6).
        let mut pts: Vec<(usize, usize)> = (2..=6).map(|x| (x, 6)).collect();
        pts.extend((2..=5).map(|y| (6, y)));
        let e = edge_from_points(10, 10, &pts);
        assert_eq!(component_count(&e), 1);
        let b = break_orthogonals(&e);
        assert!(!b.get(6, 6), "corner pixel deleted");
        assert_eq!(
            component_count(&b),
            2,
            "oracle: component count increases by one"
        );
        // Output is a subset of the input.
        for y in 0..10 {
            for x in 0..10 {
                assert!(!b.get(x, y) || e.get(x, y));
            }
        }
    }

    #[test]
    fn break_splits_diagonal_apex() {
        // Two diagonal runs meeting at a right angle at (6, 2).
        let pts = [
            (2, 6),
            (3, 5),
            (4, 4),
            (5, 3),
            (6, 2),
            (7, 3),
            (8, 4),
            (9, 5),
            (10, 6),
        ];
        let e = edge_from_points(13, 9, &pts);
        assert_eq!(component_count(&e), 1);
        let b = break_orthogonals(&e);
        assert!(!b.get(6, 2), "apex pixel deleted");
        assert_eq!(component_count(&b), 2);
    }

    #[test]
    fn break_leaves_quarter_circle_alone() {
        // Oracle: no window of a smooth radius-10 arc matches any stencil.
        let mut pts = Vec::new();
        for i in 0..=200 {
            let t = std::f64::consts::FRAC_PI_2 * i as f64 / 200.0;
            let x = (3.0 + 10.0 * t.cos()).round() as usize;
            let y = (14.0 - 10.0 * t.sin()).round() as usize;
            if !pts.contains(&(x, y)) {
                pts.push((x, y));
            }
        }
        let e = edge_from_points(16, 16, &pts);
        assert_eq!(break_orthogonals(&e), e, "no deletions on a smooth arc");
    }

    #[test]
    fn break_empty() {
        let e = EdgeImage::new(6, 6);
        assert_eq!(break_orthogonals(&e).count_set(), 0);
    }

    #[test]
    fn full_filter_empty() {
        let e = EdgeImage::new(8, 8);
        assert_eq!(filter_edges_morphologic(&e).count_set(), 0);
    }

    #[test]
    fn full_filter_detaches_spur_from_contour() {
        // A thin ellipse contour with a straight spur attached: the
        // attachment pixels have three neighbors and fall to the junction
        // stage, leaving at least two components.
        let mut pts = Vec::new();
        for i in 0..360 {
            let t = std::f64::consts::PI * i as f64 / 180.0;
            let x = (20.0 + 14.0 * t.cos()).round() as usize;
            let y = (16.0 + 9.0 * t.sin()).round() as usize;
            if !pts.contains(&(x, y)) {
                pts.push((x, y));
            }
        }
        let spur_start_x = 20 + 14;
        for x in spur_start_x..spur_start_x + 6 {
            if !pts.contains(&(x, 16)) {
                pts.push((x, 16));
            }
        }
        let e = edge_from_points(45, 32, &pts);
        assert_eq!(component_count(&e), 1);
        let f = filter_edges_morphologic(&e);
        assert!(component_count(&f) >= 2, "spur disconnected from the arc");
    }

    /// Minimal 8-connected closed chain of an ellipse: dense parametric
    /// walk, then removal of pixels whose chain neighbors already touch.
    fn ideal_ellipse_chain(cx: f64, cy: f64, a: f64, b: f64) -> Vec<(usize, usize)> {
        let mut pts: Vec<(i64, i64)> = Vec::new();
        for i in 0..2880 {
            let t = std::f64::consts::PI * i as f64 / 1440.0;
            let x = (cx + a * t.cos()).round() as i64;
            let y = (cy + b * t.sin()).round() as i64;
            if pts.last() != Some(&(x, y)) && !pts.contains(&(x, y)) {
                pts.push((x, y));
            }
        }
        loop {
            let n = pts.len();
            let mut removed = false;
            let mut i = 0;
            while i < pts.len() && pts.len() > 3 {
                let prev = pts[(i + pts.len() - 1) % pts.len()];
                let next = pts[(i + 1) % pts.len()];
                if (prev.0 - next.0).abs() <= 1 && (prev.1 - next.1).abs() <= 1 {
                    pts.remove(i);
                    removed = true;
                } else {
                    i += 1;
                }
            }
            if !removed || pts.len() == n {
                break;
            }
        }
        pts.into_iter().map(|(x, y)| (x as usize, y as usize)).collect()
    }

    #[test]
    fn full_filter_keeps_clean_contour_connected() {
        let pts = ideal_ellipse_chain(20.0, 16.0, 13.0, 9.0);
        let e = edge_from_points(45, 32, &pts);
        assert_eq!(component_count(&e), 1);
        let f = filter_edges_morphologic(&e);
        assert_eq!(component_count(&f), 1, "single component before and after");
        assert!(f.count_set() > 0);
    }

    #[test]
    fn full_filter_deterministic() {
        for seed in 0..10 {
            let e = random_edges(seed, 40, 40, 25);
            assert_eq!(filter_edges_morphologic(&e), filter_edges_morphologic(&e));
        }
    }

    // ---- algorithmic splitter ----

    fn polyline_from_samples(samples: impl Iterator<Item = (f64, f64)>) -> Polyline {
        let mut points: Vec<PixelPoint> = Vec::new();
        for (x, y) in samples {
            let p = PixelPoint::new(x.round() as i32, y.round() as i32);
            if points.last() != Some(&p) && !points.contains(&p) {
                points.push(p);
            }
        }
        Polyline {
            points,
            closed: false,
        }
    }

    #[test]
    fn splitter_keeps_half_ellipse_whole() {
        // Oracle: the angle sequence of the analytic parametrization is
        // monotone as required, so no split may occur. The inward normal
        // at the starting point (80, 40) is (-1, 0).
        let mut prev_angle = 91.0f64;
        for i in 4..=180 {
            let t = std::f64::consts::PI * i as f64 / 180.0;
            let v = (20.0 * t.cos() - 20.0, -10.0 * t.sin());
            let angle = chord_angle_deg((-1.0, 0.0), v);
            assert!(angle <= prev_angle + 0.5, "analytic angle not monotone");
            prev_angle = angle;
        }

        let line = polyline_from_samples((0..=180).map(|i| {
            let t = std::f64::consts::PI * i as f64 / 180.0;
            (60.0 + 20.0 * t.cos(), 40.0 - 10.0 * t.sin())
        }));
        assert!(line.len() > 30);
        let parts = break_line_algorithmic(&line);
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0], line);
    }

    #[test]
    fn splitter_keeps_closed_ellipse_whole() {
        // Full loop: the angle returns to 90 while the chord shrinks, the
        // legitimate growing phase.
        let line = polyline_from_samples((0..360).map(|i| {
            let t = std::f64::consts::PI * i as f64 / 180.0;
            (60.0 + 16.0 * t.cos(), 40.0 + 12.0 * t.sin())
        }));
        let parts = break_line_algorithmic(&line);
        assert_eq!(parts.len(), 1, "a single ellipse never violates the walk");
    }

    /// Independent evaluation of the shrink/grow conditions on analytic
    /// float samples; returns the first persistently violating sample.
    fn oracle_first_violation(samples: &[(f64, f64)]) -> Option<usize> {
        let dir = (samples[1].0 - samples[0].0, samples[1].1 - samples[0].1);
        let mut normal = (-dir.1, dir.0);
        let mut oriented = false;
        let mut growing = false;
        let mut min_angle = 180.0f64;
        let mut max_dist = 0.0f64;
        let (mut grow_max_angle, mut grow_min_dist) = (0.0f64, f64::INFINITY);
        let mut pending = None;
        for (i, &(px, py)) in samples.iter().enumerate().skip(2) {
            let v = (px - samples[0].0, py - samples[0].1);
            let dist = (v.0 * v.0 + v.1 * v.1).sqrt();
            if dist < SPLIT_MIN_CHORD {
                continue;
            }
            let mut angle = chord_angle_deg(normal, v);
            if !oriented {
                if dist < SPLIT_ORIENT_DIST || (angle - 90.0).abs() <= SPLIT_FLIP_MARGIN_DEG {
                    continue;
                }
                if angle > 90.0 {
                    normal = (-normal.0, -normal.1);
                    angle = 180.0 - angle;
                }
                oriented = true;
                min_angle = angle;
                max_dist = dist;
                continue;
            }
            if angle > 90.0 {
                angle = 180.0 - angle;
            }
            let tol = split_angle_tol_deg(dist);
            let ok = if !growing {
                if angle <= min_angle + tol {
                    min_angle = min_angle.min(angle);
                    max_dist = max_dist.max(dist);
                    true
                } else if min_angle <= SPLIT_NEAR_ZERO_DEG && dist <= max_dist + SPLIT_DIST_TOL {
                    growing = true;
                    grow_max_angle = angle;
                    grow_min_dist = dist;
                    true
                } else {
                    false
                }
            } else if angle >= grow_max_angle - tol && dist <= grow_min_dist + SPLIT_DIST_TOL {
                grow_max_angle = grow_max_angle.max(angle);
                grow_min_dist = grow_min_dist.min(dist);
                true
            } else {
                false
            };
            if ok {
                pending = None;
            } else if let Some(first) = pending {
                return Some(first);
            } else {
                pending = Some(i);
            }
        }
        None
    }

    #[test]
    fn splitter_splits_s_curve_once() {
        // Two semicircles of opposite curvature joined at (40, 2r + 40).
        let r = 15.0;
        let samples: Vec<(f64, f64)> = (0..=90)
            .map(|i| {
                let t = std::f64::consts::PI * i as f64 / 90.0;
                (40.0 + r * t.sin(), 40.0 + r - r * t.cos())
            })
            .chain((1..=90).map(|i| {
                let t = std::f64::consts::PI * i as f64 / 90.0;
                (40.0 - r * t.sin(), 40.0 + 3.0 * r - r * t.cos())
            }))
            .collect();
        let line = polyline_from_samples(samples.iter().copied());
        let parts = break_line_algorithmic(&line);
        assert_eq!(parts.len(), 2, "split into exactly two lines");

        // Oracle: the same angle/distance conditions evaluated on the
        // analytic float curve give the expected split location.
        let oracle_idx = oracle_first_violation(&samples).expect("oracle must flag the S-curve");
        let (ox, oy) = samples[oracle_idx];
        let split_point = parts[1].points[0];
        let where_split = line
            .points
            .iter()
            .position(|p| *p == split_point)
            .unwrap();
        let oracle_on_line = line
            .points
            .iter()
            .enumerate()
            .min_by(|(_, p), (_, q)| {
                let dp = (p.x as f64 - ox).powi(2) + (p.y as f64 - oy).powi(2);
                let dq = (q.x as f64 - ox).powi(2) + (q.y as f64 - oy).powi(2);
                dp.partial_cmp(&dq).unwrap()
            })
            .map(|(i, _)| i)
            .unwrap();
        assert!(
            (where_split as i64 - oracle_on_line as i64).abs() <= 2,
            "split at {where_split}, oracle at {oracle_on_line}"
        );

        // Both parts stay on their own side of the inflection
        // neighborhood.
        let junction_y = 40.0 + 2.0 * r;
        assert!(parts[0]
            .points
            .iter()
            .all(|p| (p.y as f64) <= junction_y + 4.0));
        assert!(parts[1]
            .points
            .iter()
            .all(|p| (p.y as f64) >= junction_y - 4.0));

        // Concatenation of parts equals the input sequence.
        let rejoined: Vec<PixelPoint> = parts.iter().flat_map(|p| p.points.clone()).collect();
        assert_eq!(rejoined, line.points);
        for part in &parts {
            assert!(part.len() >= 2);
        }
    }

    #[test]
    fn splitter_returns_short_lines_unchanged() {
        let two = Polyline {
            points: vec![PixelPoint::new(0, 0), PixelPoint::new(1, 1)],
            closed: false,
        };
        assert_eq!(break_line_algorithmic(&two), vec![two.clone()]);
        let one = Polyline {
            points: vec![PixelPoint::new(0, 0)],
            closed: false,
        };
        assert_eq!(break_line_algorithmic(&one), vec![one.clone()]);
    }

    #[test]
    fn splitter_passes_straight_lines_through() {
        // Collinear points keep the tracked angle at 90 degrees, which the
        // shrink condition never flags; the straightness filter downstream
        // is responsible for these.
        let line = Polyline {
            points: (0..20).map(|x| PixelPoint::new(x, 3)).collect(),
            closed: false,
        };
        let parts = break_line_algorithmic(&line);
        assert_eq!(parts.len(), 1);
    }

    proptest! {
        /// Splitting never loses or reorders points.
        #[test]
        fn splitter_preserves_point_sequence(seed in 0u64..300) {
            let mut state = seed.wrapping_mul(0x2545F4914F6CDD1D).wrapping_add(7);
            let mut next = move || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                state
            };
            // Random 8-connected walk.
            let mut points = vec![PixelPoint::new(50, 50)];
            for _ in 0..(20 + next() % 60) {
                let last = *points.last().unwrap();
                let step = NEIGHBOR_ORDER[(next() % 8) as usize];
                let p = PixelPoint::new(last.x + step.0 as i32, last.y + step.1 as i32);
                if !points.contains(&p) {
                    points.push(p);
                }
            }
            let line = Polyline { points: points.clone(), closed: false };
            let parts = break_line_algorithmic(&line);
            let rejoined: Vec<PixelPoint> =
                parts.iter().flat_map(|p| p.points.clone()).collect();
            prop_assert_eq!(rejoined, points);
            for part in &parts {
                prop_assert!(part.len() >= 2 || parts.len() == 1);
            }
        }
    }

    const NEIGHBOR_ORDER: [(i8, i8); 8] = [
        (1, 0),
        (1, 1),
        (0, 1),
        (-1, 1),
        (-1, 0),
        (-1, -1),
        (0, -1),
        (1, -1),
    ];
}
