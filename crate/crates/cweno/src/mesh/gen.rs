//! Deterministic mesh generators for the benchmark domains: structured box
//! meshes split into triangles, polar disc meshes and the sheared ramp
//! channel.

use std::collections::HashMap;

use super::{build_mesh, BoundaryKind, Mesh};
use crate::error::MeshError;
use crate::geom::Point2;

/// How each grid quadrilateral is split into triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitPattern {
    /// every quad split along the same diagonal
    Diagonal,
    /// diagonal direction alternates in a checkerboard
    Alternating,
    /// four triangles around a center node; the circumcircle diameter of
    /// every cell equals the quad side
    Crisscross,
}

#[derive(Debug, Clone, Copy)]
pub struct BoxBounds {
    pub left: BoundaryKind,
    pub right: BoundaryKind,
    pub bottom: BoundaryKind,
    pub top: BoundaryKind,
}

impl BoxBounds {
    pub fn all(kind: BoundaryKind) -> Self {
        Self { left: kind, right: kind, bottom: kind, top: kind }
    }

    pub fn periodic() -> Self {
        Self {
            left: BoundaryKind::PeriodicX,
            right: BoundaryKind::PeriodicX,
            bottom: BoundaryKind::PeriodicY,
            top: BoundaryKind::PeriodicY,
        }
    }
}

/// Structured triangulation of a rectangle with quad side <= h.
pub fn generate_box_mesh(
    x_range: (f64, f64),
    y_range: (f64, f64),
    h: f64,
    pattern: SplitPattern,
    bounds: BoxBounds,
) -> Result<Mesh, MeshError> {
    assert!(h > 0.0, "mesh size must be positive");
    let (x0, x1) = x_range;
    let (y0, y1) = y_range;
    let nx = ((x1 - x0) / h).ceil().max(1.0) as usize;
    let ny = ((y1 - y0) / h).ceil().max(1.0) as usize;
    let dx = (x1 - x0) / nx as f64;
    let dy = (y1 - y0) / ny as f64;

    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push(Point2::new(x0 + i as f64 * dx, y0 + j as f64 * dy));
        }
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;

    let mut cells = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let n00 = idx(i, j);
            let n10 = idx(i + 1, j);
            let n11 = idx(i + 1, j + 1);
            let n01 = idx(i, j + 1);
            match pattern {
                SplitPattern::Diagonal => {
                    cells.push([n00, n10, n01]);
                    cells.push([n10, n11, n01]);
                }
                SplitPattern::Alternating => {
                    if (i + j) % 2 == 0 {
                        cells.push([n00, n10, n01]);
                        cells.push([n10, n11, n01]);
                    } else {
                        cells.push([n00, n10, n11]);
                        cells.push([n00, n11, n01]);
                    }
                }
                SplitPattern::Crisscross => {
                    let c = nodes.len();
                    nodes.push(Point2::new(
                        x0 + (i as f64 + 0.5) * dx,
                        y0 + (j as f64 + 0.5) * dy,
                    ));
                    cells.push([n00, n10, c]);
                    cells.push([n10, n11, c]);
                    cells.push([n11, n01, c]);
                    cells.push([n01, n00, c]);
                }
            }
        }
    }

    let mut tags = HashMap::new();
    for i in 0..nx {
        tags.insert(key(idx(i, 0), idx(i + 1, 0)), bounds.bottom);
        tags.insert(key(idx(i, ny), idx(i + 1, ny)), bounds.top);
    }
    for j in 0..ny {
        tags.insert(key(idx(0, j), idx(0, j + 1)), bounds.left);
        tags.insert(key(idx(nx, j), idx(nx, j + 1)), bounds.right);
    }
    build_mesh(nodes, cells, &tags)
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Polar disc mesh: concentric rings of 6k nodes stitched ring to ring, all
/// boundary nodes exactly on the circle.
pub fn generate_disc_mesh(
    radius: f64,
    h: f64,
    outer: BoundaryKind,
) -> Result<Mesh, MeshError> {
    assert!(h > 0.0 && h < radius, "need 0 < h < radius");
    let rings = (radius / h).round().max(1.0) as usize;
    let dr = radius / rings as f64;

    let mut nodes = vec![Point2::new(0.0, 0.0)];
    let mut ring_start = vec![0usize; rings + 1];
    for k in 1..=rings {
        ring_start[k] = nodes.len();
        let n = 6 * k;
        let r = k as f64 * dr;
        let phase = if k % 2 == 0 { 0.0 } else { std::f64::consts::PI / n as f64 };
        for a in 0..n {
            let ang = 2.0 * std::f64::consts::PI * a as f64 / n as f64 + phase;
            nodes.push(Point2::new(r * ang.cos(), r * ang.sin()));
        }
    }

    let mut cells = Vec::new();
    // innermost fan around the center node
    for a in 0..6 {
        cells.push([0, ring_start[1] + a, ring_start[1] + (a + 1) % 6]);
    }
    // annulus strips: merge the two rings by angle
    for k in 2..=rings {
        let (inner_n, outer_n) = (6 * (k - 1), 6 * k);
        let inner0 = ring_start[k - 1];
        let outer0 = ring_start[k];
        let ang = |base: usize, count: usize, a: usize| {
            let p = nodes[base + a % count];
            let mut t = p.y.atan2(p.x);
            if t < -1e-12 {
                t += 2.0 * std::f64::consts::PI;
            }
            t + 2.0 * std::f64::consts::PI * (a / count) as f64
        };
        let (mut i, mut o) = (0usize, 0usize);
        while i < inner_n || o < outer_n {
            let advance_outer = if o >= outer_n {
                false
            } else if i >= inner_n {
                true
            } else {
                ang(outer0, outer_n, o + 1) <= ang(inner0, inner_n, i + 1)
            };
            if advance_outer {
                cells.push([
                    inner0 + i % inner_n,
                    outer0 + o % outer_n,
                    outer0 + (o + 1) % outer_n,
                ]);
                o += 1;
            } else {
                cells.push([
                    inner0 + i % inner_n,
                    outer0 + o % outer_n,
                    inner0 + (i + 1) % inner_n,
                ]);
                i += 1;
            }
        }
    }

    let mut tags = HashMap::new();
    let n_out = 6 * rings;
    let out0 = ring_start[rings];
    for a in 0..n_out {
        tags.insert(key(out0 + a, out0 + (a + 1) % n_out), outer);
    }
    build_mesh(nodes, cells, &tags)
}

/// Channel with a ramp rising at `angle` from `ramp_start` on the bottom
/// wall; grid columns are sheared between the ramp and the flat top at y = 1.
pub fn generate_ramp_mesh(
    x_max: f64,
    ramp_start: f64,
    angle_deg: f64,
    h: f64,
    left: BoundaryKind,
    right: BoundaryKind,
) -> Result<Mesh, MeshError> {
    let nx = (x_max / h).ceil().max(2.0) as usize;
    let dx = x_max / nx as f64;
    let ny = (1.0 / h).ceil().max(2.0) as usize;
    let slope = angle_deg.to_radians().tan();
    // snap the ramp foot onto a grid line
    let i_r = (ramp_start / dx).round().max(1.0) as usize;
    let x_r = i_r as f64 * dx;

    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = i as f64 * dx;
            let y_bot = slope * (x - x_r).max(0.0);
            let y = y_bot + j as f64 / ny as f64 * (1.0 - y_bot);
            nodes.push(Point2::new(x, y));
        }
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut cells = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            cells.push([idx(i, j), idx(i + 1, j), idx(i, j + 1)]);
            cells.push([idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    let mut tags = HashMap::new();
    for i in 0..nx {
        tags.insert(key(idx(i, 0), idx(i + 1, 0)), BoundaryKind::Wall);
        tags.insert(key(idx(i, ny), idx(i + 1, ny)), BoundaryKind::Wall);
    }
    for j in 0..ny {
        tags.insert(key(idx(0, j), idx(0, j + 1)), left);
        tags.insert(key(idx(nx, j), idx(nx, j + 1)), right);
    }
    build_mesh(nodes, cells, &tags)
}
