//! Stencil selection on mesh topology: breadth-first central stencils and
//! cone-restricted sectorial stencils, with reflected ghost entries across
//! physical boundaries and wrapped entries across periodic seams.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::basis::dof_count;
use crate::error::ReconError;
use crate::geom::{self, Point2, Vec2};
use crate::mesh::Mesh;

/// One step of a ghost-entry recipe, applied left to right to the source
/// cell geometry. Reflections reference faces so the recipe stays valid
/// while nodes move.
#[derive(Debug, Clone, PartialEq)]
pub enum GhostOp {
    Reflect { face: u32 },
    Wrap { dx: f64, dy: f64 },
}

#[derive(Debug, Clone)]
pub struct Entry {
    pub cell: u32,
    pub ops: Vec<GhostOp>,
}

#[derive(Debug, Clone)]
pub struct CellStencil {
    /// owner first, then breadth-first neighbors; length `n_e`
    pub central: Vec<Entry>,
    /// owner first, then the two cone cells; shorter if the cone starved
    pub sectors: [Vec<Entry>; 3],
}

#[derive(Debug, Clone)]
pub struct StencilTopology {
    pub degree: usize,
    pub n_e: usize,
    pub cells: Vec<CellStencil>,
}

#[derive(Clone)]
struct Virtual {
    cell: u32,
    ops: Vec<GhostOp>,
    bary: Point2,
}

fn bary_of(mesh: &Mesh, cell: u32, ops: &[GhostOp]) -> Point2 {
    let mut b = mesh.barycenter(cell as usize);
    for op in ops {
        match *op {
            GhostOp::Wrap { dx, dy } => b += Vec2::new(dx, dy),
            GhostOp::Reflect { face } => {
                let f = &mesh.faces[face as usize];
                let (na, nb) = mesh.edge_nodes(f.left as usize, f.left_edge as usize);
                let d = (mesh.nodes[nb] - mesh.nodes[na]).normalize();
                b = geom::reflect_point(b, mesh.nodes[na], d);
            }
        }
    }
    b
}

fn key_of(bary: Point2, cell: u32, quant: f64) -> (u32, i64, i64) {
    (cell, (bary.x / quant).round() as i64, (bary.y / quant).round() as i64)
}

/// The three face-adjacent virtual neighbors of a virtual cell.
fn expand(mesh: &Mesh, v: &Virtual) -> Vec<Virtual> {
    let mut out = Vec::with_capacity(3);
    for e in 0..3 {
        match mesh.neighbor(v.cell as usize, e) {
            Ok((other, shift)) => {
                let mut ops = v.ops.clone();
                if shift.norm_squared() > 0.0 {
                    ops.insert(0, GhostOp::Wrap { dx: shift.x, dy: shift.y });
                }
                let bary = bary_of(mesh, other as u32, &ops);
                out.push(Virtual { cell: other as u32, ops, bary });
            }
            Err(_) => {
                let face = mesh.cell_faces[v.cell as usize][e];
                let mut ops = v.ops.clone();
                ops.insert(0, GhostOp::Reflect { face });
                let bary = bary_of(mesh, v.cell, &ops);
                out.push(Virtual { cell: v.cell, ops, bary });
            }
        }
    }
    out
}

/// Cone membership in the owner's reference frame. Cone `s` opens from
/// reference corner `s` toward the opposite edge; boundary points go to the
/// lowest-indexed cone.
fn cone_of(p: Point2, tol: f64) -> Option<usize> {
    let inside = [
        p.x > -tol && p.y > -tol,
        p.y > -tol && p.x + p.y < 1.0 + tol,
        p.x > -tol && p.x + p.y < 1.0 + tol,
    ];
    // exclude the owner triangle itself (every cone contains it)
    if p.x > tol && p.y > tol && p.x + p.y < 1.0 - tol {
        return None;
    }
    inside.iter().position(|&b| b)
}

fn build_cell_stencil(
    mesh: &Mesh,
    cell: usize,
    n_e: usize,
    max_rings: usize,
    quant: f64,
) -> Result<CellStencil, ReconError> {
    let owner = Virtual {
        cell: cell as u32,
        ops: Vec::new(),
        bary: mesh.barycenter(cell),
    };

    // breadth-first center stencil
    let mut visited = HashMap::new();
    visited.insert(key_of(owner.bary, owner.cell, quant), ());
    let mut central = vec![Entry { cell: owner.cell, ops: Vec::new() }];
    let mut all_rings: Vec<Virtual> = vec![owner.clone()];
    let mut ring = vec![owner.clone()];
    let mut rings_done = 0;
    while central.len() < n_e {
        if rings_done >= max_rings {
            return Err(ReconError::StencilExhausted {
                cell,
                found: central.len(),
                needed: n_e,
            });
        }
        let mut next: Vec<Virtual> = Vec::new();
        for v in &ring {
            for cand in expand(mesh, v) {
                let key = key_of(cand.bary, cand.cell, quant);
                if visited.contains_key(&key) {
                    continue;
                }
                visited.insert(key, ());
                next.push(cand);
            }
        }
        if next.is_empty() {
            return Err(ReconError::StencilExhausted {
                cell,
                found: central.len(),
                needed: n_e,
            });
        }
        next.sort_by(|a, b| {
            (a.cell, (a.bary.x / quant) as i64, (a.bary.y / quant) as i64).cmp(&(
                b.cell,
                (b.bary.x / quant) as i64,
                (b.bary.y / quant) as i64,
            ))
        });
        for v in &next {
            if central.len() < n_e {
                central.push(Entry { cell: v.cell, ops: v.ops.clone() });
            }
        }
        all_rings.extend(next.iter().cloned());
        ring = next;
        rings_done += 1;
    }

    // sectors: pick cone members in the breadth-first order already computed,
    // widening the search if a cone starves
    let map = mesh.affine_map(cell);
    let tol = 1e-12;
    let mut sectors: [Vec<Entry>; 3] = std::array::from_fn(|_| {
        vec![Entry { cell: cell as u32, ops: Vec::new() }]
    });
    let mut assign = |sectors: &mut [Vec<Entry>; 3], v: &Virtual| {
        if v.cell as usize == cell && v.ops.is_empty() {
            return;
        }
        let p = map.to_reference(v.bary);
        if let Some(s) = cone_of(p, tol) {
            if sectors[s].len() < 3
                && !sectors[s].iter().any(|e| e.cell == v.cell && e.ops == v.ops)
            {
                sectors[s].push(Entry { cell: v.cell, ops: v.ops.clone() });
            }
        }
    };
    for v in &all_rings {
        assign(&mut sectors, v);
    }
    if sectors.iter().any(|s| s.len() < 3) {
        // continue the face BFS a few more rings
        let mut extra_rings = 0;
        while sectors.iter().any(|s| s.len() < 3) && extra_rings < 3 && !ring.is_empty() {
            let mut next: Vec<Virtual> = Vec::new();
            for v in &ring {
                for cand in expand(mesh, v) {
                    let key = key_of(cand.bary, cand.cell, quant);
                    if visited.contains_key(&key) {
                        continue;
                    }
                    visited.insert(key, ());
                    next.push(cand);
                }
            }
            next.sort_by(|a, b| {
                (a.cell, (a.bary.x / quant) as i64, (a.bary.y / quant) as i64).cmp(&(
                    b.cell,
                    (b.bary.x / quant) as i64,
                    (b.bary.y / quant) as i64,
                ))
            });
            for v in &next {
                assign(&mut sectors, v);
            }
            ring = next;
            extra_rings += 1;
        }
    }
    if sectors.iter().any(|s| s.len() < 3) {
        // widen to the Voronoi neighborhood of the cells already visited
        let mut seen: Vec<u32> = Vec::new();
        let mut cand: Vec<u32> = Vec::new();
        for &v in mesh.cells[cell].iter() {
            for &c in &mesh.node_cells[v] {
                if !cand.contains(&c) {
                    cand.push(c);
                }
            }
        }
        // neighbors-of-neighbors
        let first: Vec<u32> = cand.clone();
        for c in first {
            for &v in mesh.cells[c as usize].iter() {
                for &c2 in &mesh.node_cells[v] {
                    if !cand.contains(&c2) {
                        cand.push(c2);
                    }
                }
            }
        }
        cand.sort_unstable();
        for c in cand {
            if c as usize == cell {
                continue;
            }
            if seen.contains(&c) {
                continue;
            }
            seen.push(c);
            let v = Virtual { cell: c, ops: Vec::new(), bary: mesh.barycenter(c as usize) };
            assign(&mut sectors, &v);
        }
    }
    // a starved cone leaves its sector short; the operator disables it

    Ok(CellStencil { central, sectors })
}

/// Build the stencil topology of every cell for reconstruction degree `m`.
pub fn build_stencils(mesh: &Mesh, m: usize) -> Result<StencilTopology, ReconError> {
    let n_e = 2 * dof_count(m, 2);
    let max_rings = m + 5;
    // quantization scale for ghost deduplication
    let quant = 1e-7
        * (0..mesh.n_cells().min(64))
            .map(|i| mesh.incircle_diameter(i))
            .fold(f64::INFINITY, f64::min);
    let cells: Result<Vec<CellStencil>, ReconError> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|cell| build_cell_stencil(mesh, cell, n_e, max_rings, quant))
        .collect();
    Ok(StencilTopology { degree: m, n_e, cells: cells? })
}
