//! Central WENO reconstruction: stencil selection, the constrained
//! least-squares central polynomial, sectorial linear polynomials and the
//! nonlinear blend.
//!
//! Stencil topology is built once per mesh (recipes reference faces, so ghost
//! reflections follow the nodes when the mesh moves). The per-cell operator
//! (LSQ factorization and sector solves) is precomputed on fixed meshes and
//! reassembled every step on moving ones.

mod stencil;

pub use stencil::{build_stencils, CellStencil, Entry, GhostOp, StencilTopology};

use nalgebra::{DMatrix, Matrix2};
use rayon::prelude::*;

use crate::basis::{OscillationMatrix, SpatialBasis};
use crate::error::ReconError;
use crate::geom::{self, Point2, Vec2};
use crate::mesh::Mesh;
use crate::quadrature::TriangleRule;
use crate::systems::{StateVec, System};

/// Linear weight of the central candidate; sectors carry weight one before
/// normalization.
pub const LAMBDA_CENTRAL: f64 = 1e5;
pub const WENO_EPS: f64 = 1e-14;
pub const WENO_R: i32 = 4;

/// Resolved stencil entry: source cell plus the velocity-space transform of
/// its average (identity for interior and periodic entries).
#[derive(Debug, Clone)]
pub struct EntryRef {
    pub cell: u32,
    pub xform: Option<(Matrix2<f64>, Vec2)>,
}

#[derive(Debug, Clone)]
struct SectorOp {
    /// inverse of the 2x2 solve for the two non-owner coefficients
    inv: [f64; 4],
    /// first-basis-function averages of the two stencil rows
    col0: [f64; 2],
    entries: [EntryRef; 2],
}

/// Per-cell reconstruction operator.
#[derive(Debug, Clone)]
pub struct CellOperator {
    /// pseudo-inverse of the reduced LSQ matrix, (m-1) x (ne-1) row-major
    pinv: Vec<f64>,
    /// first-basis-function averages of the central rows
    col0: Vec<f64>,
    entries: Vec<EntryRef>,
    sectors: [Option<SectorOp>; 3],
    /// linear weights renormalized over the active candidates; index 0 is
    /// the central candidate
    lambda: [f64; 4],
}

/// Transform a conserved average by an isometry of velocity space (mirror
/// chains across wall and piston boundaries). Scalar systems carry no
/// velocity and pass through unchanged.
fn apply_xform<S: System>(sys: &S, q: &S::State, rot: &Matrix2<f64>, shift: Vec2) -> S::State {
    let _ = sys;
    if S::State::LEN < 5 {
        return *q;
    }
    let rho = q.comp(0);
    let v = Vec2::new(q.comp(1) / rho, q.comp(2) / rho);
    let vg = rot * v + shift;
    let mut out = *q;
    *out.comp_mut(1) = rho * vg.x;
    *out.comp_mut(2) = rho * vg.y;
    *out.comp_mut(4) = q.comp(4) + 0.5 * rho * (vg.norm_squared() - v.norm_squared());
    if S::State::LEN == 9 {
        let b = Vec2::new(q.comp(5), q.comp(6));
        let bg = rot * b;
        *out.comp_mut(5) = bg.x;
        *out.comp_mut(6) = bg.y;
    }
    out
}

/// Physical vertex coordinates of an entry under its ghost-op chain, plus
/// the composed average transform.
pub fn materialize_entry(
    mesh: &Mesh,
    entry: &Entry,
) -> ([Point2; 3], Option<(Matrix2<f64>, Vec2)>) {
    let mut verts = mesh.vertices(entry.cell as usize);
    if entry.ops.is_empty() {
        return (verts, None);
    }
    let mut rot = Matrix2::identity();
    let mut shift = Vec2::zeros();
    let mut nontrivial = false;
    for op in &entry.ops {
        match *op {
            GhostOp::Wrap { dx, dy } => {
                let d = Vec2::new(dx, dy);
                for v in verts.iter_mut() {
                    *v += d;
                }
            }
            GhostOp::Reflect { face } => {
                let f = &mesh.faces[face as usize];
                let (a, b) = mesh.edge_nodes(f.left as usize, f.left_edge as usize);
                let p = mesh.nodes[a];
                let d = (mesh.nodes[b] - mesh.nodes[a]).normalize();
                for v in verts.iter_mut() {
                    *v = geom::reflect_point(*v, p, d);
                }
                use crate::mesh::{BoundaryKind, FaceKind};
                let wall_velocity = match f.kind {
                    FaceKind::Boundary(BoundaryKind::Wall) => Some(Vec2::zeros()),
                    FaceKind::Boundary(BoundaryKind::Piston { velocity }) => Some(velocity),
                    _ => None,
                };
                if let Some(vw) = wall_velocity {
                    let r = geom::reflection_matrix(d);
                    let n = Vec2::new(d.y, -d.x);
                    let c = n * (2.0 * vw.dot(&n));
                    rot = r * rot;
                    shift = r * shift + c;
                    nontrivial = true;
                }
            }
        }
    }
    (verts, nontrivial.then_some((rot, shift)))
}

/// Mean of each basis function over a triangle given in the owner's
/// reference coordinates.
fn basis_row(basis: &SpatialBasis, rule: &TriangleRule, verts_ref: &[Point2; 3], row: &mut [f64]) {
    row.iter_mut().for_each(|r| *r = 0.0);
    let e1 = verts_ref[1] - verts_ref[0];
    let e2 = verts_ref[2] - verts_ref[0];
    let mut vals = vec![0.0; basis.size];
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        let xi = verts_ref[0] + e1 * p.x + e2 * p.y;
        basis.eval_all(xi, &mut vals);
        for (r, v) in row.iter_mut().zip(&vals) {
            *r += w * v;
        }
    }
    // rule weights sum to |T_E| = 1/2; averages are quadrature sums / (1/2)
    row.iter_mut().for_each(|r| *r *= 2.0);
}

/// Assemble the reconstruction operator of one cell from the current mesh
/// geometry.
pub fn build_operator(
    mesh: &Mesh,
    basis: &SpatialBasis,
    rule: &TriangleRule,
    stencil: &CellStencil,
    cell: usize,
) -> Result<CellOperator, ReconError> {
    let m = basis.size;
    let ne = stencil.central.len();
    let map = mesh.affine_map(cell);
    let mut row = vec![0.0; m];

    // central constrained LSQ: the owner average pins the first coefficient,
    // the remaining ones solve the reduced system by orthogonal factorization
    let mut a = DMatrix::<f64>::zeros(ne - 1, m - 1);
    let mut col0 = vec![0.0; ne - 1];
    let mut entries = Vec::with_capacity(ne - 1);
    for (j, entry) in stencil.central.iter().enumerate().skip(1) {
        let (verts, xform) = materialize_entry(mesh, entry);
        let verts_ref = [
            map.to_reference(verts[0]),
            map.to_reference(verts[1]),
            map.to_reference(verts[2]),
        ];
        basis_row(basis, rule, &verts_ref, &mut row);
        col0[j - 1] = row[0];
        for l in 1..m {
            a[(j - 1, l - 1)] = row[l];
        }
        entries.push(EntryRef { cell: entry.cell, xform });
    }
    let qr = a.qr();
    let r = qr.r();
    let rmax = (0..m - 1).map(|k| r[(k, k)].abs()).fold(0.0, f64::max);
    if (0..m - 1).any(|k| r[(k, k)].abs() < 1e-12 * rmax) || rmax == 0.0 {
        return Err(ReconError::RankDeficient(cell));
    }
    // pinv = R^-1 Q^T
    let qt = qr.q().transpose();
    let mut pinv_mat = qt;
    r.solve_upper_triangular_mut(&mut pinv_mat);
    let mut pinv = vec![0.0; (m - 1) * (ne - 1)];
    for l in 0..m - 1 {
        for j in 0..ne - 1 {
            pinv[l * (ne - 1) + j] = pinv_mat[(l, j)];
        }
    }

    // sector solves: 3 cells interpolated exactly by a linear polynomial
    let mut sectors: [Option<SectorOp>; 3] = [None, None, None];
    for (s, sec) in stencil.sectors.iter().enumerate() {
        if sec.len() < 3 {
            continue;
        }
        let mut mat = [0.0; 4];
        let mut c0 = [0.0; 2];
        let mut ents: Vec<EntryRef> = Vec::with_capacity(2);
        for (j, entry) in sec.iter().enumerate().skip(1) {
            let (verts, xform) = materialize_entry(mesh, entry);
            let verts_ref = [
                map.to_reference(verts[0]),
                map.to_reference(verts[1]),
                map.to_reference(verts[2]),
            ];
            basis_row(basis, rule, &verts_ref, &mut row);
            c0[j - 1] = row[0];
            mat[2 * (j - 1)] = row[1];
            mat[2 * (j - 1) + 1] = row[2];
            ents.push(EntryRef { cell: entry.cell, xform });
        }
        let det = mat[0] * mat[3] - mat[1] * mat[2];
        let scale = mat.iter().map(|x| x.abs()).fold(0.0, f64::max);
        if det.abs() <= 1e-12 * scale * scale {
            continue; // singular sector geometry: candidate disabled
        }
        let inv = [mat[3] / det, -mat[1] / det, -mat[2] / det, mat[0] / det];
        sectors[s] = Some(SectorOp {
            inv,
            col0: c0,
            entries: [ents[0].clone(), ents[1].clone()],
        });
    }

    // linear weights over the active candidates, normalized to sum one
    let mut lambda = [0.0; 4];
    lambda[0] = LAMBDA_CENTRAL;
    for s in 0..3 {
        if sectors[s].is_some() {
            lambda[s + 1] = 1.0;
        }
    }
    let total: f64 = lambda.iter().sum();
    lambda.iter_mut().for_each(|l| *l /= total);

    Ok(CellOperator { pinv, col0, entries, sectors, lambda })
}

/// Normalized nonlinear weights from indicators and linear weights.
pub fn nonlinear_weights(sigma: &[f64], lambda: &[f64], eps: f64, r: i32) -> Vec<f64> {
    let raw: Vec<f64> = sigma
        .iter()
        .zip(lambda)
        .map(|(&s, &l)| l / (s + eps).powi(r))
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Reconstruction coefficients of every cell. `coeffs` is a flat array of
/// length `n_cells * basis.size`, one state per Dubiner coefficient.
pub fn reconstruct_all<S: System>(
    sys: &S,
    ops: &[CellOperator],
    averages: &[S::State],
    basis: &SpatialBasis,
    osc: &OscillationMatrix,
    coeffs: &mut [S::State],
) {
    let m = basis.size;
    coeffs
        .par_chunks_mut(m)
        .enumerate()
        .for_each(|(cell, out)| reconstruct_cell(sys, &ops[cell], averages, cell, m, osc, out));
}

fn entry_avg<S: System>(sys: &S, averages: &[S::State], e: &EntryRef) -> S::State {
    let q = averages[e.cell as usize];
    match &e.xform {
        None => q,
        Some((rot, shift)) => apply_xform(sys, &q, rot, *shift),
    }
}

/// CWENO blend for a single cell: central LSQ polynomial, sector
/// interpolants, P0 extraction and the indicator-weighted combination,
/// component by component.
pub fn reconstruct_cell<S: System>(
    sys: &S,
    op: &CellOperator,
    averages: &[S::State],
    cell: usize,
    m: usize,
    osc: &OscillationMatrix,
    out: &mut [S::State],
) {
    let ne1 = op.entries.len();
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;

    // gather (transformed) stencil averages once
    let own = averages[cell];
    let mut stencil_avg: Vec<S::State> = Vec::with_capacity(ne1);
    for e in &op.entries {
        stencil_avg.push(entry_avg(sys, averages, e));
    }
    let sector_avg: [Option<[S::State; 2]>; 3] = std::array::from_fn(|s| {
        op.sectors[s].as_ref().map(|sec| {
            [
                entry_avg(sys, averages, &sec.entries[0]),
                entry_avg(sys, averages, &sec.entries[1]),
            ]
        })
    });

    let nv = S::State::LEN;
    let mut popt = vec![0.0; m];
    let mut p0 = vec![0.0; m];
    let mut rhs = vec![0.0; ne1];
    let mut sect = [[0.0; 3]; 3];
    for v in 0..nv {
        let q_own = own.comp(v);
        let p_hat0 = q_own * inv_sqrt2;

        // central candidate
        for j in 0..ne1 {
            rhs[j] = stencil_avg[j].comp(v) - op.col0[j] * p_hat0;
        }
        popt[0] = p_hat0;
        for l in 1..m {
            let row = &op.pinv[(l - 1) * ne1..l * ne1];
            let mut acc = 0.0;
            for j in 0..ne1 {
                acc += row[j] * rhs[j];
            }
            popt[l] = acc;
        }

        // sector candidates (linear, interpolating all three averages)
        let mut sigma = [0.0f64; 4];
        let mut active = [false; 4];
        active[0] = true;
        for s in 0..3 {
            let (Some(sec), Some(avgs)) = (&op.sectors[s], &sector_avg[s]) else {
                continue;
            };
            let b0 = avgs[0].comp(v) - sec.col0[0] * p_hat0;
            let b1 = avgs[1].comp(v) - sec.col0[1] * p_hat0;
            sect[s][0] = p_hat0;
            sect[s][1] = sec.inv[0] * b0 + sec.inv[1] * b1;
            sect[s][2] = sec.inv[2] * b0 + sec.inv[3] * b1;
            active[s + 1] = true;
            sigma[s + 1] = osc.indicator(|l| match l {
                1 => sect[s][1],
                2 => sect[s][2],
                _ => 0.0,
            });
        }

        // P0 from the optimal-coefficient identity
        for l in 0..m {
            let mut acc = popt[l];
            if l < 3 {
                for s in 0..3 {
                    if active[s + 1] {
                        acc -= op.lambda[s + 1] * sect[s][l];
                    }
                }
            }
            p0[l] = acc / op.lambda[0];
        }
        sigma[0] = osc.indicator(|l| p0[l]);

        // nonlinear weights over the active candidates
        let mut wsum = 0.0;
        let mut w = [0.0f64; 4];
        for k in 0..4 {
            if active[k] {
                w[k] = op.lambda[k] / (sigma[k] + WENO_EPS).powi(WENO_R);
                wsum += w[k];
            }
        }
        for wk in w.iter_mut() {
            *wk /= wsum;
        }

        for l in 0..m {
            let mut acc = w[0] * p0[l];
            if l < 3 {
                for s in 0..3 {
                    if active[s + 1] {
                        acc += w[s + 1] * sect[s][l];
                    }
                }
            }
            *out[l].comp_mut(v) = acc;
        }
    }
}

/// Evaluate a reconstruction polynomial at a reference point.
pub fn eval_poly<S: System>(basis: &SpatialBasis, coeffs: &[S::State], xi: Point2) -> S::State {
    let mut vals = vec![0.0; basis.size];
    basis.eval_all(xi, &mut vals);
    let mut acc = S::State::zero();
    for (c, v) in coeffs.iter().zip(&vals) {
        acc += *c * *v;
    }
    acc
}

#[cfg(test)]
mod tests;
