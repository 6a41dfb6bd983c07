//! Mesh motion machinery: the mass-weighted nodal solver, constrained vertex
//! updates and the space-time geometry of faces swept by moving edges.

use rayon::prelude::*;

use crate::geom::{Point2, Vec2};
use crate::mesh::{BoundaryKind, FaceKind, Mesh};
use crate::systems::{StateVec, System};

/// Velocity assigned to every mesh node, with boundary constraints applied.
#[derive(Debug, Clone)]
pub struct NodalVelocityField {
    pub velocity: Vec<Vec2>,
}

/// Mass-weighted average of the time-integrated predictor velocities over
/// the Voronoi neighborhood of each node, followed by the boundary
/// constraints: piston nodes carry the prescribed velocity, wall nodes lose
/// their wall-normal component, periodic partner nodes are merged.
///
/// `vhat` holds the space-time velocity DOFs of every cell (`l_dofs` per
/// cell); `tint` are the tau-integrated basis values at the three corners.
pub fn nodal_velocity<S: System>(
    sys: &S,
    mesh: &Mesh,
    averages: &[S::State],
    vhat: &[Vec2],
    l_dofs: usize,
    tint: &[Vec<f64>; 3],
) -> NodalVelocityField {
    let _ = sys;
    let n_nodes = mesh.n_nodes();
    let mut velocity = vec![Vec2::zeros(); n_nodes];
    velocity
        .par_iter_mut()
        .enumerate()
        .for_each(|(k, out)| {
            let mut momentum = Vec2::zeros();
            let mut mass = 0.0;
            for &cj in &mesh.node_cells[k] {
                let j = cj as usize;
                let corner = mesh.cells[j]
                    .iter()
                    .position(|&n| n == k)
                    .expect("node_cells consistent with cells");
                let row = &tint[corner];
                let mut v = Vec2::zeros();
                for (l, w) in row.iter().enumerate() {
                    v += vhat[j * l_dofs + l] * *w;
                }
                let mu = averages[j].comp(0) * mesh.area(j);
                momentum += v * mu;
                mass += mu;
            }
            *out = momentum / mass;
        });

    // merge periodic partners: identical velocity keeps the seam conforming
    for group in &mesh.periodic_groups {
        let mut momentum = Vec2::zeros();
        let mut mass = 0.0;
        for &k in group {
            let mut m_k = 0.0;
            for &cj in &mesh.node_cells[k] {
                m_k += averages[cj as usize].comp(0) * mesh.area(cj as usize);
            }
            momentum += velocity[k] * m_k;
            mass += m_k;
        }
        let v = momentum / mass;
        for &k in group {
            velocity[k] = v;
        }
    }

    apply_constraints(mesh, &mut velocity);
    NodalVelocityField { velocity }
}

/// Piston overrides, then wall-line projections; two independent wall
/// directions pin the node.
fn apply_constraints(mesh: &Mesh, velocity: &mut [Vec2]) {
    let n_nodes = mesh.n_nodes();
    let mut wall_normals: Vec<Vec<Vec2>> = vec![Vec::new(); n_nodes];
    let mut piston: Vec<Option<Vec2>> = vec![None; n_nodes];
    for (_, face) in mesh.boundary_faces() {
        let FaceKind::Boundary(kind) = face.kind else { continue };
        let (a, b) = mesh.edge_nodes(face.left as usize, face.left_edge as usize);
        match kind {
            BoundaryKind::Wall => {
                let d = (mesh.nodes[b] - mesh.nodes[a]).normalize();
                let n = Vec2::new(d.y, -d.x);
                for &k in &[a, b] {
                    if !wall_normals[k].iter().any(|m| m.perp(&n).abs() < 1e-9) {
                        wall_normals[k].push(n);
                    }
                }
            }
            BoundaryKind::Piston { velocity: vp } => {
                piston[a] = Some(vp);
                piston[b] = Some(vp);
            }
            _ => {}
        }
    }
    for k in 0..n_nodes {
        if let Some(vp) = piston[k] {
            velocity[k] = vp;
        }
        match wall_normals[k].len() {
            0 => {}
            1 => {
                let n = wall_normals[k][0];
                velocity[k] -= n * velocity[k].dot(&n);
            }
            _ => velocity[k] = Vec2::zeros(),
        }
    }
}

/// X^{n+1} = X^n + dt V, failing on element inversion.
pub fn move_vertices(
    mesh: &Mesh,
    field: &NodalVelocityField,
    dt: f64,
) -> Vec<Point2> {
    mesh.nodes
        .iter()
        .zip(&field.velocity)
        .map(|(x, v)| x + v * dt)
        .collect()
}

/// Area-weighted Laplacian smoothing of unconstrained interior nodes,
/// blended with weight `omega` into the Lagrangian positions.
pub fn smooth_interior_nodes(mesh: &Mesh, new_nodes: &mut [Point2], omega: f64) {
    if omega <= 0.0 {
        return;
    }
    let mut boundary_node = vec![false; mesh.n_nodes()];
    for face in &mesh.faces {
        if matches!(face.kind, FaceKind::Interior) {
            continue;
        }
        let (a, b) = mesh.edge_nodes(face.left as usize, face.left_edge as usize);
        boundary_node[a] = true;
        boundary_node[b] = true;
        if !face.is_boundary() {
            let (c, d) = mesh.edge_nodes(face.right as usize, face.right_edge as usize);
            boundary_node[c] = true;
            boundary_node[d] = true;
        }
    }
    let smoothed: Vec<Option<Point2>> = (0..mesh.n_nodes())
        .map(|k| {
            if boundary_node[k] {
                return None;
            }
            let mut acc = Vec2::zeros();
            let mut total = 0.0;
            for &cj in &mesh.node_cells[k] {
                let c = mesh.cells[cj as usize];
                let bary = (new_nodes[c[0]] + new_nodes[c[1]] + new_nodes[c[2]]) / 3.0;
                let a = 0.5
                    * ((new_nodes[c[1]] - new_nodes[c[0]])
                        .perp(&(new_nodes[c[2]] - new_nodes[c[0]])))
                    .abs();
                acc += bary * a;
                total += a;
            }
            Some(acc / total)
        })
        .collect();
    for (k, s) in smoothed.into_iter().enumerate() {
        if let Some(target) = s {
            new_nodes[k] = new_nodes[k] * (1.0 - omega) + target * omega;
        }
    }
}

/// Ruled space-time surface swept by one edge over a step: four space-time
/// corners and the scaled normal of the bilinear parametrization.
#[derive(Debug, Clone, Copy)]
pub struct SpaceTimeFaceGeom {
    pub a0: Point2,
    pub b0: Point2,
    pub a1: Point2,
    pub b1: Point2,
    pub dt: f64,
}

impl SpaceTimeFaceGeom {
    /// Scaled space-time normal at parameters (chi, tau): the spatial part
    /// `n_sp` and the time component `n_t`, such that
    /// `int_0^1 int_0^1 (F . n_sp + Q n_t) dchi dtau` is the physical
    /// surface integral with outward orientation for the owning cell whose
    /// CCW edge runs a -> b.
    #[inline]
    pub fn scaled_normal(&self, chi: f64, tau: f64) -> (Vec2, f64) {
        let e0 = self.b0 - self.a0;
        let e1 = self.b1 - self.a1;
        let x_chi = e0 * (1.0 - tau) + e1 * tau;
        let da = self.a1 - self.a0;
        let db = self.b1 - self.b0;
        let x_tau = da * (1.0 - chi) + db * chi;
        let n_sp = Vec2::new(x_chi.y, -x_chi.x) * self.dt;
        let n_t = x_chi.x * x_tau.y - x_chi.y * x_tau.x;
        (n_sp, n_t)
    }

    /// Surface measure of the scaled normal at (chi, tau).
    pub fn measure(&self, chi: f64, tau: f64) -> f64 {
        let (n_sp, n_t) = self.scaled_normal(chi, tau);
        (n_sp.norm_squared() + n_t * n_t).sqrt()
    }
}
