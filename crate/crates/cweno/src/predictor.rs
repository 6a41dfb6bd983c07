//! Element-local space-time Galerkin predictor: each cell's reconstruction
//! polynomial is evolved to a space-time polynomial of the same degree by a
//! Picard iteration on the weak in-cell form of the PDE, with no neighbor
//! coupling. In ALE mode the element geometry and the mesh velocity are
//! evolved alongside the state through the trajectory equation.

use nalgebra::Matrix2;

use crate::basis::SpatialBasis;
use crate::error::SolverError;
use crate::geom::{Point2, Vec2};
use crate::spacetime::{PredictorMatrices, SpaceTimeBasis};
use crate::systems::{StateVec, System};

/// Relative Picard residual for full convergence.
pub const PICARD_TOL: f64 = 1e-12;
/// Residual that must be met when the iteration cap is reached.
pub const PICARD_TOL_CAP: f64 = 1e-8;

pub fn picard_cap(m: usize) -> usize {
    2 * (m + 1)
}

/// How the predictor treats geometry and mesh velocity.
#[derive(Clone)]
pub enum Motion {
    /// static mesh, zero mesh velocity
    Fixed,
    /// mesh velocity equals the local fluid velocity, refreshed per iteration
    Lagrangian,
    /// externally prescribed velocity field V(x, t)
    Prescribed(std::sync::Arc<dyn Fn(Point2, f64) -> Vec2 + Send + Sync>),
}

impl Motion {
    pub fn is_fixed(&self) -> bool {
        matches!(self, Motion::Fixed)
    }
}

/// Per-degree tables the predictor needs beyond the system matrices:
/// spatial-basis values at the space-time node positions.
#[derive(Debug, Clone)]
pub struct PredictorTables {
    /// psi_l(xi_k) for every space-time node k (L x m, row-major)
    pub w_nodes: Vec<f64>,
    pub l_dofs: usize,
    pub n0: usize,
    pub m_dofs: usize,
}

pub fn predictor_tables(basis: &SpatialBasis, st: &SpaceTimeBasis) -> PredictorTables {
    let l = st.size;
    let m = basis.size;
    let mut w_nodes = vec![0.0; l * m];
    let mut vals = vec![0.0; m];
    for (k, n) in st.nodes.iter().enumerate() {
        basis.eval_all(Point2::new(n[0], n[1]), &mut vals);
        w_nodes[k * m..(k + 1) * m].copy_from_slice(&vals);
    }
    PredictorTables { w_nodes, l_dofs: l, n0: st.tau0_count, m_dofs: m }
}

/// Space-time degrees of freedom of one cell after the predictor stage.
#[derive(Debug, Clone)]
pub struct CellPredictor<S: System> {
    pub qhat: Vec<S::State>,
    /// geometry DOFs; the cell's affine node positions when the mesh is fixed
    pub xhat: Vec<Point2>,
    /// mesh velocity DOFs; zero when the mesh is fixed
    pub vhat: Vec<Vec2>,
    pub iterations: usize,
    pub residual: f64,
}

/// Scratch buffers reused across cells by one worker.
pub struct PredictorScratch<S: System> {
    fx: Vec<S::State>,
    fy: Vec<S::State>,
    u1: Vec<S::State>,
    u2: Vec<S::State>,
    rhs: Vec<S::State>,
    new_q1: Vec<S::State>,
    grad_q: Vec<[S::State; 2]>,
    rhs_x: Vec<Vec2>,
}

impl<S: System> PredictorScratch<S> {
    pub fn new(l: usize, n0: usize) -> Self {
        let n1 = l - n0;
        Self {
            fx: vec![S::State::zero(); l],
            fy: vec![S::State::zero(); l],
            u1: vec![S::State::zero(); l],
            u2: vec![S::State::zero(); l],
            rhs: vec![S::State::zero(); n1],
            new_q1: vec![S::State::zero(); n1],
            grad_q: vec![[S::State::zero(), S::State::zero()]; l],
            rhs_x: vec![Vec2::zeros(); n1],
        }
    }
}

/// Initialize the nodal state from the reconstruction polynomial: exact at
/// tau = 0, constant-in-tau warm start above.
fn init_state<S: System>(tables: &PredictorTables, coeffs: &[S::State], qhat: &mut Vec<S::State>) {
    let (l, m) = (tables.l_dofs, tables.m_dofs);
    qhat.clear();
    for k in 0..l {
        let row = &tables.w_nodes[k * m..(k + 1) * m];
        let mut acc = S::State::zero();
        for (c, w) in coeffs.iter().zip(row) {
            acc += *c * *w;
        }
        qhat.push(acc);
    }
}

/// Fixed-mesh predictor: the inverse Jacobian is constant over the cell, so
/// the divergence contraction can use the premultiplied mass-derivative
/// matrices.
#[allow(clippy::too_many_arguments)]
pub fn predict_cell_fixed<S: System>(
    sys: &S,
    mats: &PredictorMatrices,
    tables: &PredictorTables,
    coeffs: &[S::State],
    inv_jac: &Matrix2<f64>,
    dt: f64,
    cell: usize,
    scratch: &mut PredictorScratch<S>,
    qhat: &mut Vec<S::State>,
) -> Result<(usize, f64), SolverError> {
    let l = tables.l_dofs;
    let n0 = tables.n0;
    let n1 = l - n0;
    init_state::<S>(tables, coeffs, qhat);
    for (k, q) in qhat.iter().enumerate() {
        sys.check_admissible(q).map_err(|what| SolverError::Inadmissible {
            cell,
            time: f64::NAN,
            what: format!("predictor init node {k}: {what}"),
        })?;
    }

    let q0_norm: f64 = qhat[..n0].iter().map(|q| q.norm2()).sum::<f64>().max(1e-300);
    // K0 q0 is fixed across iterations
    let mut k0q0 = vec![S::State::zero(); n1];
    for r in 0..n1 {
        let mut acc = S::State::zero();
        for c in 0..n0 {
            acc += qhat[c] * mats.k0[(r, c)];
        }
        k0q0[r] = acc;
    }

    let cap = picard_cap(tables_degree(tables));
    let mut residual = f64::INFINITY;
    for iter in 0..cap {
        // nodal fluxes contracted with the static inverse Jacobian
        for k in 0..l {
            let [f, g] = sys.flux(&qhat[k]);
            scratch.u1[k] = f * inv_jac[(0, 0)] + g * inv_jac[(0, 1)];
            scratch.u2[k] = f * inv_jac[(1, 0)] + g * inv_jac[(1, 1)];
        }
        // rhs = -dt (M1 Dxi u1 + M1 Deta u2) - K0 q0
        for r in 0..n1 {
            let mut acc = S::State::zero();
            for k in 0..l {
                acc += scratch.u1[k] * mats.md_xi[(r, k)] + scratch.u2[k] * mats.md_eta[(r, k)];
            }
            scratch.rhs[r] = acc * (-dt) - k0q0[r];
        }
        // q1 = K1^-1 rhs
        let mut diff = 0.0f64;
        for r in 0..n1 {
            let mut acc = S::State::zero();
            for c in 0..n1 {
                acc += scratch.rhs[c] * mats.k1_inv[(r, c)];
            }
            let d = acc - qhat[n0 + r];
            diff += d.norm2().powi(2);
            scratch.new_q1[r] = acc;
        }
        qhat[n0..].copy_from_slice(&scratch.new_q1);
        residual = diff.sqrt() / q0_norm;
        if residual < PICARD_TOL {
            return Ok((iter + 1, residual));
        }
    }
    if residual < PICARD_TOL_CAP {
        Ok((cap, residual))
    } else {
        Err(SolverError::PredictorDiverged { cell, residual, iters: cap })
    }
}

fn tables_degree(tables: &PredictorTables) -> usize {
    // m_dofs = (M+1)(M+2)/2
    match tables.m_dofs {
        3 => 1,
        6 => 2,
        10 => 3,
        15 => 4,
        other => panic!("unexpected dof count {other}"),
    }
}

/// Moving-mesh predictor: couples the state iteration with the trajectory
/// equation; the inverse Jacobian is evaluated per space-time node from the
/// evolving isoparametric geometry.
#[allow(clippy::too_many_arguments)]
pub fn predict_cell_moving<S: System>(
    sys: &S,
    mats: &PredictorMatrices,
    tables: &PredictorTables,
    st: &SpaceTimeBasis,
    coeffs: &[S::State],
    verts: &[Point2; 3],
    dt: f64,
    t_now: f64,
    motion: &Motion,
    cell: usize,
    scratch: &mut PredictorScratch<S>,
    qhat: &mut Vec<S::State>,
    xhat: &mut Vec<Point2>,
    vhat: &mut Vec<Vec2>,
) -> Result<(usize, f64), SolverError> {
    let l = tables.l_dofs;
    let n0 = tables.n0;
    let n1 = l - n0;
    init_state::<S>(tables, coeffs, qhat);
    for (k, q) in qhat.iter().enumerate() {
        sys.check_admissible(q).map_err(|what| SolverError::Inadmissible {
            cell,
            time: t_now,
            what: format!("predictor init node {k}: {what}"),
        })?;
    }

    // geometry warm start: affine positions, constant in tau
    xhat.clear();
    for node in &st.nodes {
        let p = verts[0]
            + (verts[1] - verts[0]) * node[0]
            + (verts[2] - verts[0]) * node[1];
        xhat.push(p);
    }
    let refresh_velocity =
        |qhat: &[S::State], xhat: &[Point2], vhat: &mut Vec<Vec2>| {
            vhat.clear();
            match motion {
                Motion::Fixed => vhat.extend(std::iter::repeat_n(Vec2::zeros(), l)),
                Motion::Lagrangian => {
                    vhat.extend(qhat.iter().map(|q| sys.velocity(q)));
                }
                Motion::Prescribed(f) => {
                    vhat.extend(
                        xhat.iter()
                            .zip(st.nodes.iter())
                            .map(|(x, n)| f(*x, t_now + n[2] * dt)),
                    );
                }
            }
        };
    refresh_velocity(qhat, xhat, vhat);

    let q0_norm: f64 = qhat[..n0].iter().map(|q| q.norm2()).sum::<f64>().max(1e-300);
    let x0_norm: f64 = xhat[..n0].iter().map(|x| x.norm()).sum::<f64>().max(1e-300);
    let mut k0q0 = vec![S::State::zero(); n1];
    let mut k0x0 = vec![Vec2::zeros(); n1];
    for r in 0..n1 {
        let mut acc = S::State::zero();
        let mut accx = Vec2::zeros();
        for c in 0..n0 {
            acc += qhat[c] * mats.k0[(r, c)];
            accx += xhat[c] * mats.k0[(r, c)];
        }
        k0q0[r] = acc;
        k0x0[r] = accx;
    }

    let cap = picard_cap(tables_degree(tables));
    let mut residual = f64::INFINITY;
    for iter in 0..cap {
        // trajectory update: K1 x1 = dt M1 V - K0 x0
        for r in 0..n1 {
            let mut acc = Vec2::zeros();
            for k in 0..l {
                acc += vhat[k] * mats.m1[(r, k)];
            }
            scratch.rhs_x[r] = acc * dt - k0x0[r];
        }
        let mut diff_x = 0.0f64;
        for r in 0..n1 {
            let mut acc = Vec2::zeros();
            for c in 0..n1 {
                acc += scratch.rhs_x[c] * mats.k1_inv[(r, c)];
            }
            diff_x += (acc - xhat[n0 + r]).norm_squared();
            xhat[n0 + r] = acc;
        }

        // nodal fluxes and state gradients
        for k in 0..l {
            let [f, g] = sys.flux(&qhat[k]);
            scratch.fx[k] = f;
            scratch.fy[k] = g;
        }
        for k in 0..l {
            let mut gx = S::State::zero();
            let mut gy = S::State::zero();
            for j in 0..l {
                gx += qhat[j] * mats.d_xi[(k, j)];
                gy += qhat[j] * mats.d_eta[(k, j)];
            }
            scratch.grad_q[k] = [gx, gy];
        }
        // H per node with the local inverse Jacobian and mesh velocity
        for k in 0..l {
            let mut jxx = 0.0;
            let mut jxy = 0.0;
            let mut jyx = 0.0;
            let mut jyy = 0.0;
            for j in 0..l {
                jxx += mats.d_xi[(k, j)] * xhat[j].x;
                jyx += mats.d_xi[(k, j)] * xhat[j].y;
                jxy += mats.d_eta[(k, j)] * xhat[j].x;
                jyy += mats.d_eta[(k, j)] * xhat[j].y;
            }
            let det = jxx * jyy - jxy * jyx;
            if det <= 0.0 || !det.is_finite() {
                return Err(SolverError::ElementInversion { cell, time: t_now, area: 0.5 * det });
            }
            // inverse jacobian rows: d xi / d x
            let ixx = jyy / det;
            let ixy = -jxy / det;
            let iyx = -jyx / det;
            let iyy = jxx / det;
            // d xi / d t = -J^-1 V
            let v = vhat[k];
            let dxi_dt = Vec2::new(-(ixx * v.x + ixy * v.y), -(iyx * v.x + iyy * v.y));
            // derivative matrices act on f and g separately below
            let mut fxi = S::State::zero();
            let mut feta = S::State::zero();
            let mut gxi = S::State::zero();
            let mut geta = S::State::zero();
            for j in 0..l {
                fxi += scratch.fx[j] * mats.d_xi[(k, j)];
                feta += scratch.fx[j] * mats.d_eta[(k, j)];
                gxi += scratch.fy[j] * mats.d_xi[(k, j)];
                geta += scratch.fy[j] * mats.d_eta[(k, j)];
            }
            let h = scratch.grad_q[k][0] * dxi_dt.x
                + scratch.grad_q[k][1] * dxi_dt.y
                + fxi * ixx
                + feta * iyx
                + gxi * ixy
                + geta * iyy;
            scratch.u1[k] = h;
        }
        // rhs = -dt M1 H - K0 q0
        for r in 0..n1 {
            let mut acc = S::State::zero();
            for k in 0..l {
                acc += scratch.u1[k] * mats.m1[(r, k)];
            }
            scratch.rhs[r] = acc * (-dt) - k0q0[r];
        }
        let mut diff = 0.0f64;
        for r in 0..n1 {
            let mut acc = S::State::zero();
            for c in 0..n1 {
                acc += scratch.rhs[c] * mats.k1_inv[(r, c)];
            }
            diff += (acc - qhat[n0 + r]).norm2().powi(2);
            scratch.new_q1[r] = acc;
        }
        qhat[n0..].copy_from_slice(&scratch.new_q1);
        refresh_velocity(qhat, xhat, vhat);

        residual = diff.sqrt() / q0_norm + diff_x.sqrt() / x0_norm;
        if residual < PICARD_TOL {
            return Ok((iter + 1, residual));
        }
    }
    if residual < PICARD_TOL_CAP {
        Ok((cap, residual))
    } else {
        Err(SolverError::PredictorDiverged { cell, residual, iters: cap })
    }
}
