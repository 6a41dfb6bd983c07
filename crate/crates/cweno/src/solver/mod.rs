//! The fully-discrete one-step finite volume scheme: CFL time-step control,
//! Rusanov and Osher-type numerical fluxes on space-time faces, boundary
//! ghosts and the conservative cell update, on fixed and moving meshes.

use std::sync::Arc;

use rayon::prelude::*;

use crate::ale::{self, SpaceTimeFaceGeom};
use crate::error::{BasisError, SolverError};
use crate::geom::{Point2, Vec2};
use crate::mesh::{BoundaryKind, FaceKind, Mesh};
use crate::predictor::{self, Motion, PredictorScratch};
use crate::recon::{self, CellOperator, StencilTopology};
use crate::systems::{StateVec, System};
use crate::tables::SchemeTables;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxKind {
    Rusanov,
    Osher,
}

#[derive(Clone)]
pub enum MotionMode {
    Eulerian,
    /// mesh velocity equals the local fluid velocity (nodal solver)
    Lagrangian,
    /// externally prescribed node velocity field V(x, t)
    Prescribed(Arc<dyn Fn(Point2, f64) -> Vec2 + Send + Sync>),
}

impl MotionMode {
    pub fn is_eulerian(&self) -> bool {
        matches!(self, MotionMode::Eulerian)
    }
}

#[derive(Clone)]
pub struct SolverConfig {
    pub cfl: f64,
    pub flux: FluxKind,
    pub mode: MotionMode,
    /// blend weight of the optional interior smoothing of Lagrangian node
    /// positions; 0 disables it
    pub rezone_weight: f64,
}

impl SolverConfig {
    pub fn eulerian(cfl: f64, flux: FluxKind) -> Self {
        Self { cfl, flux, mode: MotionMode::Eulerian, rezone_weight: 0.0 }
    }

    pub fn lagrangian(cfl: f64, flux: FluxKind) -> Self {
        Self { cfl, flux, mode: MotionMode::Lagrangian, rezone_weight: 0.0 }
    }
}

/// Ghost-state constructors per boundary tag.
#[derive(Debug, Clone)]
pub struct BoundaryTable<S: System> {
    /// fixed external states referenced by `BoundaryKind::Inflow(k)`
    pub inflow: Vec<S::State>,
}

impl<S: System> Default for BoundaryTable<S> {
    fn default() -> Self {
        Self { inflow: Vec::new() }
    }
}

/// Rusanov flux through a space-time surface element with scaled normal
/// `(n_sp, n_t)`: central space-time flux plus signal-speed dissipation
/// scaled by the spatial surface measure.
#[inline]
pub fn rusanov_flux<S: System>(
    sys: &S,
    qm: &S::State,
    qp: &S::State,
    n_sp: Vec2,
    n_t: f64,
) -> S::State {
    let mag = n_sp.norm();
    let n = n_sp / mag;
    let vn = -n_t / mag;
    let [fm, gm] = sys.flux(qm);
    let [fp, gp] = sys.flux(qp);
    let central = (fm + fp) * (0.5 * n_sp.x)
        + (gm + gp) * (0.5 * n_sp.y)
        + (*qm + *qp) * (0.5 * n_t);
    let s = sys
        .max_signal_normal(qm, n, vn)
        .max(sys.max_signal_normal(qp, n, vn));
    central - (*qp - *qm) * (0.5 * s * mag)
}

/// 3-point Gauss-Legendre abscissae/weights on [0, 1] for the Osher path.
const OSHER_S: [f64; 3] = [0.1127016653792583, 0.5, 0.8872983346207417];
const OSHER_W: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

/// Osher-type flux: the dissipation matrix is integrated along the straight
/// segment path between the states using the analytic eigendecomposition.
/// Falls back to Rusanov when a path sample leaves the admissible set; the
/// second return value reports that.
#[inline]
pub fn osher_flux<S: System>(
    sys: &S,
    qm: &S::State,
    qp: &S::State,
    n_sp: Vec2,
    n_t: f64,
) -> (S::State, bool) {
    let mag = n_sp.norm();
    let n = n_sp / mag;
    let vn = -n_t / mag;
    let [fm, gm] = sys.flux(qm);
    let [fp, gp] = sys.flux(qp);
    let central = (fm + fp) * (0.5 * n_sp.x)
        + (gm + gp) * (0.5 * n_sp.y)
        + (*qm + *qp) * (0.5 * n_t);
    let dq = *qp - *qm;
    let mut dissipation = S::State::zero();
    for (s, w) in OSHER_S.iter().zip(&OSHER_W) {
        let path = *qm + dq * *s;
        if sys.check_admissible(&path).is_err() {
            return (rusanov_flux(sys, qm, qp, n_sp, n_t), true);
        }
        match sys.abs_jacobian_apply(&path, &dq, n, vn) {
            Some(a) => dissipation += a * *w,
            None => return (rusanov_flux(sys, qm, qp, n_sp, n_t), true),
        }
    }
    (central - dissipation * (0.5 * mag), false)
}

#[derive(Debug, Clone, Copy)]
pub struct StepReport {
    pub dt: f64,
    pub t: f64,
    pub max_picard_iters: usize,
    pub osher_fallbacks: usize,
}

pub struct Simulation<S: System> {
    pub sys: S,
    pub mesh: Mesh,
    pub averages: Vec<S::State>,
    pub t: f64,
    pub steps: usize,
    pub config: SolverConfig,
    pub boundary: BoundaryTable<S>,
    pub tables: Arc<SchemeTables>,
    topo: StencilTopology,
    ops: Vec<CellOperator>,
    ops_valid: bool,
    coeffs: Vec<S::State>,
    qhat: Vec<S::State>,
    vhat: Vec<Vec2>,
    face_flux: Vec<S::State>,
    new_nodes: Vec<Point2>,
}

impl<S: System> Simulation<S> {
    pub fn new(
        sys: S,
        mesh: Mesh,
        m: usize,
        config: SolverConfig,
        boundary: BoundaryTable<S>,
        averages: Vec<S::State>,
    ) -> Result<Self, SolverError> {
        assert_eq!(averages.len(), mesh.n_cells());
        if config.flux == FluxKind::Osher && !sys.supports_osher() {
            return Err(SolverError::Inadmissible {
                cell: 0,
                time: 0.0,
                what: format!("osher flux unsupported for system '{}'", sys.name()),
            });
        }
        let tables = Arc::new(SchemeTables::new(m).map_err(map_basis)?);
        let topo = recon::build_stencils(&mesh, m)?;
        let n = mesh.n_cells();
        let l = tables.st.size;
        let mdof = tables.basis.size;
        Ok(Self {
            sys,
            mesh,
            averages,
            t: 0.0,
            steps: 0,
            config,
            boundary,
            tables,
            topo,
            ops: Vec::new(),
            ops_valid: false,
            coeffs: vec![S::State::zero(); n * mdof],
            qhat: vec![S::State::zero(); n * l],
            vhat: Vec::new(),
            face_flux: Vec::new(),
            new_nodes: Vec::new(),
        })
    }

    /// CFL time step from incircle diameters and cell-average signal speeds.
    pub fn compute_timestep(&self) -> Result<f64, SolverError> {
        let worst = (0..self.mesh.n_cells())
            .into_par_iter()
            .map(|i| {
                let s = self.sys.max_signal(&self.averages[i]);
                self.mesh.incircle_diameter(i) / s
            })
            .reduce(|| f64::INFINITY, f64::min);
        if !worst.is_finite() || worst <= 0.0 {
            return Err(SolverError::ZeroSignalSpeed);
        }
        Ok(self.config.cfl * worst)
    }

    fn rebuild_operators(&mut self) -> Result<(), SolverError> {
        let tables = &self.tables;
        let mesh = &self.mesh;
        let topo = &self.topo;
        let ops: Result<Vec<CellOperator>, _> = (0..mesh.n_cells())
            .into_par_iter()
            .map(|c| recon::build_operator(mesh, &tables.basis, &tables.recon_rule, &topo.cells[c], c))
            .collect();
        self.ops = ops?;
        self.ops_valid = true;
        Ok(())
    }

    /// Reconstruction coefficients for the current averages (also used by
    /// the measurement harness after a run).
    pub fn reconstruct(&mut self) -> Result<&[S::State], SolverError> {
        if !self.ops_valid {
            self.rebuild_operators()?;
        }
        recon::reconstruct_all(
            &self.sys,
            &self.ops,
            &self.averages,
            &self.tables.basis,
            &self.tables.osc,
            &mut self.coeffs,
        );
        Ok(&self.coeffs)
    }

    fn predict_all(&mut self, dt: f64) -> Result<usize, SolverError> {
        let tables = &self.tables;
        let l = tables.st.size;
        let n0 = tables.st.tau0_count;
        let mdof = tables.basis.size;
        let mesh = &self.mesh;
        let sys = &self.sys;
        let t_now = self.t;
        let coeffs = &self.coeffs;

        match &self.config.mode {
            MotionMode::Eulerian => {
                let iters: Result<Vec<usize>, SolverError> = self
                    .qhat
                    .par_chunks_mut(l)
                    .enumerate()
                    .map_init(
                        || PredictorScratch::<S>::new(l, n0),
                        |scratch, (cell, qhat)| {
                            let map = mesh.affine_map(cell);
                            let mut qvec = Vec::new();
                            let (iters, _res) = predictor::predict_cell_fixed(
                                sys,
                                &tables.mats,
                                &tables.ptables,
                                &coeffs[cell * mdof..(cell + 1) * mdof],
                                &map.inverse_jacobian,
                                dt,
                                cell,
                                scratch,
                                &mut qvec,
                            )?;
                            qhat.copy_from_slice(&qvec);
                            Ok(iters)
                        },
                    )
                    .collect();
                Ok(iters?.into_iter().max().unwrap_or(0))
            }
            mode => {
                let motion = match mode {
                    MotionMode::Lagrangian => Motion::Lagrangian,
                    MotionMode::Prescribed(f) => Motion::Prescribed(f.clone()),
                    MotionMode::Eulerian => unreachable!(),
                };
                if self.vhat.len() != mesh.n_cells() * l {
                    self.vhat = vec![Vec2::zeros(); mesh.n_cells() * l];
                }
                let iters: Result<Vec<usize>, SolverError> = self
                    .qhat
                    .par_chunks_mut(l)
                    .zip(self.vhat.par_chunks_mut(l))
                    .enumerate()
                    .map_init(
                        || PredictorScratch::<S>::new(l, n0),
                        |scratch, (cell, (qhat, vhat))| {
                            let verts = mesh.vertices(cell);
                            let mut qvec = Vec::new();
                            let mut xvec = Vec::new();
                            let mut vvec = Vec::new();
                            let (iters, _res) = predictor::predict_cell_moving(
                                sys,
                                &tables.mats,
                                &tables.ptables,
                                &tables.st,
                                &coeffs[cell * mdof..(cell + 1) * mdof],
                                &verts,
                                dt,
                                t_now,
                                &motion,
                                cell,
                                scratch,
                                &mut qvec,
                                &mut xvec,
                                &mut vvec,
                            )?;
                            qhat.copy_from_slice(&qvec);
                            vhat.copy_from_slice(&vvec);
                            Ok(iters)
                        },
                    )
                    .collect();
                Ok(iters?.into_iter().max().unwrap_or(0))
            }
        }
    }

    fn compute_new_nodes(&mut self, dt: f64) {
        match &self.config.mode {
            MotionMode::Eulerian => {
                self.new_nodes.clear();
                self.new_nodes.extend_from_slice(&self.mesh.nodes);
            }
            MotionMode::Prescribed(f) => {
                let t = self.t;
                self.new_nodes = self
                    .mesh
                    .nodes
                    .iter()
                    .map(|x| x + f(*x, t) * dt)
                    .collect();
            }
            MotionMode::Lagrangian => {
                let field = ale::nodal_velocity(
                    &self.sys,
                    &self.mesh,
                    &self.averages,
                    &self.vhat,
                    self.tables.st.size,
                    &self.tables.tint,
                );
                self.new_nodes = ale::move_vertices(&self.mesh, &field, dt);
                ale::smooth_interior_nodes(
                    &self.mesh,
                    &mut self.new_nodes,
                    self.config.rezone_weight,
                );
            }
        }
    }

    fn face_sweep(&mut self, dt: f64) -> Result<usize, SolverError> {
        let tables = &self.tables;
        let l = tables.st.size;
        let mesh = &self.mesh;
        let qhat = &self.qhat;
        let new_nodes = &self.new_nodes;
        let flux_kind = self.config.flux;
        let n_faces = mesh.faces.len();
        if self.face_flux.len() != n_faces {
            self.face_flux = vec![S::State::zero(); n_faces];
        }
        let sys = &self.sys;
        let boundary = &self.boundary;
        let chi = (&tables.chi_pts, &tables.chi_wts);
        let tau = (&tables.tau_pts, &tables.tau_wts);

        let fallbacks: Vec<usize> = self
            .face_flux
            .par_iter_mut()
            .enumerate()
            .map(|(fi, out)| {
                let face = &mesh.faces[fi];
                let lc = face.left as usize;
                let le = face.left_edge as usize;
                let (na, nb) = mesh.edge_nodes(lc, le);
                let geom = SpaceTimeFaceGeom {
                    a0: mesh.nodes[na],
                    b0: mesh.nodes[nb],
                    a1: new_nodes[na],
                    b1: new_nodes[nb],
                    dt,
                };
                let mut acc = S::State::zero();
                let mut fell_back = 0usize;
                for (ic, (cp, cw)) in chi.0.iter().zip(chi.1).enumerate() {
                    for (it, (tp, tw)) in tau.0.iter().zip(tau.1).enumerate() {
                        let row_m = tables.trace_row(le, 0, ic, it);
                        let mut qm = S::State::zero();
                        for (w, q) in row_m.iter().zip(&qhat[lc * l..(lc + 1) * l]) {
                            qm += *q * *w;
                        }
                        let (n_sp, n_t) = geom.scaled_normal(*cp, *tp);
                        let qp = match face.kind {
                            FaceKind::Interior | FaceKind::Periodic { .. } => {
                                let rc = face.right as usize;
                                let re = face.right_edge as usize;
                                let row_p = tables.trace_row(re, 1, ic, it);
                                let mut qp = S::State::zero();
                                for (w, q) in row_p.iter().zip(&qhat[rc * l..(rc + 1) * l]) {
                                    qp += *q * *w;
                                }
                                qp
                            }
                            FaceKind::Boundary(kind) => {
                                ghost_state(sys, boundary, kind, &qm, n_sp / n_sp.norm())
                            }
                        };
                        let w = cw * tw;
                        let g = match flux_kind {
                            FluxKind::Rusanov => rusanov_flux(sys, &qm, &qp, n_sp, n_t),
                            FluxKind::Osher => {
                                let (g, fb) = osher_flux(sys, &qm, &qp, n_sp, n_t);
                                fell_back += fb as usize;
                                g
                            }
                        };
                        acc += g * w;
                    }
                }
                *out = acc;
                fell_back
            })
            .collect();
        Ok(fallbacks.into_iter().sum())
    }

    fn update_averages(&mut self, dt: f64) -> Result<(), SolverError> {
        let mesh = &self.mesh;
        let new_nodes = &self.new_nodes;
        let face_flux = &self.face_flux;
        let sys = &self.sys;
        let averages = &self.averages;
        let t_new = self.t + dt;
        let result: Result<Vec<S::State>, SolverError> = (0..mesh.n_cells())
            .into_par_iter()
            .map(|i| {
                let old_area = mesh.area(i);
                let c = mesh.cells[i];
                let new_area = 0.5
                    * ((new_nodes[c[1]] - new_nodes[c[0]])
                        .perp(&(new_nodes[c[2]] - new_nodes[c[0]])));
                if new_area <= 0.0 {
                    return Err(SolverError::ElementInversion {
                        cell: i,
                        time: t_new,
                        area: new_area,
                    });
                }
                let mut total = averages[i] * old_area;
                for e in 0..3 {
                    let fi = mesh.cell_faces[i][e] as usize;
                    let sign = if mesh.faces[fi].left as usize == i
                        && mesh.faces[fi].left_edge as usize == e
                    {
                        1.0
                    } else {
                        -1.0
                    };
                    total -= face_flux[fi] * sign;
                }
                let q = total * (1.0 / new_area);
                sys.check_admissible(&q).map_err(|what| SolverError::Inadmissible {
                    cell: i,
                    time: t_new,
                    what,
                })?;
                Ok(q)
            })
            .collect();
        self.averages = result?;
        Ok(())
    }

    /// Advance one time step, no larger than `dt_cap`.
    pub fn step(&mut self, dt_cap: f64) -> Result<StepReport, SolverError> {
        let dt = self.compute_timestep()?.min(dt_cap);
        if !self.config.mode.is_eulerian() {
            self.ops_valid = false;
        }
        self.reconstruct()?;
        let max_iters = self.predict_all(dt)?;
        self.compute_new_nodes(dt);
        let fallbacks = self.face_sweep(dt)?;
        self.update_averages(dt)?;
        if !self.config.mode.is_eulerian() {
            let nodes = std::mem::take(&mut self.new_nodes);
            self.mesh
                .move_nodes(nodes, self.t + dt)
                .map_err(|(cell, area)| SolverError::ElementInversion {
                    cell,
                    time: self.t + dt,
                    area,
                })?;
        }
        self.t += dt;
        self.steps += 1;
        Ok(StepReport { dt, t: self.t, max_picard_iters: max_iters, osher_fallbacks: fallbacks })
    }

    /// March to `t_end`, clamping the last step onto it exactly.
    pub fn run_until(&mut self, t_end: f64) -> Result<RunReport, SolverError> {
        let mut max_iters = 0;
        let mut fallbacks = 0;
        while self.t < t_end - 1e-12 * t_end.abs().max(1.0) {
            let rep = self.step(t_end - self.t)?;
            max_iters = max_iters.max(rep.max_picard_iters);
            fallbacks += rep.osher_fallbacks;
        }
        Ok(RunReport { steps: self.steps, t: self.t, max_picard_iters: max_iters, osher_fallbacks: fallbacks })
    }

    /// Total conserved quantity per component, `sum_i |T_i| Q_i`.
    pub fn conserved_totals(&self) -> Vec<f64> {
        let mut totals = vec![0.0; S::State::LEN];
        for i in 0..self.mesh.n_cells() {
            let a = self.mesh.area(i);
            for (v, t) in totals.iter_mut().enumerate() {
                *t += a * self.averages[i].comp(v);
            }
        }
        totals
    }
}

/// Ghost state for a boundary face quadrature point with inward trace
/// `q_in` and outward unit normal `n`.
pub fn ghost_state<S: System>(
    sys: &S,
    boundary: &BoundaryTable<S>,
    kind: BoundaryKind,
    q_in: &S::State,
    n: Vec2,
) -> S::State {
    match kind {
        BoundaryKind::Wall => sys.mirror(q_in, n, Vec2::zeros()),
        BoundaryKind::Piston { velocity } => sys.mirror(q_in, n, velocity),
        BoundaryKind::Transmissive | BoundaryKind::Outflow | BoundaryKind::MovingExternal => {
            *q_in
        }
        BoundaryKind::Inflow(k) => boundary.inflow[k],
        BoundaryKind::PeriodicX | BoundaryKind::PeriodicY => {
            unreachable!("periodic faces are interior")
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunReport {
    pub steps: usize,
    pub t: f64,
    pub max_picard_iters: usize,
    pub osher_fallbacks: usize,
}

fn map_basis(e: BasisError) -> SolverError {
    SolverError::Inadmissible { cell: 0, time: 0.0, what: e.to_string() }
}

/// Project a pointwise initial condition onto cell averages with the
/// high-order rule of the tables.
pub fn project_ic<S: System>(
    mesh: &Mesh,
    tables: &SchemeTables,
    f: impl Fn(Point2) -> S::State + Sync,
) -> Vec<S::State> {
    (0..mesh.n_cells())
        .into_par_iter()
        .map(|i| {
            let v = mesh.vertices(i);
            let e1 = v[1] - v[0];
            let e2 = v[2] - v[0];
            let mut acc = S::State::zero();
            for (p, w) in tables.ic_rule.points.iter().zip(&tables.ic_rule.weights) {
                let x = v[0] + e1 * p.x + e2 * p.y;
                acc += f(x) * *w;
            }
            acc * 2.0
        })
        .collect()
}
