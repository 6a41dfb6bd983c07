//! Nodal space-time basis on the reference prism and the matrices of the
//! local Galerkin predictor.

use nalgebra::DMatrix;

use crate::basis::{dof_count, MAX_DEGREE};
use crate::error::BasisError;
use crate::poly::{diff_3d, eval_3d, monomials_3d};
use crate::quadrature::{prism_quadrature, segment_quadrature};

/// Lagrange basis for total-degree-M polynomials in (xi, eta, tau) through
/// the uniform lattice of the simplex `{xi, eta, tau >= 0, xi+eta+tau <= 1}`.
///
/// Nodes are ordered by increasing tau plane, so the first `tau0_count`
/// nodes carry the full degree-M spatial lattice at tau = 0.
#[derive(Debug, Clone)]
pub struct SpaceTimeBasis {
    pub degree: usize,
    pub size: usize,
    pub tau0_count: usize,
    pub nodes: Vec<[f64; 3]>,
    exps: Vec<(u32, u32, u32)>,
    /// coeffs[l] = monomial coefficients of theta_l
    coeffs: Vec<Vec<f64>>,
}

impl SpaceTimeBasis {
    pub fn new(degree: usize) -> Result<Self, BasisError> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(BasisError::UnsupportedDegree(degree));
        }
        let m = degree as u32;
        let mut nodes = Vec::new();
        for k in 0..=m {
            for j in 0..=(m - k) {
                for i in 0..=(m - k - j) {
                    nodes.push([i as f64 / m as f64, j as f64 / m as f64, k as f64 / m as f64]);
                }
            }
        }
        let size = dof_count(degree, 3);
        debug_assert_eq!(nodes.len(), size);
        let exps = monomials_3d(degree);
        let mut vander = DMatrix::<f64>::zeros(size, size);
        for (r, n) in nodes.iter().enumerate() {
            for (c, &(a, b, t)) in exps.iter().enumerate() {
                vander[(r, c)] = n[0].powi(a as i32) * n[1].powi(b as i32) * n[2].powi(t as i32);
            }
        }
        let inv = vander
            .lu()
            .try_inverse()
            .expect("simplex lattice nodes are unisolvent");
        let coeffs = (0..size).map(|l| inv.column(l).iter().copied().collect()).collect();
        Ok(Self {
            degree,
            size,
            tau0_count: dof_count(degree, 2),
            nodes,
            exps,
            coeffs,
        })
    }

    #[inline]
    pub fn eval(&self, l: usize, xi: f64, eta: f64, tau: f64) -> f64 {
        eval_3d(&self.exps, &self.coeffs[l], xi, eta, tau)
    }

    pub fn eval_all(&self, xi: f64, eta: f64, tau: f64, out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.coeffs) {
            *o = eval_3d(&self.exps, c, xi, eta, tau);
        }
    }

    pub fn deriv(&self, l: usize, axis: usize) -> Vec<f64> {
        diff_3d(&self.exps, &self.coeffs[l], axis)
    }

    pub fn exponents(&self) -> &[(u32, u32, u32)] {
        &self.exps
    }
}

/// Time-stiffness and mass matrices of the weak predictor system, with the
/// blocks of the tau > 0 solve prefactored.
#[derive(Debug, Clone)]
pub struct PredictorMatrices {
    pub k_tau: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    /// inverse of K_tau restricted to tau > 0 test functions and unknowns
    pub k1_inv: DMatrix<f64>,
    /// K_tau block: tau > 0 test rows, tau = 0 columns
    pub k0: DMatrix<f64>,
    /// mass block: tau > 0 test rows, all columns
    pub m1: DMatrix<f64>,
    /// nodal derivative matrices: d theta_l / d xi (eta) at node k
    pub d_xi: DMatrix<f64>,
    pub d_eta: DMatrix<f64>,
    /// premultiplied m1 * d_xi and m1 * d_eta for the fixed-mesh fast path
    pub md_xi: DMatrix<f64>,
    pub md_eta: DMatrix<f64>,
}

pub fn assemble_predictor_matrices(st: &SpaceTimeBasis) -> Result<PredictorMatrices, BasisError> {
    let l = st.size;
    let n0 = st.tau0_count;
    let n1 = l - n0;
    let rule = prism_quadrature(2 * st.degree)?;

    let mut vals = vec![0.0; l];
    let mut k_tau = DMatrix::<f64>::zeros(l, l);
    let mut mass = DMatrix::<f64>::zeros(l, l);
    let dtau: Vec<Vec<f64>> = (0..l).map(|j| st.deriv(j, 2)).collect();
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        st.eval_all(p[0], p[1], p[2], &mut vals);
        for k in 0..l {
            let tk = vals[k];
            if tk == 0.0 {
                continue;
            }
            for j in 0..l {
                mass[(k, j)] += w * tk * vals[j];
                k_tau[(k, j)] += w * tk * eval_3d(st.exponents(), &dtau[j], p[0], p[1], p[2]);
            }
        }
    }

    let k1 = k_tau.view((n0, n0), (n1, n1)).into_owned();
    let k1_inv = k1
        .lu()
        .try_inverse()
        .expect("tau > 0 predictor block is invertible for the simplex lattice");
    let k0 = k_tau.view((n0, 0), (n1, n0)).into_owned();
    let m1 = mass.view((n0, 0), (n1, l)).into_owned();

    let mut d_xi = DMatrix::<f64>::zeros(l, l);
    let mut d_eta = DMatrix::<f64>::zeros(l, l);
    for j in 0..l {
        let dx = st.deriv(j, 0);
        let dy = st.deriv(j, 1);
        for (k, n) in st.nodes.iter().enumerate() {
            d_xi[(k, j)] = eval_3d(st.exponents(), &dx, n[0], n[1], n[2]);
            d_eta[(k, j)] = eval_3d(st.exponents(), &dy, n[0], n[1], n[2]);
        }
    }
    let md_xi = &m1 * &d_xi;
    let md_eta = &m1 * &d_eta;

    Ok(PredictorMatrices { k_tau, mass, k1_inv, k0, m1, d_xi, d_eta, md_xi, md_eta })
}

/// `tint[c][l] = int_0^1 theta_l(corner_c, tau) dtau` for the three spatial
/// corners; the time-averaged nodal extrapolation used by the nodal solver.
pub fn corner_time_integrals(st: &SpaceTimeBasis) -> Result<[Vec<f64>; 3], BasisError> {
    let rule = segment_quadrature(st.degree)?;
    let corners = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let mut out = [vec![0.0; st.size], vec![0.0; st.size], vec![0.0; st.size]];
    for (c, corner) in corners.iter().enumerate() {
        for (tau, w) in rule.points.iter().zip(&rule.weights) {
            for l in 0..st.size {
                out[c][l] += w * st.eval(l, corner[0], corner[1], *tau);
            }
        }
    }
    Ok(out)
}
