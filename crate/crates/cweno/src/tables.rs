//! Degree-dependent precomputed tables shared by all cells: bases, predictor
//! matrices, quadrature rules and the space-time trace values at face
//! quadrature points.

use crate::basis::{oscillation_matrix, OscillationMatrix, SpatialBasis};
use crate::error::BasisError;
use crate::predictor::{predictor_tables, PredictorTables};
use crate::quadrature::{gauss_legendre_01, triangle_quadrature, TriangleRule};
use crate::spacetime::{
    assemble_predictor_matrices, corner_time_integrals, PredictorMatrices, SpaceTimeBasis,
};

#[derive(Debug, Clone)]
pub struct SchemeTables {
    pub m: usize,
    pub basis: SpatialBasis,
    pub osc: OscillationMatrix,
    pub st: SpaceTimeBasis,
    pub mats: PredictorMatrices,
    pub ptables: PredictorTables,
    /// stencil row assembly (cell-average constraints), exactness M+1
    pub recon_rule: TriangleRule,
    /// initial-condition projection, exactness 2M+2
    pub ic_rule: TriangleRule,
    /// error quadrature, exactness 2M
    pub err_rule: TriangleRule,
    /// tau-integrated basis values at the spatial corners (nodal solver)
    pub tint: [Vec<f64>; 3],
    /// face quadrature along the edge (2 points through M = 3)
    pub chi_pts: Vec<f64>,
    pub chi_wts: Vec<f64>,
    /// face quadrature in time (M+1 points)
    pub tau_pts: Vec<f64>,
    pub tau_wts: Vec<f64>,
    /// theta values at face trace points, indexed by
    /// `((edge * 2 + orient) * n_chi + i_chi) * n_tau + i_tau`, each a block
    /// of `st.size` values; orient 1 reverses the edge parameter
    trace: Vec<f64>,
}

impl SchemeTables {
    pub fn new(m: usize) -> Result<Self, BasisError> {
        let basis = SpatialBasis::new(m)?;
        let osc = oscillation_matrix(&basis);
        let st = SpaceTimeBasis::new(m)?;
        let mats = assemble_predictor_matrices(&st)?;
        let ptables = predictor_tables(&basis, &st);
        let recon_rule = triangle_quadrature(m + 1)?;
        let ic_rule = triangle_quadrature(2 * m + 2)?;
        let err_rule = triangle_quadrature(2 * m)?;
        let tint = corner_time_integrals(&st)?;
        let (chi_pts, chi_wts) = gauss_legendre_01((m + 1).div_ceil(2).max(2));
        let (tau_pts, tau_wts) = gauss_legendre_01(m + 1);

        let corners = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let l = st.size;
        let (nc, nt) = (chi_pts.len(), tau_pts.len());
        let mut trace = vec![0.0; 3 * 2 * nc * nt * l];
        for edge in 0..3 {
            let (a, b) = (corners[edge], corners[(edge + 1) % 3]);
            for orient in 0..2 {
                for (i, &chi_raw) in chi_pts.iter().enumerate() {
                    let chi = if orient == 0 { chi_raw } else { 1.0 - chi_raw };
                    let xi = [
                        a[0] + (b[0] - a[0]) * chi,
                        a[1] + (b[1] - a[1]) * chi,
                    ];
                    for (j, &tau) in tau_pts.iter().enumerate() {
                        let base = (((edge * 2 + orient) * nc + i) * nt + j) * l;
                        st.eval_all(xi[0], xi[1], tau, &mut trace[base..base + l]);
                    }
                }
            }
        }
        Ok(Self {
            m,
            basis,
            osc,
            st,
            mats,
            ptables,
            recon_rule,
            ic_rule,
            err_rule,
            tint,
            chi_pts,
            chi_wts,
            tau_pts,
            tau_wts,
            trace,
        })
    }

    /// theta values along local `edge`, `orient` 0 along the owner's CCW
    /// direction and 1 reversed, at chi point `i_chi` and tau point `i_tau`.
    #[inline]
    pub fn trace_row(&self, edge: usize, orient: usize, i_chi: usize, i_tau: usize) -> &[f64] {
        let l = self.st.size;
        let base =
            (((edge * 2 + orient) * self.chi_pts.len() + i_chi) * self.tau_pts.len() + i_tau) * l;
        &self.trace[base..base + l]
    }
}
