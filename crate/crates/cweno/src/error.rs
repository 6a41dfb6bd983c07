//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("cell {0} references node index {1} out of range")]
    NodeIndexOutOfRange(usize, usize),
    #[error("duplicate cell: {0} and {1} share the same vertex set")]
    DuplicateCell(usize, usize),
    #[error("non-manifold edge ({0}, {1}) shared by more than two cells")]
    NonManifoldEdge(usize, usize),
    #[error("cell {0} has zero area")]
    ZeroAreaCell(usize),
    #[error("degenerate cell (singular jacobian)")]
    DegenerateCell,
    #[error("boundary edge ({0}, {1}) has no tag")]
    UntaggedBoundaryEdge(usize, usize),
    #[error("periodic edge ({0}, {1}) has no geometric partner")]
    UnmatchedPeriodicEdge(usize, usize),
    #[error("periodic partner edges differ in length: {0} vs {1}")]
    PeriodicLengthMismatch(f64, f64),
    #[error("mesh file parse error at line {0}: {1}")]
    Parse(usize, String),
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum BasisError {
    #[error("unsupported polynomial degree {0} (supported range 1..=4)")]
    UnsupportedDegree(usize),
    #[error("unsupported quadrature exactness degree {0}")]
    UnsupportedQuadrature(usize),
}

#[derive(Debug, Error)]
pub enum ReconError {
    #[error("stencil exhausted for cell {cell}: found {found} of {needed} cells")]
    StencilExhausted { cell: usize, found: usize, needed: usize },
    #[error("rank-deficient least-squares system for cell {0}")]
    RankDeficient(usize),
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("predictor failed to converge in cell {cell}: residual {residual:.3e} after {iters} iterations")]
    PredictorDiverged { cell: usize, residual: f64, iters: usize },
    #[error("inadmissible state in cell {cell} at t = {time:.6e}: {what}")]
    Inadmissible { cell: usize, time: f64, what: String },
    #[error("element {cell} inverted at t = {time:.6e} (area {area:.3e})")]
    ElementInversion { cell: usize, time: f64, area: f64 },
    #[error("non-positive signal speed; time step undefined")]
    ZeroSignalSpeed,
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Recon(#[from] ReconError),
}
