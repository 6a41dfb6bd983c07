//! Central WENO reconstruction on unstructured triangular meshes inside
//! fully-discrete one-step ADER finite volume schemes, on fixed and moving
//! (ALE) grids, for the compressible Euler and ideal MHD equations.
//!
//! The crate is organized bottom-up: reference-element machinery
//! ([`basis`], [`spacetime`], [`quadrature`]), meshes ([`mesh`]), the
//! reconstruction operator ([`recon`]), the local space-time predictor
//! ([`predictor`]), mesh motion ([`ale`]) and the finite volume update
//! ([`solver`]). Benchmark definitions and measurement utilities live in
//! [`cases`] and [`harness`]; 1D reference solvers in [`riemann`] and
//! [`radial`].

pub mod ale;
pub mod basis;
pub mod mesh;
pub mod error;
pub mod geom;
pub mod poly;
pub mod predictor;
pub mod quadrature;
pub mod recon;
pub mod solver;
pub mod spacetime;
pub mod systems;
pub mod tables;

pub use error::{BasisError, MeshError, ReconError, SolverError};
pub use geom::{Point2, Vec2};
