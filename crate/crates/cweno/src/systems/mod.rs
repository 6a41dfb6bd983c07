//! Conserved-variable systems solved by the scheme.
//!
//! Solver code is generic over [`System`]; the state vector is a statically
//! sized nalgebra vector so per-cell hot loops stay allocation free.

mod euler;
mod mhd;

pub use euler::Euler;
pub use mhd::Mhd;

use nalgebra::SVector;

use crate::geom::Vec2;

/// Fixed-size state vector used by the generic solver kernels.
pub trait StateVec:
    Copy
    + Send
    + Sync
    + 'static
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Neg<Output = Self>
    + std::ops::Mul<f64, Output = Self>
    + std::ops::AddAssign
    + std::ops::SubAssign
{
    const LEN: usize;
    fn zero() -> Self;
    fn comp(&self, i: usize) -> f64;
    fn comp_mut(&mut self, i: usize) -> &mut f64;
    fn from_comp(f: impl FnMut(usize) -> f64) -> Self;

    fn abs_max(&self) -> f64 {
        (0..Self::LEN).map(|i| self.comp(i).abs()).fold(0.0, f64::max)
    }

    fn norm2(&self) -> f64 {
        (0..Self::LEN).map(|i| self.comp(i) * self.comp(i)).sum::<f64>().sqrt()
    }
}

impl<const N: usize> StateVec for SVector<f64, N> {
    const LEN: usize = N;

    #[inline]
    fn zero() -> Self {
        SVector::zeros()
    }

    #[inline]
    fn comp(&self, i: usize) -> f64 {
        self[i]
    }

    #[inline]
    fn comp_mut(&mut self, i: usize) -> &mut f64 {
        &mut self[i]
    }

    #[inline]
    fn from_comp(mut f: impl FnMut(usize) -> f64) -> Self {
        SVector::from_fn(|i, _| f(i))
    }
}

/// A hyperbolic system of conservation laws in two space dimensions.
pub trait System: Copy + Send + Sync + 'static {
    type State: StateVec;

    fn name(&self) -> &'static str;
    fn gamma(&self) -> f64;

    /// Physical flux columns (f, g).
    fn flux(&self, q: &Self::State) -> [Self::State; 2];

    fn velocity(&self, q: &Self::State) -> Vec2;
    fn pressure(&self, q: &Self::State) -> f64;

    /// Largest |lambda - vn_mesh| over the spectrum of the flux Jacobian in
    /// unit direction `n`, with the mesh normal velocity subtracted.
    fn max_signal_normal(&self, q: &Self::State, n: Vec2, mesh_vn: f64) -> f64;

    /// Direction-free bound on the signal speed, used for the time step.
    fn max_signal(&self, q: &Self::State) -> f64;

    fn check_admissible(&self, q: &Self::State) -> Result<(), String>;

    fn prim_to_cons(&self, u: &Self::State) -> Self::State;
    fn cons_to_prim(&self, q: &Self::State) -> Result<Self::State, String>;

    /// Ghost state for a slip wall moving with `wall_velocity`: the normal
    /// component of the relative velocity is reversed, tangential and
    /// thermodynamic variables are kept.
    fn mirror(&self, q: &Self::State, n: Vec2, wall_velocity: Vec2) -> Self::State;

    /// Whether an analytic eigendecomposition backs the Osher-type flux.
    fn supports_osher(&self) -> bool {
        false
    }

    /// `|A_n - vn I| dq` where `A_n` is the flux Jacobian in direction `n`;
    /// `None` when no analytic eigendecomposition is available.
    fn abs_jacobian_apply(
        &self,
        q: &Self::State,
        dq: &Self::State,
        n: Vec2,
        mesh_vn: f64,
    ) -> Option<Self::State> {
        let _ = (q, dq, n, mesh_vn);
        None
    }
}

/// Scalar linear advection, used by unit tests as the simplest hyperbolic
/// system with a known exact solution.
#[cfg(test)]
#[derive(Debug, Clone, Copy)]
pub struct LinearAdvection {
    pub a: Vec2,
}

#[cfg(test)]
impl System for LinearAdvection {
    type State = SVector<f64, 1>;

    fn name(&self) -> &'static str {
        "linear-advection"
    }

    fn gamma(&self) -> f64 {
        1.0
    }

    fn flux(&self, q: &Self::State) -> [Self::State; 2] {
        [*q * self.a.x, *q * self.a.y]
    }

    fn velocity(&self, _q: &Self::State) -> Vec2 {
        self.a
    }

    fn pressure(&self, _q: &Self::State) -> f64 {
        0.0
    }

    fn max_signal_normal(&self, _q: &Self::State, n: Vec2, mesh_vn: f64) -> f64 {
        (self.a.dot(&n) - mesh_vn).abs()
    }

    fn max_signal(&self, _q: &Self::State) -> f64 {
        self.a.norm()
    }

    fn check_admissible(&self, _q: &Self::State) -> Result<(), String> {
        Ok(())
    }

    fn prim_to_cons(&self, u: &Self::State) -> Self::State {
        *u
    }

    fn cons_to_prim(&self, q: &Self::State) -> Result<Self::State, String> {
        Ok(*q)
    }

    fn mirror(&self, q: &Self::State, _n: Vec2, _wall_velocity: Vec2) -> Self::State {
        *q
    }

    fn abs_jacobian_apply(
        &self,
        _q: &Self::State,
        dq: &Self::State,
        n: Vec2,
        mesh_vn: f64,
    ) -> Option<Self::State> {
        Some(*dq * (self.a.dot(&n) - mesh_vn).abs())
    }
}
