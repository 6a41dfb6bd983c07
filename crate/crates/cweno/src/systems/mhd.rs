//! Ideal classical MHD with hyperbolic GLM divergence cleaning, in Gaussian
//! units (magnetic pressure B^2 / 8 pi, induction terms scaled by 1 / 4 pi).

use nalgebra::SVector;

use super::System;
use crate::geom::Vec2;

pub type MhdState = SVector<f64, 9>;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// State layout: (rho, rho u, rho v, rho w, rho E, Bx, By, Bz, psi).
#[derive(Debug, Clone, Copy)]
pub struct Mhd {
    pub gamma: f64,
    /// GLM divergence cleaning speed, fixed per case.
    pub ch: f64,
}

impl Mhd {
    pub fn new(gamma: f64, ch: f64) -> Self {
        Self { gamma, ch }
    }

    #[inline]
    fn b2(q: &MhdState) -> f64 {
        q[5] * q[5] + q[6] * q[6] + q[7] * q[7]
    }

    #[inline]
    pub fn magnetic_pressure(&self, q: &MhdState) -> f64 {
        Self::b2(q) / (2.0 * FOUR_PI)
    }

    /// Fast magnetosonic speed in unit direction `n`.
    pub fn fast_speed(&self, q: &MhdState, n: Vec2) -> f64 {
        let rho = q[0];
        let a2 = self.gamma * self.pressure(q) / rho;
        let b2 = Self::b2(q) / (FOUR_PI * rho);
        let bn = (q[5] * n.x + q[6] * n.y) / (FOUR_PI * rho).sqrt();
        let s = a2 + b2;
        (0.5 * (s + (s * s - 4.0 * a2 * bn * bn).max(0.0).sqrt())).sqrt()
    }
}

impl System for Mhd {
    type State = MhdState;

    fn name(&self) -> &'static str {
        "mhd"
    }

    fn gamma(&self) -> f64 {
        self.gamma
    }

    fn flux(&self, q: &MhdState) -> [MhdState; 2] {
        let rho = q[0];
        let u = q[1] / rho;
        let v = q[2] / rho;
        let w = q[3] / rho;
        let (bx, by, bz, psi) = (q[5], q[6], q[7], q[8]);
        let p = self.pressure(q);
        let ptot = p + self.magnetic_pressure(q);
        let vb = u * bx + v * by + w * bz;
        let e_p = q[4] + ptot;
        let ch2 = self.ch * self.ch;
        let f = MhdState::from_column_slice(&[
            q[1],
            q[1] * u + ptot - bx * bx / FOUR_PI,
            q[1] * v - bx * by / FOUR_PI,
            q[1] * w - bx * bz / FOUR_PI,
            u * e_p - bx * vb / FOUR_PI,
            psi,
            u * by - bx * v,
            u * bz - bx * w,
            ch2 * bx,
        ]);
        let g = MhdState::from_column_slice(&[
            q[2],
            q[2] * u - by * bx / FOUR_PI,
            q[2] * v + ptot - by * by / FOUR_PI,
            q[2] * w - by * bz / FOUR_PI,
            v * e_p - by * vb / FOUR_PI,
            v * bx - by * u,
            psi,
            v * bz - by * w,
            ch2 * by,
        ]);
        [f, g]
    }

    #[inline]
    fn velocity(&self, q: &MhdState) -> Vec2 {
        Vec2::new(q[1] / q[0], q[2] / q[0])
    }

    #[inline]
    fn pressure(&self, q: &MhdState) -> f64 {
        let ke = 0.5 * (q[1] * q[1] + q[2] * q[2] + q[3] * q[3]) / q[0];
        (self.gamma - 1.0) * (q[4] - ke - Self::b2(q) / (2.0 * FOUR_PI))
    }

    fn max_signal_normal(&self, q: &MhdState, n: Vec2, mesh_vn: f64) -> f64 {
        let un = (q[1] * n.x + q[2] * n.y) / q[0];
        let fluid = (un - mesh_vn).abs() + self.fast_speed(q, n);
        fluid.max(self.ch + mesh_vn.abs())
    }

    fn max_signal(&self, q: &MhdState) -> f64 {
        let rho = q[0];
        let vmag = (q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt() / rho;
        let a2 = self.gamma * self.pressure(q) / rho;
        let b2 = Self::b2(q) / (FOUR_PI * rho);
        (vmag + (a2 + b2).sqrt()).max(self.ch)
    }

    fn check_admissible(&self, q: &MhdState) -> Result<(), String> {
        if !(q[0] > 0.0) || !q[0].is_finite() {
            return Err(format!("density {:.6e}", q[0]));
        }
        let p = self.pressure(q);
        if !(p > 0.0) || !p.is_finite() {
            return Err(format!("pressure {:.6e}", p));
        }
        Ok(())
    }

    fn prim_to_cons(&self, u: &MhdState) -> MhdState {
        let (rho, ux, uy, uz, p) = (u[0], u[1], u[2], u[3], u[4]);
        let (bx, by, bz, psi) = (u[5], u[6], u[7], u[8]);
        let b2 = bx * bx + by * by + bz * bz;
        MhdState::from_column_slice(&[
            rho,
            rho * ux,
            rho * uy,
            rho * uz,
            p / (self.gamma - 1.0)
                + 0.5 * rho * (ux * ux + uy * uy + uz * uz)
                + b2 / (2.0 * FOUR_PI),
            bx,
            by,
            bz,
            psi,
        ])
    }

    fn cons_to_prim(&self, q: &MhdState) -> Result<MhdState, String> {
        self.check_admissible(q)?;
        let rho = q[0];
        Ok(MhdState::from_column_slice(&[
            rho,
            q[1] / rho,
            q[2] / rho,
            q[3] / rho,
            self.pressure(q),
            q[5],
            q[6],
            q[7],
            q[8],
        ]))
    }

    fn mirror(&self, q: &MhdState, n: Vec2, wall_velocity: Vec2) -> MhdState {
        let rho = q[0];
        let v = Vec2::new(q[1] / rho, q[2] / rho);
        let vn_rel = (v - wall_velocity).dot(&n);
        let vg = v - n * (2.0 * vn_rel);
        let b = Vec2::new(q[5], q[6]);
        let bg = b - n * (2.0 * b.dot(&n));
        let mut out = *q;
        out[1] = rho * vg.x;
        out[2] = rho * vg.y;
        out[4] = q[4] + 0.5 * rho * (vg.norm_squared() - v.norm_squared());
        out[5] = bg.x;
        out[6] = bg.y;
        out
    }
}
