//! Planar geometry primitives: points, affine reference maps, triangle metrics.

use nalgebra::{Matrix2, Vector2};

use crate::error::MeshError;

pub type Point2 = Vector2<f64>;
pub type Vec2 = Vector2<f64>;

/// Linear map between a physical triangle and the unit reference triangle
/// with corners (0,0), (1,0), (0,1).
#[derive(Debug, Clone, Copy)]
pub struct AffineMap {
    pub origin: Point2,
    pub jacobian: Matrix2<f64>,
    pub inverse_jacobian: Matrix2<f64>,
    /// Jacobian determinant, equals twice the triangle area.
    pub det: f64,
}

impl AffineMap {
    pub fn from_vertices(v: &[Point2; 3]) -> Result<Self, MeshError> {
        let e1 = v[1] - v[0];
        let e2 = v[2] - v[0];
        let jacobian = Matrix2::from_columns(&[e1, e2]);
        let det = jacobian.determinant();
        if det.abs() < 1e-300 {
            return Err(MeshError::DegenerateCell);
        }
        let inverse_jacobian =
            Matrix2::new(jacobian[(1, 1)], -jacobian[(0, 1)], -jacobian[(1, 0)], jacobian[(0, 0)])
                / det;
        Ok(Self { origin: v[0], jacobian, inverse_jacobian, det })
    }

    #[inline]
    pub fn to_physical(&self, xi: Point2) -> Point2 {
        self.origin + self.jacobian * xi
    }

    #[inline]
    pub fn to_reference(&self, x: Point2) -> Point2 {
        self.inverse_jacobian * (x - self.origin)
    }

    #[inline]
    pub fn area(&self) -> f64 {
        0.5 * self.det
    }
}

#[inline]
pub fn signed_area(v: &[Point2; 3]) -> f64 {
    0.5 * ((v[1] - v[0]).perp(&(v[2] - v[0])))
}

#[inline]
pub fn barycenter(v: &[Point2; 3]) -> Point2 {
    (v[0] + v[1] + v[2]) / 3.0
}

/// Diameter of the inscribed circle, `2 * area / semiperimeter`.
pub fn incircle_diameter(v: &[Point2; 3]) -> f64 {
    let a = (v[1] - v[0]).norm();
    let b = (v[2] - v[1]).norm();
    let c = (v[0] - v[2]).norm();
    let s = 0.5 * (a + b + c);
    2.0 * signed_area(v).abs() / s
}

/// Diameter of the circumscribed circle, `abc / (2 * area)`.
pub fn circumcircle_diameter(v: &[Point2; 3]) -> f64 {
    let a = (v[1] - v[0]).norm();
    let b = (v[2] - v[1]).norm();
    let c = (v[0] - v[2]).norm();
    a * b * c / (2.0 * signed_area(v).abs())
}

/// Mirror a point across the line through `p` with unit direction `d`.
#[inline]
pub fn reflect_point(x: Point2, p: Point2, d: Vec2) -> Point2 {
    let r = x - p;
    let along = d * r.dot(&d);
    p + 2.0 * along - r
}

/// Householder reflection matrix across a line with unit direction `d`.
#[inline]
pub fn reflection_matrix(d: Vec2) -> Matrix2<f64> {
    Matrix2::new(
        d.x * d.x - d.y * d.y,
        2.0 * d.x * d.y,
        2.0 * d.x * d.y,
        d.y * d.y - d.x * d.x,
    )
}
