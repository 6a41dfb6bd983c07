//! Gaussian quadrature rules on the unit segment, the unit triangle and the
//! space-time prism `T_E x [0,1]`.
//!
//! Segment rules are Gauss-Legendre. Triangle rules are conical products of a
//! Gauss-Legendre rule with a Gauss-Jacobi(1,0) rule through the Duffy map, so
//! exactness is certified per tensor factor. Nodes and weights come from the
//! Golub-Welsch eigenvalue problem.

use nalgebra::DMatrix;

use crate::error::BasisError;
use crate::geom::Point2;

const MAX_EXACTNESS: usize = 24;

#[derive(Debug, Clone)]
pub struct SegmentRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub exactness_degree: usize,
}

#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<Point2>,
    pub weights: Vec<f64>,
    pub exactness_degree: usize,
}

#[derive(Debug, Clone)]
pub struct PrismRule {
    /// (xi, eta, tau) coordinates in `T_E x [0,1]`.
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub exactness_degree: usize,
}

/// Nodes/weights of an n-point rule from the symmetric tridiagonal Jacobi
/// matrix with diagonal `alpha`, squared off-diagonal `beta[1..]` and total
/// weight `beta[0]`.
fn golub_welsch(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = alpha.len();
    let mut j = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        j[(i, i)] = alpha[i];
        if i + 1 < n {
            let b = beta[i + 1].sqrt();
            j[(i, i + 1)] = b;
            j[(i + 1, i)] = b;
        }
    }
    let eig = j.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], beta[0] * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// n-point Gauss-Legendre rule on [0,1].
pub fn gauss_legendre_01(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let alpha = vec![0.0; n];
    let mut beta = vec![0.0; n];
    beta[0] = 2.0;
    for k in 1..n {
        let kf = k as f64;
        beta[k] = kf * kf / (4.0 * kf * kf - 1.0);
    }
    let (x, w) = golub_welsch(&alpha, &beta);
    (
        x.iter().map(|&t| 0.5 * (t + 1.0)).collect(),
        w.iter().map(|&t| 0.5 * t).collect(),
    )
}

/// n-point Gauss-Jacobi rule for the weight (1-x) on [0,1].
fn gauss_jacobi10_01(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    // Jacobi weight (1-x)^1 (1+x)^0 on [-1,1].
    let mut alpha = vec![0.0; n];
    let mut beta = vec![0.0; n];
    beta[0] = 2.0;
    for k in 0..n {
        let kf = k as f64;
        alpha[k] = -1.0 / ((2.0 * kf + 1.0) * (2.0 * kf + 3.0));
        if k >= 1 {
            beta[k] = kf * (kf + 1.0) / ((2.0 * kf + 1.0) * (2.0 * kf + 1.0));
        }
    }
    let (x, w) = golub_welsch(&alpha, &beta);
    (
        x.iter().map(|&t| 0.5 * (t + 1.0)).collect(),
        w.iter().map(|&t| 0.25 * t).collect(),
    )
}

pub fn segment_quadrature(degree: usize) -> Result<SegmentRule, BasisError> {
    if degree > MAX_EXACTNESS {
        return Err(BasisError::UnsupportedQuadrature(degree));
    }
    let n = degree / 2 + 1;
    let (points, weights) = gauss_legendre_01(n);
    Ok(SegmentRule { points, weights, exactness_degree: 2 * n - 1 })
}

pub fn triangle_quadrature(degree: usize) -> Result<TriangleRule, BasisError> {
    if degree > MAX_EXACTNESS {
        return Err(BasisError::UnsupportedQuadrature(degree));
    }
    let n = degree / 2 + 1;
    let (xu, wu) = gauss_legendre_01(n);
    let (xv, wv) = gauss_jacobi10_01(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (v, wv) in xv.iter().zip(&wv) {
        for (u, wu) in xu.iter().zip(&wu) {
            points.push(Point2::new(u * (1.0 - v), *v));
            weights.push(wu * wv);
        }
    }
    Ok(TriangleRule { points, weights, exactness_degree: 2 * n - 1 })
}

pub fn prism_quadrature(degree: usize) -> Result<PrismRule, BasisError> {
    let tri = triangle_quadrature(degree)?;
    let seg = segment_quadrature(degree)?;
    let mut points = Vec::with_capacity(tri.points.len() * seg.points.len());
    let mut weights = Vec::with_capacity(points.capacity());
    for (tau, wt) in seg.points.iter().zip(&seg.weights) {
        for (p, wp) in tri.points.iter().zip(&tri.weights) {
            points.push([p.x, p.y, *tau]);
            weights.push(wp * wt);
        }
    }
    Ok(PrismRule {
        points,
        weights,
        exactness_degree: tri.exactness_degree.min(seg.exactness_degree),
    })
}

/// Exact value of the monomial integral over the unit triangle,
/// `int xi^a eta^b = a! b! / (a+b+2)!`.
pub fn triangle_monomial_integral(a: u32, b: u32) -> f64 {
    // b! / ((a+1)(a+2)...(a+b)) / ((a+b+1)(a+b+2))
    let mut val = 1.0;
    for k in 1..=b {
        val *= k as f64 / (a + k) as f64;
    }
    val / ((a + b + 1) as f64 * (a + b + 2) as f64)
}
