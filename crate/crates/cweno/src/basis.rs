//! Orthonormal modal basis on the reference triangle and the precomputed
//! oscillation indicator matrix.

use nalgebra::DMatrix;

use crate::error::BasisError;
use crate::geom::Point2;
use crate::poly::{diff_2d, eval_2d, inner_2d, monomials_2d};
use crate::quadrature::triangle_quadrature;

pub const MAX_DEGREE: usize = 4;

/// Number of degrees of freedom of a total-degree-`m` polynomial in `d`
/// variables.
pub fn dof_count(m: usize, d: usize) -> usize {
    let mut num = 1usize;
    for l in 1..=d {
        num *= m + l;
    }
    let mut fact = 1usize;
    for l in 1..=d {
        fact *= l;
    }
    num / fact
}

/// Dubiner-type orthonormal basis of degree `m` on the unit triangle.
///
/// The basis is graded: the first function is constant (`sqrt(2)`), functions
/// 1..=2 complete the linear space, and so on. It is built by repeated
/// Gram-Schmidt over monomials with exact inner products, so cell averages of
/// every function except the first vanish identically.
#[derive(Debug, Clone)]
pub struct SpatialBasis {
    pub degree: usize,
    pub size: usize,
    exps: Vec<(u32, u32)>,
    /// `coeffs[l]` holds the monomial coefficients of psi_l.
    coeffs: Vec<Vec<f64>>,
    /// `int psi_l^2` over the reference triangle; unity by construction.
    pub mass_norms: Vec<f64>,
}

impl SpatialBasis {
    pub fn new(degree: usize) -> Result<Self, BasisError> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(BasisError::UnsupportedDegree(degree));
        }
        let exps = monomials_2d(degree);
        let size = exps.len();
        // Orthogonalization runs in value space against a quadrature rule that
        // is exact for products of two degree-MAX_DEGREE polynomials, keeping
        // the discrete Gram matrix diagonal to machine precision.
        let rule = triangle_quadrature(2 * MAX_DEGREE).expect("fixed-degree rule");
        let npts = rule.points.len();
        let mono_vals: Vec<Vec<f64>> = exps
            .iter()
            .map(|&(a, b)| {
                rule.points
                    .iter()
                    .map(|p| p.x.powi(a as i32) * p.y.powi(b as i32))
                    .collect()
            })
            .collect();
        let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(size);
        let mut values: Vec<Vec<f64>> = Vec::with_capacity(size);
        for l in 0..size {
            let mut row = vec![0.0; size];
            row[l] = 1.0;
            let mut val = mono_vals[l].clone();
            // two Gram-Schmidt passes keep orthogonality at machine precision
            for _pass in 0..2 {
                for (prev_row, prev_val) in coeffs.iter().zip(&values) {
                    let proj: f64 =
                        (0..npts).map(|q| rule.weights[q] * val[q] * prev_val[q]).sum();
                    for (r, p) in row.iter_mut().zip(prev_row) {
                        *r -= proj * p;
                    }
                    for (v, p) in val.iter_mut().zip(prev_val) {
                        *v -= proj * p;
                    }
                }
            }
            let norm: f64 =
                (0..npts).map(|q| rule.weights[q] * val[q] * val[q]).sum::<f64>().sqrt();
            row.iter_mut().for_each(|r| *r /= norm);
            val.iter_mut().for_each(|v| *v /= norm);
            coeffs.push(row);
            values.push(val);
        }
        // fix signs so the leading (newest) monomial coefficient is positive
        for (l, row) in coeffs.iter_mut().enumerate() {
            if row[l] < 0.0 {
                row.iter_mut().for_each(|c| *c = -*c);
            }
        }
        let mass_norms = vec![1.0; size];
        Ok(Self { degree, size, exps, coeffs, mass_norms })
    }

    #[inline]
    pub fn eval(&self, l: usize, xi: Point2) -> f64 {
        eval_2d(&self.exps, &self.coeffs[l], xi.x, xi.y)
    }

    /// Values of all basis functions at `xi`.
    pub fn eval_all(&self, xi: Point2, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.size);
        for (o, row) in out.iter_mut().zip(&self.coeffs) {
            *o = eval_2d(&self.exps, row, xi.x, xi.y);
        }
    }

    /// Gradients (d/dxi, d/deta) of all basis functions at `xi`.
    pub fn grad_all(&self, xi: Point2, out: &mut [[f64; 2]]) {
        for (o, row) in out.iter_mut().zip(&self.coeffs) {
            let dx = diff_2d(&self.exps, row, 1, 0);
            let dy = diff_2d(&self.exps, row, 0, 1);
            o[0] = eval_2d(&self.exps, &dx, xi.x, xi.y);
            o[1] = eval_2d(&self.exps, &dy, xi.x, xi.y);
        }
    }

    /// Average of psi_l over the reference triangle. Nonzero only for l = 0.
    #[inline]
    pub fn reference_average(&self, l: usize) -> f64 {
        if l == 0 {
            2.0f64.sqrt()
        } else {
            0.0
        }
    }

    pub fn monomial_coeffs(&self, l: usize) -> &[f64] {
        &self.coeffs[l]
    }

    pub fn exponents(&self) -> &[(u32, u32)] {
        &self.exps
    }
}

/// Oscillation indicator matrix: the Gram matrix of all partial derivatives
/// of orders 1..=M of the basis functions on the reference triangle.
#[derive(Debug, Clone)]
pub struct OscillationMatrix {
    pub sigma: DMatrix<f64>,
}

pub fn oscillation_matrix(basis: &SpatialBasis) -> OscillationMatrix {
    let n = basis.size;
    let m = basis.degree as u32;
    let mut sigma = DMatrix::<f64>::zeros(n, n);
    let exps = basis.exponents();
    for a in 0..=m {
        for b in 0..=m - a {
            if a + b == 0 {
                continue;
            }
            let derivs: Vec<Vec<f64>> =
                (0..n).map(|l| diff_2d(exps, basis.monomial_coeffs(l), a, b)).collect();
            for l in 0..n {
                for k in l..n {
                    let v = inner_2d(exps, &derivs[l], &derivs[k]);
                    sigma[(l, k)] += v;
                    if k != l {
                        sigma[(k, l)] += v;
                    }
                }
            }
        }
    }
    OscillationMatrix { sigma }
}

impl OscillationMatrix {
    /// sigma = p' Sigma p for a coefficient vector accessed through `coeff`.
    #[inline]
    pub fn indicator(&self, coeff: impl Fn(usize) -> f64) -> f64 {
        let n = self.sigma.nrows();
        let mut acc = 0.0;
        for l in 0..n {
            let cl = coeff(l);
            if cl == 0.0 {
                continue;
            }
            for k in 0..n {
                acc += cl * coeff(k) * self.sigma[(l, k)];
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dof_counts() {
        assert_eq!(dof_count(2, 2), 6);
        assert_eq!(dof_count(4, 2), 15);
        assert_eq!(dof_count(3, 2), 10);
        assert_eq!(dof_count(2, 3), 10);
        assert_eq!(dof_count(3, 3), 20);
        assert_eq!(dof_count(4, 3), 35);
    }

    #[test]
    fn rejects_unsupported_degree() {
        assert!(SpatialBasis::new(0).is_err());
        assert!(SpatialBasis::new(5).is_err());
    }

    #[test]
    fn gram_matrix_diagonal_by_quadrature() {
        // independent oracle: degree-8 quadrature for the M=4 basis
        let basis = SpatialBasis::new(4).unwrap();
        let rule = triangle_quadrature(8).unwrap();
        let n = basis.size;
        let mut vals = vec![0.0; n];
        let mut gram = DMatrix::<f64>::zeros(n, n);
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            basis.eval_all(*p, &mut vals);
            for l in 0..n {
                for k in 0..n {
                    gram[(l, k)] += w * vals[l] * vals[k];
                }
            }
        }
        for l in 0..n {
            for k in 0..n {
                let expect = if l == k { 1.0 } else { 0.0 };
                assert!(
                    (gram[(l, k)] - expect).abs() < 1e-12,
                    "gram[{l},{k}] = {}",
                    gram[(l, k)]
                );
            }
        }
    }

    #[test]
    fn first_function_is_constant_sqrt2() {
        let basis = SpatialBasis::new(3).unwrap();
        for &(x, y) in &[(0.1, 0.3), (0.5, 0.2), (0.0, 0.0)] {
            assert!((basis.eval(0, Point2::new(x, y)) - 2.0f64.sqrt()).abs() < 1e-14);
        }
        assert!((basis.reference_average(0) - 2.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(basis.reference_average(3), 0.0);
    }

    #[test]
    fn basis_reproduces_polynomials() {
        // project a degree-3 polynomial and evaluate it back
        let basis = SpatialBasis::new(3).unwrap();
        let f = |x: f64, y: f64| 1.0 - 2.0 * x + 3.0 * y + x * x * y - 0.5 * y * y * y;
        let rule = triangle_quadrature(8).unwrap();
        let mut coeffs = vec![0.0; basis.size];
        let mut vals = vec![0.0; basis.size];
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            basis.eval_all(*p, &mut vals);
            for (c, v) in coeffs.iter_mut().zip(&vals) {
                *c += w * v * f(p.x, p.y);
            }
        }
        for &(x, y) in &[(0.11, 0.07), (0.4, 0.55), (0.9, 0.05)] {
            basis.eval_all(Point2::new(x, y), &mut vals);
            let approx: f64 = coeffs.iter().zip(&vals).map(|(c, v)| c * v).sum();
            assert!((approx - f(x, y)).abs() < 1e-12);
        }
    }

    #[test]
    fn oscillation_matrix_invariants() {
        let basis = SpatialBasis::new(3).unwrap();
        let osc = oscillation_matrix(&basis);
        let n = basis.size;
        // first row and column vanish (constant basis function)
        for l in 0..n {
            assert!(osc.sigma[(0, l)].abs() < 1e-15);
            assert!(osc.sigma[(l, 0)].abs() < 1e-15);
        }
        // symmetry
        for l in 0..n {
            for k in 0..n {
                assert!((osc.sigma[(l, k)] - osc.sigma[(k, l)]).abs() < 1e-14);
            }
        }
        // positive semidefinite: random quadratic forms are nonnegative
        let mut state = 123456789u64;
        let mut rnd = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        };
        for _ in 0..50 {
            let p: Vec<f64> = (0..n).map(|_| rnd()).collect();
            assert!(osc.indicator(|l| p[l]) >= -1e-12);
        }
    }

    #[test]
    fn indicator_of_linear_polynomial_matches_quadrature() {
        // oracle: direct quadrature of squared gradients of p = psi_1 + 2 psi_2
        let basis = SpatialBasis::new(2).unwrap();
        let osc = oscillation_matrix(&basis);
        let coeff = |l: usize| match l {
            1 => 1.0,
            2 => 2.0,
            _ => 0.0,
        };
        let sigma = osc.indicator(coeff);
        assert!(sigma > 0.0);
        let rule = triangle_quadrature(6).unwrap();
        let mut grads = vec![[0.0; 2]; basis.size];
        let mut oracle = 0.0;
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            basis.grad_all(*p, &mut grads);
            let gx = grads[1][0] + 2.0 * grads[2][0];
            let gy = grads[1][1] + 2.0 * grads[2][1];
            oracle += w * (gx * gx + gy * gy);
        }
        assert!((sigma - oracle).abs() < 1e-12, "{sigma} vs {oracle}");
    }

    #[test]
    fn indicator_zero_iff_constant() {
        let basis = SpatialBasis::new(3).unwrap();
        let osc = oscillation_matrix(&basis);
        assert_eq!(osc.indicator(|l| if l == 0 { 7.3 } else { 0.0 }), 0.0);
        let v = osc.indicator(|l| if l == 4 { 1e-3 } else { 0.0 });
        assert!(v > 0.0);
    }
}
