//! Dense polynomial arithmetic over graded monomial tables in two and three
//! variables. Bases store their functions as coefficient rows against these
//! tables, which makes exact differentiation and inner products on the
//! reference triangle cheap.

use crate::quadrature::triangle_monomial_integral;

/// Graded monomial exponents in (xi, eta) up to total degree `m`.
/// Within a degree block the first exponent decreases.
pub fn monomials_2d(m: usize) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for deg in 0..=m as u32 {
        for a in (0..=deg).rev() {
            out.push((a, deg - a));
        }
    }
    out
}

/// Graded monomial exponents in (xi, eta, tau) up to total degree `m`.
pub fn monomials_3d(m: usize) -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    for deg in 0..=m as u32 {
        for a in (0..=deg).rev() {
            for b in (0..=deg - a).rev() {
                out.push((a, b, deg - a - b));
            }
        }
    }
    out
}

/// Index of the exponent pair (a, b) in `monomials_2d`.
#[inline]
pub fn index_2d(a: u32, b: u32) -> usize {
    let deg = a + b;
    (deg * (deg + 1) / 2 + (deg - a)) as usize
}

pub fn eval_2d(exps: &[(u32, u32)], coeffs: &[f64], x: f64, y: f64) -> f64 {
    let mut acc = 0.0;
    for (&(a, b), &c) in exps.iter().zip(coeffs) {
        if c != 0.0 {
            acc += c * x.powi(a as i32) * y.powi(b as i32);
        }
    }
    acc
}

pub fn eval_3d(exps: &[(u32, u32, u32)], coeffs: &[f64], x: f64, y: f64, t: f64) -> f64 {
    let mut acc = 0.0;
    for (&(a, b, c), &q) in exps.iter().zip(coeffs) {
        if q != 0.0 {
            acc += q * x.powi(a as i32) * y.powi(b as i32) * t.powi(c as i32);
        }
    }
    acc
}

/// Coefficients of d^(dx+dy) p / dxi^dx deta^dy against the same table.
pub fn diff_2d(exps: &[(u32, u32)], coeffs: &[f64], dx: u32, dy: u32) -> Vec<f64> {
    let mut out = vec![0.0; coeffs.len()];
    for (&(a, b), &c) in exps.iter().zip(coeffs) {
        if c == 0.0 || a < dx || b < dy {
            continue;
        }
        let mut factor = c;
        for k in 0..dx {
            factor *= (a - k) as f64;
        }
        for k in 0..dy {
            factor *= (b - k) as f64;
        }
        out[index_2d(a - dx, b - dy)] += factor;
    }
    out
}

/// Coefficients of the first partial derivative along axis 0, 1 or 2.
pub fn diff_3d(exps: &[(u32, u32, u32)], coeffs: &[f64], axis: usize) -> Vec<f64> {
    let mut out = vec![0.0; coeffs.len()];
    for (i, (&e, &c)) in exps.iter().zip(coeffs).enumerate() {
        let _ = i;
        if c == 0.0 {
            continue;
        }
        let (a, b, t) = e;
        let (ne, factor) = match axis {
            0 if a > 0 => ((a - 1, b, t), a as f64),
            1 if b > 0 => ((a, b - 1, t), b as f64),
            2 if t > 0 => ((a, b, t - 1), t as f64),
            _ => continue,
        };
        let idx = exps.iter().position(|&x| x == ne).expect("derivative exponent in table");
        out[idx] += c * factor;
    }
    out
}

/// Exact L2 inner product of two polynomial coefficient rows on the unit
/// triangle.
pub fn inner_2d(exps: &[(u32, u32)], p: &[f64], q: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&(a1, b1), &c1) in exps.iter().zip(p) {
        if c1 == 0.0 {
            continue;
        }
        for (&(a2, b2), &c2) in exps.iter().zip(q) {
            if c2 != 0.0 {
                acc += c1 * c2 * triangle_monomial_integral(a1 + a2, b1 + b2);
            }
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_tables_are_graded() {
        let m2 = monomials_2d(3);
        assert_eq!(m2.len(), 10);
        assert_eq!(m2[0], (0, 0));
        for (i, &(a, b)) in m2.iter().enumerate() {
            assert_eq!(index_2d(a, b), i);
        }
        let m3 = monomials_3d(2);
        assert_eq!(m3.len(), 10);
        assert_eq!(m3[0], (0, 0, 0));
    }

    #[test]
    fn differentiation_matches_finite_differences() {
        let exps = monomials_2d(4);
        let mut coeffs = vec![0.0; exps.len()];
        // p = 3 xi^2 eta - xi eta^2 + 0.5 xi^4
        coeffs[index_2d(2, 1)] = 3.0;
        coeffs[index_2d(1, 2)] = -1.0;
        coeffs[index_2d(4, 0)] = 0.5;
        let dx = diff_2d(&exps, &coeffs, 1, 0);
        let (x, y) = (0.37, 0.21);
        let h = 1e-6;
        let fd = (eval_2d(&exps, &coeffs, x + h, y) - eval_2d(&exps, &coeffs, x - h, y)) / (2.0 * h);
        assert!((eval_2d(&exps, &dx, x, y) - fd).abs() < 1e-8);
        let dxy = diff_2d(&exps, &coeffs, 1, 1);
        assert!((eval_2d(&exps, &dxy, x, y) - (6.0 * x - 2.0 * y)).abs() < 1e-12);
    }

    #[test]
    fn inner_product_is_exact() {
        let exps = monomials_2d(2);
        let mut p = vec![0.0; exps.len()];
        let mut q = vec![0.0; exps.len()];
        p[index_2d(1, 0)] = 1.0; // xi
        q[index_2d(0, 1)] = 1.0; // eta
        // int xi*eta over T_E = 1/24
        assert!((inner_2d(&exps, &p, &q) - 1.0 / 24.0).abs() < 1e-16);
    }
}
