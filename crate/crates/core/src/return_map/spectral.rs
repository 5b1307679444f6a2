//! Eigenvalues and spectral radius of small dense matrices.

use nalgebra::{Complex, DMatrix, DVector};

const TOL: f64 = 1e-12;
const MAX_POWER_ITERATIONS: usize = 100_000;

/// Largest eigenvalue magnitude.
///
/// Up to 3x3 the characteristic polynomial is solved directly; larger
/// matrices use power iteration with a Rayleigh quotient and fall back to
/// the full characteristic polynomial when it does not settle (for example
/// a dominant complex pair).
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    assert!(m.is_square(), "spectral radius of a non-square matrix");
    if m.nrows() <= 3 {
        return max_modulus(&eigenvalues(m));
    }
    power_iteration(m).unwrap_or_else(|| max_modulus(&eigenvalues(m)))
}

fn max_modulus(values: &[Complex<f64>]) -> f64 {
    values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// All eigenvalues, roots of the characteristic polynomial.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    assert!(m.is_square(), "eigenvalues of a non-square matrix");
    match m.nrows() {
        0 => Vec::new(),
        1 => vec![Complex::new(m[(0, 0)], 0.0)],
        2 => {
            let tr = m.trace();
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            quadratic_roots(-tr, det).to_vec()
        }
        3 => {
            let tr = m.trace();
            let minors = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)] + m[(0, 0)] * m[(2, 2)] - m[(0, 2)] * m[(2, 0)]
                + m[(1, 1)] * m[(2, 2)]
                - m[(1, 2)] * m[(2, 1)];
            let det = m.determinant();
            cubic_roots(-tr, minors, -det)
        }
        _ => polynomial_roots(&characteristic_polynomial(m)),
    }
}

/// Roots of `x^2 + b x + c`.
fn quadratic_roots(b: f64, c: f64) -> [Complex<f64>; 2] {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        // q = -(b + sign(b) sqrt(disc)) / 2 avoids cancellation
        let sign = if b >= 0.0 { 1.0 } else { -1.0 };
        let q = -0.5 * (b + sign * sq);
        if q == 0.0 {
            return [Complex::new(0.0, 0.0); 2];
        }
        [Complex::new(q, 0.0), Complex::new(c / q, 0.0)]
    } else {
        let re = -0.5 * b;
        let im = 0.5 * (-disc).sqrt();
        [Complex::new(re, im), Complex::new(re, -im)]
    }
}

/// Roots of `x^3 + a x^2 + b x + c`: one real root by safeguarded Newton,
/// then the deflated quadratic.
fn cubic_roots(a: f64, b: f64, c: f64) -> Vec<Complex<f64>> {
    let p = |x: f64| ((x + a) * x + b) * x + c;
    let dp = |x: f64| (3.0 * x + 2.0 * a) * x + b;
    // Cauchy bound brackets every real root
    let bound = 1.0 + a.abs().max(b.abs()).max(c.abs());
    let (mut lo, mut hi) = (-bound, bound);
    let mut x = bound;
    for _ in 0..200 {
        let fx = p(x);
        if fx == 0.0 {
            break;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = dp(x);
        let newton = if d != 0.0 { x - fx / d } else { f64::NAN };
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 1e-15 * x.abs().max(1.0) {
            x = next;
            break;
        }
        x = next;
    }
    // x^3 + a x^2 + b x + c = (x - r)(x^2 + (a + r) x + (b + r (a + r)))
    let b1 = a + x;
    let c1 = b + x * b1;
    let mut roots = vec![Complex::new(x, 0.0)];
    roots.extend(quadratic_roots(b1, c1));
    roots
}

/// Coefficients `c[0..=n]` of `det(lambda I - m)`, constant term first,
/// by the Faddeev-LeVerrier recursion.
fn characteristic_polynomial(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let identity = DMatrix::<f64>::identity(n, n);
    let mut mk = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        mk = m * &mk + &identity * coeffs[n - k + 1];
        coeffs[n - k] = -(m * &mk).trace() / k as f64;
    }
    coeffs
}

/// Roots of a monic polynomial (constant term first) by Aberth iteration.
fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex<f64>> {
    let n = coeffs.len() - 1;
    let eval = |z: Complex<f64>| -> (Complex<f64>, Complex<f64>) {
        let mut p = Complex::new(0.0, 0.0);
        let mut dp = Complex::new(0.0, 0.0);
        for &c in coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    };
    let radius = 1.0 + coeffs[..n].iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
    let mut z: Vec<Complex<f64>> = (0..n)
        .map(|k| Complex::from_polar(0.5 * radius, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    for _ in 0..10_000 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, dp) = eval(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| Complex::new(1.0, 0.0) / (z[i] - z[j]))
                .sum();
            let step = ratio / (Complex::new(1.0, 0.0) - ratio * repulsion);
            z[i] -= step;
            moved = moved.max(step.norm() / z[i].norm().max(1.0));
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// Power iteration; `None` when the Rayleigh quotient does not settle on an
/// eigenvector.
fn power_iteration(m: &DMatrix<f64>) -> Option<f64> {
    let n = m.nrows();
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.1 * i as f64);
    v /= v.norm();
    let mut previous = f64::NAN;
    for _ in 0..MAX_POWER_ITERATIONS {
        let w = m * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return None;
        }
        let rayleigh = v.dot(&w);
        // a settled quotient only counts if v is close to an eigenvector
        let residual = (&w - &v * rayleigh).norm();
        v = w / norm;
        if (rayleigh - previous).abs() <= TOL * rayleigh.abs().max(1.0) && residual <= 1e-9 * norm {
            return Some(rayleigh.abs());
        }
        previous = rayleigh;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_swap() {
        assert_eq!(spectral_radius(&DMatrix::identity(2, 2)), 1.0);
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 0.5, 0.0]);
        assert!((spectral_radius(&m) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rotation_has_complex_pair() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -2.0, 2.0, 0.0]);
        let ev = eigenvalues(&m);
        assert!(ev.iter().all(|z| (z.norm() - 2.0).abs() < 1e-14 && z.re.abs() < 1e-14));
    }

    #[test]
    fn cubic_known_roots() {
        // (x - 1)(x - 2)(x + 3)
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 5.0, -2.0, 0.0, 2.0, 7.0, 0.0, 0.0, -3.0]);
        let mut re: Vec<f64> = eigenvalues(&m).iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        for (got, want) in re.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!((spectral_radius(&m) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn large_matrix_power_iteration() {
        let m = DMatrix::from_fn(5, 5, |i, j| if i == j { 2.0 } else { 0.1 * (i + j) as f64 });
        let ev = eigenvalues(&m);
        let via_poly = max_modulus(&ev);
        assert!((spectral_radius(&m) - via_poly).abs() < 1e-9);
    }

    #[test]
    fn large_complex_dominant_pair_falls_back() {
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 1)] = -3.0;
        m[(1, 0)] = 3.0;
        m[(2, 2)] = 1.0;
        m[(3, 3)] = 0.5;
        assert!((spectral_radius(&m) - 3.0).abs() < 1e-10);
    }
}
