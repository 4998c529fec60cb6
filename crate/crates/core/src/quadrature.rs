//! Fixed-grid quadrature rules.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
///
/// Nodes are found by Newton iteration on `P_n` starting from the
/// Tricomi asymptotic guess, and returned in ascending order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre rule mapped onto `[a, b]`.
pub fn gauss_legendre_interval(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    (
        x.iter().map(|&xi| mid + half * xi).collect(),
        w.iter().map(|&wi| half * wi).collect(),
    )
}

/// Uniform periodic trapezoid nodes on `[0, 2π)`; every node has weight `2π / n`.
pub fn periodic_trapezoid(n: usize) -> (Vec<f64>, f64) {
    let step = 2.0 * PI / n as f64;
    ((0..n).map(|j| j as f64 * step).collect(), step)
}

/// Integrate `f(theta, phi) sin(theta)` over the full sphere.
pub fn sphere_integral(n_theta: usize, n_phi: usize, f: impl Fn(f64, f64) -> f64) -> f64 {
    let (thetas, wt) = gauss_legendre_interval(n_theta, 0.0, PI);
    let (phis, wp) = periodic_trapezoid(n_phi);
    thetas
        .iter()
        .zip(&wt)
        .map(|(&t, &w)| w * t.sin() * phis.iter().map(|&p| f(t, p)).sum::<f64>() * wp)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 3, 8, 33, 128, 257] {
            let (_, w) = gauss_legendre(n);
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        for n in [2usize, 5, 16] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - exact).abs() < 1e-13, "n={n} deg={deg} got={got}");
            }
        }
    }

    #[test]
    fn nodes_ascending_and_symmetric() {
        let (x, _) = gauss_legendre(9);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
        for i in 0..9 {
            assert_relative_eq!(x[i], -x[8 - i], epsilon = 1e-15);
        }
    }

    #[test]
    fn sphere_area() {
        let area = sphere_integral(16, 16, |_, _| 1.0);
        assert_relative_eq!(area, 4.0 * PI, epsilon = 1e-12);
    }
}
