//! Fixed quadrature rules used throughout the crate.

use std::f64::consts::PI;

/// Nodes and weights of a Gauss–Legendre rule on `[-1, 1]`, nodes ascending.
///
/// Nodes are found by Newton iteration on the three-term recurrence, which
/// keeps the rule accurate to rounding for several thousand nodes.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    let half = m.div_ceil(2);
    for i in 0..half {
        // Tricomi initial guess for the (i+1)-th largest root
        let k = i as f64 + 1.0;
        let theta = PI * (k - 0.25) / (mf + 0.5);
        let mut x = (1.0 - (mf - 1.0) / (8.0 * mf * mf * mf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                let (_, d) = legendre_and_derivative(m, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[m - 1 - i] = x;
        weights[m - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_and_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=m {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let mf = m as f64;
    let d = mf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(m: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(m);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    (x.iter().map(|t| c + h * t).collect(), w.iter().map(|v| v * h).collect())
}

/// Gauss–Chebyshev rule of the first kind on `[a, b]`: approximates
/// `∫_a^b f(s) / sqrt((s-a)(b-s)) ds` by `(π/m) Σ f(s_i)`.
/// Returns the nodes; every weight equals `π/m`.
pub fn chebyshev_t_nodes(m: usize, a: f64, b: f64) -> Vec<f64> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    (1..=m)
        .map(|i| c + h * ((2 * i - 1) as f64 * PI / (2 * m) as f64).cos())
        .collect()
}

/// Gauss–Chebyshev rule of the second kind on `[a, b]` for
/// `∫_a^b sqrt((x-a)(b-x)) f(x) dx`; returns `(nodes, weights)` with the
/// square-root factor folded into the weights.
pub fn chebyshev_u_rule(m: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let scale = h * h * PI / (m + 1) as f64;
    (1..=m)
        .map(|i| {
            let th = i as f64 * PI / (m + 1) as f64;
            (c + h * th.cos(), scale * th.sin() * th.sin())
        })
        .unzip()
}

/// Double-exponential (tanh-sinh) quadrature of `f` over `[a, b]`.
///
/// Tolerates integrable endpoint singularities (logarithms, inverse square
/// roots); nodes never coincide with the endpoints. Step halving stops when
/// two successive levels agree to `tol` (relative to the running value).
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let half = 0.5 * (b - a);
    let t_max = 3.5;
    let eval = |t: f64| -> f64 {
        let s = 0.5 * PI * t.sinh();
        let ch = 0.5 * PI * t.cosh();
        // complement 1 - tanh(|s|) computed without cancellation
        let e = (-2.0 * s.abs()).exp();
        let comp = 2.0 * e / (1.0 + e);
        let cosh_s = s.cosh();
        let w = ch / (cosh_s * cosh_s);
        if comp == 0.0 || w == 0.0 {
            return 0.0;
        }
        let x = if s >= 0.0 { b - half * comp } else { a + half * comp };
        if x <= a || x >= b {
            return 0.0;
        }
        w * half * f(x)
    };
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while (k as f64) * h <= t_max {
        let t = k as f64 * h;
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut estimate = sum * h;
    for _level in 0..10 {
        h *= 0.5;
        let mut k = 1;
        let mut add = 0.0;
        while (k as f64) * h <= t_max {
            let t = k as f64 * h;
            add += eval(t) + eval(-t);
            k += 2;
        }
        sum += add;
        let next = sum * h;
        if (next - estimate).abs() <= tol * next.abs().max(1e-300) {
            return next;
        }
        estimate = next;
    }
    estimate
}
