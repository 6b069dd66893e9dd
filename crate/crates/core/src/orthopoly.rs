//! Orthonormal polynomials for the polynomial weight `w = Π(x − ỹ_k)²` on
//! `[−1, 1]`, the Christoffel–Darboux kernel and the correlation functions
//! it generates.
//!
//! The weight is only ever handled through `log w − c`, where `c` is the
//! maximum of `log w` over the quadrature nodes. The orthonormal functions
//! `ψ_j = p_j √w` do not depend on `c`.

use std::io::Write;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localwindow::WeightSpec;
use crate::quadrature::gauss_legendre;

/// Largest Gauss–Legendre rule this module will build.
pub const MAX_NODES: usize = 20_000;
/// Extra nodes beyond what exactness strictly needs.
pub const NODE_MARGIN: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

impl Quadrature {
    pub fn gauss_legendre(m: usize) -> Result<Self> {
        if m == 0 || m > MAX_NODES {
            return Err(Error::InvalidConfig(format!("node count {m} outside 1..={MAX_NODES}")));
        }
        let (nodes, weights) = gauss_legendre(m);
        Ok(Self {
            nodes,
            weights,
            exact_degree: 2 * m - 1,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }
}

/// Rule exact for every product `x p_i p_j w` with `i, j ≤ n + 1`, i.e. of
/// degree `2M + 2n + 3`, plus [`NODE_MARGIN`] nodes.
pub fn build_quadrature(weight: &WeightSpec, n: usize) -> Result<Quadrature> {
    let m = (weight.degree() + 2 * n + 2) / 2 + 1 + NODE_MARGIN;
    if m > MAX_NODES {
        return Err(Error::InvalidConfig(format!(
            "order n={n} with weight degree {} needs {m} nodes (cap {MAX_NODES})",
            weight.degree()
        )));
    }
    Quadrature::gauss_legendre(m)
}

/// Three-term recurrence `x p_j = b_{j+1} p_{j+1} + α_j p_j + b_j p_{j−1}`
/// of the orthonormal polynomials, together with the discrete measure it
/// was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recurrence {
    /// `α_0 … α_n`.
    pub alpha: Vec<f64>,
    /// `beta[j] = b_j` for `j = 1..=n+1`; `beta[0]` holds `√μ₀`, the square
    /// root of the normalized weight's mass.
    pub beta: Vec<f64>,
    pub max_degree: usize,
    /// `c` in `w = e^c ŵ`.
    pub log_norm: f64,
    pub quad: Quadrature,
    /// `ŵ` at the quadrature nodes.
    pub node_weight: Vec<f64>,
}

impl Recurrence {
    /// `b_j`, with `b_0 = 0`.
    pub fn b(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            self.beta[j]
        }
    }

    /// Rows `j, α_j, β_j` for `j = 0..=max_degree`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "j,alpha,beta")?;
        for j in 0..=self.max_degree {
            writeln!(w, "{j},{},{}", self.alpha[j], self.beta[j])?;
        }
        Ok(())
    }
}

/// Discretized Stieltjes procedure in orthonormal (Lanczos) form on the
/// measure `λ_i = GL weight × ŵ(x_i)`.
pub fn stieltjes_recurrence(weight: &WeightSpec, quad: &Quadrature, n: usize) -> Result<Recurrence> {
    if quad.exact_degree < weight.degree() + 2 * n + 3 {
        return Err(Error::InvalidConfig(format!(
            "quadrature exact to degree {} but {} is needed",
            quad.exact_degree,
            weight.degree() + 2 * n + 3
        )));
    }
    let logw: Vec<f64> = quad.nodes.iter().map(|&x| weight.log_weight(x)).collect();
    let c = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !c.is_finite() {
        return Err(Error::Numerical("weight vanishes on every node".into()));
    }
    let node_weight: Vec<f64> = logw.iter().map(|l| (l - c).exp()).collect();
    let lam: Vec<f64> = quad.weights.iter().zip(&node_weight).map(|(g, w)| g * w).collect();
    let x = &quad.nodes;
    let m = x.len();

    let mu0: f64 = lam.iter().sum();
    let mut alpha = Vec::with_capacity(n + 1);
    let mut beta = vec![mu0.sqrt()];
    let mut prev = vec![0.0; m];
    let mut cur = vec![1.0 / mu0.sqrt(); m];
    for j in 0..=n {
        let a: f64 = (0..m).map(|i| lam[i] * x[i] * cur[i] * cur[i]).sum();
        let bj = if j == 0 { 0.0 } else { beta[j] };
        let mut next: Vec<f64> = (0..m).map(|i| (x[i] - a) * cur[i] - bj * prev[i]).collect();
        // one pass of reorthogonalization against the last two vectors
        let c1: f64 = (0..m).map(|i| lam[i] * next[i] * cur[i]).sum();
        let c0: f64 = (0..m).map(|i| lam[i] * next[i] * prev[i]).sum();
        for i in 0..m {
            next[i] -= c1 * cur[i] + c0 * prev[i];
        }
        let norm2: f64 = (0..m).map(|i| lam[i] * next[i] * next[i]).sum();
        let b = norm2.sqrt();
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::Numerical(format!(
                "recurrence coefficient b_{} lost positivity",
                j + 1
            )));
        }
        alpha.push(a + c1);
        beta.push(b);
        for v in next.iter_mut() {
            *v /= b;
        }
        prev = cur;
        cur = next;
    }
    Ok(Recurrence {
        alpha,
        beta,
        max_degree: n,
        log_norm: c,
        quad: quad.clone(),
        node_weight,
    })
}

/// Builds the quadrature and the recurrence in one step.
pub fn orthonormal_basis(weight: &WeightSpec, n: usize) -> Result<Recurrence> {
    let q = build_quadrature(weight, n)?;
    stieltjes_recurrence(weight, &q, n)
}

/// Values of `p̂_0..p̂_{k}` (orthonormal for `ŵ`) times `scale`, computed
/// with running rescaling so neither factor overflows. Returns the values
/// already multiplied back; entries that underflow become 0.
fn scaled_polys(rec: &Recurrence, x: f64, k: usize, log_scale: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    let mut acc = log_scale - 0.5 * rec.beta[0].powi(2).ln();
    let mut prev = 0.0;
    let mut cur = 1.0;
    out.push(cur * acc.exp());
    for j in 0..k {
        let next = ((x - rec.alpha[j]) * cur - rec.b(j) * prev) / rec.beta[j + 1];
        prev = cur;
        cur = next;
        let mag = cur.abs().max(prev.abs());
        if mag > 1e150 || (mag < 1e-150 && mag > 0.0) {
            prev /= mag;
            cur /= mag;
            acc += mag.ln();
        }
        out.push(cur * acc.exp());
    }
    out
}

/// `(ψ_j, ψ_j′)` for `j = 0..=k`.
fn psi_and_derivative(rec: &Recurrence, weight: &WeightSpec, x: f64, k: usize) -> (Vec<f64>, Vec<f64>) {
    let half_log = 0.5 * (weight.log_weight(x) - rec.log_norm);
    let s = half_log - 0.5 * rec.beta[0].powi(2).ln();
    // p and p′ share one scale; (√w)′/√w = −(n/2)U′
    let dlog = -0.5 * weight.n as f64 * weight.potential_derivative(x);
    let mut p = vec![1.0];
    let mut dp = vec![0.0];
    let mut acc = s;
    let mut out_p = vec![acc.exp()];
    let mut out_d = vec![dlog * acc.exp()];
    for j in 0..k {
        let bj = rec.b(j);
        let pm = if j == 0 { 0.0 } else { p[j - 1] };
        let dpm = if j == 0 { 0.0 } else { dp[j - 1] };
        let np = ((x - rec.alpha[j]) * p[j] - bj * pm) / rec.beta[j + 1];
        let ndp = ((x - rec.alpha[j]) * dp[j] + p[j] - bj * dpm) / rec.beta[j + 1];
        p.push(np);
        dp.push(ndp);
        let mag = np.abs().max(ndp.abs()).max(p[j].abs());
        if mag > 1e150 {
            for v in p.iter_mut().chain(dp.iter_mut()) {
                *v /= mag;
            }
            acc += mag.ln();
        }
        let e = acc.exp();
        out_p.push(p[j + 1] * e);
        out_d.push((dp[j + 1] + dlog * p[j + 1]) * e);
    }
    // earlier entries were stored at their own scale already
    (out_p, out_d)
}

/// `ψ_0(x) … ψ_k(x)`.
pub fn psi_all(rec: &Recurrence, weight: &WeightSpec, x: f64, k: usize) -> Result<Vec<f64>> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} outside [-1, 1]")));
    }
    if k > rec.max_degree + 1 {
        return Err(Error::Domain(format!("degree {k} exceeds the recurrence")));
    }
    let lw = weight.log_weight(x);
    if lw == f64::NEG_INFINITY {
        return Ok(vec![0.0; k + 1]);
    }
    Ok(scaled_polys(rec, x, k, 0.5 * (lw - rec.log_norm)))
}

/// `ψ_j(x) = p_j(x)√w(x)`.
pub fn eval_psi(rec: &Recurrence, weight: &WeightSpec, j: usize, x: f64) -> Result<f64> {
    Ok(psi_all(rec, weight, x, j)?[j])
}

/// `ψ_j′(x)`, for interior points off the roots.
pub fn eval_psi_derivative(rec: &Recurrence, weight: &WeightSpec, j: usize, x: f64) -> Result<f64> {
    if !(x.abs() < 1.0) || weight.roots.contains(&x) {
        return Err(Error::Domain(format!("x = {x} is not an interior regular point")));
    }
    Ok(psi_and_derivative(rec, weight, x, j).1[j])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelEval {
    pub n: usize,
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

/// Distance below which the kernel is summed directly.
pub const CD_CROSSOVER: f64 = 1e-6;

/// `K_n(x, y) = Σ_{j<n} ψ_j(x)ψ_j(y)`, in Christoffel–Darboux form
/// `b_n(ψ_n(x)ψ_{n−1}(y) − ψ_n(y)ψ_{n−1}(x))/(x − y)` away from the diagonal.
pub fn cd_kernel(rec: &Recurrence, weight: &WeightSpec, n: usize, x: f64, y: f64) -> Result<KernelEval> {
    check_order(rec, n)?;
    let px = psi_all(rec, weight, x, n)?;
    let py = psi_all(rec, weight, y, n)?;
    let value = if (x - y).abs() < CD_CROSSOVER {
        direct_sum(&px, &py, n)
    } else {
        rec.beta[n] * (px[n] * py[n - 1] - py[n] * px[n - 1]) / (x - y)
    };
    Ok(KernelEval { n, x, y, value })
}

/// Direct summation, regardless of the distance between the points.
pub fn kernel_direct(rec: &Recurrence, weight: &WeightSpec, n: usize, x: f64, y: f64) -> Result<f64> {
    check_order(rec, n)?;
    let px = psi_all(rec, weight, x, n - 1)?;
    let py = psi_all(rec, weight, y, n - 1)?;
    Ok(direct_sum(&px, &py, n))
}

fn direct_sum(px: &[f64], py: &[f64], n: usize) -> f64 {
    px[..n].iter().zip(&py[..n]).map(|(a, b)| a * b).sum()
}

fn check_order(rec: &Recurrence, n: usize) -> Result<()> {
    if n == 0 || n > rec.max_degree {
        return Err(Error::Domain(format!(
            "kernel order {n} outside 1..={}",
            rec.max_degree
        )));
    }
    Ok(())
}

/// `ρ_n(x) = K_n(x, x)/n`.
pub fn density(rec: &Recurrence, weight: &WeightSpec, n: usize, x: f64) -> Result<f64> {
    Ok(kernel_direct(rec, weight, n, x, x)? / n as f64)
}

/// `ρ_n⁻(x) = n⁻¹ Σ_{j≤n−2} ψ_j²(x)`: the order-`n−1` density keeping the
/// prefactor `1/n`.
pub fn density_minus(rec: &Recurrence, weight: &WeightSpec, n: usize, x: f64) -> Result<f64> {
    check_order(rec, n)?;
    let p = psi_all(rec, weight, x, n)?;
    Ok(p[..n - 1].iter().map(|v| v * v).sum::<f64>() / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub value: f64,
    /// Set when two points coincide (the determinant then vanishes).
    pub repeated_points: bool,
}

/// `p^{(ℓ)} = ((n−ℓ)!/n!) det[K_n(λ_j, λ_k)]` for `ℓ ≤ min(4, n)`.
pub fn correlation(rec: &Recurrence, weight: &WeightSpec, n: usize, points: &[f64]) -> Result<Correlation> {
    check_order(rec, n)?;
    let l = points.len();
    if l == 0 || l > 4 || l > n {
        return Err(Error::Domain(format!("correlation order {l} outside 1..={}", n.min(4))));
    }
    let psis: Vec<Vec<f64>> = points
        .iter()
        .map(|&x| psi_all(rec, weight, x, n))
        .collect::<Result<_>>()?;
    let mut repeated = false;
    let k = Mat::<f64>::from_fn(l, l, |i, j| {
        if i != j && points[i] == points[j] {
            repeated = true;
        }
        if (points[i] - points[j]).abs() < CD_CROSSOVER {
            direct_sum(&psis[i], &psis[j], n)
        } else {
            rec.beta[n] * (psis[i][n] * psis[j][n - 1] - psis[j][n] * psis[i][n - 1]) / (points[i] - points[j])
        }
    });
    let det = k.determinant();
    let prefactor: f64 = (0..l).map(|i| 1.0 / (n - i) as f64).product();
    Ok(Correlation {
        value: prefactor * det,
        repeated_points: repeated,
    })
}

/// Values of `√ŵ p̂_j` at the quadrature nodes: row `i` holds node `i`.
fn node_psis(rec: &Recurrence, k: usize) -> Vec<Vec<f64>> {
    rec.quad
        .nodes
        .iter()
        .zip(&rec.node_weight)
        .map(|(&x, &w)| scaled_polys(rec, x, k, 0.5 * w.ln()))
        .collect()
}

/// `ρ_n′(x)` from `∫ [V′(z) − V′(x)] K_n²(x, z) dz` with `V = U`. The
/// integrand is a polynomial, so the stored rule evaluates it exactly.
pub fn density_derivative(rec: &Recurrence, weight: &WeightSpec, n: usize, x: f64) -> Result<f64> {
    check_order(rec, n)?;
    if 1.0 - x.abs() < 1e-8 {
        return Err(Error::Domain(format!("x = {x} too close to the boundary")));
    }
    let px = psi_all(rec, weight, x, n - 1)?;
    let vx = weight.potential_derivative(x);
    let nodes = node_psis(rec, n - 1);
    let mut s = 0.0;
    for (i, &z) in rec.quad.nodes.iter().enumerate() {
        let kxz: f64 = (0..n).map(|j| px[j] * nodes[i][j]).sum();
        s += rec.quad.weights[i] * (weight.potential_derivative(z) - vx) * kxz * kxz;
    }
    Ok(s)
}

/// Central difference of [`density`], step `h`.
pub fn density_derivative_fd(rec: &Recurrence, weight: &WeightSpec, n: usize, x: f64, h: f64) -> Result<f64> {
    Ok((density(rec, weight, n, x + h)? - density(rec, weight, n, x - h)?) / (2.0 * h))
}

/// Nodes, weights and the ψ values at every node.
type NodeTable = (Vec<f64>, Vec<f64>, Vec<Vec<f64>>);

/// Rule and `ψ_0..ψ_{n−1}` values for integrands `ρ_n(x)/(x − z)`. The
/// resolvent is resolved to about 1e-9 relative from the Bernstein ellipse
/// through `z`, on top of the polynomial degree of `ρ_n`.
fn resolvent_rule(rec: &Recurrence, weight: &WeightSpec, n: usize, z: Complex64) -> Result<NodeTable> {
    if z.im == 0.0 {
        return Err(Error::Domain("Im z must be nonzero".into()));
    }
    let s = (z * z - 1.0).sqrt();
    let rho = (z + s).norm().max((z - s).norm());
    let m = (weight.degree() + 2 * n) / 2 + (20.0 / rho.ln()).ceil() as usize + NODE_MARGIN;
    if m <= rec.quad.len() {
        return Ok((rec.quad.nodes.clone(), rec.quad.weights.clone(), node_psis(rec, n - 1)));
    }
    let q = Quadrature::gauss_legendre(m)?;
    let psis = q
        .nodes
        .iter()
        .map(|&x| psi_all(rec, weight, x, n - 1))
        .collect::<Result<_>>()?;
    Ok((q.nodes, q.weights, psis))
}

/// `m_n(z)²` plus `∫V′ρ_n/(x − z)`.
fn identity_lhs(
    weight: &WeightSpec,
    n: usize,
    z: Complex64,
    nodes: &[f64],
    wts: &[f64],
    psis: &[Vec<f64>],
) -> Complex64 {
    let mut m = Complex64::new(0.0, 0.0);
    let mut vterm = Complex64::new(0.0, 0.0);
    for i in 0..nodes.len() {
        let rho = psis[i][..n].iter().map(|v| v * v).sum::<f64>() / n as f64;
        let r = 1.0 / (nodes[i] - z);
        m += wts[i] * rho * r;
        vterm += wts[i] * weight.potential_derivative(nodes[i]) * rho * r;
    }
    m * m + vterm
}

/// Both sides of the Stieltjes identity at `z`:
/// `m_n² + ∫V′ρ_n/(x − z)` and `−(1/2n²)∫∫K_n²(x,y)(1/(x−z) − 1/(y−z))²`.
pub fn stieltjes_identity_terms(
    rec: &Recurrence,
    weight: &WeightSpec,
    n: usize,
    z: Complex64,
) -> Result<(Complex64, Complex64)> {
    check_order(rec, n)?;
    let (nodes, wts, psis) = resolvent_rule(rec, weight, n, z)?;
    let lhs = identity_lhs(weight, n, z, &nodes, &wts, &psis);
    let r: Vec<Complex64> = nodes.iter().map(|&x| 1.0 / (x - z)).collect();
    let mut dbl = Complex64::new(0.0, 0.0);
    for i in 0..nodes.len() {
        for j in 0..i {
            let k = direct_sum(&psis[i], &psis[j], n);
            let d = r[i] - r[j];
            dbl += 2.0 * wts[i] * wts[j] * k * k * d * d;
        }
    }
    let nf = n as f64;
    Ok((lhs, -dbl / (2.0 * nf * nf)))
}

/// `|m_n(z)² + ∫V′(x)ρ_n(x)/(x − z) dx|`.
pub fn stieltjes_identity_residual(rec: &Recurrence, weight: &WeightSpec, n: usize, z: Complex64) -> Result<f64> {
    check_order(rec, n)?;
    let (nodes, wts, psis) = resolvent_rule(rec, weight, n, z)?;
    Ok(identity_lhs(weight, n, z, &nodes, &wts, &psis).norm())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityScaling {
    /// `(n, η, residual)` over the full grid.
    pub points: Vec<(usize, f64, f64)>,
    pub n_exponent: f64,
    pub eta_exponent: f64,
}

/// Residual of the Stieltjes identity at `z = iη` for the equispaced profile
/// on every `(n, η)` of the grid, with the power-law exponents in `n` and
/// `η`. On a full grid the two regressors are uncorrelated, so each exponent
/// is the pooled one-variable slope.
pub fn identity_scaling(ns: &[usize], etas: &[f64], rho0: f64, b: f64, cap: usize) -> Result<IdentityScaling> {
    let mut points = Vec::with_capacity(ns.len() * etas.len());
    for &n in ns {
        let w = crate::localwindow::equispaced_profile(n, rho0, b, cap)?;
        let rec = orthonormal_basis(&w, n)?;
        for &eta in etas {
            let r = stieltjes_identity_residual(&rec, &w, n, Complex64::new(0.0, eta))?;
            points.push((n, eta, r));
        }
    }
    let ly: Vec<f64> = points.iter().map(|p| p.2.ln()).collect();
    let ln: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let le: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let fit = |x: &[f64]| {
        crate::stats::line_fit(x, &ly)
            .map(|f| f.slope)
            .ok_or_else(|| Error::Numerical("degenerate scaling grid".into()))
    };
    Ok(IdentityScaling {
        n_exponent: fit(&ln)?,
        eta_exponent: fit(&le)?,
        points,
    })
}

/// `∫ψ_{n−1}²(Σ_k |x − ỹ_k|⁻¹/n)² dx` and `∫(ψ_{n−1}′)² dx`, both exact on
/// the stored rule.
pub fn derivative_norm_checks(rec: &Recurrence, weight: &WeightSpec, n: usize) -> Result<(f64, f64)> {
    check_order(rec, n)?;
    let nf = n as f64;
    let q = &rec.quad;
    let (mut op73, mut op51) = (0.0, 0.0);
    for (i, &x) in q.nodes.iter().enumerate() {
        let (p, d) = psi_and_derivative(rec, weight, x, n - 1);
        let s: f64 = weight.roots.iter().map(|y| 1.0 / (x - y).abs()).sum::<f64>() / nf;
        op73 += q.weights[i] * p[n - 1] * p[n - 1] * s * s;
        op51 += q.weights[i] * d[n - 1] * d[n - 1];
    }
    Ok((op73, op51))
}

/// `∫K_n(x, x) dx` on the stored rule.
pub fn kernel_trace(rec: &Recurrence, n: usize) -> Result<f64> {
    check_order(rec, n)?;
    let psis = node_psis(rec, n - 1);
    Ok(rec
        .quad
        .weights
        .iter()
        .zip(&psis)
        .map(|(w, p)| w * p[..n].iter().map(|v| v * v).sum::<f64>())
        .sum())
}

/// Largest `|∫K_n(x,ζ)K_n(ζ,y)dζ − K_n(x,y)|` over pairs from `grid`.
pub fn reproducing_residual(rec: &Recurrence, weight: &WeightSpec, n: usize, grid: &[f64]) -> Result<f64> {
    check_order(rec, n)?;
    let nodes = node_psis(rec, n - 1);
    let at: Vec<Vec<f64>> = grid
        .iter()
        .map(|&x| psi_all(rec, weight, x, n - 1))
        .collect::<Result<_>>()?;
    // K_n(x_a, ζ_i) for every grid point and node
    let kz: Vec<Vec<f64>> = at
        .iter()
        .map(|p| nodes.iter().map(|q| direct_sum(p, q, n)).collect())
        .collect();
    let mut worst: f64 = 0.0;
    for a in 0..grid.len() {
        for b in 0..=a {
            let lhs: f64 = (0..rec.quad.len())
                .map(|i| rec.quad.weights[i] * kz[a][i] * kz[b][i])
                .sum();
            worst = worst.max((lhs - direct_sum(&at[a], &at[b], n)).abs());
        }
    }
    Ok(worst)
}

/// Largest `|∫p_i p_j w − δ_ij|` over `i, j ≤ k` on the stored rule.
pub fn gram_residual(rec: &Recurrence, k: usize) -> f64 {
    let psis = node_psis(rec, k);
    let mut worst: f64 = 0.0;
    for a in 0..=k {
        for b in 0..=a {
            let g: f64 = (0..rec.quad.len())
                .map(|i| rec.quad.weights[i] * psis[i][a] * psis[i][b])
                .sum();
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((g - target).abs());
        }
    }
    worst
}

/// Largest change in `α_j`, `b_j` when the node count is doubled.
pub fn doubled_node_check(weight: &WeightSpec, n: usize) -> Result<f64> {
    let q1 = build_quadrature(weight, n)?;
    let q2 = Quadrature::gauss_legendre(2 * q1.len())?;
    let r1 = stieltjes_recurrence(weight, &q1, n)?;
    let r2 = stieltjes_recurrence(weight, &q2, n)?;
    let da = r1.alpha.iter().zip(&r2.alpha).map(|(a, b)| (a - b).abs());
    let db = r1.beta[1..].iter().zip(&r2.beta[1..]).map(|(a, b)| (a - b).abs());
    Ok(da.chain(db).fold(0.0, f64::max))
}
