//! Splitting a spectrum into a window of `n` internal points and the
//! external points that generate its potential.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_on;
use crate::spectral::Spectrum;

/// Default cap on retained external points per side.
pub const DEFAULT_ROOT_CAP: usize = 1000;

/// Internal points `λ_{L+1..L+n}` and the externals on either side.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowDecomposition {
    pub l: usize,
    pub n: usize,
    pub internal: Vec<f64>,
    /// `y_{−L}, …, y_{−1}` in ascending order.
    pub external_left: Vec<f64>,
    /// `y_1, …, y_{N−L−n}` in ascending order.
    pub external_right: Vec<f64>,
}

impl WindowDecomposition {
    /// `(y_{−1}, y_1)`.
    pub fn window(&self) -> (f64, f64) {
        (
            *self.external_left.last().expect("window has a left neighbour"),
            self.external_right[0],
        )
    }

    pub fn total(&self) -> usize {
        self.external_left.len() + self.n + self.external_right.len()
    }

    /// External point `y_k` for `k = ±1, ±2, …`.
    pub fn y(&self, k: i64) -> Option<f64> {
        if k < 0 {
            let i = (-k) as usize;
            self.external_left.len().checked_sub(i).map(|j| self.external_left[j])
        } else if k > 0 {
            self.external_right.get(k as usize - 1).copied()
        } else {
            None
        }
    }
}

/// Window of `n` consecutive eigenvalues after the first `l`.
pub fn extract_window(spectrum: &Spectrum, l: usize, n: usize) -> Result<WindowDecomposition> {
    let total = spectrum.len();
    if n == 0 || n.is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!("window size must be odd, got {n}")));
    }
    if l < 1 {
        return Err(Error::Domain("window needs a left external point (L >= 1)".into()));
    }
    if l + n + 1 > total {
        return Err(Error::Domain(format!(
            "window L={l}, n={n} needs a right external point but N={total}"
        )));
    }
    let v = spectrum.values();
    Ok(WindowDecomposition {
        l,
        n,
        internal: v[l..l + n].to_vec(),
        external_left: v[..l].to_vec(),
        external_right: v[l + n..].to_vec(),
    })
}

/// Number of indices `k ≥ 1` with `k < n^B`.
pub fn retained_per_side(n: usize, b: f64) -> usize {
    let lim = (n as f64).powf(b);
    let k = lim.ceil() as usize;
    if (k as f64) < lim {
        k
    } else {
        k.saturating_sub(1)
    }
}

/// Window mapped affinely onto `[−1, 1]` with the far externals dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledWindow {
    pub l: usize,
    pub n: usize,
    pub center: f64,
    pub half_width: f64,
    pub internal: Vec<f64>,
    /// `ỹ_{−1}, ỹ_{−2}, …` (decreasing values, starting at −1).
    pub left: Vec<f64>,
    /// `ỹ_1, ỹ_2, …` (increasing values, starting at +1).
    pub right: Vec<f64>,
    pub cutoff_b: f64,
}

impl RescaledWindow {
    /// Retained externals in ascending order.
    pub fn external_rescaled(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.left.iter().rev().copied().collect();
        v.extend_from_slice(&self.right);
        v
    }

    /// `T(w) = (w − ȳ)/half_width`.
    pub fn to_rescaled(&self, w: f64) -> f64 {
        (w - self.center) / self.half_width
    }

    pub fn to_original(&self, t: f64) -> f64 {
        self.center + t * self.half_width
    }

    pub fn weight(&self) -> WeightSpec {
        WeightSpec {
            n: self.n,
            roots: self.external_rescaled(),
        }
    }

    pub fn dump(&self) -> WindowDump {
        WindowDump {
            l: self.l,
            n: self.n,
            b: self.cutoff_b,
            center: self.center,
            half_width: self.half_width,
            internal: self.internal.clone(),
            external_rescaled: self.external_rescaled(),
        }
    }
}

/// JSON layout of a rescaled window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowDump {
    #[serde(rename = "L")]
    pub l: usize,
    pub n: usize,
    #[serde(rename = "B")]
    pub b: f64,
    pub center: f64,
    pub half_width: f64,
    pub internal: Vec<f64>,
    pub external_rescaled: Vec<f64>,
}

/// Rescale with the default retained-root cap.
pub fn rescale(window: &WindowDecomposition, b: f64) -> Result<RescaledWindow> {
    rescale_capped(window, b, DEFAULT_ROOT_CAP)
}

/// Maps `I_y` onto `[−1, 1]`, keeping externals with `|k| < n^B`, at most
/// `cap` per side. The images of `y_{∓1}` are set to `∓1` exactly.
pub fn rescale_capped(window: &WindowDecomposition, b: f64, cap: usize) -> Result<RescaledWindow> {
    let (ym, yp) = window.window();
    if !(yp > ym) {
        return Err(Error::Domain("degenerate window interval".into()));
    }
    if !(b > 0.0) {
        return Err(Error::InvalidConfig("cutoff B must be positive".into()));
    }
    let center = 0.5 * (ym + yp);
    let half = 0.5 * (yp - ym);
    let keep = retained_per_side(window.n, b).min(cap).max(1);
    let t = |w: f64| (w - center) / half;
    let mut left: Vec<f64> = window.external_left.iter().rev().take(keep).map(|&w| t(w)).collect();
    let mut right: Vec<f64> = window.external_right.iter().take(keep).map(|&w| t(w)).collect();
    left[0] = -1.0;
    right[0] = 1.0;
    // rounding must not pull a far root inside the window
    for v in left.iter_mut() {
        *v = v.min(-1.0);
    }
    for v in right.iter_mut() {
        *v = v.max(1.0);
    }
    Ok(RescaledWindow {
        l: window.l,
        n: window.n,
        center,
        half_width: half,
        internal: window.internal.iter().map(|&w| t(w)).collect(),
        left,
        right,
        cutoff_b: b,
    })
}

/// Polynomial weight `w(x) = Π_k (x − ỹ_k)² = exp(−n U(x))` on `[−1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub n: usize,
    /// Roots in ascending order, each of multiplicity two.
    pub roots: Vec<f64>,
}

impl WeightSpec {
    pub fn new(n: usize, mut roots: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        if let Some(i) = roots.iter().position(|r| !(r.is_finite() && r.abs() >= 1.0)) {
            return Err(Error::Domain(format!("root {} lies inside (-1, 1)", roots[i])));
        }
        roots.sort_by(f64::total_cmp);
        Ok(Self { n, roots })
    }

    /// The constant weight (no roots).
    pub fn unit(n: usize) -> Self {
        Self { n, roots: Vec::new() }
    }

    /// Polynomial degree of the weight.
    pub fn degree(&self) -> usize {
        2 * self.roots.len()
    }

    /// `log w(x) = 2Σ log|x − ỹ_k|`; `−∞` at a root.
    pub fn log_weight(&self, x: f64) -> f64 {
        2.0 * self.roots.iter().map(|r| (x - r).abs().ln()).sum::<f64>()
    }

    /// Direct product form, for checking the log-sum form.
    pub fn weight_product(&self, x: f64) -> f64 {
        self.roots.iter().map(|r| (x - r) * (x - r)).product()
    }

    /// `U(x) = −(2/n)Σ log|x − ỹ_k|`.
    pub fn potential(&self, x: f64) -> f64 {
        -self.log_weight(x) / self.n as f64
    }

    /// `U′(x) = −(2/n)Σ 1/(x − ỹ_k)`, the log-derivative of `w` over `−n`.
    pub fn potential_derivative(&self, x: f64) -> f64 {
        -2.0 / self.n as f64 * self.roots.iter().map(|r| 1.0 / (x - r)).sum::<f64>()
    }
}

/// `(U, U′, U″)` at an interior point.
pub fn potential_value_and_derivatives(spec: &WeightSpec, x: f64) -> Result<(f64, f64, f64)> {
    if !(x.abs() < 1.0) {
        return Err(Error::Domain(format!("x = {x} is not inside (-1, 1)")));
    }
    let c = 2.0 / spec.n as f64;
    let (mut u, mut u1, mut u2) = (0.0, 0.0, 0.0);
    for &r in &spec.roots {
        let d = x - r;
        if d == 0.0 {
            return Err(Error::Domain(format!("x = {x} is a root of the weight")));
        }
        u -= c * d.abs().ln();
        u1 -= c / d;
        u2 += c / (d * d);
    }
    Ok((u, u1, u2))
}

/// Rescaled equispaced profile `ỹ_{±k} = ±(1 + (k − 1)/(nρ₀))`,
/// `k = 1..min(K, cap)` where `K` counts the `k < n^B`.
pub fn equispaced_profile(n: usize, rho0: f64, b: f64, cap: usize) -> Result<WeightSpec> {
    if !(rho0 > 0.0) {
        return Err(Error::InvalidConfig("rho0 must be positive".into()));
    }
    let k_max = retained_per_side(n, b).min(cap).max(1);
    let step = 1.0 / (n as f64 * rho0);
    let mut roots = Vec::with_capacity(2 * k_max);
    for k in 1..=k_max {
        let y = 1.0 + (k - 1) as f64 * step;
        roots.push(-y);
        roots.push(y);
    }
    WeightSpec::new(n, roots)
}

/// Size of the far tail dropped by the cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailSplit {
    /// `sup_{x∈I_y} |Nx − 2Σ_far 1/(x − y_k)|` over a grid.
    pub sup_v2_prime: f64,
    /// `n·δV₂`, `δV₂ = max V₂ − min V₂` on the same grid.
    pub density_ratio_dev: f64,
}

/// Evaluates `V₂(x) = Nx²/2 − 2Σ_far log|x − y_k|` and its derivative on a
/// 401-point grid of the window interval. "Far" means every external point
/// not retained by [`rescale`] with the same `B`.
pub fn tail_split_check(window: &WindowDecomposition, b: f64) -> TailSplit {
    tail_split_check_capped(window, b, DEFAULT_ROOT_CAP)
}

pub fn tail_split_check_capped(window: &WindowDecomposition, b: f64, cap: usize) -> TailSplit {
    let nf = window.total() as f64;
    let keep = retained_per_side(window.n, b).min(cap).max(1);
    let left_far: Vec<f64> = window.external_left.iter().rev().skip(keep).copied().collect();
    let right_far: Vec<f64> = window.external_right.iter().skip(keep).copied().collect();
    let (ym, yp) = window.window();
    let grid = 401;
    let (mut sup, mut vmin, mut vmax) = (0.0f64, f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..grid {
        let x = ym + (yp - ym) * i as f64 / (grid - 1) as f64;
        let (mut d1, mut v) = (nf * x, 0.5 * nf * x * x);
        for &y in left_far.iter().chain(&right_far) {
            d1 -= 2.0 / (x - y);
            v -= 2.0 * (x - y).abs().ln();
        }
        sup = sup.max(d1.abs());
        vmin = vmin.min(v);
        vmax = vmax.max(v);
    }
    TailSplit {
        sup_v2_prime: sup,
        density_ratio_dev: window.n as f64 * (vmax - vmin),
    }
}

/// Left-hand sides of the two good-boundary assumptions with their
/// reference scalings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// `sup_{|x|≤1} Σ_{1<|k|<n^B} 1/|x − ỹ_k|`.
    pub a2_sup: f64,
    /// `Σ_{1<|k|<n^B} [1/|ỹ_k − 1| + 1/|ỹ_k + 1|]`.
    pub a2_bound: f64,
    /// `n^{1+3γ}`.
    pub a2_reference: f64,
    /// `∫_{−1+n^{−A}}^{1−n^{−A}} [(x+1)^{−2} + (1−x)^{−2}] ρ(x) dx`.
    pub a3_integral: f64,
    /// `n^{4γ}`.
    pub a3_reference: f64,
}

/// Evaluates both assumptions. The (a2) supremum is exact: every term is
/// convex on `[−1, 1]`, so the maximum sits at `x = ±1`. The (a3) integral
/// uses `u = log(1 ± x)` on each half with composite Gauss–Legendre, which
/// resolves the `n^{−A}` cut-offs at any depth.
pub fn assumption_checks(
    rescaled: &RescaledWindow,
    density_fn: &dyn Fn(f64) -> f64,
    gamma: f64,
    a_exponent: f64,
) -> AssumptionReport {
    let inner: Vec<f64> = rescaled
        .left
        .iter()
        .skip(1)
        .chain(rescaled.right.iter().skip(1))
        .copied()
        .collect();
    let at = |x: f64| inner.iter().map(|y| 1.0 / (x - y).abs()).sum::<f64>();
    let a2_sup = at(-1.0).max(at(1.0));
    let a2_bound = inner
        .iter()
        .map(|y| 1.0 / (y - 1.0).abs() + 1.0 / (y + 1.0).abs())
        .sum();
    let n = rescaled.n as f64;
    AssumptionReport {
        a2_sup,
        a2_bound,
        a2_reference: n.powf(1.0 + 3.0 * gamma),
        a3_integral: a3_integral(density_fn, n, a_exponent),
        a3_reference: n.powf(4.0 * gamma),
    }
}

/// `∫_{−1+δ}^{1−δ} [(x+1)^{−2} + (1−x)^{−2}] ρ(x) dx`, `δ = n^{−A}`
/// (clamped to `1e-300`).
pub fn a3_integral(density_fn: &dyn Fn(f64) -> f64, n: f64, a_exponent: f64) -> f64 {
    let delta = n.powf(-a_exponent).max(1e-300);
    if delta >= 1.0 {
        return 0.0;
    }
    // left half: x = −1 + e^u, u ∈ [ln δ, 0]; right half mirrored
    let lo = delta.ln();
    let panels = (-lo).ceil().max(1.0) as usize;
    let mut total = 0.0;
    for p in 0..panels {
        let a = lo + (-lo) * p as f64 / panels as f64;
        let b = lo + (-lo) * (p + 1) as f64 / panels as f64;
        let (us, ws) = gauss_legendre_on(24, a, b);
        for (u, w) in us.iter().zip(&ws) {
            // distances to the near endpoint are e^u exactly, even where
            // ±1 ∓ e^u rounds to ±1
            let e = u.exp();
            let kernel = (-u).exp() + e / ((2.0 - e) * (2.0 - e));
            total += w * kernel * (density_fn(-1.0 + e) + density_fn(1.0 - e));
        }
    }
    total
}
