//! Diagonalization and empirical spectral diagnostics.

use std::f64::consts::PI;

use faer::{Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensemble::HermitianMatrix;
use crate::error::{Error, Result};

/// Strictly increasing, finite eigenvalue vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Validates ordering and finiteness.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::ZeroDimension);
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index: i });
            }
        }
        for i in 1..values.len() {
            if values[i] == values[i - 1] {
                return Err(Error::Coincident { index: i });
            }
            if values[i] < values[i - 1] {
                return Err(Error::NotOrdered { index: i });
            }
        }
        Ok(Self { values })
    }

    /// Sorts and nudges exact ties apart by one ulp, logging a warning for
    /// each nudge.
    pub fn separated(mut values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        values.sort_by(f64::total_cmp);
        for i in 1..values.len() {
            if values[i] <= values[i - 1] {
                log::warn!("separating tied eigenvalue {} at index {i}", values[i]);
                values[i] = values[i - 1].next_up();
            }
        }
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

impl TryFrom<Vec<f64>> for Spectrum {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Spectrum::new(v)
    }
}

impl From<Spectrum> for Vec<f64> {
    fn from(s: Spectrum) -> Self {
        s.values
    }
}

/// Full spectrum of a Hermitian matrix in ascending order.
pub fn eigenvalues(h: &HermitianMatrix) -> Result<Spectrum> {
    let n = h.dim();
    for (i, z) in h.packed().iter().enumerate() {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFinite { index: i });
        }
    }
    let m = Mat::<Complex64>::from_fn(n, n, |i, j| h.get(i, j));
    let vals = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigensolver: {e:?}")))?;
    Spectrum::separated(vals)
}

/// `m(z) = N⁻¹ Σ 1/(λ_j − z)`.
pub fn empirical_stieltjes(spectrum: &Spectrum, z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 {
        return Err(Error::Domain("Stieltjes transform needs Im z != 0".into()));
    }
    let n = spectrum.len() as f64;
    let s: Complex64 = spectrum.values().iter().map(|&l| 1.0 / (l - z)).sum();
    Ok(s / n)
}

/// `ρ_sc(x) = √(4 − x²)/(2π)` on `[−2, 2]`, zero outside.
pub fn semicircle_density(x: f64) -> f64 {
    if x.abs() >= 2.0 {
        0.0
    } else {
        (4.0 - x * x).sqrt() / (2.0 * PI)
    }
}

/// Stieltjes transform of the semicircle law, the branch that decays at
/// infinity.
pub fn semicircle_stieltjes(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re.abs() <= 2.0 {
        return Err(Error::Domain(format!("z = {z} lies on the cut [-2, 2]")));
    }
    let h = z / 2.0;
    // product of principal roots is analytic off [-2, 2]
    Ok(-h + (h - 1.0).sqrt() * (h + 1.0).sqrt())
}

/// Cauchy-smoothed empirical density `π⁻¹ Im m(x + iη)`.
pub fn smoothed_density(spectrum: &Spectrum, x: f64, eta: f64) -> f64 {
    let n = spectrum.len() as f64;
    spectrum
        .values()
        .iter()
        .map(|&l| eta / ((l - x) * (l - x) + eta * eta))
        .sum::<f64>()
        / (PI * n)
}

/// Number of eigenvalues `≤ e`.
pub fn count_below(spectrum: &Spectrum, e: f64) -> usize {
    spectrum.values().partition_point(|&l| l <= e)
}

/// Number of eigenvalues in the half-open interval `(a, b]`, so counts of
/// adjacent intervals add up exactly.
pub fn count_interval(spectrum: &Spectrum, a: f64, b: f64) -> usize {
    if b <= a {
        return 0;
    }
    count_below(spectrum, b) - count_below(spectrum, a)
}

/// Number of eigenvalues in the closed interval `[e − h, e + h]`.
pub fn count_centered(spectrum: &Spectrum, e: f64, h: f64) -> usize {
    let v = spectrum.values();
    v.partition_point(|&l| l <= e + h) - v.partition_point(|&l| l < e - h)
}

/// `N_sc(E) = ∫_{−∞}^E ρ_sc`.
pub fn semicircle_cdf(e: f64) -> f64 {
    if e <= -2.0 {
        return 0.0;
    }
    if e >= 2.0 {
        return 1.0;
    }
    0.5 + e * (4.0 - e * e).sqrt() / (4.0 * PI) + (e / 2.0).asin() / PI
}

/// Inverse of [`semicircle_cdf`] by safeguarded Newton inside a shrinking
/// bracket.
pub fn semicircle_cdf_inverse(q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("quantile {q} outside [0, 1]")));
    }
    if q == 0.0 {
        return Ok(-2.0);
    }
    if q == 1.0 {
        return Ok(2.0);
    }
    let (mut lo, mut hi) = (-2.0f64, 2.0f64);
    let mut x = 4.0 * q - 2.0;
    for _ in 0..200 {
        let f = semicircle_cdf(x) - q;
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let d = semicircle_density(x);
        let mut next = if d > 0.0 { x - f / d } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 || hi - lo <= 1e-15 {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// `sup_{E∈[lo,hi]} |N[E−h, E+h]/(2Nh) − ρ_sc(E)|`, computed exactly: the
/// count is piecewise constant between the breakpoints `λ_j ± h` and
/// `ρ_sc` is concave, so each piece is checked at its ends and at 0.
pub fn short_scale_deviation(spectrum: &Spectrum, h: f64, lo: f64, hi: f64) -> f64 {
    let n = spectrum.len() as f64;
    let mut cuts: Vec<f64> = vec![lo, hi];
    for &l in spectrum.values() {
        for c in [l - h, l + h] {
            if c > lo && c < hi {
                cuts.push(c);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    let scale = 1.0 / (2.0 * n * h);
    let mut sup: f64 = 0.0;
    for w in cuts.windows(2) {
        let (p, q) = (w[0], w[1]);
        if q <= p {
            continue;
        }
        let inside = count_centered(spectrum, 0.5 * (p + q), h) as f64 * scale;
        let mut probe = vec![p, q];
        if p < 0.0 && 0.0 < q {
            probe.push(0.0);
        }
        for e in probe {
            sup = sup.max((inside - semicircle_density(e)).abs());
        }
        // the endpoints themselves, where the closed count may jump up
        for e in [p, q] {
            let at = count_centered(spectrum, e, h) as f64 * scale;
            sup = sup.max((at - semicircle_density(e)).abs());
        }
    }
    sup
}

/// `max_E |N[−∞, E]/N − N_sc(E)|`, attained at an eigenvalue (one-sided).
pub fn counting_deviation(spectrum: &Spectrum) -> f64 {
    let n = spectrum.len() as f64;
    spectrum
        .values()
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let f = semicircle_cdf(l);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

/// Parameters of the good-configuration event. `c_omega` multiplies the
/// right-hand side of the dyadic-scale clause; the asymptotic statement
/// leaves that constant unspecified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodConfigParams {
    pub epsilon: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub k_cap: f64,
    pub c_omega: f64,
}

impl Default for GoodConfigParams {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            gamma: 0.1,
            kappa: 0.1,
            k_cap: 10.0,
            c_omega: 3.0,
        }
    }
}

impl GoodConfigParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if !(self.epsilon > 0.0 && self.epsilon <= 0.1) {
            return bad("epsilon must lie in (0, 1/10]");
        }
        if !(self.gamma > 0.0 && self.gamma <= 0.1) {
            return bad("gamma must lie in (0, 1/10]");
        }
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return bad("kappa must lie in (0, 1)");
        }
        if !(self.k_cap > 0.0 && self.c_omega > 0.0) {
            return bad("K and C_omega must be positive");
        }
        Ok(())
    }

    /// Window size `n = 2⌊N^ε/2⌋ + 1`.
    pub fn window_size(&self, n_dim: usize) -> usize {
        window_size(n_dim, self.epsilon)
    }
}

/// `2⌊N^ε/2⌋ + 1`.
pub fn window_size(n_dim: usize, epsilon: f64) -> usize {
    2 * ((n_dim as f64).powf(epsilon) / 2.0).floor() as usize + 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodConfigReport {
    pub in_omega: bool,
    /// Dyadic scale with the largest deviation-to-threshold ratio.
    pub worst_scale_m: usize,
    pub worst_deviation: f64,
    pub worst_threshold: f64,
    pub scales_ok: bool,
    pub half_count_ok: bool,
    pub density_cap_ok: bool,
    pub support_ok: bool,
}

/// Evaluates the four clauses of the good-configuration event.
pub fn good_config_check(spectrum: &Spectrum, params: &GoodConfigParams) -> Result<GoodConfigReport> {
    params.validate()?;
    let nd = spectrum.len();
    let nf = nd as f64;
    let n = params.window_size(nd) as f64;
    let ng = n.powf(params.gamma);
    let m_max = nf.ln().floor().max(0.0) as usize;
    let edge = 2.0 - params.kappa / 2.0;

    let mut worst = (0usize, 0.0f64, 1.0f64);
    let mut worst_ratio = f64::NEG_INFINITY;
    let mut scales_ok = true;
    for m in 0..=m_max {
        let eta = 2f64.powi(m as i32) * ng / nf;
        let dev = short_scale_deviation(spectrum, eta / 2.0, -edge, edge);
        let thr = params.c_omega * (nf * eta).powf(-0.25) * ng.powf(1.0 / 12.0);
        if dev > thr {
            scales_ok = false;
        }
        if dev / thr > worst_ratio {
            worst_ratio = dev / thr;
            worst = (m, dev, thr);
        }
    }

    let below_zero = count_below(spectrum, 0.0) as f64;
    let half_count_ok = (below_zero / (nf / 2.0) - 1.0).abs() <= n.powf(-params.gamma / 6.0);

    let eta0 = ng / nf;
    let density_cap_ok = max_window_count(spectrum.values(), eta0) as f64 <= params.k_cap * nf * eta0;

    let k = params.k_cap;
    let support_ok = spectrum.values().iter().all(|&l| l > -k && l < k);

    Ok(GoodConfigReport {
        in_omega: scales_ok && half_count_ok && density_cap_ok && support_ok,
        worst_scale_m: worst.0,
        worst_deviation: worst.1,
        worst_threshold: worst.2,
        scales_ok,
        half_count_ok,
        density_cap_ok,
        support_ok,
    })
}

/// Largest number of sorted points in any closed window of length `len`.
fn max_window_count(v: &[f64], len: f64) -> usize {
    let mut best = 0;
    let mut lo = 0;
    for hi in 0..v.len() {
        while v[hi] - v[lo] > len {
            lo += 1;
        }
        best = best.max(hi - lo + 1);
    }
    best
}

/// Bulk index range `Nκ^{3/2} ≤ a ≤ N(1 − κ^{3/2})`, 1-based, inclusive.
pub fn bulk_indices(n_dim: usize, kappa: f64) -> Result<(usize, usize)> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::Domain("kappa must lie in (0, 1)".into()));
    }
    let nf = n_dim as f64;
    let k32 = kappa.powf(1.5);
    let first = (nf * k32).ceil().max(1.0) as usize;
    let last = (nf * (1.0 - k32)).floor() as usize;
    if first > last || last > n_dim {
        return Err(Error::Domain(format!(
            "kappa = {kappa} leaves no bulk indices at N = {n_dim}"
        )));
    }
    Ok((first, last))
}

/// Rigidity diagnostics: largest bulk deviation from the semicircle
/// quantiles, and the largest normalized pair deviation
/// `|Nρ_sc(λ_a)(λ_b − λ_a) − (b − a)| / (n^γ|b − a|^{3/4} + |b − a|²/N)`
/// over bulk pairs with `|b − a| ≤ N n^{−γ/6}`.
pub fn rigidity_check(spectrum: &Spectrum, params: &GoodConfigParams) -> Result<(f64, f64)> {
    let nd = spectrum.len();
    let nf = nd as f64;
    let (first, last) = bulk_indices(nd, params.kappa)?;
    let v = spectrum.values();
    let mut loc: f64 = 0.0;
    for a in first..=last {
        let q = semicircle_cdf_inverse(a as f64 / nf)?;
        loc = loc.max((v[a - 1] - q).abs());
    }
    let n = params.window_size(nd) as f64;
    let ng = n.powf(params.gamma);
    let reach = (nf * n.powf(-params.gamma / 6.0)).floor() as usize;
    let mut pair: f64 = 0.0;
    for a in first..=last {
        let scale = nf * semicircle_density(v[a - 1]);
        let hi = (a + reach).min(last);
        for b in (a + 1)..=hi {
            let d = (b - a) as f64;
            let dev = (scale * (v[b - 1] - v[a - 1]) - d).abs();
            pair = pair.max(dev / (ng * d.powf(0.75) + d * d / nf));
        }
    }
    Ok((loc, pair))
}

/// Repulsion sums over bulk indices `ℓ` and all `j ≠ ℓ`:
/// `N⁻¹ΣΣ[N(λ_j − λ_ℓ)]⁻²` and `N⁻¹ΣΣ|N(λ_j − λ_ℓ)|⁻¹`.
pub fn repulsion_sums(spectrum: &Spectrum, kappa: f64) -> Result<(f64, f64)> {
    let nd = spectrum.len();
    let nf = nd as f64;
    let (first, last) = bulk_indices(nd, kappa)?;
    let v = spectrum.values();
    let (mut s2, mut s1) = (0.0, 0.0);
    for l in first..=last {
        for (j, &lj) in v.iter().enumerate() {
            if j + 1 == l {
                continue;
            }
            let d = nf * (lj - v[l - 1]);
            if d == 0.0 {
                return Err(Error::Coincident { index: j });
            }
            s2 += 1.0 / (d * d);
            s1 += 1.0 / d.abs();
        }
    }
    Ok((s2 / nf, s1 / nf))
}

/// The deterministic spectrum `λ_a = N_sc⁻¹(a/N)`, `a = 1..N`.
pub fn quantile_spectrum(n_dim: usize) -> Result<Spectrum> {
    let nf = n_dim as f64;
    let v: Result<Vec<f64>> = (1..=n_dim).map(|a| semicircle_cdf_inverse(a as f64 / nf)).collect();
    Spectrum::new(v?)
}
