//! Local eigenvalue statistics: the windowed two-point estimator, sine
//! kernel comparisons, level repulsion, Wegner and gap-tail curves, and the
//! Hamiltonian-energy constant.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::archive::Archive;
use crate::error::{Error, Result};
use crate::localwindow::WeightSpec;
use crate::orthopoly::{cd_kernel, Recurrence};
use crate::quadrature::{chebyshev_u_rule, gauss_legendre_on, tanh_sinh};
use crate::rng::StreamFactory;
use crate::spectral::{count_centered, semicircle_density, Spectrum};
use crate::stats::{weighted_line_fit, wilson_interval, Moments};

/// `sin(πu)/(πu)`.
pub fn sine_kernel(u: f64) -> f64 {
    let x = PI * u;
    if u.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `1 − sinc²(u)`, the sine-kernel pair correlation.
pub fn gap_complement(u: f64) -> f64 {
    let s = sine_kernel(u);
    1.0 - s * s
}

/// `exp(−1/(1 − (u/R)²))` inside `(−R, R)`, zero outside.
pub fn bump(u: f64, r: f64) -> f64 {
    let t = u / r;
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `O(a, b) = g(a − b) h((a + b)/2)`.
#[derive(Clone)]
pub struct Observable {
    pub g: RealFn,
    pub h: RealFn,
    pub support_radius: f64,
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Observable")
            .field("support_radius", &self.support_radius)
            .finish_non_exhaustive()
    }
}

impl Observable {
    /// Checks `∫h = 1` to 1e-8 on `[−R, R]`.
    pub fn new(g: RealFn, h: RealFn, support_radius: f64) -> Result<Self> {
        if !(support_radius > 0.0 && support_radius.is_finite()) {
            return Err(Error::InvalidConfig("support radius must be positive".into()));
        }
        let mass = tanh_sinh(|x| h(x), -support_radius, support_radius, 1e-13);
        if (mass - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidConfig(format!("h integrates to {mass}, not 1")));
        }
        Ok(Self { g, h, support_radius })
    }

    /// Bump `g` and the normalized bump `h`, both of radius `r`.
    pub fn bump(r: f64) -> Result<Self> {
        let z = tanh_sinh(|x| bump(x, r), -r, r, 1e-14);
        Self::new(Arc::new(move |u| bump(u, r)), Arc::new(move |u| bump(u, r) / z), r)
    }

    /// `∫g(u)(1 − sinc²(u)) du`.
    pub fn reference(&self) -> f64 {
        let r = self.support_radius;
        tanh_sinh(|u| (self.g)(u) * gap_complement(u), -r, r, 1e-12)
    }

    /// `∫g(u) du`, the value without repulsion.
    pub fn g_integral(&self) -> f64 {
        let r = self.support_radius;
        tanh_sinh(|u| (self.g)(u), -r, r, 1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    #[serde(rename = "E0")]
    pub e0: f64,
    pub delta: f64,
    pub samples: usize,
    pub value: f64,
    pub stderr: f64,
    pub reference: f64,
}

/// Points of the deterministic average over `[E0 − δ, E0 + δ]`.
pub const ENERGY_NODES: usize = 33;

/// `N/(N−1) · T(N, δ)` estimated from the archive, with `ρ_sc(E)` frozen at
/// `ρ_sc(E0)` inside `g` and `h`.
pub fn two_point_estimator(archive: &Archive, e0: f64, delta: f64, obs: &Observable) -> Result<CorrelationEstimate> {
    if archive.len() < 2 {
        return Err(Error::InvalidConfig("the estimator needs at least two samples".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidConfig("delta must be positive".into()));
    }
    let nf = archive.n as f64;
    let rho = semicircle_density(e0);
    let reach = obs.support_radius / (nf * rho.max(f64::MIN_POSITIVE));
    if !(e0.abs() + delta + reach < 2.0) {
        return Err(Error::Domain(format!(
            "window around E0 = {e0} with delta = {delta} reaches the spectral edge"
        )));
    }
    let (nodes, weights) = gauss_legendre_on(ENERGY_NODES, e0 - delta, e0 + delta);
    let moments = archive
        .samples
        .par_iter()
        .map(|s| {
            let v = sample_statistic(s.values(), rho * nf, &nodes, &weights, obs) * nf / (nf - 1.0) / (2.0 * delta);
            let mut m = Moments::default();
            m.push(v);
            m
        })
        .reduce(Moments::default, Moments::merge);
    Ok(CorrelationEstimate {
        e0,
        delta,
        samples: archive.len(),
        value: moments.mean(),
        stderr: moments.stderr(),
        reference: obs.reference(),
    })
}

/// `Σ_{j≠k} Σ_i w_i g((λ_j−λ_k)Nρ) h(((λ_j+λ_k)/2 − E_i)Nρ)` for one spectrum.
fn sample_statistic(l: &[f64], scale: f64, nodes: &[f64], weights: &[f64], obs: &Observable) -> f64 {
    let r = obs.support_radius / scale;
    let (lo, hi) = (nodes[0] - r, nodes[nodes.len() - 1] + r);
    let start = l.partition_point(|&x| x < lo - r);
    let mut total = 0.0;
    for j in start..l.len() {
        if l[j] > hi + r {
            break;
        }
        for k in j + 1..l.len() {
            let d = l[k] - l[j];
            if d >= r {
                break;
            }
            let mid = 0.5 * (l[j] + l[k]);
            let gs = (obs.g)(d * scale) + (obs.g)(-d * scale);
            if gs == 0.0 {
                continue;
            }
            let hs: f64 = nodes
                .iter()
                .zip(weights)
                .map(|(e, w)| w * (obs.h)((mid - e) * scale))
                .sum();
            total += gs * hs;
        }
    }
    total
}

/// Spectra of `n` independent semicircle-distributed points: the
/// no-repulsion control ensemble.
pub fn poisson_archive(n: usize, samples: usize, seed: u64) -> Result<Archive> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    let f = StreamFactory::new(seed);
    let spectra = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = f.stream(i);
            // the x-coordinate of a uniform point in the disk of radius 2
            let v: Vec<f64> = (0..n)
                .map(|_| {
                    let u: f64 = rng.random();
                    let t: f64 = rng.random();
                    2.0 * u.sqrt() * (2.0 * PI * t).cos()
                })
                .collect();
            Spectrum::separated(v)
        })
        .collect::<Result<Vec<_>>>()?;
    Archive::new(n, "poisson", spectra)
}

/// A symmetric kernel with a bulk density, for the local sine-kernel scan.
pub trait ReproducingKernel {
    fn kernel(&self, x: f64, y: f64) -> Result<f64>;

    fn diagonal(&self, x: f64) -> Result<f64> {
        self.kernel(x, x)
    }
}

/// Christoffel–Darboux kernel of the varying weight.
pub struct OrthoKernel<'a> {
    pub rec: &'a Recurrence,
    pub weight: &'a WeightSpec,
    pub n: usize,
}

impl ReproducingKernel for OrthoKernel<'_> {
    fn kernel(&self, x: f64, y: f64) -> Result<f64> {
        Ok(cd_kernel(self.rec, self.weight, self.n, x, y)?.value)
    }
}

/// Kernel of `n` Hermite functions (the GUE kernel for the weight
/// `e^{−x²}`), summed directly.
pub struct HermiteKernel {
    pub n: usize,
}

impl HermiteKernel {
    fn functions(&self, x: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n);
        let mut prev = 0.0;
        let mut cur = PI.powf(-0.25) * (-0.5 * x * x).exp();
        for j in 0..self.n {
            out.push(cur);
            let jf = j as f64;
            let next = (2.0 / (jf + 1.0)).sqrt() * x * cur - (jf / (jf + 1.0)).sqrt() * prev;
            prev = cur;
            cur = next;
        }
        out
    }
}

impl ReproducingKernel for HermiteKernel {
    fn kernel(&self, x: f64, y: f64) -> Result<f64> {
        let (a, b) = (self.functions(x), self.functions(y));
        Ok(a.iter().zip(&b).map(|(p, q)| p * q).sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelScanPoint {
    pub a: f64,
    pub b: f64,
    pub scaled: f64,
    pub sine: f64,
}

/// `(Kρ)⁻¹K(E + a/(Kρ), E + b/(Kρ))` against `sinc(a − b)` over all pairs
/// of offsets, where `Kρ` is the supplied bulk density `nρ_n(E)`.
pub fn kernel_scan(
    kernel: &dyn ReproducingKernel,
    e: f64,
    scale: f64,
    offsets: &[f64],
) -> Result<Vec<KernelScanPoint>> {
    if !(scale > 0.0) {
        return Err(Error::Domain("kernel scale must be positive".into()));
    }
    let mut out = Vec::with_capacity(offsets.len() * offsets.len());
    for &a in offsets {
        for &b in offsets {
            let v = kernel.kernel(e + a / scale, e + b / scale)? / scale;
            out.push(KernelScanPoint {
                a,
                b,
                scaled: v,
                sine: sine_kernel(a - b),
            });
        }
    }
    Ok(out)
}

pub fn max_deviation(points: &[KernelScanPoint]) -> f64 {
    points.iter().map(|p| (p.scaled - p.sine).abs()).fold(0.0, f64::max)
}

/// Largest deviation from the sine kernel for the varying-weight kernel
/// at `E`, given `ρ_n(E)`.
pub fn kernel_limit_scan(
    rec: &Recurrence,
    weight: &WeightSpec,
    n: usize,
    e: f64,
    rho_n_e: f64,
    offsets: &[f64],
) -> Result<f64> {
    let k = OrthoKernel { rec, weight, n };
    Ok(max_deviation(&kernel_scan(&k, e, n as f64 * rho_n_e, offsets)?))
}

/// Offsets `−1.5, −1.4, …, 1.5`, so every pair has `|a − b| ≤ 3`.
pub fn default_offsets() -> Vec<f64> {
    (0..=30).map(|i| -1.5 + 0.1 * i as f64).collect()
}

pub fn write_kernel_scan<W: Write>(points: &[KernelScanPoint], mut w: W) -> Result<()> {
    writeln!(w, "a,b,scaled,sine,deviation")?;
    for p in points {
        writeln!(w, "{},{},{},{},{}", p.a, p.b, p.scaled, p.sine, p.scaled - p.sine)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepulsionCurve {
    pub eps_grid: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub hits: Vec<u64>,
    pub trials: u64,
    /// `NaN` when fewer than two grid points have enough hits.
    pub fitted_exponent: f64,
    /// 95% interval of the exponent.
    pub exponent_interval: (f64, f64),
    pub bins_used: usize,
}

/// Minimum hits for a grid point to enter the exponent fit.
pub const MIN_FIT_HITS: u64 = 20;

/// Window centers `E + k/N` with `|k/N| ≤ band`: disjoint unit-spacing
/// windows that pool the statistics of one spectrum.
fn centers(n: usize, e: f64, band: f64) -> Vec<f64> {
    let k = (band * n as f64).floor() as i64;
    (-k..=k).map(|j| e + j as f64 / n as f64).collect()
}

fn check_grid(eps_grid: &[f64]) -> Result<()> {
    if eps_grid.is_empty() || eps_grid.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
        return Err(Error::InvalidConfig("eps grid must lie in (0, 1]".into()));
    }
    if eps_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("eps grid must be increasing".into()));
    }
    Ok(())
}

/// `P(N_I ≥ 2)` for `I = [E_c − ε/2N, E_c + ε/2N]`, pooled over the window
/// centers within `band` of `E`, with a Wilson-weighted power-law fit.
pub fn level_repulsion_curve(archive: &Archive, e: f64, eps_grid: &[f64], band: f64) -> Result<RepulsionCurve> {
    check_grid(eps_grid)?;
    if archive.is_empty() {
        return Err(Error::InvalidConfig("empty archive".into()));
    }
    let n = archive.n;
    let cs = centers(n, e, band);
    let hits = archive
        .samples
        .par_iter()
        .map(|s| {
            eps_grid
                .iter()
                .map(|eps| {
                    let h = eps / (2.0 * n as f64);
                    cs.iter().filter(|&&c| count_centered(s, c, h) >= 2).count() as u64
                })
                .collect::<Vec<u64>>()
        })
        .reduce(
            || vec![0; eps_grid.len()],
            |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect(),
        );
    let trials = (archive.len() * cs.len()) as u64;
    let probabilities = hits.iter().map(|&h| h as f64 / trials as f64).collect();

    let z = 1.96;
    let (mut xs, mut ys, mut ws) = (Vec::new(), Vec::new(), Vec::new());
    for (i, &h) in hits.iter().enumerate() {
        if h < MIN_FIT_HITS {
            continue;
        }
        let (lo, hi) = wilson_interval(h, trials, z);
        let sigma = (hi.ln() - lo.ln()) / (2.0 * z);
        xs.push(eps_grid[i].ln());
        ys.push((h as f64 / trials as f64).ln());
        ws.push(1.0 / (sigma * sigma));
    }
    let fit = if xs.len() >= 2 {
        weighted_line_fit(&xs, &ys, &ws)
    } else {
        None
    };
    let (fitted_exponent, exponent_interval) = match fit {
        Some(f) => (f.slope, (f.slope - z * f.slope_stderr, f.slope + z * f.slope_stderr)),
        None => (f64::NAN, (f64::NAN, f64::NAN)),
    };
    Ok(RepulsionCurve {
        eps_grid: eps_grid.to_vec(),
        probabilities,
        hits,
        trials,
        fitted_exponent,
        exponent_interval,
        bins_used: xs.len(),
    })
}

/// Mean of `N_I` over the same pooled windows.
pub fn wegner_statistic(archive: &Archive, e: f64, eps: f64, band: f64) -> Result<f64> {
    check_grid(&[eps])?;
    if archive.is_empty() {
        return Err(Error::InvalidConfig("empty archive".into()));
    }
    let n = archive.n;
    let cs = centers(n, e, band);
    let h = eps / (2.0 * n as f64);
    let total: usize = archive
        .samples
        .par_iter()
        .map(|s| cs.iter().map(|&c| count_centered(s, c, h)).sum::<usize>())
        .sum();
    Ok(total as f64 / (archive.len() * cs.len()) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub value: f64,
    pub stderr: f64,
}

/// `P(λ_{α+1} − E ≥ K/N)` for each `K`, where `λ_{α+1}` is the first
/// eigenvalue above `E`; samples with no eigenvalue above `E` are skipped.
pub fn gap_tail(archive: &Archive, e: f64, k_grid: &[f64]) -> Result<Vec<CurvePoint>> {
    let n = archive.n as f64;
    let gaps: Vec<f64> = archive
        .samples
        .iter()
        .filter_map(|s| {
            let v = s.values();
            let i = v.partition_point(|&x| x <= e);
            v.get(i).map(|x| (x - e) * n)
        })
        .collect();
    if gaps.is_empty() {
        return Err(Error::InvalidConfig("no sample has an eigenvalue above E".into()));
    }
    let m = gaps.len() as f64;
    Ok(k_grid
        .iter()
        .map(|&k| {
            let p = gaps.iter().filter(|&&g| g >= k).count() as f64 / m;
            CurvePoint {
                x: k,
                value: p,
                stderr: (p * (1.0 - p) / m).sqrt(),
            }
        })
        .collect())
}

pub fn write_curve<W: Write>(points: &[CurvePoint], mut w: W) -> Result<()> {
    writeln!(w, "grid,value,stderr")?;
    for p in points {
        writeln!(w, "{},{},{}", p.x, p.value, p.stderr)?;
    }
    Ok(())
}

impl RepulsionCurve {
    pub fn points(&self) -> Vec<CurvePoint> {
        let t = self.trials as f64;
        self.eps_grid
            .iter()
            .zip(&self.probabilities)
            .map(|(&x, &p)| CurvePoint {
                x,
                value: p,
                stderr: (p * (1.0 - p) / t).sqrt(),
            })
            .collect()
    }
}

/// `η = N^{−3/4}`.
pub fn default_eta(n: usize) -> f64 {
    (n as f64).powf(-0.75)
}

/// `N⁻²[(N/2)Σλ_i² − 2Σ_{j<k} log|λ_j − λ_k + iη|]`.
pub fn vandermonde_statistic(spectrum: &Spectrum, eta: f64) -> Result<f64> {
    if !(eta >= 0.0) {
        return Err(Error::Domain("eta must be nonnegative".into()));
    }
    let v = spectrum.values();
    let nf = v.len() as f64;
    if eta == 0.0 {
        if let Some(i) = v.windows(2).position(|w| w[1] - w[0] < 1e-14) {
            return Err(Error::Coincident { index: i + 1 });
        }
    }
    let e2 = eta * eta;
    let mut logs = 0.0;
    for j in 0..v.len() {
        for k in j + 1..v.len() {
            let d = v[k] - v[j];
            logs += 0.5 * (d * d + e2).ln();
        }
    }
    let sq: f64 = v.iter().map(|x| x * x).sum();
    Ok((0.5 * nf * sq - 2.0 * logs) / (nf * nf))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemicircleConstants {
    pub x2_moment: f64,
    pub log_energy: f64,
    pub combo: f64,
}

/// `∫x²ρ_sc`, `∫∫log|x − y|ρ_sc(x)ρ_sc(y)` and `½∫x²ρ_sc − ∫∫log|x−y|ρρ`
/// by quadrature.
pub fn semicircle_constants_check() -> SemicircleConstants {
    // ρ_sc(x) = √((x+2)(2−x))/(2π): second-kind Chebyshev absorbs the root
    let (nodes, weights) = chebyshev_u_rule(24, -2.0, 2.0);
    let x2_moment: f64 = nodes.iter().zip(&weights).map(|(x, w)| w * x * x / (2.0 * PI)).sum();
    let inner = |x: f64| {
        let f = |y: f64| (x - y).abs().ln() * semicircle_density(y);
        tanh_sinh(f, -2.0, x, 1e-13) + tanh_sinh(f, x, 2.0, 1e-13)
    };
    let log_energy: f64 = nodes
        .iter()
        .zip(&weights)
        .map(|(x, w)| w * inner(*x) / (2.0 * PI))
        .sum();
    SemicircleConstants {
        x2_moment,
        log_energy,
        combo: 0.5 * x2_moment - log_energy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localwindow::equispaced_profile;
    use crate::orthopoly::{density, orthonormal_basis};
    use crate::spectral::quantile_spectrum;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sine_kernel_values() {
        assert_eq!(sine_kernel(0.0), 1.0);
        assert_eq!(gap_complement(0.0), 0.0);
        assert!(sine_kernel(1.0).abs() < 1e-15);
        assert_abs_diff_eq!(gap_complement(1.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sine_kernel(0.5), 2.0 / PI, epsilon = 1e-15);
        assert_abs_diff_eq!(gap_complement(0.5), 1.0 - 4.0 / (PI * PI), epsilon = 1e-15);
        // series and direct forms meet at the switch
        let u = 1e-4;
        assert_abs_diff_eq!(
            sine_kernel(u * (1.0 - 1e-12)),
            (PI * u).sin() / (PI * u),
            epsilon = 1e-15
        );
    }

    #[test]
    fn bump_observable_is_normalized() {
        let o = Observable::bump(3.0).unwrap();
        assert_abs_diff_eq!(tanh_sinh(|x| (o.h)(x), -3.0, 3.0, 1e-13), 1.0, epsilon = 1e-10);
        assert_eq!((o.g)(3.0), 0.0);
        assert!(o.reference() > 0.0 && o.reference() < o.g_integral());
        let bad = Observable::new(Arc::new(|_| 1.0), Arc::new(|u| bump(u, 1.0)), 1.0);
        assert!(bad.is_err());
    }

    #[test]
    fn zero_observable_gives_zero() {
        let o = Observable::new(Arc::new(|_| 0.0), Observable::bump(3.0).unwrap().h, 3.0).unwrap();
        let a = poisson_archive(50, 4, 1).unwrap();
        let est = two_point_estimator(&a, 0.0, 0.2, &o).unwrap();
        assert_eq!(est.value, 0.0);
        assert!(two_point_estimator(&a, 1.9, 0.2, &o).is_err());
    }

    #[test]
    fn estimator_is_reflection_invariant() {
        let a = poisson_archive(60, 6, 7).unwrap();
        let reflected = Archive::new(
            60,
            "r",
            a.samples
                .iter()
                .map(|s| Spectrum::new(s.values().iter().rev().map(|x| -x).collect()).unwrap())
                .collect(),
        )
        .unwrap();
        let o = Observable::bump(3.0).unwrap();
        let x = two_point_estimator(&a, 0.0, 0.3, &o).unwrap().value;
        let y = two_point_estimator(&reflected, 0.0, 0.3, &o).unwrap().value;
        assert!((x - y).abs() <= 1e-12 * x.abs());
    }

    #[test]
    fn vandermonde_hand_value() {
        let s = Spectrum::new(vec![-1.0, 1.0]).unwrap();
        let v = vandermonde_statistic(&s, 0.0).unwrap();
        assert_abs_diff_eq!(v, (2.0 - 2.0 * 2f64.ln()) / 4.0, epsilon = 1e-15);
        let t = Spectrum::separated(vec![0.0, 0.0]).unwrap();
        assert!(vandermonde_statistic(&t, 0.0).is_err());
        assert!(vandermonde_statistic(&t, 0.1).is_ok());
    }

    #[test]
    fn semicircle_constants() {
        let c = semicircle_constants_check();
        assert_abs_diff_eq!(c.x2_moment, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.log_energy, -0.25, epsilon = 1e-6);
        assert_abs_diff_eq!(c.combo, 0.75, epsilon = 1e-6);
    }

    #[test]
    fn hermite_oracle_reproduces_sine_kernel() {
        let k = HermiteKernel { n: 64 };
        let scale = k.diagonal(0.0).unwrap();
        assert!((scale - (128.0f64).sqrt() / PI).abs() < 0.01 * scale);
        let dev = max_deviation(&kernel_scan(&k, 0.0, scale, &default_offsets()).unwrap());
        assert!(dev <= 0.03, "{dev}");
    }

    #[test]
    fn varying_weight_kernel_approaches_sine_kernel() {
        let dev = |n: usize| {
            let w = equispaced_profile(n, 0.5, 2.0, 1000).unwrap();
            let rec = orthonormal_basis(&w, n).unwrap();
            let rho = density(&rec, &w, n, 0.0).unwrap();
            kernel_limit_scan(&rec, &w, n, 0.0, rho, &default_offsets()).unwrap()
        };
        let (d16, d64) = (dev(16), dev(64));
        assert!(d64 <= 0.05, "{d64}");
        assert!(d64 < d16, "{d16} {d64}");
    }

    #[test]
    fn quantile_spectrum_never_has_close_pairs() {
        let a = Archive::new(200, "q", vec![quantile_spectrum(200).unwrap()]).unwrap();
        let c = level_repulsion_curve(&a, 0.0, &[0.25, 0.5, 1.0], 0.3).unwrap();
        assert!(c.hits.iter().all(|&h| h == 0));
        assert!(c.fitted_exponent.is_nan());
        assert!(level_repulsion_curve(&a, 0.0, &[0.5, 0.25], 0.3).is_err());
    }

    #[test]
    fn poisson_repulsion_exponent_is_two() {
        let a = poisson_archive(200, 2000, 11).unwrap();
        let grid: Vec<f64> = (0..6).map(|i| 0.25 * 4f64.powf(i as f64 / 5.0)).collect();
        let c = level_repulsion_curve(&a, 0.0, &grid, 0.5).unwrap();
        assert!((c.fitted_exponent - 2.0).abs() <= 0.4, "{c:?}");
        let w1 = wegner_statistic(&a, 0.0, 0.5, 0.5).unwrap();
        let w2 = wegner_statistic(&a, 0.0, 1.0, 0.5).unwrap();
        assert!((w2 / w1 - 2.0).abs() < 0.2);
        let tail = gap_tail(&a, 0.0, &[0.5, 1.0, 2.0, 4.0]).unwrap();
        assert!(tail.windows(2).all(|p| p[1].value <= p[0].value));
    }
}
