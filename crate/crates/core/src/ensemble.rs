//! Wigner and GUE sampling, the matrix Ornstein–Uhlenbeck flow, Dyson
//! Brownian motion and the eigenvalue transition kernel.

use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::spectral::Spectrum;

/// Dense Hermitian matrix; only the upper triangle is stored, packed by
/// columns, so Hermitian symmetry holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

#[inline]
fn packed_index(i: usize, j: usize) -> usize {
    debug_assert!(i <= j);
    j * (j + 1) / 2 + i
}

impl HermitianMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * (dim + 1) / 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Packed upper triangle, column by column.
    pub fn packed(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if i <= j {
            self.data[packed_index(i, j)]
        } else {
            self.data[packed_index(j, i)].conj()
        }
    }

    /// Sets entry `(i, j)` and implicitly `(j, i)`; diagonal entries keep
    /// only their real part.
    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        if i == j {
            self.data[packed_index(i, i)] = Complex64::new(z.re, 0.0);
        } else if i < j {
            self.data[packed_index(i, j)] = z;
        } else {
            self.data[packed_index(j, i)] = z.conj();
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[packed_index(i, i)].re).sum()
    }

    /// `Tr H² = Σ_{ij} |h_ij|²`.
    pub fn trace_sq(&self) -> f64 {
        let mut s = 0.0;
        for j in 0..self.dim {
            for i in 0..=j {
                let w = if i == j { 1.0 } else { 2.0 };
                s += w * self.data[packed_index(i, j)].norm_sqr();
            }
        }
        s
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &HermitianMatrix, b: f64) -> Result<HermitianMatrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(x, y)| x * a + y * b).collect();
        Ok(HermitianMatrix { dim: self.dim, data })
    }
}

/// Distribution of the standardized real variable behind each entry.
#[derive(Debug, Clone, PartialEq)]
pub enum EntryLaw {
    Gaussian,
    /// `√(1−τ²)·R + τ·G` with Rademacher `R`, standard normal `G`, τ² = 1/4.
    RademacherSmoothed,
    /// Uniform on `[−√3, √3]`.
    Uniform,
    CustomDensity(Arc<TabulatedDensity>),
}

impl FromStr for EntryLaw {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(EntryLaw::Gaussian),
            "rademacher-smoothed" => Ok(EntryLaw::RademacherSmoothed),
            "uniform" => Ok(EntryLaw::Uniform),
            "custom-density" => Err(Error::InvalidConfig(
                "custom-density needs a tabulated density (see TabulatedDensity)".into(),
            )),
            other => Err(Error::InvalidConfig(format!("unknown entry law '{other}'"))),
        }
    }
}

impl EntryLaw {
    pub fn tag(&self) -> &'static str {
        match self {
            EntryLaw::Gaussian => "gaussian",
            EntryLaw::RademacherSmoothed => "rademacher-smoothed",
            EntryLaw::Uniform => "uniform",
            EntryLaw::CustomDensity(_) => "custom-density",
        }
    }

    /// One draw with mean 0 and variance 1.
    pub fn sample(&self, rng: &mut Stream) -> f64 {
        match self {
            EntryLaw::Gaussian => rng.sample(StandardNormal),
            EntryLaw::RademacherSmoothed => {
                const TAU2: f64 = 0.25;
                let r = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let g: f64 = rng.sample(StandardNormal);
                (1.0 - TAU2).sqrt() * r + TAU2.sqrt() * g
            }
            EntryLaw::Uniform => {
                let s3 = 3f64.sqrt();
                rng.random_range(-s3..s3)
            }
            EntryLaw::CustomDensity(d) => d.sample(rng),
        }
    }
}

/// A density tabulated on a grid, sampled by inverse CDF of its
/// piecewise-constant (cell-average) version and standardized to mean 0,
/// variance 1 exactly for that version.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDensity {
    edges: Vec<f64>,
    cumulative: Vec<f64>,
    mean: f64,
    sd: f64,
}

impl TabulatedDensity {
    pub fn new(x: &[f64], density: &[f64]) -> Result<Self> {
        if x.len() < 2 || x.len() != density.len() {
            return Err(Error::InvalidConfig("density table needs ≥ 2 matching rows".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("density grid must increase".into()));
        }
        if density.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::InvalidConfig("density values must be finite and ≥ 0".into()));
        }
        let masses: Vec<f64> = (0..x.len() - 1)
            .map(|i| 0.5 * (density[i] + density[i + 1]) * (x[i + 1] - x[i]))
            .collect();
        let total: f64 = masses.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidConfig("density has zero mass".into()));
        }
        let mut cumulative = Vec::with_capacity(masses.len());
        let (mut acc, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (i, m) in masses.iter().enumerate() {
            let p = m / total;
            let (a, b) = (x[i], x[i + 1]);
            m1 += p * 0.5 * (a + b);
            m2 += p * (a * a + a * b + b * b) / 3.0;
            acc += p;
            cumulative.push(acc);
        }
        let sd = (m2 - m1 * m1).sqrt();
        if sd.is_nan() || sd <= 0.0 {
            return Err(Error::InvalidConfig("density is degenerate".into()));
        }
        Ok(Self {
            edges: x.to_vec(),
            cumulative,
            mean: m1,
            sd,
        })
    }

    pub fn sample(&self, rng: &mut Stream) -> f64 {
        let u: f64 = rng.random::<f64>() * self.cumulative.last().copied().unwrap_or(1.0);
        let i = self
            .cumulative
            .partition_point(|&c| c < u)
            .min(self.cumulative.len() - 1);
        let c0 = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
        let width = self.cumulative[i] - c0;
        let t = if width > 0.0 { (u - c0) / width } else { 0.5 };
        let x = self.edges[i] + t * (self.edges[i + 1] - self.edges[i]);
        (x - self.mean) / self.sd
    }
}

/// Parameters of a Wigner ensemble with a small Gaussian component.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub n: usize,
    pub beta_exponent: f64,
    pub entry_law: EntryLaw,
    pub seed: u64,
    pub sample_count: usize,
}

impl EnsembleConfig {
    /// Variance of the Gaussian component, `s² = N^{−3/4+β}`.
    pub fn s2(&self) -> f64 {
        (self.n as f64).powf(-0.75 + self.beta_exponent)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::ZeroDimension);
        }
        if self.sample_count == 0 {
            return Err(Error::InvalidConfig("sample_count must be positive".into()));
        }
        if !(self.beta_exponent > 0.0) {
            return Err(Error::InvalidConfig("beta_exponent must be positive".into()));
        }
        let s2 = self.s2();
        if !(s2 > 0.0 && s2 <= 1.0) {
            return Err(Error::InvalidConfig(format!("s^2 = {s2} outside (0, 1]")));
        }
        Ok(())
    }
}

/// Matrix with entries `z/√N`, where off-diagonal real and imaginary parts
/// are `law/√2` and diagonals are `law`.
fn sample_entries(n: usize, law: &EntryLaw, rng: &mut Stream) -> HermitianMatrix {
    let mut h = HermitianMatrix::zeros(n);
    let scale = 1.0 / (n as f64).sqrt();
    let off = scale * std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..n {
        for i in 0..j {
            let re = law.sample(rng) * off;
            let im = law.sample(rng) * off;
            h.data[packed_index(i, j)] = Complex64::new(re, im);
        }
        h.data[packed_index(j, j)] = Complex64::new(law.sample(rng) * scale, 0.0);
    }
    h
}

/// GUE matrix with entry variance `1/N`.
pub fn sample_gue(n: usize, rng: &mut Stream) -> Result<HermitianMatrix> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    Ok(sample_entries(n, &EntryLaw::Gaussian, rng))
}

/// `(1 − s²)^{1/2} Ĥ + s V` with `Ĥ` drawn from the entry law and `V` GUE.
pub fn sample_wigner(config: &EnsembleConfig, rng: &mut Stream) -> Result<HermitianMatrix> {
    config.validate()?;
    let s2 = config.s2();
    let h_hat = sample_entries(config.n, &config.entry_law, rng);
    let v = sample_gue(config.n, rng)?;
    h_hat.combine((1.0 - s2).sqrt(), &v, s2.sqrt())
}

/// Exact-in-law OU flow `e^{−t/2}H₀ + (1 − e^{−t})^{1/2} V`.
pub fn ou_evolve(h0: &HermitianMatrix, t: f64, rng: &mut Stream) -> Result<HermitianMatrix> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    if t == 0.0 {
        return Ok(h0.clone());
    }
    let v = sample_gue(h0.dim(), rng)?;
    h0.combine((-0.5 * t).exp(), &v, (-(-t).exp_m1()).sqrt())
}

/// Recorded Euler–Maruyama path of the eigenvalue SDE.
#[derive(Debug, Clone, PartialEq)]
pub struct DbmPath {
    pub step_size: f64,
    pub steps: usize,
    /// Snapshot times, matching `trajectory`.
    pub times: Vec<f64>,
    pub trajectory: Vec<Spectrum>,
    /// Number of local step halvings that were needed.
    pub refinements: usize,
}

impl DbmPath {
    pub fn last(&self) -> &Spectrum {
        self.trajectory.last().expect("path holds the initial snapshot")
    }
}

const MAX_HALVINGS: u32 = 40;

fn dbm_drift(lam: &[f64], out: &mut [f64]) {
    let n = lam.len();
    let inv_n = 1.0 / n as f64;
    for (o, l) in out.iter_mut().zip(lam) {
        *o = -0.5 * l;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let d = inv_n / (lam[i] - lam[j]);
            out[i] += d;
            out[j] -= d;
        }
    }
}

fn strictly_ordered(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[0] < w[1])
}

/// One step of length `dt` driven by Brownian increments `dw`; on an
/// ordering violation the step is split at its midpoint with a Brownian
/// bridge draw, recursively.
fn dbm_step(
    lam: &mut Vec<f64>,
    dt: f64,
    dw: &[f64],
    depth: u32,
    rng: &mut Stream,
    scratch: &mut Vec<f64>,
    refinements: &mut usize,
) -> Result<()> {
    let n = lam.len();
    let noise = 1.0 / (n as f64).sqrt();
    scratch.resize(n, 0.0);
    dbm_drift(lam, scratch);
    let trial: Vec<f64> = (0..n).map(|i| lam[i] + scratch[i] * dt + noise * dw[i]).collect();
    if strictly_ordered(&trial) {
        *lam = trial;
        return Ok(());
    }
    if depth >= MAX_HALVINGS {
        return Err(Error::Convergence(format!(
            "ordering lost after {MAX_HALVINGS} step halvings"
        )));
    }
    *refinements += 1;
    let sd = (dt / 4.0).sqrt();
    let first: Vec<f64> = dw
        .iter()
        .map(|w| {
            let z: f64 = rng.sample(StandardNormal);
            0.5 * w + sd * z
        })
        .collect();
    let second: Vec<f64> = dw.iter().zip(&first).map(|(w, a)| w - a).collect();
    dbm_step(lam, 0.5 * dt, &first, depth + 1, rng, scratch, refinements)?;
    dbm_step(lam, 0.5 * dt, &second, depth + 1, rng, scratch, refinements)
}

/// Euler–Maruyama integration recording every step.
pub fn dbm_integrate(spectrum0: &Spectrum, dt: f64, steps: usize, rng: &mut Stream) -> Result<DbmPath> {
    dbm_integrate_recording(spectrum0, dt, steps, 1, rng)
}

/// Euler–Maruyama integration recording every `record_every` steps, plus
/// the initial and final states.
pub fn dbm_integrate_recording(
    spectrum0: &Spectrum,
    dt: f64,
    steps: usize,
    record_every: usize,
    rng: &mut Stream,
) -> Result<DbmPath> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain(format!("step size must be positive, got {dt}")));
    }
    let record_every = record_every.max(1);
    let mut lam = spectrum0.values().to_vec();
    if !strictly_ordered(&lam) {
        return Err(Error::NotOrdered { index: 0 });
    }
    let n = lam.len();
    let sdt = dt.sqrt();
    let mut scratch = Vec::with_capacity(n);
    let mut dw = vec![0.0; n];
    let mut refinements = 0;
    let mut times = vec![0.0];
    let mut trajectory = vec![spectrum0.clone()];
    for step in 1..=steps {
        for w in dw.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *w = sdt * z;
        }
        dbm_step(&mut lam, dt, &dw, 0, rng, &mut scratch, &mut refinements)?;
        if step % record_every == 0 || step == steps {
            times.push(step as f64 * dt);
            trajectory.push(Spectrum::new(lam.clone())?);
        }
    }
    Ok(DbmPath {
        step_size: dt,
        steps,
        times,
        trajectory,
        refinements,
    })
}

fn log_abs_vandermonde(v: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            let d = (v[j] - v[i]).abs();
            if d == 0.0 {
                return Err(Error::Coincident { index: j });
            }
            s += d.ln();
        }
    }
    Ok(s)
}

/// Log-determinant of a square row-major matrix by LU with partial
/// pivoting; returns `(log|det|, sign)`.
fn log_det(mut a: Vec<f64>, n: usize) -> (f64, f64) {
    let mut sign = 1.0;
    let mut acc = 0.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&r, &s| a[r * n + k].abs().total_cmp(&a[s * n + k].abs()))
            .unwrap_or(k);
        let piv = a[p * n + k];
        if piv == 0.0 {
            return (f64::NEG_INFINITY, 0.0);
        }
        if p != k {
            for c in 0..n {
                a.swap(p * n + c, k * n + c);
            }
            sign = -sign;
        }
        if piv < 0.0 {
            sign = -sign;
        }
        acc += piv.abs().ln();
        for r in (k + 1)..n {
            let f = a[r * n + k] / piv;
            if f != 0.0 {
                for c in (k + 1)..n {
                    a[r * n + c] -= f * a[k * n + c];
                }
            }
        }
    }
    (acc, sign)
}

/// `log g_s(λ, ν)` for the transition kernel as printed, with
/// `c = e^{−s/2}`:
///
/// `(N/2)log N − (N/2)log 2π − (N(N−1)/2)log c − (N/2)log(1−c²)
///  + log|Δ(λ)| − log|Δ(ν)| + log det[exp(−N(cλ_j − ν_k)²/(2(1−c²)))]`.
///
/// At `N = 1` this is the scalar OU density `p_s(λ|ν)` multiplied by
/// `exp((λ² − ν²)/2)`: the Gaussian factor carries `(cλ − ν)²` where the
/// forward density carries `(λ − cν)²`.
///
/// The Gaussian matrix factorizes as row factor × column factor ×
/// `exp(κ λ_j ν_k)`, κ = Nc/(1−c²); the outer factors are taken out in
/// log form and the remaining rows are rescaled by their maxima before LU.
pub fn transition_kernel_logdensity(lam: &Spectrum, nu: &Spectrum, s: f64) -> Result<f64> {
    let n = lam.len();
    if nu.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: nu.len(),
        });
    }
    if !(s > 0.0) {
        return Err(Error::Domain(format!("time must be positive, got {s}")));
    }
    let (l, v) = (lam.values(), nu.values());
    let log_dnu = log_abs_vandermonde(v)?;
    let log_dlam = log_abs_vandermonde(l)?;
    let nf = n as f64;
    let c = (-0.5 * s).exp();
    let one_m_c2 = -(-s).exp_m1();
    let q = nf / (2.0 * one_m_c2);

    let mut outer = 0.0;
    for j in 0..n {
        outer -= q * c * c * l[j] * l[j];
        outer -= q * v[j] * v[j];
    }
    let kappa = 2.0 * q * c;
    let mut m = vec![0.0; n * n];
    let mut row_scale = 0.0;
    for j in 0..n {
        let row: Vec<f64> = (0..n).map(|k| kappa * l[j] * v[k]).collect();
        let mx = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row_scale += mx;
        for k in 0..n {
            m[j * n + k] = (row[k] - mx).exp();
        }
    }
    let (ld, sign) = log_det(m, n);
    if !(sign > 0.0) || !ld.is_finite() {
        return Err(Error::Numerical("transition kernel determinant lost positivity".into()));
    }
    let log_det_total = outer + row_scale + ld;
    Ok(
        0.5 * nf * nf.ln() - 0.5 * nf * (2.0 * PI).ln() - 0.5 * nf * (nf - 1.0) * c.ln() - 0.5 * nf * one_m_c2.ln()
            + log_dlam
            - log_dnu
            + log_det_total,
    )
}

/// `𝓗(λ) = N[Σλ_i²/2 − (2/N)Σ_{i<j} log|λ_j − λ_i|]`.
pub fn hamiltonian_energy(spectrum: &Spectrum) -> Result<f64> {
    let v = spectrum.values();
    let nf = v.len() as f64;
    let quad: f64 = v.iter().map(|x| 0.5 * x * x).sum();
    Ok(nf * quad - 2.0 * log_abs_vandermonde(v)?)
}
