//! Equilibrium measure of a convex external potential on `[-1, 1]`:
//! support endpoints, density, and the Levin–Lubinsky condition scan.
//!
//! The potential convention is `V = U`; the Levin–Lubinsky potential is
//! `Q = V/2`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localwindow::WeightSpec;
use crate::orthopoly::{density, Recurrence};
use crate::quadrature::{chebyshev_t_nodes, chebyshev_u_rule};

pub const MAX_NEWTON_ITERATIONS: usize = 200;
/// Chebyshev nodes used for analytic potentials.
pub const ANALYTIC_NODES: usize = 128;
const RESIDUAL_TOL: f64 = 1e-13;

pub type VPrime = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum PotentialKind {
    /// `V = U = −(2/n)Σ log|x − ỹ_k|`.
    PointCharge(WeightSpec),
    /// `V′` on an open domain; `±∞` bounds are allowed.
    Analytic { v_prime: VPrime, domain: (f64, f64) },
}

impl fmt::Debug for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PointCharge(w) => f.debug_tuple("PointCharge").field(w).finish(),
            Self::Analytic { domain, .. } => f.debug_struct("Analytic").field("domain", domain).finish(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub convexity_hint: bool,
}

impl PotentialSpec {
    pub fn point_charge(weight: WeightSpec) -> Result<Self> {
        if weight.roots.iter().any(|r| r.abs() < 1.0) {
            return Err(Error::Domain("point charges must satisfy |y| >= 1".into()));
        }
        Ok(Self {
            kind: PotentialKind::PointCharge(weight),
            convexity_hint: true,
        })
    }

    pub fn analytic(v_prime: VPrime, domain: (f64, f64)) -> Result<Self> {
        if !(domain.0 < domain.1) {
            return Err(Error::InvalidConfig("empty potential domain".into()));
        }
        Ok(Self {
            kind: PotentialKind::Analytic { v_prime, domain },
            convexity_hint: true,
        })
    }

    /// `V(s) = s²/2`, whose equilibrium measure is the semicircle law.
    pub fn quadratic() -> Self {
        Self {
            kind: PotentialKind::Analytic {
                v_prime: Arc::new(|s| s),
                domain: (f64::NEG_INFINITY, f64::INFINITY),
            },
            convexity_hint: true,
        }
    }

    pub fn v_prime(&self, s: f64) -> f64 {
        match &self.kind {
            PotentialKind::PointCharge(w) => w.potential_derivative(s),
            PotentialKind::Analytic { v_prime, .. } => v_prime(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportInterval {
    pub a: f64,
    pub b: f64,
    pub residuals: (f64, f64),
}

/// Left-hand sides of the two endpoint equations, each shifted so that zero
/// is the solution: `∫V′/√((s−a)(b−s)) ds` and
/// `(2π)⁻¹∫V′s/√((s−a)(b−s)) ds − 1`.
pub fn endpoint_residuals(pot: &PotentialSpec, a: f64, b: f64) -> (f64, f64) {
    match &pot.kind {
        PotentialKind::PointCharge(w) => point_charge_residuals(w, a, b).0,
        PotentialKind::Analytic { v_prime, .. } => {
            let nodes = chebyshev_t_nodes(ANALYTIC_NODES, a, b);
            let h = PI / ANALYTIC_NODES as f64;
            let (mut f1, mut f2) = (0.0, 0.0);
            for s in nodes {
                let v = v_prime(s);
                f1 += h * v;
                f2 += h * v * s;
            }
            (f1, f2 / (2.0 * PI) - 1.0)
        }
    }
}

/// The algebraic sums replacing the singular integrals, with their
/// Jacobian in `(a, b)`. Charges left of `a` enter with `+`, right of `b`
/// with `−`.
fn point_charge_residuals(w: &WeightSpec, a: f64, b: f64) -> ((f64, f64), [[f64; 2]; 2]) {
    let nf = w.n as f64;
    let (mut f1, mut f2) = (0.0, 0.0);
    let mut jac = [[0.0; 2]; 2];
    for &y in &w.roots {
        let sign = if y <= a { 1.0 } else { -1.0 };
        let q = (a - y) * (b - y);
        let r = q.sqrt().recip();
        let r3 = r * r * r;
        let (da, db) = (-0.5 * r3 * (b - y), -0.5 * r3 * (a - y));
        f1 += sign * r;
        f2 += sign * y * r + 1.0;
        jac[0][0] += sign * da;
        jac[0][1] += sign * db;
        jac[1][0] += sign * y * da;
        jac[1][1] += sign * y * db;
    }
    for row in jac.iter_mut() {
        for v in row.iter_mut() {
            *v /= nf;
        }
    }
    ((f1 / nf, f2 / nf + 1.0), jac)
}

fn norm2(r: (f64, f64)) -> f64 {
    r.0.hypot(r.1)
}

/// Support `[a, b]` of the equilibrium measure.
///
/// Point charges: damped Newton in `(log(a+1), log(1−b))`, started at
/// `(−1 + 1/n, 1 − 1/n)`; the step is halved while the residual grows or
/// the interval degenerates. Analytic potentials: the same iteration in
/// `(a, b)` with a finite-difference Jacobian.
pub fn solve_endpoints(pot: &PotentialSpec) -> Result<SupportInterval> {
    match &pot.kind {
        PotentialKind::PointCharge(w) => solve_point_charge(w),
        PotentialKind::Analytic { domain, .. } => solve_analytic(pot, *domain),
    }
}

fn solve_point_charge(w: &WeightSpec) -> Result<SupportInterval> {
    if w.roots.is_empty() {
        return Err(Error::Domain(
            "a weight without charges does not confine the measure".into(),
        ));
    }
    let has_left = w.roots.iter().any(|&y| y <= -1.0);
    let has_right = w.roots.iter().any(|&y| y >= 1.0);
    if !(has_left && has_right) {
        return Err(Error::Convergence(
            "charges on one side only, system cannot be bracketed".into(),
        ));
    }
    let nf = w.n as f64;
    let mut u = (1.0 / nf).ln();
    let mut v = (1.0 / nf).ln();
    let ab = |u: f64, v: f64| (-1.0 + u.exp(), 1.0 - v.exp());
    let (a0, b0) = ab(u, v);
    let (mut r, mut jac) = point_charge_residuals(w, a0, b0);
    for _ in 0..MAX_NEWTON_ITERATIONS {
        if norm2(r) < RESIDUAL_TOL {
            let (a, b) = ab(u, v);
            return Ok(SupportInterval { a, b, residuals: r });
        }
        // chain rule: da/du = e^u, db/dv = −e^v
        let (eu, ev) = (u.exp(), -v.exp());
        let j = [[jac[0][0] * eu, jac[0][1] * ev], [jac[1][0] * eu, jac[1][1] * ev]];
        let (du, dv) = solve2(j, r)?;
        let mut t = 1.0;
        loop {
            let (nu, nv) = (u - t * du, v - t * dv);
            let (a, b) = ab(nu, nv);
            if a < b && a > -1.0 && b < 1.0 {
                let (nr, nj) = point_charge_residuals(w, a, b);
                if norm2(nr).is_finite() && norm2(nr) < norm2(r) {
                    u = nu;
                    v = nv;
                    r = nr;
                    jac = nj;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-12 {
                let (a, b) = ab(u, v);
                if norm2(r) < 1e-10 {
                    return Ok(SupportInterval { a, b, residuals: r });
                }
                return Err(Error::Convergence(format!(
                    "endpoint Newton stalled at ({a}, {b}) with residual {:e}",
                    norm2(r)
                )));
            }
        }
    }
    Err(Error::Convergence(format!(
        "endpoint Newton did not converge in {MAX_NEWTON_ITERATIONS} iterations"
    )))
}

fn solve_analytic(pot: &PotentialSpec, domain: (f64, f64)) -> Result<SupportInterval> {
    let inside = |a: f64, b: f64| a < b && a > domain.0 && b < domain.1;
    let (mut a, mut b) = initial_interval(domain);
    let mut r = endpoint_residuals(pot, a, b);
    for _ in 0..MAX_NEWTON_ITERATIONS {
        if norm2(r) < RESIDUAL_TOL {
            return Ok(SupportInterval { a, b, residuals: r });
        }
        let h = 1e-7 * (b - a);
        let ra = endpoint_residuals(pot, a + h, b);
        let rb = endpoint_residuals(pot, a, b + h);
        let j = [
            [(ra.0 - r.0) / h, (rb.0 - r.0) / h],
            [(ra.1 - r.1) / h, (rb.1 - r.1) / h],
        ];
        let (da, db) = solve2(j, r)?;
        let mut t = 1.0;
        loop {
            let (na, nb) = (a - t * da, b - t * db);
            if inside(na, nb) {
                let nr = endpoint_residuals(pot, na, nb);
                if norm2(nr) < norm2(r) {
                    a = na;
                    b = nb;
                    r = nr;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-12 {
                if norm2(r) < 1e-10 {
                    return Ok(SupportInterval { a, b, residuals: r });
                }
                return Err(Error::Convergence(format!(
                    "endpoint Newton stalled at ({a}, {b}) with residual {:e}",
                    norm2(r)
                )));
            }
        }
    }
    Err(Error::Convergence(format!(
        "endpoint Newton did not converge in {MAX_NEWTON_ITERATIONS} iterations"
    )))
}

/// `(−1, 1)` when the domain allows it, otherwise the middle 80% of a
/// finite domain.
fn initial_interval(domain: (f64, f64)) -> (f64, f64) {
    if domain.0 < -1.0 && domain.1 > 1.0 {
        return (-1.0, 1.0);
    }
    let lo = domain.0.max(-1e3);
    let hi = domain.1.min(1e3);
    let c = 0.5 * (lo + hi);
    let h = 0.4 * (hi - lo);
    (c - h, c + h)
}

fn solve2(j: [[f64; 2]; 2], r: (f64, f64)) -> Result<(f64, f64)> {
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    if !(det.is_finite() && det != 0.0) {
        return Err(Error::Convergence("singular endpoint Jacobian".into()));
    }
    Ok((
        (j[1][1] * r.0 - j[0][1] * r.1) / det,
        (j[0][0] * r.1 - j[1][0] * r.0) / det,
    ))
}

/// Equilibrium density `g(x)` for `a < x < b`.
///
/// Writing `V′(s)/(s−x) = [V′(s) − V′(x)]/(s−x) + V′(x)/(s−x)`, the second
/// principal value vanishes against the arcsine weight, so only the regular
/// difference quotient is integrated. For point charges that integral is
/// available exactly.
pub fn equilibrium_density(pot: &PotentialSpec, support: &SupportInterval, x: f64) -> Result<f64> {
    let (a, b) = (support.a, support.b);
    if !(x - a > 1e-8 && b - x > 1e-8) {
        return Err(Error::Domain(format!("x = {x} is not inside ({a}, {b}) by 1e-8")));
    }
    let outer = ((x - a) * (b - x)).sqrt() / (2.0 * PI * PI);
    let inner = match &pot.kind {
        PotentialKind::PointCharge(w) => {
            let s: f64 = w
                .roots
                .iter()
                .map(|&y| {
                    let sign = if y <= a { 1.0 } else { -1.0 };
                    sign / ((x - y) * ((a - y) * (b - y)).sqrt())
                })
                .sum();
            2.0 * PI * s / w.n as f64
        }
        PotentialKind::Analytic { v_prime, .. } => {
            let vx = v_prime(x);
            let h = PI / ANALYTIC_NODES as f64;
            chebyshev_t_nodes(ANALYTIC_NODES, a, b)
                .into_iter()
                .map(|s| {
                    if (s - x).abs() < 1e-7 * (b - a) {
                        // difference quotient at the node: central derivative
                        let d = 1e-5 * (b - a);
                        h * (v_prime(x + d) - v_prime(x - d)) / (2.0 * d)
                    } else {
                        h * (v_prime(s) - vx) / (s - x)
                    }
                })
                .sum()
        }
    };
    Ok(outer * inner)
}

/// `∫_a^b g` by second-kind Chebyshev quadrature.
pub fn density_mass(pot: &PotentialSpec, support: &SupportInterval) -> Result<f64> {
    let (nodes, weights) = chebyshev_u_rule(200, support.a, support.b);
    let mut s = 0.0;
    for (x, w) in nodes.into_iter().zip(weights) {
        let root = ((x - support.a) * (support.b - x)).sqrt();
        s += w * equilibrium_density(pot, support, x)? / root;
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        values.fold(
            Range {
                min: f64::INFINITY,
                max: f64::NEG_INFINITY,
            },
            |r, v| Range {
                min: r.min.min(v),
                max: r.max.max(v),
            },
        )
    }
}

/// The four quantities behind the Levin–Lubinsky conditions on `J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LlConditions {
    /// Equilibrium density on `J`.
    pub a: Range,
    /// Modulus of continuity of `Q′ = U′/2` at scale [`MODULUS_DELTA`].
    pub b: f64,
    /// `ρ_n` on `J`.
    pub c: Range,
    /// `max |ρ_n(E)/ρ_n(E + x/n) − 1|` over `E ∈ J`, `|x| ≤ 3`.
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub a: f64,
    pub b: f64,
    pub residuals: (f64, f64),
    pub ll_conditions: LlConditions,
}

pub const MODULUS_DELTA: f64 = 0.05;
const J_GRID: usize = 161;

/// Modulus of continuity `sup_{|x−x′|≤δ} |Q′(x) − Q′(x′)|` over `J` on a
/// grid of spacing `δ/10`, maximized over a family of weights.
pub fn q_prime_modulus(family: &[WeightSpec], j: (f64, f64), delta: f64) -> f64 {
    let h = delta / 10.0;
    let m = ((j.1 - j.0) / h).ceil() as usize;
    let mut worst: f64 = 0.0;
    for w in family {
        let q: Vec<f64> = (0..=m)
            .map(|i| 0.5 * w.potential_derivative((j.0 + i as f64 * h).min(j.1)))
            .collect();
        for i in 0..q.len() {
            for k in 1..=10 {
                if i + k < q.len() {
                    worst = worst.max((q[i + k] - q[i]).abs());
                }
            }
        }
    }
    worst
}

pub fn levin_lubinsky_report(
    pot: &PotentialSpec,
    support: &SupportInterval,
    rec: &Recurrence,
    weight: &WeightSpec,
    j: (f64, f64),
) -> Result<EquilibriumReport> {
    if !(support.a < j.0 && j.0 < j.1 && j.1 < support.b) {
        return Err(Error::Domain(format!(
            "J = [{}, {}] is not interior to ({}, {})",
            j.0, j.1, support.a, support.b
        )));
    }
    let n = weight.n;
    let grid: Vec<f64> = (0..J_GRID)
        .map(|i| j.0 + (j.1 - j.0) * i as f64 / (J_GRID - 1) as f64)
        .collect();
    let g: Vec<f64> = grid
        .iter()
        .map(|&x| equilibrium_density(pot, support, x))
        .collect::<Result<_>>()?;
    let rho: Vec<f64> = grid
        .iter()
        .map(|&x| density(rec, weight, n, x))
        .collect::<Result<_>>()?;
    let mut d: f64 = 0.0;
    for (i, &e) in grid.iter().enumerate() {
        for k in -6..=6 {
            let y = e + 0.5 * k as f64 / n as f64;
            d = d.max((rho[i] / density(rec, weight, n, y)? - 1.0).abs());
        }
    }
    Ok(EquilibriumReport {
        a: support.a,
        b: support.b,
        residuals: support.residuals,
        ll_conditions: LlConditions {
            a: Range::of(g.into_iter()),
            b: q_prime_modulus(std::slice::from_ref(weight), j, MODULUS_DELTA),
            c: Range::of(rho.into_iter()),
            d,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localwindow::equispaced_profile;
    use crate::orthopoly::orthonormal_basis;
    use crate::spectral::semicircle_density;

    #[test]
    fn quadratic_potential_gives_semicircle() {
        let pot = PotentialSpec::quadratic();
        let s = solve_endpoints(&pot).unwrap();
        assert!((s.a + 2.0).abs() < 1e-10 && (s.b - 2.0).abs() < 1e-10, "{s:?}");
        for i in 1..100 {
            let x = -2.0 + 0.04 * i as f64;
            let g = equilibrium_density(&pot, &s, x).unwrap();
            assert!((g - semicircle_density(x)).abs() < 1e-8, "{x}");
        }
        assert!((equilibrium_density(&pot, &s, 0.0).unwrap() - 1.0 / PI).abs() < 1e-12);
        assert!((density_mass(&pot, &s).unwrap() - 1.0).abs() < 1e-6);
        assert!(equilibrium_density(&pot, &s, s.b).is_err());
    }

    #[test]
    fn symmetric_charges_give_symmetric_support() {
        let w = equispaced_profile(32, 0.5, 2.0, 100_000).unwrap();
        let pot = PotentialSpec::point_charge(w).unwrap();
        let s = solve_endpoints(&pot).unwrap();
        assert!((s.a + s.b).abs() < 1e-10, "{s:?}");
        assert!(-1.0 < s.a && s.b < 1.0);
        assert!(norm2(s.residuals) <= 1e-9);
        assert!((density_mass(&pot, &s).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn asymmetric_charges_still_converge() {
        let mut roots: Vec<f64> = (0..40).map(|k| -1.0 - k as f64 * 0.05).collect();
        roots.extend((0..60).map(|k| 1.0 + k as f64 * 0.03));
        let pot = PotentialSpec::point_charge(WeightSpec::new(50, roots).unwrap()).unwrap();
        let s = solve_endpoints(&pot).unwrap();
        let (f1, f2) = endpoint_residuals(&pot, s.a, s.b);
        assert!(f1.abs() <= 1e-9 && f2.abs() <= 1e-9);
    }

    #[test]
    fn one_sided_charges_are_rejected() {
        let w = WeightSpec::new(4, vec![1.0, 1.5]).unwrap();
        let pot = PotentialSpec::point_charge(w).unwrap();
        assert!(matches!(solve_endpoints(&pot), Err(Error::Convergence(_))));
    }

    #[test]
    fn endpoints_approach_the_interval_ends() {
        let gaps: Vec<f64> = [32usize, 64, 128, 256]
            .iter()
            .map(|&n| {
                let pot = PotentialSpec::point_charge(equispaced_profile(n, 0.5, 2.0, 100_000).unwrap()).unwrap();
                let s = solve_endpoints(&pot).unwrap();
                (s.a + 1.0).abs().max((s.b - 1.0).abs())
            })
            .collect();
        assert!(gaps.windows(2).all(|p| p[1] < p[0]), "{gaps:?}");
    }

    #[test]
    fn equispaced_profile_density_is_bounded() {
        let pot = PotentialSpec::point_charge(equispaced_profile(64, 0.5, 2.0, 100_000).unwrap()).unwrap();
        let s = solve_endpoints(&pot).unwrap();
        let g: Vec<f64> = (0..=90)
            .map(|i| equilibrium_density(&pot, &s, -0.9 + 0.02 * i as f64).unwrap())
            .collect();
        let r = Range::of(g.into_iter());
        assert!(r.min > 0.0 && r.max / r.min <= 1.5, "{r:?}");
    }

    #[test]
    fn levin_lubinsky_conditions_for_equispaced_profile() {
        let w = equispaced_profile(64, 0.5, 2.0, 1000).unwrap();
        let pot = PotentialSpec::point_charge(w.clone()).unwrap();
        let s = solve_endpoints(&pot).unwrap();
        let rec = orthonormal_basis(&w, 64).unwrap();
        let rep = levin_lubinsky_report(&pot, &s, &rec, &w, (-0.8, 0.8)).unwrap();
        let ll = rep.ll_conditions;
        assert!(ll.d <= 0.1, "{ll:?}");
        assert!(ll.c.min >= 0.3 && ll.c.max <= 1.2, "{ll:?}");
        assert!(ll.a.min > 0.0);
        assert!(levin_lubinsky_report(&pot, &s, &rec, &w, (-0.8, 1.5)).is_err());
        let json = serde_json::to_value(rep).unwrap();
        assert!(json["ll_conditions"]["c"]["min"].is_number());
    }

    #[test]
    fn flat_potential_has_zero_modulus() {
        assert_eq!(
            q_prime_modulus(&[WeightSpec::unit(8), WeightSpec::unit(16)], (-0.8, 0.8), 0.05),
            0.0
        );
    }
}
