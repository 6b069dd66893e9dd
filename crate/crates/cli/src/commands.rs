use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use wlab_core::archive::Archive;
use wlab_core::ensemble::{dbm_integrate_recording, ou_evolve, HermitianMatrix};
use wlab_core::equilibrium::{density_mass, levin_lubinsky_report, solve_endpoints, PotentialSpec};
use wlab_core::localwindow::{
    assumption_checks, equispaced_profile, extract_window, rescale_capped, tail_split_check_capped, WeightSpec,
};
use wlab_core::orthopoly::{
    density, derivative_norm_checks, gram_residual, kernel_trace, orthonormal_basis, reproducing_residual,
    stieltjes_identity_residual,
};
use wlab_core::report::{read_records, write_records, StatRecord};
use wlab_core::rng::StreamFactory;
use wlab_core::spectral::{counting_deviation, good_config_check, rigidity_check, short_scale_deviation, Spectrum};
use wlab_core::stats::Moments;
use wlab_core::universality::{
    default_eta, default_offsets, gap_tail, kernel_scan, level_repulsion_curve, max_deviation,
    semicircle_constants_check, two_point_estimator, vandermonde_statistic, wegner_statistic, Observable, OrthoKernel,
};
use wlab_core::{Complex64, Error, Result};

use crate::config::ExperimentConfig;

/// Files written by a command and the number of random streams it drew.
pub struct Outcome {
    pub outputs: Vec<PathBuf>,
    pub streams: u64,
    pub summary: String,
}

const SEMICIRCLE_ETA: f64 = 0.01;
const BUMP_RADIUS: f64 = 3.0;
const EVOLVE_TAG: u64 = 1;

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Path next to `output` with its extension replaced.
fn sibling(output: &Path, ext: &str) -> PathBuf {
    output.with_extension(ext)
}

fn generate(cfg: &ExperimentConfig) -> Result<Archive> {
    let mut a = match cfg.ensemble.as_str() {
        "gue" => Archive::generate_gue(cfg.n_dim, cfg.samples, cfg.seed)?,
        _ => Archive::generate(&cfg.ensemble_config()?, &cfg.entry_law)?,
    };
    if !cfg.label.is_empty() {
        a.label = cfg.label.clone();
    }
    Ok(a)
}

/// The input archive, or a freshly sampled one with its stream count.
fn input_archive(cfg: &ExperimentConfig) -> Result<(Archive, u64)> {
    match &cfg.archive {
        Some(p) => {
            let a = Archive::load(p)?;
            info!("loaded {} spectra of size {} from {}", a.len(), a.n, p.display());
            Ok((a, 0))
        }
        None => {
            info!(
                "sampling {} {} spectra of size {}",
                cfg.samples, cfg.ensemble, cfg.n_dim
            );
            let a = generate(cfg)?;
            Ok((a, cfg.samples as u64))
        }
    }
}

pub fn sample(cfg: &ExperimentConfig) -> Result<Outcome> {
    let a = generate(cfg)?;
    a.save(&cfg.output)?;
    Ok(Outcome {
        outputs: vec![cfg.output.clone()],
        streams: cfg.samples as u64,
        summary: format!("wrote {} spectra of size {} to {}", a.len(), a.n, cfg.output.display()),
    })
}

pub fn evolve(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (a, drawn) = input_archive(cfg)?;
    let noise = StreamFactory::new(cfg.seed).derive(EVOLVE_TAG);
    let steps = (cfg.t / cfg.dt).round() as usize;
    let evolved = a
        .samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| -> Result<Spectrum> {
            let mut rng = noise.stream(i as u64);
            match cfg.method.as_str() {
                "ou" => {
                    let mut h = HermitianMatrix::zeros(s.len());
                    for (j, &v) in s.values().iter().enumerate() {
                        h.set(j, j, Complex64::new(v, 0.0));
                    }
                    wlab_core::spectral::eigenvalues(&ou_evolve(&h, cfg.t, &mut rng)?)
                }
                _ => Ok(dbm_integrate_recording(s, cfg.dt, steps, steps.max(1), &mut rng)?
                    .last()
                    .clone()),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let label = if cfg.label.is_empty() {
        format!("{}-{}", a.label, cfg.method)
    } else {
        cfg.label.clone()
    };
    let out = Archive::new(a.n, label, evolved)?;
    out.save(&cfg.output)?;
    Ok(Outcome {
        outputs: vec![cfg.output.clone()],
        streams: drawn + a.len() as u64,
        summary: format!(
            "evolved {} spectra to t = {} by {}; wrote {}",
            out.len(),
            cfg.t,
            cfg.method,
            cfg.output.display()
        ),
    })
}

fn moments_json(m: &Moments) -> serde_json::Value {
    json!({ "mean": m.mean(), "stderr": m.stderr() })
}

pub fn semicircle(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (a, streams) = input_archive(cfg)?;
    let eta = cfg.eta.unwrap_or(SEMICIRCLE_ETA);
    let params = cfg.good_config_params();
    let rows = a
        .samples
        .par_iter()
        .map(|s| {
            let r = good_config_check(s, &params)?;
            Ok((
                counting_deviation(s),
                short_scale_deviation(s, eta, -1.5, 1.5),
                r.in_omega,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let counting: Moments = rows.iter().map(|r| r.0).collect();
    let short: Moments = rows.iter().map(|r| r.1).collect();
    let in_omega = rows.iter().filter(|r| r.2).count();
    let worst_count = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let value = json!({
        "N": a.n,
        "samples": a.len(),
        "eta": eta,
        "counting_deviation": moments_json(&counting),
        "counting_deviation_max": worst_count,
        "short_scale_deviation": moments_json(&short),
        "good_config_fraction": in_omega as f64 / a.len() as f64,
    });
    write_json(&cfg.output, &value)?;
    Ok(Outcome {
        outputs: vec![cfg.output.clone()],
        streams,
        summary: format!(
            "counting deviation {:.4} (max {:.4}), short-scale {:.4}, good configurations {}/{}",
            counting.mean(),
            worst_count,
            short.mean(),
            in_omega,
            a.len()
        ),
    })
}

pub fn rigidity(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (a, streams) = input_archive(cfg)?;
    let params = cfg.good_config_params();
    let rows = a
        .samples
        .par_iter()
        .map(|s| rigidity_check(s, &params))
        .collect::<Result<Vec<_>>>()?;
    let location: Moments = rows.iter().map(|r| r.0).collect();
    let pairs: Moments = rows.iter().map(|r| r.1).collect();
    let worst_pair = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let value = json!({
        "N": a.n,
        "samples": a.len(),
        "location_deviation": moments_json(&location),
        "pair_deviation": moments_json(&pairs),
        "pair_deviation_max": worst_pair,
    });
    write_json(&cfg.output, &value)?;
    Ok(Outcome {
        outputs: vec![cfg.output.clone()],
        streams,
        summary: format!(
            "location deviation {:.4}, normalized pair deviation {:.4} (max {:.4})",
            location.mean(),
            pairs.mean(),
            worst_pair
        ),
    })
}

fn centered_start(n_dim: usize, n: usize) -> usize {
    (n_dim / 2).saturating_sub(n / 2)
}

pub fn window(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (a, streams) = input_archive(cfg)?;
    let l = cfg.l_index.unwrap_or_else(|| centered_start(a.n, cfg.n));
    let w = extract_window(&a.samples[0], l, cfg.n)?;
    let r = rescale_capped(&w, cfg.b, cfg.cap)?;
    let tail = tail_split_check_capped(&w, cfg.b, cfg.cap);
    let weight = r.weight();
    let rec = orthonormal_basis(&weight, cfg.n)?;
    let rho = |x: f64| density(&rec, &weight, cfg.n, x).unwrap_or(f64::NAN);
    let checks = assumption_checks(&r, &rho, cfg.gamma, 60.0 * cfg.b);
    let value = json!({
        "window": r.dump(),
        "tail_split": tail,
        "assumptions": checks,
    });
    write_json(&cfg.output, &value)?;
    Ok(Outcome {
        outputs: vec![cfg.output.clone()],
        streams,
        summary: format!(
            "window L = {l}, n = {}: {} external points kept, (a2) {:.3e} vs {:.3e}, (a3) {:.3e} vs {:.3e}",
            cfg.n,
            r.left.len() + r.right.len(),
            checks.a2_sup,
            checks.a2_reference,
            checks.a3_integral,
            checks.a3_reference
        ),
    })
}

/// Window weight from an archive when one is given, otherwise the
/// equispaced external profile.
fn local_weight(cfg: &ExperimentConfig) -> Result<WeightSpec> {
    match &cfg.archive {
        Some(p) => {
            let a = Archive::load(p)?;
            let l = cfg.l_index.unwrap_or_else(|| centered_start(a.n, cfg.n));
            let w = extract_window(&a.samples[0], l, cfg.n)?;
            Ok(rescale_capped(&w, cfg.b, cfg.cap)?.weight())
        }
        None => equispaced_profile(cfg.n, cfg.rho0, cfg.b, cfg.cap),
    }
}

pub fn oplocal(cfg: &ExperimentConfig) -> Result<Outcome> {
    let weight = local_weight(cfg)?;
    let n = cfg.n;
    let rec = orthonormal_basis(&weight, n)?;
    let grid: Vec<f64> = (0..20).map(|i| -0.95 + 0.1 * i as f64).collect();
    let (op73, op51) = derivative_norm_checks(&rec, &weight, n)?;
    let eta = cfg.eta.unwrap_or(0.1);
    let rho0 = density(&rec, &weight, n, 0.0)?;
    let k = OrthoKernel {
        rec: &rec,
        weight: &weight,
        n,
    };
    let scan = kernel_scan(&k, 0.0, n as f64 * rho0, &default_offsets())?;
    let value = json!({
        "n": n,
        "external_points": weight.roots.len(),
        "gram_residual": gram_residual(&rec, n),
        "kernel_trace": kernel_trace(&rec, n)?,
        "reproducing_residual": reproducing_residual(&rec, &weight, n, &grid)?,
        "derivative_norm_discrepancy": op73,
        "derivative_norm": op51,
        "stieltjes_eta": eta,
        "stieltjes_residual": stieltjes_identity_residual(&rec, &weight, n, Complex64::new(0.0, eta))?,
        "density_at_zero": rho0,
        "sine_kernel_deviation": max_deviation(&scan),
    });
    write_json(&cfg.output, &value)?;
    let rec_path = sibling(&cfg.output, "recurrence.csv");
    rec.write_csv(BufWriter::new(File::create(&rec_path)?))?;
    let scan_path = sibling(&cfg.output, "kernel.csv");
    wlab_core::universality::write_kernel_scan(&scan, BufWriter::new(File::create(&scan_path)?))?;
    Ok(Outcome {
        outputs: vec![cfg.output.clone(), rec_path, scan_path],
        streams: 0,
        summary: format!(
            "n = {n}: Gram residual {:.2e}, sine-kernel deviation {:.4}",
            gram_residual(&rec, n),
            max_deviation(&scan)
        ),
    })
}

pub fn equilibrium(cfg: &ExperimentConfig) -> Result<Outcome> {
    let weight = local_weight(cfg)?;
    let pot = PotentialSpec::point_charge(weight.clone())?;
    let support = solve_endpoints(&pot)?;
    let mass = density_mass(&pot, &support)?;
    let rec = orthonormal_basis(&weight, cfg.n)?;
    let quarter = 0.25 * (support.b - support.a);
    let ll = levin_lubinsky_report(
        &pot,
        &support,
        &rec,
        &weight,
        (support.a + quarter, support.b - quarter),
    )?;
    let value = json!({
        "n": cfg.n,
        "support": [support.a, support.b],
        "residuals": [support.residuals.0, support.residuals.1],
        "mass": mass,
        "report": ll,
    });
    write_json(&cfg.output, &value)?;
    Ok(Outcome {
        outputs: vec![cfg.output.clone()],
        streams: 0,
        summary: format!("support [{:.6}, {:.6}], mass {:.6}", support.a, support.b, mass),
    })
}

pub fn sine(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (a, streams) = input_archive(cfg)?;
    let obs = Observable::bump(BUMP_RADIUS)?;
    let est = two_point_estimator(&a, cfg.e0, cfg.delta, &obs)?;
    write_json(&cfg.output, &est)?;
    Ok(Outcome {
        outputs: vec![cfg.output.clone()],
        streams,
        summary: format!(
            "estimate {:.4} ± {:.4}, sine-kernel reference {:.4}",
            est.value, est.stderr, est.reference
        ),
    })
}

pub fn repulsion(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (a, streams) = input_archive(cfg)?;
    let curve = level_repulsion_curve(&a, cfg.e0, &cfg.eps_grid, cfg.band)?;
    let wegner = wegner_statistic(&a, cfg.e0, cfg.eps_grid[0], cfg.band)?;
    let gaps = gap_tail(&a, cfg.e0, &cfg.k_grid)?;
    let value = json!({
        "E0": cfg.e0,
        "band": cfg.band,
        "curve": curve,
        "wegner": wegner,
        "gap_tail": gaps,
    });
    write_json(&cfg.output, &value)?;
    let curve_path = sibling(&cfg.output, "curve.csv");
    wlab_core::universality::write_curve(&curve.points(), BufWriter::new(File::create(&curve_path)?))?;
    Ok(Outcome {
        outputs: vec![cfg.output.clone(), curve_path],
        streams,
        summary: format!(
            "fitted exponent {:.3} in [{:.3}, {:.3}] from {} bins",
            curve.fitted_exponent, curve.exponent_interval.0, curve.exponent_interval.1, curve.bins_used
        ),
    })
}

pub fn vandermonde(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (a, streams) = input_archive(cfg)?;
    let eta = cfg.eta.unwrap_or_else(|| default_eta(a.n));
    let values = a
        .samples
        .par_iter()
        .map(|s| vandermonde_statistic(s, eta))
        .collect::<Result<Vec<_>>>()?;
    let m: Moments = values.iter().copied().collect();
    let value = json!({
        "N": a.n,
        "samples": a.len(),
        "eta": eta,
        "statistic": moments_json(&m),
        "semicircle_constants": semicircle_constants_check(),
    });
    write_json(&cfg.output, &value)?;
    Ok(Outcome {
        outputs: vec![cfg.output.clone()],
        streams,
        summary: format!("statistic {:.5} ± {:.5} at eta = {eta:.3e}", m.mean(), m.stderr()),
    })
}

/// Merges record files and prints one line per record.
pub fn report(cfg: &ExperimentConfig, inputs: &[PathBuf]) -> Result<Outcome> {
    let mut all: Vec<StatRecord> = Vec::new();
    for p in inputs {
        all.extend(read_records(BufReader::new(File::open(p)?))?);
    }
    let mut lines = Vec::with_capacity(all.len());
    for r in &all {
        lines.push(format!(
            "{} {} N={} samples={} value={} threshold={}",
            if r.pass { "PASS" } else { "FAIL" },
            r.statistic,
            r.n,
            r.samples,
            r.value,
            r.threshold
        ));
    }
    write_records(&all, BufWriter::new(File::create(&cfg.output)?))?;
    let failed = all.iter().filter(|r| !r.pass).count();
    lines.push(format!("{} records, {failed} failing", all.len()));
    Ok(Outcome {
        outputs: vec![cfg.output.clone()],
        streams: 0,
        summary: lines.join("\n"),
    })
}
