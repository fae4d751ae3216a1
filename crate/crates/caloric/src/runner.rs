//! Batch pipeline: initial-data synthesis, flow execution, diagnostics
//! export, and a deterministic run manifest.
//!
//! Execution is serial; with a fixed config (including the RNG seed) every
//! produced file and every summary scalar is bit-reproducible, and the
//! manifest deliberately records no timing information.

use crate::config::{DiagnosticsConfig, RunConfig};
use crate::diagnostics::{
    envelope_iterate, field_envelope, sigma_index, EnvelopeFamily, DEFAULT_DELTA,
};
use crate::error::{Error, Result};
use crate::gauge::{build_caloric_gauge, GaugeOptions, KeepLevels};
use crate::heatflow::{
    decay_rate, decay_window, dirichlet_energy, frequency_decay_profile, heat_solve, map_seminorm,
    HeatOptions, HeatTrajectory,
};
use crate::io::{
    write_envelope_csv, write_field_dump, write_gauge_manifest_csv, write_norms_csv,
    write_series_csv, write_trajectory_index_csv,
};
use crate::slflow::{gauged_residual, helix_state, max_stable_dt, sl_solve, sl_step, sup_dist, SlOptions};
use crate::spectral::{heat_semigroup, Grid2, ScalarField, VecField};
use crate::target::{TargetKind, TargetManifold};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Tangent amplitudes beyond this are rejected as cut-locus risks; the unit
/// spheres in every target have injectivity radius pi.
const MAX_TANGENT_AMPLITUDE: f64 = 1.5;

/// Build the configured initial map and report its gradient L2 norm.
pub fn initial_data(
    cfg: &RunConfig,
    grid: &Arc<Grid2>,
    target: &Arc<TargetManifold>,
) -> Result<(VecField, f64)> {
    let id = &cfg.initial_data;
    let u = match id.family.as_str() {
        "bump" => {
            let amp = id.amplitude.unwrap_or(0.0);
            let width = id.width.unwrap_or(1.0);
            let l = grid.side_length();
            let center = id.center.unwrap_or([0.5 * l, 0.5 * l]);
            if amp >= MAX_TANGENT_AMPLITUDE {
                return Err(Error::Config(format!(
                    "bump amplitude {amp} risks crossing the cut locus (limit {MAX_TANGENT_AMPLITUDE})"
                )));
            }
            let kappa = 1.0 / (width * width);
            let two_pi = 2.0 * std::f64::consts::PI;
            let profile = |x: f64, y: f64| {
                let px = (two_pi * (x - center[0]) / l).cos();
                let py = (two_pi * (y - center[1]) / l).cos();
                amp * (kappa * (px + py - 2.0)).exp()
            };
            tangent_graph(target, grid, |x, y| {
                let f = profile(x, y);
                (0.8 * f, 0.6 * f)
            })
        }
        "helix" => {
            let theta = id.theta.unwrap_or(0.5);
            let k = id.wavenumber.unwrap_or(1);
            helix_state(grid, theta, k, 0.0)
        }
        "random" => {
            let seed = id.seed.unwrap_or(0);
            let amp = id.amplitude.unwrap_or(0.05);
            let smoothing = id.smoothing.unwrap_or(0.25);
            if amp >= MAX_TANGENT_AMPLITUDE {
                return Err(Error::Config(format!(
                    "random amplitude {amp} risks crossing the cut locus (limit {MAX_TANGENT_AMPLITUDE})"
                )));
            }
            let (a, b) = random_coefficients(grid, seed, smoothing, amp)?;
            let mut u = VecField::zeros(grid, target.ambient_dim);
            let q = &target.base_point;
            let e0 = &target.reference_frame[0];
            let e1 = &target.reference_frame[1];
            let mut p = vec![0.0; target.ambient_dim];
            for idx in 0..grid.n_points() {
                let (ca, cb) = (a.data[idx], b.data[idx]);
                let tangent: Vec<f64> =
                    e0.iter().zip(e1).map(|(u0, u1)| ca * u0 + cb * u1).collect();
                target.exp_map_into(q, &tangent, &mut p);
                u.point_mut(idx).copy_from_slice(&p);
            }
            u
        }
        other => return Err(Error::Config(format!("unknown initial data family `{other}`"))),
    };
    let grad = map_seminorm(&u, 1);
    Ok((u, grad))
}

/// Exponential graph over the base point with tangent coefficients given by
/// a closure of the coordinates.
fn tangent_graph<F: Fn(f64, f64) -> (f64, f64)>(
    target: &TargetManifold,
    grid: &Arc<Grid2>,
    coeff: F,
) -> VecField {
    let q = &target.base_point;
    let e0 = &target.reference_frame[0];
    let e1 = &target.reference_frame[1];
    let mut u = VecField::zeros(grid, target.ambient_dim);
    let mut p = vec![0.0; target.ambient_dim];
    for j in 0..grid.n() {
        for i in 0..grid.n() {
            let (a, b) = coeff(grid.coord(i), grid.coord(j));
            let tangent: Vec<f64> = e0.iter().zip(e1).map(|(u0, u1)| a * u0 + b * u1).collect();
            target.exp_map_into(q, &tangent, &mut p);
            u.point_mut(j * grid.n() + i).copy_from_slice(&p);
        }
    }
    u
}

/// Seeded white noise, mollified by the heat semigroup and rescaled to the
/// requested sup amplitude.
fn random_coefficients(
    grid: &Arc<Grid2>,
    seed: u64,
    smoothing: f64,
    amp: f64,
) -> Result<(ScalarField, ScalarField)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let make = |rng: &mut rand_chacha::ChaCha8Rng| -> Result<ScalarField> {
        let mut f = ScalarField::zeros(grid);
        for v in f.data.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        if smoothing > 0.0 {
            f = heat_semigroup(&f, smoothing)?;
        }
        Ok(f)
    };
    let mut a = make(&mut rng)?;
    let mut b = make(&mut rng)?;
    let sup = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x * x + y * y).sqrt())
        .fold(0.0f64, f64::max);
    if sup > 0.0 {
        let scale = amp / sup;
        for v in a.data.iter_mut() {
            *v *= scale;
        }
        for v in b.data.iter_mut() {
            *v *= scale;
        }
    }
    Ok((a, b))
}

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct TargetEcho {
    pub name: String,
    pub base_point: Vec<f64>,
    pub reference_frame: Vec<Vec<f64>>,
}

/// The deterministic record of one run. Wall-clock and host information are
/// intentionally absent so that identical configs produce identical bytes.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub crate_version: String,
    pub config: RunConfig,
    pub target: TargetEcho,
    pub files: Vec<FileEntry>,
    pub summary: BTreeMap<String, f64>,
}

struct RunContext {
    out_dir: PathBuf,
    files: Vec<(String, PathBuf)>,
    summary: BTreeMap<String, f64>,
}

impl RunContext {
    fn record(&mut self, name: &str) -> PathBuf {
        let path = self.out_dir.join(name);
        self.files.push((name.to_string(), path.clone()));
        path
    }

    fn put(&mut self, key: &str, value: f64) {
        self.summary.insert(key.to_string(), value);
    }
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    let mut h = Sha256::new();
    h.update(&bytes);
    Ok(hex::encode(h.finalize()))
}

/// Execute the configured pipeline and write every artifact plus the
/// manifest into `out_dir`.
pub fn run(cfg: &RunConfig, out_dir: &Path) -> Result<RunManifest> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let kind = cfg.target_kind()?;
    let target = Arc::new(TargetManifold::new(kind));
    let grid = Grid2::new(cfg.grid.n, cfg.grid.length);
    let mut ctx = RunContext {
        out_dir: out_dir.to_path_buf(),
        files: Vec::new(),
        summary: BTreeMap::new(),
    };

    let (u0, grad_l2) = initial_data(cfg, &grid, &target)?;
    ctx.put("initial_gradient_l2", grad_l2);
    ctx.put("initial_energy", dirichlet_energy(&u0));
    if cfg.output.dump_every > 0 {
        write_field_dump(&ctx.record("initial.cslf"), &u0)?;
    }

    let final_state: Option<VecField> = match cfg.flow.as_str() {
        "heat" => {
            let traj = run_heat(cfg, &target, &u0, &mut ctx)?;
            traj.maps.last().cloned()
        }
        "sl" => Some(run_sl(cfg, &target, &u0, &mut ctx)?),
        "gauge" => {
            let traj = heat_solve(&target, &u0, &cfg.heat.to_options())?;
            run_gauge(cfg, &traj, &mut ctx)?;
            traj.maps.last().cloned()
        }
        "full" => {
            let final_sl = run_sl(cfg, &target, &u0, &mut ctx)?;
            let traj = run_heat(cfg, &target, &u0, &mut ctx)?;
            run_gauge(cfg, &traj, &mut ctx)?;
            if cfg.diagnostics.residual_suite {
                run_gauged_residual(cfg, &target, &u0, &mut ctx)?;
            }
            Some(final_sl)
        }
        other => return Err(Error::Config(format!("unknown flow `{other}`"))),
    };

    run_envelopes(&cfg.diagnostics, &u0, final_state.as_ref(), &mut ctx)?;

    let norms = vec![
        ("initial_gradient_l2".to_string(), grad_l2),
        ("initial_energy".to_string(), dirichlet_energy(&u0)),
        (
            "initial_supdist_Q".to_string(),
            sup_dist(&u0, &target.base_point),
        ),
    ];
    write_norms_csv(&ctx.record("norms.csv"), &norms)?;

    let mut files = Vec::with_capacity(ctx.files.len());
    for (name, path) in &ctx.files {
        files.push(FileEntry { name: name.clone(), sha256: sha256_file(path)? });
    }
    files.sort_by(|a, b| a.name.cmp(&b.name));

    let manifest = RunManifest {
        format_version: 1,
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        target: TargetEcho {
            name: kind.name().to_string(),
            base_point: target.base_point.clone(),
            reference_frame: target.reference_frame.clone(),
        },
        files,
        summary: ctx.summary,
    };
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Config(format!("manifest serialization: {e}")))?;
    // atomic publish: write to a temp name, then rename into place
    let tmp = out_dir.join("manifest.json.tmp");
    std::fs::write(&tmp, json.as_bytes())?;
    std::fs::rename(&tmp, out_dir.join("manifest.json"))?;
    Ok(manifest)
}

fn run_heat(
    cfg: &RunConfig,
    target: &Arc<TargetManifold>,
    u0: &VecField,
    ctx: &mut RunContext,
) -> Result<HeatTrajectory> {
    let traj = heat_solve(target, u0, &cfg.heat.to_options())?;
    let q = &target.base_point;
    let rows: Vec<(usize, f64, f64, f64)> = traj
        .maps
        .iter()
        .enumerate()
        .map(|(l, v)| (l, traj.s_levels[l], dirichlet_energy(v), sup_dist(v, q)))
        .collect();
    write_trajectory_index_csv(&ctx.record("heat_index.csv"), &rows)?;
    if cfg.output.dump_every > 0 {
        for (l, v) in traj.maps.iter().enumerate() {
            if l % cfg.output.dump_every == 0 || l + 1 == traj.maps.len() {
                write_field_dump(&ctx.record(&format!("heat_level_{l:04}.cslf")), v)?;
            }
        }
    }
    ctx.put("heat_final_energy", rows.last().map(|r| r.2).unwrap_or(0.0));
    if cfg.diagnostics.decay_fits {
        if let Ok(window) = decay_window(&traj, 4.0) {
            for j in [1usize, 2] {
                if let Ok((slope, count)) = decay_rate(&traj, j, window) {
                    ctx.put(&format!("heat_decay_slope_j{j}"), slope);
                    ctx.put(&format!("heat_decay_samples_j{j}"), count as f64);
                }
            }
        }
        let (k_min, k_max) = traj.grid.shell_range();
        for k in [k_min.max(0), (k_min + k_max) / 2, k_max - 1] {
            if let Ok(profile) = frequency_decay_profile(&traj, k) {
                let (s, p): (Vec<f64>, Vec<f64>) = profile.into_iter().unzip();
                if let Ok(fit) = crate::diagnostics::decay_fit(&s, &p, k) {
                    if let Some(m) = fit.exponent {
                        ctx.put(&format!("heat_profile_exponent_k{k}"), m);
                        ctx.put(&format!("heat_profile_residual_k{k}"), fit.relative_residual);
                    }
                }
            }
        }
    }
    Ok(traj)
}

fn run_sl(
    cfg: &RunConfig,
    target: &Arc<TargetManifold>,
    u0: &VecField,
    ctx: &mut RunContext,
) -> Result<VecField> {
    let opts = SlOptions {
        t_final: cfg.sl.t_final,
        dt: if cfg.sl.dt > 0.0 { Some(cfg.sl.dt) } else { None },
        store_every: cfg.sl.store_every,
    };
    let series = sl_solve(target, u0, &opts)?;
    let residuals = vec![None; series.t_grid.len()];
    write_series_csv(
        &ctx.record("sl_series.csv"),
        &series.t_grid,
        &series.energy,
        &series.mass,
        &series.supdist,
        &residuals,
    )?;
    if cfg.output.dump_every > 0 {
        for (i, st) in series.states.iter().enumerate() {
            if i % cfg.output.dump_every == 0 || i + 1 == series.states.len() {
                write_field_dump(&ctx.record(&format!("sl_sample_{i:04}.cslf")), st)?;
            }
        }
    }
    ctx.put("sl_energy_drift_rel", series.relative_energy_drift());
    ctx.put("sl_final_mass", *series.mass.last().unwrap());
    ctx.put("sl_final_supdist_Q", *series.supdist.last().unwrap());
    ctx.put("sl_dt", series.dt);
    Ok(series.states.last().unwrap().clone())
}

fn run_gauge(cfg: &RunConfig, traj: &HeatTrajectory, ctx: &mut RunContext) -> Result<()> {
    let opts = GaugeOptions {
        keep: KeepLevels::First,
        with_connection_check: cfg.diagnostics.residual_suite,
        with_separation: true,
        ..Default::default()
    };
    let gauge = build_caloric_gauge(traj, &opts)?;
    let (torsion, commutator, heat_tension) = gauge.worst_residuals();
    ctx.put("gauge_torsion_sup", torsion);
    ctx.put("gauge_commutator_sup", commutator);
    ctx.put("gauge_heat_tension_sup", heat_tension);
    ctx.put("gauge_gamma_infinity_variation", gauge.gamma_infinity_variation);
    ctx.put("gauge_xi_infinity_sup", gauge.xi_infinity_sup);
    ctx.put("gauge_a_seed_sup", gauge.a_seed_sup);
    ctx.put("gauge_frame_defect", gauge.frame_defect);
    if let Some(m) = gauge.worst_connection_mismatch() {
        ctx.put("gauge_connection_mismatch", m);
    }
    if let Some(sep) = gauge.worst_separation() {
        ctx.put("gauge_separation_sup", sep);
    }
    let rows: Vec<(String, f64, String, String)> = gauge
        .diagnostics
        .iter()
        .flat_map(|d| {
            let mut v = vec![
                ("torsion".to_string(), d.s, String::new(), d.torsion.to_string()),
                ("commutator".to_string(), d.s, String::new(), d.commutator.to_string()),
                ("heat_tension".to_string(), d.s, String::new(), d.heat_tension.to_string()),
            ];
            if let Some(m) = d.connection_mismatch {
                v.push(("connection_mismatch".to_string(), d.s, String::new(), m.to_string()));
            }
            if let Some(sep) = d.separation {
                v.push(("separation".to_string(), d.s, String::new(), sep.to_string()));
            }
            v
        })
        .collect();
    write_gauge_manifest_csv(&ctx.record("gauge_manifest.csv"), &rows)?;
    Ok(())
}

fn run_gauged_residual(
    cfg: &RunConfig,
    target: &Arc<TargetManifold>,
    u0: &VecField,
    ctx: &mut RunContext,
) -> Result<()> {
    let grid = &u0.grid;
    let bound = max_stable_dt(grid);
    let dt = if cfg.sl.dt > 0.0 { cfg.sl.dt.min(bound) } else { bound };
    // evolve +/- one step around the initial time for the centered
    // time-difference
    let plus = sl_step(target, u0, dt)?;
    let minus = sl_step(target, u0, -dt)?;
    let report = gauged_residual(target, &minus, u0, &plus, dt, &cfg.heat.to_options())?;
    ctx.put("sl_gauged_residual_sup", report.equation);
    ctx.put("sl_first_order_residual_sup", report.first_order);
    ctx.put("sl_time_compatibility_sup", report.compatibility);
    ctx.put("sl_a_t_sup", report.a_t_sup);
    Ok(())
}

fn run_envelopes(
    diag: &DiagnosticsConfig,
    u0: &VecField,
    final_state: Option<&VecField>,
    ctx: &mut RunContext,
) -> Result<()> {
    let mut rows: Vec<(i32, f64, f64, f64, usize)> = Vec::new();
    let emit = |rows: &mut Vec<(i32, f64, f64, f64, usize)>, u: &VecField| -> Result<()> {
        for &sigma in &diag.envelope_sigmas {
            let env = field_envelope(u, sigma, DEFAULT_DELTA)?;
            for k in env.k_min..=env.k_max() {
                rows.push((k, sigma, env.value(k), env.delta, 0));
            }
        }
        if diag.envelope_iterations > 0 {
            let fam = EnvelopeFamily::of_field(u, DEFAULT_DELTA)?;
            let it = envelope_iterate(&fam, diag.envelope_iterations)?;
            for &sigma in &diag.envelope_sigmas {
                let m = sigma_index(sigma)?;
                if m > it.sigma_max_index() {
                    continue;
                }
                let env = it.at(m);
                for k in env.k_min..=env.k_max() {
                    rows.push((k, sigma, env.value(k), env.delta, diag.envelope_iterations));
                }
            }
        }
        Ok(())
    };
    emit(&mut rows, u0)?;
    write_envelope_csv(&ctx.record("envelope_initial.csv"), &rows)?;
    if let Some(f) = final_state {
        let mut frows = Vec::new();
        emit(&mut frows, f)?;
        write_envelope_csv(&ctx.record("envelope_final.csv"), &frows)?;
    }
    Ok(())
}

/// Analyze a stored field dump: envelopes at the requested regularities,
/// written as envelope CSV rows.
pub fn analyze_envelope(
    dump: &Path,
    sigmas: &[f64],
    delta: f64,
    iterations: usize,
    out: Option<&Path>,
) -> Result<()> {
    let field = crate::io::read_field_dump(dump)?;
    let diag = DiagnosticsConfig {
        envelope_sigmas: sigmas.to_vec(),
        envelope_iterations: iterations,
        decay_fits: false,
        residual_suite: false,
    };
    for &sigma in sigmas {
        sigma_index(sigma)?;
    }
    let mut rows: Vec<(i32, f64, f64, f64, usize)> = Vec::new();
    for &sigma in &diag.envelope_sigmas {
        let env = field_envelope(&field, sigma, delta)?;
        for k in env.k_min..=env.k_max() {
            rows.push((k, sigma, env.value(k), env.delta, 0));
        }
    }
    if iterations > 0 {
        let fam = EnvelopeFamily::of_field(&field, delta)?;
        let it = envelope_iterate(&fam, iterations)?;
        for m in 0..=it.sigma_max_index() {
            let env = it.at(m);
            for k in env.k_min..=env.k_max() {
                rows.push((k, env.sigma, env.value(k), env.delta, iterations));
            }
        }
    }
    match out {
        Some(path) => write_envelope_csv(path, &rows)?,
        None => {
            // a closed pipe downstream is fine, stop writing quietly
            use std::io::Write;
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            let mut emit_line = |line: String| -> std::io::Result<()> { writeln!(w, "{line}") };
            let mut lines = std::iter::once("k,sigma,value,delta,iterate_j".to_string()).chain(
                rows.iter().map(|(k, sigma, value, delta, j)| {
                    format!("{k},{sigma},{value},{delta},{j}")
                }),
            );
            while let Some(line) = lines.next() {
                if let Err(e) = emit_line(line) {
                    if e.kind() == std::io::ErrorKind::BrokenPipe {
                        break;
                    }
                    return Err(e.into());
                }
            }
        }
    }
    Ok(())
}

/// The quick invariant battery behind `check`: target algebra, heat-flow
/// energy decay, gauge identities, and SL conservation at the given
/// resolution. Prints one line per check; errs on the first failure.
pub fn check(kind: TargetKind, n: usize) -> Result<()> {
    let target = Arc::new(TargetManifold::new(kind));
    let grid = Grid2::new(n, 2.0 * std::f64::consts::PI);
    let mut failed = Vec::new();
    let report = |name: &str, value: f64, tol: f64, failed: &mut Vec<String>| {
        let ok = value <= tol;
        println!("check {name}: {} ({value:.3e}, tolerance {tol:.1e})", if ok { "ok" } else { "FAIL" });
        if !ok {
            failed.push(name.to_string());
        }
    };

    // target algebra on a sampled field
    let u = tangent_graph(&target, &grid, |x, y| {
        (0.05 * x.sin() * y.cos(), 0.05 * (x + y).cos())
    });
    let mut worst = 0.0f64;
    for idx in 0..grid.n_points() {
        worst = worst.max(target.distance_to_manifold(u.point(idx)));
    }
    report("initial data on manifold", worst, 1e-12, &mut failed);

    // heat flow dissipates energy
    let heat = HeatOptions { s_max: 4.0, ..Default::default() };
    let traj = heat_solve(&target, &u, &heat)?;
    let energies: Vec<f64> = traj.maps.iter().map(dirichlet_energy).collect();
    let max_rise = energies
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    report("heat energy monotone", max_rise.max(0.0), 1e-12, &mut failed);

    // caloric gauge identities at s = 0
    let traj_g = heat_solve(&target, &u, &HeatOptions::default())?;
    let gauge = build_caloric_gauge(&traj_g, &GaugeOptions::default())?;
    let (torsion, commutator, heat_tension) = gauge.worst_residuals();
    report("gauge torsion-free", torsion, 1e-3, &mut failed);
    report("gauge commutator", commutator, 1e-3, &mut failed);
    report("gauge heat tension", heat_tension, 1e-3, &mut failed);
    report("gauge frame defect", gauge.frame_defect, 1e-10, &mut failed);
    report(
        "dynamic separation constancy",
        gauge.gamma_infinity_variation,
        1e-10,
        &mut failed,
    );

    // Schrodinger flow conservation and reversibility over 20 steps
    let dt = max_stable_dt(&grid);
    let e0 = dirichlet_energy(&u);
    let mut cur = u.clone();
    for _ in 0..20 {
        cur = sl_step(&target, &cur, dt)?;
    }
    let drift = if e0 > 0.0 { (dirichlet_energy(&cur) - e0).abs() / e0 } else { 0.0 };
    let mut off = 0.0f64;
    for idx in 0..grid.n_points() {
        off = off.max(target.distance_to_manifold(cur.point(idx)));
    }
    for _ in 0..20 {
        cur = sl_step(&target, &cur, -dt)?;
    }
    let ret = cur
        .data
        .iter()
        .zip(&u.data)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    report("sl energy conservation", drift, 1e-8, &mut failed);
    report("sl constraint", off, 1e-10, &mut failed);
    report("sl time reversal", ret, 1e-9, &mut failed);

    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Diagnostics(format!("checks failed: {}", failed.join(", "))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn bump_cfg(extra: &str) -> RunConfig {
        parse_config(&format!(
            r#"
target = "sphere2"
[grid]
n = 16
length = 6.283185307179586
[initial_data]
family = "bump"
amplitude = 0.1
width = 1.0
{extra}
"#
        ))
        .unwrap()
    }

    #[test]
    fn zero_amplitude_bump_is_constant() {
        let mut cfg = bump_cfg("");
        cfg.initial_data.amplitude = Some(0.0);
        let target = Arc::new(TargetManifold::new(TargetKind::Sphere2));
        let grid = Grid2::new(16, 2.0 * std::f64::consts::PI);
        let (u, grad) = initial_data(&cfg, &grid, &target).unwrap();
        assert_eq!(grad, 0.0);
        for idx in 0..grid.n_points() {
            assert_eq!(u.point(idx), &target.base_point[..]);
        }
    }

    #[test]
    fn bump_energy_matches_quadratic_approximation() {
        let cfg = bump_cfg("");
        let target = Arc::new(TargetManifold::new(TargetKind::Sphere2));
        let grid = Grid2::new(64, 2.0 * std::f64::consts::PI);
        let (u, _) = initial_data(&cfg, &grid, &target).unwrap();
        // tangent-space quadratic approximation of the energy
        let mut tangent = VecField::zeros(&grid, 2);
        let l = grid.side_length();
        let kappa = 1.0;
        let two_pi = 2.0 * std::f64::consts::PI;
        for j in 0..grid.n() {
            for i in 0..grid.n() {
                let (x, y) = (grid.coord(i), grid.coord(j));
                let px = (two_pi * (x - 0.5 * l) / l).cos();
                let py = (two_pi * (y - 0.5 * l) / l).cos();
                let f = 0.1 * (kappa * (px + py - 2.0)).exp();
                let p = tangent.point_mut(j * grid.n() + i);
                p[0] = 0.8 * f;
                p[1] = 0.6 * f;
            }
        }
        let quad = dirichlet_energy(&tangent);
        let measured = dirichlet_energy(&u);
        assert!(
            (measured - quad).abs() <= 0.05 * quad,
            "energy {measured} vs quadratic {quad}"
        );
    }

    #[test]
    fn random_family_is_deterministic_and_on_manifold() {
        let cfg = parse_config(
            r#"
target = "sphere_product"
[grid]
n = 16
length = 6.283185307179586
[initial_data]
family = "random"
seed = 7
amplitude = 0.05
smoothing = 0.5
"#,
        )
        .unwrap();
        let target = Arc::new(TargetManifold::new(TargetKind::SphereProduct));
        let grid = Grid2::new(16, 2.0 * std::f64::consts::PI);
        let (a, _) = initial_data(&cfg, &grid, &target).unwrap();
        let (b, _) = initial_data(&cfg, &grid, &target).unwrap();
        assert_eq!(a.data, b.data);
        for idx in 0..grid.n_points() {
            assert!(target.distance_to_manifold(a.point(idx)) < 1e-12);
        }
        let mut sup = 0.0f64;
        for idx in 0..grid.n_points() {
            let d: f64 = a
                .point(idx)
                .iter()
                .zip(&target.base_point)
                .map(|(x, q)| (x - q) * (x - q))
                .sum::<f64>()
                .sqrt();
            sup = sup.max(d);
        }
        assert!(sup > 0.0 && sup < 0.2, "random amplitude off: {sup}");
    }

    #[test]
    fn cut_locus_amplitudes_are_rejected() {
        let mut cfg = bump_cfg("");
        cfg.initial_data.amplitude = Some(2.0);
        let target = Arc::new(TargetManifold::new(TargetKind::Sphere2));
        let grid = Grid2::new(16, 2.0 * std::f64::consts::PI);
        let err = initial_data(&cfg, &grid, &target).unwrap_err();
        assert!(err.to_string().contains("cut locus"));
    }

    #[test]
    fn check_passes_on_every_target() {
        for kind in [TargetKind::Sphere2, TargetKind::FlatTorus2, TargetKind::SphereProduct] {
            check(kind, 16).unwrap();
        }
    }

    #[test]
    fn heat_run_writes_expected_artifacts() {
        let cfg = parse_config(
            r#"
target = "sphere2"
flow = "heat"
[grid]
n = 16
length = 6.283185307179586
[initial_data]
family = "bump"
amplitude = 0.1
[heat]
s_max = 2.0
[output]
dump_every = 50
"#,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let manifest = run(&cfg, dir.path()).unwrap();
        assert!(manifest.summary.contains_key("initial_energy"));
        assert!(manifest.summary.contains_key("heat_final_energy"));
        assert!(dir.path().join("heat_index.csv").exists());
        assert!(dir.path().join("manifest.json").exists());
        assert!(manifest.files.iter().any(|f| f.name == "heat_index.csv"));
        // energy decreases under the flow
        assert!(manifest.summary["heat_final_energy"] < manifest.summary["initial_energy"]);
    }

    #[test]
    fn identical_configs_reproduce_manifests_byte_for_byte() {
        let cfg = parse_config(
            r#"
target = "flat_torus2"
flow = "sl"
[grid]
n = 16
length = 6.283185307179586
[initial_data]
family = "random"
seed = 11
amplitude = 0.02
[sl]
t_final = 0.05
store_every = 20
"#,
        )
        .unwrap();
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        run(&cfg, d1.path()).unwrap();
        run(&cfg, d2.path()).unwrap();
        let m1 = std::fs::read(d1.path().join("manifest.json")).unwrap();
        let m2 = std::fs::read(d2.path().join("manifest.json")).unwrap();
        assert_eq!(m1, m2);
    }
}
