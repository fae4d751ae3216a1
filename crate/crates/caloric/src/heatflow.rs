//! Harmonic-map heat flow `dv/ds = Delta v - sum_a S(d_a v, d_a v)` driven by
//! an exponential two-stage integrator (exact linear propagation, explicit
//! nonlinearity) with pointwise retraction back to the target after each step.
//!
//! The auxiliary-time grid starts with a short linear ramp near `s = 0` and
//! continues geometrically, several samples per dyadic block, up to `s_max`.

use crate::error::{Error, Result};
use crate::spectral::{
    dealias_mask, dft_forward, gradient, lp_shell_l2, sobolev_seminorm, Grid2, Spectrum, VecField,
};
use crate::target::TargetManifold;
use num_complex::Complex64;
use std::sync::Arc;

/// Auxiliary-time discretization and substep policy.
#[derive(Debug, Clone)]
pub struct HeatOptions {
    /// Final auxiliary time; the flow is essentially at its limit here.
    pub s_max: f64,
    /// End of the initial linear ramp.
    pub ramp_end: f64,
    /// Number of samples in the linear ramp (excluding s = 0).
    pub ramp_samples: usize,
    /// Geometric samples per dyadic block of s after the ramp.
    pub samples_per_block: usize,
    /// Relative accuracy cap for substeps: h <= accuracy_cap * (s + ramp_end).
    pub accuracy_cap: f64,
    /// Keep full maps at every level (needed for the gauge sweep); when
    /// false only scalar diagnostics are retained.
    pub store_maps: bool,
}

impl Default for HeatOptions {
    fn default() -> Self {
        HeatOptions {
            s_max: 64.0,
            ramp_end: 1e-3,
            ramp_samples: 8,
            samples_per_block: 8,
            accuracy_cap: 0.1,
            store_maps: true,
        }
    }
}

impl HeatOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.s_max > 0.0 && self.s_max.is_finite()) {
            return Err(Error::HeatFlow(format!("s_max must be positive, got {}", self.s_max)));
        }
        if !(self.ramp_end > 0.0 && self.ramp_end < self.s_max) {
            return Err(Error::HeatFlow("ramp_end must lie in (0, s_max)".into()));
        }
        if self.ramp_samples == 0 || self.samples_per_block == 0 {
            return Err(Error::HeatFlow("sample counts must be positive".into()));
        }
        if !(self.accuracy_cap > 0.0 && self.accuracy_cap <= 0.5) {
            return Err(Error::HeatFlow("accuracy_cap must lie in (0, 0.5]".into()));
        }
        Ok(())
    }

    /// The monotone level grid `0 = s_0 < s_1 < ... < s_last = s_max`.
    pub fn s_levels(&self) -> Vec<f64> {
        let mut levels = vec![0.0];
        for i in 1..=self.ramp_samples {
            levels.push(self.ramp_end * i as f64 / self.ramp_samples as f64);
        }
        let ratio = 2f64.powf(1.0 / self.samples_per_block as f64);
        let mut s = self.ramp_end;
        loop {
            s *= ratio;
            if s >= self.s_max * (1.0 - 1e-12) {
                levels.push(self.s_max);
                break;
            }
            levels.push(s);
        }
        levels
    }
}

/// The heat flow of one initial map, sampled on the level grid.
#[derive(Debug, Clone)]
pub struct HeatTrajectory {
    pub target: Arc<TargetManifold>,
    pub grid: Arc<Grid2>,
    pub s_levels: Vec<f64>,
    /// Map at each level; empty when `store_maps` was off.
    pub maps: Vec<VecField>,
    /// `|nabla^{j+1} v(s)|_{L^2}` for j = 0, 1, 2 at each level.
    pub seminorms: Vec<[f64; 3]>,
    /// sup_x |dv(s, x)| at each level.
    pub sup_gradient: Vec<f64>,
}

/// Sum over ambient components of homogeneous Sobolev seminorms.
pub fn map_seminorm(v: &VecField, m: u32) -> f64 {
    let mut acc = 0.0;
    for c in 0..v.ncomp {
        let s = sobolev_seminorm(&v.component(c), m);
        acc += s * s;
    }
    acc.sqrt()
}

/// Spatial gradient of every component; `out[a]` is the derivative in
/// direction `a`, stored as a [`VecField`] with the same component count.
pub fn map_gradient(v: &VecField) -> [VecField; 2] {
    let mut dx = VecField::zeros(&v.grid, v.ncomp);
    let mut dy = VecField::zeros(&v.grid, v.ncomp);
    for c in 0..v.ncomp {
        let [gx, gy] = gradient(&v.component(c));
        dx.set_component(c, &gx);
        dy.set_component(c, &gy);
    }
    [dx, dy]
}

/// Dirichlet energy `1/2 int |dv|^2`.
pub fn dirichlet_energy(v: &VecField) -> f64 {
    let [dx, dy] = map_gradient(v);
    let cell = v.grid.cell_area();
    let sum: f64 = dx.data.iter().map(|a| a * a).sum::<f64>()
        + dy.data.iter().map(|a| a * a).sum::<f64>();
    0.5 * sum * cell
}

/// Zero all modes outside the 2/3 dealiasing region, componentwise.
pub fn dealias_field(v: &VecField) -> VecField {
    let g = v.grid.clone();
    v.map_modes(|kx, ky| dealias_mask(&g, kx, ky))
}

/// `-sum_a S(d_a v, d_a v)` evaluated with spectral gradients, the base point
/// taken as the pointwise retraction of `v`, and the product dealiased.
pub fn heat_nonlinearity(target: &TargetManifold, v: &VecField) -> VecField {
    let [dx, dy] = map_gradient(v);
    let mut out = VecField::zeros(&v.grid, v.ncomp);
    let nn = target.ambient_dim;
    let mut p = vec![0.0; nn];
    let mut s = vec![0.0; nn];
    for idx in 0..v.grid.n_points() {
        target.retract_into(v.point(idx), &mut p);
        let o = out.point_mut(idx);
        target.second_fundamental_form_into(&p, dx.point(idx), dx.point(idx), &mut s);
        for c in 0..nn {
            o[c] -= s[c];
        }
        target.second_fundamental_form_into(&p, dy.point(idx), dy.point(idx), &mut s);
        for c in 0..nn {
            o[c] -= s[c];
        }
    }
    dealias_field(&out)
}

/// The full tension field `Delta v - sum_a S(d_a v, d_a v)`; this is the
/// s-derivative of the flow and is recomputed from the map alone wherever
/// `d_s v` is needed.
pub fn heat_tension_field(target: &TargetManifold, v: &VecField) -> VecField {
    let mut out = heat_nonlinearity(target, v);
    let lap = v.map_modes(|kx, ky| -(kx * kx + ky * ky));
    out.axpy(1.0, &lap);
    out
}

fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0
    } else {
        z.exp_m1() / z
    }
}

fn phi2(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

/// `out = multiplier_a(h L) . a + h * multiplier_b(h L) . b` per component,
/// with `L` the Laplacian symbol.
fn spectral_combine(
    a: &VecField,
    b: &VecField,
    h: f64,
    ma: impl Fn(f64) -> f64,
    mb: impl Fn(f64) -> f64,
) -> VecField {
    let mut out = VecField::zeros(&a.grid, a.ncomp);
    let n = a.grid.n();
    for c in 0..a.ncomp {
        let mut sa = a.component(c).forward();
        let sb = b.component(c).forward();
        for (idx, z) in sa.data.iter_mut().enumerate() {
            let kx = a.grid.wavenumber(idx % n);
            let ky = a.grid.wavenumber(idx / n);
            let hl = -h * (kx * kx + ky * ky);
            *z = *z * Complex64::new(ma(hl), 0.0) + sb.data[idx] * Complex64::new(h * mb(hl), 0.0);
        }
        out.set_component(c, &sa.inverse());
    }
    out
}

/// Pointwise nearest-point retraction of a near-manifold map, in place.
pub fn retract_field(target: &TargetManifold, v: &mut VecField) {
    let nn = target.ambient_dim;
    let mut p = vec![0.0; nn];
    for idx in 0..v.grid.n_points() {
        let q = v.point_mut(idx);
        let d: f64 = {
            // inline distance check to fail loudly if the step left the tube
            let mut d2 = 0.0;
            for &(o, l) in target.blocks() {
                let r = q[o..o + l].iter().map(|x| x * x).sum::<f64>().sqrt();
                d2 += (r - 1.0) * (r - 1.0);
            }
            d2.sqrt()
        };
        assert!(d < crate::target::RETRACT_REACH, "heatflow: step left the manifold tube ({d:.3e})");
        target.retract_into(q, &mut p);
        q.copy_from_slice(&p);
    }
}

/// One exponential two-stage step of size `h`; returns the retracted map.
pub fn heat_step(target: &TargetManifold, v: &VecField, h: f64) -> VecField {
    let nv = heat_nonlinearity(target, v);
    // stage: a = e^{hL} v + h phi1(hL) N(v)
    let a = spectral_combine(v, &nv, h, f64::exp, phi1);
    let mut ra = a.clone();
    retract_field(target, &mut ra);
    let na = heat_nonlinearity(target, &ra);
    // correction: v' = a + h phi2(hL) (N(a) - N(v))
    let mut diff = na;
    diff.axpy(-1.0, &nv);
    let mut out = spectral_combine(&a, &diff, h, |_| 1.0, phi2);
    retract_field(target, &mut out);
    out
}

/// Advance from `s0` to `s1` with substeps bounded by the accuracy cap and
/// the nonlinear stability bound `h <= 1/(2 sup |dv|^2)`.
fn advance_level(
    target: &TargetManifold,
    v: &VecField,
    s0: f64,
    s1: f64,
    opts: &HeatOptions,
) -> VecField {
    let ds = s1 - s0;
    let [dx, dy] = map_gradient(v);
    let sup2 = dx.sup_point_norm().powi(2) + dy.sup_point_norm().powi(2);
    let h_nl = 0.5 / sup2.max(1e-12);
    let h_acc = opts.accuracy_cap * (s0 + opts.ramp_end);
    let m = (ds / h_nl.min(h_acc)).ceil().max(1.0) as usize;
    let h = ds / m as f64;
    let mut cur = v.clone();
    for _ in 0..m {
        cur = heat_step(target, &cur, h);
    }
    cur
}

/// Run the heat flow of `v0` over the level grid of `opts`.
pub fn heat_solve(
    target: &Arc<TargetManifold>,
    v0: &VecField,
    opts: &HeatOptions,
) -> Result<HeatTrajectory> {
    opts.validate()?;
    if v0.ncomp != target.ambient_dim {
        return Err(Error::HeatFlow(format!(
            "map has {} components but target lives in R^{}",
            v0.ncomp, target.ambient_dim
        )));
    }
    let mut worst = 0.0f64;
    for idx in 0..v0.grid.n_points() {
        worst = worst.max(target.distance_to_manifold(v0.point(idx)));
    }
    if worst > 1e-8 {
        return Err(Error::HeatFlow(format!("initial map off manifold by {worst:.3e}")));
    }
    v0.assert_finite("initial map");

    let s_levels = opts.s_levels();
    let mut maps = Vec::new();
    let mut seminorms = Vec::new();
    let mut sup_gradient = Vec::new();
    let mut cur = v0.clone();
    for (i, &s) in s_levels.iter().enumerate() {
        if i > 0 {
            cur = advance_level(target, &cur, s_levels[i - 1], s, opts);
            cur.assert_finite("heat flow map");
        }
        seminorms.push([map_seminorm(&cur, 1), map_seminorm(&cur, 2), map_seminorm(&cur, 3)]);
        let [dx, dy] = map_gradient(&cur);
        sup_gradient
            .push((dx.sup_point_norm().powi(2) + dy.sup_point_norm().powi(2)).sqrt());
        if opts.store_maps {
            maps.push(cur.clone());
        }
    }
    Ok(HeatTrajectory {
        target: target.clone(),
        grid: v0.grid.clone(),
        s_levels,
        maps,
        seminorms,
        sup_gradient,
    })
}

impl HeatTrajectory {
    pub fn level_count(&self) -> usize {
        self.s_levels.len()
    }

    pub fn map_at(&self, level: usize) -> &VecField {
        &self.maps[level]
    }
}

/// Least-squares slope of `ln seminorm_j` against `ln s` over the window
/// `s in [window.0, window.1]`; pass `j` in 1..=2. Returns the slope and the
/// number of levels used.
pub fn decay_rate(traj: &HeatTrajectory, j: usize, window: (f64, f64)) -> Result<(f64, usize)> {
    if !(1..=2).contains(&j) {
        return Err(Error::HeatFlow(format!("decay rate defined for j = 1, 2; got {j}")));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &s) in traj.s_levels.iter().enumerate() {
        if s >= window.0 && s <= window.1 && s > 0.0 {
            let v = traj.seminorms[i][j];
            if v > 0.0 {
                xs.push(s.ln());
                ys.push(v.ln());
            }
        }
    }
    if xs.len() < 3 {
        return Err(Error::HeatFlow(format!(
            "decay window [{}, {}] contains only {} usable levels",
            window.0,
            window.1,
            xs.len()
        )));
    }
    Ok((lsq_slope(&xs, &ys), xs.len()))
}

fn lsq_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Pick the self-similar window for decay-rate fits from the energy-bearing
/// shells of the initial derivative: the power law holds for
/// `4^{-k_hi} << s << 4^{-k_lo}`.
pub fn decay_window(traj: &HeatTrajectory, margin: f64) -> Result<(f64, f64)> {
    if traj.maps.is_empty() {
        return Err(Error::HeatFlow("trajectory stores no maps".into()));
    }
    let v0 = &traj.maps[0];
    let [dx, dy] = map_gradient(v0);
    let specs: Vec<Spectrum> = (0..v0.ncomp)
        .flat_map(|c| [dft_forward(&dx.component(c)), dft_forward(&dy.component(c))])
        .collect();
    let mut best = 0.0f64;
    let shells: Vec<i32> = traj.grid.shells().collect();
    let mut energy = vec![0.0f64; shells.len()];
    for (i, &k) in shells.iter().enumerate() {
        for sp in &specs {
            let v = lp_shell_l2(sp, k);
            energy[i] += v * v;
        }
        best = best.max(energy[i]);
    }
    let active: Vec<i32> = shells
        .iter()
        .zip(&energy)
        .filter(|(_, &e)| e > 1e-4 * best)
        .map(|(&k, _)| k)
        .collect();
    let (k_lo, k_hi) = match (active.iter().min(), active.iter().max()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::HeatFlow("initial map has no derivative content".into())),
    };
    let lo = margin * 4f64.powi(-k_hi);
    let hi = 4f64.powi(-k_lo) / margin;
    if lo >= hi {
        return Err(Error::HeatFlow(
            "initial data spans too few shells for a self-similar decay window".into(),
        ));
    }
    Ok((lo, hi))
}

/// Shell-resolved decay profile: `|P_k d v(s)|_{L^2}` over all stored levels.
pub fn frequency_decay_profile(traj: &HeatTrajectory, k: i32) -> Result<Vec<(f64, f64)>> {
    if traj.maps.is_empty() {
        return Err(Error::HeatFlow("trajectory stores no maps".into()));
    }
    let mut out = Vec::with_capacity(traj.maps.len());
    for (i, v) in traj.maps.iter().enumerate() {
        let [dx, dy] = map_gradient(v);
        let mut acc = 0.0;
        for c in 0..v.ncomp {
            for d in [&dx, &dy] {
                let val = lp_shell_l2(&dft_forward(&d.component(c)), k);
                acc += val * val;
            }
        }
        out.push((traj.s_levels[i], acc.sqrt()));
    }
    Ok(out)
}
