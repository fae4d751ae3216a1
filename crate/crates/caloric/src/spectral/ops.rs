use super::cutoff::{pow2, DyadicCutoff};
use super::field::{ScalarField, Spectrum};
use crate::error::{Error, Result};

pub fn dft_forward(f: &ScalarField) -> Spectrum {
    assert_eq!(f.data.len(), f.grid.n_points(), "spectral: dimension mismatch");
    f.forward()
}

pub fn dft_inverse(s: &Spectrum) -> ScalarField {
    assert_eq!(s.data.len(), s.grid.n_points(), "spectral: dimension mismatch");
    s.inverse()
}

/// Littlewood-Paley projection onto the dyadic shell `|xi| ~ 2^k`.
pub fn lp_project(f: &ScalarField, k: i32) -> ScalarField {
    let chi = DyadicCutoff;
    let mut spec = f.forward();
    spec.scale_modes(|kx, ky| chi.chi_shell(k, (kx * kx + ky * ky).sqrt()));
    spec.inverse()
}

/// Low-frequency cutoff P_{<=k}; keeps the mean mode for any k.
pub fn lp_project_low(f: &ScalarField, k: i32) -> ScalarField {
    let chi = DyadicCutoff;
    let mut spec = f.forward();
    spec.scale_modes(|kx, ky| chi.chi_low(k, (kx * kx + ky * ky).sqrt()));
    spec.inverse()
}

/// High-frequency cutoff P_{>=k+1} = identity - P_{<=k}.
pub fn lp_project_high(f: &ScalarField, k: i32) -> ScalarField {
    let low = lp_project_low(f, k);
    let mut out = f.clone();
    for (o, l) in out.data.iter_mut().zip(low.data.iter()) {
        *o -= l;
    }
    out
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    let mut spec = f.forward();
    spec.scale_modes(|kx, ky| -(kx * kx + ky * ky));
    spec.inverse()
}

pub fn gradient(f: &ScalarField) -> [ScalarField; 2] {
    // the Nyquist mode has no well-defined odd derivative on a real grid;
    // zero it so that d/dx_i stays skew-adjoint
    let n = f.grid.n();
    let nyquist = -(std::f64::consts::PI * n as f64 / f.grid.side_length());
    let spec = f.forward();
    let mut dx = spec.clone();
    for (idx, z) in dx.data.iter_mut().enumerate() {
        let kx = f.grid.wavenumber(idx % n);
        let kx = if kx == nyquist { 0.0 } else { kx };
        *z *= num_complex::Complex64::new(0.0, kx);
    }
    let mut dy = spec;
    for (idx, z) in dy.data.iter_mut().enumerate() {
        let ky = f.grid.wavenumber(idx / n);
        let ky = if ky == nyquist { 0.0 } else { ky };
        *z *= num_complex::Complex64::new(0.0, ky);
    }
    [dx.inverse(), dy.inverse()]
}

/// Heat semigroup e^{s Laplacian}.
pub fn heat_semigroup(f: &ScalarField, s: f64) -> Result<ScalarField> {
    if s < 0.0 || !s.is_finite() {
        return Err(Error::Spectral(format!("heat semigroup requires s >= 0, got {s}")));
    }
    let mut spec = f.forward();
    spec.scale_modes(|kx, ky| (-s * (kx * kx + ky * ky)).exp());
    Ok(spec.inverse())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialNorms {
    pub l2: f64,
    pub l4: f64,
    pub linf: f64,
}

pub fn spatial_norms(f: &ScalarField) -> SpatialNorms {
    let cell = f.grid.cell_area();
    let mut s2 = 0.0;
    let mut s4 = 0.0;
    let mut sup: f64 = 0.0;
    for &v in &f.data {
        s2 += v * v;
        s4 += v * v * v * v;
        sup = sup.max(v.abs());
    }
    SpatialNorms { l2: (s2 * cell).sqrt(), l4: (s4 * cell).powf(0.25), linf: sup }
}

/// `sqrt(sum |xi|^{2m} |f_hat|^2)` quadrature: the homogeneous Sobolev seminorm
/// of order `m` computed on the spectral side.
pub fn sobolev_seminorm(f: &ScalarField, m: u32) -> f64 {
    let spec = f.forward();
    let scale = f.grid.cell_area() / f.grid.n_points() as f64;
    let n = f.grid.n();
    let mut acc = 0.0;
    for (idx, z) in spec.data.iter().enumerate() {
        let kx = f.grid.wavenumber(idx % n);
        let ky = f.grid.wavenumber(idx / n);
        let k2 = kx * kx + ky * ky;
        acc += k2.powi(m as i32) * z.norm_sqr();
    }
    (acc * scale).sqrt()
}

/// L2 norm of the shell projection P_k f, computed in spectrum (no inverse
/// transform needed).
pub fn lp_shell_l2(spec: &Spectrum, k: i32) -> f64 {
    let chi = DyadicCutoff;
    let scale = spec.grid.cell_area() / spec.grid.n_points() as f64;
    let n = spec.grid.n();
    let mut acc = 0.0;
    for (idx, z) in spec.data.iter().enumerate() {
        let kx = spec.grid.wavenumber(idx % n);
        let ky = spec.grid.wavenumber(idx / n);
        let w = chi.chi_shell(k, (kx * kx + ky * ky).sqrt());
        acc += w * w * z.norm_sqr();
    }
    (acc * scale).sqrt()
}

/// 2/3-rule dealias mask value for a mode.
pub fn dealias_mask(grid: &super::grid::Grid2, kx: f64, ky: f64) -> f64 {
    let cutoff = 2.0 / 3.0 * std::f64::consts::PI * grid.n() as f64 / grid.side_length();
    if kx.abs() <= cutoff && ky.abs() <= cutoff {
        1.0
    } else {
        0.0
    }
}

/// Fraction of the spectral mass that falls outside the grid's shell range;
/// reported so out-of-range mass is never silently dropped.
pub fn out_of_shell_mass(f: &ScalarField) -> f64 {
    let chi = DyadicCutoff;
    let spec = f.forward();
    let (k_min, k_max) = f.grid.shell_range();
    let n = f.grid.n();
    let mut covered = 0.0;
    let mut total = 0.0;
    for (idx, z) in spec.data.iter().enumerate() {
        if idx == 0 {
            continue; // mean mode is outside every shell by construction
        }
        let kx = f.grid.wavenumber(idx % n);
        let ky = f.grid.wavenumber(idx / n);
        let r = (kx * kx + ky * ky).sqrt();
        let w: f64 = (k_min..=k_max).map(|k| chi.chi_shell(k, r)).sum();
        total += z.norm_sqr();
        covered += w * z.norm_sqr();
    }
    if total == 0.0 {
        0.0
    } else {
        ((total - covered) / total).max(0.0)
    }
}

pub use super::cutoff::PLATEAU as CHI_PLATEAU;
pub use super::cutoff::SUPPORT as CHI_SUPPORT;

/// 2^k as f64, re-exported for shell arithmetic in downstream modules.
pub fn shell_scale(k: i32) -> f64 {
    pow2(k)
}
