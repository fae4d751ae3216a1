//! Caloric gauge construction and its verification suite.
//!
//! The gauge is a moving orthonormal frame of the pullback tangent bundle
//! that is parallel in the heat-flow time `s`: it is seeded from the fixed
//! reference frame at `s_max`, where the flow has collapsed to a constant
//! map, and carried backwards to `s = 0` by parallel transport along the
//! flow lines. Transport between adjacent levels goes along the connecting
//! geodesic in closed form, so frames stay exactly orthonormal and
//! J-compatible and the construction is exact on flat targets.
//!
//! Frames are realified: row `2a` is the a-th complex frame vector, row
//! `2a + 1` its image under J, and every gauged field is a vector of the
//! resulting 2n real components.

use crate::error::{Error, Result};
use crate::heatflow::{heat_tension_field, map_gradient, HeatTrajectory};
use crate::spectral::{Grid2, VecField};
use crate::target::{CurvatureContraction, TargetManifold};
use std::sync::Arc;

/// A frame of the pullback bundle: at each grid point, `d = 2n` ambient
/// vectors stored row-major, so component `data[idx * d * nn + j * nn + c]`
/// is ambient coordinate `c` of frame vector `j`.
#[derive(Debug, Clone)]
pub struct FrameField {
    pub grid: Arc<Grid2>,
    /// Realified fiber dimension 2n.
    pub d: usize,
    /// Ambient dimension.
    pub nn: usize,
    pub field: VecField,
}

impl FrameField {
    pub fn zeros(grid: &Arc<Grid2>, d: usize, nn: usize) -> Self {
        FrameField { grid: grid.clone(), d, nn, field: VecField::zeros(grid, d * nn) }
    }

    pub fn vector(&self, idx: usize, j: usize) -> &[f64] {
        let base = idx * self.d * self.nn + j * self.nn;
        &self.field.data[base..base + self.nn]
    }

    pub fn vector_mut(&mut self, idx: usize, j: usize) -> &mut [f64] {
        let base = idx * self.d * self.nn + j * self.nn;
        &mut self.field.data[base..base + self.nn]
    }

    /// Max over points of the Frobenius deviation of the Gram matrix from
    /// the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for idx in 0..self.grid.n_points() {
            let mut acc = 0.0;
            for a in 0..self.d {
                for b in 0..self.d {
                    let g = dot(self.vector(idx, a), self.vector(idx, b));
                    let e = if a == b { 1.0 } else { 0.0 };
                    acc += (g - e) * (g - e);
                }
            }
            worst = worst.max(acc.sqrt());
        }
        worst
    }

    /// Max over points and frame vectors of the non-tangency defect against
    /// the base map `v`.
    pub fn tangency_defect(&self, target: &TargetManifold, v: &VecField) -> f64 {
        let mut worst = 0.0f64;
        let mut proj = vec![0.0; self.nn];
        for idx in 0..self.grid.n_points() {
            for j in 0..self.d {
                target.project_tangent_into(v.point(idx), self.vector(idx, j), &mut proj);
                let e = self.vector(idx, j);
                let d: f64 = e
                    .iter()
                    .zip(proj.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                worst = worst.max(d);
            }
        }
        worst
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Seed frame at the far end of the flow: project the reference vectors onto
/// the tangent space pointwise and re-orthonormalize J-compatibly (each even
/// row is Gram-Schmidt-cleaned, each odd row is J of the previous one).
pub fn seed_frame(
    target: &TargetManifold,
    v: &VecField,
    reference: &[Vec<f64>],
) -> Result<FrameField> {
    let d = target.frame_dim();
    let nn = target.ambient_dim;
    if reference.len() != d {
        return Err(Error::Gauge(format!(
            "reference frame has {} vectors, expected {d}",
            reference.len()
        )));
    }
    let mut frame = FrameField::zeros(&v.grid, d, nn);
    let mut work = vec![0.0; nn];
    for idx in 0..v.grid.n_points() {
        let p: Vec<f64> = v.point(idx).to_vec();
        for a in 0..d / 2 {
            target.project_tangent_into(&p, &reference[2 * a], &mut work);
            for j in 0..2 * a {
                let c = dot(&work, frame.vector(idx, j));
                for (w, e) in work.iter_mut().zip(frame.vector(idx, j)) {
                    *w -= c * e;
                }
            }
            let norm = dot(&work, &work).sqrt();
            if norm < 1e-6 {
                return Err(Error::Gauge(format!(
                    "reference frame degenerates at grid point {idx} (norm {norm:.3e}); \
                     the limit map is too far from the base point"
                )));
            }
            for w in work.iter_mut() {
                *w /= norm;
            }
            frame.vector_mut(idx, 2 * a).copy_from_slice(&work);
            let even = work.clone();
            target.complex_structure_into(&p, &even, &mut work);
            frame.vector_mut(idx, 2 * a + 1).copy_from_slice(&work);
        }
    }
    Ok(frame)
}

/// Transport every frame vector from the fiber over `from` to the fiber over
/// `to`, pointwise along connecting geodesics.
pub fn transport_frame(
    target: &TargetManifold,
    from: &VecField,
    to: &VecField,
    frame: &FrameField,
) -> FrameField {
    let mut out = FrameField::zeros(&frame.grid, frame.d, frame.nn);
    let mut buf = vec![0.0; frame.nn];
    for idx in 0..frame.grid.n_points() {
        for j in 0..frame.d {
            target.transport_between_into(from.point(idx), to.point(idx), frame.vector(idx, j), &mut buf);
            out.vector_mut(idx, j).copy_from_slice(&buf);
        }
    }
    out
}

/// Gauge components of an ambient vector field `w` along the map:
/// `psi^q = <w, e_q>` pointwise.
pub fn gauge_components(frame: &FrameField, w: &VecField) -> VecField {
    let mut out = VecField::zeros(&frame.grid, frame.d);
    for idx in 0..frame.grid.n_points() {
        let wp = w.point(idx);
        let o = out.point_mut(idx);
        for q in 0..frame.d {
            o[q] = dot(wp, frame.vector(idx, q));
        }
    }
    out
}

/// The two spatial differential fields `psi_i = <d_i v, e_q>`.
pub fn differential_fields(v: &VecField, frame: &FrameField) -> [VecField; 2] {
    let [dx, dy] = map_gradient(v);
    [gauge_components(frame, &dx), gauge_components(frame, &dy)]
}

/// Multiplication by i in the realified components: pairs
/// `(x^{2a}, x^{2a+1}) -> (-x^{2a+1}, x^{2a})`.
pub fn mul_i(psi: &VecField) -> VecField {
    let mut out = VecField::zeros(&psi.grid, psi.ncomp);
    for idx in 0..psi.grid.n_points() {
        let p = psi.point(idx);
        let o = out.point_mut(idx);
        for a in 0..psi.ncomp / 2 {
            o[2 * a] = -p[2 * a + 1];
            o[2 * a + 1] = p[2 * a];
        }
    }
    out
}

/// Direct route to the connection coefficients:
/// `A_i[q, p] = <d_i e_p, e_q>` with spectral derivatives of the frame.
/// Entries are stored as `q * d + p`.
pub fn connection_direct(frame: &FrameField) -> [VecField; 2] {
    let d = frame.d;
    let [ex, ey] = map_gradient(&frame.field);
    let mut out = [VecField::zeros(&frame.grid, d * d), VecField::zeros(&frame.grid, d * d)];
    for idx in 0..frame.grid.n_points() {
        for (i, de) in [&ex, &ey].into_iter().enumerate() {
            let o = out[i].point_mut(idx);
            for q in 0..d {
                for p in 0..d {
                    let base = p * frame.nn;
                    let dep = &de.point(idx)[base..base + frame.nn];
                    o[q * d + p] = dot(dep, frame.vector(idx, q));
                }
            }
        }
    }
    out
}

/// Matrix field applied to a vector field: `(A v)^q = sum_p A[q, p] v^p`.
pub fn mat_apply(a: &VecField, v: &VecField) -> VecField {
    let d = v.ncomp;
    assert_eq!(a.ncomp, d * d, "gauge: matrix/vector dimension mismatch");
    let mut out = VecField::zeros(&v.grid, d);
    for idx in 0..v.grid.n_points() {
        let m = a.point(idx);
        let x = v.point(idx);
        let o = out.point_mut(idx);
        for q in 0..d {
            let mut acc = 0.0;
            for p in 0..d {
                acc += m[q * d + p] * x[p];
            }
            o[q] = acc;
        }
    }
    out
}

fn mat_mul(a: &VecField, b: &VecField, d: usize) -> VecField {
    let mut out = VecField::zeros(&a.grid, d * d);
    for idx in 0..a.grid.n_points() {
        let ma = a.point(idx);
        let mb = b.point(idx);
        let o = out.point_mut(idx);
        for q in 0..d {
            for p in 0..d {
                let mut acc = 0.0;
                for r in 0..d {
                    acc += ma[q * d + r] * mb[r * d + p];
                }
                o[q * d + p] = acc;
            }
        }
    }
    out
}

/// Curvature matrix of a pair of ambient direction fields in the frame:
/// `M[q, p] = <R(x, y) e_p, e_q>`.
pub fn curvature_matrix_field(
    target: &TargetManifold,
    v: &VecField,
    frame: &FrameField,
    x: &VecField,
    y: &VecField,
) -> VecField {
    let d = frame.d;
    let mut out = VecField::zeros(&frame.grid, d * d);
    let mut r = vec![0.0; frame.nn];
    for idx in 0..frame.grid.n_points() {
        let o = out.point_mut(idx);
        for p in 0..d {
            target.curvature_into(v.point(idx), x.point(idx), y.point(idx), frame.vector(idx, p), &mut r);
            for q in 0..d {
                o[q * d + p] = dot(&r, frame.vector(idx, q));
            }
        }
    }
    out
}

/// Sup and L2 norms of an identity's defect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub sup: f64,
    pub l2: f64,
}

// pointwise euclidean norm of the componentwise difference, reduced to sup
// and L2; both are invariant under constant frame rotations
fn diff_norms(a: &VecField, b: &VecField) -> Residual {
    let nc = a.ncomp;
    let mut sup = 0.0f64;
    let mut acc = 0.0;
    for (x, y) in a.data.chunks_exact(nc).zip(b.data.chunks_exact(nc)) {
        let d2: f64 = x.iter().zip(y).map(|(u, v)| (u - v) * (u - v)).sum();
        sup = sup.max(d2.sqrt());
        acc += d2;
    }
    Residual { sup, l2: (acc * a.grid.cell_area()).sqrt() }
}

fn sup_diff(a: &VecField, b: &VecField) -> f64 {
    diff_norms(a, b).sup
}

/// Torsion-freeness: `D_1 psi_2 = D_2 psi_1`.
pub fn verify_torsion_free(psi: &[VecField; 2], a: &[VecField; 2]) -> Residual {
    let d1p2 = {
        let mut f = map_gradient(&psi[1])[0].clone();
        f.axpy(1.0, &mat_apply(&a[0], &psi[1]));
        f
    };
    let d2p1 = {
        let mut f = map_gradient(&psi[0])[1].clone();
        f.axpy(1.0, &mat_apply(&a[1], &psi[0]));
        f
    };
    diff_norms(&d1p2, &d2p1)
}

/// Curvature commutator: `d_1 A_2 - d_2 A_1 + [A_1, A_2] = <R(d_1 v, d_2 v) e_p, e_q>`.
pub fn verify_commutator(
    target: &TargetManifold,
    v: &VecField,
    frame: &FrameField,
    a: &[VecField; 2],
) -> Residual {
    let d = frame.d;
    let [dv1, dv2] = map_gradient(v);
    let rmat = curvature_matrix_field(target, v, frame, &dv1, &dv2);
    let mut lhs = map_gradient(&a[1])[0].clone();
    lhs.axpy(-1.0, &map_gradient(&a[0])[1]);
    lhs.axpy(1.0, &mat_mul(&a[0], &a[1], d));
    lhs.axpy(-1.0, &mat_mul(&a[1], &a[0], d));
    diff_norms(&lhs, &rmat)
}

/// Heat-tension identity: `psi_s = sum_i (d_i psi_i + A_i psi_i)`.
pub fn verify_heat_tension_identity(
    psi_s: &VecField,
    psi: &[VecField; 2],
    a: &[VecField; 2],
) -> Residual {
    let mut rhs = map_gradient(&psi[0])[0].clone();
    rhs.axpy(1.0, &map_gradient(&psi[1])[1]);
    rhs.axpy(1.0, &mat_apply(&a[0], &psi[0]));
    rhs.axpy(1.0, &mat_apply(&a[1], &psi[1]));
    diff_norms(psi_s, &rhs)
}

/// Which levels of the sweep retain full frames.
#[derive(Debug, Clone)]
pub enum KeepLevels {
    All,
    /// Only `s = 0`.
    First,
    Indices(Vec<usize>),
}

impl KeepLevels {
    fn keeps(&self, level: usize) -> bool {
        match self {
            KeepLevels::All => true,
            KeepLevels::First => level == 0,
            KeepLevels::Indices(v) => v.contains(&level),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GaugeOptions {
    pub keep: KeepLevels,
    /// Required sup-gradient of the map at `s_max` before seeding.
    pub convergence_tol: f64,
    /// Track the integral route to the connection alongside the direct one.
    pub with_connection_check: bool,
    /// Evaluate the curvature contraction at every level.
    pub with_separation: bool,
}

impl Default for GaugeOptions {
    fn default() -> Self {
        GaugeOptions {
            keep: KeepLevels::First,
            convergence_tol: 1e-3,
            with_connection_check: true,
            with_separation: true,
        }
    }
}

/// Scalar diagnostics evaluated at one level of the sweep.
#[derive(Debug, Clone)]
pub struct LevelDiagnostics {
    pub s: f64,
    pub torsion: f64,
    pub commutator: f64,
    pub heat_tension: f64,
    /// sup |A_direct - A_integral| over points, entries and directions.
    pub connection_mismatch: Option<f64>,
    /// sup |G(x, s) - Gamma_infinity| over points and index tuples.
    pub separation: Option<f64>,
}

/// A level whose full gauge data was retained.
#[derive(Debug)]
pub struct KeptLevel {
    pub level: usize,
    pub s: f64,
    pub frame: FrameField,
    /// Integral-route connection accumulated from `s_max` down to this level.
    pub a_integral: Option<[VecField; 2]>,
}

/// Output of the backward sweep.
#[derive(Debug)]
pub struct CaloricGauge {
    pub target: Arc<TargetManifold>,
    pub grid: Arc<Grid2>,
    pub s_levels: Vec<f64>,
    /// Indexed like `s_levels`.
    pub diagnostics: Vec<LevelDiagnostics>,
    pub kept: Vec<KeptLevel>,
    /// Curvature contraction of the limit frame.
    pub gamma_infinity: CurvatureContraction,
    /// sup over points of the deviation of the limit contraction from its
    /// value at the first point.
    pub gamma_infinity_variation: f64,
    /// sup of the first-covariant-derivative contraction at the limit; zero
    /// on locally symmetric targets up to roundoff.
    pub xi_infinity_sup: f64,
    /// Crude bound on the dropped tail of the connection integral.
    pub integral_tail_bound: f64,
    /// sup |A_i| at the seed level; the construction assumes this limit
    /// vanishes, so it must be negligible.
    pub a_seed_sup: f64,
    /// Orthonormality defect of the frame at `s = 0`.
    pub frame_defect: f64,
}

impl CaloricGauge {
    pub fn frame_at_zero(&self) -> Option<&KeptLevel> {
        self.kept.iter().find(|k| k.level == 0)
    }

    pub fn worst_residuals(&self) -> (f64, f64, f64) {
        let mut t = 0.0f64;
        let mut c = 0.0f64;
        let mut h = 0.0f64;
        for d in &self.diagnostics {
            t = t.max(d.torsion);
            c = c.max(d.commutator);
            h = h.max(d.heat_tension);
        }
        (t, c, h)
    }

    pub fn worst_connection_mismatch(&self) -> Option<f64> {
        self.diagnostics
            .iter()
            .filter_map(|d| d.connection_mismatch)
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
    }

    pub fn worst_separation(&self) -> Option<f64> {
        self.diagnostics
            .iter()
            .filter_map(|d| d.separation)
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
    }
}

fn sup_abs(v: &VecField) -> f64 {
    v.data.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Evaluate the per-level diagnostics for a frame over map `v`.
fn level_diagnostics(
    target: &TargetManifold,
    v: &VecField,
    frame: &FrameField,
    s: f64,
    a_integral: Option<&[VecField; 2]>,
    gamma_inf: Option<&CurvatureContraction>,
) -> LevelDiagnostics {
    let a = connection_direct(frame);
    let psi = differential_fields(v, frame);
    let psi_s = gauge_components(frame, &heat_tension_field(target, v));
    let torsion = verify_torsion_free(&psi, &a).sup;
    let commutator = verify_commutator(target, v, frame, &a).sup;
    let heat_tension = verify_heat_tension_identity(&psi_s, &psi, &a).sup;
    let connection_mismatch = a_integral.map(|ai| {
        let mut worst = 0.0f64;
        for i in 0..2 {
            worst = worst.max(sup_diff(&a[i], &ai[i]));
        }
        worst
    });
    let separation = gamma_inf.map(|ginf| {
        let d = frame.d;
        let mut g = CurvatureContraction::zeros(d);
        let mut worst = 0.0f64;
        for idx in 0..frame.grid.n_points() {
            contraction_at_point(target, v.point(idx), frame, idx, &mut g);
            worst = worst.max(g.sup_difference(ginf));
        }
        worst
    });
    LevelDiagnostics { s, torsion, commutator, heat_tension, connection_mismatch, separation }
}

fn contraction_at_point(
    target: &TargetManifold,
    p: &[f64],
    frame: &FrameField,
    idx: usize,
    out: &mut CurvatureContraction,
) {
    let d = frame.d;
    let nn = frame.nn;
    let mut r = vec![0.0; nn];
    for j0 in 0..d {
        for j1 in 0..d {
            if j0 == j1 {
                for j2 in 0..d {
                    for j3 in 0..d {
                        out.values[((j0 * d + j1) * d + j2) * d + j3] = 0.0;
                    }
                }
                continue;
            }
            for j2 in 0..d {
                target.curvature_into(
                    p,
                    frame.vector(idx, j0),
                    frame.vector(idx, j1),
                    frame.vector(idx, j2),
                    &mut r,
                );
                for j3 in 0..d {
                    out.values[((j0 * d + j1) * d + j2) * d + j3] = dot(&r, frame.vector(idx, j3));
                }
            }
        }
    }
}

/// Integrand of the integral route: `I_i[q, p] = <R(d_s v, d_i v) e_p, e_q>`.
fn connection_integrand(
    target: &TargetManifold,
    v: &VecField,
    frame: &FrameField,
) -> [VecField; 2] {
    let vs = heat_tension_field(target, v);
    let [dv1, dv2] = map_gradient(v);
    [
        curvature_matrix_field(target, v, frame, &vs, &dv1),
        curvature_matrix_field(target, v, frame, &vs, &dv2),
    ]
}

/// Backward sweep constructing the caloric gauge over a heat trajectory.
pub fn build_caloric_gauge(traj: &HeatTrajectory, opts: &GaugeOptions) -> Result<CaloricGauge> {
    if traj.maps.len() != traj.s_levels.len() {
        return Err(Error::Gauge("trajectory must store maps at every level".into()));
    }
    let target = &traj.target;
    let last = traj.s_levels.len() - 1;
    let tail_grad = traj.sup_gradient[last];
    if tail_grad > opts.convergence_tol {
        return Err(Error::Gauge(format!(
            "flow not converged at s_max: sup gradient {tail_grad:.3e} exceeds {:.3e}; \
             increase s_max",
            opts.convergence_tol
        )));
    }

    let mut frame = seed_frame(target, &traj.maps[last], &target.reference_frame)?;
    let a_seed_sup = {
        let a = connection_direct(&frame);
        sup_abs(&a[0]).max(sup_abs(&a[1]))
    };

    // limit contraction and its spatial constancy
    let d = frame.d;
    let mut gamma_infinity = CurvatureContraction::zeros(d);
    contraction_at_point(target, traj.maps[last].point(0), &frame, 0, &mut gamma_infinity);
    let mut gamma_infinity_variation = 0.0f64;
    {
        let mut g = CurvatureContraction::zeros(d);
        for idx in 0..frame.grid.n_points() {
            contraction_at_point(target, traj.maps[last].point(idx), &frame, idx, &mut g);
            gamma_infinity_variation = gamma_infinity_variation.max(g.sup_difference(&gamma_infinity));
        }
    }
    // first-derivative contraction at the limit
    let xi_infinity_sup = {
        let p = traj.maps[last].point(0);
        let mut worst = 0.0f64;
        for j in 0..d {
            let dr = target
                .curvature_cov_derivative(
                    p,
                    1,
                    &[frame.vector(0, j)],
                    frame.vector(0, 0),
                    frame.vector(0, 1 % d),
                    frame.vector(0, 0),
                )
                .expect("first covariant derivative is supported");
            worst = worst.max(dr.iter().map(|x| x.abs()).fold(0.0, f64::max));
        }
        worst
    };

    let gamma_ref = opts.with_separation.then_some(&gamma_infinity);
    let mut a_int: Option<[VecField; 2]> = opts
        .with_connection_check
        .then(|| [VecField::zeros(&traj.grid, d * d), VecField::zeros(&traj.grid, d * d)]);
    let mut integrand_prev = opts
        .with_connection_check
        .then(|| connection_integrand(target, &traj.maps[last], &frame));
    let integral_tail_bound = integrand_prev
        .as_ref()
        .map(|i| 0.5 * (sup_abs(&i[0]) + sup_abs(&i[1])))
        .unwrap_or(0.0);

    let mut diagnostics = vec![LevelDiagnostics {
        s: 0.0,
        torsion: 0.0,
        commutator: 0.0,
        heat_tension: 0.0,
        connection_mismatch: None,
        separation: None,
    }; traj.s_levels.len()];
    diagnostics[last] = level_diagnostics(
        target,
        &traj.maps[last],
        &frame,
        traj.s_levels[last],
        a_int.as_ref(),
        gamma_ref,
    );

    let mut kept: Vec<KeptLevel> = Vec::new();
    if opts.keep.keeps(last) {
        kept.push(KeptLevel {
            level: last,
            s: traj.s_levels[last],
            frame: frame.clone(),
            a_integral: a_int.clone(),
        });
    }

    for j in (0..last).rev() {
        frame = transport_frame(target, &traj.maps[j + 1], &traj.maps[j], &frame);
        if let (Some(acc), Some(prev)) = (a_int.as_mut(), integrand_prev.as_mut()) {
            let ds = traj.s_levels[j + 1] - traj.s_levels[j];
            let integrand = connection_integrand(target, &traj.maps[j], &frame);
            for i in 0..2 {
                // A_i(s) = - int_s^{s_max} I_i, accumulated by trapezoid
                acc[i].axpy(-0.5 * ds, &integrand[i]);
                acc[i].axpy(-0.5 * ds, &prev[i]);
            }
            *prev = integrand;
        }
        diagnostics[j] = level_diagnostics(
            target,
            &traj.maps[j],
            &frame,
            traj.s_levels[j],
            a_int.as_ref(),
            gamma_ref,
        );
        if opts.keep.keeps(j) {
            kept.push(KeptLevel {
                level: j,
                s: traj.s_levels[j],
                frame: frame.clone(),
                a_integral: a_int.clone(),
            });
        }
    }
    kept.reverse();

    let frame_defect = frame.orthonormality_defect();
    Ok(CaloricGauge {
        target: target.clone(),
        grid: traj.grid.clone(),
        s_levels: traj.s_levels.clone(),
        diagnostics,
        kept,
        gamma_infinity,
        gamma_infinity_variation,
        xi_infinity_sup,
        integral_tail_bound,
        a_seed_sup,
        frame_defect,
    })
}

/// Gauge data across a centered triple of times `(t - dt, t, t + dt)`: the
/// time differential field, the time component of the connection from the
/// curvature integral plus the measured seed boundary term, and the (t, i)
/// compatibility residual `D_t psi_i = D_i psi_t`.
#[derive(Debug)]
pub struct TimeGauge {
    pub dt: f64,
    /// Frame at the center time, s = 0.
    pub frame: FrameField,
    /// Differential fields at the center time.
    pub psi: [VecField; 2],
    /// Differential fields at t - dt and t + dt in their own gauges.
    pub psi_minus: [VecField; 2],
    pub psi_plus: [VecField; 2],
    /// `psi_t = <d_t u, e_q>` by centered difference, center frame.
    pub phi_t: VecField,
    /// Spatial connection at the center time.
    pub a: [VecField; 2],
    /// Time component of the connection at s = 0.
    pub a_t: VecField,
    /// Size of the seed boundary contribution to `a_t`.
    pub a_t_boundary_sup: f64,
    /// sup residual of `d_t psi_i + A_t psi_i = d_i psi_t + A_i psi_t`.
    pub compatibility: f64,
}

/// Assemble the time gauge from the heat trajectories of three consecutive
/// states. All three must share the grid, level structure, and reference
/// frame; the center trajectory carries the full backward sweep.
pub fn gauge_for_time_series(
    traj_minus: &HeatTrajectory,
    traj_center: &HeatTrajectory,
    traj_plus: &HeatTrajectory,
    dt: f64,
    convergence_tol: f64,
) -> Result<TimeGauge> {
    if traj_minus.s_levels != traj_center.s_levels || traj_plus.s_levels != traj_center.s_levels {
        return Err(Error::Gauge("time-series trajectories must share the s-grid".into()));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Gauge(format!("time difference must be positive, got {dt}")));
    }
    let target = &traj_center.target;
    let opts = GaugeOptions {
        keep: KeepLevels::All,
        convergence_tol,
        with_connection_check: false,
        with_separation: false,
    };
    let center = build_caloric_gauge(traj_center, &opts)?;
    let first_opts = GaugeOptions { keep: KeepLevels::First, ..opts.clone() };
    let minus = build_caloric_gauge(traj_minus, &first_opts)?;
    let plus = build_caloric_gauge(traj_plus, &first_opts)?;

    let last = traj_center.s_levels.len() - 1;
    let d = target.frame_dim();
    let grid = &traj_center.grid;

    // boundary term: A_t at the seed level from the time difference of the
    // seed frames themselves
    let seed_m = seed_frame(target, &traj_minus.maps[last], &target.reference_frame)?;
    let seed_p = seed_frame(target, &traj_plus.maps[last], &target.reference_frame)?;
    let seed_c = &center.kept.last().expect("all levels kept").frame;
    let mut a_t = VecField::zeros(grid, d * d);
    for idx in 0..grid.n_points() {
        let o = a_t.point_mut(idx);
        for q in 0..d {
            for p in 0..d {
                let mut acc = 0.0;
                for (x, y, e) in zip3(seed_p.vector(idx, p), seed_m.vector(idx, p), seed_c.vector(idx, q)) {
                    acc += (x - y) / (2.0 * dt) * e;
                }
                o[q * d + p] = acc;
            }
        }
    }
    let a_t_boundary_sup = sup_abs(&a_t);

    // integral part: A_t(0) = A_t(s_max) - int_0^{s_max} <R(d_s v, d_t v) e_p, e_q> ds
    let mut prev: Option<VecField> = None;
    for j in (0..=last).rev() {
        let kept = &center.kept[j];
        debug_assert_eq!(kept.level, j);
        let v = &traj_center.maps[j];
        let vs = heat_tension_field(target, v);
        let mut vt = traj_plus.maps[j].clone();
        vt.axpy(-1.0, &traj_minus.maps[j]);
        vt.scale(1.0 / (2.0 * dt));
        let integrand = curvature_matrix_field(target, v, &kept.frame, &vs, &vt);
        if let Some(p) = prev.take() {
            let ds = traj_center.s_levels[j + 1] - traj_center.s_levels[j];
            a_t.axpy(-0.5 * ds, &integrand);
            a_t.axpy(-0.5 * ds, &p);
        }
        prev = Some(integrand);
    }

    let frame = center.kept[0].frame.clone();
    let psi = differential_fields(&traj_center.maps[0], &frame);
    let psi_minus = differential_fields(&traj_minus.maps[0], &minus.kept[0].frame);
    let psi_plus = differential_fields(&traj_plus.maps[0], &plus.kept[0].frame);
    let mut ut = traj_plus.maps[0].clone();
    ut.axpy(-1.0, &traj_minus.maps[0]);
    ut.scale(1.0 / (2.0 * dt));
    let phi_t = gauge_components(&frame, &ut);
    let a = connection_direct(&frame);

    // compatibility: d_t psi_i + A_t psi_i = d_i psi_t + A_i psi_t
    let mut compatibility = 0.0f64;
    let grad_phi_t = map_gradient(&phi_t);
    for i in 0..2 {
        let mut lhs = psi_plus[i].clone();
        lhs.axpy(-1.0, &psi_minus[i]);
        lhs.scale(1.0 / (2.0 * dt));
        lhs.axpy(1.0, &mat_apply(&a_t, &psi[i]));
        let mut rhs = grad_phi_t[i].clone();
        rhs.axpy(1.0, &mat_apply(&a[i], &phi_t));
        compatibility = compatibility.max(sup_diff(&lhs, &rhs));
    }

    Ok(TimeGauge {
        dt,
        frame,
        psi,
        psi_minus,
        psi_plus,
        phi_t,
        a,
        a_t,
        a_t_boundary_sup,
        compatibility,
    })
}

fn zip3<'a>(
    a: &'a [f64],
    b: &'a [f64],
    c: &'a [f64],
) -> impl Iterator<Item = (f64, f64, f64)> + 'a {
    a.iter().zip(b).zip(c).map(|((x, y), z)| (*x, *y, *z))
}
