//! Embedded Kahler target manifolds with closed-form geometry: orthogonal
//! projection, second fundamental form, complex structure, curvature and its
//! covariant derivatives, retraction, and exponential map.
//!
//! Three instances are supported; each is a product of round spheres/circles,
//! so every tensor has an exact blockwise formula. All are locally symmetric,
//! hence `nabla R = 0` identically.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const TANGENCY_TOL: f64 = 1e-8;
pub const RETRACT_REACH: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    /// Round two-sphere in R^3.
    Sphere2,
    /// Product of two unit circles in R^4 (flat).
    FlatTorus2,
    /// S^2 x S^2 in R^6; curvature genuinely varies over 2-planes.
    SphereProduct,
}

impl TargetKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sphere2" => Ok(TargetKind::Sphere2),
            "flat_torus2" => Ok(TargetKind::FlatTorus2),
            "sphere_product" => Ok(TargetKind::SphereProduct),
            other => Err(Error::Config(format!(
                "unknown target '{other}'; valid targets: sphere2, flat_torus2, sphere_product"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TargetKind::Sphere2 => "sphere2",
            TargetKind::FlatTorus2 => "flat_torus2",
            TargetKind::SphereProduct => "sphere_product",
        }
    }
}

/// A target instance: ambient dimension, complex dimension, base point Q and
/// the J-compatible reference frame at Q (stored interleaved:
/// `e_1, J e_1, ..., e_n, J e_n`).
#[derive(Debug, Clone)]
pub struct TargetManifold {
    pub kind: TargetKind,
    pub ambient_dim: usize,
    pub complex_dim: usize,
    pub base_point: Vec<f64>,
    pub reference_frame: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl TargetManifold {
    pub fn new(kind: TargetKind) -> Self {
        match kind {
            TargetKind::Sphere2 => {
                let q = vec![0.0, 0.0, 1.0];
                let e1 = vec![1.0, 0.0, 0.0];
                let je1 = vec![0.0, 1.0, 0.0]; // q x e1
                TargetManifold {
                    kind,
                    ambient_dim: 3,
                    complex_dim: 1,
                    base_point: q,
                    reference_frame: vec![e1, je1],
                }
            }
            TargetKind::FlatTorus2 => {
                let q = vec![1.0, 0.0, 1.0, 0.0];
                let e1 = vec![0.0, 1.0, 0.0, 0.0];
                let je1 = vec![0.0, 0.0, 0.0, 1.0];
                TargetManifold {
                    kind,
                    ambient_dim: 4,
                    complex_dim: 1,
                    base_point: q,
                    reference_frame: vec![e1, je1],
                }
            }
            TargetKind::SphereProduct => {
                let q = vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0];
                let e1 = vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
                let je1 = vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
                let e2 = vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0];
                let je2 = vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.0];
                TargetManifold {
                    kind,
                    ambient_dim: 6,
                    complex_dim: 2,
                    base_point: q,
                    reference_frame: vec![e1, je1, e2, je2],
                }
            }
        }
    }

    /// `(offset, len)` of each unit-sphere factor in ambient coordinates.
    pub fn blocks(&self) -> &'static [(usize, usize)] {
        match self.kind {
            TargetKind::Sphere2 => &[(0, 3)],
            TargetKind::FlatTorus2 => &[(0, 2), (2, 2)],
            TargetKind::SphereProduct => &[(0, 3), (3, 3)],
        }
    }

    pub fn frame_dim(&self) -> usize {
        2 * self.complex_dim
    }

    /// Euclidean distance from `q` to the manifold.
    pub fn distance_to_manifold(&self, q: &[f64]) -> f64 {
        let mut d2 = 0.0;
        for &(o, l) in self.blocks() {
            let r = dot(&q[o..o + l], &q[o..o + l]).sqrt();
            d2 += (r - 1.0) * (r - 1.0);
        }
        d2.sqrt()
    }

    fn check_on_manifold(&self, p: &[f64]) {
        let d = self.distance_to_manifold(p);
        assert!(d < TANGENCY_TOL, "target: point off manifold by {d:.3e}");
    }

    fn tangency_defect(&self, p: &[f64], x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for &(o, l) in self.blocks() {
            worst = worst.max(dot(&p[o..o + l], &x[o..o + l]).abs());
        }
        worst
    }

    fn check_tangent(&self, p: &[f64], x: &[f64]) {
        let d = self.tangency_defect(p, x);
        assert!(d < TANGENCY_TOL, "target: vector not tangent, defect {d:.3e}");
    }

    /// Orthogonal projection of an ambient vector onto T_p N.
    pub fn project_tangent_into(&self, p: &[f64], x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
        for &(o, l) in self.blocks() {
            let c = dot(&p[o..o + l], &x[o..o + l]);
            for i in o..o + l {
                out[i] -= c * p[i];
            }
        }
    }

    pub fn project_tangent(&self, p: &[f64], x: &[f64]) -> Vec<f64> {
        self.check_on_manifold(p);
        let mut out = vec![0.0; self.ambient_dim];
        self.project_tangent_into(p, x, &mut out);
        out
    }

    /// Second fundamental form of the embedding, normal-valued:
    /// `S(X,Y) = -sum_blocks <X_b, Y_b> p_b`.
    pub fn second_fundamental_form_into(&self, p: &[f64], x: &[f64], y: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for &(o, l) in self.blocks() {
            let c = -dot(&x[o..o + l], &y[o..o + l]);
            for i in o..o + l {
                out[i] = c * p[i];
            }
        }
    }

    pub fn second_fundamental_form(&self, p: &[f64], x: &[f64], y: &[f64]) -> Vec<f64> {
        self.check_on_manifold(p);
        self.check_tangent(p, x);
        self.check_tangent(p, y);
        let mut out = vec![0.0; self.ambient_dim];
        self.second_fundamental_form_into(p, x, y, &mut out);
        out
    }

    /// The complex structure J applied to a tangent vector.
    pub fn complex_structure_into(&self, p: &[f64], x: &[f64], out: &mut [f64]) {
        match self.kind {
            TargetKind::Sphere2 => cross_into(p, x, out),
            TargetKind::SphereProduct => {
                cross_into(&p[0..3], &x[0..3], &mut out[0..3]);
                cross_into(&p[3..6], &x[3..6], &mut out[3..6]);
            }
            TargetKind::FlatTorus2 => {
                // J t1 = t2, J t2 = -t1 with t_i the positively oriented unit
                // tangent of each circle factor
                let t1 = [-p[1], p[0]];
                let t2 = [-p[3], p[2]];
                let a = x[0] * t1[0] + x[1] * t1[1];
                let b = x[2] * t2[0] + x[3] * t2[1];
                out[0] = -b * t1[0];
                out[1] = -b * t1[1];
                out[2] = a * t2[0];
                out[3] = a * t2[1];
            }
        }
    }

    pub fn complex_structure(&self, p: &[f64], x: &[f64]) -> Vec<f64> {
        self.check_on_manifold(p);
        self.check_tangent(p, x);
        let mut out = vec![0.0; self.ambient_dim];
        self.complex_structure_into(p, x, &mut out);
        out
    }

    /// Riemann curvature `R(X,Y)Z`; blockwise constant-curvature-one formula,
    /// identically zero on the flat torus.
    pub fn curvature_into(&self, _p: &[f64], x: &[f64], y: &[f64], z: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        if self.kind == TargetKind::FlatTorus2 {
            return;
        }
        for &(o, l) in self.blocks() {
            let yz = dot(&y[o..o + l], &z[o..o + l]);
            let xz = dot(&x[o..o + l], &z[o..o + l]);
            for i in o..o + l {
                out[i] = yz * x[i] - xz * y[i];
            }
        }
    }

    pub fn curvature(&self, p: &[f64], x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        self.check_on_manifold(p);
        for v in [x, y, z] {
            self.check_tangent(p, v);
        }
        let mut out = vec![0.0; self.ambient_dim];
        self.curvature_into(p, x, y, z, &mut out);
        out
    }

    /// Covariant derivatives of R up to second order. All supported targets
    /// are locally symmetric, so the result is identically zero; the entry
    /// point exists so remainder integrals downstream are exercised against
    /// a genuine zero.
    pub fn curvature_cov_derivative(
        &self,
        p: &[f64],
        order: u32,
        directions: &[&[f64]],
        x: &[f64],
        y: &[f64],
        z: &[f64],
    ) -> Result<Vec<f64>> {
        if order == 0 {
            return Ok(self.curvature(p, x, y, z));
        }
        if order > 2 {
            return Err(Error::Target(format!("nabla^{order} R unsupported (max order 2)")));
        }
        if directions.len() != order as usize {
            return Err(Error::Target("direction count must match derivative order".into()));
        }
        self.check_on_manifold(p);
        Ok(vec![0.0; self.ambient_dim])
    }

    /// Nearest-point retraction: blockwise normalization.
    pub fn retract_into(&self, q: &[f64], out: &mut [f64]) {
        for &(o, l) in self.blocks() {
            let r = dot(&q[o..o + l], &q[o..o + l]).sqrt();
            for i in o..o + l {
                out[i] = q[i] / r;
            }
        }
    }

    pub fn retract(&self, q: &[f64]) -> Vec<f64> {
        let d = self.distance_to_manifold(q);
        assert!(d < RETRACT_REACH, "target: point too far from manifold to retract ({d:.3e})");
        let mut out = vec![0.0; self.ambient_dim];
        self.retract_into(q, &mut out);
        out
    }

    /// Riemannian exponential map; blockwise great circles.
    pub fn exp_map_into(&self, p: &[f64], v: &[f64], out: &mut [f64]) {
        for &(o, l) in self.blocks() {
            let a = dot(&v[o..o + l], &v[o..o + l]).sqrt();
            if a < 1e-14 {
                for i in o..o + l {
                    out[i] = p[i] + v[i];
                }
                // renormalize the tiny drift
                let r = dot(&out[o..o + l], &out[o..o + l]).sqrt();
                for i in o..o + l {
                    out[i] /= r;
                }
            } else {
                let (s, c) = a.sin_cos();
                for i in o..o + l {
                    out[i] = c * p[i] + s * v[i] / a;
                }
            }
        }
    }

    pub fn exp_map(&self, p: &[f64], v: &[f64]) -> Vec<f64> {
        self.check_on_manifold(p);
        self.check_tangent(p, v);
        let mut out = vec![0.0; self.ambient_dim];
        self.exp_map_into(p, v, &mut out);
        out
    }

    /// Geodesic through `p` with initial velocity `v`, evaluated at time `t`;
    /// returns the point and its velocity.
    pub fn geodesic(&self, p: &[f64], v: &[f64], t: f64) -> (Vec<f64>, Vec<f64>) {
        let mut point = vec![0.0; self.ambient_dim];
        let mut vel = vec![0.0; self.ambient_dim];
        for &(o, l) in self.blocks() {
            let a = dot(&v[o..o + l], &v[o..o + l]).sqrt();
            if a < 1e-14 {
                point[o..o + l].copy_from_slice(&p[o..o + l]);
                continue;
            }
            let (s, c) = (a * t).sin_cos();
            for i in o..o + l {
                point[i] = c * p[i] + s * v[i] / a;
                vel[i] = a * (-s * p[i] + c * v[i] / a);
            }
        }
        (point, vel)
    }

    /// Parallel transport of a tangent vector along the geodesic
    /// `t -> exp_p(t v)`; blockwise closed form (the component along the
    /// direction of motion rotates with it, the rest is constant).
    pub fn parallel_transport_geodesic(&self, p: &[f64], v: &[f64], t: f64, e: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient_dim];
        for &(o, l) in self.blocks() {
            let a = dot(&v[o..o + l], &v[o..o + l]).sqrt();
            if a < 1e-14 {
                out[o..o + l].copy_from_slice(&e[o..o + l]);
                continue;
            }
            let vhat: Vec<f64> = v[o..o + l].iter().map(|x| x / a).collect();
            let alpha = dot(&e[o..o + l], &vhat);
            let (s, c) = (a * t).sin_cos();
            for (j, i) in (o..o + l).enumerate() {
                let w = e[i] - alpha * vhat[j]; // fixed part, perpendicular to the circle of motion
                out[i] = w + alpha * (-s * p[i] + c * vhat[j]);
            }
        }
        out
    }

    /// Parallel transport of a tangent vector at `p` to `q` along the minimal
    /// connecting geodesic, in the stable double-reflection form
    /// `e - <e, q_b> (p_b + q_b) / (1 + <p_b, q_b>)` per block. Exact for any
    /// separation short of antipodal; an isometry commuting with J.
    pub fn transport_between_into(&self, p: &[f64], q: &[f64], e: &[f64], out: &mut [f64]) {
        for &(o, l) in self.blocks() {
            let c = dot(&p[o..o + l], &q[o..o + l]);
            assert!(c > -0.5, "target: transport step too close to antipodal (cos = {c:.3})");
            let coef = dot(&e[o..o + l], &q[o..o + l]) / (1.0 + c);
            for i in o..o + l {
                out[i] = e[i] - coef * (p[i] + q[i]);
            }
        }
    }

    pub fn transport_between(&self, p: &[f64], q: &[f64], e: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient_dim];
        self.transport_between_into(p, q, e, &mut out);
        out
    }

    /// The embedding differential applied to a tangent vector is the vector
    /// itself in ambient coordinates.
    pub fn embedding_differential(&self, p: &[f64], e: &[f64]) -> Vec<f64> {
        self.check_on_manifold(p);
        self.check_tangent(p, e);
        e.to_vec()
    }

    /// Covariant derivative of the embedding differential; by the Gauss
    /// formula this is the second fundamental form.
    pub fn embedding_differential_derivative(&self, p: &[f64], x: &[f64], y: &[f64]) -> Vec<f64> {
        self.second_fundamental_form(p, x, y)
    }

    /// Distance between two points on the manifold (blockwise arc length).
    pub fn geodesic_distance(&self, p: &[f64], q: &[f64]) -> f64 {
        let mut d2 = 0.0;
        for &(o, l) in self.blocks() {
            let c = dot(&p[o..o + l], &q[o..o + l]).clamp(-1.0, 1.0);
            let a = c.acos();
            d2 += a * a;
        }
        d2.sqrt()
    }
}

/// The 4-index curvature contraction in a given orthonormal frame:
/// `G[j0][j1][j2][j3] = <R(E_{j0}, E_{j1}) E_{j2}, E_{j3}>`.
#[derive(Debug, Clone)]
pub struct CurvatureContraction {
    pub dim: usize,
    pub values: Vec<f64>,
}

impl CurvatureContraction {
    pub fn zeros(dim: usize) -> Self {
        CurvatureContraction { dim, values: vec![0.0; dim * dim * dim * dim] }
    }

    pub fn get(&self, j0: usize, j1: usize, j2: usize, j3: usize) -> f64 {
        let d = self.dim;
        self.values[((j0 * d + j1) * d + j2) * d + j3]
    }

    pub fn sup_difference(&self, other: &CurvatureContraction) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Evaluate the curvature contraction of `frame` (2n ambient vectors,
/// flattened `frame[j * N .. (j+1) * N]`) at the point `p`.
pub fn curvature_contraction(
    target: &TargetManifold,
    p: &[f64],
    frame: &[f64],
) -> CurvatureContraction {
    let d = target.frame_dim();
    let nn = target.ambient_dim;
    let mut out = CurvatureContraction::zeros(d);
    let mut rxyz = vec![0.0; nn];
    for j0 in 0..d {
        for j1 in 0..d {
            if j1 == j0 {
                continue; // antisymmetric slot
            }
            for j2 in 0..d {
                target.curvature_into(
                    p,
                    &frame[j0 * nn..(j0 + 1) * nn],
                    &frame[j1 * nn..(j1 + 1) * nn],
                    &frame[j2 * nn..(j2 + 1) * nn],
                    &mut rxyz,
                );
                for j3 in 0..d {
                    let v = dot(&rxyz, &frame[j3 * nn..(j3 + 1) * nn]);
                    out.values[((j0 * d + j1) * d + j2) * d + j3] = v;
                }
            }
        }
    }
    out
}

fn cross_into(a: &[f64], b: &[f64], out: &mut [f64]) {
    out[0] = a[1] * b[2] - a[2] * b[1];
    out[1] = a[2] * b[0] - a[0] * b[2];
    out[2] = a[0] * b[1] - a[1] * b[0];
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn all_targets() -> Vec<TargetManifold> {
        vec![
            TargetManifold::new(TargetKind::Sphere2),
            TargetManifold::new(TargetKind::FlatTorus2),
            TargetManifold::new(TargetKind::SphereProduct),
        ]
    }

    fn random_point(t: &TargetManifold, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut p = vec![0.0; t.ambient_dim];
        for &(o, l) in t.blocks() {
            loop {
                let mut r2 = 0.0f64;
                for i in o..o + l {
                    p[i] = rng.gen_range(-1.0..1.0);
                    r2 += p[i] * p[i];
                }
                if r2 > 1e-4 {
                    let r = r2.sqrt();
                    for i in o..o + l {
                        p[i] /= r;
                    }
                    break;
                }
            }
        }
        p
    }

    fn random_tangent(t: &TargetManifold, p: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
        let raw: Vec<f64> = (0..t.ambient_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut out = vec![0.0; t.ambient_dim];
        t.project_tangent_into(p, &raw, &mut out);
        out
    }

    #[test]
    fn projection_basics_on_sphere() {
        let t = TargetManifold::new(TargetKind::Sphere2);
        let p = [0.0, 0.0, 1.0];
        assert_eq!(t.project_tangent(&p, &[0.0, 0.0, 5.0]), vec![0.0, 0.0, 0.0]);
        assert_eq!(t.project_tangent(&p, &[1.0, 2.0, 3.0]), vec![1.0, 2.0, 0.0]);
    }

    #[test]
    fn projection_is_idempotent_and_kills_normals() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for t in all_targets() {
            for _ in 0..20 {
                let p = random_point(&t, &mut rng);
                let x: Vec<f64> = (0..t.ambient_dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let px = t.project_tangent(&p, &x);
                let ppx = t.project_tangent(&p, &px);
                for (a, b) in px.iter().zip(ppx.iter()) {
                    assert!((a - b).abs() < 1e-12);
                }
                // orthogonal to every normal basis vector (block radial directions)
                for &(o, l) in t.blocks() {
                    assert!(dot(&px[o..o + l], &p[o..o + l]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    #[should_panic(expected = "off manifold")]
    fn projection_rejects_off_manifold_points() {
        let t = TargetManifold::new(TargetKind::Sphere2);
        t.project_tangent(&[0.0, 0.0, 1.5], &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn sff_unit_sphere_formula() {
        let t = TargetManifold::new(TargetKind::Sphere2);
        let p = [0.0, 0.0, 1.0];
        let x = [1.0, 0.0, 0.0];
        assert_eq!(t.second_fundamental_form(&p, &x, &x), vec![0.0, 0.0, -1.0]);
    }

    #[test]
    fn sff_cross_factor_vanishes_on_torus() {
        let t = TargetManifold::new(TargetKind::FlatTorus2);
        let p = [1.0, 0.0, 0.0, 1.0];
        let x = [0.0, 1.0, 0.0, 0.0]; // tangent to first circle
        let y = [0.0, 0.0, -1.0, 0.0]; // tangent to second circle
        let s = t.second_fundamental_form(&p, &x, &y);
        assert!(s.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn gauss_equation_links_sff_and_curvature() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for t in all_targets() {
            for _ in 0..20 {
                let p = random_point(&t, &mut rng);
                let x = random_tangent(&t, &p, &mut rng);
                let y = random_tangent(&t, &p, &mut rng);
                let sxx = t.second_fundamental_form(&p, &x, &x);
                let syy = t.second_fundamental_form(&p, &y, &y);
                let sxy = t.second_fundamental_form(&p, &x, &y);
                let syx = t.second_fundamental_form(&p, &y, &x);
                for (a, b) in sxy.iter().zip(syx.iter()) {
                    assert_eq!(a, b); // symmetric by construction
                }
                let lhs = dot(&sxx, &syy) - dot(&sxy, &sxy);
                let rxy_y = t.curvature(&p, &x, &y, &y);
                let rhs = dot(&rxy_y, &x);
                assert!((lhs - rhs).abs() < 1e-10, "gauss equation residual {}", lhs - rhs);
            }
        }
    }

    #[test]
    fn complex_structure_sphere_is_cross_product() {
        let t = TargetManifold::new(TargetKind::Sphere2);
        let j = t.complex_structure(&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]);
        assert_eq!(j, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn complex_structure_algebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for t in all_targets() {
            for _ in 0..20 {
                let p = random_point(&t, &mut rng);
                let x = random_tangent(&t, &p, &mut rng);
                let y = random_tangent(&t, &p, &mut rng);
                let jx = t.complex_structure(&p, &x);
                let jjx = t.complex_structure(&p, &jx);
                for (a, b) in jjx.iter().zip(x.iter()) {
                    assert!((a + b).abs() < 1e-12, "J^2 != -I");
                }
                assert!(dot(&jx, &x).abs() < 1e-12);
                let jy = t.complex_structure(&p, &y);
                assert!((dot(&jx, &jy) - dot(&x, &y)).abs() < 1e-12, "J not isometric");
            }
        }
    }

    #[test]
    fn curvature_closed_forms() {
        let ts = TargetManifold::new(TargetKind::Sphere2);
        let p = [0.0, 0.0, 1.0];
        let x = [1.0, 0.0, 0.0];
        let y = [0.0, 1.0, 0.0];
        let r = ts.curvature(&p, &x, &y, &y);
        assert_eq!(dot(&r, &x), 1.0, "sectional curvature of S^2 is one");

        let tt = TargetManifold::new(TargetKind::FlatTorus2);
        let q = [1.0, 0.0, 1.0, 0.0];
        let u = [0.0, 1.0, 0.0, 0.3];
        let pu = tt.project_tangent(&q, &u);
        let r0 = tt.curvature(&q, &pu, &pu, &pu);
        assert!(r0.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn product_curvature_splits_by_factor() {
        let t = TargetManifold::new(TargetKind::SphereProduct);
        let p = [0.0, 0.0, 1.0, 0.0, 0.0, 1.0];
        let x1 = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let y1 = [0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        let x2 = [0.0, 0.0, 0.0, 1.0, 0.0, 0.0];
        // same factor: sectional curvature one
        let r = t.curvature(&p, &x1, &y1, &y1);
        assert!((dot(&r, &x1) - 1.0).abs() < 1e-15);
        // mixed plane: flat
        let rm = t.curvature(&p, &x1, &x2, &x2);
        assert!(rm.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn curvature_symmetries_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for t in all_targets() {
            for _ in 0..10 {
                let p = random_point(&t, &mut rng);
                let x = random_tangent(&t, &p, &mut rng);
                let y = random_tangent(&t, &p, &mut rng);
                let z = random_tangent(&t, &p, &mut rng);
                let w = random_tangent(&t, &p, &mut rng);
                let rxy = t.curvature(&p, &x, &y, &z);
                let ryx = t.curvature(&p, &y, &x, &z);
                for (a, b) in rxy.iter().zip(ryx.iter()) {
                    assert!((a + b).abs() < 1e-10, "not antisymmetric in (X,Y)");
                }
                // pair symmetry
                let lhs = dot(&t.curvature(&p, &x, &y, &z), &w);
                let rhs = dot(&t.curvature(&p, &z, &w, &x), &y);
                assert!((lhs - rhs).abs() < 1e-10, "pair symmetry fails");
                // first Bianchi
                let mut b = t.curvature(&p, &x, &y, &z);
                let b2 = t.curvature(&p, &y, &z, &x);
                let b3 = t.curvature(&p, &z, &x, &y);
                for i in 0..t.ambient_dim {
                    b[i] += b2[i] + b3[i];
                }
                assert!(b.iter().all(|v| v.abs() < 1e-10), "bianchi fails");
                // Kahler compatibility
                let jz = t.complex_structure(&p, &z);
                let jw = t.complex_structure(&p, &w);
                let k1 = dot(&t.curvature(&p, &x, &y, &jz), &jw);
                assert!((k1 - lhs).abs() < 1e-10, "kahler compatibility fails");
            }
        }
    }

    #[test]
    fn cov_derivative_vanishes_and_caps_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for t in all_targets() {
            let p = random_point(&t, &mut rng);
            let x = random_tangent(&t, &p, &mut rng);
            let y = random_tangent(&t, &p, &mut rng);
            let z = random_tangent(&t, &p, &mut rng);
            let w = random_tangent(&t, &p, &mut rng);
            let d1 = t.curvature_cov_derivative(&p, 1, &[&w], &x, &y, &z).unwrap();
            assert!(d1.iter().all(|v| *v == 0.0));
            let d2 = t.curvature_cov_derivative(&p, 2, &[&w, &w], &x, &y, &z).unwrap();
            assert!(d2.iter().all(|v| *v == 0.0));
            assert!(t.curvature_cov_derivative(&p, 3, &[&w, &w, &w], &x, &y, &z).is_err());
        }
    }

    #[test]
    fn transport_difference_quotient_of_curvature_vanishes() {
        // finite-difference oracle for nabla R = 0: evaluate R on parallel
        // transported vectors along a geodesic and difference back
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for t in all_targets() {
            let p = random_point(&t, &mut rng);
            let w = random_tangent(&t, &p, &mut rng);
            let x = random_tangent(&t, &p, &mut rng);
            let y = random_tangent(&t, &p, &mut rng);
            let z = random_tangent(&t, &p, &mut rng);
            let h = 1e-4;
            let (ph, _) = t.geodesic(&p, &w, h);
            let xh = t.parallel_transport_geodesic(&p, &w, h, &x);
            let yh = t.parallel_transport_geodesic(&p, &w, h, &y);
            let zh = t.parallel_transport_geodesic(&p, &w, h, &z);
            let rh = t.curvature(&ph, &xh, &yh, &zh);
            // transport the result back and compare
            let (_, wh) = t.geodesic(&p, &w, h);
            let back = t.parallel_transport_geodesic(&ph, &wh, -h, &rh);
            let r0 = t.curvature(&p, &x, &y, &z);
            let quot = back
                .iter()
                .zip(r0.iter())
                .map(|(a, b)| (a - b).abs() / h)
                .fold(0.0, f64::max);
            assert!(quot < 1e-6, "difference quotient {quot}");
        }
    }

    #[test]
    fn retract_basics() {
        let t = TargetManifold::new(TargetKind::Sphere2);
        let q = [0.0, 0.0, 1.05];
        let r = t.retract(&q);
        assert!((r[2] - 1.0).abs() < 1e-15);
        let same = t.retract(&r);
        for (a, b) in r.iter().zip(same.iter()) {
            assert!((a - b).abs() < 1e-15);
        }

        let tp = TargetManifold::new(TargetKind::SphereProduct);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = random_point(&tp, &mut rng);
        let q: Vec<f64> = p.iter().map(|v| v * 1.02 + 0.001).collect();
        let r1 = tp.retract(&q);
        let r2 = tp.retract(&r1);
        let err = r1.iter().zip(r2.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-14, "retract not idempotent: {err}");
        assert!(tp.distance_to_manifold(&r1) < 1e-12);
    }

    #[test]
    #[should_panic(expected = "too far")]
    fn retract_rejects_far_points() {
        let t = TargetManifold::new(TargetKind::Sphere2);
        t.retract(&[0.0, 0.0, 2.0]);
    }

    #[test]
    fn embedding_differential_identities() {
        let t = TargetManifold::new(TargetKind::Sphere2);
        let p = [0.0, 0.0, 1.0];
        let e = [1.0, 0.0, 0.0];
        assert_eq!(t.embedding_differential(&p, &e), vec![1.0, 0.0, 0.0]);
        assert_eq!(t.embedding_differential_derivative(&p, &e, &e), vec![0.0, 0.0, -1.0]);

        let tp = TargetManifold::new(TargetKind::SphereProduct);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let p = random_point(&tp, &mut rng);
            let x = random_tangent(&tp, &p, &mut rng);
            let y = random_tangent(&tp, &p, &mut rng);
            let ddp = tp.embedding_differential_derivative(&p, &x, &y);
            let s = tp.second_fundamental_form(&p, &x, &y);
            for (a, b) in ddp.iter().zip(s.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reference_frames_are_orthonormal_and_j_compatible() {
        for t in all_targets() {
            let d = t.frame_dim();
            for a in 0..d {
                for b in 0..d {
                    let expect = if a == b { 1.0 } else { 0.0 };
                    let got = dot(&t.reference_frame[a], &t.reference_frame[b]);
                    assert!((got - expect).abs() < 1e-14);
                }
            }
            for alpha in 0..t.complex_dim {
                let je = t.complex_structure(&t.base_point, &t.reference_frame[2 * alpha]);
                for (a, b) in je.iter().zip(t.reference_frame[2 * alpha + 1].iter()) {
                    assert!((a - b).abs() < 1e-14, "frame not J-compatible");
                }
            }
        }
    }

    #[test]
    fn endpoint_transport_matches_geodesic_transport() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for t in all_targets() {
            for _ in 0..10 {
                let p = random_point(&t, &mut rng);
                let v = random_tangent(&t, &p, &mut rng);
                let e = random_tangent(&t, &p, &mut rng);
                let tt = rng.gen_range(0.05..0.8);
                let (q, _) = t.geodesic(&p, &v, tt);
                let a = t.parallel_transport_geodesic(&p, &v, tt, &e);
                let b = t.transport_between(&p, &q, &e);
                for (x, y) in a.iter().zip(b.iter()) {
                    assert!((x - y).abs() < 1e-12, "transport forms disagree: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn endpoint_transport_is_stable_near_identity() {
        let t = TargetManifold::new(TargetKind::SphereProduct);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = random_point(&t, &mut rng);
        let e = random_tangent(&t, &p, &mut rng);
        let out = t.transport_between(&p, &p, &e);
        for (x, y) in out.iter().zip(e.iter()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn parallel_transport_preserves_metric_and_j() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for t in all_targets() {
            let p = random_point(&t, &mut rng);
            let v = random_tangent(&t, &p, &mut rng);
            let x = random_tangent(&t, &p, &mut rng);
            let y = random_tangent(&t, &p, &mut rng);
            let tt = 0.7;
            let (pt, _) = t.geodesic(&p, &v, tt);
            let xt = t.parallel_transport_geodesic(&p, &v, tt, &x);
            let yt = t.parallel_transport_geodesic(&p, &v, tt, &y);
            assert!(t.tangency_defect(&pt, &xt) < 1e-12);
            assert!((dot(&xt, &yt) - dot(&x, &y)).abs() < 1e-12);
            // J commutes with transport (Kahler)
            let jx = t.complex_structure(&p, &x);
            let jxt = t.parallel_transport_geodesic(&p, &v, tt, &jx);
            let jxt2 = t.complex_structure(&pt, &xt);
            for (a, b) in jxt.iter().zip(jxt2.iter()) {
                assert!((a - b).abs() < 1e-12, "transport does not commute with J");
            }
        }
    }
}
