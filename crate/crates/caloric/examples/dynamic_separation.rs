//! Dynamic separation: in the caloric gauge the curvature contraction
//! G(s, x) splits into a constant limit term plus an integral that vanishes
//! on locally symmetric targets. All three built-in targets are locally
//! symmetric, so G should equal its limit to quadrature precision at every
//! level, and the limit itself should be spatially constant.

use caloric::gauge::{build_caloric_gauge, GaugeOptions, KeepLevels};
use caloric::heatflow::{heat_solve, HeatOptions};
use caloric::spectral::{Grid2, VecField};
use caloric::target::{TargetKind, TargetManifold};
use std::sync::Arc;

fn main() {
    for kind in [TargetKind::Sphere2, TargetKind::FlatTorus2, TargetKind::SphereProduct] {
        let target = Arc::new(TargetManifold::new(kind));
        let grid = Grid2::new(32, 2.0 * std::f64::consts::PI);

        let q = &target.base_point;
        let e0 = &target.reference_frame[0];
        let e1 = &target.reference_frame[1];
        let mut u0 = VecField::zeros(&grid, target.ambient_dim);
        let mut pt = vec![0.0; target.ambient_dim];
        for j in 0..grid.n() {
            for i in 0..grid.n() {
                let (x, y) = (grid.coord(i), grid.coord(j));
                let a = 0.05 * x.sin() * y.cos();
                let b = 0.05 * (x + y).cos();
                let tangent: Vec<f64> = e0.iter().zip(e1).map(|(p, r)| a * p + b * r).collect();
                target.exp_map_into(q, &tangent, &mut pt);
                u0.point_mut(j * grid.n() + i).copy_from_slice(&pt);
            }
        }

        let traj = heat_solve(&target, &u0, &HeatOptions::default()).expect("heat flow");
        let opts = GaugeOptions {
            keep: KeepLevels::First,
            with_connection_check: false,
            with_separation: true,
            ..Default::default()
        };
        let gauge = build_caloric_gauge(&traj, &opts).expect("gauge");

        println!("target {}:", kind.name());
        println!(
            "  sup_s sup_x |G(s,x) - Gamma_inf|   {:.3e}",
            gauge.worst_separation().unwrap()
        );
        println!(
            "  spatial variation of Gamma_inf     {:.3e}",
            gauge.gamma_infinity_variation
        );
        println!(
            "  first covariant derivative of R    {:.3e}",
            gauge.xi_infinity_sup
        );
        let g = &gauge.gamma_infinity;
        println!("  a few limit entries:");
        for (p, q2, r, t) in [(0, 0, 0, 0), (0, 1, 1, 0), (0, 1, 0, 1)] {
            println!(
                "    Gamma_inf[{p}{q2}{r}{t}] = {:+.6}",
                g.get(p, q2, r, t)
            );
        }
        println!();
    }
}
