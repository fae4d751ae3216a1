//! End-to-end consistency of the gauged Schrodinger equation: evolve the
//! map a step forward and backward, build caloric gauges for the three time
//! slices, and measure how well the differential fields satisfy the gauged
//! evolution equations at s = 0.

use caloric::heatflow::HeatOptions;
use caloric::slflow::{gauged_residual, max_stable_dt, sl_step};
use caloric::spectral::{Grid2, VecField};
use caloric::target::{TargetKind, TargetManifold};
use std::sync::Arc;

fn main() {
    let target = Arc::new(TargetManifold::new(TargetKind::Sphere2));
    let grid = Grid2::new(32, 2.0 * std::f64::consts::PI);

    let q = &target.base_point;
    let e0 = &target.reference_frame[0];
    let e1 = &target.reference_frame[1];
    let mut u = VecField::zeros(&grid, 3);
    let mut pt = vec![0.0; 3];
    for j in 0..grid.n() {
        for i in 0..grid.n() {
            let (x, y) = (grid.coord(i), grid.coord(j));
            let a = 0.05 * x.sin() * y.cos();
            let b = 0.05 * (x + y).cos();
            let tangent: Vec<f64> = e0.iter().zip(e1).map(|(p, r)| a * p + b * r).collect();
            target.exp_map_into(q, &tangent, &mut pt);
            u.point_mut(j * grid.n() + i).copy_from_slice(&pt);
        }
    }

    let heat = HeatOptions::default();
    println!("time-difference width vs gauged equation residual:");
    println!("      dt     equation    first-order  compatibility");
    for halvings in 0..3 {
        let dt = 0.02 / (1u32 << halvings) as f64;
        // march to u(t +/- dt) with steps no larger than the stability bound
        let steps = (dt / max_stable_dt(&grid)).ceil() as usize;
        let sub = dt / steps as f64;
        let mut plus = u.clone();
        let mut minus = u.clone();
        for _ in 0..steps {
            plus = sl_step(&target, &plus, sub).expect("step");
            minus = sl_step(&target, &minus, -sub).expect("step");
        }
        let report = gauged_residual(&target, &minus, &u, &plus, dt, &heat).expect("residual");
        println!(
            "{dt:>9.4}  {:.3e}  {:.3e}  {:.3e}",
            report.equation, report.first_order, report.compatibility
        );
    }
    println!("\nthe residual is dominated by the centered-difference error, so");
    println!("halving dt shrinks it by roughly a factor of four");
}
