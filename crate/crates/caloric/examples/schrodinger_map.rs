//! Evolve a small perturbation of the base point by the Schrodinger map
//! flow and watch its conservation laws.

use caloric::slflow::{sl_solve, SlOptions};
use caloric::spectral::{Grid2, VecField};
use caloric::target::{TargetKind, TargetManifold};
use std::sync::Arc;

fn main() {
    let target = Arc::new(TargetManifold::new(TargetKind::Sphere2));
    let grid = Grid2::new(64, 2.0 * std::f64::consts::PI);

    let q = &target.base_point;
    let e0 = &target.reference_frame[0];
    let e1 = &target.reference_frame[1];
    let mut u0 = VecField::zeros(&grid, 3);
    let mut pt = vec![0.0; 3];
    for j in 0..grid.n() {
        for i in 0..grid.n() {
            let (x, y) = (grid.coord(i), grid.coord(j));
            let a = 0.1 * x.sin() * y.cos();
            let b = 0.1 * (2.0 * x - y).cos();
            let tangent: Vec<f64> = e0.iter().zip(e1).map(|(p, r)| a * p + b * r).collect();
            target.exp_map_into(q, &tangent, &mut pt);
            u0.point_mut(j * grid.n() + i).copy_from_slice(&pt);
        }
    }

    let opts = SlOptions { t_final: 0.5, dt: None, store_every: 200 };
    let series = sl_solve(&target, &u0, &opts).expect("flow");

    println!("dt = {:.3e}, {} samples stored", series.dt, series.t_grid.len());
    println!("\n      t     energy          mass            sup dist Q");
    for i in 0..series.t_grid.len() {
        println!(
            "{:>7.4}  {:.12e}  {:.6e}  {:.6e}",
            series.t_grid[i], series.energy[i], series.mass[i], series.supdist[i]
        );
    }
    println!(
        "\nrelative energy drift over the run: {:.3e}",
        series.relative_energy_drift()
    );
}
