//! Harmonic-map heat flow of a bump on the two-sphere: energy dissipation
//! and the dyadic decay of gradient norms in the flow time s.

use caloric::heatflow::{decay_rate, decay_window, dirichlet_energy, heat_solve, HeatOptions};
use caloric::spectral::{Grid2, VecField};
use caloric::target::{TargetKind, TargetManifold};
use std::sync::Arc;

fn main() {
    let target = Arc::new(TargetManifold::new(TargetKind::Sphere2));
    let grid = Grid2::new(64, 2.0 * std::f64::consts::PI);

    // exponential graph of a smooth tangent bump over the base point
    let q = &target.base_point;
    let e0 = &target.reference_frame[0];
    let e1 = &target.reference_frame[1];
    let mut u0 = VecField::zeros(&grid, 3);
    for j in 0..grid.n() {
        for i in 0..grid.n() {
            let (x, y) = (grid.coord(i), grid.coord(j));
            // content spread over several dyadic shells so the decay rates
            // have a self-similar window to show themselves in
            let a = 0.15 * x.sin() * y.cos()
                + 0.06 * (4.0 * x + y).cos()
                + 0.03 * (7.0 * y - 2.0 * x).sin()
                + 0.015 * (13.0 * x).cos();
            let b = 0.15 * (x + y).cos() + 0.05 * (5.0 * y).sin() + 0.02 * (11.0 * y + x).cos();
            let tangent: Vec<f64> = e0.iter().zip(e1).map(|(p, r)| a * p + b * r).collect();
            let mut pt = vec![0.0; 3];
            target.exp_map_into(q, &tangent, &mut pt);
            u0.point_mut(j * grid.n() + i).copy_from_slice(&pt);
        }
    }

    let opts = HeatOptions { s_max: 64.0, ..Default::default() };
    let traj = heat_solve(&target, &u0, &opts).expect("heat flow");

    println!("levels: {}", traj.s_levels.len());
    println!("\n        s     energy      sup|dv|");
    for l in (0..traj.maps.len()).step_by(traj.maps.len() / 12) {
        println!(
            "{:>9.4}  {:.6e}  {:.6e}",
            traj.s_levels[l],
            dirichlet_energy(&traj.maps[l]),
            traj.sup_gradient[l]
        );
    }

    // smoothing rates: |d^{j+1} v(s)| ~ s^{-j/2} in the mid-range window
    let window = decay_window(&traj, 4.0).expect("decay window");
    println!("\nfit window: s in [{:.3}, {:.3}]", window.0, window.1);
    for j in [1usize, 2] {
        let (slope, count) = decay_rate(&traj, j, window).expect("decay fit");
        println!("order-{j} seminorm decay slope: {slope:.3} (expected {:.1}, {count} samples)", -(j as f64) / 2.0);
    }
}
