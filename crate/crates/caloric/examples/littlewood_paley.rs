//! Dyadic frequency decomposition on the torus: split a field into
//! Littlewood-Paley shells, verify the pieces sum back, and print the
//! per-shell energy profile.

use caloric::spectral::{
    dft_forward, lp_project, lp_shell_l2, sobolev_seminorm, spatial_norms, Grid2, ScalarField,
};

fn main() {
    let grid = Grid2::new(128, 2.0 * std::f64::consts::PI);
    let mut f = ScalarField::zeros(&grid);
    for j in 0..grid.n() {
        for i in 0..grid.n() {
            let (x, y) = (grid.coord(i), grid.coord(j));
            f.data[j * grid.n() + i] =
                x.sin() + 0.5 * (3.0 * x + y).cos() + 0.1 * (11.0 * y).sin();
        }
    }

    let norms = spatial_norms(&f);
    println!("field: L2 = {:.6}, sup = {:.6}", norms.l2, norms.linf);
    println!("H^1 seminorm = {:.6}", sobolev_seminorm(&f, 1));

    let spec = dft_forward(&f);
    let (k_min, k_max) = grid.shell_range();
    println!("\nshell  |P_k f|_L2");
    for k in k_min..=k_max {
        println!("{k:>5}  {:.6e}", lp_shell_l2(&spec, k));
    }

    // the shells tile frequency space: summing the projections recovers the
    // mean-free part of the field
    let mean = f.data.iter().sum::<f64>() / f.data.len() as f64;
    let mut recon = ScalarField::zeros(&grid);
    for k in k_min..=k_max {
        let piece = lp_project(&f, k);
        for (r, p) in recon.data.iter_mut().zip(&piece.data) {
            *r += p;
        }
    }
    let err = recon
        .data
        .iter()
        .zip(&f.data)
        .map(|(r, v)| (r - (v - mean)).abs())
        .fold(0.0f64, f64::max)
        ;
    println!("\nreconstruction error (vs mean-free field): {err:.3e}");
}
