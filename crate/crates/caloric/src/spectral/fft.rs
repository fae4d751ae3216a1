use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};
use std::sync::{Arc, Mutex};

static PLANNER: Lazy<Mutex<FftPlanner<f64>>> = Lazy::new(|| Mutex::new(FftPlanner::new()));

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = PLANNER.lock().unwrap();
    if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    }
}

fn transpose(data: &mut [Complex64], n: usize) {
    for row in 0..n {
        for col in row + 1..n {
            data.swap(row * n + col, col * n + row);
        }
    }
}

/// In-place 2-D transform of an `n x n` row-major complex buffer.
/// Forward is unnormalized; the inverse divides by `n^2` so that
/// `inverse(forward(f)) = f`.
pub fn fft2(data: &mut [Complex64], n: usize, inverse: bool) {
    assert_eq!(data.len(), n * n, "fft2: buffer length mismatch");
    let fft = plan(n, inverse);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    for row in data.chunks_exact_mut(n) {
        fft.process_with_scratch(row, &mut scratch);
    }
    transpose(data, n);
    for row in data.chunks_exact_mut(n) {
        fft.process_with_scratch(row, &mut scratch);
    }
    transpose(data, n);
    if inverse {
        let scale = 1.0 / (n * n) as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }
}
