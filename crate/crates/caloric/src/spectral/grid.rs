use std::f64::consts::PI;
use std::sync::Arc;

/// Periodic square grid standing in for the plane at desk scale.
///
/// The grid owns the signed wavenumber table and the dyadic shell range
/// representable on it.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2 {
    n: usize,
    side: f64,
    wavenumbers: Vec<f64>,
    k_min: i32,
    k_max: i32,
}

impl Grid2 {
    /// `n` points per side (power of two, at least 8), physical side length `side`.
    pub fn new(n: usize, side: f64) -> Arc<Grid2> {
        assert!(n >= 8 && n.is_power_of_two(), "grid: n must be a power of two >= 8, got {n}");
        assert!(side > 0.0 && side.is_finite(), "grid: side length must be positive");
        let mut wavenumbers = Vec::with_capacity(n);
        for m in 0..n {
            // signed index; the Nyquist mode n/2 is self-paired and kept positive
            let signed = if m <= n / 2 { m as i64 } else { m as i64 - n as i64 };
            wavenumbers.push(2.0 * PI * signed as f64 / side);
        }
        let xi_min = 2.0 * PI / side;
        let xi_max = std::f64::consts::SQRT_2 * PI * n as f64 / side;
        let k_min = xi_min.log2().floor() as i32;
        let k_max = xi_max.log2().ceil() as i32;
        Arc::new(Grid2 { n, side, wavenumbers, k_min, k_max })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side_length(&self) -> f64 {
        self.side
    }

    pub fn n_points(&self) -> usize {
        self.n * self.n
    }

    pub fn cell_area(&self) -> f64 {
        let dx = self.side / self.n as f64;
        dx * dx
    }

    pub fn dx(&self) -> f64 {
        self.side / self.n as f64
    }

    /// Signed wavenumber of mode index `m` along one axis.
    pub fn wavenumber(&self, m: usize) -> f64 {
        self.wavenumbers[m]
    }

    /// Physical coordinate of grid index `i` along one axis.
    pub fn coord(&self, i: usize) -> f64 {
        self.side * i as f64 / self.n as f64
    }

    /// Inclusive dyadic shell range `[k_min, k_max]` covering every nonzero
    /// wavenumber representable on this grid.
    pub fn shell_range(&self) -> (i32, i32) {
        (self.k_min, self.k_max)
    }

    pub fn shells(&self) -> impl Iterator<Item = i32> {
        self.k_min..=self.k_max
    }

    /// A shell is fully resolved when its support `[2^{k-1}, 2^{k+1}]` sits
    /// below the Nyquist wavenumber; otherwise projections are truncated.
    pub fn shell_fully_resolved(&self, k: i32) -> bool {
        let nyquist = PI * self.n as f64 / self.side;
        2f64.powi(k + 1) <= nyquist
    }

    /// Largest shell index whose support survives the 2/3 dealias mask.
    pub fn max_dealiased_shell(&self) -> i32 {
        let cutoff = 2.0 / 3.0 * PI * self.n as f64 / self.side;
        (cutoff.log2() - 1.0).floor() as i32
    }

    /// Iterate `(flat_index, kx, ky)` over all modes.
    pub fn modes(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        let n = self.n;
        (0..n * n).map(move |idx| {
            let ky = self.wavenumbers[idx / n];
            let kx = self.wavenumbers[idx % n];
            (idx, kx, ky)
        })
    }
}
