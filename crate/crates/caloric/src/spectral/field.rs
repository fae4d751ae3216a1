use super::fft;
use super::grid::Grid2;
use num_complex::Complex64;
use std::sync::Arc;

/// Real scalar samples on a [`Grid2`], row-major.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub grid: Arc<Grid2>,
    pub data: Vec<f64>,
}

/// Complex Fourier coefficients of a scalar field, same layout as the grid.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub grid: Arc<Grid2>,
    pub data: Vec<Complex64>,
}

/// A map grid -> R^N stored point-major: `data[idx * ncomp + c]`.
#[derive(Debug, Clone)]
pub struct VecField {
    pub grid: Arc<Grid2>,
    pub ncomp: usize,
    pub data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Arc<Grid2>) -> Self {
        ScalarField { grid: grid.clone(), data: vec![0.0; grid.n_points()] }
    }

    pub fn from_fn(grid: &Arc<Grid2>, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut data = Vec::with_capacity(n * n);
        for j in 0..n {
            let y = grid.coord(j);
            for i in 0..n {
                data.push(f(grid.coord(i), y));
            }
        }
        ScalarField { grid: grid.clone(), data }
    }

    pub fn assert_finite(&self, what: &str) {
        assert!(self.data.iter().all(|v| v.is_finite()), "spectral: non-finite values in {what}");
    }

    pub fn forward(&self) -> Spectrum {
        let mut buf: Vec<Complex64> = self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::fft2(&mut buf, self.grid.n(), false);
        Spectrum { grid: self.grid.clone(), data: buf }
    }
}

impl Spectrum {
    pub fn inverse(&self) -> ScalarField {
        let mut buf = self.data.clone();
        fft::fft2(&mut buf, self.grid.n(), true);
        ScalarField { grid: self.grid.clone(), data: buf.iter().map(|z| z.re).collect() }
    }

    /// Multiply each mode by `m(kx, ky)`.
    pub fn scale_modes(&mut self, m: impl Fn(f64, f64) -> f64) {
        let n = self.grid.n();
        for (idx, z) in self.data.iter_mut().enumerate() {
            let kx = self.grid.wavenumber(idx % n);
            let ky = self.grid.wavenumber(idx / n);
            *z *= m(kx, ky);
        }
    }

    /// Discrete L2 norm consistent with the physical-space quadrature.
    pub fn l2_norm(&self) -> f64 {
        let scale = self.grid.cell_area() / self.grid.n_points() as f64;
        (self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * scale).sqrt()
    }
}

impl VecField {
    pub fn zeros(grid: &Arc<Grid2>, ncomp: usize) -> Self {
        VecField { grid: grid.clone(), ncomp, data: vec![0.0; grid.n_points() * ncomp] }
    }

    pub fn constant(grid: &Arc<Grid2>, value: &[f64]) -> Self {
        let mut f = VecField::zeros(grid, value.len());
        for p in f.data.chunks_exact_mut(value.len()) {
            p.copy_from_slice(value);
        }
        f
    }

    pub fn point(&self, idx: usize) -> &[f64] {
        &self.data[idx * self.ncomp..(idx + 1) * self.ncomp]
    }

    pub fn point_mut(&mut self, idx: usize) -> &mut [f64] {
        &mut self.data[idx * self.ncomp..(idx + 1) * self.ncomp]
    }

    pub fn component(&self, c: usize) -> ScalarField {
        let data = (0..self.grid.n_points()).map(|i| self.data[i * self.ncomp + c]).collect();
        ScalarField { grid: self.grid.clone(), data }
    }

    pub fn set_component(&mut self, c: usize, f: &ScalarField) {
        assert_eq!(f.grid.n(), self.grid.n(), "spectral: dimension mismatch");
        for i in 0..self.grid.n_points() {
            self.data[i * self.ncomp + c] = f.data[i];
        }
    }

    pub fn assert_finite(&self, what: &str) {
        assert!(self.data.iter().all(|v| v.is_finite()), "spectral: non-finite values in {what}");
    }

    /// Apply a Fourier multiplier to every component.
    pub fn map_modes(&self, m: impl Fn(f64, f64) -> f64 + Copy) -> VecField {
        let mut out = VecField::zeros(&self.grid, self.ncomp);
        for c in 0..self.ncomp {
            let mut spec = self.component(c).forward();
            spec.scale_modes(m);
            out.set_component(c, &spec.inverse());
        }
        out
    }

    pub fn axpy(&mut self, a: f64, other: &VecField) {
        assert_eq!(self.data.len(), other.data.len(), "spectral: dimension mismatch");
        for (x, y) in self.data.iter_mut().zip(other.data.iter()) {
            *x += a * y;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for x in self.data.iter_mut() {
            *x *= a;
        }
    }

    /// Max over points of the euclidean point-norm.
    pub fn sup_point_norm(&self) -> f64 {
        self.data
            .chunks_exact(self.ncomp)
            .map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}
