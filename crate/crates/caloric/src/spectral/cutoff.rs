/// The fixed smooth even cutoff behind every dyadic projection.
///
/// chi(z) = 1 for |z| <= 5/4, chi(z) = 0 for |z| >= 8/5, and a C-infinity
/// exponential smoothstep in between. The plateau and support are the only
/// constrained features; this particular transition is pinned down so that
/// results are reproducible bit-for-bit.
#[derive(Debug, Clone, Copy, Default)]
pub struct DyadicCutoff;

pub const PLATEAU: f64 = 1.25; // 5/4
pub const SUPPORT: f64 = 1.6; // 8/5

fn ramp(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

impl DyadicCutoff {
    /// The base bump chi.
    pub fn chi(&self, z: f64) -> f64 {
        let z = z.abs();
        if z <= PLATEAU {
            1.0
        } else if z >= SUPPORT {
            0.0
        } else {
            // smooth partition-of-unity step, decreasing from 1 to 0
            let t = (SUPPORT - z) / (SUPPORT - PLATEAU);
            let a = ramp(t);
            let b = ramp(1.0 - t);
            a / (a + b)
        }
    }

    /// Shell bump chi_k(z) = chi(z / 2^k) - chi(z / 2^{k-1}).
    pub fn chi_shell(&self, k: i32, z: f64) -> f64 {
        self.chi(z / pow2(k)) - self.chi(z / pow2(k - 1))
    }

    /// Low-pass multiplier for P_{<=k}; equals 1 at z = 0.
    pub fn chi_low(&self, k: i32, z: f64) -> f64 {
        self.chi(z / pow2(k))
    }
}

pub fn pow2(k: i32) -> f64 {
    2f64.powi(k)
}
