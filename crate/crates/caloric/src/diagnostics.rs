//! Frequency envelopes (plain and iterated), mixed space-time norm blocks,
//! and dyadic decay-profile fitting.
//!
//! An envelope of order `delta` dominates a dyadic profile while varying
//! slowly: `c_j <= 2^{delta |l - j|} c_l`. Iterated envelopes extend an
//! envelope family in the regularity parameter `sigma` through a two-branch
//! recursion whose breakpoints are rational; all branch decisions here are
//! made in exact integer arithmetic on the `sigma = m/8` lattice.

use crate::error::{Error, Result};
use crate::spectral::{dft_forward, lp_shell_l2, VecField};

/// Default envelope order.
pub const DEFAULT_DELTA: f64 = 1.0 / 800.0;

/// The `sigma`-lattice: `m / 8` for `m = 0, .., 16`, covering `[0, 2]`.
pub const SIGMA_LATTICE_LEN: usize = 17;

pub fn sigma_of_index(m: usize) -> f64 {
    m as f64 / 8.0
}

/// Exact lattice membership: `sigma` must equal `m / 8` bit-for-bit for some
/// `m` in range. No interpolation is performed off the lattice.
pub fn sigma_index(sigma: f64) -> Result<usize> {
    let scaled = sigma * 8.0;
    if scaled.fract() != 0.0 || !(0.0..SIGMA_LATTICE_LEN as f64).contains(&scaled) {
        return Err(Error::Diagnostics(format!(
            "sigma = {sigma} is off the m/8 lattice on [0, 2]"
        )));
    }
    Ok(scaled as usize)
}

/// A slowly-varying dominating sequence over the represented shell range.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyEnvelope {
    pub delta: f64,
    pub sigma: f64,
    pub k_min: i32,
    pub values: Vec<f64>,
}

impl FrequencyEnvelope {
    pub fn k_max(&self) -> i32 {
        self.k_min + self.values.len() as i32 - 1
    }

    pub fn value(&self, k: i32) -> f64 {
        self.values[(k - self.k_min) as usize]
    }

    pub fn ell2_norm(&self) -> f64 {
        self.values.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Worst violation of `c_j <= 2^{delta |l - j|} c_l` over represented
    /// pairs; nonpositive iff slow variation holds.
    pub fn slow_variation_defect(&self) -> f64 {
        let n = self.values.len();
        let mut worst = f64::NEG_INFINITY;
        for j in 0..n {
            for l in 0..n {
                let bound = (2.0f64).powf(self.delta * (j as f64 - l as f64).abs())
                    * self.values[l];
                worst = worst.max(self.values[j] - bound);
            }
        }
        worst
    }

    pub fn dominates(&self, a: &[f64]) -> bool {
        self.values.len() == a.len() && self.values.iter().zip(a).all(|(c, v)| c >= v)
    }
}

/// `a~_j = sup_{j'} a_{j'} 2^{-delta |j - j'|}`: the least order-`delta`
/// envelope dominating `a`.
pub fn envelope_of_sequence(
    a: &[f64],
    k_min: i32,
    sigma: f64,
    delta: f64,
) -> Result<FrequencyEnvelope> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Diagnostics(format!("envelope order must be positive, got {delta}")));
    }
    if a.is_empty() {
        return Err(Error::Diagnostics("empty shell sequence".into()));
    }
    if let Some(bad) = a.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::Diagnostics(format!("sequence entry {bad} is not a nonneg real")));
    }
    let n = a.len();
    // two-pass max-propagation with ratio r = 2^{-delta}: computes
    // sup_{j'} a_{j'} r^{|j-j'|} with chained products, which makes the
    // result an exact floating-point fixpoint (idempotency holds bit-for-bit)
    let r = (2.0f64).powf(-delta);
    let mut values = a.to_vec();
    for j in 1..n {
        values[j] = values[j].max(r * values[j - 1]);
    }
    for j in (0..n.saturating_sub(1)).rev() {
        values[j] = values[j].max(r * values[j + 1]);
    }
    Ok(FrequencyEnvelope { delta, sigma, k_min, values })
}

/// Per-shell weighted profile of a field: `b_k = 2^{sigma k + k} ||P_k u||_2`
/// with the Littlewood-Paley pieces summed in quadrature over components.
pub fn shell_profile(u: &VecField, sigma: f64) -> (i32, Vec<f64>) {
    let (k_min, k_max) = u.grid.shell_range();
    let mut out = Vec::with_capacity((k_max - k_min + 1) as usize);
    let specs: Vec<_> = (0..u.ncomp).map(|c| dft_forward(&u.component(c))).collect();
    for k in k_min..=k_max {
        let l2 = specs
            .iter()
            .map(|s| {
                let v = lp_shell_l2(s, k);
                v * v
            })
            .sum::<f64>()
            .sqrt();
        out.push((2.0f64).powf((sigma + 1.0) * k as f64) * l2);
    }
    (k_min, out)
}

/// Envelope of the weighted shell profile of `u` at regularity `sigma`.
pub fn field_envelope(u: &VecField, sigma: f64, delta: f64) -> Result<FrequencyEnvelope> {
    let (k_min, prof) = shell_profile(u, sigma);
    envelope_of_sequence(&prof, k_min, sigma, delta)
}

/// A family of envelopes over the full `sigma`-lattice, the input of the
/// iteration. Row `m` is the envelope at `sigma = m / 8`.
#[derive(Debug, Clone)]
pub struct EnvelopeFamily {
    pub delta: f64,
    pub k_min: i32,
    pub levels: Vec<FrequencyEnvelope>,
}

impl EnvelopeFamily {
    pub fn n_shells(&self) -> usize {
        self.levels[0].values.len()
    }

    pub fn at(&self, m: usize) -> &FrequencyEnvelope {
        &self.levels[m]
    }

    /// Largest represented lattice index.
    pub fn sigma_max_index(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn from_rows(delta: f64, k_min: i32, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Diagnostics("empty envelope family".into()));
        }
        let width = rows[0].len();
        let mut levels = Vec::with_capacity(rows.len());
        for (m, row) in rows.into_iter().enumerate() {
            if row.len() != width {
                return Err(Error::Diagnostics("ragged envelope family".into()));
            }
            levels.push(envelope_of_sequence(&row, k_min, sigma_of_index(m), delta)?);
        }
        Ok(EnvelopeFamily { delta, k_min, levels })
    }

    /// Envelope family of a field over the full lattice.
    pub fn of_field(u: &VecField, delta: f64) -> Result<Self> {
        let mut rows = Vec::with_capacity(SIGMA_LATTICE_LEN);
        let mut k_min = 0;
        for m in 0..SIGMA_LATTICE_LEN {
            let (km, prof) = shell_profile(u, sigma_of_index(m));
            k_min = km;
            rows.push(prof);
        }
        EnvelopeFamily::from_rows(delta, k_min, rows)
    }
}

/// Whether lattice index `m` falls in the recursion's first (copy-through)
/// branch at iteration `level`. The level-1 breakpoint is the rational
/// 99/100, compared exactly: `m/8 <= 99/100` iff `100 m <= 792`.
fn first_branch(level: usize, m: usize) -> bool {
    if level == 1 {
        100 * m <= 792
    } else {
        // m/8 <= (level+3)/4  iff  m <= 2(level+3)
        m <= 2 * (level + 3)
    }
}

/// Largest lattice index on which the level-`level` iterate is defined:
/// `sigma <= (level+4)/4` (and `5/4` at level 1, `99/100`-truncated at 0),
/// capped at the lattice top.
fn domain_top(level: usize) -> usize {
    let top = match level {
        0 => 7,                  // sigma < 99/100
        l => 2 * (l + 4),        // sigma <= (l+4)/4
    };
    top.min(SIGMA_LATTICE_LEN - 1)
}

/// The iterated envelope family:
/// `g^(j)(sigma) = g^(j-1)(sigma)` on the first branch and
/// `g(sigma) + g^(j-1)(sigma - 3/8) g(3/8)` on the second, with the level-1
/// base using the 99/100 and 5/4 breakpoints.
pub fn envelope_iterate(gamma: &EnvelopeFamily, j: usize) -> Result<EnvelopeFamily> {
    if j > 4 {
        return Err(Error::Diagnostics(format!("iteration depth {j} out of range 0..=4")));
    }
    if gamma.sigma_max_index() + 1 < SIGMA_LATTICE_LEN {
        return Err(Error::Diagnostics(
            "input family must cover the full sigma lattice".into(),
        ));
    }
    let width = gamma.n_shells();
    let g = |m: usize, q: usize| gamma.levels[m].values[q];
    let mut prev: Vec<Vec<f64>> =
        (0..=domain_top(0)).map(|m| gamma.levels[m].values.clone()).collect();
    for level in 1..=j {
        let mut cur = Vec::with_capacity(domain_top(level) + 1);
        for m in 0..=domain_top(level) {
            if first_branch(level, m) {
                cur.push(prev[m].clone());
            } else {
                let row: Vec<f64> = (0..width)
                    .map(|q| g(m, q) + prev[m - 3][q] * g(3, q))
                    .collect();
                cur.push(row);
            }
        }
        prev = cur;
    }
    let levels: Vec<FrequencyEnvelope> = prev
        .into_iter()
        .enumerate()
        .map(|(m, values)| FrequencyEnvelope {
            delta: gamma.delta / (2.0f64).powi(j as i32),
            sigma: sigma_of_index(m),
            k_min: gamma.k_min,
            values,
        })
        .collect();
    Ok(EnvelopeFamily { delta: gamma.delta / (2.0f64).powi(j as i32), k_min: gamma.k_min, levels })
}

/// The three computable norm blocks of the dyadic space-time norm:
/// `||g||_{Linf_t L2_x}`, `||g||_{L4_{t,x}}`, and `||g||_{L4_x Linf_t}`
/// (sup in time inside, 4th-power sum in space outside).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormBlocks {
    pub linf_l2: f64,
    pub l4: f64,
    pub l4x_linf_t: f64,
}

impl NormBlocks {
    /// The shell-`k` combination `Linf L2 + 2^{-k/2} L4_x Linf_t + L4`.
    pub fn combined(&self, k: i32) -> f64 {
        self.linf_l2 + (2.0f64).powf(-0.5 * k as f64) * self.l4x_linf_t + self.l4
    }
}

/// Discrete mixed norms over a uniformly sampled time series: trapezoid in
/// `t`, grid sum in `x`, pointwise Euclidean norm over components.
pub fn norm_blocks(series: &[VecField], dt: f64) -> Result<NormBlocks> {
    if series.len() < 2 {
        return Err(Error::Diagnostics(format!(
            "norm blocks need at least 2 time samples, got {}",
            series.len()
        )));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Diagnostics(format!("time spacing must be positive, got {dt}")));
    }
    let g0 = &series[0];
    for s in series {
        if !std::sync::Arc::ptr_eq(&s.grid, &g0.grid) && s.grid.n() != g0.grid.n() {
            return Err(Error::Diagnostics("time samples on mismatched grids".into()));
        }
        if s.ncomp != g0.ncomp {
            return Err(Error::Diagnostics("time samples with mismatched components".into()));
        }
    }
    let cell = g0.grid.cell_area();
    let npt = g0.grid.n_points();
    let nc = g0.ncomp;
    let nt = series.len();
    let trap_w = |it: usize| if it == 0 || it == nt - 1 { 0.5 * dt } else { dt };

    let mut linf_l2 = 0.0f64;
    let mut l4_acc = 0.0f64;
    let mut sup_t = vec![0.0f64; npt];
    for (it, field) in series.iter().enumerate() {
        let mut l2_acc = 0.0;
        let w = trap_w(it);
        for (idx, p) in field.data.chunks_exact(nc).enumerate() {
            let m2: f64 = p.iter().map(|x| x * x).sum();
            l2_acc += m2;
            l4_acc += w * m2 * m2;
            sup_t[idx] = sup_t[idx].max(m2);
        }
        linf_l2 = linf_l2.max((l2_acc * cell).sqrt());
    }
    let l4 = (l4_acc * cell).powf(0.25);
    let l4x_linf_t = (sup_t.iter().map(|m2| m2 * m2).sum::<f64>() * cell).powf(0.25);
    Ok(NormBlocks { linf_l2, l4, l4x_linf_t })
}

/// Least-squares fit of a shell-`k` dyadic decay profile to the model
/// `amplitude * (1 + s 4^k)^{-exponent}`, linearized in log space.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    /// `None` for a degenerate (identically zero) profile.
    pub exponent: Option<f64>,
    pub amplitude: f64,
    /// Root-mean-square misfit relative to the profile's root-mean-square.
    pub relative_residual: f64,
}

pub fn decay_fit(s: &[f64], profile: &[f64], k: i32) -> Result<DecayFit> {
    if s.len() != profile.len() {
        return Err(Error::Diagnostics("profile and s-grid lengths differ".into()));
    }
    if s.len() < 6 {
        return Err(Error::Diagnostics(format!(
            "decay fit needs at least 6 samples, got {}",
            s.len()
        )));
    }
    if s.windows(2).any(|w| w[1] <= w[0]) || s[0] < 0.0 {
        return Err(Error::Diagnostics("s-grid must be nonneg and increasing".into()));
    }
    let pos: Vec<f64> = s.iter().copied().filter(|&x| x > 0.0).collect();
    let span_ok = match (pos.first(), pos.last()) {
        (Some(&lo), Some(&hi)) => hi / lo >= 4.0,
        _ => false,
    };
    if !span_ok {
        return Err(Error::Diagnostics(
            "samples must span at least 2 dyadic s-blocks (a factor of 4 in s)".into(),
        ));
    }
    if profile.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Diagnostics("profile entries must be nonneg reals".into()));
    }
    if profile.iter().all(|&v| v == 0.0) {
        return Ok(DecayFit { exponent: None, amplitude: 0.0, relative_residual: 0.0 });
    }

    let w = (4.0f64).powi(k);
    // log p = log A - M log(1 + s 4^k), ordinary least squares over the
    // strictly positive samples
    let pts: Vec<(f64, f64)> = s
        .iter()
        .zip(profile)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&si, &p)| ((1.0 + si * w).ln(), p.ln()))
        .collect();
    if pts.len() < 6 {
        return Err(Error::Diagnostics(
            "fewer than 6 strictly positive samples for the decay fit".into(),
        ));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in &pts {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    if den == 0.0 {
        return Err(Error::Diagnostics("degenerate s-grid for the decay fit".into()));
    }
    let slope = num / den;
    let exponent = -slope;
    let amplitude = (my - slope * mx).exp();

    let mut misfit = 0.0;
    let mut scale = 0.0;
    for (&si, &p) in s.iter().zip(profile) {
        let model = amplitude * (1.0 + si * w).powf(-exponent);
        misfit += (model - p) * (model - p);
        scale += p * p;
    }
    Ok(DecayFit {
        exponent: Some(exponent),
        amplitude,
        relative_residual: (misfit / scale).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_rows(rng: &mut ChaCha8Rng, n_rows: usize, width: usize) -> Vec<Vec<f64>> {
        (0..n_rows)
            .map(|_| (0..width).map(|_| rng.gen_range(0.0..3.0)).collect())
            .collect()
    }

    #[test]
    fn spike_envelope_has_closed_form() {
        let mut a = vec![0.0; 11];
        a[4] = 1.0;
        let env = envelope_of_sequence(&a, -3, 0.0, DEFAULT_DELTA).unwrap();
        for j in 0..11 {
            let expect = (2.0f64).powf(-DEFAULT_DELTA * (j as f64 - 4.0).abs());
            assert!(
                (env.values[j] - expect).abs() <= 1e-14 * expect,
                "shell {j}: {} vs {expect}",
                env.values[j]
            );
        }
    }

    #[test]
    fn envelope_dominates_and_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let a: Vec<f64> = (0..12).map(|_| rng.gen_range(0.0..5.0)).collect();
            let env = envelope_of_sequence(&a, 0, 0.0, DEFAULT_DELTA).unwrap();
            assert!(env.dominates(&a));
            assert!(env.slow_variation_defect() <= 1e-15 * 5.0);
            let env2 = envelope_of_sequence(&env.values, 0, 0.0, DEFAULT_DELTA).unwrap();
            assert_eq!(env.values, env2.values, "envelope not idempotent");
        }
    }

    #[test]
    fn slowly_varying_sequence_is_fixed() {
        // already slowly varying: its envelope is itself
        let r = (2.0f64).powf(-DEFAULT_DELTA);
        let mut a = vec![1.0f64];
        for _ in 0..9 {
            a.push(r * a.last().unwrap());
        }
        let env = envelope_of_sequence(&a, 0, 0.0, DEFAULT_DELTA).unwrap();
        assert_eq!(env.values, a);
    }

    #[test]
    fn ell2_norm_is_comparable() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a: Vec<f64> = (0..12).map(|_| rng.gen_range(0.0..5.0)).collect();
            let env = envelope_of_sequence(&a, 0, 0.0, DEFAULT_DELTA).unwrap();
            let base = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let ratio = env.ell2_norm() / base;
            assert!(ratio >= 1.0 && ratio < 10.0, "ell2 blowup ratio {ratio}");
        }
    }

    #[test]
    fn envelope_rejects_bad_input() {
        assert!(envelope_of_sequence(&[1.0, -0.5], 0, 0.0, DEFAULT_DELTA).is_err());
        assert!(envelope_of_sequence(&[1.0], 0, 0.0, 0.0).is_err());
        assert!(envelope_of_sequence(&[], 0, 0.0, DEFAULT_DELTA).is_err());
        assert!(envelope_of_sequence(&[f64::NAN], 0, 0.0, DEFAULT_DELTA).is_err());
    }

    #[test]
    fn constant_field_has_zero_envelope() {
        let g = Grid2::new(32, 2.0 * std::f64::consts::PI);
        let u = VecField::constant(&g, &[0.0, 0.0, 1.0]);
        let env = field_envelope(&u, 0.5, DEFAULT_DELTA).unwrap();
        assert!(env.values.iter().all(|&v| v < 1e-14));
    }

    #[test]
    fn single_shell_field_envelope_matches_closed_form() {
        let g = Grid2::new(64, 2.0 * std::f64::consts::PI);
        let k0 = 2i32; // modes near |xi| = 4
        let mut u = VecField::zeros(&g, 3);
        let norm = (2.0f64 / (g.side_length() * g.side_length())).sqrt();
        for j in 0..g.n() {
            for i in 0..g.n() {
                let x = g.coord(i);
                u.point_mut(j * g.n() + i)[0] = norm * (4.0 * x).cos();
            }
        }
        let sigma = 0.5;
        let env = field_envelope(&u, sigma, DEFAULT_DELTA).unwrap();
        for k in env.k_min..=env.k_max() {
            let expect = (2.0f64).powf((sigma + 1.0) * k0 as f64)
                * (2.0f64).powf(-DEFAULT_DELTA * (k - k0) as f64);
            let got = env.value(k);
            assert!(
                (got - expect).abs() <= 0.05 * expect,
                "shell {k}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn field_envelope_matches_weighted_profile() {
        let g = Grid2::new(32, 2.0 * std::f64::consts::PI);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut u = VecField::zeros(&g, 2);
        for p in u.data.iter_mut() {
            *p = rng.gen_range(-1.0..1.0);
        }
        let sigma = 0.75;
        let (k_min, prof) = shell_profile(&u, sigma);
        let via_seq = envelope_of_sequence(&prof, k_min, sigma, DEFAULT_DELTA).unwrap();
        let direct = field_envelope(&u, sigma, DEFAULT_DELTA).unwrap();
        assert_eq!(via_seq.values, direct.values);
        // sigma weighting consistency: profile(sigma) = 2^{sigma k} profile(0)
        let (_, prof0) = shell_profile(&u, 0.0);
        for (q, k) in (k_min..).take(prof.len()).enumerate() {
            let expect = (2.0f64).powf(sigma * k as f64) * prof0[q];
            assert!((prof[q] - expect).abs() <= 1e-12 * expect.max(1.0));
        }
    }

    #[test]
    fn sigma_lattice_membership_is_exact() {
        assert_eq!(sigma_index(0.0).unwrap(), 0);
        assert_eq!(sigma_index(0.375).unwrap(), 3);
        assert_eq!(sigma_index(1.125).unwrap(), 9);
        assert_eq!(sigma_index(2.0).unwrap(), 16);
        assert!(sigma_index(0.99).is_err());
        assert!(sigma_index(0.3).is_err());
        assert!(sigma_index(2.125).is_err());
        assert!(sigma_index(-0.125).is_err());
    }

    /// Direct top-down evaluation of the iteration, independent of the
    /// bottom-up table in `envelope_iterate`.
    fn iterate_oracle(rows: &[Vec<f64>], level: usize, m: usize, q: usize) -> f64 {
        if level == 0 {
            assert!(m <= 7);
            return rows[m][q];
        }
        let first = if level == 1 { 100 * m <= 792 } else { m <= 2 * (level + 3) };
        if first {
            iterate_oracle(rows, level - 1, m, q)
        } else {
            rows[m][q] + iterate_oracle(rows, level - 1, m - 3, q) * rows[3][q]
        }
    }

    #[test]
    fn zero_family_iterates_to_zero() {
        let rows = vec![vec![0.0; 8]; SIGMA_LATTICE_LEN];
        let fam = EnvelopeFamily::from_rows(DEFAULT_DELTA, -2, rows).unwrap();
        for j in 0..=4 {
            let it = envelope_iterate(&fam, j).unwrap();
            assert!(it.levels.iter().all(|e| e.values.iter().all(|&v| v == 0.0)));
        }
    }

    #[test]
    fn level_one_copies_below_the_breakpoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let rows = random_rows(&mut rng, SIGMA_LATTICE_LEN, 10);
        let fam = EnvelopeFamily::from_rows(DEFAULT_DELTA, -4, rows).unwrap();
        let it = envelope_iterate(&fam, 1).unwrap();
        for m in 0..=7 {
            // sigma = m/8 <= 99/100: identical to the base family
            assert_eq!(it.at(m).values, fam.at(m).values);
        }
        assert_ne!(it.at(9).values, fam.at(9).values);
        assert_eq!(it.sigma_max_index(), 10);
    }

    #[test]
    fn level_two_value_matches_hand_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let rows = random_rows(&mut rng, SIGMA_LATTICE_LEN, 6);
        let fam = EnvelopeFamily::from_rows(DEFAULT_DELTA, 0, rows).unwrap();
        let it2 = envelope_iterate(&fam, 2).unwrap();
        let it1 = envelope_iterate(&fam, 1).unwrap();
        // sigma = 9/8 is inside level 2's copy branch but level 1's sum
        // branch: gamma(9/8) + gamma^(1)(3/4) gamma(3/8)
        let m = sigma_index(1.125).unwrap();
        for q in 0..6 {
            let expect = it1.at(m).values[q];
            assert_eq!(it2.at(m).values[q], expect);
            let by_hand =
                fam.at(m).values[q] + it1.at(m - 3).values[q] * fam.at(3).values[q];
            assert_eq!(expect, by_hand);
        }
    }

    #[test]
    fn iteration_matches_oracle_on_random_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let rows = random_rows(&mut rng, SIGMA_LATTICE_LEN, 5);
            let fam = EnvelopeFamily::from_rows(DEFAULT_DELTA, -3, rows).unwrap();
            let raw: Vec<Vec<f64>> = fam.levels.iter().map(|e| e.values.clone()).collect();
            for j in 0..=4usize {
                let it = envelope_iterate(&fam, j).unwrap();
                for m in 0..=it.sigma_max_index() {
                    for q in 0..5 {
                        let expect = iterate_oracle(&raw, j, m, q);
                        assert_eq!(
                            it.at(m).values[q], expect,
                            "mismatch at j={j} m={m} q={q}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn restricting_an_iterate_recovers_the_previous_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let rows = random_rows(&mut rng, SIGMA_LATTICE_LEN, 7);
        let fam = EnvelopeFamily::from_rows(DEFAULT_DELTA, -1, rows).unwrap();
        for j in 2..=4usize {
            let hi = envelope_iterate(&fam, j).unwrap();
            let lo = envelope_iterate(&fam, j - 1).unwrap();
            for m in 0..=(2 * (j + 3)).min(lo.sigma_max_index()) {
                assert_eq!(hi.at(m).values, lo.at(m).values);
            }
        }
    }

    #[test]
    fn iterate_rejects_bad_depth_and_partial_families() {
        let rows = vec![vec![1.0; 4]; SIGMA_LATTICE_LEN];
        let fam = EnvelopeFamily::from_rows(DEFAULT_DELTA, 0, rows).unwrap();
        assert!(envelope_iterate(&fam, 5).is_err());
        let short = EnvelopeFamily::from_rows(DEFAULT_DELTA, 0, vec![vec![1.0; 4]; 8]).unwrap();
        assert!(envelope_iterate(&short, 1).is_err());
    }

    fn constant_series(g: &std::sync::Arc<Grid2>, c: f64, nt: usize) -> Vec<VecField> {
        (0..nt).map(|_| VecField::constant(g, &[c, 0.0])).collect()
    }

    #[test]
    fn norm_blocks_closed_forms() {
        let g = Grid2::new(16, 2.0 * std::f64::consts::PI);
        let l = g.side_length();
        let zero = norm_blocks(&constant_series(&g, 0.0, 3), 0.1).unwrap();
        assert_eq!(zero, NormBlocks { linf_l2: 0.0, l4: 0.0, l4x_linf_t: 0.0 });

        let c = 1.7;
        let nt = 5;
        let dt = 0.25;
        let t = (nt - 1) as f64 * dt;
        let nb = norm_blocks(&constant_series(&g, c, nt), dt).unwrap();
        assert!((nb.linf_l2 - c * l).abs() < 1e-12);
        assert!((nb.l4 - c * (l * l * t).powf(0.25)).abs() < 1e-12);
        assert!((nb.l4x_linf_t - c * l.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn norm_blocks_scale_homogeneously() {
        let g = Grid2::new(16, 2.0 * std::f64::consts::PI);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let series: Vec<VecField> = (0..4)
            .map(|_| {
                let mut f = VecField::zeros(&g, 3);
                for p in f.data.iter_mut() {
                    *p = rng.gen_range(-1.0..1.0);
                }
                f
            })
            .collect();
        let lam = 3.25;
        let scaled: Vec<VecField> = series
            .iter()
            .map(|f| {
                let mut s = f.clone();
                s.scale(lam);
                s
            })
            .collect();
        let a = norm_blocks(&series, 0.1).unwrap();
        let b = norm_blocks(&scaled, 0.1).unwrap();
        assert!((b.linf_l2 - lam * a.linf_l2).abs() < 1e-12 * b.linf_l2);
        assert!((b.l4 - lam * a.l4).abs() < 1e-12 * b.l4);
        assert!((b.l4x_linf_t - lam * a.l4x_linf_t).abs() < 1e-12 * b.l4x_linf_t);

        // Minkowski direction: L4_x Linf_t dominates the L4_x norm at any
        // fixed time
        for f in &series {
            let one = norm_blocks(&[f.clone(), f.clone()], 0.1).unwrap();
            assert!(a.l4x_linf_t >= one.l4x_linf_t - 1e-12);
        }
    }

    #[test]
    fn norm_blocks_monotone_in_added_samples() {
        let g = Grid2::new(16, 2.0 * std::f64::consts::PI);
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let mut series: Vec<VecField> = Vec::new();
        for _ in 0..6 {
            let mut f = VecField::zeros(&g, 2);
            for p in f.data.iter_mut() {
                *p = rng.gen_range(-1.0..1.0);
            }
            series.push(f);
        }
        let a = norm_blocks(&series[..3], 0.1).unwrap();
        let b = norm_blocks(&series, 0.1).unwrap();
        assert!(b.linf_l2 >= a.linf_l2);
        assert!(b.l4x_linf_t >= a.l4x_linf_t);
    }

    #[test]
    fn norm_blocks_rejects_short_series() {
        let g = Grid2::new(16, 2.0 * std::f64::consts::PI);
        assert!(norm_blocks(&constant_series(&g, 1.0, 1), 0.1).is_err());
        assert!(norm_blocks(&constant_series(&g, 1.0, 3), 0.0).is_err());
    }

    #[test]
    fn decay_fit_recovers_its_own_model() {
        let k = 2i32;
        let w = (4.0f64).powi(k);
        let s: Vec<f64> = (0..24).map(|i| 0.01 * (1.25f64).powi(i)).collect();
        let profile: Vec<f64> = s.iter().map(|&si| 0.8 * (1.0 + si * w).powi(-4)).collect();
        let fit = decay_fit(&s, &profile, k).unwrap();
        let m = fit.exponent.unwrap();
        assert!((m - 4.0).abs() < 0.015 * 4.0, "fitted exponent {m}");
        assert!((fit.amplitude - 0.8).abs() < 0.02);
        assert!(fit.relative_residual < 1e-6);
    }

    #[test]
    fn decay_fit_degenerate_and_error_cases() {
        let s: Vec<f64> = (0..8).map(|i| 0.1 * (i + 1) as f64).collect();
        let fit = decay_fit(&s, &vec![0.0; 8], 0).unwrap();
        assert!(fit.exponent.is_none());
        assert_eq!(fit.amplitude, 0.0);

        assert!(decay_fit(&s[..4], &vec![1.0; 4], 0).is_err());
        assert!(decay_fit(&s, &vec![1.0; 7], 0).is_err());
        let narrow: Vec<f64> = (0..8).map(|i| 1.0 + 0.01 * i as f64).collect();
        assert!(decay_fit(&narrow, &vec![1.0; 8], 0).is_err());
        let bad: Vec<f64> = vec![1.0, -1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        assert!(decay_fit(&s, &bad, 0).is_err());
    }
}
