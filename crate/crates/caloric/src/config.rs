//! Run configuration: TOML with strict key checking, range validation, and
//! defaults matching the solver modules.

use crate::error::{Error, Result};
use crate::target::TargetKind;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// `sphere2 | flat_torus2 | sphere_product`.
    pub target: String,
    /// `heat | sl | gauge | full`.
    #[serde(default = "default_flow")]
    pub flow: String,
    /// Worker count; execution is serial regardless, the key is accepted for
    /// forward compatibility and echoed in the manifest.
    #[serde(default = "default_threads")]
    pub threads: usize,
    #[serde(default)]
    pub grid: GridConfig,
    pub initial_data: InitialDataConfig,
    #[serde(default)]
    pub heat: HeatConfig,
    #[serde(default)]
    pub sl: SlConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
}

fn default_flow() -> String {
    "full".into()
}

fn default_threads() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub length: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { n: 64, length: 2.0 * std::f64::consts::PI }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InitialDataConfig {
    /// `bump | helix | random`.
    pub family: String,
    /// Bump: sup of the tangent perturbation.
    #[serde(default)]
    pub amplitude: Option<f64>,
    /// Bump: spatial width of the profile.
    #[serde(default)]
    pub width: Option<f64>,
    /// Bump: center of the profile, defaults to the box center.
    #[serde(default)]
    pub center: Option<[f64; 2]>,
    /// Helix: polar angle.
    #[serde(default)]
    pub theta: Option<f64>,
    /// Helix: integer wavenumber.
    #[serde(default)]
    pub wavenumber: Option<i32>,
    /// Random: RNG seed.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Random: mollification scale (heat-kernel time).
    #[serde(default)]
    pub smoothing: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct HeatConfig {
    pub s_max: f64,
    pub ramp_end: f64,
    pub ramp_samples: usize,
    pub samples_per_block: usize,
    pub accuracy_cap: f64,
}

impl Default for HeatConfig {
    fn default() -> Self {
        let h = crate::heatflow::HeatOptions::default();
        HeatConfig {
            s_max: h.s_max,
            ramp_end: h.ramp_end,
            ramp_samples: h.ramp_samples,
            samples_per_block: h.samples_per_block,
            accuracy_cap: h.accuracy_cap,
        }
    }
}

impl HeatConfig {
    pub fn to_options(&self) -> crate::heatflow::HeatOptions {
        crate::heatflow::HeatOptions {
            s_max: self.s_max,
            ramp_end: self.ramp_end,
            ramp_samples: self.ramp_samples,
            samples_per_block: self.samples_per_block,
            accuracy_cap: self.accuracy_cap,
            store_maps: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SlConfig {
    pub t_final: f64,
    /// Step size; `0` selects the stability bound.
    pub dt: f64,
    pub store_every: usize,
}

impl Default for SlConfig {
    fn default() -> Self {
        SlConfig { t_final: 1.0, dt: 0.0, store_every: 100 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: Option<String>,
    /// Checkpoint field-dump stride in stored samples; `0` disables dumps.
    pub dump_every: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    /// Regularity values at which to export envelopes; must lie on the m/8
    /// lattice.
    pub envelope_sigmas: Vec<f64>,
    pub envelope_iterations: usize,
    pub decay_fits: bool,
    pub residual_suite: bool,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            envelope_sigmas: vec![0.0, 0.5, 1.0],
            envelope_iterations: 1,
            decay_fits: true,
            residual_suite: true,
        }
    }
}

impl RunConfig {
    pub fn target_kind(&self) -> Result<TargetKind> {
        TargetKind::parse(&self.target)
    }

    pub fn validate(&self) -> Result<()> {
        self.target_kind()?;
        match self.flow.as_str() {
            "heat" | "sl" | "gauge" | "full" => {}
            other => {
                return Err(Error::Config(format!(
                    "unknown flow `{other}`; valid: heat, sl, gauge, full"
                )))
            }
        }
        if self.threads == 0 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        if !self.grid.n.is_power_of_two() || self.grid.n < 8 {
            return Err(Error::Config(format!(
                "grid.n must be a power of two >= 8, got {}",
                self.grid.n
            )));
        }
        if !(self.grid.length > 0.0 && self.grid.length.is_finite()) {
            return Err(Error::Config(format!("grid.length must be positive, got {}", self.grid.length)));
        }
        self.validate_initial_data()?;
        if !(self.heat.s_max > 0.0 && self.heat.ramp_end > 0.0 && self.heat.ramp_end < self.heat.s_max) {
            return Err(Error::Config("heat: need 0 < ramp_end < s_max".into()));
        }
        if self.heat.ramp_samples == 0 || self.heat.samples_per_block == 0 {
            return Err(Error::Config("heat: sample counts must be positive".into()));
        }
        if !(self.heat.accuracy_cap > 0.0) {
            return Err(Error::Config("heat: accuracy_cap must be positive".into()));
        }
        if !(self.sl.t_final > 0.0 && self.sl.t_final.is_finite()) {
            return Err(Error::Config(format!("sl.t_final must be positive, got {}", self.sl.t_final)));
        }
        if !(self.sl.dt >= 0.0 && self.sl.dt.is_finite()) {
            return Err(Error::Config(format!("sl.dt must be nonneg, got {}", self.sl.dt)));
        }
        if self.sl.store_every == 0 {
            return Err(Error::Config("sl.store_every must be positive".into()));
        }
        for &sigma in &self.diagnostics.envelope_sigmas {
            crate::diagnostics::sigma_index(sigma)?;
        }
        if self.diagnostics.envelope_iterations > 4 {
            return Err(Error::Config(format!(
                "diagnostics.envelope_iterations must be 0..=4, got {}",
                self.diagnostics.envelope_iterations
            )));
        }
        Ok(())
    }

    fn validate_initial_data(&self) -> Result<()> {
        let id = &self.initial_data;
        match id.family.as_str() {
            "bump" => {
                let amp = id.amplitude.ok_or_else(|| {
                    Error::Config("initial_data: bump requires `amplitude`".into())
                })?;
                if !(amp >= 0.0 && amp.is_finite()) {
                    return Err(Error::Config(format!("initial_data.amplitude must be nonneg, got {amp}")));
                }
                if let Some(w) = id.width {
                    if !(w > 0.0 && w.is_finite()) {
                        return Err(Error::Config(format!("initial_data.width must be positive, got {w}")));
                    }
                }
            }
            "helix" => {
                if self.target_kind()? != TargetKind::Sphere2 {
                    return Err(Error::Config("initial_data: helix is defined on sphere2 only".into()));
                }
                let theta = id.theta.ok_or_else(|| {
                    Error::Config("initial_data: helix requires `theta`".into())
                })?;
                if !(theta > 0.0 && theta < std::f64::consts::PI) {
                    return Err(Error::Config(format!(
                        "initial_data.theta must lie in (0, pi), got {theta}"
                    )));
                }
                if id.wavenumber.unwrap_or(1) == 0 {
                    return Err(Error::Config("initial_data.wavenumber must be nonzero".into()));
                }
            }
            "random" => {
                if id.seed.is_none() {
                    return Err(Error::Config("initial_data: random requires `seed`".into()));
                }
                let amp = id.amplitude.unwrap_or(0.05);
                if !(amp >= 0.0 && amp.is_finite()) {
                    return Err(Error::Config(format!("initial_data.amplitude must be nonneg, got {amp}")));
                }
                if let Some(s) = id.smoothing {
                    if !(s >= 0.0 && s.is_finite()) {
                        return Err(Error::Config(format!("initial_data.smoothing must be nonneg, got {s}")));
                    }
                }
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown initial data family `{other}`; valid: bump, helix, random"
                )))
            }
        }
        Ok(())
    }
}

/// Parse and validate a config from TOML text. Syntax errors carry the
/// parser's line/column report; unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig =
        toml::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
target = "sphere2"
[initial_data]
family = "bump"
amplitude = 0.1
"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.target_kind().unwrap(), TargetKind::Sphere2);
        assert_eq!(cfg.flow, "full");
        assert_eq!(cfg.threads, 1);
        assert_eq!(cfg.grid.n, 64);
        assert_eq!(cfg.sl.t_final, 1.0);
        assert_eq!(cfg.heat.s_max, crate::heatflow::HeatOptions::default().s_max);
        assert_eq!(cfg.diagnostics.envelope_sigmas, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn golden_config_parses_exactly() {
        let text = r#"
target = "flat_torus2"
flow = "sl"
threads = 1

[grid]
n = 32
length = 6.283185307179586

[initial_data]
family = "random"
seed = 42
amplitude = 0.02
smoothing = 0.5

[sl]
t_final = 0.25
dt = 0.0005
store_every = 50

[output]
dump_every = 2

[diagnostics]
envelope_sigmas = [0.0, 1.0]
envelope_iterations = 2
decay_fits = false
residual_suite = false
"#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.target_kind().unwrap(), TargetKind::FlatTorus2);
        assert_eq!(cfg.flow, "sl");
        assert_eq!(cfg.grid.n, 32);
        assert_eq!(cfg.initial_data.seed, Some(42));
        assert_eq!(cfg.sl.dt, 0.0005);
        assert_eq!(cfg.output.dump_every, 2);
        assert_eq!(cfg.diagnostics.envelope_iterations, 2);
        assert!(!cfg.diagnostics.decay_fits);
    }

    #[test]
    fn bad_target_names_valid_set() {
        let err = parse_config(&MINIMAL.replace("sphere2", "banana")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("banana") && msg.contains("sphere_product"), "{msg}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\nturbo = true\n");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn out_of_range_values_are_rejected() {
        assert!(parse_config(&MINIMAL.replace("amplitude = 0.1", "amplitude = -1.0")).is_err());
        let bad_grid = format!("{MINIMAL}\n[grid]\nn = 48\nlength = 6.0\n");
        assert!(parse_config(&bad_grid).is_err());
        let helix_on_torus = r#"
target = "flat_torus2"
[initial_data]
family = "helix"
theta = 0.5
"#;
        assert!(parse_config(helix_on_torus).is_err());
        let off_lattice = format!("{MINIMAL}\n[diagnostics]\nenvelope_sigmas = [0.3]\n");
        assert!(parse_config(&off_lattice).is_err());
    }

    #[test]
    fn missing_required_keys_have_distinct_messages() {
        let no_family = r#"
target = "sphere2"
[initial_data]
family = "helix"
"#;
        let msg = parse_config(no_family).unwrap_err().to_string();
        assert!(msg.contains("theta"), "{msg}");
        let no_seed = r#"
target = "sphere2"
[initial_data]
family = "random"
"#;
        let msg2 = parse_config(no_seed).unwrap_err().to_string();
        assert!(msg2.contains("seed"), "{msg2}");
    }
}
