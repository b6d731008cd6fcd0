//! Tool configuration: material defaults, band presets, solver tolerances and
//! output precision. A TOML file may override any subset; explicit flags
//! override the file.

use std::collections::BTreeMap;
use std::path::Path;

use foldkit::model::{BandSpec, SolverOptions};
use serde::Deserialize;

use crate::error::CliError;

/// Environment variable naming a config file when `--config` is absent.
pub const CONFIG_ENV: &str = "FOLDKIT_CONFIG";

/// Stiffness shipped with the built-in band presets (N/m). Real bands need
/// measuring; the CLI warns whenever this value is used.
pub const PLACEHOLDER_BAND_STIFFNESS: f64 = 120.0;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolConfig {
    pub material: Material,
    pub hinge: HingeDefaults,
    pub bands: BTreeMap<String, BandPreset>,
    pub solver: SolverConfig,
    pub body: BodyDefaults,
    pub output: Output,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Material {
    pub young_modulus_gpa: f64,
    pub layer_height_mm: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HingeDefaults {
    pub width_mm: f64,
    pub length_mm: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandPreset {
    pub inner_diameter_mm: f64,
    /// Band cross-section thickness; informational only.
    #[serde(default)]
    pub thickness_mm: Option<f64>,
    pub stiffness_n_per_m: f64,
    #[serde(default)]
    pub gamma: Option<f64>,
    /// False for presets whose stiffness is a placeholder.
    #[serde(default = "yes")]
    pub calibrated: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub flat_offset: f64,
    pub grid_step: f64,
    pub angle_tol: f64,
    pub residual_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BodyDefaults {
    pub eccentric_mass_g: f64,
    pub eccentric_radius_mm: f64,
    pub omega_max: f64,
    pub speed_gain: f64,
    pub yaw_gain: f64,
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    /// Decimals printed for millimetre and degree values.
    pub decimals: usize,
}

impl Default for Material {
    fn default() -> Self {
        Material {
            young_modulus_gpa: foldkit::model::DEFAULT_YOUNG_MODULUS / 1e9,
            layer_height_mm: foldkit::model::DEFAULT_LAYER_HEIGHT * 1e3,
            gamma: foldkit::model::DEFAULT_GAMMA,
        }
    }
}

impl Default for HingeDefaults {
    fn default() -> Self {
        HingeDefaults {
            width_mm: 10.0,
            length_mm: 5.0,
        }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = SolverOptions::default();
        SolverConfig {
            flat_offset: o.flat_offset,
            grid_step: o.grid_step,
            angle_tol: o.angle_tol,
            residual_tol: o.residual_tol,
        }
    }
}

impl Default for BodyDefaults {
    fn default() -> Self {
        BodyDefaults {
            eccentric_mass_g: 0.5,
            eccentric_radius_mm: 1.5,
            omega_max: 1200.0,
            speed_gain: 0.03,
            yaw_gain: 2.5e-4,
            bias: 0.0,
        }
    }
}

impl Default for Output {
    fn default() -> Self {
        Output { decimals: 4 }
    }
}

impl Default for ToolConfig {
    fn default() -> Self {
        ToolConfig {
            material: Material::default(),
            hinge: HingeDefaults::default(),
            bands: builtin_bands(),
            solver: SolverConfig::default(),
            body: BodyDefaults::default(),
            output: Output::default(),
        }
    }
}

fn builtin_bands() -> BTreeMap<String, BandPreset> {
    [("yellow", 12.0, 1.4), ("transparent", 15.0, 2.0), ("black", 25.0, 1.4)]
        .into_iter()
        .map(|(name, d, t)| {
            (
                name.to_string(),
                BandPreset {
                    inner_diameter_mm: d,
                    thickness_mm: Some(t),
                    stiffness_n_per_m: PLACEHOLDER_BAND_STIFFNESS,
                    gamma: None,
                    calibrated: false,
                },
            )
        })
        .collect()
}

impl ToolConfig {
    /// Built-in defaults overlaid with `path`, or with the file named by
    /// [`CONFIG_ENV`] when no path is given.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let env_path = std::env::var_os(CONFIG_ENV).filter(|p| !p.is_empty());
        let path = path.map(Path::to_path_buf).or_else(|| env_path.map(Into::into));
        let config = match path {
            Some(path) => {
                let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                Self::from_toml(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
            }
            None => ToolConfig::default(),
        };
        Ok(config)
    }

    /// Parses a config, keeping built-in band presets the file does not
    /// redefine.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let mut config: ToolConfig = toml::from_str(text).map_err(|e| CliError::Input(e.to_string()))?;
        let mut bands = builtin_bands();
        bands.append(&mut config.bands);
        config.bands = bands;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |what: &str| Err(CliError::Input(format!("config: {what}")));
        if !(self.material.young_modulus_gpa > 0.0) {
            return bad("material.young_modulus_gpa must be > 0");
        }
        if !(self.material.layer_height_mm > 0.0) {
            return bad("material.layer_height_mm must be > 0");
        }
        if !(self.material.gamma > 0.0 && self.material.gamma <= 1.0) {
            return bad("material.gamma must be in (0, 1]");
        }
        if self.output.decimals > 17 {
            return bad("output.decimals must be at most 17");
        }
        self.solver_options()?;
        for name in self.bands.keys() {
            self.band(name)?;
        }
        Ok(())
    }

    pub fn solver_options(&self) -> Result<SolverOptions, CliError> {
        let opts = SolverOptions {
            flat_offset: self.solver.flat_offset,
            grid_step: self.solver.grid_step,
            angle_tol: self.solver.angle_tol,
            residual_tol: self.solver.residual_tol,
        };
        opts.validate()
            .map_err(|e| CliError::Input(format!("config solver tolerances: {e}")))?;
        Ok(opts)
    }

    pub fn preset(&self, name: &str) -> Result<&BandPreset, CliError> {
        self.bands.get(name).ok_or_else(|| {
            let known: Vec<_> = self.bands.keys().map(String::as_str).collect();
            CliError::Input(format!("unknown band preset `{name}` (known: {})", known.join(", ")))
        })
    }

    /// The named preset as a band, with the material's default gamma.
    pub fn band(&self, name: &str) -> Result<BandSpec, CliError> {
        let p = self.preset(name)?;
        let band = BandSpec::new(name, p.inner_diameter_mm / 1e3, p.stiffness_n_per_m)
            .and_then(|b| b.with_gamma(p.gamma.unwrap_or(self.material.gamma)))
            .map_err(|e| CliError::Input(format!("band preset `{name}`: {e}")))?;
        Ok(band)
    }
}
