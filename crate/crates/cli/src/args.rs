//! Flag groups shared between subcommands and their conversion to library
//! types. Lengths are millimetres and angles degrees on the command line.

use std::path::PathBuf;

use clap::Args;
use foldkit::design::{spacing_range, SweepGrid};
use foldkit::locomotion::{calibrate_bias, ModuleBody};
use foldkit::model::{BandSpec, HingeSpec, JointConfig};

use crate::config::ToolConfig;
use crate::error::CliError;

pub fn mm(v: f64) -> f64 {
    v / 1e3
}

#[derive(Debug, Args)]
pub struct HingeArgs {
    /// Hinge thickness in printed layers
    #[arg(long, conflicts_with = "thickness_mm")]
    pub layers: Option<u32>,
    /// Hinge thickness
    #[arg(long, value_name = "MM")]
    pub thickness_mm: Option<f64>,
    /// Printed layer height
    #[arg(long, value_name = "MM")]
    pub layer_height_mm: Option<f64>,
    /// Hinge width along the fold line
    #[arg(long, value_name = "MM")]
    pub width_mm: Option<f64>,
    /// Hinge length across the fold line
    #[arg(long, value_name = "MM")]
    pub length_mm: Option<f64>,
    /// Young's modulus of the printed material
    #[arg(long, value_name = "GPA")]
    pub young_gpa: Option<f64>,
}

impl HingeArgs {
    pub fn is_set(&self) -> bool {
        self.layers.is_some() || self.thickness_mm.is_some()
    }

    pub fn build(&self, config: &ToolConfig) -> Result<HingeSpec, CliError> {
        let layers = match (self.layers, self.thickness_mm) {
            (Some(l), _) => vec![l],
            (None, Some(_)) => vec![],
            (None, None) => return Err(CliError::Input("give --layers or --thickness-mm".into())),
        };
        let mut hinges = hinge_variants(self, &layers, config)?;
        Ok(hinges.remove(0))
    }
}

/// One hinge per layer count, or the `--thickness-mm` hinge when `layers` is
/// empty.
pub fn hinge_variants(args: &HingeArgs, layers: &[u32], config: &ToolConfig) -> Result<Vec<HingeSpec>, CliError> {
    let width = mm(args.width_mm.unwrap_or(config.hinge.width_mm));
    let length = mm(args.length_mm.unwrap_or(config.hinge.length_mm));
    let layer_height = mm(args.layer_height_mm.unwrap_or(config.material.layer_height_mm));
    let young = args.young_gpa.unwrap_or(config.material.young_modulus_gpa) * 1e9;
    let build = |h: foldkit::Result<HingeSpec>| -> Result<HingeSpec, CliError> { Ok(h?.with_young_modulus(young)?) };
    if layers.is_empty() {
        let t = args
            .thickness_mm
            .ok_or_else(|| CliError::Input("give --layers or --thickness-mm".into()))?;
        return Ok(vec![build(HingeSpec::new(mm(t), width, length))?]);
    }
    layers
        .iter()
        .map(|&n| build(HingeSpec::with_layers(n, layer_height, width, length)))
        .collect()
}

#[derive(Debug, Args)]
pub struct BandArgs {
    /// Band preset from the config
    #[arg(long, default_value = "yellow")]
    pub band: String,
    /// Relaxed inner diameter, overriding the preset
    #[arg(long, value_name = "MM")]
    pub diameter_mm: Option<f64>,
    /// Band stiffness per strand, overriding the preset
    #[arg(long, value_name = "N_PER_M")]
    pub kb: Option<f64>,
    /// Hook-wrap correction, overriding the preset
    #[arg(long)]
    pub gamma: Option<f64>,
}

impl BandArgs {
    pub fn build(&self, config: &ToolConfig) -> Result<BandSpec, CliError> {
        let mut band = config.band(&self.band)?;
        if let Some(d) = self.diameter_mm {
            band.inner_diameter = mm(d);
        }
        if let Some(kb) = self.kb {
            band.stiffness = kb;
        } else {
            warn_placeholder(config, &self.band);
        }
        if let Some(g) = self.gamma {
            band.gamma = g;
        }
        band.validate()?;
        Ok(band)
    }
}

pub fn warn_placeholder(config: &ToolConfig, preset: &str) {
    if let Ok(p) = config.preset(preset) {
        if !p.calibrated {
            eprintln!(
                "warning: band preset `{preset}` uses placeholder stiffness {} N/m; it requires calibration \
                 (pass --kb or define the preset in a config file)",
                p.stiffness_n_per_m
            );
        }
    }
}

#[derive(Debug, Args)]
pub struct JointArgs {
    #[command(flatten)]
    pub hinge: HingeArgs,
    #[command(flatten)]
    pub band: BandArgs,
    /// Hook spacing across the hinge
    #[arg(long, value_name = "MM")]
    pub spacing_mm: Option<f64>,
    /// Mechanical stop angle
    #[arg(long, value_name = "DEG")]
    pub stop_deg: Option<f64>,
}

impl JointArgs {
    pub fn build(&self, config: &ToolConfig) -> Result<JointConfig, CliError> {
        let hinge = self.hinge.build(config)?;
        let band = self.band.build(config)?;
        let spacing = self
            .spacing_mm
            .ok_or_else(|| CliError::Input("give --spacing-mm".into()))?;
        let joint = JointConfig::new(hinge, band, mm(spacing))?;
        Ok(match self.stop_deg {
            Some(stop) => joint.with_stop(stop.to_radians())?,
            None => joint,
        })
    }
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Band presets to sweep
    #[arg(long, value_delimiter = ',', default_value = "yellow,transparent,black")]
    pub bands: Vec<String>,
    /// Band stiffness, one value for all bands or one per band
    #[arg(long = "kb", value_delimiter = ',', value_name = "N_PER_M")]
    pub kbs: Vec<f64>,
    /// Hinge layer counts to sweep
    #[arg(long = "layers", value_delimiter = ',', default_value = "1,2,3")]
    pub layers: Vec<u32>,
    /// Explicit hook spacings, instead of a range
    #[arg(long, value_delimiter = ',', value_name = "MM", conflicts_with_all = ["spacing_from_mm", "spacing_to_mm", "spacing_step_mm"])]
    pub spacings_mm: Vec<f64>,
    /// First hook spacing of the range
    #[arg(long, value_name = "MM", default_value_t = 20.0)]
    pub spacing_from_mm: f64,
    /// Last hook spacing of the range
    #[arg(long, value_name = "MM", default_value_t = 60.0)]
    pub spacing_to_mm: f64,
    /// Hook spacing step
    #[arg(long, value_name = "MM", default_value_t = 2.0)]
    pub spacing_step_mm: f64,
    /// Hinge width along the fold line
    #[arg(long, value_name = "MM")]
    pub width_mm: Option<f64>,
    /// Hinge length across the fold line
    #[arg(long, value_name = "MM")]
    pub length_mm: Option<f64>,
    /// Printed layer height
    #[arg(long, value_name = "MM")]
    pub layer_height_mm: Option<f64>,
    /// Young's modulus of the printed material
    #[arg(long, value_name = "GPA")]
    pub young_gpa: Option<f64>,
}

impl GridArgs {
    pub fn build(&self, config: &ToolConfig) -> Result<SweepGrid, CliError> {
        if !(self.kbs.len() <= 1 || self.kbs.len() == self.bands.len()) {
            return Err(CliError::Input(format!(
                "--kb takes one value or one per band ({} bands, {} values)",
                self.bands.len(),
                self.kbs.len()
            )));
        }
        let bands = self
            .bands
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let mut band = config.band(name)?;
                match self.kbs.get(i).or(self.kbs.first()) {
                    Some(&kb) => band.stiffness = kb,
                    None => warn_placeholder(config, name),
                }
                band.validate()?;
                Ok(band)
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let hinge_args = HingeArgs {
            layers: None,
            thickness_mm: None,
            layer_height_mm: self.layer_height_mm,
            width_mm: self.width_mm,
            length_mm: self.length_mm,
            young_gpa: self.young_gpa,
        };
        if self.layers.is_empty() {
            return Err(CliError::Input("--layers needs at least one value".into()));
        }
        let hinges = hinge_variants(&hinge_args, &self.layers, config)?;
        let spacings = if self.spacings_mm.is_empty() {
            spacing_range(self.spacing_from_mm, self.spacing_to_mm, self.spacing_step_mm)?
                .into_iter()
                .map(mm)
                .collect()
        } else {
            self.spacings_mm.iter().copied().map(mm).collect()
        };
        Ok(SweepGrid::new(spacings, bands, hinges)?)
    }
}

#[derive(Debug, Args)]
pub struct BodyArgs {
    /// Eccentric mass of each motor
    #[arg(long, value_name = "G")]
    pub eccentric_mass_g: Option<f64>,
    /// Eccentric radius of each motor
    #[arg(long, value_name = "MM")]
    pub eccentric_radius_mm: Option<f64>,
    /// Motor speed at full duty
    #[arg(long, value_name = "RAD_PER_S")]
    pub omega_max: Option<f64>,
    /// Forward speed per newton of inertial force
    #[arg(long)]
    pub speed_gain: Option<f64>,
    /// Yaw rate per rad/s of motor speed difference
    #[arg(long)]
    pub yaw_gain: Option<f64>,
    /// Turning bias per metre travelled
    #[arg(
        long,
        value_name = "RAD_PER_M",
        allow_hyphen_values = true,
        conflicts_with = "straight_pair"
    )]
    pub bias: Option<f64>,
    /// Calibrate the bias so that this duty pair (percent) drives straight
    #[arg(long, value_delimiter = ',', value_name = "DUTY1,DUTY2")]
    pub straight_pair: Option<Vec<f64>>,
}

impl BodyArgs {
    pub fn build(&self, config: &ToolConfig) -> Result<ModuleBody, CliError> {
        let d = &config.body;
        let body = ModuleBody::new(
            self.eccentric_mass_g.unwrap_or(d.eccentric_mass_g) / 1e3,
            mm(self.eccentric_radius_mm.unwrap_or(d.eccentric_radius_mm)),
            self.omega_max.unwrap_or(d.omega_max),
            self.speed_gain.unwrap_or(d.speed_gain),
            self.yaw_gain.unwrap_or(d.yaw_gain),
        )?;
        let bias = match self.straight_pair.as_deref() {
            Some(&[fixed, reduced]) => calibrate_bias(&body, fixed / 100.0, reduced / 100.0)?,
            Some(_) => {
                return Err(CliError::Input(
                    "--straight-pair takes two duties, e.g. 43.1,31.4".into(),
                ))
            }
            None => self.bias.unwrap_or(d.bias),
        };
        Ok(body.with_bias(bias)?)
    }
}

/// Output file, or stdout when absent or `-`.
pub fn is_stdout(path: &Option<PathBuf>) -> bool {
    path.as_ref().is_none_or(|p| p.as_os_str() == "-")
}
