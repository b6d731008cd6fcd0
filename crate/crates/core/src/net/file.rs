//! JSON net files. Lengths are millimetres and angles degrees in the file;
//! everything is converted to SI on load.
//!
//! ```json
//! {
//!   "faces": [{"id": "base", "vertices": [[0, 0], [30, 0], [30, 30], [0, 30]]}, ...],
//!   "hinges": [{"face_a": "base", "face_b": "side", "edge_a": [1, 2], "edge_b": [0, 3],
//!               "target_angle_deg": 90}, ...],
//!   "mating": [{"a": {"face": "side", "i": 1, "j": 2}, "b": {"face": "lid", "i": 0, "j": 1}}],
//!   "root_face": "base"
//! }
//! ```
//!
//! A hinge gives either `target_angle_deg` or a `joint`:
//!
//! ```json
//! "joint": {
//!   "hinge": {"layers": 2, "width_mm": 10, "length_mm": 5},
//!   "band": {"label": "yellow", "inner_diameter_mm": 12, "stiffness_n_per_m": 120},
//!   "hook_spacing_mm": 40
//! }
//! ```

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::Point2;
use serde::{Deserialize, Serialize};

use super::{EdgeRef, Face, Hinge, HingeDrive, MatingPair, NetSpec};
use crate::error::{Error, Result};
use crate::model::{BandSpec, HingeSpec, JointConfig, DEFAULT_GAMMA, DEFAULT_LAYER_HEIGHT, DEFAULT_YOUNG_MODULUS};

/// Millimetres per metre; lengths are divided by this on load.
const MM_PER_M: f64 = 1e3;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetFile {
    faces: Vec<FaceFile>,
    hinges: Vec<HingeFile>,
    #[serde(default)]
    mating: Vec<MatingFile>,
    root_face: FaceKey,
}

/// Face ids may be written as strings or integers.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum FaceKey {
    Name(String),
    Number(u64),
}

impl FaceKey {
    fn into_id(self) -> String {
        match self {
            FaceKey::Name(s) => s,
            FaceKey::Number(n) => n.to_string(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FaceFile {
    id: FaceKey,
    vertices: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HingeFile {
    face_a: FaceKey,
    face_b: FaceKey,
    edge_a: [usize; 2],
    edge_b: [usize; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    joint: Option<JointFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target_angle_deg: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointFile {
    hinge: HingeSpecFile,
    band: BandFile,
    hook_spacing_mm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stop_angle_deg: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HingeSpecFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    thickness_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    layers: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    layer_height_mm: Option<f64>,
    width_mm: f64,
    length_mm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    young_modulus_gpa: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BandFile {
    #[serde(default)]
    label: String,
    inner_diameter_mm: f64,
    stiffness_n_per_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatingFile {
    a: EdgeFile,
    b: EdgeFile,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeFile {
    face: FaceKey,
    i: usize,
    j: usize,
}

impl HingeSpecFile {
    fn into_spec(self) -> Result<HingeSpec> {
        let layer_height = self.layer_height_mm.map_or(DEFAULT_LAYER_HEIGHT, |h| h / MM_PER_M);
        let hinge = match (self.thickness_mm, self.layers) {
            (_, Some(layers)) => {
                let h = HingeSpec::with_layers(
                    layers,
                    layer_height,
                    self.width_mm / MM_PER_M,
                    self.length_mm / MM_PER_M,
                )?;
                if let Some(t) = self.thickness_mm {
                    if (t / MM_PER_M - h.thickness).abs() > 1e-12 {
                        return Err(Error::invalid("thickness", "disagrees with layers x layer_height"));
                    }
                }
                h
            }
            (Some(t), None) => HingeSpec::new(t / MM_PER_M, self.width_mm / MM_PER_M, self.length_mm / MM_PER_M)?,
            (None, None) => return Err(Error::invalid("thickness", "give thickness_mm or layers")),
        };
        hinge.with_young_modulus(self.young_modulus_gpa.map_or(DEFAULT_YOUNG_MODULUS, |e| e * 1e9))
    }

    fn from_spec(h: &HingeSpec) -> Self {
        HingeSpecFile {
            thickness_mm: h.layers.is_none().then_some(h.thickness * MM_PER_M),
            layers: h.layers,
            layer_height_mm: h.layers.map(|_| h.layer_height * MM_PER_M),
            width_mm: h.width * MM_PER_M,
            length_mm: h.length * MM_PER_M,
            young_modulus_gpa: Some(h.young_modulus / 1e9),
        }
    }
}

impl JointFile {
    fn into_joint(self) -> Result<JointConfig> {
        let hinge = self.hinge.into_spec()?;
        let band = BandSpec::new(
            self.band.label,
            self.band.inner_diameter_mm / MM_PER_M,
            self.band.stiffness_n_per_m,
        )?
        .with_gamma(self.band.gamma.unwrap_or(DEFAULT_GAMMA))?;
        let joint = JointConfig::new(hinge, band, self.hook_spacing_mm / MM_PER_M)?;
        match self.stop_angle_deg {
            Some(stop) => joint.with_stop(stop.to_radians()),
            None => Ok(joint),
        }
    }

    fn from_joint(j: &JointConfig) -> Self {
        JointFile {
            hinge: HingeSpecFile::from_spec(&j.hinge),
            band: BandFile {
                label: j.band.label.clone(),
                inner_diameter_mm: j.band.inner_diameter * MM_PER_M,
                stiffness_n_per_m: j.band.stiffness,
                gamma: Some(j.band.gamma),
            },
            hook_spacing_mm: j.hook_spacing * MM_PER_M,
            stop_angle_deg: j.stop_angle.map(f64::to_degrees),
        }
    }
}

impl NetFile {
    fn into_net(self) -> Result<NetSpec> {
        let faces = self
            .faces
            .into_iter()
            .map(|f| Face {
                id: f.id.into_id(),
                vertices: f
                    .vertices
                    .iter()
                    .map(|[x, y]| Point2::new(x / MM_PER_M, y / MM_PER_M))
                    .collect(),
            })
            .collect();
        let hinges = self
            .hinges
            .into_iter()
            .enumerate()
            .map(|(k, h)| {
                let drive = match (h.joint, h.target_angle_deg) {
                    (Some(j), None) => HingeDrive::Joint(j.into_joint().map_err(|e| Error::Hinge {
                        hinge: k,
                        source: Box::new(e),
                    })?),
                    (None, Some(a)) => HingeDrive::Target(a.to_radians()),
                    _ => {
                        return Err(Error::Parse(format!(
                            "hinge {k}: give exactly one of `joint` or `target_angle_deg`"
                        )))
                    }
                };
                Ok(Hinge {
                    face_a: h.face_a.into_id(),
                    face_b: h.face_b.into_id(),
                    edge_a: h.edge_a,
                    edge_b: h.edge_b,
                    drive,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let edge = |e: EdgeFile| EdgeRef::new(e.face.into_id(), e.i, e.j);
        let mating = self
            .mating
            .into_iter()
            .map(|m| MatingPair {
                a: edge(m.a),
                b: edge(m.b),
            })
            .collect();
        Ok(NetSpec {
            faces,
            hinges,
            mating,
            root_face: self.root_face.into_id(),
        })
    }

    fn from_net(net: &NetSpec) -> Self {
        let key = |s: &str| FaceKey::Name(s.to_string());
        NetFile {
            faces: net
                .faces
                .iter()
                .map(|f| FaceFile {
                    id: key(&f.id),
                    vertices: f.vertices.iter().map(|p| [p.x * MM_PER_M, p.y * MM_PER_M]).collect(),
                })
                .collect(),
            hinges: net
                .hinges
                .iter()
                .map(|h| {
                    let (joint, target_angle_deg) = match &h.drive {
                        HingeDrive::Joint(j) => (Some(JointFile::from_joint(j)), None),
                        HingeDrive::Target(a) => (None, Some(a.to_degrees())),
                    };
                    HingeFile {
                        face_a: key(&h.face_a),
                        face_b: key(&h.face_b),
                        edge_a: h.edge_a,
                        edge_b: h.edge_b,
                        joint,
                        target_angle_deg,
                    }
                })
                .collect(),
            mating: net
                .mating
                .iter()
                .map(|m| MatingFile {
                    a: EdgeFile {
                        face: key(&m.a.face),
                        i: m.a.i,
                        j: m.a.j,
                    },
                    b: EdgeFile {
                        face: key(&m.b.face),
                        i: m.b.i,
                        j: m.b.j,
                    },
                })
                .collect(),
            root_face: key(&net.root_face),
        }
    }
}

/// Parses a net file. Structural problems (unknown faces, cycles, ...) are
/// left to [`super::validate_net`].
pub fn net_from_json(text: &str) -> Result<NetSpec> {
    serde_json::from_str::<NetFile>(text)?.into_net()
}

pub fn net_to_json(net: &NetSpec) -> String {
    serde_json::to_string_pretty(&NetFile::from_net(net)).expect("net serialises")
}

pub fn read_net(path: impl AsRef<Path>) -> Result<NetSpec> {
    let mut text = String::new();
    std::fs::File::open(path)?.read_to_string(&mut text)?;
    net_from_json(&text)
}

pub fn write_net(net: &NetSpec, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(net_to_json(net).as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}
