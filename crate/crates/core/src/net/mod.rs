//! Planar polyhedral nets: hinge trees, rigid folding and closure checks.
//!
//! A net is a set of planar polygonal faces laid out in one plane. Hinges
//! join pairs of faces along an edge and must form a spanning tree over the
//! faces. Mating pairs list boundary edges that should meet once the net
//! is folded; their residual separation is the closure error.
//!
//! Hinges are idealised as zero-width fold lines. Folding is rigid: every
//! face keeps its flat shape and the subtree beyond a hinge rotates about
//! the hinge line. All creases fold the same way, out of the print plane
//! toward `+z`.

mod canonical;
mod file;
mod fold;

use std::collections::{HashMap, HashSet};
use std::fmt;

use nalgebra::Point2;

use crate::model::JointConfig;

pub use canonical::canonical_net;
pub use file::{net_from_json, net_to_json, read_net, write_net};
pub use fold::{closure_error, fold_net, predict_fold, FoldedNet};

/// Length tolerance for edges that must match (m).
pub const EDGE_LENGTH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub id: String,
    /// Polygon vertices in the layout plane (m).
    pub vertices: Vec<Point2<f64>>,
}

impl Face {
    pub fn centroid(&self) -> Point2<f64> {
        let sum = self
            .vertices
            .iter()
            .fold(nalgebra::Vector2::zeros(), |acc, v| acc + v.coords);
        Point2::from(sum / self.vertices.len() as f64)
    }

    fn is_edge(&self, [i, j]: [usize; 2]) -> bool {
        let n = self.vertices.len();
        i < n && j < n && ((i + 1) % n == j || (j + 1) % n == i)
    }

    fn edge_length(&self, [i, j]: [usize; 2]) -> f64 {
        (self.vertices[i] - self.vertices[j]).norm()
    }
}

/// What sets a hinge's fold angle.
#[derive(Debug, Clone, PartialEq)]
pub enum HingeDrive {
    /// A band-driven joint whose angle comes from the equilibrium model.
    Joint(JointConfig),
    /// A prescribed fold angle (rad).
    Target(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hinge {
    pub face_a: String,
    pub face_b: String,
    /// Vertex indices of the shared edge in `face_a`; `edge_a[k]` meets
    /// `edge_b[k]`.
    pub edge_a: [usize; 2],
    pub edge_b: [usize; 2],
    pub drive: HingeDrive,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeRef {
    pub face: String,
    pub i: usize,
    pub j: usize,
}

impl EdgeRef {
    pub fn new(face: impl Into<String>, i: usize, j: usize) -> Self {
        EdgeRef {
            face: face.into(),
            i,
            j,
        }
    }

    fn key(&self) -> (String, usize, usize) {
        (self.face.clone(), self.i.min(self.j), self.i.max(self.j))
    }
}

impl fmt::Display for EdgeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{},{}]", self.face, self.i, self.j)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatingPair {
    pub a: EdgeRef,
    pub b: EdgeRef,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetSpec {
    pub faces: Vec<Face>,
    pub hinges: Vec<Hinge>,
    pub mating: Vec<MatingPair>,
    pub root_face: String,
}

impl NetSpec {
    pub fn face_index(&self, id: &str) -> Option<usize> {
        self.faces.iter().position(|f| f.id == id)
    }

    /// Prescribed angles of every hinge; fails on band-driven hinges.
    pub fn target_angles(&self) -> crate::Result<Vec<f64>> {
        self.hinges
            .iter()
            .enumerate()
            .map(|(k, h)| match h.drive {
                HingeDrive::Target(a) => Ok(a),
                HingeDrive::Joint(_) => Err(crate::Error::Hinge {
                    hinge: k,
                    source: Box::new(crate::Error::invalid("target_angle", "hinge is band-driven")),
                }),
            })
            .collect()
    }
}

/// One broken invariant of a [`NetSpec`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoFaces,
    DuplicateFace {
        id: String,
    },
    DegenerateFace {
        face: String,
        vertices: usize,
    },
    UnknownRoot {
        id: String,
    },
    UnknownFace {
        context: String,
        id: String,
    },
    NotAnEdge {
        context: String,
        face: String,
        edge: [usize; 2],
    },
    SelfHinge {
        hinge: usize,
        face: String,
    },
    EdgeLengthMismatch {
        hinge: usize,
        face_a: String,
        face_b: String,
        length_a: f64,
        length_b: f64,
    },
    Cycle {
        hinge: usize,
        face_a: String,
        face_b: String,
    },
    Disconnected {
        face: String,
    },
    EdgeReused {
        edge: EdgeRef,
    },
    BadTargetAngle {
        hinge: usize,
        angle: f64,
    },
    BadJoint {
        hinge: usize,
        reason: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoFaces => write!(f, "net has no faces"),
            Violation::DuplicateFace { id } => write!(f, "face id `{id}` is used more than once"),
            Violation::DegenerateFace { face, vertices } => {
                write!(f, "face `{face}` has {vertices} vertices, need at least 3")
            }
            Violation::UnknownRoot { id } => write!(f, "root face `{id}` does not exist"),
            Violation::UnknownFace { context, id } => write!(f, "{context} refers to unknown face `{id}`"),
            Violation::NotAnEdge { context, face, edge } => {
                write!(
                    f,
                    "{context}: [{}, {}] is not an edge of face `{face}`",
                    edge[0], edge[1]
                )
            }
            Violation::SelfHinge { hinge, face } => write!(f, "hinge {hinge} joins face `{face}` to itself"),
            Violation::EdgeLengthMismatch {
                hinge,
                face_a,
                face_b,
                length_a,
                length_b,
            } => write!(
                f,
                "hinge {hinge} edge lengths differ: `{face_a}` {:.6} mm vs `{face_b}` {:.6} mm",
                length_a * 1e3,
                length_b * 1e3
            ),
            Violation::Cycle { hinge, face_a, face_b } => {
                write!(f, "hinge {hinge} between `{face_a}` and `{face_b}` closes a cycle")
            }
            Violation::Disconnected { face } => write!(f, "face `{face}` is not connected to the root by hinges"),
            Violation::EdgeReused { edge } => write!(f, "edge {edge} is used by more than one hinge or mating pair"),
            Violation::BadTargetAngle { hinge, angle } => {
                write!(
                    f,
                    "hinge {hinge} target angle {:.4} deg is outside (0, 180]",
                    angle.to_degrees()
                )
            }
            Violation::BadJoint { hinge, reason } => write!(f, "hinge {hinge} joint: {reason}"),
        }
    }
}

/// Lists every broken invariant of `net`; empty when the net is valid.
pub fn validate_net(net: &NetSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    if net.faces.is_empty() {
        out.push(Violation::NoFaces);
        return out;
    }

    let mut index: HashMap<&str, usize> = HashMap::new();
    for (k, face) in net.faces.iter().enumerate() {
        if index.insert(face.id.as_str(), k).is_some() {
            out.push(Violation::DuplicateFace { id: face.id.clone() });
        }
        if face.vertices.len() < 3 {
            out.push(Violation::DegenerateFace {
                face: face.id.clone(),
                vertices: face.vertices.len(),
            });
        }
    }
    let root = index.get(net.root_face.as_str()).copied();
    if root.is_none() {
        out.push(Violation::UnknownRoot {
            id: net.root_face.clone(),
        });
    }

    let mut used_edges: HashSet<(String, usize, usize)> = HashSet::new();
    let mut claim = |edge: EdgeRef, out: &mut Vec<Violation>| {
        if !used_edges.insert(edge.key()) {
            out.push(Violation::EdgeReused { edge });
        }
    };

    let mut components = UnionFind::new(net.faces.len());
    for (h, hinge) in net.hinges.iter().enumerate() {
        let context = format!("hinge {h}");
        let a = lookup(&index, &hinge.face_a, &context, &mut out);
        let b = lookup(&index, &hinge.face_b, &context, &mut out);
        match &hinge.drive {
            HingeDrive::Target(angle) => {
                if !(*angle > 0.0 && *angle <= std::f64::consts::PI) {
                    out.push(Violation::BadTargetAngle {
                        hinge: h,
                        angle: *angle,
                    });
                }
            }
            HingeDrive::Joint(joint) => {
                if let Err(e) = joint.validate() {
                    out.push(Violation::BadJoint {
                        hinge: h,
                        reason: e.to_string(),
                    });
                }
            }
        }
        let (Some(a), Some(b)) = (a, b) else { continue };
        if a == b {
            out.push(Violation::SelfHinge {
                hinge: h,
                face: hinge.face_a.clone(),
            });
            continue;
        }
        let fa = &net.faces[a];
        let fb = &net.faces[b];
        let ok_a = check_edge(fa, hinge.edge_a, &context, &mut out);
        let ok_b = check_edge(fb, hinge.edge_b, &context, &mut out);
        if ok_a && ok_b {
            let (la, lb) = (fa.edge_length(hinge.edge_a), fb.edge_length(hinge.edge_b));
            if (la - lb).abs() > EDGE_LENGTH_TOL {
                out.push(Violation::EdgeLengthMismatch {
                    hinge: h,
                    face_a: fa.id.clone(),
                    face_b: fb.id.clone(),
                    length_a: la,
                    length_b: lb,
                });
            }
            claim(EdgeRef::new(&fa.id, hinge.edge_a[0], hinge.edge_a[1]), &mut out);
            claim(EdgeRef::new(&fb.id, hinge.edge_b[0], hinge.edge_b[1]), &mut out);
        }
        if !components.union(a, b) {
            out.push(Violation::Cycle {
                hinge: h,
                face_a: fa.id.clone(),
                face_b: fb.id.clone(),
            });
        }
    }

    if let Some(root) = root {
        for (k, face) in net.faces.iter().enumerate() {
            if components.find(k) != components.find(root) {
                out.push(Violation::Disconnected { face: face.id.clone() });
            }
        }
    }

    for (m, pair) in net.mating.iter().enumerate() {
        let context = format!("mating pair {m}");
        for edge in [&pair.a, &pair.b] {
            if let Some(f) = lookup(&index, &edge.face, &context, &mut out) {
                if check_edge(&net.faces[f], [edge.i, edge.j], &context, &mut out) {
                    claim(edge.clone(), &mut out);
                }
            }
        }
    }
    out
}

fn lookup(index: &HashMap<&str, usize>, id: &str, context: &str, out: &mut Vec<Violation>) -> Option<usize> {
    let found = index.get(id).copied();
    if found.is_none() {
        out.push(Violation::UnknownFace {
            context: context.to_string(),
            id: id.to_string(),
        });
    }
    found
}

fn check_edge(face: &Face, edge: [usize; 2], context: &str, out: &mut Vec<Violation>) -> bool {
    let ok = face.is_edge(edge);
    if !ok {
        out.push(Violation::NotAnEdge {
            context: context.to_string(),
            face: face.id.clone(),
            edge,
        });
    }
    ok
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}
