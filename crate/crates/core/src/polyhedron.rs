//! The supported solids: exact dihedral angles and reference 3D geometry.
//!
//! The square pyramid is the equilateral one (all edges equal).

use std::fmt;
use std::str::FromStr;

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polyhedron {
    Tetrahedron,
    SquarePyramid,
    Cube,
    Octahedron,
    Dodecahedron,
}

impl Polyhedron {
    pub const ALL: [Polyhedron; 5] = [
        Polyhedron::Tetrahedron,
        Polyhedron::SquarePyramid,
        Polyhedron::Cube,
        Polyhedron::Octahedron,
        Polyhedron::Dodecahedron,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Polyhedron::Tetrahedron => "tetrahedron",
            Polyhedron::SquarePyramid => "square_pyramid",
            Polyhedron::Cube => "cube",
            Polyhedron::Octahedron => "octahedron",
            Polyhedron::Dodecahedron => "dodecahedron",
        }
    }

    /// Dihedral angle (rad) between two faces with the given side counts.
    ///
    /// Only the square pyramid has more than one class: base to lateral
    /// (4, 3) and lateral to lateral (3, 3).
    pub fn dihedral_between(self, sides_a: usize, sides_b: usize) -> Option<f64> {
        match (self, sides_a.min(sides_b), sides_a.max(sides_b)) {
            (Polyhedron::Tetrahedron, 3, 3) => Some((1.0f64 / 3.0).acos()),
            (Polyhedron::SquarePyramid, 3, 4) => Some(2f64.sqrt().atan()),
            (Polyhedron::SquarePyramid, 3, 3) => Some((-1.0f64 / 3.0).acos()),
            (Polyhedron::Cube, 4, 4) => Some(std::f64::consts::FRAC_PI_2),
            (Polyhedron::Octahedron, 3, 3) => Some((-1.0f64 / 3.0).acos()),
            (Polyhedron::Dodecahedron, 5, 5) => Some((-1.0 / 5f64.sqrt()).acos()),
            _ => None,
        }
    }

    /// Reference solid with unit edges; faces wind counter-clockwise seen
    /// from outside.
    pub fn solid(self) -> Solid {
        let vertices = match self {
            Polyhedron::Tetrahedron => vec![[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]],
            Polyhedron::SquarePyramid => {
                let h = 1.0 / 2f64.sqrt();
                vec![
                    [1.0, 1.0, 0.0],
                    [-1.0, 1.0, 0.0],
                    [-1.0, -1.0, 0.0],
                    [1.0, -1.0, 0.0],
                    [0.0, 0.0, 2.0 * h],
                ]
            }
            Polyhedron::Cube => {
                let mut v = Vec::with_capacity(8);
                for x in [-1.0, 1.0] {
                    for y in [-1.0, 1.0] {
                        for z in [-1.0, 1.0] {
                            v.push([x, y, z]);
                        }
                    }
                }
                v
            }
            Polyhedron::Octahedron => vec![
                [1.0, 0.0, 0.0],
                [-1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, -1.0, 0.0],
                [0.0, 0.0, 1.0],
                [0.0, 0.0, -1.0],
            ],
            Polyhedron::Dodecahedron => {
                let phi = (1.0 + 5f64.sqrt()) / 2.0;
                let inv = 1.0 / phi;
                let mut v = Vec::with_capacity(20);
                for x in [-1.0, 1.0] {
                    for y in [-1.0, 1.0] {
                        for z in [-1.0, 1.0] {
                            v.push([x, y, z]);
                        }
                    }
                }
                for a in [-1.0, 1.0] {
                    for b in [-1.0, 1.0] {
                        v.push([0.0, a * inv, b * phi]);
                        v.push([a * inv, b * phi, 0.0]);
                        v.push([a * phi, 0.0, b * inv]);
                    }
                }
                v
            }
        };
        let points: Vec<Point3<f64>> = vertices.into_iter().map(|[x, y, z]| Point3::new(x, y, z)).collect();
        Solid::from_convex_points(points)
    }
}

impl fmt::Display for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Polyhedron {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        match norm.as_str() {
            "tetrahedron" => Ok(Polyhedron::Tetrahedron),
            "square_pyramid" | "pyramid" => Ok(Polyhedron::SquarePyramid),
            "cube" => Ok(Polyhedron::Cube),
            "octahedron" => Ok(Polyhedron::Octahedron),
            "dodecahedron" => Ok(Polyhedron::Dodecahedron),
            _ => Err(Error::UnknownPolyhedron(s.to_string())),
        }
    }
}

/// Target dihedral angles (rad) of a solid, one per hinge class.
///
/// The square pyramid lists base-to-lateral first, then lateral-to-lateral.
pub fn polyhedron_targets(shape: Polyhedron) -> Vec<f64> {
    match shape {
        Polyhedron::Tetrahedron => vec![shape.dihedral_between(3, 3).unwrap()],
        Polyhedron::SquarePyramid => vec![
            shape.dihedral_between(4, 3).unwrap(),
            shape.dihedral_between(3, 3).unwrap(),
        ],
        Polyhedron::Cube => vec![shape.dihedral_between(4, 4).unwrap()],
        Polyhedron::Octahedron => vec![shape.dihedral_between(3, 3).unwrap()],
        Polyhedron::Dodecahedron => vec![shape.dihedral_between(5, 5).unwrap()],
    }
}

/// Looks a solid up by name and returns its targets.
pub fn polyhedron_targets_by_name(name: &str) -> Result<Vec<f64>> {
    Ok(polyhedron_targets(name.parse()?))
}

/// A convex polyhedron scaled to unit edge length.
#[derive(Debug, Clone)]
pub struct Solid {
    pub vertices: Vec<Point3<f64>>,
    /// Vertex indices per face, counter-clockwise about the outward normal.
    pub faces: Vec<Vec<usize>>,
}

impl Solid {
    /// Finds the faces of the convex hull of `points` by testing every
    /// vertex triple as a supporting plane. Cheap for the small solids here.
    fn from_convex_points(points: Vec<Point3<f64>>) -> Solid {
        let n = points.len();
        let centroid = points.iter().fold(Vector3::zeros(), |acc, p| acc + p.coords) / n as f64;
        let scale = points
            .iter()
            .enumerate()
            .flat_map(|(i, p)| points[i + 1..].iter().map(move |q| (p - q).norm()))
            .fold(f64::INFINITY, f64::min);
        let vertices: Vec<Point3<f64>> = points
            .iter()
            .map(|p| Point3::from((p.coords - centroid) / scale))
            .collect();

        let eps = 1e-9;
        let mut faces: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let normal = (vertices[j] - vertices[i]).cross(&(vertices[k] - vertices[i]));
                    if normal.norm() < eps {
                        continue;
                    }
                    let mut normal = normal.normalize();
                    let offset = normal.dot(&vertices[i].coords);
                    let (mut above, mut below) = (false, false);
                    let mut on_plane = Vec::new();
                    for (m, v) in vertices.iter().enumerate() {
                        let d = normal.dot(&v.coords) - offset;
                        if d > eps {
                            above = true;
                        } else if d < -eps {
                            below = true;
                        } else {
                            on_plane.push(m);
                        }
                    }
                    if above && below {
                        continue;
                    }
                    if above {
                        normal = -normal;
                    }
                    if faces
                        .iter()
                        .any(|f| f.iter().all(|m| on_plane.contains(m)) && f.len() == on_plane.len())
                    {
                        continue;
                    }
                    faces.push(order_ccw(&vertices, on_plane, &normal));
                }
            }
        }
        faces.sort_by_key(|f| f.clone());
        Solid { vertices, faces }
    }

    pub fn outward_normal(&self, face: usize) -> Vector3<f64> {
        let f = &self.faces[face];
        let p = |i: usize| self.vertices[f[i]];
        (p(1) - p(0)).cross(&(p(2) - p(0))).normalize()
    }

    pub fn face_centroid(&self, face: usize) -> Point3<f64> {
        let f = &self.faces[face];
        Point3::from(f.iter().fold(Vector3::zeros(), |acc, &v| acc + self.vertices[v].coords) / f.len() as f64)
    }

    /// Every edge as `(u, v, face_left, face_right)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize, usize, usize)> {
        let mut seen: std::collections::BTreeMap<(usize, usize), Vec<usize>> = Default::default();
        for (fi, f) in self.faces.iter().enumerate() {
            for k in 0..f.len() {
                let (a, b) = (f[k], f[(k + 1) % f.len()]);
                seen.entry((a.min(b), a.max(b))).or_default().push(fi);
            }
        }
        seen.into_iter().map(|((u, v), fs)| (u, v, fs[0], fs[1])).collect()
    }

    /// Interior dihedral angle along the edge shared by two faces.
    pub fn dihedral(&self, face_a: usize, face_b: usize) -> f64 {
        let cos = self.outward_normal(face_a).dot(&self.outward_normal(face_b));
        std::f64::consts::PI - cos.clamp(-1.0, 1.0).acos()
    }
}

fn order_ccw(vertices: &[Point3<f64>], mut idx: Vec<usize>, normal: &Vector3<f64>) -> Vec<usize> {
    let c = idx.iter().fold(Vector3::zeros(), |acc, &i| acc + vertices[i].coords) / idx.len() as f64;
    let u = (vertices[idx[0]].coords - c).normalize();
    let w = normal.cross(&u);
    let angle = |i: usize| {
        let d = vertices[i].coords - c;
        d.dot(&w).atan2(d.dot(&u)).rem_euclid(std::f64::consts::TAU)
    };
    idx.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)));
    idx
}
