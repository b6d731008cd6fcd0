use std::f64::consts::PI;

use nalgebra::{Isometry3, Matrix2, Point2, Point3, Rotation3, Translation3, Unit, UnitQuaternion, Vector2, Vector3};

use super::{validate_net, HingeDrive, NetSpec};
use crate::error::{Error, Result};
use crate::model::{solve_equilibrium, FoldSolution};

/// A net folded into 3D.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldedNet {
    pub face_ids: Vec<String>,
    /// 3D vertex positions per face, in the order of [`NetSpec::faces`] (m).
    pub vertices: Vec<Vec<Point3<f64>>>,
    /// Applied fold angle per hinge (rad).
    pub angles: Vec<f64>,
    /// Equilibrium solutions per hinge when folded by [`predict_fold`].
    pub solutions: Option<Vec<FoldSolution>>,
    pub closure_error: f64,
}

/// Folds `net` with the given per-hinge angles (indexed like
/// [`NetSpec::hinges`]).
pub fn fold_net(net: &NetSpec, angles: &[f64]) -> Result<FoldedNet> {
    let report = validate_net(net);
    if !report.is_empty() {
        return Err(Error::InvalidNet(report));
    }
    if angles.len() < net.hinges.len() {
        return Err(Error::MissingAngle { hinge: angles.len() });
    }
    for &a in &angles[..net.hinges.len()] {
        if !(a > 0.0 && a <= PI) {
            return Err(Error::Domain {
                name: "alpha",
                value: a,
                min: 0.0,
                max: PI,
            });
        }
    }

    let placements = place_faces(net, angles);
    let vertices = net
        .faces
        .iter()
        .zip(&placements)
        .map(|(face, p)| face.vertices.iter().map(|v| p.apply(v)).collect())
        .collect();
    let mut folded = FoldedNet {
        face_ids: net.faces.iter().map(|f| f.id.clone()).collect(),
        vertices,
        angles: angles[..net.hinges.len()].to_vec(),
        solutions: None,
        closure_error: 0.0,
    };
    folded.closure_error = closure_error(&folded, net);
    Ok(folded)
}

/// Largest separation of any mating pair, 0 when there are none.
///
/// Endpoints are paired by proximity, so either vertex order is accepted.
pub fn closure_error(folded: &FoldedNet, net: &NetSpec) -> f64 {
    let point = |face: &str, i: usize| {
        let f = net.face_index(face).expect("mating face exists in a validated net");
        folded.vertices[f][i]
    };
    net.mating
        .iter()
        .map(|pair| {
            let (a0, a1) = (point(&pair.a.face, pair.a.i), point(&pair.a.face, pair.a.j));
            let (b0, b1) = (point(&pair.b.face, pair.b.i), point(&pair.b.face, pair.b.j));
            let straight = ((a0 - b0).norm(), (a1 - b1).norm());
            let crossed = ((a0 - b1).norm(), (a1 - b0).norm());
            let (d0, d1) = if straight.0 + straight.1 <= crossed.0 + crossed.1 {
                straight
            } else {
                crossed
            };
            d0.max(d1)
        })
        .fold(0.0, f64::max)
}

/// Solves every hinge's joint for its equilibrium angle, then folds.
pub fn predict_fold(net: &NetSpec) -> Result<FoldedNet> {
    let solutions = net
        .hinges
        .iter()
        .enumerate()
        .map(|(k, h)| match &h.drive {
            HingeDrive::Joint(joint) => solve_equilibrium(joint).map_err(|e| Error::Hinge {
                hinge: k,
                source: Box::new(e),
            }),
            HingeDrive::Target(_) => Err(Error::Hinge {
                hinge: k,
                source: Box::new(Error::invalid(
                    "joint",
                    "hinge has a fixed target angle, not a band joint",
                )),
            }),
        })
        .collect::<Result<Vec<_>>>()?;
    let angles: Vec<f64> = solutions.iter().map(|s| s.alpha).collect();
    let mut folded = fold_net(net, &angles)?;
    folded.solutions = Some(solutions);
    Ok(folded)
}

/// Where one face ends up: a flat placement within the layout plane
/// followed by a rigid motion in space.
#[derive(Debug, Clone, Copy)]
struct Placement {
    flat: Flat,
    motion: Isometry3<f64>,
}

impl Placement {
    fn apply(&self, v: &Point2<f64>) -> Point3<f64> {
        let p = self.flat.apply(v);
        self.motion * Point3::new(p.x, p.y, 0.0)
    }
}

/// Planar isometry `x -> linear x + shift`; `linear` may be a reflection.
#[derive(Debug, Clone, Copy)]
struct Flat {
    linear: Matrix2<f64>,
    shift: Vector2<f64>,
}

impl Flat {
    fn identity() -> Self {
        Flat {
            linear: Matrix2::identity(),
            shift: Vector2::zeros(),
        }
    }

    fn apply(&self, v: &Point2<f64>) -> Point2<f64> {
        Point2::from(self.linear * v.coords + self.shift)
    }
}

/// Depth-first placement from the root face. A child is first laid flat
/// against its parent across the hinge edge (the identity for a consistent
/// layout), then its whole subtree is rotated about the hinge line by
/// `PI - alpha` so the two faces meet at interior angle `alpha`.
fn place_faces(net: &NetSpec, angles: &[f64]) -> Vec<Placement> {
    let n = net.faces.len();
    let root = net.face_index(&net.root_face).expect("validated root");
    let index: Vec<(usize, usize)> = net
        .hinges
        .iter()
        .map(|h| (net.face_index(&h.face_a).unwrap(), net.face_index(&h.face_b).unwrap()))
        .collect();

    let mut placed: Vec<Option<Placement>> = vec![None; n];
    placed[root] = Some(Placement {
        flat: Flat::identity(),
        motion: Isometry3::identity(),
    });
    let mut stack = vec![root];
    while let Some(parent) = stack.pop() {
        let parent_place = placed[parent].expect("pushed faces are placed");
        // Reverse so that lower hinge indices are expanded first.
        for (k, hinge) in net.hinges.iter().enumerate().rev() {
            let (fa, fb) = index[k];
            let (child, parent_edge, child_edge) = if fa == parent && placed[fb].is_none() {
                (fb, hinge.edge_a, hinge.edge_b)
            } else if fb == parent && placed[fa].is_none() {
                (fa, hinge.edge_b, hinge.edge_a)
            } else {
                continue;
            };
            let pf = &net.faces[parent];
            let cf = &net.faces[child];
            let a0 = parent_place.flat.apply(&pf.vertices[parent_edge[0]]);
            let a1 = parent_place.flat.apply(&pf.vertices[parent_edge[1]]);
            let parent_centroid = parent_place.flat.apply(&pf.centroid());

            let flat = abut(
                a0,
                a1,
                parent_centroid,
                cf.vertices[child_edge[0]],
                cf.vertices[child_edge[1]],
                cf.centroid(),
            );

            // Unit in-plane normal of the hinge line pointing into the child.
            let along = (a1 - a0).normalize();
            let mut inward = Vector2::new(-along.y, along.x);
            if inward.dot(&(flat.apply(&cf.centroid()) - a0)) < 0.0 {
                inward = -inward;
            }
            // Rotating about (inward x z) lifts the child toward +z.
            let axis = Unit::new_normalize(Vector3::new(inward.y, -inward.x, 0.0));
            let turn = PI - angles[k];
            let rotation = UnitQuaternion::from_axis_angle(&axis, turn);
            let pivot = Vector3::new(a0.x, a0.y, 0.0);
            let hinge_motion = Isometry3::from_parts(Translation3::from(pivot - rotation * pivot), rotation);

            placed[child] = Some(Placement {
                flat,
                motion: parent_place.motion * hinge_motion,
            });
            stack.push(child);
        }
    }
    placed
        .into_iter()
        .map(|p| p.expect("validated nets are connected"))
        .collect()
}

/// Planar isometry taking the child's edge `(b0, b1)` onto the parent's
/// placed edge `(a0, a1)` with the child on the far side of it.
fn abut(
    a0: Point2<f64>,
    a1: Point2<f64>,
    parent_centroid: Point2<f64>,
    b0: Point2<f64>,
    b1: Point2<f64>,
    child_centroid: Point2<f64>,
) -> Flat {
    let da = a1 - a0;
    let db = b1 - b0;
    let angle = (db.x * da.y - db.y * da.x).atan2(db.dot(&da));
    let linear = *Rotation3::from_axis_angle(&Vector3::z_axis(), angle).matrix();
    let linear = Matrix2::new(linear[(0, 0)], linear[(0, 1)], linear[(1, 0)], linear[(1, 1)]);
    let mut flat = Flat {
        linear,
        shift: a0.coords - linear * b0.coords,
    };
    let side = |p: Point2<f64>| da.x * (p.y - a0.y) - da.y * (p.x - a0.x);
    if side(flat.apply(&child_centroid)) * side(parent_centroid) > 0.0 {
        let u = da.normalize();
        let mirror = 2.0 * u * u.transpose() - Matrix2::identity();
        flat = Flat {
            linear: mirror * flat.linear,
            shift: mirror * (flat.shift - a0.coords) + a0.coords,
        };
    }
    flat
}
