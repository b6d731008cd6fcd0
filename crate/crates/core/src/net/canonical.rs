//! Standard nets of the supported solids, produced by unfolding the
//! reference solid along a fixed spanning tree of its faces:
//!
//! - tetrahedron: one triangle with the other three around it (fan)
//! - square pyramid: the base with four triangles around it (star)
//! - cube: a latin cross (base, four sides, lid on one side)
//! - octahedron: a chain of eight triangles (strip)
//! - dodecahedron: two six-pentagon rosettes joined at one petal edge

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use nalgebra::{Point2, Vector2};

use super::{EdgeRef, Face, Hinge, HingeDrive, MatingPair, NetSpec};
use crate::error::{Error, Result};
use crate::polyhedron::{Polyhedron, Solid};

/// Standard net of `shape` with the given edge length (m). Hinges carry
/// the solid's dihedral angles as fixed targets.
pub fn canonical_net(shape: Polyhedron, edge_length: f64) -> Result<NetSpec> {
    if !(edge_length > 0.0 && edge_length.is_finite()) {
        return Err(Error::invalid(
            "edge_length",
            format!("{edge_length} must be finite and > 0"),
        ));
    }
    let solid = shape.solid();
    let adjacency = Adjacency::new(&solid);
    let (root, tree) = spanning_tree(shape, &solid, &adjacency);
    Ok(unfold(shape, &solid, &adjacency, root, &tree, edge_length))
}

/// Faces of the solid that share each edge, and the reverse lookup.
struct Adjacency {
    /// `(u, v)` with `u < v` -> the two faces on it.
    by_edge: BTreeMap<(usize, usize), (usize, usize)>,
    /// Neighbouring faces of each face, ordered by face index.
    neighbours: Vec<Vec<usize>>,
}

impl Adjacency {
    fn new(solid: &Solid) -> Self {
        let mut by_edge = BTreeMap::new();
        let mut neighbours = vec![Vec::new(); solid.faces.len()];
        for (u, v, fa, fb) in solid.edges() {
            by_edge.insert((u, v), (fa, fb));
            neighbours[fa].push(fb);
            neighbours[fb].push(fa);
        }
        for n in &mut neighbours {
            n.sort_unstable();
        }
        Adjacency { by_edge, neighbours }
    }

    fn shared_edge(&self, fa: usize, fb: usize) -> (usize, usize) {
        *self
            .by_edge
            .iter()
            .find(|(_, &(x, y))| (x, y) == (fa, fb) || (x, y) == (fb, fa))
            .expect("adjacent faces share an edge")
            .0
    }
}

/// Root face and tree edges `(parent, child)` in discovery order.
fn spanning_tree(shape: Polyhedron, solid: &Solid, adj: &Adjacency) -> (usize, Vec<(usize, usize)>) {
    // The face whose outward normal points most nearly down sits on the bed.
    let lowest = (0..solid.faces.len())
        .min_by(|&a, &b| solid.outward_normal(a).z.total_cmp(&solid.outward_normal(b).z))
        .unwrap();
    match shape {
        Polyhedron::Tetrahedron | Polyhedron::SquarePyramid | Polyhedron::Cube => {
            let root = if shape == Polyhedron::Tetrahedron { 0 } else { lowest };
            (root, breadth_first(root, adj))
        }
        Polyhedron::Octahedron => (0, chain(0, adj).expect("octahedron faces admit a chain")),
        Polyhedron::Dodecahedron => {
            let top = (0..solid.faces.len())
                .find(|&f| (solid.outward_normal(f) + solid.outward_normal(lowest)).norm() < 1e-9)
                .expect("dodecahedron faces come in opposite pairs");
            let lower = &adj.neighbours[lowest];
            let upper = &adj.neighbours[top];
            let mut tree: Vec<(usize, usize)> = lower.iter().map(|&p| (lowest, p)).collect();
            let (bridge_from, bridge_to) = lower
                .iter()
                .find_map(|&p| upper.iter().find(|&&q| adj.neighbours[p].contains(&q)).map(|&q| (p, q)))
                .expect("the two rosettes touch");
            tree.push((bridge_from, bridge_to));
            tree.push((bridge_to, top));
            tree.extend(upper.iter().filter(|&&q| q != bridge_to).map(|&q| (top, q)));
            (lowest, tree)
        }
    }
}

fn breadth_first(root: usize, adj: &Adjacency) -> Vec<(usize, usize)> {
    let mut seen = BTreeSet::from([root]);
    let mut queue = VecDeque::from([root]);
    let mut tree = Vec::new();
    while let Some(f) = queue.pop_front() {
        for &g in &adj.neighbours[f] {
            if seen.insert(g) {
                tree.push((f, g));
                queue.push_back(g);
            }
        }
    }
    tree
}

/// Hamiltonian path through the face adjacency graph, found depth-first.
fn chain(start: usize, adj: &Adjacency) -> Option<Vec<(usize, usize)>> {
    fn extend(path: &mut Vec<usize>, adj: &Adjacency) -> bool {
        if path.len() == adj.neighbours.len() {
            return true;
        }
        let last = *path.last().unwrap();
        for &next in &adj.neighbours[last] {
            if !path.contains(&next) {
                path.push(next);
                if extend(path, adj) {
                    return true;
                }
                path.pop();
            }
        }
        false
    }
    let mut path = vec![start];
    extend(&mut path, adj).then(|| path.windows(2).map(|w| (w[0], w[1])).collect())
}

/// Lays the faces out in the plane, hinge by hinge, with every outward
/// normal pointing to `-z` so that folding toward `+z` rebuilds the solid.
fn unfold(
    shape: Polyhedron,
    solid: &Solid,
    adj: &Adjacency,
    root: usize,
    tree: &[(usize, usize)],
    edge_length: f64,
) -> NetSpec {
    let nf = solid.faces.len();
    // 2D polygons list the 3D face reversed so they wind counter-clockwise
    // seen from +z.
    let order: Vec<Vec<usize>> = solid.faces.iter().map(|f| f.iter().rev().copied().collect()).collect();
    let local = |f: usize, v: usize| order[f].iter().position(|&x| x == v).expect("vertex on face");
    let mut layout: Vec<Option<BTreeMap<usize, Point2<f64>>>> = vec![None; nf];

    // Root: first vertex at the origin, first edge along +x.
    {
        let f = &order[root];
        let n = solid.outward_normal(root);
        let origin = solid.vertices[f[0]];
        let x = (solid.vertices[f[1]] - origin).normalize();
        let y = (-n).cross(&x);
        layout[root] = Some(
            f.iter()
                .map(|&v| {
                    let d = solid.vertices[v] - origin;
                    (v, Point2::new(d.dot(&x), d.dot(&y)) * edge_length)
                })
                .collect(),
        );
    }

    let mut hinges = Vec::with_capacity(tree.len());
    for &(parent, child) in tree {
        let (u, v) = adj.shared_edge(parent, child);
        let placed_parent = layout[parent].as_ref().expect("tree lists parents first");
        let (pu, pv) = (placed_parent[&u], placed_parent[&v]);
        let parent_centroid = centroid(placed_parent.values());

        let (xu, xv) = (solid.vertices[u], solid.vertices[v]);
        let along3 = (xv - xu).normalize();
        let mut across3 = solid.outward_normal(child).cross(&along3);
        if across3.dot(&(solid.face_centroid(child) - xu)) < 0.0 {
            across3 = -across3;
        }
        let along2 = (pv - pu).normalize();
        let mut across2 = Vector2::new(-along2.y, along2.x);
        if across2.dot(&(parent_centroid - pu)) > 0.0 {
            across2 = -across2;
        }
        let placed: BTreeMap<usize, Point2<f64>> = order[child]
            .iter()
            .map(|&w| {
                let p = if w == u {
                    pu
                } else if w == v {
                    pv
                } else {
                    let d = solid.vertices[w] - xu;
                    pu + (along2 * d.dot(&along3) + across2 * d.dot(&across3)) * edge_length
                };
                (w, p)
            })
            .collect();
        layout[child] = Some(placed);

        let sides = (solid.faces[parent].len(), solid.faces[child].len());
        hinges.push(Hinge {
            face_a: face_id(parent),
            face_b: face_id(child),
            edge_a: [local(parent, u), local(parent, v)],
            edge_b: [local(child, u), local(child, v)],
            drive: HingeDrive::Target(
                shape
                    .dihedral_between(sides.0, sides.1)
                    .expect("faces of the solid have a dihedral class"),
            ),
        });
    }

    let tree_edges: BTreeSet<(usize, usize)> = tree.iter().map(|&(p, c)| adj.shared_edge(p, c)).collect();
    let mating = adj
        .by_edge
        .iter()
        .filter(|(e, _)| !tree_edges.contains(e))
        .map(|(&(u, v), &(fa, fb))| MatingPair {
            a: EdgeRef::new(face_id(fa), local(fa, u), local(fa, v)),
            b: EdgeRef::new(face_id(fb), local(fb, u), local(fb, v)),
        })
        .collect();

    let faces = (0..nf)
        .map(|f| {
            let placed = layout[f].as_ref().expect("spanning tree reaches every face");
            Face {
                id: face_id(f),
                vertices: order[f].iter().map(|v| placed[v]).collect(),
            }
        })
        .collect();

    NetSpec {
        faces,
        hinges,
        mating,
        root_face: face_id(root),
    }
}

fn face_id(f: usize) -> String {
    format!("f{f}")
}

fn centroid<'a>(points: impl Iterator<Item = &'a Point2<f64>>) -> Point2<f64> {
    let (sum, n) = points.fold((Vector2::zeros(), 0usize), |(s, n), p| (s + p.coords, n + 1));
    Point2::from(sum / n as f64)
}
