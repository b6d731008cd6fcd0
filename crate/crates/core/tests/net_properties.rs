use foldkit::net::{canonical_net, closure_error, fold_net, validate_net};
use foldkit::polyhedron::Polyhedron;
use proptest::prelude::*;

fn any_shape() -> impl Strategy<Value = Polyhedron> {
    prop::sample::select(Polyhedron::ALL.to_vec())
}

#[test]
fn hinge_trees_span_every_canonical_net() {
    for shape in Polyhedron::ALL {
        let net = canonical_net(shape, 0.03).unwrap();
        assert_eq!(net.hinges.len(), net.faces.len() - 1, "{shape}");
        assert!(validate_net(&net).is_empty(), "{shape}");
    }
}

#[test]
fn closure_is_sharp_at_every_hinge() {
    for shape in Polyhedron::ALL {
        let edge = 0.03;
        let net = canonical_net(shape, edge).unwrap();
        let targets = net.target_angles().unwrap();
        assert!(fold_net(&net, &targets).unwrap().closure_error < 1e-9 * edge, "{shape}");
        for k in 0..targets.len() {
            for sign in [-1.0, 1.0] {
                let mut angles = targets.clone();
                angles[k] += sign * 1f64.to_radians();
                let err = fold_net(&net, &angles).unwrap().closure_error;
                assert!(err > 1e-4 * edge, "{shape} hinge {k}: {err}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn faces_stay_rigid(
        shape in any_shape(),
        edge in 0.005f64..0.1,
        angles in prop::collection::vec(0.2f64..std::f64::consts::PI, 11),
    ) {
        let net = canonical_net(shape, edge).unwrap();
        let folded = fold_net(&net, &angles[..net.hinges.len()]).unwrap();
        for (flat, solid) in net.faces.iter().zip(&folded.vertices) {
            for i in 0..flat.vertices.len() {
                for j in i + 1..flat.vertices.len() {
                    let d2 = (flat.vertices[i] - flat.vertices[j]).norm();
                    let d3 = (solid[i] - solid[j]).norm();
                    prop_assert!((d2 - d3).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn folding_is_deterministic(
        shape in any_shape(),
        angles in prop::collection::vec(0.2f64..std::f64::consts::PI, 11),
    ) {
        let net = canonical_net(shape, 0.03).unwrap();
        let a = fold_net(&net, &angles[..net.hinges.len()]).unwrap();
        let b = fold_net(&net, &angles[..net.hinges.len()]).unwrap();
        prop_assert_eq!(closure_error(&a, &net), a.closure_error);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn flat_fold_is_the_layout(shape in any_shape(), edge in 0.005f64..0.1) {
        let net = canonical_net(shape, edge).unwrap();
        let folded = fold_net(&net, &vec![std::f64::consts::PI; net.hinges.len()]).unwrap();
        for (flat, solid) in net.faces.iter().zip(&folded.vertices) {
            for (p, q) in flat.vertices.iter().zip(solid) {
                prop_assert_eq!((p.x, p.y, 0.0), (q.x, q.y, q.z));
            }
        }
    }
}
