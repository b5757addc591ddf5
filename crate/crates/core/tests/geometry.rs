use std::f64::consts::PI;

use convex_valuations::lp::{LinearProgram, Relation};
use convex_valuations::polytope::{is_centrally_symmetric_points, PolytopeJson};
use convex_valuations::shapes::{ball_approximant, ball_radius, boxed, cube, octahedron, regular_polygon, segment, zonotope};
use convex_valuations::{Error, FaceId, Polytope, RandomStream, Subspace, Vector};

fn v(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

fn random_zonotope(n: usize, k: usize, rng: &mut RandomStream) -> Polytope {
    let gens: Vec<Vector> = (0..k).map(|_| rng.gaussian_vector(n)).collect();
    zonotope(n, &gens).unwrap()
}

/// Whether `p` is a convex combination of `others`, by a feasibility LP.
fn in_hull(p: &Vector, others: &[Vector]) -> bool {
    let m = others.len();
    let mut lp = LinearProgram::new(vec![0.0; m]);
    for k in 0..p.len() {
        lp.add(others.iter().map(|o| o[k]).collect(), Relation::Eq, p[k]);
    }
    lp.add(vec![1.0; m], Relation::Eq, 1.0);
    lp.solve().is_ok()
}

#[test]
fn hull_drops_interior_and_collinear_points() {
    let mut pts: Vec<Vector> = cube(3).vertices().to_vec();
    pts.push(v(&[0.5, 0.5, 0.5]));
    assert_eq!(Polytope::convex_hull(&pts).unwrap().vertices().len(), 8);

    let seg = Polytope::convex_hull(&[v(&[0.0, 0.0, 0.0]), v(&[1.0, 0.0, 0.0]), v(&[2.0, 0.0, 0.0])]).unwrap();
    assert_eq!(seg.dim(), 1);
    assert_eq!(seg.vertices(), &[v(&[0.0, 0.0, 0.0]), v(&[2.0, 0.0, 0.0])]);

    assert!(matches!(
        Polytope::convex_hull(&[v(&[0.0, 0.0]), v(&[0.0, 0.0, 0.0])]),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn hull_vertices_are_extreme() {
    let mut rng = RandomStream::new(21);
    let pts: Vec<Vector> = (0..100).map(|_| rng.ball_point(3)).collect();
    let p = Polytope::convex_hull(&pts).unwrap();
    let verts = p.vertices();
    for (k, x) in verts.iter().enumerate() {
        let others: Vec<Vector> = verts.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, y)| y.clone()).collect();
        assert!(!in_hull(x, &others), "vertex {k} lies in the hull of the others");
    }
    for x in &pts {
        assert!(in_hull(x, verts));
    }
}

#[test]
fn face_counts() {
    assert_eq!(cube(3).face_lattice().counts(), vec![8, 12, 6, 1]);
    assert_eq!(octahedron().face_lattice().counts(), vec![6, 12, 8, 1]);
    assert_eq!(cube(4).face_lattice().counts(), vec![16, 32, 24, 8, 1]);
}

#[test]
fn euler_relation_on_random_four_polytopes() {
    let mut rng = RandomStream::new(22);
    for _ in 0..3 {
        let pts: Vec<Vector> = (0..14).map(|_| rng.gaussian_vector(4)).collect();
        let counts = Polytope::convex_hull(&pts).unwrap().face_lattice().counts();
        let alt: i64 = counts.iter().enumerate().map(|(k, &c)| if k % 2 == 0 { c as i64 } else { -(c as i64) }).sum();
        // Including the polytope itself the alternating sum is 1; over proper faces of a 4-polytope it is 0.
        assert_eq!(alt, 1, "counts {counts:?}");
        assert_eq!(alt - counts[4] as i64, 0);
    }
}

#[test]
fn lattice_is_sorted_and_incidences_consistent() {
    let p = octahedron();
    let lat = p.face_lattice();
    for k in 0..3 {
        let faces = lat.faces(k);
        assert!(faces.windows(2).all(|w| w[0].vertex_ids < w[1].vertex_ids));
        for (idx, f) in faces.iter().enumerate() {
            assert_eq!(f.dim, k);
            for &up in lat.covering(FaceId { dim: k, index: idx }) {
                let g = &lat.faces(k + 1)[up];
                assert!(f.vertex_ids.iter().all(|x| g.vertex_ids.contains(x)));
            }
        }
    }
}

#[test]
fn face_volumes() {
    let c = cube(3);
    assert!(c.face_lattice().faces(2).iter().all(|f| (f.volume - 1.0).abs() < 1e-12));
    assert!(c.face_lattice().faces(0).iter().all(|f| f.volume == 1.0));
    let tri = 3f64.sqrt() / 2.0;
    assert!(octahedron().face_lattice().faces(2).iter().all(|f| (f.volume - tri).abs() < 1e-12));
}

#[test]
fn normal_cones_of_cube() {
    let c = cube(3);
    let lat = c.face_lattice();
    let top = lat.faces(2).iter().find(|f| f.vertex_ids.iter().all(|&k| c.vertices()[k][2] == 1.0)).unwrap();
    let cone = c.normal_cone(top);
    assert_eq!(cone.generators.len(), 1);
    assert!((&cone.generators[0] - v(&[0.0, 0.0, 1.0])).norm() < 1e-12);

    let edge = lat
        .faces(1)
        .iter()
        .find(|f| f.vertex_ids.iter().all(|&k| c.vertices()[k][0] == 1.0 && c.vertices()[k][1] == 1.0))
        .unwrap();
    let cone = c.normal_cone(edge);
    assert_eq!(cone.dim(), 2);
    for g in &cone.generators {
        assert!((g - v(&[1.0, 0.0, 0.0])).norm() < 1e-12 || (g - v(&[0.0, 1.0, 0.0])).norm() < 1e-12);
    }
}

/// Vertex normal cones tile the sphere: sampled frequencies match the angles.
#[test]
fn vertex_angles_match_sampled_normal_cones() {
    let mut rng = RandomStream::new(23);
    let pts: Vec<Vector> = (0..12).map(|_| rng.gaussian_vector(3)).collect();
    let p = Polytope::convex_hull(&pts).unwrap();
    let nv = p.vertices().len();
    let samples = 200_000;
    let mut hits = vec![0usize; nv];
    for _ in 0..samples {
        let u = rng.unit_vector(3);
        let best = (0..nv).max_by(|&a, &b| p.vertices()[a].dot(&u).total_cmp(&p.vertices()[b].dot(&u))).unwrap();
        hits[best] += 1;
    }
    let lat = p.face_lattice();
    let mut total = 0.0;
    for (idx, face) in lat.faces(0).iter().enumerate() {
        let gamma = p.exterior_angle(FaceId { dim: 0, index: idx }).unwrap();
        total += gamma;
        let freq = hits[face.vertex_ids[0]] as f64 / samples as f64;
        let sigma = (gamma * (1.0 - gamma) / samples as f64).sqrt();
        assert!((freq - gamma).abs() <= 4.0 * sigma + 1e-12, "vertex {idx}: {freq} vs {gamma}");
    }
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn cube_exterior_angles() {
    let c = cube(3);
    let expect = [0.125, 0.25, 0.5];
    for (k, want) in expect.iter().enumerate() {
        for idx in 0..c.face_lattice().faces(k).len() {
            let g = c.exterior_angle(FaceId { dim: k, index: idx }).unwrap();
            assert!((g - want).abs() < 1e-12, "dim {k}: {g}");
        }
    }
    assert!(matches!(c.exterior_angle(FaceId { dim: 3, index: 0 }), Err(Error::DegenerateFace)));
}

#[test]
fn four_cube_vertex_angle_by_sampling() {
    let c = cube(4);
    let est = c.exterior_angle_estimate(FaceId { dim: 0, index: 0 }).unwrap();
    assert!(est.stderr > 0.0);
    assert!((est.value - 1.0 / 16.0).abs() <= 4.0 * est.stderr, "{est:?}");
}

#[test]
fn central_symmetry() {
    assert!(regular_polygon(4).is_centrally_symmetric());
    assert!(!regular_polygon(3).is_centrally_symmetric());
    let oct = octahedron();
    assert!(oct.is_centrally_symmetric());
    let (ok, bad) = oct.has_centrally_symmetric_k_faces(2);
    assert!(!ok);
    assert_eq!(bad, (0..8).collect::<Vec<_>>());
    assert_eq!(cube(3).has_centrally_symmetric_k_faces(2), (true, vec![]));
}

#[test]
fn zonotope_faces_are_symmetric() {
    let mut rng = RandomStream::new(24);
    let mut checked = 0;
    while checked < 1000 {
        let z = random_zonotope(3, 5, &mut rng);
        for k in 1..=2 {
            for f in z.face_lattice().faces(k) {
                assert!(is_centrally_symmetric_points(&z.face_vertices(f), 1e-9));
                checked += 1;
            }
        }
    }
    for k in [2, 3] {
        let z = random_zonotope(4, 6, &mut rng);
        assert!(z.has_centrally_symmetric_k_faces(k).0);
    }
}

#[test]
fn parallel_faces_of_symmetric_face_bodies_have_equal_volume() {
    let mut rng = RandomStream::new(25);
    for _ in 0..5 {
        let z = random_zonotope(3, 4, &mut rng);
        let faces = z.face_lattice().faces(1);
        for a in faces {
            for b in faces {
                if a.direction().unwrap().projector_distance(&b.direction().unwrap()) < 1e-9 {
                    assert!((a.volume - b.volume).abs() < 1e-9);
                }
            }
        }
    }
}

/// Among random zonotopes, cubes and cross-polytopes, symmetry of all 2-faces
/// coincides with symmetry of all faces.
#[test]
fn face_symmetry_propagates_upward() {
    let mut rng = RandomStream::new(26);
    let mut corpus: Vec<Polytope> = (0..20).map(|_| random_zonotope(4, 5, &mut rng)).collect();
    corpus.push(cube(4));
    corpus.push(convex_valuations::shapes::cross_polytope(4));
    for p in &corpus {
        let two = p.has_centrally_symmetric_k_faces(2).0;
        let all = (1..=4).all(|k| p.has_centrally_symmetric_k_faces(k).0);
        assert_eq!(two, all);
    }
}

#[test]
fn minkowski_sums() {
    let c = cube(3);
    let shift = v(&[0.5, -1.0, 2.0]);
    let point = Polytope::convex_hull(std::slice::from_ref(&shift)).unwrap();
    assert!(c.minkowski_sum(&point).unwrap().same_as(&c.translated(&shift)));
    let o = Vector::zeros(3);
    let axes = [v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0]), v(&[0.0, 0.0, 1.0])];
    let mut acc = segment(&o, &axes[0]);
    for a in &axes[1..] {
        acc = acc.minkowski_sum(&segment(&o, a)).unwrap();
    }
    assert!(acc.same_as(&c));
    assert!(matches!(c.minkowski_sum(&cube(2)), Err(Error::DimensionMismatch { .. })));

    let mut rng = RandomStream::new(27);
    for _ in 0..10 {
        let p = Polytope::convex_hull(&(0..8).map(|_| rng.gaussian_vector(3)).collect::<Vec<_>>()).unwrap();
        let q = Polytope::convex_hull(&(0..6).map(|_| rng.gaussian_vector(3)).collect::<Vec<_>>()).unwrap();
        let s = p.minkowski_sum(&q).unwrap();
        for _ in 0..100 {
            let x = rng.gaussian_vector(3);
            assert!((s.support(&x) - p.support(&x) - q.support(&x)).abs() < 1e-9);
        }
    }
}

#[test]
fn projections_of_cube() {
    let c = cube(3);
    let sq = c.project(&Subspace::coordinate(3, &[0, 1]).unwrap()).unwrap();
    assert_eq!(sq.ambient_dim(), 2);
    assert!(sq.same_as(&cube(2)));
    let line = c.project(&Subspace::line(&v(&[1.0, 1.0, 1.0])).unwrap()).unwrap();
    let ends: Vec<f64> = line.vertices().iter().map(|x| x[0]).collect();
    assert!(((ends[1] - ends[0]).abs() - 3f64.sqrt()).abs() < 1e-12);
    let hex = c.project(&Subspace::line(&v(&[1.0, 1.0, 1.0])).unwrap().perp()).unwrap();
    assert_eq!(hex.vertices().len(), 6);
    assert!((hex.volume() - 3f64.sqrt()).abs() < 1e-9);
}

#[test]
fn support_function() {
    assert!((cube(3).support(&v(&[1.0, 1.0, 1.0])) - 3.0).abs() < 1e-15);
    assert!((octahedron().support(&v(&[1.0, 0.0, 0.0])) - 1.0).abs() < 1e-15);
    let mut rng = RandomStream::new(28);
    let p = Polytope::convex_hull(&(0..10).map(|_| rng.gaussian_vector(3)).collect::<Vec<_>>()).unwrap();
    for _ in 0..50 {
        let x = rng.gaussian_vector(3);
        let t = rng.uniform_range(0.0, 5.0);
        assert!((p.support(&(&x * t)) - t * p.support(&x)).abs() < 1e-9);
    }
}

#[test]
fn hausdorff_distance() {
    let c = cube(3);
    let shift = v(&[0.3, -0.4, 1.2]);
    assert!((c.hausdorff_distance(&c.translated(&shift)).unwrap() - shift.norm()).abs() < 1e-9);

    let r = 0.25;
    let grown = c.minkowski_sum(&ball_approximant(3).unwrap().scaled(r)).unwrap();
    let want = r * ball_radius(3).unwrap();
    assert!((c.hausdorff_distance(&grown).unwrap() - want).abs() < 1e-9);

    let mut rng = RandomStream::new(29);
    let p = Polytope::convex_hull(&(0..7).map(|_| rng.gaussian_vector(3)).collect::<Vec<_>>()).unwrap();
    let d1 = p.hausdorff_distance(&c).unwrap();
    let d2 = c.hausdorff_distance(&p).unwrap();
    assert!((d1 - d2).abs() < 1e-12);
    // Support-function oracle: d_H = sup_u |h_P(u) - h_C(u)|.
    let sup = (0..20_000)
        .map(|_| {
            let u = rng.unit_vector(3);
            (p.support(&u) - c.support(&u)).abs()
        })
        .fold(0.0, f64::max);
    assert!(sup <= d1 + 1e-9 && d1 - sup < 0.02 * d1, "{sup} vs {d1}");
}

#[test]
fn lower_dimensional_bodies_live_in_their_hull() {
    let square = Polytope::convex_hull(&[
        v(&[0.0, 0.0, 1.0]),
        v(&[1.0, 0.0, 1.0]),
        v(&[0.0, 1.0, 1.0]),
        v(&[1.0, 1.0, 1.0]),
    ])
    .unwrap();
    assert_eq!(square.dim(), 2);
    assert_eq!(square.volume(), 0.0);
    assert!((square.relative_volume() - 1.0).abs() < 1e-12);
    assert_eq!(square.face_lattice().counts(), vec![4, 4, 1]);
    assert!((boxed(&[2.0, 3.0]).volume() - 6.0).abs() < 1e-12);
    assert!((regular_polygon(6).volume() - 1.5 * 3f64.sqrt()).abs() < 1e-12);
    assert!((regular_polygon(400).volume() - PI).abs() < 1e-3);
}

#[test]
fn polytope_json_forms() {
    let p: PolytopeJson = serde_json::from_str(r#"{"n": 2, "generators": [[1, 0], [0, 2]], "center": [0, 0]}"#).unwrap();
    let p = p.into_polytope().unwrap();
    assert!((p.volume() - 2.0).abs() < 1e-12);
    let q: PolytopeJson = serde_json::from_str(r#"{"n": 2, "vertices": [[0, 0], [1, 0], [0, 1], [0.2, 0.2]]}"#).unwrap();
    assert_eq!(q.into_polytope().unwrap().vertices().len(), 3);
}
