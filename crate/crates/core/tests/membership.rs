use convex_valuations::membership::{
    audit_grid, decide_g, hemisphere_grid, representing_measure, shift_to_strict, verify_integral_rep, zonoid_witness,
    Verdict, WitnessOutcome,
};
use convex_valuations::shapes::{cross_polytope, cube, octahedron, simplex, zonotope};
use convex_valuations::subspace::sample_uniform;
use convex_valuations::transforms::cosine_transform_measure;
use convex_valuations::volumes::{intrinsic_volume, projection_volume};
use convex_valuations::{AtomicGrassMeasure, Error, Polytope, RandomStream, Subspace, Term, Vector};

fn random_zonotope(n: usize, k: usize, rng: &mut RandomStream) -> Polytope {
    let gens: Vec<Vector> = (0..k).map(|_| rng.gaussian_vector(n)).collect();
    zonotope(n, &gens).unwrap()
}

#[test]
fn verdicts() {
    assert_eq!(decide_g(&cube(3), 1).unwrap().verdict, Verdict::Member);
    let oct = decide_g(&octahedron(), 1).unwrap();
    assert_eq!(oct.verdict, Verdict::NonMember);
    assert_eq!(oct.violating_faces.as_ref().unwrap().len(), 8);
    assert!(oct.measure.is_none());
    let c4 = decide_g(&cube(4), 2).unwrap();
    assert_eq!(c4.verdict, Verdict::Member);
    assert!(c4.violating_faces.is_none() && c4.measure.is_some());
    assert!(matches!(decide_g(&simplex(3), 1), Err(Error::NotCentrallySymmetric)));
    assert!(decide_g(&cube(3), 3).is_err());
}

#[test]
fn top_degree_is_always_member() {
    let mut rng = RandomStream::new(71);
    for n in 3..=4 {
        for _ in 0..3 {
            let pts: Vec<Vector> = (0..6).map(|_| rng.gaussian_vector(n)).collect();
            let mut sym = pts.clone();
            sym.extend(pts.iter().map(|p| -p));
            let p = Polytope::convex_hull(&sym).unwrap();
            let cert = decide_g(&p, n - 1).unwrap();
            assert_eq!(cert.verdict, Verdict::Member);
            assert!(cert.residuals.unwrap().max_residual < 1e-6);
        }
    }
}

#[test]
fn cube_measure_has_axis_atoms() {
    let mu = representing_measure(&cube(3), 1).unwrap();
    assert_eq!(mu.atoms.len(), 3);
    for (e, w) in &mu.atoms {
        assert!((w - 1.0).abs() < 1e-12);
        assert!((0..3).any(|k| e.same_as(&Subspace::coordinate(3, &[k]).unwrap())));
    }
    // vol_1(cube | L) = sum_j cos(F_j, L) on random lines; the diagonal gives sqrt 3.
    let mut rng = RandomStream::new(72);
    for _ in 0..100 {
        let l = sample_uniform(3, 1, &mut rng).unwrap();
        let lhs = projection_volume(&cube(3), &l).unwrap();
        assert!((lhs - cosine_transform_measure(&mu, &l).unwrap()).abs() < 1e-12);
    }
    let diag = Subspace::line(&Vector::from_element(3, 1.0)).unwrap();
    assert!((cosine_transform_measure(&mu, &diag).unwrap() - 3f64.sqrt()).abs() < 1e-12);
}

#[test]
fn measure_weights_scale_with_degree() {
    let s: f64 = 1.7;
    for i in 1..=2 {
        let mu = representing_measure(&cube(3).scaled(s), i).unwrap();
        assert!(mu.atoms.iter().all(|(_, w)| (w - s.powi(i as i32)).abs() < 1e-9));
    }
}

/// In degree n-1 the atoms sit at facet directions with the facet area (one per ± pair).
#[test]
fn top_degree_measure_uses_facet_areas() {
    let mut rng = RandomStream::new(73);
    let z = random_zonotope(3, 4, &mut rng);
    let mu = representing_measure(&z, 2).unwrap();
    let facets = z.face_lattice().faces(2);
    assert_eq!(mu.atoms.len() * 2, facets.len());
    for (e, w) in &mu.atoms {
        let areas: Vec<f64> = facets
            .iter()
            .filter(|f| f.direction().unwrap().same_as(e))
            .map(|f| f.volume)
            .collect();
        assert_eq!(areas.len(), 2);
        assert!((w - areas[0]).abs() < 1e-9);
    }
    let report = verify_integral_rep(&z, 2, &mu, 100, 3, &mut rng).unwrap();
    assert!(report.max_residual < 1e-8);
    assert!(report.klain_residual.unwrap() < 1e-6);
}

#[test]
fn residual_detects_wrong_normalization() {
    let p = cube(3);
    let mu = representing_measure(&p, 2).unwrap();
    let doubled = verify_integral_rep(&p, 2, &mu.scaled(2.0), 50, 0, &mut RandomStream::new(74)).unwrap();
    let empty = AtomicGrassMeasure::new(3, 2, vec![]).unwrap();
    let none = verify_integral_rep(&p, 2, &empty, 50, 0, &mut RandomStream::new(74)).unwrap();
    assert!((doubled.max_residual - none.max_residual).abs() < 1e-12);
    assert!(none.max_residual > 1.0 && none.max_residual <= 3f64.sqrt() + 1e-12);
}

#[test]
fn zonotopes_are_members_for_every_degree() {
    let mut rng = RandomStream::new(75);
    for _ in 0..4 {
        let n = 3 + rng.index(2);
        let k = n + rng.index(7);
        let z = random_zonotope(n, k, &mut rng);
        for i in 1..n {
            let cert = decide_g(&z, i).unwrap();
            assert_eq!(cert.verdict, Verdict::Member, "n {n}, {k} generators, i {i}");
            assert!(cert.residuals.unwrap().max_residual < 1e-6);
        }
    }
}

#[test]
fn zonotopes_admit_no_witness() {
    let mut rng = RandomStream::new(76);
    for _ in 0..3 {
        let z = random_zonotope(3, 3 + rng.index(8), &mut rng);
        assert!(matches!(zonoid_witness(&z, 120).unwrap(), WitnessOutcome::NoneFound { .. }));
    }
}

#[test]
fn cross_polytope_faces_named() {
    let c = decide_g(&cross_polytope(4), 1).unwrap();
    let faces = c.violating_faces.unwrap();
    assert_eq!(faces.len(), 32);
    assert!(faces.iter().all(|f| f.dim == 2));
}

#[test]
fn octahedron_witness() {
    let oct = octahedron();
    let WitnessOutcome::Found(w) = zonoid_witness(&oct, 240).unwrap() else {
        panic!("expected a witness");
    };
    assert!(w.objective < -1e-6);
    assert!(w.min_cosine >= -1e-9);
    // Atoms are even: every v comes with -v and the same weight.
    for (u, rho) in &w.atoms {
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        assert!(w.atoms.iter().any(|(x, r)| x == &neg && r == rho));
    }
    let spec = w.spec();
    assert!((spec.evaluate(&oct).unwrap() - w.objective).abs() < 1e-9);

    let shifted = shift_to_strict(&w, &oct).unwrap();
    assert!(shifted.audit_min_after > 0.0);
    assert!(shifted.value_after < 0.0);
    assert_eq!(shifted.audit_size, audit_grid(3, 240).len());
    let v1 = intrinsic_volume(&oct, 1);
    assert!((shifted.value_after - (shifted.value_before + shifted.t * v1)).abs() < 1e-12);
    for u in audit_grid(3, 240).iter().step_by(37) {
        assert!(shifted.spec.klain(&Subspace::line(u).unwrap()).unwrap() > 0.0);
    }
    assert!(shifted.spec.terms.iter().any(|t| matches!(t, Term::Intrinsic { i: 1, .. })) || shifted.t == 0.0);
}

#[test]
fn witness_needs_symmetric_body() {
    assert!(matches!(zonoid_witness(&simplex(3), 60), Err(Error::NotCentrallySymmetric)));
}

#[test]
fn hemisphere_grids() {
    for n in 2..=4 {
        let g = hemisphere_grid(n, 50);
        assert_eq!(g.len(), 50);
        assert!(g.iter().all(|u| (u.norm() - 1.0).abs() < 1e-12));
        // No antipodal pairs.
        for a in &g {
            for b in &g {
                assert!((a + b).norm() > 1e-9);
            }
        }
    }
}
