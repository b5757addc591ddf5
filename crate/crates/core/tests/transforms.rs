use std::cell::RefCell;
use std::f64::consts::PI;

use convex_valuations::estimate::mean_estimate;
use convex_valuations::subspace::{random_rotation, sample_uniform};
use convex_valuations::transforms::{
    check_adjoint, check_cos_perp_duality, check_cosine_self_adjoint, cosine_transform, cosine_transform_measure,
    radon, radon_measure,
};
use convex_valuations::volumes::{binom, frame_cube};
use convex_valuations::{AtomicGrassMeasure, GrassFunction, RandomStream, Subspace, Term, ValuationSpec, Vector};

fn v(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

fn cos2_to(target: Subspace) -> impl Fn(&Subspace) -> f64 {
    move |e: &Subspace| e.cos_angle(&target).unwrap().powi(2)
}

#[test]
fn radon_of_constant_is_exact() {
    let mut rng = RandomStream::new(51);
    for (n, i, j) in [(3, 1, 2), (4, 1, 3), (4, 3, 1), (5, 2, 4)] {
        let f = GrassFunction::constant(n, i, 1.0);
        let big_f = sample_uniform(n, j, &mut rng).unwrap();
        let r = radon(&f, &big_f, 50, &mut rng).unwrap();
        assert_eq!(r.value, 1.0);
    }
    let f = GrassFunction::new(3, 2, |_| 7.0);
    let same = Subspace::coordinate(3, &[0, 1]).unwrap();
    assert_eq!(radon(&f, &same, 10, &mut rng).unwrap().value, 7.0);
}

/// Mean of `cos^2` over lines in a plane is `(1/pi) int_0^pi cos^2 = 1/2`.
#[test]
fn radon_of_cos_squared_over_a_plane() {
    let mut rng = RandomStream::new(52);
    let f = GrassFunction::new(3, 1, cos2_to(Subspace::coordinate(3, &[0]).unwrap()));
    let plane = Subspace::coordinate(3, &[0, 1]).unwrap();
    let r = radon(&f, &plane, 100_000, &mut rng).unwrap();
    assert!((r.value - 0.5).abs() <= 3.0 * r.stderr, "{r:?}");
}

#[test]
fn radon_composes() {
    let mut rng = RandomStream::new(53);
    let f = GrassFunction::new(4, 1, cos2_to(Subspace::line(&v(&[1.0, 0.5, -0.5, 2.0])).unwrap()));
    let big_f = sample_uniform(4, 3, &mut rng).unwrap();
    let direct = radon(&f, &big_f, 50_000, &mut rng.derive(1)).unwrap();
    let inner = RefCell::new(rng.derive(2));
    let mid = GrassFunction::new(4, 2, |g: &Subspace| radon(&f, g, 1, &mut inner.borrow_mut()).unwrap().value);
    let nested = radon(&mid, &big_f, 50_000, &mut rng.derive(3)).unwrap();
    assert!((direct.value - nested.value).abs() <= 3.0 * direct.stderr.hypot(nested.stderr));
}

#[test]
fn radon_measures() {
    let mut rng = RandomStream::new(54);
    let e = sample_uniform(4, 2, &mut rng).unwrap();
    let single = AtomicGrassMeasure::new(4, 2, vec![(e.clone(), 1.0)]).unwrap();
    let one = GrassFunction::constant(4, 3, 1.0);
    assert_eq!(radon_measure(&single, 3).integrate(&one, 10, &mut rng).unwrap().value, 1.0);

    let atoms: Vec<(Subspace, f64)> = (0..4).map(|k| (sample_uniform(4, 2, &mut rng).unwrap(), 0.5 + k as f64)).collect();
    let mu = AtomicGrassMeasure::new(4, 2, atoms).unwrap();
    assert_eq!(radon_measure(&mu, 1).integrate(&GrassFunction::constant(4, 1, 1.0), 10, &mut rng).unwrap().value, mu.total_mass());

    // Linearity in the measure, with a common stream per atom.
    let g = GrassFunction::new(4, 1, cos2_to(Subspace::coordinate(4, &[2]).unwrap()));
    let a = radon_measure(&mu, 1).integrate(&g, 500, &mut RandomStream::new(5)).unwrap();
    let b = radon_measure(&mu.scaled(-2.5), 1).integrate(&g, 500, &mut RandomStream::new(5)).unwrap();
    assert!((b.value + 2.5 * a.value).abs() < 1e-12);
    assert!(matches!(
        radon_measure(&mu, 1).integrate(&GrassFunction::constant(4, 3, 1.0), 10, &mut rng),
        Err(convex_valuations::Error::DimensionMismatch { .. })
    ));
}

#[test]
fn cosine_transform_of_constant_in_the_plane() {
    let mut rng = RandomStream::new(55);
    let one = GrassFunction::constant(2, 1, 1.0);
    let e = Subspace::line(&v(&[0.3, 0.8])).unwrap();
    let c = cosine_transform(&one, &e, 100_000, &mut rng).unwrap();
    assert!((c.value - 2.0 / PI).abs() <= 3.0 * c.stderr);
}

#[test]
fn cosine_transform_of_axis_atoms() {
    let atoms = (0..3).map(|k| (Subspace::coordinate(3, &[k]).unwrap(), 1.0)).collect();
    let mu = AtomicGrassMeasure::new(3, 1, atoms).unwrap();
    let mut rng = RandomStream::new(56);
    for _ in 0..20 {
        let u = rng.unit_vector(3);
        let c = cosine_transform_measure(&mu, &Subspace::line(&u).unwrap()).unwrap();
        assert!((c - u.iter().map(|x| x.abs()).sum::<f64>()).abs() < 1e-12);
    }
}

/// `phi(K) = sum_k w_k vol_i(K|E_k)` written with mixed volumes has Klain function `C_i mu`.
#[test]
fn klain_of_projection_sums_is_the_cosine_transform() {
    let mut rng = RandomStream::new(57);
    let (n, i) = (3, 2);
    let atoms: Vec<(Subspace, f64)> = (0..3).map(|_| (sample_uniform(n, i, &mut rng).unwrap(), rng.uniform_range(-1.0, 2.0))).collect();
    let mu = AtomicGrassMeasure::new(n, i, atoms.clone()).unwrap();
    let terms = atoms
        .iter()
        .map(|(e, w)| Term::Mixed {
            coeff: w * binom(n, i),
            bodies: vec![frame_cube(&e.perp()); n - i],
        })
        .collect();
    let phi = ValuationSpec::new(terms);
    for _ in 0..10 {
        let e = sample_uniform(n, i, &mut rng).unwrap();
        let k = phi.klain(&e).unwrap();
        let c = cosine_transform_measure(&mu, &e).unwrap();
        assert!((k - c).abs() < 1e-8, "{k} vs {c}");
    }
}

#[test]
fn adjointness() {
    let mut rng = RandomStream::new(58);
    let ones = check_adjoint(&GrassFunction::constant(3, 1, 1.0), &GrassFunction::constant(3, 2, 1.0), 100, &mut rng).unwrap();
    assert_eq!((ones.lhs, ones.rhs), (1.0, 1.0));

    let f = GrassFunction::new(3, 1, cos2_to(Subspace::line(&v(&[1.0, 1.0, 0.0])).unwrap()));
    let g = GrassFunction::new(3, 2, cos2_to(Subspace::coordinate(3, &[1, 2]).unwrap()));
    let chk = check_adjoint(&f, &g, 100_000, &mut rng).unwrap();
    assert!(chk.agrees(3.0, 0.0), "{chk:?}");

    let swapped = check_adjoint(&g, &f, 100_000, &mut RandomStream::new(59)).unwrap();
    let forward = check_adjoint(&f, &g, 100_000, &mut RandomStream::new(59)).unwrap();
    assert!((swapped.lhs - forward.rhs).abs() <= 3.0 * swapped.combined_stderr());
    assert!((swapped.rhs - forward.lhs).abs() <= 3.0 * swapped.combined_stderr());
}

#[test]
fn cosine_perp_duality() {
    let mut rng = RandomStream::new(60);
    let one = GrassFunction::constant(3, 1, 1.0);
    let e = Subspace::line(&v(&[0.2, 0.4, 1.0])).unwrap();
    let c = check_cos_perp_duality(&one, &e, 50_000, &mut rng).unwrap();
    assert!(c.agrees(3.0, 0.0), "{c:?}");
    // For G_1 and G_2 of R^3 the constant is 1/2 in both cases.
    assert!((c.lhs - 0.5).abs() <= 3.0 * c.lhs_stderr);

    let w = v(&[1.0, -0.3, 0.6]);
    let smooth = GrassFunction::new(3, 1, move |e: &Subspace| (2.0 * e.frame().column(0).dot(&w)).cos().powi(2));
    let d = check_cos_perp_duality(&smooth, &e, 100_000, &mut rng).unwrap();
    assert!(d.agrees(3.0, 0.0), "{d:?}");
}

#[test]
fn cosine_transform_is_self_adjoint() {
    let mut rng = RandomStream::new(61);
    let f = GrassFunction::new(3, 1, cos2_to(Subspace::coordinate(3, &[0]).unwrap()));
    let g = GrassFunction::new(3, 1, |e: &Subspace| 1.0 + e.frame()[(2, 0)].abs());
    let c = check_cosine_self_adjoint(&f, &g, 100_000, &mut rng).unwrap();
    assert!(c.agrees(3.0, 0.0), "{c:?}");
}

/// Rotating both the argument and the function leaves the transforms unchanged.
#[test]
fn transforms_intertwine_rotations() {
    let mut rng = RandomStream::new(62);
    let q = random_rotation(3, &mut rng);
    let l0 = Subspace::line(&v(&[1.0, 2.0, 3.0])).unwrap();
    let l1 = l0.rotated(&q);
    let f = GrassFunction::new(3, 1, cos2_to(l0));
    let fq = GrassFunction::new(3, 1, cos2_to(l1));
    let e = Subspace::coordinate(3, &[0, 2]).unwrap();
    let a = radon(&f, &e, 50_000, &mut rng.derive(1)).unwrap();
    let b = radon(&fq, &e.rotated(&q), 50_000, &mut rng.derive(2)).unwrap();
    assert!((a.value - b.value).abs() <= 3.0 * a.stderr.hypot(b.stderr));
    let x = Subspace::coordinate(3, &[1]).unwrap();
    let a = cosine_transform(&f, &x, 50_000, &mut rng.derive(3)).unwrap();
    let b = cosine_transform(&fq, &x.rotated(&q), 50_000, &mut rng.derive(4)).unwrap();
    assert!((a.value - b.value).abs() <= 3.0 * a.stderr.hypot(b.stderr));
}

/// `||C f||_2 <= ||f||_2` for the invariant probability measure.
#[test]
fn cosine_transform_is_a_contraction() {
    let mut rng = RandomStream::new(63);
    let f = GrassFunction::new(3, 2, cos2_to(Subspace::coordinate(3, &[0, 1]).unwrap()));
    let outer: Vec<Subspace> = (0..300).map(|_| sample_uniform(3, 2, &mut rng).unwrap()).collect();
    let cf2 = mean_estimate(outer.iter().map(|e| cosine_transform(&f, e, 2000, &mut rng).unwrap().value.powi(2)));
    let f2 = mean_estimate((0..20_000).map(|_| f.eval(&sample_uniform(3, 2, &mut rng).unwrap()).powi(2)));
    assert!(cf2.value <= f2.value + 3.0 * cf2.stderr.hypot(f2.stderr), "{cf2:?} vs {f2:?}");
}

#[test]
fn measure_rejects_mixed_dimensions() {
    let a = Subspace::coordinate(3, &[0]).unwrap();
    let b = Subspace::coordinate(3, &[0, 1]).unwrap();
    assert!(AtomicGrassMeasure::new(3, 1, vec![(a, 1.0), (b, 1.0)]).is_err());
}
