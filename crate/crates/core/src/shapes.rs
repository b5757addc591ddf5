//! Canonical test bodies.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::polytope::Polytope;
use crate::rng::RandomStream;
use crate::subspace::Vector;
use crate::volumes::omega;

fn unit(n: usize, k: usize) -> Vector {
    let mut v = Vector::zeros(n);
    v[k] = 1.0;
    v
}

/// The unit cube `[0,1]^n`.
pub fn cube(n: usize) -> Polytope {
    boxed(&vec![1.0; n])
}

/// The axis-parallel box `[0,l_1] x ... x [0,l_n]`.
pub fn boxed(lengths: &[f64]) -> Polytope {
    let n = lengths.len();
    let pts: Vec<Vector> = (0..1usize << n)
        .map(|mask| Vector::from_fn(n, |k, _| if mask >> k & 1 == 1 { lengths[k] } else { 0.0 }))
        .collect();
    Polytope::convex_hull(&pts).expect("box corners")
}

/// `conv{±e_1, ..., ±e_n}`.
pub fn cross_polytope(n: usize) -> Polytope {
    let pts: Vec<Vector> = (0..n)
        .flat_map(|k| [unit(n, k), -unit(n, k)])
        .collect();
    Polytope::convex_hull(&pts).expect("cross-polytope vertices")
}

pub fn octahedron() -> Polytope {
    cross_polytope(3)
}

/// Standard simplex `conv{0, e_1, ..., e_n}`.
pub fn simplex(n: usize) -> Polytope {
    let mut pts = vec![Vector::zeros(n)];
    pts.extend((0..n).map(|k| unit(n, k)));
    Polytope::convex_hull(&pts).expect("simplex vertices")
}

/// The segment `[a, b]`.
pub fn segment(a: &Vector, b: &Vector) -> Polytope {
    Polytope::convex_hull(&[a.clone(), b.clone()]).expect("segment endpoints")
}

/// Zonotope `sum_j [0, g_j]`.
pub fn zonotope(n: usize, generators: &[Vector]) -> Result<Polytope> {
    let mut acc = Polytope::convex_hull(&[Vector::zeros(n)])?;
    for g in generators {
        if g.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: g.len() });
        }
        acc = acc.minkowski_sum(&segment(&Vector::zeros(n), g))?;
    }
    Ok(acc)
}

/// Regular `m`-gon inscribed in the unit circle.
pub fn regular_polygon(m: usize) -> Polytope {
    let pts: Vec<Vector> = (0..m)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / m as f64;
            Vector::from_vec(vec![t.cos(), t.sin()])
        })
        .collect();
    Polytope::convex_hull(&pts).expect("polygon vertices")
}

pub(crate) fn fibonacci_hemisphere(m: usize) -> Vec<Vector> {
    // m points spread over the upper hemisphere; reflected copies fill the rest.
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..m)
        .map(|k| {
            let z = (k as f64 + 0.5) / m as f64;
            let r = (1.0 - z * z).sqrt();
            let t = golden * k as f64;
            Vector::from_vec(vec![r * t.cos(), r * t.sin(), z])
        })
        .collect()
}

fn repelled_points(n: usize, m: usize, seed: u64) -> Vec<Vector> {
    let mut rng = RandomStream::new(seed);
    let mut pts: Vec<Vector> = (0..m).map(|_| rng.unit_vector(n)).collect();
    for _ in 0..200 {
        let all: Vec<Vector> = pts.iter().cloned().chain(pts.iter().map(|p| -p)).collect();
        let mut next = Vec::with_capacity(m);
        for p in &pts {
            let mut force = Vector::zeros(n);
            for q in &all {
                let d = p - q;
                let r2 = d.norm_squared();
                if r2 > 1e-12 {
                    force += d / (r2 * r2.sqrt() * r2.sqrt());
                }
            }
            let step = force * (0.02 / m as f64);
            let moved = p + step;
            next.push(&moved / moved.norm());
        }
        pts = next;
    }
    pts
}

/// Centrally symmetric polytope approximating the unit ball of R^n, for
/// n = 2, 3, 4 (128, 128 and 256 vertices). The vertices lie on a sphere
/// whose radius is chosen so that the volume equals that of the unit ball.
pub fn ball_approximant(n: usize) -> Result<Polytope> {
    static CACHE: [OnceLock<Polytope>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    if !(2..=4).contains(&n) {
        return Err(Error::BadDimension(format!("ball approximant needs n in 2..=4, got {n}")));
    }
    Ok(CACHE[n - 2]
        .get_or_init(|| {
            let base = match n {
                2 => regular_polygon(128),
                3 => {
                    let half = fibonacci_hemisphere(64);
                    let pts: Vec<Vector> = half.iter().cloned().chain(half.iter().map(|p| -p)).collect();
                    Polytope::convex_hull(&pts).expect("sphere points")
                }
                _ => {
                    let half = repelled_points(4, 128, 0xBA11);
                    let pts: Vec<Vector> = half.iter().cloned().chain(half.iter().map(|p| -p)).collect();
                    Polytope::convex_hull(&pts).expect("sphere points")
                }
            };
            let s = (omega(n) / base.volume()).powf(1.0 / n as f64);
            base.scaled(s)
        })
        .clone())
}

/// Circumradius of the ball approximant.
pub fn ball_radius(n: usize) -> Result<f64> {
    let b = ball_approximant(n)?;
    Ok(b.vertices()[0].norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_and_octahedron_volumes() {
        assert!((cube(3).volume() - 1.0).abs() < 1e-12);
        assert!((octahedron().volume() - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn axis_segments_sum_to_cube() {
        let gens: Vec<Vector> = (0..3).map(|k| unit(3, k)).collect();
        let z = zonotope(3, &gens).unwrap();
        assert!(z.same_as(&cube(3)));
    }

    #[test]
    fn ball_approximants_have_ball_volume() {
        for n in 2..=4 {
            let b = ball_approximant(n).unwrap();
            assert!((b.volume() - omega(n)).abs() < 1e-9 * omega(n));
            assert!(b.is_centrally_symmetric());
        }
        assert_eq!(ball_approximant(3).unwrap().vertices().len(), 128);
        assert_eq!(ball_approximant(4).unwrap().vertices().len(), 256);
    }
}
