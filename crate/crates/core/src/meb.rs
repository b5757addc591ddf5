//! Minimum enclosing ball by Welzl's algorithm with the move-to-front heuristic.

use nalgebra::{DMatrix, DVector};

use crate::subspace::Vector;

#[derive(Clone, Debug)]
pub struct Ball {
    pub center: Vector,
    pub radius: f64,
}

/// Smallest ball containing all `points`. Points should span their ambient
/// space (use affine-hull coordinates for degenerate sets).
pub fn min_enclosing_ball(points: &[Vector]) -> Ball {
    assert!(!points.is_empty(), "min_enclosing_ball of no points");
    let d = points[0].len();
    let scale = points
        .iter()
        .map(|p| (p - &points[0]).norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut order: Vec<usize> = (0..points.len()).collect();
    let mut support = Vec::with_capacity(d + 1);
    let ball = mtf(points, &mut order, points.len(), &mut support, d, 1e-12 * scale);
    // A pass over the input guards against rounding in the recursion.
    let slack = points
        .iter()
        .map(|p| (p - &ball.center).norm() - ball.radius)
        .fold(0.0, f64::max);
    Ball {
        center: ball.center,
        radius: ball.radius + slack,
    }
}

fn mtf(
    points: &[Vector],
    order: &mut Vec<usize>,
    end: usize,
    support: &mut Vec<usize>,
    d: usize,
    eps: f64,
) -> Ball {
    let mut ball = circumball(points, support, d);
    if support.len() == d + 1 {
        return ball;
    }
    let mut i = 0;
    while i < end {
        let k = order[i];
        if (&points[k] - &ball.center).norm() > ball.radius + eps {
            support.push(k);
            ball = mtf(points, order, i, support, d, eps);
            support.pop();
            order.remove(i);
            order.insert(0, k);
        }
        i += 1;
    }
    ball
}

/// Smallest ball with all support points on its boundary.
fn circumball(points: &[Vector], support: &[usize], d: usize) -> Ball {
    match support.len() {
        0 => Ball {
            center: Vector::zeros(d),
            radius: -1.0,
        },
        1 => Ball {
            center: points[support[0]].clone(),
            radius: 0.0,
        },
        m => {
            let p0 = &points[support[0]];
            let diffs: Vec<Vector> = support[1..].iter().map(|&k| &points[k] - p0).collect();
            let k = m - 1;
            let mut gram = DMatrix::zeros(k, k);
            let mut rhs = DVector::zeros(k);
            for a in 0..k {
                for b in 0..k {
                    gram[(a, b)] = diffs[a].dot(&diffs[b]);
                }
                rhs[a] = diffs[a].norm_squared() / 2.0;
            }
            let lambda = gram
                .clone()
                .lu()
                .solve(&rhs)
                .unwrap_or_else(|| gram.svd(true, true).solve(&rhs, 1e-14).expect("svd solve"));
            let mut center = p0.clone();
            for (l, v) in lambda.iter().zip(&diffs) {
                center.axpy(*l, v, 1.0);
            }
            let radius = support
                .iter()
                .map(|&s| (&points[s] - &center).norm())
                .fold(0.0, f64::max);
            Ball { center, radius }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_corners() {
        let pts: Vec<Vector> = (0..8)
            .map(|m: usize| Vector::from_fn(3, |k, _| (m >> k & 1) as f64))
            .collect();
        let b = min_enclosing_ball(&pts);
        assert!((b.radius - 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((b.center - Vector::from_element(3, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn obtuse_triangle_uses_long_edge() {
        let pts = vec![
            Vector::from_vec(vec![0.0, 0.0]),
            Vector::from_vec(vec![4.0, 0.0]),
            Vector::from_vec(vec![2.0, 0.5]),
        ];
        let b = min_enclosing_ball(&pts);
        assert!((b.radius - 2.0).abs() < 1e-12);
    }
}
